//! Noncommutative words in the measurement observables and the symbolic
//! expansion of the swap fidelity into moments.
//!
//! Letters are ±1-valued observables, so every letter squares to the
//! identity, and Alice's letters commute with Bob's. A canonical word is an
//! Alice block followed by a Bob block with no two equal neighbours inside
//! either block. Moments are taken real: a word and its adjoint share a
//! [`MomentKey`].

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::simulator::StateVector;

/// Coefficients below this magnitude are dropped.
pub const PRUNE_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgebraError {
    #[error("unsupported control operator: {0}")]
    UnsupportedControl(String),
    #[error("target state must be a two-qubit state with real amplitudes")]
    UnsupportedTarget,
    #[error("cannot parse word `{0}`")]
    BadWord(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Party {
    Alice,
    Bob,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Letter {
    A0,
    A1,
    A2,
    B0,
    B1,
    B2,
}

impl Letter {
    pub const ALL: [Letter; 6] = [Letter::A0, Letter::A1, Letter::A2, Letter::B0, Letter::B1, Letter::B2];

    pub fn alice(setting: usize) -> Letter {
        [Letter::A0, Letter::A1, Letter::A2][setting]
    }

    pub fn bob(setting: usize) -> Letter {
        [Letter::B0, Letter::B1, Letter::B2][setting]
    }

    pub fn party(self) -> Party {
        match self {
            Letter::A0 | Letter::A1 | Letter::A2 => Party::Alice,
            _ => Party::Bob,
        }
    }

    pub fn setting(self) -> usize {
        match self {
            Letter::A0 | Letter::B0 => 0,
            Letter::A1 | Letter::B1 => 1,
            Letter::A2 | Letter::B2 => 2,
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = if self.party() == Party::Alice { 'A' } else { 'B' };
        write!(f, "{p}{}", self.setting())
    }
}

/// A canonical word. The empty word is the identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(Vec<Letter>);

/// Cancels adjacent equal letters with a stack, which also catches the
/// cascades left behind by earlier cancellations.
fn reduce_block(block: impl Iterator<Item = Letter>) -> Vec<Letter> {
    let mut out: Vec<Letter> = Vec::new();
    for l in block {
        if out.last() == Some(&l) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

/// Moves Alice's letters ahead of Bob's (keeping each party's order) and
/// cancels squares.
pub fn canonicalize_word(letters: &[Letter]) -> Word {
    let mut out = reduce_block(letters.iter().copied().filter(|l| l.party() == Party::Alice));
    out.extend(reduce_block(letters.iter().copied().filter(|l| l.party() == Party::Bob)));
    Word(out)
}

impl Word {
    pub fn identity() -> Word {
        Word(Vec::new())
    }

    pub fn new(letters: &[Letter]) -> Word {
        canonicalize_word(letters)
    }

    pub fn letter(l: Letter) -> Word {
        Word(vec![l])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn block(&self, party: Party) -> Vec<Letter> {
        self.0.iter().copied().filter(|l| l.party() == party).collect()
    }

    pub fn adjoint(&self) -> Word {
        let rev: Vec<Letter> = self.0.iter().rev().copied().collect();
        canonicalize_word(&rev)
    }

    pub fn mul(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        canonicalize_word(&v)
    }

    pub fn key(&self) -> MomentKey {
        let adj = self.adjoint();
        MomentKey(if adj < *self { adj } else { self.clone() })
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("I");
        }
        for l in &self.0 {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = AlgebraError;

    /// Parses `"A0A1B0"`; `"I"` or `""` is the identity.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() || s == "I" {
            return Ok(Word::identity());
        }
        let bytes = s.as_bytes();
        if bytes.len() % 2 != 0 {
            return Err(AlgebraError::BadWord(s.into()));
        }
        let mut letters = Vec::new();
        for pair in bytes.chunks(2) {
            let setting = match pair[1] {
                b'0' => 0,
                b'1' => 1,
                b'2' => 2,
                _ => return Err(AlgebraError::BadWord(s.into())),
            };
            letters.push(match pair[0] {
                b'A' => Letter::alice(setting),
                b'B' => Letter::bob(setting),
                _ => return Err(AlgebraError::BadWord(s.into())),
            });
        }
        Ok(canonicalize_word(&letters))
    }
}

/// A word identified with its adjoint.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct MomentKey(Word);

impl MomentKey {
    pub fn word(&self) -> &Word {
        &self.0
    }

    pub fn identity() -> MomentKey {
        MomentKey(Word::identity())
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_identity()
    }
}

impl fmt::Display for MomentKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Real linear combination of canonical words, read as an operator.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OpPoly {
    terms: BTreeMap<Word, f64>,
}

impl OpPoly {
    pub fn zero() -> OpPoly {
        OpPoly::default()
    }

    pub fn constant(k: f64) -> OpPoly {
        OpPoly::term(Word::identity(), k)
    }

    pub fn identity() -> OpPoly {
        OpPoly::constant(1.0)
    }

    pub fn letter(l: Letter) -> OpPoly {
        OpPoly::term(Word::letter(l), 1.0)
    }

    pub fn term(w: Word, k: f64) -> OpPoly {
        let mut p = OpPoly::zero();
        p.add_term(w, k);
        p
    }

    pub fn add_term(&mut self, w: Word, k: f64) {
        let v = self.terms.entry(w).or_insert(0.0);
        *v += k;
    }

    fn pruned(mut self) -> OpPoly {
        self.terms.retain(|_, v| v.abs() > PRUNE_TOL);
        self
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, f64)> {
        self.terms.iter().map(|(w, &k)| (w, k))
    }

    pub fn coefficient(&self, w: &Word) -> f64 {
        self.terms.get(w).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &OpPoly) -> OpPoly {
        let mut out = self.clone();
        for (w, k) in other.terms() {
            out.add_term(w.clone(), k);
        }
        out.pruned()
    }

    pub fn sub(&self, other: &OpPoly) -> OpPoly {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, k: f64) -> OpPoly {
        OpPoly { terms: self.terms.iter().map(|(w, v)| (w.clone(), v * k)).collect() }.pruned()
    }

    /// Distributes the product over words and re-canonicalizes.
    pub fn mul(&self, other: &OpPoly) -> OpPoly {
        let mut out = OpPoly::zero();
        for (u, a) in self.terms() {
            for (v, b) in other.terms() {
                out.add_term(u.mul(v), a * b);
            }
        }
        out.pruned()
    }

    pub fn adjoint(&self) -> OpPoly {
        let mut out = OpPoly::zero();
        for (w, k) in self.terms() {
            out.add_term(w.adjoint(), k);
        }
        out.pruned()
    }

    /// `⟨self⟩` as a linear form in real moments.
    pub fn expectation(&self) -> MomentPolynomial {
        let mut out = MomentPolynomial::default();
        for (w, k) in self.terms() {
            *out.terms.entry(w.key()).or_insert(0.0) += k;
        }
        out.terms.retain(|_, v| v.abs() > PRUNE_TOL);
        out
    }
}

/// Real linear form over moment keys.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MomentPolynomial {
    terms: BTreeMap<MomentKey, f64>,
}

impl MomentPolynomial {
    pub fn terms(&self) -> impl Iterator<Item = (&MomentKey, f64)> {
        self.terms.iter().map(|(k, &v)| (k, v))
    }

    pub fn keys(&self) -> impl Iterator<Item = &MomentKey> {
        self.terms.keys()
    }

    pub fn coefficient(&self, key: &MomentKey) -> f64 {
        self.terms.get(key).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn evaluate(&self, mut moment: impl FnMut(&MomentKey) -> f64) -> f64 {
        self.terms.iter().map(|(k, v)| v * moment(k)).sum()
    }
}

/// `constant·I + Σ k·letter`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineOp {
    pub constant: f64,
    pub terms: Vec<(Letter, f64)>,
}

impl AffineOp {
    pub fn letter(l: Letter) -> AffineOp {
        AffineOp { constant: 0.0, terms: vec![(l, 1.0)] }
    }

    pub fn combination(terms: &[(Letter, f64)]) -> AffineOp {
        AffineOp { constant: 0.0, terms: terms.to_vec() }
    }

    pub fn to_poly(&self) -> OpPoly {
        let mut p = OpPoly::constant(self.constant);
        for &(l, k) in &self.terms {
            p.add_term(Word::letter(l), k);
        }
        p.pruned()
    }

    /// The single letter this operator equals, if any.
    pub fn as_letter(&self) -> Option<Letter> {
        let p = self.to_poly();
        let mut it = p.terms();
        match (it.next(), it.next()) {
            (Some((w, k)), None) if w.len() == 1 && (k - 1.0).abs() <= PRUNE_TOL => Some(w.letters()[0]),
            _ => None,
        }
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        self.terms.iter().filter(|(_, k)| k.abs() > PRUNE_TOL).map(|&(l, _)| l)
    }
}

impl fmt::Display for AffineOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        if self.constant.abs() > PRUNE_TOL {
            write!(f, "{}", self.constant)?;
            first = false;
        }
        for (l, k) in &self.terms {
            if k.abs() <= PRUNE_TOL {
                continue;
            }
            if !first {
                f.write_str(if *k < 0.0 { " - " } else { " + " })?;
                write!(f, "{}*{l}", k.abs())?;
            } else {
                write!(f, "{k}*{l}")?;
            }
            first = false;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

/// Symbolic control operators `Z'_A, X'_A, Z'_B, X'_B`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwapControls {
    pub za: AffineOp,
    pub xa: AffineOp,
    pub zb: AffineOp,
    pub xb: AffineOp,
}

impl SwapControls {
    pub fn from_letters(za: Letter, xa: Letter, zb: Letter, xb: Letter) -> SwapControls {
        SwapControls {
            za: AffineOp::letter(za),
            xa: AffineOp::letter(xa),
            zb: AffineOp::letter(zb),
            xb: AffineOp::letter(xb),
        }
    }

    fn check(&self) -> Result<(), AlgebraError> {
        let sides = [
            ("Z'_A", &self.za, Party::Alice),
            ("X'_A", &self.xa, Party::Alice),
            ("Z'_B", &self.zb, Party::Bob),
            ("X'_B", &self.xb, Party::Bob),
        ];
        for (name, op, party) in sides {
            if let Some(l) = op.letters().find(|l| l.party() != party) {
                return Err(AlgebraError::UnsupportedControl(format!("{name} contains {l}")));
            }
            if !op.constant.is_finite() || op.terms.iter().any(|(_, k)| !k.is_finite()) {
                return Err(AlgebraError::UnsupportedControl(format!("{name} has non-finite coefficients")));
            }
        }
        Ok(())
    }
}

/// Kraus-like branches of one side's swap acting on a fresh ancilla:
/// `K0 = (I + Z')/2`, `K1 = X'(I − Z')/2`.
fn swap_branches(z: &AffineOp, x: &AffineOp) -> [OpPoly; 2] {
    let z = z.to_poly();
    let id = OpPoly::identity();
    let k0 = id.add(&z).scale(0.5);
    let k1 = x.to_poly().mul(&id.sub(&z)).scale(0.5);
    [k0, k1]
}

/// `F = ⟨ψ|M†M|ψ⟩` with `M = Σ_ij t_ij K^A_i K^B_j`, expanded over moments.
/// `target` amplitudes are indexed `2i + j` for ancilla basis state `|ij⟩`.
pub fn expand_swap_fidelity(
    c: &SwapControls,
    target: &StateVector,
) -> Result<MomentPolynomial, AlgebraError> {
    c.check()?;
    if target.dim() != 4 || target.amplitudes().iter().any(|a| a.im.abs() > 1e-12) {
        return Err(AlgebraError::UnsupportedTarget);
    }
    let t: Vec<f64> = target.amplitudes().iter().map(|a| a.re).collect();
    let ka = swap_branches(&c.za, &c.xa);
    let kb = swap_branches(&c.zb, &c.xb);
    let mut m = OpPoly::zero();
    for i in 0..2 {
        for j in 0..2 {
            if t[2 * i + j].abs() > PRUNE_TOL {
                m = m.add(&ka[i].mul(&kb[j]).scale(t[2 * i + j]));
            }
        }
    }
    Ok(m.adjoint().mul(&m).expectation())
}
