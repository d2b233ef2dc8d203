use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::config::{AuxChoice, CriterionConfig};
use super::solver::{AffineForm, LmiProblem, PsdBlock};
use super::SdpError;
use crate::algebra::{expand_swap_fidelity, AffineOp, Letter, MomentKey, MomentPolynomial, OpPoly, Party, Word};
use crate::realization::QubitRealization;

/// `Γ(Y X̃)` over `(I, Z, X, Y)` for one side, where `Y` is the auxiliary
/// observable and `X̃ = X − cos(·) Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalizerLayout {
    pub name: String,
    pub aux: Letter,
    pub xtilde: AffineOp,
    pub basis: Vec<Word>,
    /// `entries[j][k] = ⟨basis_j · aux · X̃ · basis_k⟩`
    pub entries: Vec<Vec<MomentPolynomial>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentStructure {
    pub alphabet: Vec<Letter>,
    pub basis: Vec<Word>,
    /// `gamma[u][v] = key(basis_u† · basis_v)`
    pub gamma: Vec<Vec<MomentKey>>,
    pub localizers: Vec<LocalizerLayout>,
    /// Non-identity keys; their positions are the SDP variable indices.
    pub keys: Vec<MomentKey>,
}

impl MomentStructure {
    pub fn index_of(&self, k: &MomentKey) -> Option<usize> {
        self.keys.binary_search(k).ok()
    }

    pub fn houses(&self, k: &MomentKey) -> bool {
        k.is_identity() || self.index_of(k).is_some()
    }

    pub fn n_vars(&self) -> usize {
        self.keys.len()
    }
}

fn side_basis(letters: &[Letter]) -> Vec<Word> {
    let mut out = Vec::new();
    for &x in letters {
        for &y in letters {
            if x != y {
                out.push(Word::new(&[x, y]));
            }
        }
    }
    out
}

fn word_poly(w: &Word) -> OpPoly {
    OpPoly::term(w.clone(), 1.0)
}

/// Basis: identity, every letter, every product of two distinct letters on
/// the same side, every `A_x B_y`, and the third-order words `Z X Z` built
/// from each side's controls (the only ones the fidelity needs).
pub fn build_moment_structure(cfg: &CriterionConfig) -> Result<MomentStructure, SdpError> {
    cfg.validate()?;
    let alphabet = cfg.alphabet();
    let a: Vec<Letter> = alphabet.iter().copied().filter(|l| l.party() == Party::Alice).collect();
    let b: Vec<Letter> = alphabet.iter().copied().filter(|l| l.party() == Party::Bob).collect();
    let controls = cfg.controls();

    let mut basis = vec![Word::identity()];
    basis.extend(alphabet.iter().map(|&l| Word::letter(l)));
    basis.extend(side_basis(&a));
    basis.extend(side_basis(&b));
    for &x in &a {
        for &y in &b {
            basis.push(Word::new(&[x, y]));
        }
    }
    for c in [(&controls.za, &controls.xa), (&controls.zb, &controls.xb)] {
        let z = c.0.as_letter().expect("letter control");
        let x = c.1.as_letter().expect("letter control");
        basis.push(Word::new(&[z, x, z]));
    }

    let gamma: Vec<Vec<MomentKey>> =
        basis.iter().map(|u| basis.iter().map(|v| u.adjoint().mul(v).key()).collect()).collect();

    let mut localizers = Vec::new();
    let (a00, a10, a11) = (cfg.angles.get(0, 0), cfg.angles.get(1, 0), cfg.angles.get(1, 1));
    let sides = [
        (cfg.xa, "alice", Letter::A0, Letter::A1, Letter::A2, (a00 + a10).cos()),
        (cfg.xb, "bob", Letter::B0, Letter::B1, Letter::B2, (a10 + a11).cos()),
    ];
    for (choice, name, z, x, aux, c) in sides {
        if choice != AuxChoice::Auxiliary {
            continue;
        }
        let xtilde = AffineOp::combination(&[(x, 1.0), (z, -c)]);
        let lbasis: Vec<Word> = [None, Some(z), Some(x), Some(aux)]
            .into_iter()
            .map(|l| l.map_or_else(Word::identity, Word::letter))
            .collect();
        let core = OpPoly::letter(aux).mul(&xtilde.to_poly());
        let entries = lbasis
            .iter()
            .map(|u| lbasis.iter().map(|v| word_poly(u).mul(&core).mul(&word_poly(v)).expectation()).collect())
            .collect();
        localizers.push(LocalizerLayout { name: format!("localizer.{name}"), aux, xtilde, basis: lbasis, entries });
    }

    let mut keys: BTreeSet<MomentKey> = gamma.iter().flatten().cloned().collect();
    for l in &localizers {
        for row in &l.entries {
            for p in row {
                keys.extend(p.keys().cloned());
            }
        }
    }
    keys.remove(&MomentKey::identity());
    Ok(MomentStructure { alphabet, basis, gamma, localizers, keys: keys.into_iter().collect() })
}

/// The relaxation for one criterion and `ε`: variables are the moments
/// listed in `structure.keys`.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpInstance {
    pub config: CriterionConfig,
    pub structure: MomentStructure,
    pub fidelity: MomentPolynomial,
    /// Box-constrained variables and their ideal values.
    pub boxed: Vec<(usize, f64)>,
    pub problem: LmiProblem,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCheck {
    pub objective: f64,
    /// Smallest eigenvalue per PSD block.
    pub min_eigenvalues: BTreeMap<String, f64>,
    pub max_equality_violation: f64,
    pub max_bound_violation: f64,
}

impl PointCheck {
    pub fn feasible(&self, tol: f64) -> bool {
        self.min_eigenvalues.values().all(|&v| v >= -tol)
            && self.max_equality_violation <= tol
            && self.max_bound_violation <= tol
    }
}

fn to_form(p: &MomentPolynomial, s: &MomentStructure) -> Result<AffineForm, SdpError> {
    let mut f = AffineForm::default();
    for (k, c) in p.terms() {
        if k.is_identity() {
            f.constant += c;
        } else {
            let i = s.index_of(k).ok_or_else(|| SdpError::UnhousedMoment(k.to_string()))?;
            f.terms.push((i, c));
        }
    }
    Ok(f.merged())
}

fn key_form(k: &MomentKey, s: &MomentStructure) -> AffineForm {
    if k.is_identity() {
        AffineForm::constant(1.0)
    } else {
        AffineForm { constant: 0.0, terms: vec![(s.index_of(k).expect("gamma keys are indexed"), 1.0)] }
    }
}

/// Minimise the fidelity subject to `Γ ⪰ 0`, each localizer symmetric and
/// `⪰ 0`, `|m| ≤ 1` for every moment, and `|m_xy − E_xy| ≤ ε` on the
/// observed correlators (equalities when `ε = 0`).
pub fn assemble_sdp(cfg: &CriterionConfig) -> Result<SdpInstance, SdpError> {
    let structure = build_moment_structure(cfg)?;
    let fidelity = expand_swap_fidelity(&cfg.controls(), &cfg.target())?;
    let objective = to_form(&fidelity, &structure)?;

    let n = structure.basis.len();
    let gamma_entries =
        (0..n).map(|u| (0..n).map(|v| key_form(&structure.gamma[u][v], &structure)).collect()).collect();
    let mut blocks = vec![PsdBlock { name: "gamma".into(), dim: n, entries: gamma_entries }];
    let mut equalities = Vec::new();
    for l in &structure.localizers {
        let d = l.basis.len();
        let forms: Vec<Vec<AffineForm>> = l
            .entries
            .iter()
            .map(|row| row.iter().map(|p| to_form(p, &structure)).collect::<Result<_, _>>())
            .collect::<Result<_, _>>()?;
        for j in 0..d {
            for k in j + 1..d {
                let diff = forms[j][k].sub(&forms[k][j]);
                if !diff.terms.is_empty() || diff.constant.abs() > 1e-15 {
                    equalities.push(diff);
                }
            }
        }
        blocks.push(PsdBlock { name: l.name.clone(), dim: d, entries: forms });
    }

    let mut bounds = vec![(-1.0, 1.0); structure.n_vars()];
    let mut boxed = Vec::new();
    for (a, b, e) in cfg.observed() {
        let key = Word::new(&[a, b]).key();
        let i = structure.index_of(&key).ok_or_else(|| SdpError::UnhousedMoment(key.to_string()))?;
        let lo = (e - cfg.epsilon).max(-1.0);
        let hi = (e + cfg.epsilon).min(1.0);
        bounds[i] = (lo, hi);
        if hi - lo <= 1e-12 {
            equalities.push(AffineForm { constant: -e, terms: vec![(i, 1.0)] });
        }
        boxed.push((i, e));
    }

    let problem = LmiProblem { n_vars: structure.n_vars(), blocks, bounds, equalities, objective };
    Ok(SdpInstance { config: cfg.clone(), structure, fidelity, boxed, problem })
}

impl SdpInstance {
    /// Moments of a realization in variable order.
    pub fn moments_of(&self, r: &QubitRealization) -> Result<Vec<f64>, SdpError> {
        self.structure
            .keys
            .iter()
            .map(|k| r.moment(k.word()).map_err(|e| SdpError::InvalidConfig(e.to_string())))
            .collect()
    }

    pub fn objective(&self, y: &[f64]) -> f64 {
        self.problem.objective.evaluate(y)
    }

    pub fn check_point(&self, y: &[f64]) -> PointCheck {
        let p = &self.problem;
        let min_eigenvalues = p
            .blocks
            .iter()
            .map(|b| (b.name.clone(), b.evaluate(y).symmetric_eigenvalues().min()))
            .collect();
        let max_equality_violation = p.equalities.iter().map(|f| f.evaluate(y).abs()).fold(0.0, f64::max);
        let max_bound_violation = p
            .bounds
            .iter()
            .zip(y)
            .map(|(&(lo, hi), &v)| (lo - v).max(v - hi).max(0.0))
            .fold(0.0, f64::max);
        PointCheck { objective: self.objective(y), min_eigenvalues, max_equality_violation, max_bound_violation }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdp::fig5_presets;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn chsh_structure() {
        let s = build_moment_structure(&CriterionConfig::chsh(0.0)).unwrap();
        let want: Vec<Word> = [
            "I", "A0", "A1", "B0", "B1", "A0A1", "A1A0", "B0B1", "B1B0", "A0B0", "A0B1", "A1B0", "A1B1", "A0A1A0",
            "B0B1B0",
        ]
        .iter()
        .map(|s| w(s))
        .collect();
        assert_eq!(s.basis, want);
        assert!(s.localizers.is_empty());
        for u in 0..s.basis.len() {
            assert!(s.gamma[u][u].is_identity());
        }
    }

    #[test]
    fn localized_structure() {
        let cfg = &fig5_presets(0.0)[0];
        let s = build_moment_structure(cfg).unwrap();
        assert_eq!(s.alphabet, vec![Letter::A0, Letter::A1, Letter::B0, Letter::B1, Letter::B2]);
        assert_eq!(s.localizers.len(), 1);
        let l = &s.localizers[0];
        assert_eq!(l.aux, Letter::B2);
        assert_eq!(l.basis, vec![w("I"), w("B0"), w("B1"), w("B2")]);
        assert_eq!(s.basis.len(), 1 + 5 + 2 + 6 + 6 + 2);
        assert!(s.basis.contains(&w("B0B2B0")));
    }

    #[test]
    fn fidelity_keys_housed_in_gamma() {
        for cfg in fig5_presets(0.0) {
            let s = build_moment_structure(&cfg).unwrap();
            let f = expand_swap_fidelity(&cfg.controls(), &cfg.target()).unwrap();
            let in_gamma: BTreeSet<&MomentKey> = s.gamma.iter().flatten().collect();
            for k in f.keys() {
                assert!(in_gamma.contains(k), "{}: {k}", cfg.name);
            }
        }
    }

    #[test]
    fn ideal_point_is_feasible() {
        for cfg in fig5_presets(0.0) {
            let inst = assemble_sdp(&cfg).unwrap();
            let y = inst.moments_of(&cfg.ideal_realization()).unwrap();
            let chk = inst.check_point(&y);
            assert!(chk.feasible(1e-9), "{}: {chk:?}", cfg.name);
            assert!((chk.objective - 1.0).abs() < 1e-9, "{}: {}", cfg.name, chk.objective);
        }
    }

    #[test]
    fn box_collapses_at_zero_epsilon() {
        let inst = assemble_sdp(&CriterionConfig::chsh(0.0)).unwrap();
        assert_eq!(inst.problem.equalities.len(), 4);
        let loose = assemble_sdp(&CriterionConfig::chsh(2.0)).unwrap();
        assert!(loose.problem.equalities.is_empty());
        for (i, _) in loose.boxed {
            assert_eq!(loose.problem.bounds[i], (-1.0, 1.0));
        }
    }
}
