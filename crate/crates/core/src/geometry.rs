//! Correlation geometry of the (2,2,2) scenario.
//!
//! A point is the 2×2 table of correlators `E[x][y] = ⟨A_x B_y⟩`. The points
//! that are extremal in the quantum set and reachable by measuring |Φ+⟩ are
//! exactly those satisfying one of eight arcsine conditions
//!
//! ```text
//! Σ_{(x,y)≠(i,j)} asin E_xy − asin E_ij = ξπ,   i,j ∈ {0,1}, ξ = ±1
//! ```
//!
//! with at most one correlator equal to ±1. The canonical condition is
//! `(i,j,ξ) = (0,1,+1)`, equivalent to `α01 = α00 + α10 + α11` for
//! `α_xy = acos E_xy`.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Slack allowed when validating inputs that should lie in a closed range.
const RANGE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("correlator {name} = {value} lies outside [-1, 1]")]
    OutOfRange { name: String, value: f64 },
    #[error("angle {name} = {value} lies outside [0, pi]")]
    AngleOutOfRange { name: String, value: f64 },
    #[error("correlation point does not self-test the singlet")]
    NotSelfTesting,
}

fn clamp_unit(name: impl Into<String>, v: f64) -> Result<f64, GeometryError> {
    if !v.is_finite() || v.abs() > 1.0 + RANGE_SLACK {
        return Err(GeometryError::OutOfRange { name: name.into(), value: v });
    }
    Ok(v.clamp(-1.0, 1.0))
}

fn clamp_angle(name: impl Into<String>, v: f64) -> Result<f64, GeometryError> {
    if !v.is_finite() || v < -RANGE_SLACK || v > PI + RANGE_SLACK {
        return Err(GeometryError::AngleOutOfRange { name: name.into(), value: v });
    }
    Ok(v.clamp(0.0, PI))
}

/// Observed correlators `e[x][y] = ⟨A_x B_y⟩` with optional single-party
/// marginals `⟨A_x⟩`, `⟨B_y⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationPoint {
    e: [[f64; 2]; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    marg_a: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    marg_b: Option<[f64; 2]>,
}

impl CorrelationPoint {
    pub fn new(e: [[f64; 2]; 2]) -> Result<Self, GeometryError> {
        let mut out = [[0.0; 2]; 2];
        for x in 0..2 {
            for y in 0..2 {
                out[x][y] = clamp_unit(format!("E{x}{y}"), e[x][y])?;
            }
        }
        Ok(Self { e: out, marg_a: None, marg_b: None })
    }

    /// Builds a point from correlators ordered `(E00, E01, E10, E11)`.
    pub fn from_flat(e: [f64; 4]) -> Result<Self, GeometryError> {
        Self::new([[e[0], e[1]], [e[2], e[3]]])
    }

    pub fn with_marginals(
        mut self,
        marg_a: Option<[f64; 2]>,
        marg_b: Option<[f64; 2]>,
    ) -> Result<Self, GeometryError> {
        self.marg_a = marg_a
            .map(|m| Ok::<_, GeometryError>([clamp_unit("<A0>", m[0])?, clamp_unit("<A1>", m[1])?]))
            .transpose()?;
        self.marg_b = marg_b
            .map(|m| Ok::<_, GeometryError>([clamp_unit("<B0>", m[0])?, clamp_unit("<B1>", m[1])?]))
            .transpose()?;
        Ok(self)
    }

    pub fn correlators(&self) -> [[f64; 2]; 2] {
        self.e
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.e[x][y]
    }

    pub fn flat(&self) -> [f64; 4] {
        [self.e[0][0], self.e[0][1], self.e[1][0], self.e[1][1]]
    }

    pub fn marginals_a(&self) -> Option<[f64; 2]> {
        self.marg_a
    }

    pub fn marginals_b(&self) -> Option<[f64; 2]> {
        self.marg_b
    }

    /// Positions `(x, y)` whose correlator is ±1 within `tol`, i.e. whose
    /// angle is 0 or π.
    pub fn degenerate_mask(&self, tol: f64) -> [[bool; 2]; 2] {
        let mut mask = [[false; 2]; 2];
        for x in 0..2 {
            for y in 0..2 {
                mask[x][y] = 1.0 - self.e[x][y].abs() <= tol;
            }
        }
        mask
    }
}

/// Angles `α_xy = acos E_xy ∈ [0, π]`, plus `θ` (the angle between Alice's
/// two observables) when the canonical condition holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnglePoint {
    alpha: [[f64; 2]; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theta: Option<f64>,
}

impl AnglePoint {
    /// Wraps raw angles, setting `θ` when `α01 = α00 + α10 + α11` holds to
    /// within [`crate::DEFAULT_TOL`].
    pub fn from_alpha(alpha: [[f64; 2]; 2]) -> Result<Self, GeometryError> {
        let mut out = [[0.0; 2]; 2];
        for x in 0..2 {
            for y in 0..2 {
                out[x][y] = clamp_angle(format!("alpha{x}{y}"), alpha[x][y])?;
            }
        }
        let mut point = Self { alpha: out, theta: None };
        if point.canonical_residual() <= crate::DEFAULT_TOL {
            point.theta = Some(out[0][0] + out[1][0]);
        }
        Ok(point)
    }

    /// Angles ordered `(α00, α01, α10, α11)`.
    pub fn from_flat(alpha: [f64; 4]) -> Result<Self, GeometryError> {
        Self::from_alpha([[alpha[0], alpha[1]], [alpha[2], alpha[3]]])
    }

    /// Canonical point from its tetrahedron coordinates: `α10 = θ − α00`,
    /// `α11 = α01 − θ`.
    pub fn canonical(theta: f64, alpha00: f64, alpha01: f64) -> Result<Self, GeometryError> {
        let theta = clamp_angle("theta", theta)?;
        let a10 = clamp_angle("alpha10", theta - alpha00)?;
        let a11 = clamp_angle("alpha11", alpha01 - theta)?;
        let alpha = [
            [clamp_angle("alpha00", alpha00)?, clamp_angle("alpha01", alpha01)?],
            [a10, a11],
        ];
        Ok(Self { alpha, theta: Some(theta) })
    }

    pub fn alpha(&self) -> [[f64; 2]; 2] {
        self.alpha
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.alpha[x][y]
    }

    pub fn flat(&self) -> [f64; 4] {
        [self.alpha[0][0], self.alpha[0][1], self.alpha[1][0], self.alpha[1][1]]
    }

    pub fn theta(&self) -> Option<f64> {
        self.theta
    }

    /// `|α00 + α10 + α11 − α01|`.
    pub fn canonical_residual(&self) -> f64 {
        let a = &self.alpha;
        (a[0][0] + a[1][0] + a[1][1] - a[0][1]).abs()
    }

    pub fn is_canonical(&self) -> bool {
        self.theta.is_some()
    }

    /// Positions whose angle is 0 or π within `tol`.
    pub fn degenerate_mask(&self, tol: f64) -> [[bool; 2]; 2] {
        let mut mask = [[false; 2]; 2];
        for x in 0..2 {
            for y in 0..2 {
                let a = self.alpha[x][y];
                mask[x][y] = a <= tol || PI - a <= tol;
            }
        }
        mask
    }

    pub fn degenerate_count(&self, tol: f64) -> usize {
        count_mask(&self.degenerate_mask(tol))
    }

    pub fn correlators(&self) -> CorrelationPoint {
        let a = &self.alpha;
        CorrelationPoint {
            e: [[a[0][0].cos(), a[0][1].cos()], [a[1][0].cos(), a[1][1].cos()]],
            marg_a: None,
            marg_b: None,
        }
    }
}

fn count_mask(mask: &[[bool; 2]; 2]) -> usize {
    mask.iter().flatten().filter(|&&d| d).count()
}

/// `α_xy = acos E_xy`; `θ` is set only when the canonical condition holds.
pub fn angles_from_correlations(p: &CorrelationPoint) -> AnglePoint {
    let mut alpha = [[0.0; 2]; 2];
    for x in 0..2 {
        for y in 0..2 {
            alpha[x][y] = p.e[x][y].acos();
        }
    }
    AnglePoint::from_alpha(alpha).expect("acos of a validated correlator lies in [0, pi]")
}

/// One satisfied arcsine condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionMatch {
    pub i: usize,
    pub j: usize,
    pub xi: i8,
    pub residual: f64,
}

/// `|Σ_{(x,y)≠(i,j)} asin E_xy − asin E_ij − ξπ|`.
pub fn condition_residual(p: &CorrelationPoint, i: usize, j: usize, xi: i8) -> f64 {
    let mut sum = 0.0;
    for x in 0..2 {
        for y in 0..2 {
            let s = p.e[x][y].asin();
            if (x, y) == (i, j) {
                sum -= s;
            } else {
                sum += s;
            }
        }
    }
    (sum - f64::from(xi) * PI).abs()
}

/// All eight conditions checked exhaustively; matches are listed in the
/// order `(0,0,+), (0,0,−), (0,1,+), …`.
pub fn check_selftest_condition(p: &CorrelationPoint, tol: f64) -> Vec<ConditionMatch> {
    let mut out = Vec::new();
    for i in 0..2 {
        for j in 0..2 {
            for xi in [1i8, -1] {
                let residual = condition_residual(p, i, j, xi);
                if residual <= tol {
                    out.push(ConditionMatch { i, j, xi, residual });
                }
            }
        }
    }
    out
}

/// Outcome flips and setting swaps on each side.
///
/// Applied to a point, setting `x` of the image is old setting `x ^ swap_a`,
/// and the flip of old setting `x` multiplies its outcomes by `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Relabeling {
    pub swap_a: bool,
    pub swap_b: bool,
    pub flip_a: [bool; 2],
    pub flip_b: [bool; 2],
}

impl Relabeling {
    pub const IDENTITY: Relabeling =
        Relabeling { swap_a: false, swap_b: false, flip_a: [false; 2], flip_b: [false; 2] };

    /// All 64 elements in lexicographic order of
    /// `(swap_a, swap_b, flip_a0, flip_a1, flip_b0, flip_b1)`.
    pub fn all() -> impl Iterator<Item = Relabeling> {
        (0u8..64).map(|k| {
            let bit = |n: u8| k & (1 << (5 - n)) != 0;
            Relabeling {
                swap_a: bit(0),
                swap_b: bit(1),
                flip_a: [bit(2), bit(3)],
                flip_b: [bit(4), bit(5)],
            }
        })
    }

    fn sign(flip: bool) -> f64 {
        if flip {
            -1.0
        } else {
            1.0
        }
    }

    fn source(swap: bool, k: usize) -> usize {
        if swap {
            1 - k
        } else {
            k
        }
    }

    /// The outcome signs `s^A_x`, `s^B_y` in the source labelling.
    pub fn signs(&self) -> ([i8; 2], [i8; 2]) {
        let s = |f: bool| if f { -1 } else { 1 };
        ([s(self.flip_a[0]), s(self.flip_a[1])], [s(self.flip_b[0]), s(self.flip_b[1])])
    }

    pub fn apply(&self, p: &CorrelationPoint) -> CorrelationPoint {
        let mut e = [[0.0; 2]; 2];
        for (x, row) in e.iter_mut().enumerate() {
            for (y, v) in row.iter_mut().enumerate() {
                let sx = Self::source(self.swap_a, x);
                let sy = Self::source(self.swap_b, y);
                *v = Self::sign(self.flip_a[sx]) * Self::sign(self.flip_b[sy]) * p.e[sx][sy];
            }
        }
        let marg = |m: Option<[f64; 2]>, swap: bool, flip: [bool; 2]| {
            m.map(|m| {
                let mut out = [0.0; 2];
                for (k, v) in out.iter_mut().enumerate() {
                    let s = Self::source(swap, k);
                    *v = Self::sign(flip[s]) * m[s];
                }
                out
            })
        };
        CorrelationPoint {
            e,
            marg_a: marg(p.marg_a, self.swap_a, self.flip_a),
            marg_b: marg(p.marg_b, self.swap_b, self.flip_b),
        }
    }

    pub fn inverse(&self) -> Relabeling {
        let reindex = |flip: [bool; 2], swap: bool| {
            [flip[Self::source(swap, 0)], flip[Self::source(swap, 1)]]
        };
        Relabeling {
            swap_a: self.swap_a,
            swap_b: self.swap_b,
            flip_a: reindex(self.flip_a, self.swap_a),
            flip_b: reindex(self.flip_b, self.swap_b),
        }
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::IDENTITY
    }
}

/// Degenerate cases with two or more angles at 0 or π, numbered as in the
/// classic enumeration (i)–(vii).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DegenerateCase {
    /// α00 = α10 = 0: A0 = B0 = A1.
    #[serde(rename = "i")]
    I,
    /// α00 = α01 = 0: A0 = B0 = B1.
    #[serde(rename = "ii")]
    II,
    /// α00 = α11 = 0: A0 = B0, A1 = B1.
    #[serde(rename = "iii")]
    III,
    /// α01 = α10 = 0: A0 = B1, A1 = B0.
    #[serde(rename = "iv")]
    IV,
    /// α01 = α11 = 0: A0 = B1 = A1.
    #[serde(rename = "v")]
    V,
    /// α10 = α11 = 0: A1 = B0 = B1.
    #[serde(rename = "vi")]
    VI,
    /// All four angles degenerate.
    #[serde(rename = "vii")]
    VII,
}

impl DegenerateCase {
    /// Case for a mask with at least two degenerate positions.
    pub fn from_mask(mask: &[[bool; 2]; 2]) -> Option<Self> {
        let n = count_mask(mask);
        if n < 2 {
            return None;
        }
        if n >= 3 {
            return Some(Self::VII);
        }
        let flat = [mask[0][0], mask[0][1], mask[1][0], mask[1][1]];
        Some(match flat {
            [true, false, true, false] => Self::I,
            [true, true, false, false] => Self::II,
            [true, false, false, true] => Self::III,
            [false, true, true, false] => Self::IV,
            [false, true, false, true] => Self::V,
            [false, false, true, true] => Self::VI,
            _ => unreachable!("exactly two positions are set"),
        })
    }

    pub fn roman(&self) -> &'static str {
        match self {
            Self::I => "i",
            Self::II => "ii",
            Self::III => "iii",
            Self::IV => "iv",
            Self::V => "v",
            Self::VI => "vi",
            Self::VII => "vii",
        }
    }
}

impl fmt::Display for DegenerateCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.roman())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag")]
pub enum Classification {
    SelfTesting { condition: ConditionMatch, relabeling: Relabeling },
    DegenerateLocal { case: DegenerateCase },
    NotOnSingletBoundary,
}

impl Classification {
    pub fn is_self_testing(&self) -> bool {
        matches!(self, Self::SelfTesting { .. })
    }
}

/// Smallest relabeling whose image satisfies the canonical condition.
fn canonical_relabeling(p: &CorrelationPoint, tol: f64) -> Option<(Relabeling, CorrelationPoint)> {
    // relabeling only permutes and negates the arcsine terms, so the image
    // residual equals a matched residual up to summation order
    let tol = tol + 4.0 * f64::EPSILON;
    Relabeling::all().map(|r| (r, r.apply(p))).find(|(_, q)| condition_residual(q, 0, 1, 1) <= tol)
}

/// Degenerate positions are those with `1 − |E_xy| ≤ tol`.
pub fn classify(p: &CorrelationPoint, tol: f64) -> Classification {
    let matches = check_selftest_condition(p, tol);
    let Some(best) = matches.iter().copied().min_by(|a, b| a.residual.total_cmp(&b.residual)) else {
        return Classification::NotOnSingletBoundary;
    };
    let mask = p.degenerate_mask(tol);
    if let Some(case) = DegenerateCase::from_mask(&mask) {
        return Classification::DegenerateLocal { case };
    }
    match canonical_relabeling(p, tol) {
        Some((relabeling, _)) => Classification::SelfTesting { condition: best, relabeling },
        None => Classification::NotOnSingletBoundary,
    }
}

/// Maps a self-testing point onto the canonical condition `(0, 1, +1)`.
pub fn canonicalize(
    p: &CorrelationPoint,
    tol: f64,
) -> Result<(Relabeling, CorrelationPoint), GeometryError> {
    if !classify(p, tol).is_self_testing() {
        return Err(GeometryError::NotSelfTesting);
    }
    canonical_relabeling(p, tol).ok_or(GeometryError::NotSelfTesting)
}

/// Largest CHSH combination over a two-row correlator table (rows are Alice's
/// settings, columns Bob's). Every pair of columns and every placement of the
/// single minus sign, with both overall signs, is tried.
pub fn chsh_max_table(row_a0: &[f64], row_a1: &[f64]) -> f64 {
    assert_eq!(row_a0.len(), row_a1.len(), "rows must have equal length");
    let n = row_a0.len();
    let mut best = f64::NEG_INFINITY;
    for y in 0..n {
        for z in (y + 1)..n {
            let terms = [row_a0[y], row_a0[z], row_a1[y], row_a1[z]];
            let total: f64 = terms.iter().sum();
            for t in terms {
                best = best.max((total - 2.0 * t).abs());
            }
        }
    }
    best
}

pub fn chsh_max(p: &CorrelationPoint) -> f64 {
    chsh_max_table(&p.e[0], &p.e[1])
}

/// True iff at most one angle is 0 or π (within [`crate::DEFAULT_TOL`]).
/// For points on the singlet boundary this is exactly nonlocality.
pub fn nonlocality_witness(a: &AnglePoint) -> bool {
    a.degenerate_count(crate::DEFAULT_TOL) <= 1
}
