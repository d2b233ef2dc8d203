//! XOR games tangent to the quantum set at a self-testing point.
//!
//! A game is a 2×2 coefficient table `f`, scored as `Σ f_xy E_xy`. Its
//! classical value is the best deterministic strategy; its quantum value is
//! the best over measurements on |Φ+⟩, which for two settings per side can
//! be taken coplanar.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{AnglePoint, CorrelationPoint};

const SINGULAR_TOL: f64 = 1e-12;
const GRID: usize = 48;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    #[error("angle point is not canonical")]
    NotCanonical,
    #[error("{0} vanishes; the tangent game is undefined")]
    ZeroCorrelator(&'static str),
    #[error("game coefficients must be finite")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameVector {
    pub f: [[f64; 2]; 2],
}

impl GameVector {
    pub fn new(f: [[f64; 2]; 2]) -> Result<Self, GameError> {
        if f.iter().flatten().any(|v| !v.is_finite()) {
            return Err(GameError::NonFinite);
        }
        Ok(Self { f })
    }

    /// Coefficients ordered `(f00, f01, f10, f11)`.
    pub fn from_flat(f: [f64; 4]) -> Result<Self, GameError> {
        Self::new([[f[0], f[1]], [f[2], f[3]]])
    }

    pub fn flat(&self) -> [f64; 4] {
        [self.f[0][0], self.f[0][1], self.f[1][0], self.f[1][1]]
    }

    pub fn score(&self, p: &CorrelationPoint) -> f64 {
        let e = p.correlators();
        (0..2).flat_map(|x| (0..2).map(move |y| (x, y))).map(|(x, y)| self.f[x][y] * e[x][y]).sum()
    }

    fn score_angles(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        let mut s = 0.0;
        for x in 0..2 {
            for y in 0..2 {
                s += self.f[x][y] * (a[x] - b[y]).cos();
            }
        }
        s
    }
}

fn checked_inv_sin(v: f64, name: &'static str) -> Result<f64, GameError> {
    let s = v.sin();
    if s.abs() < SINGULAR_TOL {
        return Err(GameError::ZeroCorrelator(name));
    }
    Ok(1.0 / s)
}

/// Normal of the quantum boundary at a canonical point:
/// `f = (1/sin α00, −1/sin(α00+α10+α11), 1/sin α10, 1/sin α11)`.
pub fn game_coefficients(a: &AnglePoint) -> Result<GameVector, GameError> {
    if !a.is_canonical() {
        return Err(GameError::NotCanonical);
    }
    let (a00, a10, a11) = (a.get(0, 0), a.get(1, 0), a.get(1, 1));
    GameVector::new([
        [
            checked_inv_sin(a00, "sin(alpha00)")?,
            -checked_inv_sin(a00 + a10 + a11, "sin(alpha00+alpha10+alpha11)")?,
        ],
        [checked_inv_sin(a10, "sin(alpha10)")?, checked_inv_sin(a11, "sin(alpha11)")?],
    ])
}

/// Maximum of `Σ f_xy a_x b_y` over the 16 deterministic assignments.
pub fn classical_value(g: &GameVector) -> f64 {
    let signs = [1.0, -1.0];
    let mut best = f64::NEG_INFINITY;
    for a0 in signs {
        for a1 in signs {
            for b0 in signs {
                for b1 in signs {
                    let a = [a0, a1];
                    let b = [b0, b1];
                    let mut s = 0.0;
                    for x in 0..2 {
                        for y in 0..2 {
                            s += g.f[x][y] * a[x] * b[y];
                        }
                    }
                    best = best.max(s);
                }
            }
        }
    }
    best
}

/// A local maximizer of the quantum score: Bloch angles with `a0 = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantumOptimum {
    pub value: f64,
    pub angles_a: [f64; 2],
    pub angles_b: [f64; 2],
}

impl QuantumOptimum {
    pub fn correlators(&self) -> [f64; 4] {
        let (a, b) = (self.angles_a, self.angles_b);
        [(a[0] - b[0]).cos(), (a[0] - b[1]).cos(), (a[1] - b[0]).cos(), (a[1] - b[1]).cos()]
    }
}

/// Alternating exact maximisation: with the other angles fixed, the score
/// is `R cos(φ − φ*)` in each remaining angle.
fn refine(g: &GameVector, mut a: [f64; 2], mut b: [f64; 2]) -> QuantumOptimum {
    let mut last = g.score_angles(a, b);
    for _ in 0..20_000 {
        for y in 0..2 {
            let (mut s, mut c) = (0.0, 0.0);
            for x in 0..2 {
                s += g.f[x][y] * a[x].sin();
                c += g.f[x][y] * a[x].cos();
            }
            if s != 0.0 || c != 0.0 {
                b[y] = s.atan2(c);
            }
        }
        let (mut s, mut c) = (0.0, 0.0);
        for y in 0..2 {
            s += g.f[1][y] * b[y].sin();
            c += g.f[1][y] * b[y].cos();
        }
        if s != 0.0 || c != 0.0 {
            a[1] = s.atan2(c);
        }
        let v = g.score_angles(a, b);
        if (v - last).abs() <= 1e-15 * (1.0 + v.abs()) {
            last = v;
            break;
        }
        last = v;
    }
    QuantumOptimum { value: last, angles_a: a, angles_b: b }
}

fn grid_candidates(g: &GameVector, keep: usize) -> Vec<(f64, [f64; 2], [f64; 2])> {
    let step = 2.0 * PI / GRID as f64;
    let mut all = Vec::with_capacity(GRID * GRID * GRID);
    for i in 0..GRID {
        for j in 0..GRID {
            for k in 0..GRID {
                let a = [0.0, i as f64 * step];
                let b = [j as f64 * step, k as f64 * step];
                all.push((g.score_angles(a, b), a, b));
            }
        }
    }
    all.sort_by(|x, y| y.0.total_cmp(&x.0));
    all.truncate(keep);
    all
}

fn local_optima(g: &GameVector) -> Vec<QuantumOptimum> {
    grid_candidates(g, 24).into_iter().map(|(_, a, b)| refine(g, a, b)).collect()
}

/// Maximum of `Σ f_xy cos(a_x − b_y)`: a 48-point grid per angle, then
/// alternating refinement from the best grid points.
pub fn quantum_optimum(g: &GameVector) -> QuantumOptimum {
    local_optima(g)
        .into_iter()
        .max_by(|x, y| x.value.total_cmp(&y.value))
        .expect("grid is nonempty")
}

pub fn quantum_value(g: &GameVector) -> f64 {
    quantum_optimum(g).value
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaximizerReport {
    pub value_at_point: f64,
    pub quantum_value: f64,
    /// `quantum_value − value_at_point`; zero when the point is optimal.
    pub difference: f64,
    pub classical_value: f64,
    /// All near-optimal maximizers found produce the same correlators.
    pub unique_maximizer: bool,
}

pub fn verify_maximizer(g: &GameVector, p: &CorrelationPoint) -> MaximizerReport {
    let optima = local_optima(g);
    let best = optima.iter().map(|o| o.value).fold(f64::NEG_INFINITY, f64::max);
    let near: Vec<[f64; 4]> = optima.iter().filter(|o| best - o.value <= 1e-6).map(|o| o.correlators()).collect();
    let unique_maximizer =
        near.iter().all(|c| c.iter().zip(&near[0]).all(|(u, v)| (u - v).abs() <= 1e-4));
    let value_at_point = g.score(p);
    MaximizerReport {
        value_at_point,
        quantum_value: best,
        difference: best - value_at_point,
        classical_value: classical_value(g),
        unique_maximizer,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, SQRT_2};

    /// Tsirelson-style closed form: with Alice's vectors at relative angle
    /// `t`, Bob's best response gives `Σ_y |f_0y u0 + f_1y u1|`.
    fn oracle_quantum_value(g: &GameVector) -> f64 {
        let n = 200_000;
        (0..=n)
            .map(|k| {
                let t = PI * k as f64 / n as f64;
                (0..2)
                    .map(|y| {
                        let (p, q) = (g.f[0][y], g.f[1][y]);
                        (p * p + q * q + 2.0 * p * q * t.cos()).max(0.0).sqrt()
                    })
                    .sum::<f64>()
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn chsh_game() -> GameVector {
        GameVector::from_flat([SQRT_2, -SQRT_2, SQRT_2, SQRT_2]).unwrap()
    }

    #[test]
    fn chsh_point_game() {
        let a = AnglePoint::from_flat([FRAC_PI_4, 3.0 * FRAC_PI_4, FRAC_PI_4, FRAC_PI_4]).unwrap();
        let g = game_coefficients(&a).unwrap();
        for (x, y) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let sign = if ((x + 1) * y) % 2 == 0 { 1.0 } else { -1.0 };
            assert!((g.f[x][y] - sign * SQRT_2).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_angle_has_no_game() {
        let a = AnglePoint::from_flat([1.0, 2.0, 1.0, 0.0]).unwrap();
        assert_eq!(game_coefficients(&a), Err(GameError::ZeroCorrelator("sin(alpha11)")));
    }

    #[test]
    fn mixed_angle_game() {
        let a = AnglePoint::from_flat([PI / 3.0, 5.0 * PI / 6.0, PI / 3.0, PI / 6.0]).unwrap();
        let g = game_coefficients(&a).unwrap();
        let want = [2.0 / 3f64.sqrt(), -2.0, 2.0 / 3f64.sqrt(), 2.0];
        for (v, w) in g.flat().iter().zip(want) {
            assert!((v - w).abs() < 1e-12);
        }
    }

    #[test]
    fn classical_values() {
        assert!((classical_value(&chsh_game()) - 2.0 * SQRT_2).abs() < 1e-12);
        assert_eq!(classical_value(&GameVector::from_flat([1.0, 1.0, 1.0, -1.0]).unwrap()), 2.0);
        assert_eq!(classical_value(&GameVector::from_flat([1.0, 0.0, 0.0, 0.0]).unwrap()), 1.0);
    }

    #[test]
    fn quantum_values_match_oracle() {
        for (f, want) in [
            ([SQRT_2, -SQRT_2, SQRT_2, SQRT_2], 4.0),
            ([1.0, 1.0, 1.0, -1.0], 2.0 * SQRT_2),
            ([1.0, 0.0, 0.0, 0.0], 1.0),
        ] {
            let g = GameVector::from_flat(f).unwrap();
            let oracle = oracle_quantum_value(&g);
            assert!((oracle - want).abs() < 1e-6, "oracle {oracle} vs {want}");
            assert!((quantum_value(&g) - want).abs() < 1e-6);
        }
    }

    #[test]
    fn mismatched_point_has_positive_gap() {
        let my = CorrelationPoint::from_flat([
            std::f64::consts::FRAC_1_SQRT_2,
            0.0,
            std::f64::consts::FRAC_1_SQRT_2,
            1.0,
        ])
        .unwrap();
        let rep = verify_maximizer(&chsh_game(), &my);
        assert!(rep.difference > 1e-3);
    }
}
