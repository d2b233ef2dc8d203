use std::fmt;
use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::CriterionConfig;
use super::solver::{InteriorPoint, LmiProblem, RawSolution, SdpBackend};
use super::structure::{assemble_sdp, SdpInstance};
use super::SdpError;

/// Largest eigenvalue deficit tolerated on a dual multiplier block.
pub const CERTIFICATE_TOL: f64 = 1e-8;
const OPTIMAL_GAP: f64 = 1e-6;
const NEAR_OPTIMAL_GAP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    NearOptimal,
    Infeasible,
    NumericalFailure,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::NearOptimal => "near-optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::NumericalFailure => "numerical-failure",
        })
    }
}

/// A lower bound together with the evidence for it: PSD multipliers for
/// every block and multipliers for the equalities. The bound is the
/// minimum of the resulting Lagrangian over the variable box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualCertificate {
    pub bound: f64,
    #[serde(skip)]
    pub blocks: Vec<DMatrix<f64>>,
    #[serde(skip)]
    pub equality: Vec<f64>,
    /// Smallest eigenvalue of each multiplier block, after repair.
    pub min_eigenvalues: Vec<f64>,
    /// Identity shift added to blocks that came back slightly indefinite.
    pub shift: f64,
    /// `‖r‖₁` of the Lagrangian's linear part, paid for through the box.
    pub residual_l1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityBound {
    pub epsilon: f64,
    /// Certified lower bound on the fidelity.
    pub bound: f64,
    /// Fidelity at the solver's moment assignment.
    pub primal: f64,
    pub gap: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    pub certificate: DualCertificate,
    /// Solver notes when the status is not optimal.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<String>,
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Turns candidate multipliers into a certified bound. Blocks are made PSD
/// by an identity shift if needed and then checked by eigendecomposition;
/// equality multipliers are refitted by least squares.
pub fn certify(p: &LmiProblem, blocks: &[DMatrix<f64>]) -> Result<DualCertificate, SdpError> {
    if blocks.len() != p.blocks.len() {
        return Err(SdpError::NumericalFailure("multiplier count does not match block count".into()));
    }
    let mut shift: f64 = 0.0;
    let mut repaired = Vec::with_capacity(blocks.len());
    let mut min_eigenvalues = Vec::with_capacity(blocks.len());
    for (x, blk) in blocks.iter().zip(&p.blocks) {
        if x.nrows() != blk.dim || x.ncols() != blk.dim || x.iter().any(|v| !v.is_finite()) {
            return Err(SdpError::NumericalFailure(format!("malformed multiplier for block {}", blk.name)));
        }
        let mut x = sym(x);
        let lmin = x.symmetric_eigenvalues().min();
        if lmin < 0.0 {
            let s = -lmin * (1.0 + 1e-9) + 1e-15;
            for i in 0..blk.dim {
                x[(i, i)] += s;
            }
            shift = shift.max(s);
        }
        let lmin = x.symmetric_eigenvalues().min();
        if lmin < -CERTIFICATE_TOL {
            return Err(SdpError::NumericalFailure(format!(
                "multiplier for block {} has eigenvalue {lmin:e}",
                blk.name
            )));
        }
        min_eigenvalues.push(lmin);
        repaired.push(x);
    }

    // ⟨X, G(y)⟩ = g0 + Σ g_i y_i
    let mut g0 = 0.0;
    let mut g = DVector::<f64>::zeros(p.n_vars);
    for (x, blk) in repaired.iter().zip(&p.blocks) {
        for r in 0..blk.dim {
            for c in r..blk.dim {
                let w = if r == c { x[(r, c)] } else { 2.0 * x[(r, c)] };
                let form = &blk.entries[r][c];
                g0 += w * form.constant;
                for &(i, k) in &form.terms {
                    g[i] += w * k;
                }
            }
        }
    }
    let mut v = -g;
    for &(i, k) in &p.objective.terms {
        v[i] += k;
    }

    let mut lambda = DVector::<f64>::zeros(p.equalities.len());
    if !p.equalities.is_empty() {
        let mut et = DMatrix::<f64>::zeros(p.n_vars, p.equalities.len());
        for (k, f) in p.equalities.iter().enumerate() {
            for &(i, a) in &f.terms {
                et[(i, k)] += a;
            }
        }
        lambda = et
            .clone()
            .svd(true, true)
            .solve(&(-&v), 1e-12)
            .map_err(|e| SdpError::NumericalFailure(format!("equality multipliers: {e}")))?;
        v += et * &lambda;
    }

    let mut bound = p.objective.constant - g0;
    for (k, f) in p.equalities.iter().enumerate() {
        bound += lambda[k] * f.constant;
    }
    let mut residual_l1 = 0.0;
    for (i, &r) in v.iter().enumerate() {
        if r == 0.0 {
            continue;
        }
        residual_l1 += r.abs();
        let (lo, hi) = p.bounds[i];
        bound += (r * lo).min(r * hi);
    }
    if !bound.is_finite() {
        return Err(SdpError::NumericalFailure("certificate yields no finite bound".into()));
    }
    Ok(DualCertificate {
        bound,
        blocks: repaired,
        equality: lambda.iter().copied().collect(),
        min_eigenvalues,
        shift,
        residual_l1,
    })
}

pub fn solve_lower_bound(inst: &SdpInstance) -> Result<FidelityBound, SdpError> {
    solve_lower_bound_with(inst, &InteriorPoint::default())
}

/// Box widenings tried when the first solve does not close the gap. A
/// relaxation with looser boxes has a strict interior more often, and its
/// multipliers still certify the original problem.
const WIDENINGS: [f64; 4] = [1e-9, 1e-8, 1e-7, 1e-6];

/// Best certificate among the final and intermediate iterates of one solve,
/// evaluated against `p`.
fn best_certificate(p: &LmiProblem, raw: &RawSolution) -> Option<DualCertificate> {
    std::iter::once(&raw.multipliers.blocks)
        .chain(raw.trail.iter().rev())
        .filter_map(|blocks| certify(p, blocks).ok())
        .max_by(|a, b| a.bound.total_cmp(&b.bound))
}

fn status_of(gap: f64) -> SolveStatus {
    if !gap.is_finite() {
        SolveStatus::NumericalFailure
    } else if gap <= OPTIMAL_GAP {
        SolveStatus::Optimal
    } else if gap <= NEAR_OPTIMAL_GAP {
        SolveStatus::NearOptimal
    } else {
        SolveStatus::NumericalFailure
    }
}

pub fn solve_lower_bound_with(inst: &SdpInstance, backend: &dyn SdpBackend) -> Result<FidelityBound, SdpError> {
    let p = &inst.problem;
    let first = backend.solve(p);
    let mut best = first.as_ref().ok().and_then(|raw| best_certificate(p, raw));
    let primal = match &first {
        Ok(raw) => inst.objective(&raw.y),
        Err(SdpError::Infeasible(m)) => return Err(SdpError::Infeasible(m.clone())),
        Err(_) => f64::NAN,
    };
    let mut widened_by = None;
    let closed = best.as_ref().is_some_and(|c| primal - c.bound <= OPTIMAL_GAP);
    if !closed {
        for delta in WIDENINGS {
            let cfg = inst.config.with_epsilon(inst.config.epsilon + delta);
            let Ok(Ok(raw)) = assemble_sdp(&cfg).map(|w| backend.solve(&w.problem)) else {
                continue;
            };
            if let Some(c) = best_certificate(p, &raw) {
                if best.as_ref().map_or(true, |b| c.bound > b.bound) {
                    best = Some(c);
                    widened_by = Some(delta);
                }
            }
        }
    }
    let Some(certificate) = best else {
        return Err(match first {
            Err(e) => e,
            Ok(_) => SdpError::NumericalFailure("no multiplier set could be certified".into()),
        });
    };
    let bound = certificate.bound;
    let gap = primal - bound;
    let status = status_of(gap);
    let mut notes = Vec::new();
    let iterations = match &first {
        Ok(raw) => {
            if status != SolveStatus::Optimal {
                notes.push(format!(
                    "{}; relative gap {:.2e}, primal infeasibility {:.2e}, dual infeasibility {:.2e}",
                    raw.stall_reason.as_deref().unwrap_or(if raw.converged { "converged" } else { "iteration limit reached" }),
                    raw.relative_gap,
                    raw.primal_infeasibility,
                    raw.dual_infeasibility
                ));
            }
            raw.iterations
        }
        Err(e) => {
            notes.push(e.to_string());
            0
        }
    };
    if let Some(d) = widened_by {
        notes.push(format!("certificate taken from a solve with boxes widened by {d:e}"));
    }
    Ok(FidelityBound {
        epsilon: inst.config.epsilon,
        bound,
        primal,
        gap,
        status,
        iterations,
        certificate,
        diagnostics: if notes.is_empty() { None } else { Some(notes.join("; ")) },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub epsilon: f64,
    pub result: Result<FidelityBound, SdpError>,
}

/// One bound per grid point, solved in parallel; a failing point yields an
/// error row and does not stop the others.
pub fn sweep_curve(template: &CriterionConfig, grid: &[f64]) -> Result<Vec<SweepRow>, SdpError> {
    if grid.is_empty() {
        return Err(SdpError::EmptyGrid);
    }
    Ok(grid
        .par_iter()
        .map(|&eps| {
            let cfg = template.with_epsilon(eps);
            let result = cfg.validate().and_then(|_| assemble_sdp(&cfg)).and_then(|i| solve_lower_bound(&i));
            SweepRow { epsilon: eps, result }
        })
        .collect())
}

/// Shortest form of `x` rounded to 12 significant digits; plain decimal
/// unless the magnitude is below `1e-5` or above `1e15`.
pub fn fmt_sig12(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let r: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    if r == 0.0 {
        "0".to_owned()
    } else if r.abs() < 1e-5 || r.abs() >= 1e15 {
        format!("{r:e}")
    } else {
        format!("{r}")
    }
}

pub const CSV_HEADER: &str = "epsilon,bound,primal,gap,status";

pub fn write_curve_csv(w: &mut impl Write, rows: &[SweepRow]) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for row in rows {
        match &row.result {
            Ok(b) => writeln!(
                w,
                "{},{},{},{},{}",
                fmt_sig12(row.epsilon),
                fmt_sig12(b.bound),
                fmt_sig12(b.primal),
                fmt_sig12(b.gap),
                b.status
            )?,
            Err(e) => {
                let status = match e {
                    SdpError::Infeasible(_) => SolveStatus::Infeasible,
                    _ => SolveStatus::NumericalFailure,
                };
                writeln!(w, "{},,,,{status}", fmt_sig12(row.epsilon))?
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig12_formatting() {
        assert_eq!(fmt_sig12(0.1 + 0.2), "0.3");
        assert_eq!(fmt_sig12(1.0), "1");
        assert_eq!(fmt_sig12(0.123456789012345), "0.123456789012");
        assert_eq!(fmt_sig12(-0.0), "0");
        assert_eq!(fmt_sig12(1.5e-9), "1.5e-9");
        assert_eq!(fmt_sig12(2.29820606991234e-11), "2.29820606991e-11");
        assert_eq!(fmt_sig12(0.005), "0.005");
    }

    #[test]
    fn empty_grid() {
        assert_eq!(sweep_curve(&CriterionConfig::chsh(0.0), &[]), Err(SdpError::EmptyGrid));
    }

    #[test]
    fn csv_rows() {
        let rows = vec![SweepRow { epsilon: 0.01, result: Err(SdpError::NumericalFailure("stall".into())) }];
        let mut out = Vec::new();
        write_curve_csv(&mut out, &rows).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "epsilon,bound,primal,gap,status\n0.01,,,,numerical-failure\n");
    }
}
