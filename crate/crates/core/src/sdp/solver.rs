//! Dense primal-dual interior-point method for linear matrix inequalities.
//!
//! The problem handed to a backend is
//!
//! ```text
//! minimise   c0 + cᵀy
//! subject to G_b(y) = G_b0 + Σ_i y_i G_bi ⪰ 0   for every block b
//!            lo_i ≤ y_i ≤ hi_i
//!            a_kᵀy + a_k0 = 0
//! ```
//!
//! Equalities are eliminated with an SVD null-space basis `y = y_p + N z`.
//! The reduced LMI is solved in the standard primal/dual pair
//!
//! ```text
//! (P) min ⟨C, X⟩  s.t. ⟨A_k, X⟩ = b_k, X ⪰ 0
//! (D) max bᵀz     s.t. C − Σ z_k A_k = S ⪰ 0
//! ```
//!
//! with `C = Ĝ0`, `A_k = −Ĝ_k`, `b = −ĉ`, using HKM search directions with
//! a Mehrotra predictor-corrector. Bounds become a diagonal (LP) block.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::SdpError;

/// Real affine form `constant + Σ coef·y_var`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AffineForm {
    pub constant: f64,
    pub terms: Vec<(usize, f64)>,
}

impl AffineForm {
    pub fn constant(c: f64) -> AffineForm {
        AffineForm { constant: c, terms: Vec::new() }
    }

    pub fn evaluate(&self, y: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(i, k)| k * y[i]).sum::<f64>()
    }

    pub fn sub(&self, other: &AffineForm) -> AffineForm {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().map(|&(i, k)| (i, -k)));
        AffineForm { constant: self.constant - other.constant, terms }.merged()
    }

    /// Combines repeated variables and drops zero coefficients.
    pub fn merged(mut self) -> AffineForm {
        self.terms.sort_by_key(|t| t.0);
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(self.terms.len());
        for (i, k) in self.terms {
            match out.last_mut() {
                Some(last) if last.0 == i => last.1 += k,
                _ => out.push((i, k)),
            }
        }
        out.retain(|t| t.1.abs() > 1e-15);
        AffineForm { constant: self.constant, terms: out }
    }
}

/// Symmetric matrix of affine forms; only `entries[r][c]` with `r ≤ c` is
/// read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdBlock {
    pub name: String,
    pub dim: usize,
    pub entries: Vec<Vec<AffineForm>>,
}

impl PsdBlock {
    pub fn evaluate(&self, y: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |r, c| {
            let (r, c) = if r <= c { (r, c) } else { (c, r) };
            self.entries[r][c].evaluate(y)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LmiProblem {
    pub n_vars: usize,
    pub blocks: Vec<PsdBlock>,
    /// `(lo, hi)` per variable; infinite ends are dropped.
    pub bounds: Vec<(f64, f64)>,
    /// Each form must vanish.
    pub equalities: Vec<AffineForm>,
    pub objective: AffineForm,
}

/// Multipliers of one solve: one PSD matrix per block plus nonnegative
/// weights on the lower and upper bound of each variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Multipliers {
    pub blocks: Vec<DMatrix<f64>>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawSolution {
    /// Moment assignment from the last iterate.
    pub y: Vec<f64>,
    pub multipliers: Multipliers,
    pub iterations: usize,
    pub converged: bool,
    pub relative_gap: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    /// Why the iteration stopped early, if it did.
    pub stall_reason: Option<String>,
    /// Block multipliers of earlier iterates, oldest first. On degenerate
    /// problems an intermediate iterate can certify more than the last one.
    pub trail: Vec<Vec<DMatrix<f64>>>,
}

/// A solver that returns a moment assignment and block multipliers. The
/// bound is certified separately from whatever the backend returns.
pub trait SdpBackend {
    fn solve(&self, problem: &LmiProblem) -> Result<RawSolution, SdpError>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteriorPoint {
    pub max_iterations: usize,
    pub tolerance: f64,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
}

impl Default for InteriorPoint {
    fn default() -> Self {
        Self { max_iterations: 150, tolerance: 1e-10, step_fraction: 0.9 }
    }
}

/// Block-diagonal symmetric matrix: dense blocks plus one diagonal block.
#[derive(Debug, Clone)]
struct BlockMat {
    dense: Vec<DMatrix<f64>>,
    diag: DVector<f64>,
}

impl BlockMat {
    fn zeros_like(shape: &Shape) -> BlockMat {
        BlockMat {
            dense: shape.dims.iter().map(|&d| DMatrix::zeros(d, d)).collect(),
            diag: DVector::zeros(shape.lp),
        }
    }

    fn identity(shape: &Shape, k: f64) -> BlockMat {
        BlockMat {
            dense: shape.dims.iter().map(|&d| DMatrix::identity(d, d) * k).collect(),
            diag: DVector::from_element(shape.lp, k),
        }
    }

    fn inner(&self, o: &BlockMat) -> f64 {
        self.dense.iter().zip(&o.dense).map(|(a, b)| a.dot(b)).sum::<f64>() + self.diag.dot(&o.diag)
    }

    fn axpy(&mut self, k: f64, o: &BlockMat) {
        for (a, b) in self.dense.iter_mut().zip(&o.dense) {
            *a += b * k;
        }
        self.diag += &o.diag * k;
    }

    fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }
}

#[derive(Debug, Clone)]
struct Shape {
    dims: Vec<usize>,
    lp: usize,
}

/// The reduced dual-form problem `max bᵀz s.t. C − Σ z_k A_k ⪰ 0`.
struct Reduced {
    shape: Shape,
    c: BlockMat,
    a: Vec<BlockMat>,
    b: DVector<f64>,
    /// `y = y_p + N z`
    y_p: DVector<f64>,
    null: DMatrix<f64>,
    /// LP rows as `(var, sign, offset)`: `sign·y_var + offset ≥ 0`.
    lp_rows: Vec<(usize, f64, f64)>,
}

fn equality_system(p: &LmiProblem) -> (DMatrix<f64>, DVector<f64>) {
    let m = p.equalities.len();
    let mut e = DMatrix::zeros(m, p.n_vars);
    let mut rhs = DVector::zeros(m);
    for (r, form) in p.equalities.iter().enumerate() {
        for &(i, k) in &form.terms {
            e[(r, i)] += k;
        }
        rhs[r] = -form.constant;
    }
    (e, rhs)
}

/// Particular solution and orthonormal null-space basis of `E y = e`.
fn eliminate(p: &LmiProblem) -> Result<(DVector<f64>, DMatrix<f64>), SdpError> {
    let n = p.n_vars;
    if p.equalities.is_empty() {
        return Ok((DVector::zeros(n), DMatrix::identity(n, n)));
    }
    let (e, rhs) = equality_system(p);
    // SVD of Eᵀ E gives the right singular vectors even when E is wide
    let gram = e.transpose() * &e;
    let eig = SymmetricEigen::new(gram);
    let scale = eig.eigenvalues.iter().copied().fold(0.0, f64::max).max(1.0);
    let mut null_cols = Vec::new();
    let mut range_cols = Vec::new();
    for k in 0..n {
        if eig.eigenvalues[k] <= 1e-12 * scale {
            null_cols.push(eig.eigenvectors.column(k).into_owned());
        } else {
            range_cols.push(k);
        }
    }
    // least-squares particular solution restricted to the row space
    let mut y_p = DVector::zeros(n);
    let et_rhs = e.transpose() * &rhs;
    for &k in &range_cols {
        let v = eig.eigenvectors.column(k);
        y_p += v * (v.dot(&et_rhs) / eig.eigenvalues[k]);
    }
    let resid = (&e * &y_p - &rhs).amax();
    if resid > 1e-9 {
        return Err(SdpError::Infeasible(format!("equality constraints inconsistent (residual {resid:e})")));
    }
    let null = if null_cols.is_empty() { DMatrix::zeros(n, 0) } else { DMatrix::from_columns(&null_cols) };
    Ok((y_p, null))
}

fn reduce(p: &LmiProblem) -> Result<Reduced, SdpError> {
    let (y_p, null) = eliminate(p)?;
    let nz = null.ncols();

    let mut lp_rows = Vec::new();
    for (i, &(lo, hi)) in p.bounds.iter().enumerate() {
        // variables pinned by the equalities leave a constant row
        if null.row(i).amax() <= 1e-12 {
            if y_p[i] < lo - 1e-9 || y_p[i] > hi + 1e-9 {
                return Err(SdpError::Infeasible(format!("variable {i} pinned outside its bounds")));
            }
            continue;
        }
        if lo.is_finite() {
            lp_rows.push((i, 1.0, -lo));
        }
        if hi.is_finite() {
            lp_rows.push((i, -1.0, hi));
        }
    }
    let shape = Shape { dims: p.blocks.iter().map(|b| b.dim).collect(), lp: lp_rows.len() };

    // G0 at y_p and per-z coefficient matrices
    let mut c = BlockMat::zeros_like(&shape);
    let mut g: Vec<BlockMat> = (0..nz).map(|_| BlockMat::zeros_like(&shape)).collect();
    for (bi, block) in p.blocks.iter().enumerate() {
        for r in 0..block.dim {
            for col in r..block.dim {
                let form = &block.entries[r][col];
                let mut v0 = form.constant;
                for &(i, k) in &form.terms {
                    v0 += k * y_p[i];
                }
                c.dense[bi][(r, col)] = v0;
                c.dense[bi][(col, r)] = v0;
                for (zk, gk) in g.iter_mut().enumerate() {
                    let v: f64 = form.terms.iter().map(|&(i, k)| k * null[(i, zk)]).sum();
                    gk.dense[bi][(r, col)] = v;
                    gk.dense[bi][(col, r)] = v;
                }
            }
        }
    }
    for (row, &(i, sign, off)) in lp_rows.iter().enumerate() {
        c.diag[row] = sign * y_p[i] + off;
        for (zk, gk) in g.iter_mut().enumerate() {
            gk.diag[row] = sign * null[(i, zk)];
        }
    }
    let mut chat = DVector::zeros(nz);
    for &(i, k) in &p.objective.terms {
        for zk in 0..nz {
            chat[zk] += k * null[(i, zk)];
        }
    }
    let a = g
        .into_iter()
        .map(|mut gk| {
            for d in &mut gk.dense {
                d.neg_mut();
            }
            gk.diag.neg_mut();
            gk
        })
        .collect();
    Ok(Reduced { shape, c, a, b: -chat, y_p, null, lp_rows })
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Largest `α` with `X + α D ⪰ 0`, for `X ≻ 0`.
fn max_step(x: &BlockMat, d: &BlockMat) -> Option<f64> {
    let mut alpha = f64::INFINITY;
    for (xb, db) in x.dense.iter().zip(&d.dense) {
        if xb.nrows() == 0 {
            continue;
        }
        let l = Cholesky::new(xb.clone())?.l();
        let linv = l.clone().try_inverse()?;
        let m = sym(&(&linv * db * linv.transpose()));
        let lmin = m.symmetric_eigenvalues().min();
        if lmin < 0.0 {
            alpha = alpha.min(-1.0 / lmin);
        }
    }
    for (xv, dv) in x.diag.iter().zip(d.diag.iter()) {
        if *dv < 0.0 {
            alpha = alpha.min(-xv / dv);
        }
    }
    Some(alpha)
}

fn is_pd(x: &BlockMat) -> bool {
    x.dense.iter().all(|b| b.nrows() == 0 || Cholesky::new(b.clone()).is_some()) && x.diag.iter().all(|&v| v > 0.0)
}

/// Shrinks `α` until `X + αD` passes a Cholesky test; rounding can defeat
/// the eigenvalue step bound on badly conditioned iterates.
fn backtrack(x: &BlockMat, d: &BlockMat, mut alpha: f64) -> Option<f64> {
    for _ in 0..40 {
        let mut t = x.clone();
        t.axpy(alpha, d);
        if is_pd(&t) {
            return Some(alpha);
        }
        alpha *= 0.7;
    }
    None
}

fn inverse(s: &BlockMat) -> Option<BlockMat> {
    let mut dense = Vec::with_capacity(s.dense.len());
    for b in &s.dense {
        if b.nrows() == 0 {
            dense.push(b.clone());
            continue;
        }
        dense.push(sym(&Cholesky::new(b.clone())?.inverse()));
    }
    if s.diag.iter().any(|&v| v <= 0.0) {
        return None;
    }
    Some(BlockMat { dense, diag: s.diag.map(|v| 1.0 / v) })
}

fn failure(msg: &str, iter: usize) -> SdpError {
    SdpError::NumericalFailure(format!("{msg} at iteration {iter}"))
}

type Step = (BlockMat, BlockMat, DVector<f64>, f64, f64);

/// HKM predictor-corrector direction and step lengths.
#[allow(clippy::too_many_arguments)]
fn newton_step(
    red: &Reduced,
    x: &BlockMat,
    s: &BlockMat,
    rd: &BlockMat,
    rp: &DVector<f64>,
    mu: f64,
    n_total: f64,
    step_fraction: f64,
) -> Result<Step, &'static str> {
    let m = red.a.len();
        let sinv = inverse(&s).ok_or("slack lost definiteness")?;
        // W_l = X A_l S⁻¹
        let w: Vec<BlockMat> = red
            .a
            .iter()
            .map(|al| BlockMat {
                dense: x
                    .dense
                    .iter()
                    .zip(&al.dense)
                    .zip(&sinv.dense)
                    .map(|((xb, ab), sb)| xb * ab * sb)
                    .collect(),
                diag: x.diag.component_mul(&al.diag).component_mul(&sinv.diag),
            })
            .collect();
        let mut schur = DMatrix::<f64>::zeros(m, m);
        for k in 0..m {
            for l in k..m {
                let v = red.a[k].inner(&w[l]);
                schur[(k, l)] = v;
                schur[(l, k)] = v;
            }
        }
        let schur = sym(&schur);
        let chol = match Cholesky::new(schur.clone()) {
            Some(c) => c,
            None => {
                let reg = 1e-12 * (1.0 + schur.diagonal().amax());
                Cholesky::new(schur + DMatrix::identity(m, m) * reg)
                    .ok_or("Schur complement not positive definite")?
            }
        };

        // X Rd S⁻¹
        let xrds = BlockMat {
            dense: x
                .dense
                .iter()
                .zip(&rd.dense)
                .zip(&sinv.dense)
                .map(|((xb, rb), sb)| xb * rb * sb)
                .collect(),
            diag: x.diag.component_mul(&rd.diag).component_mul(&sinv.diag),
        };

        let direction = |h: &BlockMat| -> (DVector<f64>, BlockMat, BlockMat) {
            let mut rhs_mat = h.clone();
            rhs_mat.axpy(-1.0, &xrds);
            let rhs = DVector::from_fn(m, |k, _| rp[k] - red.a[k].inner(&rhs_mat));
            let dz = chol.solve(&rhs);
            let mut ds = rd.clone();
            for (k, ak) in red.a.iter().enumerate() {
                ds.axpy(-dz[k], ak);
            }
            let dx = BlockMat {
                dense: h
                    .dense
                    .iter()
                    .zip(&x.dense)
                    .zip(&ds.dense)
                    .zip(&sinv.dense)
                    .map(|(((hb, xb), db), sb)| sym(&(hb - xb * db * sb)))
                    .collect(),
                diag: &h.diag - x.diag.component_mul(&ds.diag).component_mul(&sinv.diag),
            };
            (dz, dx, ds)
        };

        // predictor
        let mut h_aff = x.clone();
        for d in &mut h_aff.dense {
            d.neg_mut();
        }
        h_aff.diag.neg_mut();
        let (_, dx_aff, ds_aff) = direction(&h_aff);
        let ap = max_step(&x, &dx_aff).ok_or("primal iterate not positive definite")?;
        let ad = max_step(&s, &ds_aff).ok_or("slack iterate not positive definite")?;
        let (ap, ad) = (ap.min(1.0), ad.min(1.0));
        let mut xa = x.clone();
        xa.axpy(ap, &dx_aff);
        let mut sa = s.clone();
        sa.axpy(ad, &ds_aff);
        let mu_aff = xa.inner(&sa) / n_total;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // corrector: H = σμS⁻¹ − X − ΔX_aff ΔS_aff S⁻¹
        let h = BlockMat {
            dense: sinv
                .dense
                .iter()
                .zip(&x.dense)
                .zip(dx_aff.dense.iter().zip(&ds_aff.dense))
                .map(|((sb, xb), (dxb, dsb))| sb * (sigma * mu) - xb - dxb * dsb * sb)
                .collect(),
            diag: sinv.diag.map(|v| v * sigma * mu)
                - &x.diag
                - dx_aff.diag.component_mul(&ds_aff.diag).component_mul(&sinv.diag),
        };
        let (dz, dx, ds) = direction(&h);
        let ap = max_step(&x, &dx).ok_or("primal iterate not positive definite")?;
        let ad = max_step(&s, &ds).ok_or("slack iterate not positive definite")?;
        let ap = backtrack(x, &dx, (step_fraction * ap).min(1.0)).ok_or("primal step cannot keep definiteness")?;
        let ad = backtrack(s, &ds, (step_fraction * ad).min(1.0)).ok_or("dual step cannot keep definiteness")?;
        Ok((dx, ds, dz, ap, ad))

}

impl SdpBackend for InteriorPoint {
    fn solve(&self, problem: &LmiProblem) -> Result<RawSolution, SdpError> {
        let red = reduce(problem)?;
        let shape = red.shape.clone();
        let m = red.a.len();
        let n_total = (shape.dims.iter().sum::<usize>() + shape.lp) as f64;

        let max_a = red.a.iter().map(|a| a.norm()).fold(0.0, f64::max);
        let xi = red
            .a
            .iter()
            .zip(red.b.iter())
            .map(|(a, b)| n_total * (1.0 + b.abs()) / (1.0 + a.norm()))
            .fold(10f64.max(n_total.sqrt()), f64::max);
        let eta = 10f64.max(n_total.sqrt()).max(red.c.norm()).max(max_a);
        let mut x = BlockMat::identity(&shape, xi);
        let mut s = BlockMat::identity(&shape, eta);
        let mut z = DVector::<f64>::zeros(m);

        let norm_b = 1.0 + red.b.norm();
        let norm_c = 1.0 + red.c.norm();
        let mut converged = false;
        let mut stalled: Option<&'static str> = None;
        let mut iterations = 0;
        let mut trail = Vec::new();
        let (mut relgap, mut pinf, mut dinf) = (f64::INFINITY, f64::INFINITY, f64::INFINITY);

        for iter in 0..self.max_iterations {
            iterations = iter;
            // residuals
            let mut rd = red.c.clone();
            rd.axpy(-1.0, &s);
            for (k, ak) in red.a.iter().enumerate() {
                rd.axpy(-z[k], ak);
            }
            let rp = DVector::from_fn(m, |k, _| red.b[k] - red.a[k].inner(&x));
            let pobj = red.c.inner(&x);
            let dobj = red.b.dot(&z);
            let mu = x.inner(&s) / n_total;
            relgap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
            pinf = rp.norm() / norm_b;
            dinf = rd.norm() / norm_c;
            if !(relgap.is_finite() && pinf.is_finite() && dinf.is_finite()) {
                return Err(failure("non-finite iterate", iter));
            }
            if relgap <= self.tolerance && pinf <= self.tolerance && dinf <= self.tolerance {
                converged = true;
                break;
            }

            if iter > 0 {
                trail.push(x.dense.clone());
            }
            match newton_step(&red, &x, &s, &rd, &rp, mu, n_total, self.step_fraction) {
                Ok((dx, ds, dz, ap, ad)) => {
                    x.axpy(ap, &dx);
                    s.axpy(ad, &ds);
                    z += dz * ad;
                }
                Err(msg) if iter > 0 => {
                    stalled = Some(msg);
                    break;
                }
                Err(msg) => return Err(failure(msg, iter)),
            }
        }

        let y = &red.y_p + &red.null * &z;
        let mut lower = vec![0.0; problem.n_vars];
        let mut upper = vec![0.0; problem.n_vars];
        for (row, &(i, sign, _)) in red.lp_rows.iter().enumerate() {
            if sign > 0.0 {
                lower[i] = x.diag[row];
            } else {
                upper[i] = x.diag[row];
            }
        }
        Ok(RawSolution {
            y: y.iter().copied().collect(),
            multipliers: Multipliers { blocks: x.dense, lower, upper },
            iterations,
            converged,
            relative_gap: relgap,
            primal_infeasibility: pinf,
            dual_infeasibility: dinf,
            stall_reason: stalled.map(|m| format!("{m} at iteration {iterations}")),
            trail,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn form(constant: f64, terms: &[(usize, f64)]) -> AffineForm {
        AffineForm { constant, terms: terms.to_vec() }
    }

    /// min y0 s.t. [[1, y0], [y0, 1]] ⪰ 0  →  −1.
    #[test]
    fn two_by_two_lmi() {
        let block = PsdBlock {
            name: "g".into(),
            dim: 2,
            entries: vec![vec![form(1.0, &[]), form(0.0, &[(0, 1.0)])], vec![form(0.0, &[]), form(1.0, &[])]],
        };
        let p = LmiProblem {
            n_vars: 1,
            blocks: vec![block],
            bounds: vec![(f64::NEG_INFINITY, f64::INFINITY)],
            equalities: vec![],
            objective: form(0.0, &[(0, 1.0)]),
        };
        let sol = InteriorPoint::default().solve(&p).unwrap();
        assert!(sol.converged);
        assert!((sol.y[0] + 1.0).abs() < 1e-7, "{}", sol.y[0]);
    }

    /// Elliptope corner: min y0 + y1 + y2 over 3×3 correlation matrices
    /// with y2 pinned to 0.5 by an equality; optimum is −1.25 − 0.5.
    #[test]
    fn equality_pinned_elliptope() {
        let e = |c: f64, t: &[(usize, f64)]| form(c, t);
        let entries = vec![
            vec![e(1.0, &[]), e(0.0, &[(0, 1.0)]), e(0.0, &[(1, 1.0)])],
            vec![e(0.0, &[]), e(1.0, &[]), e(0.0, &[(2, 1.0)])],
            vec![e(0.0, &[]), e(0.0, &[]), e(1.0, &[])],
        ];
        let p = LmiProblem {
            n_vars: 3,
            blocks: vec![PsdBlock { name: "g".into(), dim: 3, entries }],
            bounds: vec![(-1.0, 1.0); 3],
            equalities: vec![form(-0.5, &[(2, 1.0)])],
            objective: form(0.0, &[(0, 1.0), (1, 1.0), (2, 1.0)]),
        };
        let sol = InteriorPoint::default().solve(&p).unwrap();
        assert!(sol.converged);
        // with y2 = 1/2 the minimum of y0 + y1 is −3/2 at y0 = y1 = −3/4·... check by brute force
        let mut best = f64::INFINITY;
        let n = 400;
        for i in 0..=n {
            for j in 0..=n {
                let (a, b) = (-1.0 + 2.0 * i as f64 / n as f64, -1.0 + 2.0 * j as f64 / n as f64);
                let m = nalgebra::Matrix3::new(1.0, a, b, a, 1.0, 0.5, b, 0.5, 1.0);
                if m.symmetric_eigenvalues().min() >= -1e-12 {
                    best = best.min(a + b + 0.5);
                }
            }
        }
        let val = sol.y[0] + sol.y[1] + sol.y[2];
        assert!((val - best).abs() < 2e-2, "{val} vs grid {best}");
        assert!(val <= best + 1e-6);
        assert!((sol.y[2] - 0.5).abs() < 1e-9);
    }
}
