//! Dense state-vector engine for the swap-isometry fidelity.
//!
//! Tensor factors are always ordered `(A, B, A', B')`: Alice's untrusted
//! system, Bob's untrusted system, then the two trusted ancilla qubits.
//! Within a factor list the first factor is the most significant digit of
//! the flattened index.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

const NORM_TOL: f64 = 1e-12;
const FLAG_TOL: f64 = 1e-10;
const DENSITY_TOL: f64 = 1e-9;
/// Largest total dimension handled by the dense path.
pub const MAX_DIM: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("state is not normalised (norm {0})")]
    NotNormalized(f64),
    #[error("expectation value has imaginary part {0}")]
    NotReal(f64),
    #[error("not a density matrix: {0}")]
    NonPhysical(String),
    #[error("total dimension {0} exceeds the dense limit")]
    TooLarge(usize),
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: DVector<C64>,
    dims: Vec<usize>,
}

impl StateVector {
    pub fn new(amps: DVector<C64>, dims: Vec<usize>) -> Result<Self, SimError> {
        let total: usize = dims.iter().product();
        if total != amps.len() {
            return Err(SimError::DimensionMismatch { expected: total, found: amps.len() });
        }
        if total > MAX_DIM {
            return Err(SimError::TooLarge(total));
        }
        let norm = amps.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(SimError::NotNormalized(norm));
        }
        Ok(Self { amps, dims })
    }

    pub fn from_real(amps: &[f64], dims: Vec<usize>) -> Result<Self, SimError> {
        Self::new(DVector::from_iterator(amps.len(), amps.iter().map(|&a| c(a))), dims)
    }

    /// `|Φ+⟩ = (|00⟩ + |11⟩)/√2`.
    pub fn phi_plus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_real(&[h, 0.0, 0.0, h], vec![2, 2]).expect("unit vector")
    }

    pub fn basis(dims: Vec<usize>, index: usize) -> Result<Self, SimError> {
        let total: usize = dims.iter().product();
        if index >= total {
            return Err(SimError::DimensionMismatch { expected: total, found: index + 1 });
        }
        let mut amps = DVector::zeros(total);
        amps[index] = c(1.0);
        Self::new(amps, dims)
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn with_global_phase(&self, phase: f64) -> Self {
        Self { amps: self.amps.map(|a| a * C64::from_polar(1.0, phase)), dims: self.dims.clone() }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps.dotc(&other.amps)
    }
}

/// Square complex matrix acting on a tensor product of factors, with its
/// Hermiticity and unitarity recorded at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    mat: DMatrix<C64>,
    dims: Vec<usize>,
    hermitian: bool,
    unitary: bool,
}

impl DenseOperator {
    pub fn new(mat: DMatrix<C64>, dims: Vec<usize>) -> Result<Self, SimError> {
        let total: usize = dims.iter().product();
        if mat.nrows() != mat.ncols() {
            return Err(SimError::DimensionMismatch { expected: mat.nrows(), found: mat.ncols() });
        }
        if mat.nrows() != total {
            return Err(SimError::DimensionMismatch { expected: total, found: mat.nrows() });
        }
        if total > MAX_DIM {
            return Err(SimError::TooLarge(total));
        }
        let adj = mat.adjoint();
        let hermitian = (&mat - &adj).norm() <= FLAG_TOL;
        let unitary = (&adj * &mat - DMatrix::identity(total, total)).norm() <= FLAG_TOL;
        Ok(Self { mat, dims, hermitian, unitary })
    }

    /// Single-factor operator from row-major real entries.
    pub fn from_real(dim: usize, rows: &[f64]) -> Result<Self, SimError> {
        if rows.len() != dim * dim {
            return Err(SimError::DimensionMismatch { expected: dim * dim, found: rows.len() });
        }
        Self::new(DMatrix::from_row_iterator(dim, dim, rows.iter().map(|&v| c(v))), vec![dim])
    }

    pub fn identity(dim: usize) -> Self {
        Self { mat: DMatrix::identity(dim, dim), dims: vec![dim], hermitian: true, unitary: true }
    }

    pub fn pauli_x() -> Self {
        Self::from_real(2, &[0.0, 1.0, 1.0, 0.0]).expect("2x2")
    }

    pub fn pauli_z() -> Self {
        Self::from_real(2, &[1.0, 0.0, 0.0, -1.0]).expect("2x2")
    }

    /// `cos(φ) σ_z + sin(φ) σ_x`.
    pub fn xz_observable(phi: f64) -> Self {
        let (s, co) = phi.sin_cos();
        Self::from_real(2, &[co, s, s, -co]).expect("2x2")
    }

    /// Real rotation `exp(−i φ σ_y / 2)`; conjugating an xz-plane observable
    /// by it adds `φ` to its Bloch angle.
    pub fn y_rotation(phi: f64) -> Self {
        let (s, co) = (0.5 * phi).sin_cos();
        Self::from_real(2, &[co, -s, s, co]).expect("2x2")
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    pub fn kron(&self, other: &DenseOperator) -> Result<DenseOperator, SimError> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        DenseOperator::new(self.mat.kronecker(&other.mat), dims)
    }

    pub fn compose(&self, other: &DenseOperator) -> Result<DenseOperator, SimError> {
        if self.dim() != other.dim() {
            return Err(SimError::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        DenseOperator::new(&self.mat * &other.mat, self.dims.clone())
    }

    pub fn adjoint(&self) -> DenseOperator {
        Self {
            mat: self.mat.adjoint(),
            dims: self.dims.clone(),
            hermitian: self.hermitian,
            unitary: self.unitary,
        }
    }

    pub fn scaled(&self, k: f64) -> DenseOperator {
        DenseOperator::new(&self.mat * c(k), self.dims.clone()).expect("same shape")
    }

    /// Affine combination `k0·I + Σ k_i M_i` of operators on the same space.
    pub fn linear_combination(
        dim: usize,
        constant: f64,
        terms: &[(f64, &DenseOperator)],
    ) -> Result<DenseOperator, SimError> {
        let mut mat = DMatrix::<C64>::identity(dim, dim) * c(constant);
        for (k, op) in terms {
            if op.dim() != dim {
                return Err(SimError::DimensionMismatch { expected: dim, found: op.dim() });
            }
            mat += &op.mat * c(*k);
        }
        DenseOperator::new(mat, vec![dim])
    }

    /// `U M U†`.
    pub fn conjugated_by(&self, u: &DenseOperator) -> Result<DenseOperator, SimError> {
        if self.dim() != u.dim() {
            return Err(SimError::DimensionMismatch { expected: self.dim(), found: u.dim() });
        }
        DenseOperator::new(&u.mat * &self.mat * u.mat.adjoint(), self.dims.clone())
    }

    pub fn apply(&self, v: &DVector<C64>) -> Result<DVector<C64>, SimError> {
        if v.len() != self.dim() {
            return Err(SimError::DimensionMismatch { expected: self.dim(), found: v.len() });
        }
        Ok(&self.mat * v)
    }
}

/// Validated two-qubit density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn new(mat: DMatrix<C64>) -> Result<Self, SimError> {
        if mat.nrows() != 4 || mat.ncols() != 4 {
            return Err(SimError::DimensionMismatch { expected: 4, found: mat.nrows() });
        }
        if (&mat - mat.adjoint()).norm() > DENSITY_TOL {
            return Err(SimError::NonPhysical("not Hermitian".into()));
        }
        let tr = mat.trace();
        if (tr - c(1.0)).norm() > DENSITY_TOL {
            return Err(SimError::NonPhysical(format!("trace {tr}")));
        }
        let herm = (&mat + mat.adjoint()) * c(0.5);
        let min_eig = herm.symmetric_eigenvalues().min();
        if min_eig < -DENSITY_TOL {
            return Err(SimError::NonPhysical(format!("eigenvalue {min_eig}")));
        }
        Ok(Self { mat })
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    /// `⟨t|ρ|t⟩`.
    pub fn expectation(&self, t: &StateVector) -> Result<f64, SimError> {
        if t.dim() != 4 {
            return Err(SimError::DimensionMismatch { expected: 4, found: t.dim() });
        }
        Ok(t.amps.dotc(&(&self.mat * &t.amps)).re)
    }
}

/// `⟨s| A ⊗ B |s⟩` for a bipartite state `s` with factors `(A, B)`.
pub fn correlator(s: &StateVector, a: &DenseOperator, b: &DenseOperator) -> Result<f64, SimError> {
    if s.dims.len() != 2 {
        return Err(SimError::DimensionMismatch { expected: 2, found: s.dims.len() });
    }
    if a.dim() != s.dims[0] {
        return Err(SimError::DimensionMismatch { expected: s.dims[0], found: a.dim() });
    }
    if b.dim() != s.dims[1] {
        return Err(SimError::DimensionMismatch { expected: s.dims[1], found: b.dim() });
    }
    let v = a.mat.kronecker(&b.mat) * &s.amps;
    let val = s.amps.dotc(&v);
    if val.im.abs() > FLAG_TOL {
        return Err(SimError::NotReal(val.im));
    }
    Ok(val.re)
}

/// Reorders the tensor factors of an operator: factor `k` of the output is
/// factor `perm[k]` of the input.
pub fn permute_factors(op: &DMatrix<C64>, dims: &[usize], perm: &[usize]) -> DMatrix<C64> {
    let n = op.nrows();
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let digits = |mut idx: usize, ds: &[usize]| {
        let mut out = vec![0; ds.len()];
        for k in (0..ds.len()).rev() {
            out[k] = idx % ds[k];
            idx /= ds[k];
        }
        out
    };
    let compose = |digs: &[usize], ds: &[usize]| digs.iter().zip(ds).fold(0, |acc, (d, n)| acc * n + d);
    // new index -> old index
    let map: Vec<usize> = (0..n)
        .map(|new_idx| {
            let nd = digits(new_idx, &new_dims);
            let mut od = vec![0; dims.len()];
            for (k, &p) in perm.iter().enumerate() {
                od[p] = nd[k];
            }
            compose(&od, dims)
        })
        .collect();
    DMatrix::from_fn(n, n, |r, col| op[(map[r], map[col])])
}

/// Concrete control operators for both sides.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlMatrices {
    pub za: DenseOperator,
    pub xa: DenseOperator,
    pub zb: DenseOperator,
    pub xb: DenseOperator,
}

impl ControlMatrices {
    pub fn all_unitary(&self) -> bool {
        [&self.za, &self.xa, &self.zb, &self.xb].iter().all(|o| o.is_unitary())
    }
}

fn ancilla_projector(k: usize) -> DMatrix<C64> {
    let mut p = DMatrix::zeros(2, 2);
    p[(k, k)] = c(1.0);
    p
}

/// `S = U V U` on (system, ancilla) with
/// `U = I ⊗ |0⟩⟨0| + X' ⊗ |1⟩⟨1|` and
/// `V = (I + Z')/2 ⊗ I + (I − Z')/2 ⊗ σ_x`.
pub fn swap_gate(z: &DenseOperator, x: &DenseOperator) -> Result<DenseOperator, SimError> {
    let d = z.dim();
    if x.dim() != d {
        return Err(SimError::DimensionMismatch { expected: d, found: x.dim() });
    }
    let id = DMatrix::<C64>::identity(d, d);
    let u = id.kronecker(&ancilla_projector(0)) + x.mat.kronecker(&ancilla_projector(1));
    let plus = (&id + &z.mat) * c(0.5);
    let minus = (&id - &z.mat) * c(0.5);
    let v = plus.kronecker(&DMatrix::identity(2, 2)) + minus.kronecker(DenseOperator::pauli_x().matrix());
    let mut dims = z.dims.clone();
    dims.push(2);
    DenseOperator::new(&u * &v * &u, dims)
}

/// `S_AA' ⊗ S_BB'` in `(A, B, A', B')` ordering.
pub fn swap_isometry(c: &ControlMatrices) -> Result<DenseOperator, SimError> {
    let sa = swap_gate(&c.za, &c.xa)?;
    let sb = swap_gate(&c.zb, &c.xb)?;
    let (da, db) = (c.za.dim(), c.zb.dim());
    let total = da * db * 4;
    if total > MAX_DIM {
        return Err(SimError::TooLarge(total));
    }
    let joint = sa.mat.kronecker(&sb.mat);
    // (A, A', B, B') -> (A, B, A', B')
    let mat = permute_factors(&joint, &[da, 2, db, 2], &[0, 2, 1, 3]);
    DenseOperator::new(mat, vec![da, db, 2, 2])
}

/// Applies the swap isometry to `s ⊗ |00⟩`, traces out the untrusted
/// systems and returns `(ρ_swap, ⟨target|ρ_swap|target⟩)`.
pub fn rho_swap_fidelity(
    s: &StateVector,
    c: &ControlMatrices,
    target: &StateVector,
) -> Result<(DensityMatrix, f64), SimError> {
    if s.dims.len() != 2 {
        return Err(SimError::DimensionMismatch { expected: 2, found: s.dims.len() });
    }
    if c.za.dim() != s.dims[0] || c.xa.dim() != s.dims[0] {
        return Err(SimError::DimensionMismatch { expected: s.dims[0], found: c.za.dim() });
    }
    if c.zb.dim() != s.dims[1] || c.xb.dim() != s.dims[1] {
        return Err(SimError::DimensionMismatch { expected: s.dims[1], found: c.zb.dim() });
    }
    if target.dim() != 4 {
        return Err(SimError::DimensionMismatch { expected: 4, found: target.dim() });
    }
    let sw = swap_isometry(c)?;
    let mut input = DVector::zeros(s.dim() * 4);
    for (k, a) in s.amps.iter().enumerate() {
        input[4 * k] = *a;
    }
    let out = &sw.mat * input;
    let sys = s.dim();
    let rho = DMatrix::from_fn(4, 4, |r, col| {
        (0..sys).map(|k| out[4 * k + r] * out[4 * k + col].conj()).sum::<C64>()
    });
    let rho = DensityMatrix::new(rho)?;
    let f = rho.expectation(target)?;
    Ok((rho, f))
}

/// `cos(α00/2)|Φ+⟩ + sin(α00/2)(|01⟩ − |10⟩)/√2`, the maximally entangled
/// state with Bob's frame rotated by `α00` about `y`.
pub fn rotated_target(alpha00: f64) -> StateVector {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let (s, co) = (0.5 * alpha00).sin_cos();
    StateVector::from_real(&[co * h, s * h, -s * h, co * h], vec![2, 2]).expect("unit vector")
}

/// Target for Bob controls whose `Z'_B` sits at Bloch angle `α00`: the
/// swap reads Bob's qubit in the frame `R_y(α00)|j⟩`, so the ancillas end up
/// in `(I ⊗ R_y(−α00))|Φ+⟩ = rotated_target(−α00)`.
pub fn bob_frame_target(alpha00: f64) -> StateVector {
    rotated_target(-alpha00)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};

    fn std_controls() -> ControlMatrices {
        ControlMatrices {
            za: DenseOperator::pauli_z(),
            xa: DenseOperator::pauli_x(),
            zb: DenseOperator::pauli_z(),
            xb: DenseOperator::pauli_x(),
        }
    }

    #[test]
    fn correlator_examples() {
        let s = StateVector::phi_plus();
        let z = DenseOperator::pauli_z();
        let id = DenseOperator::identity(2);
        assert!((correlator(&s, &z, &z).unwrap() - 1.0).abs() < 1e-15);
        assert!(correlator(&s, &z, &id).unwrap().abs() < 1e-15);
        let a0 = DenseOperator::xz_observable(0.0);
        let b0 = DenseOperator::xz_observable(FRAC_PI_4);
        assert!((correlator(&s, &a0, &b0).unwrap() - FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn correlator_dimension_mismatch() {
        let s = StateVector::phi_plus();
        let big = DenseOperator::identity(3);
        let z = DenseOperator::pauli_z();
        assert!(matches!(correlator(&s, &big, &z), Err(SimError::DimensionMismatch { .. })));
    }

    #[test]
    fn swap_gate_moves_basis_states_into_ancilla() {
        let s = swap_gate(&DenseOperator::pauli_z(), &DenseOperator::pauli_x()).unwrap();
        // |φ⟩|0⟩ -> |0⟩|φ⟩ for φ ∈ {0, 1}; index = 2·system + ancilla
        for phi in 0..2 {
            let mut v = DVector::zeros(4);
            v[2 * phi] = c(1.0);
            let out = s.apply(&v).unwrap();
            let mut want = DVector::zeros(4);
            want[phi] = c(1.0);
            assert!((out - want).norm() < 1e-15);
        }
    }

    #[test]
    fn first_u_acts_trivially_on_fresh_ancilla() {
        let z = DenseOperator::xz_observable(0.3);
        let x = DenseOperator::xz_observable(1.1);
        let full = swap_gate(&z, &x).unwrap();
        let id = DMatrix::<C64>::identity(2, 2);
        let v = (&id + &z.mat) * c(0.5);
        let v = v.kronecker(&id) + ((&id - &z.mat) * c(0.5)).kronecker(DenseOperator::pauli_x().matrix());
        let u = id.kronecker(&ancilla_projector(0)) + x.mat.kronecker(&ancilla_projector(1));
        let short = &u * &v;
        for sys in 0..2 {
            let mut e = DVector::zeros(4);
            e[2 * sys] = c(1.0);
            assert!((&full.mat * &e - &short * &e).norm() < 1e-14);
        }
    }

    #[test]
    fn isometry_unitarity_flag() {
        let s = swap_isometry(&std_controls()).unwrap();
        assert!(s.is_unitary());
        let mut bad = std_controls();
        bad.xa = bad.xa.scaled(1.1);
        assert!(!bad.all_unitary());
        assert!(!swap_isometry(&bad).unwrap().is_unitary());
    }

    #[test]
    fn product_state_has_half_fidelity() {
        let s = StateVector::basis(vec![2, 2], 0).unwrap();
        let (rho, f) = rho_swap_fidelity(&s, &std_controls(), &StateVector::phi_plus()).unwrap();
        assert!((f - 0.5).abs() < 1e-12);
        assert!((rho.matrix()[(0, 0)].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ideal_state_has_unit_fidelity() {
        let s = StateVector::phi_plus();
        let (_, f) = rho_swap_fidelity(&s, &std_controls(), &StateVector::phi_plus()).unwrap();
        assert!((f - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rotated_target_values() {
        let t = rotated_target(0.0);
        assert!((t.inner(&StateVector::phi_plus()).norm() - 1.0).abs() < 1e-15);
        let t = rotated_target(FRAC_PI_4);
        let (s8, c8) = (PI / 8.0).sin_cos();
        let want = [c8, s8, -s8, c8].map(|v| v * FRAC_1_SQRT_2);
        for (a, w) in t.amplitudes().iter().zip(want) {
            assert!((a.re - w).abs() < 1e-15 && a.im == 0.0);
        }
        for k in 0..50 {
            let t = rotated_target(PI * k as f64 / 49.0);
            assert!((t.amplitudes().norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn rotated_target_is_bob_rotation_of_phi_plus() {
        let a = 0.83;
        let r = DenseOperator::identity(2).kron(&DenseOperator::y_rotation(a)).unwrap();
        let v = r.apply(StateVector::phi_plus().amplitudes()).unwrap();
        assert!((v - rotated_target(a).amplitudes()).norm() < 1e-14);
    }

    #[test]
    fn permutation_round_trip() {
        let m = DMatrix::from_fn(12, 12, |r, col| c((r * 12 + col) as f64));
        let p = permute_factors(&m, &[2, 3, 2], &[2, 0, 1]);
        let back = permute_factors(&p, &[2, 2, 3], &[1, 2, 0]);
        assert_eq!(m, back);
    }

    #[test]
    fn non_normalised_state_rejected() {
        assert!(matches!(
            StateVector::from_real(&[1.0, 1.0, 0.0, 0.0], vec![2, 2]),
            Err(SimError::NotNormalized(_))
        ));
    }
}
