//! Explicit qubit realization of a canonical self-testing point, the
//! control operators of the swap isometry, and the relation checks that
//! certify them.
//!
//! All Bloch vectors sit in the xz-plane: an angle `φ` denotes the
//! observable `cos(φ) σ_z + sin(φ) σ_x`. Alice measures at `0` and `θ`, Bob
//! at `α00` and `α01`, on `|Φ+⟩`, so that `E_xy = cos(a_x − b_y)`.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{AffineOp, Letter, Party, SwapControls, Word};
use crate::geometry::{AnglePoint, CorrelationPoint};
use crate::simulator::{self, ControlMatrices, DenseOperator, SimError, StateVector, C64};

/// A sine whose magnitude falls below this is treated as zero.
const SINGULAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RealizationError {
    #[error("angle point does not satisfy alpha01 = alpha00 + alpha10 + alpha11")]
    NotCanonical,
    #[error("two or more angles are 0 or pi")]
    TooDegenerate,
    #[error("vanishing denominator {0}")]
    SingularDenominator(Denominator),
    #[error("observable {0} is not part of this realization")]
    MissingObservable(Letter),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// The sines that appear as denominators of the control operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Denominator {
    /// `sin(α00 + α10)`, i.e. `sin θ`.
    ThetaSum,
    /// `sin(α01 − α00)`.
    BobSpread,
    /// `sin(α10 + α11)`.
    RotatedBob,
}

impl fmt::Display for Denominator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Denominator::ThetaSum => "sin(alpha00+alpha10)",
            Denominator::BobSpread => "sin(alpha01-alpha00)",
            Denominator::RotatedBob => "sin(alpha10+alpha11)",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QubitRealization {
    angles: AnglePoint,
    state: StateVector,
    pub meas_angle_a: [f64; 2],
    pub meas_angle_b: [f64; 2],
    /// Bloch angle of an auxiliary third observable `A2`, if any.
    pub aux_a: Option<f64>,
    /// Bloch angle of an auxiliary third observable `B2`, if any.
    pub aux_b: Option<f64>,
}

impl QubitRealization {
    pub fn angles(&self) -> &AnglePoint {
        &self.angles
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn with_aux_a(mut self, phi: f64) -> Self {
        self.aux_a = Some(phi);
        self
    }

    pub fn with_aux_b(mut self, phi: f64) -> Self {
        self.aux_b = Some(phi);
        self
    }

    pub fn bloch_angle(&self, l: Letter) -> Option<f64> {
        match l {
            Letter::A0 => Some(self.meas_angle_a[0]),
            Letter::A1 => Some(self.meas_angle_a[1]),
            Letter::A2 => self.aux_a,
            Letter::B0 => Some(self.meas_angle_b[0]),
            Letter::B1 => Some(self.meas_angle_b[1]),
            Letter::B2 => self.aux_b,
        }
    }

    pub fn observable(&self, l: Letter) -> Result<DenseOperator, RealizationError> {
        self.bloch_angle(l)
            .map(DenseOperator::xz_observable)
            .ok_or(RealizationError::MissingObservable(l))
    }

    /// Simulated `⟨A_x B_y⟩` for `x, y ∈ {0, 1}`.
    pub fn correlators(&self) -> Result<CorrelationPoint, RealizationError> {
        let mut e = [[0.0; 2]; 2];
        for (x, row) in e.iter_mut().enumerate() {
            for (y, v) in row.iter_mut().enumerate() {
                let a = self.observable(Letter::alice(x))?;
                let b = self.observable(Letter::bob(y))?;
                *v = simulator::correlator(&self.state, &a, &b)?;
            }
        }
        Ok(CorrelationPoint::new(e).expect("quantum correlators lie in [-1, 1]"))
    }

    /// Simulated `(⟨A0⟩, ⟨A1⟩)` and `(⟨B0⟩, ⟨B1⟩)`.
    pub fn marginals(&self) -> Result<([f64; 2], [f64; 2]), RealizationError> {
        let id = DenseOperator::identity(2);
        let mut ma = [0.0; 2];
        let mut mb = [0.0; 2];
        for k in 0..2 {
            ma[k] = simulator::correlator(&self.state, &self.observable(Letter::alice(k))?, &id)?;
            mb[k] = simulator::correlator(&self.state, &id, &self.observable(Letter::bob(k))?)?;
        }
        Ok((ma, mb))
    }

    /// Matrix of a word on the two-qubit space.
    pub fn word_operator(&self, w: &Word) -> Result<DenseOperator, RealizationError> {
        let mut a = DenseOperator::identity(2);
        let mut b = DenseOperator::identity(2);
        for &l in w.letters() {
            let o = self.observable(l)?;
            match l.party() {
                Party::Alice => a = a.compose(&o)?,
                Party::Bob => b = b.compose(&o)?,
            }
        }
        Ok(a.kron(&b)?)
    }

    /// Real part of `⟨ψ|w|ψ⟩`.
    pub fn moment(&self, w: &Word) -> Result<f64, RealizationError> {
        let op = self.word_operator(w)?;
        let v = op.apply(self.state.amplitudes())?;
        Ok(self.state.amplitudes().dotc(&v).re)
    }

    fn affine_matrix(&self, op: &AffineOp) -> Result<DenseOperator, RealizationError> {
        let mats: Vec<(f64, DenseOperator)> =
            op.terms.iter().map(|&(l, k)| Ok((k, self.observable(l)?))).collect::<Result<_, RealizationError>>()?;
        let refs: Vec<(f64, &DenseOperator)> = mats.iter().map(|(k, m)| (*k, m)).collect();
        Ok(DenseOperator::linear_combination(2, op.constant, &refs)?)
    }
}

/// Qubit realization of a canonical point: `a = (0, θ)`, `b = (α00, α01)`.
pub fn build_realization(a: &AnglePoint) -> Result<QubitRealization, RealizationError> {
    let theta = a.theta().ok_or(RealizationError::NotCanonical)?;
    if a.degenerate_count(crate::DEFAULT_TOL) >= 2 {
        return Err(RealizationError::TooDegenerate);
    }
    Ok(QubitRealization {
        angles: *a,
        state: StateVector::phi_plus(),
        meas_angle_a: [0.0, theta],
        meas_angle_b: [a.get(0, 0), a.get(0, 1)],
        aux_a: None,
        aux_b: None,
    })
}

/// Realization on |Φ+⟩ with arbitrary xz-plane Bloch angles. No
/// self-testing requirement; the angle point is read off the correlators.
pub fn from_bloch_angles(a: [f64; 2], b: [f64; 2]) -> QubitRealization {
    let mut alpha = [[0.0; 2]; 2];
    for x in 0..2 {
        for y in 0..2 {
            alpha[x][y] = (a[x] - b[y]).cos().clamp(-1.0, 1.0).acos();
        }
    }
    QubitRealization {
        angles: AnglePoint::from_alpha(alpha).expect("acos lies in [0, pi]"),
        state: StateVector::phi_plus(),
        meas_angle_a: a,
        meas_angle_b: b,
        aux_a: None,
        aux_b: None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControlVariant {
    /// Both sides built directly from the four observables.
    Direct,
    /// `Z'_B = B0`, with the target state rotated on Bob's side by `α00`.
    Rotated,
}

/// Control operators as affine combinations of the observables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSet {
    pub controls: SwapControls,
    pub variant: ControlVariant,
    pub angles: AnglePoint,
}

fn checked_sin(v: f64, which: Denominator) -> Result<f64, RealizationError> {
    let s = v.sin();
    if s.abs() < SINGULAR_TOL {
        Err(RealizationError::SingularDenominator(which))
    } else {
        Ok(s)
    }
}

/// `Z'_A = A0`, `X'_A = (A1 − cos θ A0)/sin θ`, and on Bob's side either
///
/// * direct: `Z'_B = (sin α01 B0 − sin α00 B1)/sin(α01−α00)`,
///   `X'_B = (cos α00 B1 − cos α01 B0)/sin(α01−α00)`, or
/// * rotated: `Z'_B = B0`, `X'_B = (B1 − cos(α10+α11) B0)/sin(α10+α11)`.
pub fn control_operators(a: &AnglePoint, variant: ControlVariant) -> Result<ControlSet, RealizationError> {
    let theta = a.theta().ok_or(RealizationError::NotCanonical)?;
    let (a00, a01, a10, a11) = (a.get(0, 0), a.get(0, 1), a.get(1, 0), a.get(1, 1));
    let st = checked_sin(theta, Denominator::ThetaSum)?;
    let za = AffineOp::letter(Letter::A0);
    let xa = AffineOp::combination(&[(Letter::A1, 1.0 / st), (Letter::A0, -theta.cos() / st)]);
    let (zb, xb) = match variant {
        ControlVariant::Direct => {
            let sd = checked_sin(a01 - a00, Denominator::BobSpread)?;
            (
                AffineOp::combination(&[(Letter::B0, a01.sin() / sd), (Letter::B1, -a00.sin() / sd)]),
                AffineOp::combination(&[(Letter::B1, a00.cos() / sd), (Letter::B0, -a01.cos() / sd)]),
            )
        }
        ControlVariant::Rotated => {
            let phi = a10 + a11;
            let sr = checked_sin(phi, Denominator::RotatedBob)?;
            (
                AffineOp::letter(Letter::B0),
                AffineOp::combination(&[(Letter::B1, 1.0 / sr), (Letter::B0, -phi.cos() / sr)]),
            )
        }
    };
    Ok(ControlSet { controls: SwapControls { za, xa, zb, xb }, variant, angles: *a })
}

impl ControlSet {
    pub fn concretize(&self, r: &QubitRealization) -> Result<ControlMatrices, RealizationError> {
        Ok(ControlMatrices {
            za: r.affine_matrix(&self.controls.za)?,
            xa: r.affine_matrix(&self.controls.xa)?,
            zb: r.affine_matrix(&self.controls.zb)?,
            xb: r.affine_matrix(&self.controls.xb)?,
        })
    }

    /// Target state the swap should output for these controls.
    pub fn target(&self) -> StateVector {
        match self.variant {
            ControlVariant::Direct => StateVector::phi_plus(),
            ControlVariant::Rotated => simulator::bob_frame_target(self.angles.get(0, 0)),
        }
    }
}

/// Residual norms keyed by relation id, plus the derivation route used for
/// relations that have more than one.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ResidualReport {
    pub residuals: BTreeMap<String, f64>,
    pub routes: BTreeMap<String, String>,
}

impl ResidualReport {
    fn put(&mut self, id: &str, v: f64) {
        self.residuals.insert(id.to_owned(), v);
    }

    pub fn get(&self, id: &str) -> Option<f64> {
        self.residuals.get(id).copied()
    }

    pub fn max(&self) -> f64 {
        self.residuals.values().copied().fold(0.0, f64::max)
    }
}

struct Vectors<'a> {
    psi: &'a DVector<C64>,
}

impl Vectors<'_> {
    fn on_a(&self, op: &DenseOperator) -> DVector<C64> {
        op.matrix().kronecker(DenseOperator::identity(2).matrix()) * self.psi
    }

    fn on_b(&self, op: &DenseOperator) -> DVector<C64> {
        DenseOperator::identity(2).matrix().kronecker(op.matrix()) * self.psi
    }
}

fn scaled(v: &DVector<C64>, k: f64) -> DVector<C64> {
    v * C64::new(k, 0.0)
}

fn anti(x: &DenseOperator, z: &DenseOperator) -> DenseOperator {
    let m = x.matrix() * z.matrix() + z.matrix() * x.matrix();
    DenseOperator::new(m, vec![2]).expect("2x2")
}

fn gram(x: &DenseOperator) -> DenseOperator {
    DenseOperator::new(x.matrix().adjoint() * x.matrix(), vec![2]).expect("2x2")
}

/// Checks, as vector norms on `|ψ⟩`:
///
/// * the four swap conditions `Z'_Aψ = Z'_Bψ`, `X'_Aψ = X'_Bψ`,
///   `{X', Z'}ψ = 0` on each side (for the rotated variant Bob's controls
///   are first rotated back by `α00`, the local unitary that defines the
///   rotated target);
/// * the planar decompositions of `B0ψ` and `A1ψ`;
/// * both observable anticommutators, switching to the alternate route when
///   an angle in the primary one vanishes;
/// * `X'†X'ψ = ψ` and the same for the Bob controls;
/// * `⟨Z'_A Z'_B⟩ = ⟨X'_A X'_B⟩ = 1`.
pub fn verify_selftest_relations(
    r: &QubitRealization,
    c: &ControlSet,
) -> Result<ResidualReport, RealizationError> {
    let ang = r.angles();
    let (a00, a01, a10, a11) = (ang.get(0, 0), ang.get(0, 1), ang.get(1, 0), ang.get(1, 1));
    let vs = Vectors { psi: r.state().amplitudes() };
    let psi = vs.psi;
    let m = c.concretize(r)?;
    let (zb, xb) = match c.variant {
        ControlVariant::Direct => (m.zb.clone(), m.xb.clone()),
        ControlVariant::Rotated => {
            let back = DenseOperator::y_rotation(-a00);
            (m.zb.conjugated_by(&back)?, m.xb.conjugated_by(&back)?)
        }
    };
    let mut rep = ResidualReport::default();

    rep.put("swap.z_match", (vs.on_a(&m.za) - vs.on_b(&zb)).norm());
    rep.put("swap.x_match", (vs.on_a(&m.xa) - vs.on_b(&xb)).norm());
    rep.put("swap.anticomm_a", vs.on_a(&anti(&m.xa, &m.za)).norm());
    rep.put("swap.anticomm_b", vs.on_b(&anti(&xb, &zb)).norm());

    let obs = |l| r.observable(l);
    let (oa0, oa1, ob0, ob1) = (obs(Letter::A0)?, obs(Letter::A1)?, obs(Letter::B0)?, obs(Letter::B1)?);
    let (a0v, a1v, b0v, b1v) = (vs.on_a(&oa0), vs.on_a(&oa1), vs.on_b(&ob0), vs.on_b(&ob1));

    let s8 = (a00 + a10).sin();
    if s8.abs() >= SINGULAR_TOL {
        let rhs = (scaled(&a1v, a00.sin()) + scaled(&a0v, a10.sin())) / C64::new(s8, 0.0);
        rep.put("decomp.b0", (&b0v - rhs).norm());
    }
    let s9 = (a11 + a10).sin();
    if s9.abs() >= SINGULAR_TOL {
        let rhs = (scaled(&b1v, a10.sin()) + scaled(&b0v, a11.sin())) / C64::new(s9, 0.0);
        rep.put("decomp.a1", (&a1v - rhs).norm());
    }

    let tol = crate::DEFAULT_TOL;
    let degenerate = |v: f64| v.sin().abs() <= tol;
    let (rhs_a, route_a) = if !degenerate(a00) && !degenerate(a10) {
        (2.0 * (a00 + a10).cos(), "from B0^2: 2cos(alpha00+alpha10)")
    } else {
        (2.0 * (a01 - a11).cos(), "from B1^2: 2cos(alpha01-alpha11)")
    };
    let lhs = vs.on_a(&anti(&oa1, &oa0));
    rep.put("anticomm.a", (lhs - scaled(psi, rhs_a)).norm());
    rep.routes.insert("anticomm.a".into(), route_a.into());

    let (rhs_b, route_b) = if !degenerate(a10) && !degenerate(a11) {
        (2.0 * (a11 + a10).cos(), "from A1^2: 2cos(alpha10+alpha11)")
    } else {
        (2.0 * (a01 - a00).cos(), "from A0^2: 2cos(alpha01-alpha00)")
    };
    let lhs = vs.on_b(&anti(&ob1, &ob0));
    rep.put("anticomm.b", (lhs - scaled(psi, rhs_b)).norm());
    rep.routes.insert("anticomm.b".into(), route_b.into());

    rep.put("unitary.za", (vs.on_a(&gram(&m.za)) - psi).norm());
    rep.put("unitary.xa", (vs.on_a(&gram(&m.xa)) - psi).norm());
    rep.put("unitary.zb", (vs.on_b(&gram(&m.zb)) - psi).norm());
    rep.put("unitary.xb", (vs.on_b(&gram(&m.xb)) - psi).norm());

    let zz = vs.psi.dotc(&(m.za.matrix().kronecker(zb.matrix()) * psi)).re;
    let xx = vs.psi.dotc(&(m.xa.matrix().kronecker(xb.matrix()) * psi)).re;
    rep.put("corr.zz", (1.0 - zz).abs());
    rep.put("corr.xx", (1.0 - xx).abs());
    Ok(rep)
}
