//! Robust fidelity bounds from a moment-matrix relaxation.
//!
//! Given a canonical self-testing point and an imperfection `ε`, the
//! relaxation minimises the swap fidelity over all moment assignments whose
//! observed correlators lie within `ε` of the ideal ones. Any solution of the
//! dual gives a lower bound on the fidelity that every quantum
//! implementation with those statistics must achieve.
//!
//! * [`CriterionConfig`] picks the controls and the auxiliary observables.
//! * [`build_moment_structure`] lays out the moment and localizing matrices.
//! * [`assemble_sdp`] turns them into an [`SdpInstance`].
//! * [`solve_lower_bound`] solves it and certifies the bound.

mod bound;
mod config;
pub mod solver;
mod structure;

use thiserror::Error;

use crate::algebra::AlgebraError;

pub use bound::{
    certify, fmt_sig12, solve_lower_bound, solve_lower_bound_with, sweep_curve, write_curve_csv, DualCertificate, FidelityBound,
    SolveStatus, SweepRow, CERTIFICATE_TOL, CSV_HEADER,
};
pub use config::{fig5_presets, AuxChoice, CriterionConfig};
pub use solver::{AffineForm, InteriorPoint, LmiProblem, Multipliers, PsdBlock, RawSolution, SdpBackend};
pub use structure::{assemble_sdp, build_moment_structure, LocalizerLayout, MomentStructure, PointCheck, SdpInstance};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SdpError {
    #[error("invalid criterion: {0}")]
    InvalidConfig(String),
    #[error("moment {0} is not housed in the moment structure")]
    UnhousedMoment(String),
    #[error("epsilon grid is empty")]
    EmptyGrid,
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}
