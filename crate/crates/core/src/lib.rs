//! Device-independent certification of the two-qubit maximally entangled
//! state |Φ+⟩ = (|00⟩ + |11⟩)/√2 from two-party, two-setting, two-outcome
//! correlators.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`] classifies correlation points against the extremal
//!   boundary of the quantum set reachable with |Φ+⟩, handles relabelings
//!   and the degenerate cases.
//! * [`realization`] builds the explicit qubit realization of a canonical
//!   point, the control operators of the swap isometry, and checks every
//!   operator relation used to certify the state.
//! * [`simulator`] is a small dense engine: correlators, the swap isometry,
//!   the reduced ancilla state and its fidelity.
//! * [`algebra`] expands the swap fidelity symbolically into moments of
//!   canonical operator words.
//! * [`sdp`] assembles the moment-matrix relaxation and solves it with a
//!   primal-dual interior-point method, returning verified lower bounds.
//! * [`games`] builds the XOR game tangent to the quantum set at a
//!   self-testing point and evaluates its classical and quantum values.
//! * [`cli`] is the job runner behind the `selftest` binary.

pub mod algebra;
pub mod cli;
pub mod games;
pub mod geometry;
pub mod numparse;
pub mod realization;
pub mod sdp;
pub mod simulator;

pub use geometry::{AnglePoint, Classification, ConditionMatch, CorrelationPoint, Relabeling};
pub use realization::{ControlSet, ControlVariant, QubitRealization, ResidualReport};
pub use sdp::{CriterionConfig, FidelityBound, SolveStatus};

/// Default equality tolerance for analytically supplied points.
pub const DEFAULT_TOL: f64 = 1e-9;
