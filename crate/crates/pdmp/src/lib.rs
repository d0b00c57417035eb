//! Simulation and nonparametric rate estimation for piecewise-deterministic
//! processes whose jumps land on a finite grid.
//!
//! The process moves along a deterministic flow, jumps spontaneously with a
//! state-dependent rate or deterministically from the domain boundary, and
//! relocates according to a kernel supported on finitely many points. From a
//! single observed jump chain, this crate estimates the jump rate at every
//! grid state by expanding a per-destination transformed hazard in an
//! orthonormal basis of L2([0, 1]):
//!
//! 1. simulate or load a trajectory ([`PdmpModel::simulate`], [`Trajectory`]);
//! 2. tally per-pair waiting times with boundary censoring ([`counting`]);
//! 3. form cumulative-hazard and inverse-survival step estimates ([`stepfn`]);
//! 4. project onto a basis and assemble the plug-in rate ([`estimators`]);
//! 5. test single coefficients against zero ([`inference`]).
//!
//! The [`oracle`] module recomputes every quantity by quadrature directly
//! from the model definition, independently of the estimators, and the
//! [`experiment`] module runs replicated estimation studies on the bundled
//! congestion-window model ([`tcp`]).

pub mod basis;
pub mod counting;
pub mod error;
pub mod estimators;
pub mod experiment;
pub mod grid;
pub mod inference;
pub mod model;
pub mod oracle;
pub mod quad;
mod simulate;
pub mod special;
pub mod stats;
pub mod stepfn;
pub mod tcp;
pub mod trajectory;

pub use basis::{
    cubic_spline_family, default_spline_family, default_truncation, fourier_family,
    legendre_family, orthonormalize, parse_basis, zero_kernel_sup, BasisFamily, BasisFn,
    OrthonormalBasis, RawBasis,
};
pub use counting::{build_counting, counting_all, CountingData};
pub use error::{Error, Result};
pub use estimators::{
    assemble_jump_rate, coefficient_variance, estimate_all, estimate_transition,
    hazard_coefficient, EstimationResult, TransitionEstimate,
};
pub use experiment::{
    run_replicates, write_estimate_file, ExperimentConfig, ExperimentOutcome, SummaryRow,
};
pub use grid::StateGrid;
pub use inference::{chi2_decision, test_statistic, TestOutcome};
pub use model::{PdmpModel, PdmpModelBuilder};
pub use oracle::OracleConfig;
pub use stepfn::{inverse_survival, nelson_aalen, StepFunction};
pub use tcp::{tcp_grid, tcp_model, Scenario};
pub use trajectory::{fmt17, JumpRecord, Trajectory};
