//! Consumption and portfolio choice for an ambiguity-averse CRRA investor.
//!
//! The investor knows only intervals for drifts, volatilities and possibly
//! the interest rate, and optimizes against the worst parameter path. The
//! crate provides the worst-case parameters and regimes, the explicit CRRA
//! solution, the pointwise Hamiltonian maximizers, finite-difference solvers
//! used to check the closed form, and a Monte Carlo minimax experiment.

pub mod closed_form;
pub mod error;
pub mod hjb;
pub mod model;
pub mod montecarlo;
pub mod pde;
pub mod worst_case;

pub use closed_form::{solve, CrraSolution, SolutionRegime};
pub use error::{Error, Result, ValidationReport, Violation};
pub use model::{AmbiguitySpec, AssetAmbiguity, CrraParams, MarketPoint};
