//! Error types shared across the crate.

use std::fmt;

use thiserror::Error;

/// Which parameter an inverted interval belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalField {
    Mu,
    Sigma,
    Rate,
}

impl fmt::Display for IntervalField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IntervalField::Mu => "mu",
            IntervalField::Sigma => "sigma",
            IntervalField::Rate => "rate",
        })
    }
}

/// A single violated invariant of a model input.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Violation {
    #[error("asset list is empty")]
    EmptyAssets,
    #[error("{field} interval inverted{}: lower {lo} > upper {hi}", asset_suffix(*.asset))]
    IntervalInverted {
        field: IntervalField,
        asset: Option<usize>,
        lo: f64,
        hi: f64,
    },
    #[error("volatility lower bound must be > 0 for asset {asset}, got {sigma_lo}")]
    NonPositiveVolatility { asset: usize, sigma_lo: f64 },
    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },
    #[error("risk aversion alpha must be > 0, got {0}")]
    NonPositiveRiskAversion(f64),
    #[error("risk aversion alpha = 1 (log utility) is not supported")]
    LogUtility,
    #[error("bequest weight K must be > 0, got {0}")]
    NonPositiveBequest(f64),
    #[error("horizon T must be > 0, got {0}")]
    NonPositiveHorizon(f64),
    #[error("time {time} outside [0, {horizon}]")]
    TimeOutOfRange { time: f64, horizon: f64 },
    #[error("wealth must be > 0, got {0}")]
    NonPositiveWealth(f64),
}

fn asset_suffix(asset: Option<usize>) -> String {
    asset.map(|i| format!(" for asset {i}")).unwrap_or_default()
}

/// Every invariant violated by one input, in the order they were checked.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport(pub Vec<Violation>);

impl ValidationReport {
    pub fn violations(&self) -> &[Violation] {
        &self.0
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationReport {}

/// Crate-wide error.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(#[from] ValidationReport),

    #[error("{what} requires a single risky asset, got {got}")]
    UnsupportedAssetCount { what: &'static str, got: usize },

    #[error("{0} requires a fixed interest rate (rate_lo == rate_hi)")]
    RateNotFixed(&'static str),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid Hamiltonian coefficients a = {a}, b = {b} (need a < 0, b > 0)")]
    InvalidCoeffs { a: f64, b: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error(
        "explicit scheme unstable: dt = {dt:.3e} exceeds dx^2 / D = {limit:.3e} \
         (diffusion coefficient D = {diffusion:.3e}); increase nt or decrease nx"
    )]
    StabilityViolation { dt: f64, limit: f64, diffusion: f64 },

    #[error(
        "value function lost concavity at time step {step}, node {node} (discrete phi_xx = {phi_xx:.3e}); \
         grid too coarse, refine nx/nt"
    )]
    ConcavityLoss { step: usize, node: usize, phi_xx: f64 },

    #[error(
        "value function lost monotonicity at time step {step}, node {node} (discrete phi_x = {phi_x:.3e}); \
         grid too coarse, refine nx/nt"
    )]
    MonotonicityLoss { step: usize, node: usize, phi_x: f64 },

    #[error("simulation budget exceeded: {requested} path-steps > {budget}")]
    BudgetExceeded { requested: u64, budget: u64 },

    #[error("time step too coarse: |pi| sigma sqrt(dt) = {value:.3} must stay below 0.5")]
    StepTooCoarse { value: f64 },

    #[error("non-finite wealth on path {path} at step {step}; reduce dt")]
    NonFiniteState { path: usize, step: usize },

    #[error("{absorbed} of {n_paths} paths hit zero wealth (limit 0.1%)")]
    ExcessiveAbsorption { absorbed: usize, n_paths: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
