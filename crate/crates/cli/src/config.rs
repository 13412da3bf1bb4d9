//! TOML run configuration.
//!
//! ```toml
//! x0 = 1.0
//! rate = 0.01                      # or { lo = 0.01, hi = 0.05 }
//!
//! [crra]
//! alpha = 2.0
//! bequest_k = 1.0
//! horizon_t = 10.0
//!
//! [[assets]]
//! mu_lo = 0.05
//! mu_hi = 0.09
//! sigma_lo = 0.1
//! sigma_hi = 0.2
//!
//! [grid]                           # verify
//! nx = 400
//! nt = 2000
//! boundary = "homothetic"          # or "closed-form"
//! tolerance = 1e-3
//!
//! [mc]                             # minimax
//! n_paths = 20000
//! n_steps = 100
//! seed = 7
//! policies = { lo = -1.0, hi = 3.0, n = 41 }   # or a list of weights
//! priors = { mu = 5, sigma = 5, rate = 1 }
//!
//! [sweep]                          # regions
//! axis = "mu_lo"                   # or "rate_lo"
//! from = -0.04
//! to = 0.1
//! n = 141
//!
//! [output]
//! format = "json"                  # json, csv or svg
//! path = "out.json"
//! ```

use std::path::{Path, PathBuf};

use ambimerton::model::{validate_spec, AssetAmbiguityInput, CrraInput, SpecInput};
use ambimerton::montecarlo::PriorGridResolution;
use ambimerton::pde::Boundary;
use ambimerton::{AmbiguitySpec, CrraParams, ValidationReport, Violation};
use serde::Deserialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum RateInput {
    Fixed(f64),
    Interval { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryInput {
    Homothetic,
    ClosedForm,
}

impl From<BoundaryInput> for Boundary {
    fn from(b: BoundaryInput) -> Self {
        match b {
            BoundaryInput::Homothetic => Boundary::Homothetic,
            BoundaryInput::ClosedForm => Boundary::ClosedForm,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub nx: usize,
    pub nt: usize,
    #[serde(default = "default_boundary")]
    pub boundary: BoundaryInput,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Time rows between CSV records; defaults to about 100 records.
    pub csv_stride: Option<usize>,
}

fn default_boundary() -> BoundaryInput {
    BoundaryInput::Homothetic
}

fn default_tolerance() -> f64 {
    1e-3
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PolicyGridInput {
    List(Vec<f64>),
    Range { lo: f64, hi: f64, n: usize },
}

impl PolicyGridInput {
    pub fn weights(&self) -> Result<Vec<f64>> {
        let w = match self {
            PolicyGridInput::List(v) => v.clone(),
            PolicyGridInput::Range { lo, hi, n } => linspace(*lo, *hi, *n),
        };
        if w.is_empty() || w.iter().any(|p| !p.is_finite()) {
            return Err(CliError::Config(
                "[mc] policies must be a non-empty list of finite weights".into(),
            ));
        }
        Ok(w)
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorsInput {
    pub mu: usize,
    pub sigma: usize,
    #[serde(default = "one")]
    pub rate: usize,
}

fn one() -> usize {
    1
}

impl From<PriorsInput> for PriorGridResolution {
    fn from(p: PriorsInput) -> Self {
        PriorGridResolution {
            mu: p.mu,
            sigma: p.sigma,
            rate: p.rate,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    pub n_paths: usize,
    pub n_steps: usize,
    #[serde(default)]
    pub seed: u64,
    pub budget: Option<u64>,
    pub policies: PolicyGridInput,
    pub priors: PriorsInput,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    MuLo,
    RateLo,
}

impl SweepAxis {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepAxis::MuLo => "mu_lo",
            SweepAxis::RateLo => "rate_lo",
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: SweepAxis,
    pub from: f64,
    pub to: f64,
    #[serde(default = "default_sweep_n")]
    pub n: usize,
}

fn default_sweep_n() -> usize {
    101
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Svg,
}

impl Format {
    pub fn as_str(&self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Svg => "svg",
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub format: Option<Format>,
    pub path: Option<PathBuf>,
}

/// The file as written.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub x0: f64,
    pub rate: RateInput,
    pub crra: CrraInput,
    pub assets: Vec<AssetAmbiguityInput>,
    pub grid: Option<GridSection>,
    pub mc: Option<McSection>,
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub output: OutputSection,
}

/// Validated configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub spec: AmbiguitySpec,
    pub crra: CrraParams,
    pub x0: f64,
    pub grid: Option<GridSection>,
    pub mc: Option<McSection>,
    pub sweep: Option<SweepSection>,
    pub output: OutputSection,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text)?;
        Self::validate(raw)
    }

    /// Collects every spec, preference and wealth violation into one report.
    fn validate(raw: RawConfig) -> Result<Self> {
        let (rate_lo, rate_hi) = match raw.rate {
            RateInput::Fixed(r) => (r, r),
            RateInput::Interval { lo, hi } => (lo, hi),
        };
        let spec_input = SpecInput {
            assets: raw.assets,
            rate_lo,
            rate_hi,
        };
        let mut violations = Vec::new();
        let spec = validate_spec(&spec_input)
            .map_err(|r| violations.extend(r.0))
            .ok();
        let crra = CrraParams::try_from(raw.crra)
            .map_err(|r| violations.extend(r.0))
            .ok();
        if !(raw.x0 > 0.0 && raw.x0.is_finite()) {
            violations.push(Violation::NonPositiveWealth(raw.x0));
        }
        match (spec, crra) {
            (Some(spec), Some(crra)) if violations.is_empty() => Ok(Self {
                spec,
                crra,
                x0: raw.x0,
                grid: raw.grid,
                mc: raw.mc,
                sweep: raw.sweep,
                output: raw.output,
            }),
            _ => Err(ambimerton::Error::from(ValidationReport(violations)).into()),
        }
    }

    pub fn grid(&self, command: &'static str) -> Result<&GridSection> {
        self.grid.as_ref().ok_or(CliError::MissingSection {
            section: "grid",
            command,
        })
    }

    pub fn mc(&self, command: &'static str) -> Result<&McSection> {
        self.mc.as_ref().ok_or(CliError::MissingSection {
            section: "mc",
            command,
        })
    }

    pub fn sweep(&self, command: &'static str) -> Result<&SweepSection> {
        self.sweep.as_ref().ok_or(CliError::MissingSection {
            section: "sweep",
            command,
        })
    }
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let mut v: Vec<f64> = (0..n)
                .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
                .collect();
            v[n - 1] = hi;
            v
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
x0 = 1.0
rate = 0.01
[crra]
alpha = 2.0
bequest_k = 1.0
horizon_t = 10.0
[[assets]]
mu_lo = 0.05
mu_hi = 0.09
sigma_lo = 0.1
sigma_hi = 0.2
"#;

    #[test]
    fn parses_fixed_and_interval_rates() {
        let c = RunConfig::parse(BASE).unwrap();
        assert!(c.spec.is_fixed_rate());
        let c = RunConfig::parse(&BASE.replace("rate = 0.01", "rate = { lo = 0.01, hi = 0.05 }"))
            .unwrap();
        assert_eq!((c.spec.rate_lo(), c.spec.rate_hi()), (0.01, 0.05));
    }

    #[test]
    fn reports_all_violations() {
        let bad = BASE
            .replace("x0 = 1.0", "x0 = -1.0")
            .replace("alpha = 2.0", "alpha = 1.0")
            .replace("mu_hi = 0.09", "mu_hi = 0.01");
        let err = RunConfig::parse(&bad).unwrap_err();
        match err {
            CliError::Core(ambimerton::Error::Invalid(r)) => assert_eq!(r.0.len(), 3, "{r}"),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(
            RunConfig::parse(&format!("{BASE}\n[grid]\nnx = 10\nnt = 10\nnz = 3\n")),
            Err(CliError::Parse(_))
        ));
    }

    #[test]
    fn linspace_endpoints() {
        let v = linspace(-1.0, 3.0, 41);
        assert_eq!((v[0], v[40]), (-1.0, 3.0));
        assert!((v[15] - 0.5).abs() < 1e-15);
    }
}
