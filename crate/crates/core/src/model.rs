//! Domain types: the ambiguity rectangle, CRRA preferences and evaluation points.
//!
//! Every type here is validated at construction. Plain `*Input` mirrors exist
//! for deserialization; converting them through [`validate_spec`] (or the
//! `TryFrom` impls) is the only way to obtain the validated form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, IntervalField, Result, ValidationReport, Violation};

/// Smallest admissible |alpha - 1|; closer values are treated as log utility.
pub const LOG_UTILITY_GUARD: f64 = 4.0 * f64::EPSILON;

/// Unvalidated drift/volatility bounds for one risky asset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssetAmbiguityInput {
    pub mu_lo: f64,
    pub mu_hi: f64,
    pub sigma_lo: f64,
    pub sigma_hi: f64,
}

/// Drift interval `[mu_lo, mu_hi]` and volatility interval `[sigma_lo, sigma_hi]`
/// of one risky asset. Drift and volatility ambiguity are independent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AssetAmbiguityInput", into = "AssetAmbiguityInput")]
pub struct AssetAmbiguity {
    mu_lo: f64,
    mu_hi: f64,
    sigma_lo: f64,
    sigma_hi: f64,
}

impl AssetAmbiguity {
    pub fn new(mu_lo: f64, mu_hi: f64, sigma_lo: f64, sigma_hi: f64) -> Result<Self> {
        let input = AssetAmbiguityInput {
            mu_lo,
            mu_hi,
            sigma_lo,
            sigma_hi,
        };
        Ok(Self::try_from(input)?)
    }

    /// No ambiguity: a single drift and volatility.
    pub fn point(mu: f64, sigma: f64) -> Result<Self> {
        Self::new(mu, mu, sigma, sigma)
    }

    pub fn mu_lo(&self) -> f64 {
        self.mu_lo
    }

    pub fn mu_hi(&self) -> f64 {
        self.mu_hi
    }

    pub fn sigma_lo(&self) -> f64 {
        self.sigma_lo
    }

    pub fn sigma_hi(&self) -> f64 {
        self.sigma_hi
    }

    pub fn contains_drift(&self, mu: f64) -> bool {
        self.mu_lo <= mu && mu <= self.mu_hi
    }

    pub fn contains_volatility(&self, sigma: f64) -> bool {
        self.sigma_lo <= sigma && sigma <= self.sigma_hi
    }
}

fn check_asset(index: Option<usize>, a: &AssetAmbiguityInput, out: &mut Vec<Violation>) {
    let mut finite = true;
    for (name, value) in [
        ("mu_lo", a.mu_lo),
        ("mu_hi", a.mu_hi),
        ("sigma_lo", a.sigma_lo),
        ("sigma_hi", a.sigma_hi),
    ] {
        if !value.is_finite() {
            out.push(Violation::NonFinite { name, value });
            finite = false;
        }
    }
    if !finite {
        return;
    }
    if a.mu_lo > a.mu_hi {
        out.push(Violation::IntervalInverted {
            field: IntervalField::Mu,
            asset: index,
            lo: a.mu_lo,
            hi: a.mu_hi,
        });
    }
    if a.sigma_lo <= 0.0 {
        out.push(Violation::NonPositiveVolatility {
            asset: index.unwrap_or(0),
            sigma_lo: a.sigma_lo,
        });
    }
    if a.sigma_lo > a.sigma_hi {
        out.push(Violation::IntervalInverted {
            field: IntervalField::Sigma,
            asset: index,
            lo: a.sigma_lo,
            hi: a.sigma_hi,
        });
    }
}

impl TryFrom<AssetAmbiguityInput> for AssetAmbiguity {
    type Error = ValidationReport;

    fn try_from(a: AssetAmbiguityInput) -> std::result::Result<Self, Self::Error> {
        let mut violations = Vec::new();
        check_asset(None, &a, &mut violations);
        if !violations.is_empty() {
            return Err(ValidationReport(violations));
        }
        Ok(Self {
            mu_lo: a.mu_lo,
            mu_hi: a.mu_hi,
            sigma_lo: a.sigma_lo,
            sigma_hi: a.sigma_hi,
        })
    }
}

impl From<AssetAmbiguity> for AssetAmbiguityInput {
    fn from(a: AssetAmbiguity) -> Self {
        Self {
            mu_lo: a.mu_lo,
            mu_hi: a.mu_hi,
            sigma_lo: a.sigma_lo,
            sigma_hi: a.sigma_hi,
        }
    }
}

/// Unvalidated ambiguity specification, as read from a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecInput {
    pub assets: Vec<AssetAmbiguityInput>,
    pub rate_lo: f64,
    pub rate_hi: f64,
}

/// The parameter rectangle: per-asset drift/volatility intervals and an
/// interest-rate interval. A fixed rate is the degenerate `rate_lo == rate_hi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecInput", into = "SpecInput")]
pub struct AmbiguitySpec {
    assets: Vec<AssetAmbiguity>,
    rate_lo: f64,
    rate_hi: f64,
}

/// Checks every invariant of `input` and returns the validated spec, or a
/// report listing all violations (not just the first).
pub fn validate_spec(input: &SpecInput) -> std::result::Result<AmbiguitySpec, ValidationReport> {
    let mut violations = Vec::new();
    if input.assets.is_empty() {
        violations.push(Violation::EmptyAssets);
    }
    for (i, a) in input.assets.iter().enumerate() {
        check_asset(Some(i), a, &mut violations);
    }
    let mut rates_finite = true;
    for (name, value) in [("rate_lo", input.rate_lo), ("rate_hi", input.rate_hi)] {
        if !value.is_finite() {
            violations.push(Violation::NonFinite { name, value });
            rates_finite = false;
        }
    }
    if rates_finite && input.rate_lo > input.rate_hi {
        violations.push(Violation::IntervalInverted {
            field: IntervalField::Rate,
            asset: None,
            lo: input.rate_lo,
            hi: input.rate_hi,
        });
    }
    if !violations.is_empty() {
        return Err(ValidationReport(violations));
    }
    Ok(AmbiguitySpec {
        assets: input
            .assets
            .iter()
            .map(|a| AssetAmbiguity {
                mu_lo: a.mu_lo,
                mu_hi: a.mu_hi,
                sigma_lo: a.sigma_lo,
                sigma_hi: a.sigma_hi,
            })
            .collect(),
        rate_lo: input.rate_lo,
        rate_hi: input.rate_hi,
    })
}

impl TryFrom<SpecInput> for AmbiguitySpec {
    type Error = ValidationReport;

    fn try_from(input: SpecInput) -> std::result::Result<Self, Self::Error> {
        validate_spec(&input)
    }
}

impl From<AmbiguitySpec> for SpecInput {
    fn from(spec: AmbiguitySpec) -> Self {
        spec.to_input()
    }
}

impl AmbiguitySpec {
    pub fn new(assets: Vec<AssetAmbiguity>, rate_lo: f64, rate_hi: f64) -> Result<Self> {
        let input = SpecInput {
            assets: assets.into_iter().map(Into::into).collect(),
            rate_lo,
            rate_hi,
        };
        Ok(validate_spec(&input)?)
    }

    /// Single asset with a known interest rate.
    pub fn fixed_rate(asset: AssetAmbiguity, r: f64) -> Result<Self> {
        Self::new(vec![asset], r, r)
    }

    pub fn to_input(&self) -> SpecInput {
        SpecInput {
            assets: self.assets.iter().map(|&a| a.into()).collect(),
            rate_lo: self.rate_lo,
            rate_hi: self.rate_hi,
        }
    }

    pub fn assets(&self) -> &[AssetAmbiguity] {
        &self.assets
    }

    pub fn rate_lo(&self) -> f64 {
        self.rate_lo
    }

    pub fn rate_hi(&self) -> f64 {
        self.rate_hi
    }

    pub fn is_fixed_rate(&self) -> bool {
        self.rate_lo == self.rate_hi
    }

    /// The known rate, if the rate interval is degenerate.
    pub fn known_rate(&self) -> Option<f64> {
        self.is_fixed_rate().then_some(self.rate_lo)
    }

    /// The only asset, or an error naming the operation that needs d = 1.
    pub fn single_asset(&self, what: &'static str) -> Result<&AssetAmbiguity> {
        match self.assets.as_slice() {
            [a] => Ok(a),
            other => Err(Error::UnsupportedAssetCount {
                what,
                got: other.len(),
            }),
        }
    }

    pub fn contains_rate(&self, r: f64) -> bool {
        self.rate_lo <= r && r <= self.rate_hi
    }
}

/// Unvalidated CRRA preferences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrraInput {
    pub alpha: f64,
    pub bequest_k: f64,
    pub horizon_t: f64,
}

/// Power utility `u(c) = c^(1-alpha)/(1-alpha)`, bequest `K x^(1-alpha)/(1-alpha)`,
/// horizon `T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CrraInput", into = "CrraInput")]
pub struct CrraParams {
    alpha: f64,
    bequest_k: f64,
    horizon_t: f64,
}

impl TryFrom<CrraInput> for CrraParams {
    type Error = ValidationReport;

    fn try_from(c: CrraInput) -> std::result::Result<Self, Self::Error> {
        let mut violations = Vec::new();
        for (name, value) in [
            ("alpha", c.alpha),
            ("bequest_k", c.bequest_k),
            ("horizon_t", c.horizon_t),
        ] {
            if !value.is_finite() {
                violations.push(Violation::NonFinite { name, value });
            }
        }
        if violations.is_empty() {
            if c.alpha <= 0.0 {
                violations.push(Violation::NonPositiveRiskAversion(c.alpha));
            } else if (c.alpha - 1.0).abs() <= LOG_UTILITY_GUARD {
                violations.push(Violation::LogUtility);
            }
            if c.bequest_k <= 0.0 {
                violations.push(Violation::NonPositiveBequest(c.bequest_k));
            }
            if c.horizon_t <= 0.0 {
                violations.push(Violation::NonPositiveHorizon(c.horizon_t));
            }
        }
        if !violations.is_empty() {
            return Err(ValidationReport(violations));
        }
        Ok(Self {
            alpha: c.alpha,
            bequest_k: c.bequest_k,
            horizon_t: c.horizon_t,
        })
    }
}

impl From<CrraParams> for CrraInput {
    fn from(c: CrraParams) -> Self {
        Self {
            alpha: c.alpha,
            bequest_k: c.bequest_k,
            horizon_t: c.horizon_t,
        }
    }
}

impl CrraParams {
    pub fn new(alpha: f64, bequest_k: f64, horizon_t: f64) -> Result<Self> {
        Ok(Self::try_from(CrraInput {
            alpha,
            bequest_k,
            horizon_t,
        })?)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn bequest_k(&self) -> f64 {
        self.bequest_k
    }

    pub fn horizon_t(&self) -> f64 {
        self.horizon_t
    }

    /// Running utility of consumption rate `c`.
    pub fn utility(&self, c: f64) -> f64 {
        c.powf(1.0 - self.alpha) / (1.0 - self.alpha)
    }

    /// Terminal (bequest) utility of wealth `x`.
    pub fn bequest(&self, x: f64) -> f64 {
        self.bequest_k * x.powf(1.0 - self.alpha) / (1.0 - self.alpha)
    }

    /// Inverse of marginal utility: the consumption rate with `u'(c) = p`.
    pub fn inverse_marginal(&self, p: f64) -> f64 {
        p.powf(-1.0 / self.alpha)
    }

    /// `sup_c { u(c) - c p }` for `p > 0`, attained at `c = p^(-1/alpha)`.
    pub fn consumption_hamiltonian(&self, p: f64) -> f64 {
        self.alpha / (1.0 - self.alpha) * p.powf(1.0 - 1.0 / self.alpha)
    }
}

/// A `(t, x)` pair with `0 <= t <= T` and `x > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarketPoint {
    time: f64,
    wealth: f64,
}

impl MarketPoint {
    pub fn new(time: f64, wealth: f64, crra: &CrraParams) -> Result<Self> {
        let mut violations = Vec::new();
        if !(0.0..=crra.horizon_t()).contains(&time) {
            violations.push(Violation::TimeOutOfRange {
                time,
                horizon: crra.horizon_t(),
            });
        }
        if !(wealth > 0.0 && wealth.is_finite()) {
            violations.push(Violation::NonPositiveWealth(wealth));
        }
        if !violations.is_empty() {
            return Err(ValidationReport(violations).into());
        }
        Ok(Self { time, wealth })
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn wealth(&self) -> f64 {
        self.wealth
    }
}
