//! Explicit CRRA solution `phi(t, x) = f(t) x^(1-alpha) / (1-alpha)`.
//!
//! Substituting the power form into the reduced HJB equation leaves the ODE
//!
//! ```text
//! alpha f^(1 - 1/alpha) + beta f + f' = 0,   f(T) = K
//! ```
//!
//! whose solution is `f(t) = g(t)^alpha` with
//! `g(t) = K^(1/alpha) e^(beta tau/alpha) + (alpha/beta)(e^(beta tau/alpha) - 1)`,
//! `tau = T - t`. Optimal consumption is `x / g(t)` and the portfolio weights
//! are the constant worst-case Merton weights.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{AmbiguitySpec, AssetAmbiguity, CrraParams, MarketPoint};
use crate::worst_case::{
    classify_drift_regime, classify_rate_regime, optimal_portfolio_fixed_rate, worst_case_drift,
    DriftRegime, RateRegime, RateRegimeLabel,
};

/// Below this `|beta tau / alpha|` the bracket uses its Taylor series.
pub const BETA_SERIES_THRESHOLD: f64 = 1e-6;

/// Regime(s) behind a closed-form solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SolutionRegime {
    Drift(Vec<DriftRegime>),
    Rate(RateRegime),
}

impl SolutionRegime {
    pub fn labels(&self) -> Vec<&'static str> {
        match self {
            SolutionRegime::Drift(regimes) => regimes.iter().map(DriftRegime::as_str).collect(),
            SolutionRegime::Rate(r) => vec![r.label.as_str()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrraSolution {
    pub beta: f64,
    pub pi_star: Vec<f64>,
    pub regime: SolutionRegime,
    pub crra: CrraParams,
}

/// `beta = (1 - alpha) [r + sum_i (mu*_i - r)^2 / (2 alpha sigma_hi_i^2)]`, with
/// assets inside their band contributing nothing.
pub fn beta_fixed_rate(spec: &AmbiguitySpec, crra: &CrraParams) -> Result<f64> {
    let r = spec
        .known_rate()
        .ok_or(Error::RateNotFixed("beta_fixed_rate"))?;
    let alpha = crra.alpha();
    let premium: f64 = spec
        .assets()
        .iter()
        .map(|a| {
            let excess = worst_case_drift(a, r) - r;
            excess * excess / (2.0 * alpha * a.sigma_hi() * a.sigma_hi())
        })
        .sum();
    Ok((r + premium) * (1.0 - alpha))
}

/// Growth rate under rate ambiguity for a given regime.
pub fn beta_rate_ambiguity(
    regime: RateRegimeLabel,
    asset: &AssetAmbiguity,
    rate_lo: f64,
    rate_hi: f64,
    crra: &CrraParams,
) -> f64 {
    let alpha = crra.alpha();
    let var = asset.sigma_hi() * asset.sigma_hi();
    let merton = |rate: f64, mu: f64| rate + (mu - rate) * (mu - rate) / (2.0 * alpha * var);
    let inner = match regime {
        RateRegimeLabel::LongAndSave => merton(rate_lo, asset.mu_lo()),
        RateRegimeLabel::LongAndBorrow => merton(rate_hi, asset.mu_lo()),
        RateRegimeLabel::ShortAndSave => merton(rate_lo, asset.mu_hi()),
        RateRegimeLabel::NonParticipation => rate_lo,
        // pi = 1: no bond position, so the wealth drift is the worst asset drift
        RateRegimeLabel::AllInAsset => asset.mu_lo() - 0.5 * alpha * var,
    };
    inner * (1.0 - alpha)
}

/// `g(t) = f(t)^(1/alpha)`, the inverse consumption-to-wealth ratio.
fn bracket(t: f64, beta: f64, crra: &CrraParams) -> f64 {
    let alpha = crra.alpha();
    let tau = crra.horizon_t() - t;
    let z = beta * tau / alpha;
    // tau (e^z - 1) / z
    let annuity = if z.abs() < BETA_SERIES_THRESHOLD {
        tau * (1.0 + z / 2.0 + z * z / 6.0)
    } else {
        alpha / beta * z.exp_m1()
    };
    crra.bequest_k().powf(1.0 / alpha) * z.exp() + annuity
}

/// `f(t)`; the bracket is positive for every finite `beta`, the check guards
/// against overflow.
pub fn f_factor(t: f64, beta: f64, crra: &CrraParams) -> Result<f64> {
    if !(0.0..=crra.horizon_t()).contains(&t) {
        return Err(Error::Domain(format!(
            "t = {t} outside [0, {}]",
            crra.horizon_t()
        )));
    }
    let g = bracket(t, beta, crra);
    if !(g > 0.0 && g.is_finite()) {
        return Err(Error::Domain(format!("f bracket is {g} at t = {t}")));
    }
    Ok(g.powf(crra.alpha()))
}

impl CrraSolution {
    pub fn f(&self, t: f64) -> Result<f64> {
        f_factor(t, self.beta, &self.crra)
    }

    /// Consumption-to-wealth ratio `f(t)^(-1/alpha)`.
    pub fn consumption_fraction(&self, t: f64) -> Result<f64> {
        Ok(self.f(t)?.powf(-1.0 / self.crra.alpha()))
    }

    pub fn value_at(&self, t: f64, x: f64) -> Result<f64> {
        let one_minus = 1.0 - self.crra.alpha();
        Ok(self.f(t)? * x.powf(one_minus) / one_minus)
    }
}

/// Optimal consumption rate `x / g(t)`.
pub fn optimal_consumption(point: &MarketPoint, solution: &CrraSolution) -> Result<f64> {
    Ok(solution.consumption_fraction(point.time())? * point.wealth())
}

/// `phi(t, x) = f(t) x^(1-alpha) / (1-alpha)`.
pub fn value_function(point: &MarketPoint, solution: &CrraSolution) -> Result<f64> {
    solution.value_at(point.time(), point.wealth())
}

/// Closed form for a known interest rate (any number of assets).
pub fn solve_fixed_rate(spec: &AmbiguitySpec, crra: &CrraParams) -> Result<CrraSolution> {
    let beta = beta_fixed_rate(spec, crra)?;
    let r = spec.rate_lo();
    Ok(CrraSolution {
        beta,
        pi_star: spec
            .assets()
            .iter()
            .map(|a| optimal_portfolio_fixed_rate(a, r, crra))
            .collect(),
        regime: SolutionRegime::Drift(
            spec.assets()
                .iter()
                .map(|a| classify_drift_regime(a, r))
                .collect(),
        ),
        crra: *crra,
    })
}

/// Closed form under rate ambiguity (single asset).
pub fn solve_rate_ambiguity(spec: &AmbiguitySpec, crra: &CrraParams) -> Result<CrraSolution> {
    let asset = spec.single_asset("solve_rate_ambiguity")?;
    let regime = classify_rate_regime(spec, crra.alpha())?;
    let beta = beta_rate_ambiguity(regime.label, asset, spec.rate_lo(), spec.rate_hi(), crra);
    Ok(CrraSolution {
        beta,
        pi_star: vec![regime.pi_star],
        regime: SolutionRegime::Rate(regime),
        crra: *crra,
    })
}

/// Fixed-rate closed form when the rate interval is degenerate, rate-ambiguity
/// closed form otherwise.
pub fn solve(spec: &AmbiguitySpec, crra: &CrraParams) -> Result<CrraSolution> {
    if spec.is_fixed_rate() {
        solve_fixed_rate(spec, crra)
    } else {
        solve_rate_ambiguity(spec, crra)
    }
}
