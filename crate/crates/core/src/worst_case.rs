//! Worst-case prior selection and regime classification.
//!
//! With a known rate the investor acts as a Merton investor who believes the
//! highest volatility and the drift closest to `r` from inside the interval
//! (three drift regimes). Under rate ambiguity with one risky asset the choice
//! runs through the candidate weights `pi1 >= pi2 >= pi3` (five regimes).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{AmbiguitySpec, AssetAmbiguity, CrraParams};

/// Position taken in one asset when the interest rate is known.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum DriftRegime {
    /// `mu_lo > r`: long, priced at the lowest drift.
    LongLowDrift,
    /// `mu_hi < r`: short, priced at the highest drift.
    Short,
    /// `mu_lo <= r <= mu_hi`: stay out of the asset.
    NonParticipation,
}

impl DriftRegime {
    pub fn as_str(&self) -> &'static str {
        match self {
            DriftRegime::LongLowDrift => "LongLowDrift",
            DriftRegime::Short => "Short",
            DriftRegime::NonParticipation => "NonParticipation",
        }
    }
}

/// Drift the investor behaves as if it were true: `mu_lo` above the rate,
/// `mu_hi` below it, and `r` itself when the rate lies inside the interval.
pub fn worst_case_drift(asset: &AssetAmbiguity, r: f64) -> f64 {
    if asset.mu_lo() > r {
        asset.mu_lo()
    } else if asset.mu_hi() < r {
        asset.mu_hi()
    } else {
        r
    }
}

pub fn classify_drift_regime(asset: &AssetAmbiguity, r: f64) -> DriftRegime {
    if asset.mu_lo() > r {
        DriftRegime::LongLowDrift
    } else if asset.mu_hi() < r {
        DriftRegime::Short
    } else {
        DriftRegime::NonParticipation
    }
}

/// Robust Merton weight `(mu* - r) / (alpha sigma_hi^2)`; no leverage cap.
pub fn optimal_portfolio_fixed_rate(asset: &AssetAmbiguity, r: f64, crra: &CrraParams) -> f64 {
    match classify_drift_regime(asset, r) {
        DriftRegime::NonParticipation => 0.0,
        _ => {
            (worst_case_drift(asset, r) - r) / (crra.alpha() * asset.sigma_hi() * asset.sigma_hi())
        }
    }
}

/// Parameters of the worst-case prior.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorstCaseParams {
    pub mu_star: Vec<f64>,
    pub sigma_star: Vec<f64>,
    /// Worst rate. `None` when the policy holds no bonds (all wealth in the
    /// asset), where every rate in the interval is equally bad.
    pub r_star: Option<f64>,
}

/// Worst-case prior for a fixed-rate spec.
pub fn worst_case_params(spec: &AmbiguitySpec) -> Result<WorstCaseParams> {
    let r = spec
        .known_rate()
        .ok_or(Error::RateNotFixed("worst_case_params"))?;
    Ok(WorstCaseParams {
        mu_star: spec
            .assets()
            .iter()
            .map(|a| worst_case_drift(a, r))
            .collect(),
        sigma_star: spec.assets().iter().map(|a| a.sigma_hi()).collect(),
        r_star: Some(r),
    })
}

/// The three candidate weights under rate ambiguity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatePortfolios {
    /// `(mu_hi - rate_lo) / (alpha sigma_hi^2)`
    pub pi1: f64,
    /// `(mu_lo - rate_lo) / (alpha sigma_hi^2)`
    pub pi2: f64,
    /// `(mu_lo - rate_hi) / (alpha sigma_hi^2)`
    pub pi3: f64,
}

pub fn rate_case_portfolios(
    asset: &AssetAmbiguity,
    rate_lo: f64,
    rate_hi: f64,
    alpha: f64,
) -> RatePortfolios {
    let scale = alpha * asset.sigma_hi() * asset.sigma_hi();
    RatePortfolios {
        pi1: (asset.mu_hi() - rate_lo) / scale,
        pi2: (asset.mu_lo() - rate_lo) / scale,
        pi3: (asset.mu_lo() - rate_hi) / scale,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum RateRegimeLabel {
    ShortAndSave,
    NonParticipation,
    LongAndSave,
    AllInAsset,
    LongAndBorrow,
}

impl RateRegimeLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            RateRegimeLabel::ShortAndSave => "ShortAndSave",
            RateRegimeLabel::NonParticipation => "NonParticipation",
            RateRegimeLabel::LongAndSave => "LongAndSave",
            RateRegimeLabel::AllInAsset => "AllInAsset",
            RateRegimeLabel::LongAndBorrow => "LongAndBorrow",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateRegime {
    pub label: RateRegimeLabel,
    pub pi_star: f64,
}

impl RatePortfolios {
    /// Five-way decision tree on the candidate weights.
    pub fn regime(&self) -> RateRegime {
        let (label, pi_star) = if self.pi1 < 0.0 {
            (RateRegimeLabel::ShortAndSave, self.pi1)
        } else if self.pi2 <= 0.0 {
            (RateRegimeLabel::NonParticipation, 0.0)
        } else if self.pi2 < 1.0 {
            (RateRegimeLabel::LongAndSave, self.pi2)
        } else if self.pi3 < 1.0 {
            (RateRegimeLabel::AllInAsset, 1.0)
        } else {
            (RateRegimeLabel::LongAndBorrow, self.pi3)
        };
        RateRegime { label, pi_star }
    }
}

/// Five-regime classification for a single-asset spec. Multi-asset specs are
/// rejected.
pub fn classify_rate_regime(spec: &AmbiguitySpec, alpha: f64) -> Result<RateRegime> {
    let asset = spec.single_asset("classify_rate_regime")?;
    Ok(rate_case_portfolios(asset, spec.rate_lo(), spec.rate_hi(), alpha).regime())
}

/// Worst-case drift and rate for a rate-ambiguity regime.
pub fn rate_regime_worst_case(
    regime: RateRegimeLabel,
    asset: &AssetAmbiguity,
    rate_lo: f64,
    rate_hi: f64,
) -> WorstCaseParams {
    let (mu, r) = match regime {
        RateRegimeLabel::ShortAndSave => (asset.mu_hi(), Some(rate_lo)),
        RateRegimeLabel::NonParticipation => (rate_lo, Some(rate_lo)),
        RateRegimeLabel::LongAndSave => (asset.mu_lo(), Some(rate_lo)),
        RateRegimeLabel::AllInAsset => (asset.mu_lo(), None),
        RateRegimeLabel::LongAndBorrow => (asset.mu_lo(), Some(rate_hi)),
    };
    WorstCaseParams {
        mu_star: vec![mu],
        sigma_star: vec![asset.sigma_hi()],
        r_star: r,
    }
}
