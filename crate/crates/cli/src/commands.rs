use ambimerton::closed_form::solve;
use ambimerton::montecarlo::{minimax_table, McConfig, SaddleReport};
use ambimerton::pde::{
    closed_form_residual, solve_hjb_fixed_rate, solve_hjb_rate_ambiguity, Boundary, Grid1D,
    ValueSurface,
};
use ambimerton::worst_case::{
    classify_drift_regime, classify_rate_regime, optimal_portfolio_fixed_rate,
    rate_regime_worst_case, worst_case_params,
};
use ambimerton::{AmbiguitySpec, AssetAmbiguity, SolutionRegime};
use serde::Serialize;

use crate::config::{linspace, RunConfig, SweepAxis};
use crate::error::{CliError, Result};

fn model_name(spec: &AmbiguitySpec) -> &'static str {
    if spec.is_fixed_rate() {
        "fixed_rate"
    } else {
        "rate_ambiguity"
    }
}

#[derive(Debug, Serialize)]
pub struct PolicyReport {
    pub model: &'static str,
    /// Present for single-asset configs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regime: Option<&'static str>,
    pub regimes: Vec<&'static str>,
    pub pi: Vec<f64>,
    pub mu_star: Vec<f64>,
    pub sigma_star: Vec<f64>,
    pub r_star: Option<f64>,
    pub beta: f64,
    pub consumption_fraction_t0: f64,
    pub phi0: f64,
    pub x0: f64,
}

pub fn policy(cfg: &RunConfig) -> Result<PolicyReport> {
    let sol = solve(&cfg.spec, &cfg.crra)?;
    let worst = match &sol.regime {
        SolutionRegime::Drift(_) => worst_case_params(&cfg.spec)?,
        SolutionRegime::Rate(r) => {
            let asset = cfg.spec.single_asset("policy")?;
            rate_regime_worst_case(r.label, asset, cfg.spec.rate_lo(), cfg.spec.rate_hi())
        }
    };
    let regimes = sol.regime.labels();
    Ok(PolicyReport {
        model: model_name(&cfg.spec),
        regime: (regimes.len() == 1).then(|| regimes[0]),
        regimes,
        pi: sol.pi_star.clone(),
        mu_star: worst.mu_star,
        sigma_star: worst.sigma_star,
        r_star: worst.r_star,
        beta: sol.beta,
        consumption_fraction_t0: sol.consumption_fraction(0.0)?,
        phi0: sol.value_at(0.0, cfg.x0)?,
        x0: cfg.x0,
    })
}

#[derive(Debug, Serialize)]
pub struct RegionPoint {
    pub param: f64,
    pub regime: &'static str,
    pub pi_star: f64,
}

/// Parameter value where a candidate weight crosses 0 or 1.
#[derive(Debug, Serialize)]
pub struct RegionBoundary {
    pub at: f64,
    pub threshold: &'static str,
}

#[derive(Debug, Serialize)]
pub struct RegionsReport {
    pub axis: &'static str,
    pub model: &'static str,
    pub from: f64,
    pub to: f64,
    pub points: Vec<RegionPoint>,
    pub boundaries: Vec<RegionBoundary>,
}

pub fn regions(cfg: &RunConfig) -> Result<RegionsReport> {
    let sweep = *cfg.sweep("regions")?;
    let unordered = sweep.from > sweep.to || sweep.from.is_nan() || sweep.to.is_nan();
    let empty = sweep.n == 0 || unordered || (sweep.n > 1 && sweep.from == sweep.to);
    if empty {
        return Err(CliError::EmptySweep {
            from: sweep.from,
            to: sweep.to,
            n: sweep.n,
        });
    }
    let base = *cfg.spec.single_asset("regions")?;
    let fixed = cfg.spec.is_fixed_rate();
    let alpha = cfg.crra.alpha();
    let (lo, hi) = (cfg.spec.rate_lo(), cfg.spec.rate_hi());

    let mut points = Vec::with_capacity(sweep.n);
    for v in linspace(sweep.from, sweep.to, sweep.n) {
        let (asset, rate_lo, rate_hi) = match sweep.axis {
            SweepAxis::MuLo => (
                AssetAmbiguity::new(v, base.mu_hi().max(v), base.sigma_lo(), base.sigma_hi())?,
                lo,
                hi,
            ),
            SweepAxis::RateLo if fixed => (base, v, v),
            SweepAxis::RateLo => (base, v, hi.max(v)),
        };
        let (regime, pi_star) = if fixed {
            (
                classify_drift_regime(&asset, rate_lo).as_str(),
                optimal_portfolio_fixed_rate(&asset, rate_lo, &cfg.crra),
            )
        } else {
            let spec = AmbiguitySpec::new(vec![asset], rate_lo, rate_hi)?;
            let r = classify_rate_regime(&spec, alpha)?;
            (r.label.as_str(), r.pi_star)
        };
        points.push(RegionPoint {
            param: v,
            regime,
            pi_star,
        });
    }

    let scale = alpha * base.sigma_hi() * base.sigma_hi();
    let candidates: Vec<(f64, &'static str)> = match (sweep.axis, fixed) {
        (SweepAxis::MuLo, true) => vec![(lo, "mu_lo = r")],
        (SweepAxis::MuLo, false) => vec![
            (lo, "mu_lo = rate_lo"),
            (lo + scale, "mu_lo = rate_lo + alpha sigma_hi^2"),
            (hi + scale, "mu_lo = rate_hi + alpha sigma_hi^2"),
        ],
        (SweepAxis::RateLo, true) => vec![(base.mu_lo(), "r = mu_lo"), (base.mu_hi(), "r = mu_hi")],
        (SweepAxis::RateLo, false) => vec![
            (base.mu_lo() - scale, "rate_lo = mu_lo - alpha sigma_hi^2"),
            (base.mu_lo(), "rate_lo = mu_lo"),
            (base.mu_hi(), "rate_lo = mu_hi"),
        ],
    };
    let mut boundaries: Vec<RegionBoundary> = candidates
        .into_iter()
        .filter(|(at, _)| *at > sweep.from && *at < sweep.to)
        .map(|(at, threshold)| RegionBoundary { at, threshold })
        .collect();
    boundaries.sort_by(|a, b| a.at.total_cmp(&b.at));

    Ok(RegionsReport {
        axis: sweep.axis.as_str(),
        model: model_name(&cfg.spec),
        from: sweep.from,
        to: sweep.to,
        points,
        boundaries,
    })
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub model: &'static str,
    pub boundary: &'static str,
    pub nx: usize,
    pub nt: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub pi_star: f64,
    pub beta: f64,
    /// Over all time rows and the interior 60% of wealth nodes.
    pub max_rel_err: f64,
    pub max_policy_dev: f64,
    /// Local truncation error of the scheme on the closed form, per unit time.
    pub closed_form_residual: f64,
    pub shape_ok: bool,
    pub tolerance: f64,
    pub passed: bool,
    pub message: String,
}

pub const INTERIOR: f64 = 0.6;

pub fn verify(cfg: &RunConfig) -> Result<(VerifyReport, ValueSurface)> {
    let g = cfg.grid("verify")?;
    let grid = Grid1D::around(cfg.x0, g.nx, g.nt, cfg.crra.horizon_t())?;
    let boundary = Boundary::from(g.boundary);
    let sol = solve(&cfg.spec, &cfg.crra)?;
    let surface = if cfg.spec.is_fixed_rate() {
        solve_hjb_fixed_rate(&cfg.spec, &cfg.crra, &grid, boundary)?
    } else {
        solve_hjb_rate_ambiguity(&cfg.spec, &cfg.crra, &grid, boundary)?
    };
    let mut failure = None;
    let max_rel_err = surface.max_relative_error(
        |t, x| match sol.value_at(t, x) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        INTERIOR,
    );
    if let Some(e) = failure {
        return Err(e.into());
    }
    let shape_ok = surface.check_shape().is_ok();
    let residual = closed_form_residual(&cfg.spec, &cfg.crra, &grid, INTERIOR)?;
    let passed = max_rel_err <= g.tolerance && shape_ok;
    let message = if passed {
        format!("max_rel_err ≤ {:e}: PASS", g.tolerance)
    } else if !shape_ok {
        "FAIL: surface is not increasing and concave in wealth; refine nx/nt".to_string()
    } else {
        format!(
            "max_rel_err = {max_rel_err:.3e} > {:e}: FAIL; refine the grid (raise nt, then nx)",
            g.tolerance
        )
    };
    let report = VerifyReport {
        model: model_name(&cfg.spec),
        boundary: match boundary {
            Boundary::ClosedForm => "closed-form",
            Boundary::Homothetic => "homothetic",
        },
        nx: g.nx,
        nt: g.nt,
        x_min: grid.x_min(),
        x_max: grid.x_max(),
        pi_star: sol.pi_star[0],
        beta: sol.beta,
        max_rel_err,
        max_policy_dev: surface.max_policy_deviation(sol.pi_star[0], INTERIOR),
        closed_form_residual: residual,
        shape_ok,
        tolerance: g.tolerance,
        passed,
        message,
    };
    Ok((report, surface))
}

#[derive(Debug, Serialize)]
pub struct MinimaxReport {
    #[serde(flatten)]
    pub saddle: SaddleReport,
    pub message: String,
}

pub fn minimax(cfg: &RunConfig, seed: Option<u64>) -> Result<MinimaxReport> {
    let mc = cfg.mc("minimax")?;
    let mut mc_cfg = McConfig::new(mc.n_paths, mc.n_steps, seed.unwrap_or(mc.seed));
    if let Some(b) = mc.budget {
        mc_cfg.budget = b;
    }
    let saddle = minimax_table(
        &cfg.spec,
        &cfg.crra,
        cfg.x0,
        mc.priors.into(),
        &mc.policies.weights()?,
        &mc_cfg,
    )?;
    let verdict = if saddle.saddle_holds { "PASS" } else { "FAIL" };
    let message = format!(
        "gap {:.3e} vs 3 SE {:.3e}: {verdict}",
        saddle.gap,
        3.0 * saddle.max_se
    );
    Ok(MinimaxReport { saddle, message })
}
