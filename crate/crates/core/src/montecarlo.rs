//! Monte Carlo evaluation of constant policies under constant priors, and the
//! brute-force minimax table over a grid of priors and portfolio weights.
//!
//! Path `j` always draws from ChaCha stream `j` of the configured seed, so
//! every cell of a table sees the same shocks and adding paths never changes
//! earlier ones. Paths are processed in fixed-size chunks whose partial sums
//! are merged in chunk order, which makes results independent of the thread
//! count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::closed_form::{f_factor, solve, CrraSolution};
use crate::error::{Error, Result};
use crate::model::{AmbiguitySpec, CrraParams};

pub const DEFAULT_BUDGET: u64 = 2_000_000_000;
/// Largest tolerated share of paths that hit zero wealth.
pub const MAX_ABSORBED_SHARE: f64 = 1e-3;
/// Upper bound on `|pi| sigma sqrt(dt)`.
pub const MAX_SHOCK: f64 = 0.5;
const CHUNK: usize = 512;

/// Constant drift, volatility and rate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantPrior {
    mu: Vec<f64>,
    sigma: Vec<f64>,
    r: f64,
}

impl ConstantPrior {
    pub fn new(mu: Vec<f64>, sigma: Vec<f64>, r: f64) -> Result<Self> {
        if mu.is_empty() || mu.len() != sigma.len() {
            return Err(Error::Domain(format!(
                "prior needs matching non-empty drift and volatility vectors, got {} and {}",
                mu.len(),
                sigma.len()
            )));
        }
        let finite = mu.iter().chain(&sigma).all(|v| v.is_finite()) && r.is_finite();
        if !finite || sigma.iter().any(|&s| s < 0.0) {
            return Err(Error::Domain(
                "prior parameters must be finite with sigma >= 0".into(),
            ));
        }
        Ok(Self { mu, sigma, r })
    }

    /// A prior that must lie inside the ambiguity set of `spec`.
    pub fn within(spec: &AmbiguitySpec, mu: Vec<f64>, sigma: Vec<f64>, r: f64) -> Result<Self> {
        let prior = Self::new(mu, sigma, r)?;
        if !prior.contained_in(spec) {
            return Err(Error::Domain(format!(
                "prior (mu {:?}, sigma {:?}, r {}) lies outside the ambiguity set",
                prior.mu, prior.sigma, prior.r
            )));
        }
        Ok(prior)
    }

    pub fn contained_in(&self, spec: &AmbiguitySpec) -> bool {
        self.mu.len() == spec.assets().len()
            && spec.contains_rate(self.r)
            && spec
                .assets()
                .iter()
                .zip(self.mu.iter().zip(&self.sigma))
                .all(|(a, (&m, &s))| a.contains_drift(m) && a.contains_volatility(s))
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn r(&self) -> f64 {
        self.r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ConsumptionRule {
    /// Fraction `f(t)^(-1/alpha)` of the closed form with growth rate `beta`.
    ClosedForm { beta: f64 },
    /// Constant positive fraction of wealth.
    Fixed(f64),
    /// No consumption; only the bequest counts.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantPolicy {
    pi: Vec<f64>,
    consumption: ConsumptionRule,
}

impl ConstantPolicy {
    pub fn new(pi: Vec<f64>, consumption: ConsumptionRule) -> Result<Self> {
        if pi.is_empty() || pi.iter().any(|p| !p.is_finite()) {
            return Err(Error::Domain("portfolio weights must be finite".into()));
        }
        match consumption {
            ConsumptionRule::Fixed(f) if !(f > 0.0 && f.is_finite()) => {
                return Err(Error::Domain(format!(
                    "fixed consumption fraction must be positive, got {f}"
                )))
            }
            ConsumptionRule::ClosedForm { beta } if !beta.is_finite() => {
                return Err(Error::Domain("beta must be finite".into()))
            }
            _ => {}
        }
        Ok(Self { pi, consumption })
    }

    /// Weights and consumption of a closed-form solution.
    pub fn closed_form(solution: &CrraSolution) -> Self {
        Self {
            pi: solution.pi_star.clone(),
            consumption: ConsumptionRule::ClosedForm {
                beta: solution.beta,
            },
        }
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn consumption(&self) -> ConsumptionRule {
        self.consumption
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McConfig {
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
    /// Cap on `n_paths * n_steps` per simulated cell.
    pub budget: u64,
}

impl McConfig {
    pub fn new(n_paths: usize, n_steps: usize, seed: u64) -> Self {
        Self {
            n_paths,
            n_steps,
            seed,
            budget: DEFAULT_BUDGET,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_paths < 2 || self.n_steps < 1 {
            return Err(Error::Domain(format!(
                "need at least 2 paths and 1 step, got {} and {}",
                self.n_paths, self.n_steps
            )));
        }
        let requested = self.n_paths as u64 * self.n_steps as u64;
        if requested > self.budget {
            return Err(Error::BudgetExceeded {
                requested,
                budget: self.budget,
            });
        }
        Ok(())
    }
}

/// Monte Carlo estimate of the expected utility of one policy under one prior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScenarioBatch {
    pub n_paths: usize,
    pub n_steps: usize,
    pub utility_mean: f64,
    pub utility_se: f64,
    pub seed: u64,
    /// Paths that reached zero wealth.
    pub absorbed: usize,
}

/// One (prior, policy) pair reduced to per-step coefficients.
struct Plan {
    /// `1 + (r + sum pi (mu - r)) dt`
    growth: f64,
    /// `pi_i sigma_i sqrt(dt)`
    shock: Vec<f64>,
    consume: bool,
}

#[derive(Clone, Copy, Default)]
struct Accum {
    sum: f64,
    sum_sq: f64,
    absorbed: usize,
}

struct Engine<'a> {
    plans: Vec<Plan>,
    /// Consumption fraction at each step, shared by all cells.
    fractions: Vec<f64>,
    crra: &'a CrraParams,
    x0: f64,
    dt: f64,
    cfg: McConfig,
    dim: usize,
}

impl Engine<'_> {
    fn fill_normals(&self, path: usize, buf: &mut [f64]) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(path as u64);
        for z in buf.iter_mut() {
            *z = StandardNormal.sample(&mut rng);
        }
    }

    /// Utility along one path and whether it was absorbed.
    fn run_path(&self, plan: &Plan, normals: &[f64], path: usize) -> Result<(f64, bool)> {
        let mut x = self.x0;
        let mut utility = 0.0;
        for k in 0..self.cfg.n_steps {
            let z = &normals[k * self.dim..(k + 1) * self.dim];
            let noise: f64 = plan.shock.iter().zip(z).map(|(s, z)| s * z).sum();
            let c = if plan.consume { self.fractions[k] * x } else { 0.0 };
            if plan.consume {
                utility += self.crra.utility(c) * self.dt;
            }
            x = x * (plan.growth + noise) - c * self.dt;
            if !x.is_finite() {
                return Err(Error::NonFiniteState { path, step: k });
            }
            if x <= 0.0 {
                return Ok((utility, true));
            }
        }
        Ok((utility + self.crra.bequest(x), false))
    }

    fn run_chunk(&self, chunk: usize) -> Result<Vec<Accum>> {
        let mut acc = vec![Accum::default(); self.plans.len()];
        let mut normals = vec![0.0; self.cfg.n_steps * self.dim];
        let end = ((chunk + 1) * CHUNK).min(self.cfg.n_paths);
        for path in chunk * CHUNK..end {
            self.fill_normals(path, &mut normals);
            for (plan, a) in self.plans.iter().zip(acc.iter_mut()) {
                let (u, absorbed) = self.run_path(plan, &normals, path)?;
                a.sum += u;
                a.sum_sq += u * u;
                a.absorbed += absorbed as usize;
            }
        }
        Ok(acc)
    }

    fn run(&self) -> Result<Vec<ScenarioBatch>> {
        let n_chunks = self.cfg.n_paths.div_ceil(CHUNK);
        let partials: Vec<Vec<Accum>> = (0..n_chunks)
            .into_par_iter()
            .map(|c| self.run_chunk(c))
            .collect::<Result<_>>()?;
        let mut total = vec![Accum::default(); self.plans.len()];
        for part in &partials {
            for (t, p) in total.iter_mut().zip(part) {
                t.sum += p.sum;
                t.sum_sq += p.sum_sq;
                t.absorbed += p.absorbed;
            }
        }
        let n = self.cfg.n_paths;
        total
            .into_iter()
            .map(|a| {
                if a.absorbed as f64 > MAX_ABSORBED_SHARE * n as f64 {
                    return Err(Error::ExcessiveAbsorption {
                        absorbed: a.absorbed,
                        n_paths: n,
                    });
                }
                let mean = a.sum / n as f64;
                let var = ((a.sum_sq - n as f64 * mean * mean) / (n - 1) as f64).max(0.0);
                Ok(ScenarioBatch {
                    n_paths: n,
                    n_steps: self.cfg.n_steps,
                    utility_mean: mean,
                    utility_se: (var / n as f64).sqrt(),
                    seed: self.cfg.seed,
                    absorbed: a.absorbed,
                })
            })
            .collect()
    }
}

fn consumption_fractions(
    rule: ConsumptionRule,
    crra: &CrraParams,
    n_steps: usize,
    dt: f64,
) -> Result<Vec<f64>> {
    match rule {
        ConsumptionRule::ClosedForm { beta } => (0..n_steps)
            .map(|k| Ok(f_factor(k as f64 * dt, beta, crra)?.powf(-1.0 / crra.alpha())))
            .collect(),
        ConsumptionRule::Fixed(f) => Ok(vec![f; n_steps]),
        ConsumptionRule::None => Ok(vec![0.0; n_steps]),
    }
}

fn plan(prior: &ConstantPrior, pi: &[f64], consume: bool, dt: f64) -> Result<Plan> {
    if pi.len() != prior.mu.len() {
        return Err(Error::Domain(format!(
            "policy has {} weights, prior has {} assets",
            pi.len(),
            prior.mu.len()
        )));
    }
    let premium: f64 = pi.iter().zip(&prior.mu).map(|(p, m)| p * (m - prior.r)).sum();
    let shock: Vec<f64> = pi
        .iter()
        .zip(&prior.sigma)
        .map(|(p, s)| p * s * dt.sqrt())
        .collect();
    if let Some(&worst) = shock.iter().max_by(|a, b| a.abs().total_cmp(&b.abs())) {
        if worst.abs() >= MAX_SHOCK {
            return Err(Error::StepTooCoarse { value: worst.abs() });
        }
    }
    Ok(Plan {
        growth: 1.0 + (prior.r + premium) * dt,
        shock,
        consume,
    })
}

fn simulate_cells(
    cells: &[(&ConstantPrior, &[f64])],
    consumption: ConsumptionRule,
    crra: &CrraParams,
    x0: f64,
    cfg: &McConfig,
) -> Result<Vec<ScenarioBatch>> {
    if !(x0 > 0.0 && x0.is_finite()) {
        return Err(Error::Domain(format!("initial wealth must be positive, got {x0}")));
    }
    cfg.validate()?;
    let dt = crra.horizon_t() / cfg.n_steps as f64;
    let consume = consumption != ConsumptionRule::None;
    let plans = cells
        .iter()
        .map(|(prior, pi)| plan(prior, pi, consume, dt))
        .collect::<Result<Vec<_>>>()?;
    let engine = Engine {
        dim: cells.first().map_or(1, |(p, _)| p.mu.len()),
        plans,
        fractions: consumption_fractions(consumption, crra, cfg.n_steps, dt)?,
        crra,
        x0,
        dt,
        cfg: *cfg,
    };
    engine.run()
}

/// Euler-Maruyama estimate of `E[int_0^T u(c_t) dt + Phi(X_T)]` under a
/// constant prior, with left-endpoint utility integration.
pub fn simulate_utility(
    prior: &ConstantPrior,
    policy: &ConstantPolicy,
    crra: &CrraParams,
    x0: f64,
    cfg: &McConfig,
) -> Result<ScenarioBatch> {
    let cells = [(prior, policy.pi())];
    Ok(simulate_cells(&cells, policy.consumption, crra, x0, cfg)?[0])
}

/// Number of points per parameter axis of the prior grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PriorGridResolution {
    pub mu: usize,
    pub sigma: usize,
    pub rate: usize,
}

/// `n` points from `lo` to `hi`, geometric when both are positive, with both
/// endpoints exact. A degenerate interval yields one point.
pub fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if lo == hi || n <= 1 {
        return vec![lo];
    }
    let last = (n - 1) as f64;
    let mut pts: Vec<f64> = (0..n)
        .map(|k| {
            let s = k as f64 / last;
            if lo > 0.0 {
                lo * (hi / lo).powf(s)
            } else {
                lo + (hi - lo) * s
            }
        })
        .collect();
    pts[0] = lo;
    pts[n - 1] = hi;
    pts
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaddleReport {
    pub priors: Vec<ConstantPrior>,
    pub policies: Vec<f64>,
    /// `utility[i][k]`: policy `i` under prior `k`.
    pub utility: Vec<Vec<f64>>,
    pub utility_se: Vec<Vec<f64>>,
    pub maxmin: f64,
    pub minmax: f64,
    pub gap: f64,
    pub robust_policy: f64,
    /// Worst prior for the robust policy.
    pub argmin_prior: ConstantPrior,
    /// Prior attaining the min-max.
    pub minmax_prior: ConstantPrior,
    pub max_se: f64,
    /// `gap <= 3 max_se`.
    pub saddle_holds: bool,
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
}

/// Expected utility on the grid of constant priors times constant weights,
/// every policy consuming the robust closed-form fraction.
pub fn minimax_table(
    spec: &AmbiguitySpec,
    crra: &CrraParams,
    x0: f64,
    resolution: PriorGridResolution,
    policy_grid: &[f64],
    cfg: &McConfig,
) -> Result<SaddleReport> {
    let asset = spec.single_asset("minimax_table")?;
    if policy_grid.is_empty() || resolution.mu == 0 || resolution.sigma == 0 || resolution.rate == 0
    {
        return Err(Error::Domain("minimax grids must be non-empty".into()));
    }
    let robust = solve(spec, crra)?;
    let mut priors = Vec::new();
    for &mu in &axis(asset.mu_lo(), asset.mu_hi(), resolution.mu) {
        for &sigma in &axis(asset.sigma_lo(), asset.sigma_hi(), resolution.sigma) {
            for &r in &axis(spec.rate_lo(), spec.rate_hi(), resolution.rate) {
                priors.push(ConstantPrior::within(spec, vec![mu], vec![sigma], r)?);
            }
        }
    }
    let weights: Vec<[f64; 1]> = policy_grid.iter().map(|&p| [p]).collect();
    let cells: Vec<(&ConstantPrior, &[f64])> = weights
        .iter()
        .flat_map(|w| priors.iter().map(move |p| (p, &w[..])))
        .collect();
    let rule = ConsumptionRule::ClosedForm { beta: robust.beta };
    let batches = simulate_cells(&cells, rule, crra, x0, cfg)?;

    let np = priors.len();
    let utility: Vec<Vec<f64>> = batches
        .chunks(np)
        .map(|row| row.iter().map(|b| b.utility_mean).collect())
        .collect();
    let utility_se: Vec<Vec<f64>> = batches
        .chunks(np)
        .map(|row| row.iter().map(|b| b.utility_se).collect())
        .collect();

    let argmin = |row: &[f64]| {
        (0..row.len())
            .min_by(|&a, &b| row[a].total_cmp(&row[b]))
            .expect("non-empty row")
    };
    let row_min: Vec<(usize, f64)> = utility
        .iter()
        .map(|row| {
            let k = argmin(row);
            (k, row[k])
        })
        .collect();
    let robust_idx = (0..row_min.len())
        .max_by(|&a, &b| row_min[a].1.total_cmp(&row_min[b].1))
        .expect("non-empty policy grid");
    let maxmin = row_min[robust_idx].1;
    let col_max: Vec<f64> = (0..np)
        .map(|k| utility.iter().map(|row| row[k]).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let minmax_idx = argmin(&col_max);
    let minmax = col_max[minmax_idx];
    let max_se = utility_se.iter().flatten().copied().fold(0.0, f64::max);
    let gap = (maxmin - minmax).abs();

    Ok(SaddleReport {
        argmin_prior: priors[row_min[robust_idx].0].clone(),
        minmax_prior: priors[minmax_idx].clone(),
        priors,
        policies: policy_grid.to_vec(),
        utility,
        utility_se,
        maxmin,
        minmax,
        gap,
        robust_policy: policy_grid[robust_idx],
        max_se,
        saddle_holds: gap <= 3.0 * max_se,
        n_paths: cfg.n_paths,
        n_steps: cfg.n_steps,
        seed: cfg.seed,
    })
}
