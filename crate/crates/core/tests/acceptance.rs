//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits non-zero
//! if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use ambimerton::closed_form::solve;
use ambimerton::hjb::{maximize_fixed_rate, maximize_rate_ambiguity, rate_objective, QuadCoeffs};
use ambimerton::montecarlo::{
    minimax_table, simulate_utility, ConstantPolicy, ConstantPrior, McConfig, PriorGridResolution,
};
use ambimerton::pde::{
    solve_g_heat, solve_hjb_fixed_rate, solve_hjb_rate_ambiguity, Boundary, Grid1D, Spacing,
    ValueSurface,
};
use ambimerton::worst_case::{
    classify_rate_regime, optimal_portfolio_fixed_rate, rate_case_portfolios, RateRegimeLabel,
};
use ambimerton::{AmbiguitySpec, AssetAmbiguity, CrraParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const INTERIOR: f64 = 0.6;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Value function of a CRRA investor with constant `beta`, coded from the
/// consumption ODE solution rather than taken from the library.
fn crra_value(beta: f64, crra: &CrraParams, t: f64, x: f64) -> f64 {
    let alpha = crra.alpha();
    let tau = crra.horizon_t() - t;
    let z = beta * tau / alpha;
    let g = crra.bequest_k().powf(1.0 / alpha) * z.exp() + alpha / beta * z.exp_m1();
    g.powf(alpha) * x.powf(1.0 - alpha) / (1.0 - alpha)
}

fn baseline_crra() -> CrraParams {
    CrraParams::new(2.0, 1.0, 10.0).unwrap()
}

fn baseline_spec() -> AmbiguitySpec {
    AmbiguitySpec::fixed_rate(AssetAmbiguity::new(0.05, 0.09, 0.1, 0.2).unwrap(), 0.01).unwrap()
}

fn all_in_asset_spec() -> AmbiguitySpec {
    AmbiguitySpec::new(vec![AssetAmbiguity::new(0.10, 0.12, 0.1, 0.2).unwrap()], 0.01, 0.05)
        .unwrap()
}

fn rel_error(surface: &ValueSurface, beta: f64, crra: &CrraParams) -> f64 {
    surface.max_relative_error(|t, x| crra_value(beta, crra, t, x), INTERIOR)
}

/// Shape results of every surface computed along the way.
#[derive(Default)]
struct Shapes(Vec<(String, Result<(), String>)>);

impl Shapes {
    fn record(&mut self, name: impl Into<String>, s: &ValueSurface) {
        self.0
            .push((name.into(), s.check_shape().map_err(|e| e.to_string())));
    }
}

// ---------------------------------------------------------------------------

const GRID_STEP: f64 = 1e-4;
const GRID_HALF_WIDTH: i64 = 100_000;

/// Grid search with step `GRID_STEP` over `[-10, 10]`. Kinks sit on grid
/// nodes, so a three-node parabola whose middle node is not a kink lies on a
/// single quadratic branch and its vertex is an exact objective value.
fn grid_search(objective: impl Fn(f64) -> f64, kinks: &[i64]) -> (f64, f64) {
    let pi = |k: i64| k as f64 * GRID_STEP;
    let (mut best_k, mut best_v) = (0, f64::NEG_INFINITY);
    for k in -GRID_HALF_WIDTH..=GRID_HALF_WIDTH {
        let v = objective(pi(k));
        if v > best_v {
            best_k = k;
            best_v = v;
        }
    }
    let (mut arg, mut val) = (pi(best_k), best_v);
    for mid in best_k - 1..=best_k + 1 {
        if kinks.contains(&mid) || mid.abs() >= GRID_HALF_WIDTH {
            continue;
        }
        let (l, c, r) = (objective(pi(mid - 1)), objective(pi(mid)), objective(pi(mid + 1)));
        let curv = l - 2.0 * c + r;
        if curv >= 0.0 {
            continue;
        }
        let shift = 0.5 * (l - r) / curv;
        if shift.abs() > 1.0 {
            continue;
        }
        let cand = pi(mid) + shift * GRID_STEP;
        let v = objective(cand);
        if v > val {
            arg = cand;
            val = v;
        }
    }
    (arg, val)
}

fn value_close(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst_pi, mut worst_val) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let b = rng.random_range(0.5..2.0);
        let a = -b * rng.random_range(0.02..0.5);
        let coeffs = QuadCoeffs::new(a, b).unwrap();
        let (m1, m2) = (rng.random_range(-0.1..0.3), rng.random_range(-0.1..0.3));
        let (mu_lo, mu_hi) = (f64::min(m1, m2), f64::max(m1, m2));
        let r = rng.random_range(-0.05..0.2);
        let (r1, r2) = (rng.random_range(-0.05..0.2), rng.random_range(-0.05..0.2));
        let (rate_lo, rate_hi) = (f64::min(r1, r2), f64::max(r1, r2));

        let fixed = maximize_fixed_rate(coeffs, mu_lo, mu_hi, r);
        let (pi_g, v_g) = grid_search(
            |p| {
                let excess = if p > 0.0 { mu_lo - r } else { mu_hi - r };
                a * p * p + b * p * excess
            },
            &[0],
        );
        worst_pi = worst_pi.max((fixed.pi_hat - pi_g).abs());
        worst_val = worst_val.max(value_close(fixed.value, v_g));

        let amb = maximize_rate_ambiguity(coeffs, mu_lo, mu_hi, rate_lo, rate_hi);
        let (pi_g, v_g) = grid_search(
            |p| {
                let (mu, rate) = if p > 1.0 {
                    (mu_lo, rate_hi)
                } else if p >= 0.0 {
                    (mu_lo, rate_lo)
                } else {
                    (mu_hi, rate_lo)
                };
                a * p * p + b * p * (mu - rate) + b * rate
            },
            &[0, (1.0 / GRID_STEP) as i64],
        );
        let check = rate_objective(coeffs, pi_g, mu_lo, mu_hi, rate_lo, rate_hi);
        assert!((check - v_g).abs() <= 1e-12 * v_g.abs().max(1.0));
        worst_pi = worst_pi.max((amb.pi_hat - pi_g).abs());
        worst_val = worst_val.max(value_close(amb.value, v_g));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst_pi <= 1e-3 && worst_val <= 1e-6 && secs < 10.0,
        format!("max |dpi| = {worst_pi:.2e}, max rel dvalue = {worst_val:.2e}, {secs:.1} s"),
    )
}

fn criterion_2(shapes: &mut Shapes) -> Outcome {
    let start = Instant::now();
    let (spec, crra) = (baseline_spec(), baseline_crra());
    let beta = solve(&spec, &crra).unwrap().beta;
    let mut errs = Vec::new();
    for (nx, nt) in [(400, 2000), (799, 4000)] {
        let grid = Grid1D::around(1.0, nx, nt, 10.0).unwrap();
        match solve_hjb_fixed_rate(&spec, &crra, &grid, Boundary::Homothetic) {
            Ok(s) => {
                errs.push(rel_error(&s, beta, &crra));
                shapes.record(format!("baseline {nx}x{nt}"), &s);
            }
            Err(e) => return outcome(false, format!("{nx}x{nt}: {e}")),
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ratio = errs[1] / errs[0];
    outcome(
        errs[0] <= 1e-3 && (0.4..=0.6).contains(&ratio) && secs < 60.0,
        format!(
            "err 400x2000 = {:.3e}, err 799x4000 = {:.3e}, ratio = {ratio:.3}, {secs:.1} s",
            errs[0], errs[1]
        ),
    )
}

fn criterion_3(shapes: &mut Shapes) -> Outcome {
    let crra = baseline_crra();
    let spec =
        AmbiguitySpec::fixed_rate(AssetAmbiguity::new(0.02, 0.08, 0.1, 0.2).unwrap(), 0.03)
            .unwrap();
    let pi_hat = solve(&spec, &crra).unwrap().pi_star[0];

    let grid = Grid1D::around(1.0, 400, 2000, 10.0).unwrap();
    let surface = match solve_hjb_fixed_rate(&spec, &crra, &grid, Boundary::Homothetic) {
        Ok(s) => s,
        Err(e) => return outcome(false, format!("PDE: {e}")),
    };
    shapes.record("non-participation", &surface);
    let mut max_pde = 0.0f64;
    for n in 0..grid.nt() {
        for j in 1..grid.nx() - 1 {
            max_pde = max_pde.max(surface.pi(n, j).abs());
        }
    }

    let (mu0, r) = (0.05f64, 0.03);
    let kappa_star = (mu0 - r).abs();
    let holdings: Vec<f64> = (0..=60)
        .map(|k| {
            let kappa = kappa_star * (k as f64 / 20.0);
            let asset = AssetAmbiguity::new(mu0 - kappa, mu0 + kappa, 0.1, 0.2).unwrap();
            optimal_portfolio_fixed_rate(&asset, r, &crra)
        })
        .collect();
    let decreasing = holdings.windows(2).all(|w| w[1] <= w[0]);
    let positive_before = holdings[..20].iter().all(|&p| p > 0.0);
    let zero_after = holdings[20..].iter().all(|&p| p == 0.0);

    outcome(
        pi_hat == 0.0 && max_pde == 0.0 && decreasing && positive_before && zero_after,
        format!(
            "closed-form pi = {pi_hat}, max |PDE pi| = {max_pde:.1e}, \
             kappa sweep: decreasing {decreasing}, zero from kappa* = {kappa_star} on {zero_after}"
        ),
    )
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let alpha = 2.0;
    let (sigma_lo, sigma_hi) = (0.1, 0.2);
    let (rate_lo, rate_hi) = (0.01, 0.05);
    let mut seen: Vec<RateRegimeLabel> = Vec::new();
    let mut disagreements = 0;
    let mut points = 0;
    for k in 0..=240 {
        let mu_lo = -0.04 + 0.001 * k as f64;
        let mu_hi = mu_lo + 0.04;
        let asset = AssetAmbiguity::new(mu_lo, mu_hi, sigma_lo, sigma_hi).unwrap();
        let spec = AmbiguitySpec::new(vec![asset], rate_lo, rate_hi).unwrap();
        let regime = classify_rate_regime(&spec, alpha).unwrap();
        if seen.last() != Some(&regime.label) {
            seen.push(regime.label);
        }
        let coeffs = QuadCoeffs::new(-0.5 * alpha * sigma_hi * sigma_hi, 1.0).unwrap();
        let m = maximize_rate_ambiguity(coeffs, mu_lo, mu_hi, rate_lo, rate_hi);
        if (m.pi_hat - regime.pi_star).abs() > 1e-12 {
            disagreements += 1;
        }
        points += 1;
    }
    let expected = [
        RateRegimeLabel::ShortAndSave,
        RateRegimeLabel::NonParticipation,
        RateRegimeLabel::LongAndSave,
        RateRegimeLabel::AllInAsset,
        RateRegimeLabel::LongAndBorrow,
    ];

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut misordered = 0;
    for _ in 0..10_000 {
        let mu_lo = rng.random_range(-0.2..0.3);
        let mu_hi = mu_lo + rng.random_range(0.0..0.2);
        let s_lo = rng.random_range(0.01..0.5);
        let s_hi = s_lo + rng.random_range(0.0..0.5);
        let r_lo = rng.random_range(-0.05..0.2);
        let r_hi = r_lo + rng.random_range(0.0..0.1);
        let a = rng.random_range(0.1..10.0);
        let asset = AssetAmbiguity::new(mu_lo, mu_hi, s_lo, s_hi).unwrap();
        let p = rate_case_portfolios(&asset, r_lo, r_hi, a);
        if !(p.pi1 >= p.pi2 && p.pi2 >= p.pi3) {
            misordered += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        seen == expected && disagreements == 0 && misordered == 0 && secs < 10.0,
        format!(
            "sweep labels {:?}, maximizer disagreements {disagreements}/{points}, \
             misordered {misordered}/10000, {secs:.2} s",
            seen.iter().map(|l| l.as_str()).collect::<Vec<_>>()
        ),
    )
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let (spec, crra) = (baseline_spec(), baseline_crra());
    let policies: Vec<f64> = (0..41).map(|k| (k as f64 - 10.0) / 10.0).collect();
    let res = PriorGridResolution {
        mu: 5,
        sigma: 5,
        rate: 1,
    };
    let report = match minimax_table(&spec, &crra, 1.0, res, &policies, &McConfig::new(20_000, 100, 7))
    {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let secs = start.elapsed().as_secs_f64();
    let arg = &report.argmin_prior;
    let nearest = arg.mu()[0] == 0.05 && arg.sigma()[0] == 0.2;
    outcome(
        report.saddle_holds && nearest && secs < 300.0,
        format!(
            "gap = {:.3e}, 3 max SE = {:.3e}, robust pi = {}, argmin prior (mu {}, sigma {}), {secs:.1} s",
            report.gap,
            3.0 * report.max_se,
            report.robust_policy,
            arg.mu()[0],
            arg.sigma()[0]
        ),
    )
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let (spec, crra) = (baseline_spec(), baseline_crra());
    let sol = solve(&spec, &crra).unwrap();
    let prior = ConstantPrior::new(vec![0.05], vec![0.2], 0.01).unwrap();
    let policy = ConstantPolicy::closed_form(&sol);
    let batch = match simulate_utility(&prior, &policy, &crra, 1.0, &McConfig::new(50_000, 1000, 7))
    {
        Ok(b) => b,
        Err(e) => return outcome(false, e.to_string()),
    };
    let phi0 = crra_value(sol.beta, &crra, 0.0, 1.0);
    let diff = (batch.utility_mean - phi0).abs();
    let secs = start.elapsed().as_secs_f64();
    outcome(
        diff <= 3.0 * batch.utility_se,
        format!(
            "MC {:.4} +- {:.4} vs phi(0, 1) = {phi0:.4}, |diff| = {diff:.4} ({:.2} SE), {secs:.1} s",
            batch.utility_mean,
            batch.utility_se,
            diff / batch.utility_se
        ),
    )
}

fn criterion_7() -> Outcome {
    let (sigma_lo, sigma_hi) = (0.1, 0.2);
    let grid = Grid1D::new(0.5, 2.5, 1000, 12_000, 1.0, Spacing::Linear).unwrap();
    let nt = grid.nt();
    let quad = match solve_g_heat(|x| x * x, sigma_lo, sigma_hi, &grid) {
        Ok(s) => s,
        Err(e) => return outcome(false, e.to_string()),
    };
    let mut quad_err = 0.0f64;
    for j in 0..grid.nx() {
        let x = grid.x(j);
        let exact = x * x + sigma_hi * sigma_hi * grid.t(nt);
        quad_err = quad_err.max((quad.value(nt, j) - exact).abs() / exact);
    }
    let lin = solve_g_heat(|x| 3.0 * x - 1.0, sigma_lo, sigma_hi, &grid).unwrap();
    let mut lin_err = 0.0f64;
    for n in 0..=nt {
        for j in 0..grid.nx() {
            lin_err = lin_err.max((lin.value(n, j) - lin.value(0, j)).abs());
        }
    }
    outcome(
        quad_err < 1e-3 && lin_err <= 1e-12,
        format!("x^2 max rel err at t = 1: {quad_err:.2e}; linear payoff max drift {lin_err:.1e}"),
    )
}

fn criterion_8(shapes: &Shapes) -> Outcome {
    let failed: Vec<String> = shapes
        .0
        .iter()
        .filter_map(|(name, r)| r.as_ref().err().map(|e| format!("{name}: {e}")))
        .collect();
    outcome(
        failed.is_empty(),
        if failed.is_empty() {
            format!("{} surfaces increasing and concave at all interior nodes", shapes.0.len())
        } else {
            failed.join("; ")
        },
    )
}

fn criterion_9(shapes: &mut Shapes) -> Outcome {
    let (spec, crra) = (all_in_asset_spec(), baseline_crra());
    let alpha = crra.alpha();
    let derived = (0.10 - 0.5 * alpha * 0.2 * 0.2) * (1.0 - alpha);
    let sol = solve(&spec, &crra).unwrap();
    let grid = Grid1D::around(1.0, 400, 2000, 10.0).unwrap();
    let surface = match solve_hjb_rate_ambiguity(&spec, &crra, &grid, Boundary::Homothetic) {
        Ok(s) => s,
        Err(e) => return outcome(false, e.to_string()),
    };
    shapes.record("all-in-asset", &surface);
    let err = rel_error(&surface, derived, &crra);
    let beta_gap = (sol.beta - derived).abs();
    outcome(
        err <= 1e-3 && beta_gap <= 1e-15,
        format!(
            "beta = {derived}, library beta gap {beta_gap:.1e}, PDE max rel err {err:.3e}, pi = {}",
            sol.pi_star[0]
        ),
    )
}

fn criterion_10(shapes: &mut Shapes) -> Outcome {
    let crra = baseline_crra();
    let grid = Grid1D::around(1.0, 200, 4000, 10.0).unwrap();
    let ambiguous = match solve_hjb_fixed_rate(&baseline_spec(), &crra, &grid, Boundary::Homothetic)
    {
        Ok(s) => s,
        Err(e) => return outcome(false, e.to_string()),
    };
    shapes.record("envelope ambiguous", &ambiguous);
    let mut worst = f64::NEG_INFINITY;
    for mu in [0.05, 0.07, 0.09] {
        for sigma in [0.1, 0.15, 0.2] {
            let spec =
                AmbiguitySpec::fixed_rate(AssetAmbiguity::point(mu, sigma).unwrap(), 0.01).unwrap();
            let classical = match solve_hjb_fixed_rate(&spec, &crra, &grid, Boundary::Homothetic) {
                Ok(s) => s,
                Err(e) => return outcome(false, format!("mu {mu}, sigma {sigma}: {e}")),
            };
            shapes.record(format!("classical mu {mu} sigma {sigma}"), &classical);
            for n in 0..=grid.nt() {
                for j in 0..grid.nx() {
                    let (a, c) = (ambiguous.phi(n, j), classical.phi(n, j));
                    worst = worst.max((a - c) / c.abs());
                }
            }
        }
    }
    outcome(
        worst <= 1e-6,
        format!("max relative excess of ambiguous over classical: {worst:.2e}"),
    )
}

fn main() -> ExitCode {
    let mut shapes = Shapes::default();
    let results = [
        ("1 pointwise maximizers vs grid search", criterion_1()),
        ("2 closed form vs PDE", criterion_2(&mut shapes)),
        ("3 non-participation", criterion_3(&mut shapes)),
        ("4 five-regime table", criterion_4()),
        ("5 minimax saddle", criterion_5()),
        ("6 worst-case prior consistency", criterion_6()),
        ("7 G-heat solver", criterion_7()),
        ("9 AllInAsset beta", criterion_9(&mut shapes)),
        ("10 lower envelope", criterion_10(&mut shapes)),
    ];
    let shape = ("8 value-function shape", criterion_8(&shapes));

    let mut all = true;
    let mut ordered: Vec<_> = results.iter().collect();
    ordered.insert(7, &shape);
    for (name, o) in ordered {
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        all &= o.pass;
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
