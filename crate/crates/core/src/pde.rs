//! Explicit finite-difference solvers for the G-heat equation and the
//! uncertain HJB equation, used to check the closed form independently.
//!
//! The HJB solver works on a log-spaced wealth grid. With `y = ln x` the
//! derivatives needed by the Hamiltonian are
//! `x phi_x = phi_y` and `x^2 phi_xx = phi_yy - phi_y`, both taken by central
//! differences of the current slice.

use serde::Serialize;

use crate::closed_form::{solve, CrraSolution};
use crate::error::{Error, Result};
use crate::hjb::{maximize_fixed_rate, maximize_rate_ambiguity, PointwiseMax, QuadCoeffs};
use crate::model::{AmbiguitySpec, CrraParams};

/// Wealth truncation relative to `x0` used by [`Grid1D::around`].
pub const DOMAIN_LO: f64 = 0.01;
pub const DOMAIN_HI: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    nx: usize,
    nt: usize,
    t_max: f64,
    spacing: Spacing,
}

impl Grid1D {
    pub fn new(
        x_min: f64,
        x_max: f64,
        nx: usize,
        nt: usize,
        t_max: f64,
        spacing: Spacing,
    ) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && 0.0 < x_min && x_min < x_max) {
            return Err(Error::InvalidGrid(format!(
                "need 0 < x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        if nx < 3 {
            return Err(Error::InvalidGrid(format!("nx = {nx}, need at least 3")));
        }
        if nt < 1 {
            return Err(Error::InvalidGrid("nt must be at least 1".into()));
        }
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::InvalidGrid(format!("t_max = {t_max} must be positive")));
        }
        Ok(Self {
            x_min,
            x_max,
            nx,
            nt,
            t_max,
            spacing,
        })
    }

    /// Log grid on `[0.01 x0, 100 x0]`.
    pub fn around(x0: f64, nx: usize, nt: usize, t_max: f64) -> Result<Self> {
        Self::new(DOMAIN_LO * x0, DOMAIN_HI * x0, nx, nt, t_max, Spacing::Log)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn dt(&self) -> f64 {
        self.t_max / self.nt as f64
    }

    pub fn t(&self, n: usize) -> f64 {
        if n == self.nt {
            self.t_max
        } else {
            n as f64 * self.dt()
        }
    }

    /// Node spacing in the grid variable (`x` or `ln x`).
    pub fn step(&self) -> f64 {
        match self.spacing {
            Spacing::Linear => (self.x_max - self.x_min) / (self.nx - 1) as f64,
            Spacing::Log => (self.x_max / self.x_min).ln() / (self.nx - 1) as f64,
        }
    }

    pub fn x(&self, j: usize) -> f64 {
        if j == self.nx - 1 {
            return self.x_max;
        }
        match self.spacing {
            Spacing::Linear => self.x_min + j as f64 * self.step(),
            Spacing::Log => self.x_min * (j as f64 * self.step()).exp(),
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.nx).map(|j| self.x(j)).collect()
    }

    /// Interior band `[0.2 (nx-1), 0.8 (nx-1)]` of node indices, or the band
    /// for another retained fraction.
    pub fn interior(&self, fraction: f64) -> std::ops::RangeInclusive<usize> {
        let trim = 0.5 * (1.0 - fraction.clamp(0.0, 1.0));
        let last = (self.nx - 1) as f64;
        let lo = (trim * last).ceil() as usize;
        let hi = ((1.0 - trim) * last).floor() as usize;
        lo.max(1)..=hi.min(self.nx - 2)
    }

    fn check_stability(&self, diffusion: f64) -> Result<()> {
        let h = self.step();
        let limit = h * h / diffusion;
        if diffusion > 0.0 && self.dt() > limit {
            return Err(Error::StabilityViolation {
                dt: self.dt(),
                limit,
                diffusion,
            });
        }
        Ok(())
    }
}

/// Solution of the G-heat equation, rows indexed by forward time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeatSurface {
    grid: Grid1D,
    values: Vec<f64>,
}

impl HeatSurface {
    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn value(&self, n: usize, j: usize) -> f64 {
        self.values[n * self.grid.nx + j]
    }

    pub fn slice(&self, n: usize) -> &[f64] {
        &self.values[n * self.grid.nx..(n + 1) * self.grid.nx]
    }
}

/// Diffusion coefficient selected by the sign of the second difference.
pub fn g_heat_coefficient(second_diff: f64, sigma_lo: f64, sigma_hi: f64) -> f64 {
    if second_diff >= 0.0 {
        sigma_hi * sigma_hi
    } else {
        sigma_lo * sigma_lo
    }
}

/// Explicit forward stepping of `u_t = 1/2 [sigma_hi^2 (u_xx)^+ - sigma_lo^2 (u_xx)^-]`
/// on a linear grid. The two edge nodes reuse the neighbouring second
/// difference, so quadratic payoffs are propagated without boundary error.
pub fn solve_g_heat(
    payoff: impl Fn(f64) -> f64,
    sigma_lo: f64,
    sigma_hi: f64,
    grid: &Grid1D,
) -> Result<HeatSurface> {
    if grid.spacing != Spacing::Linear {
        return Err(Error::InvalidGrid("the G-heat solver needs a linear grid".into()));
    }
    if !(0.0 <= sigma_lo && sigma_lo <= sigma_hi && sigma_hi.is_finite()) {
        return Err(Error::Domain(format!(
            "need 0 <= sigma_lo <= sigma_hi, got [{sigma_lo}, {sigma_hi}]"
        )));
    }
    grid.check_stability(sigma_hi * sigma_hi)?;

    let nx = grid.nx;
    let dx = grid.step();
    let ratio = 0.5 * grid.dt() / (dx * dx);
    let mut values = Vec::with_capacity((grid.nt + 1) * nx);
    values.extend(grid.nodes().into_iter().map(&payoff));
    if let Some(j) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("payoff is not finite at node {j}")));
    }

    let mut d2 = vec![0.0; nx];
    for n in 0..grid.nt {
        let prev = &values[n * nx..(n + 1) * nx];
        for j in 1..nx - 1 {
            d2[j] = prev[j + 1] - 2.0 * prev[j] + prev[j - 1];
        }
        d2[0] = d2[1];
        d2[nx - 1] = d2[nx - 2];
        let next: Vec<f64> = (0..nx)
            .map(|j| prev[j] + ratio * g_heat_coefficient(d2[j], sigma_lo, sigma_hi) * d2[j])
            .collect();
        values.extend(next);
    }
    Ok(HeatSurface {
        grid: grid.clone(),
        values,
    })
}

/// How the two edge nodes of each HJB slice are set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Boundary {
    /// Pinned to the closed-form value function.
    ClosedForm,
    /// Power-law extrapolation `phi(x_b) = phi(x_nb) (x_b / x_nb)^(1-alpha)`
    /// from the neighbouring node; exact for any CRRA-homothetic solution.
    Homothetic,
}

/// Value, portfolio and consumption surfaces from backward induction.
///
/// `values` has `nt + 1` rows (row `n` is time `t_n`); the policy rows have
/// `nt` rows, row `n` holding the controls used on `[t_n, t_{n+1})`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValueSurface {
    grid: Grid1D,
    values: Vec<f64>,
    policy_pi: Vec<f64>,
    policy_c: Vec<f64>,
}

impl ValueSurface {
    fn new(grid: Grid1D, values: Vec<f64>, policy_pi: Vec<f64>, policy_c: Vec<f64>) -> Self {
        let (nx, nt) = (grid.nx, grid.nt);
        assert_eq!(values.len(), (nt + 1) * nx);
        assert_eq!(policy_pi.len(), nt * nx);
        assert_eq!(policy_c.len(), nt * nx);
        Self {
            grid,
            values,
            policy_pi,
            policy_c,
        }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn phi(&self, n: usize, j: usize) -> f64 {
        self.values[n * self.grid.nx + j]
    }

    pub fn pi(&self, n: usize, j: usize) -> f64 {
        self.policy_pi[n * self.grid.nx + j]
    }

    pub fn c(&self, n: usize, j: usize) -> f64 {
        self.policy_c[n * self.grid.nx + j]
    }

    pub fn slice(&self, n: usize) -> &[f64] {
        &self.values[n * self.grid.nx..(n + 1) * self.grid.nx]
    }

    /// Discrete monotonicity and concavity in `x` of every slice, checked on
    /// the nonuniform node spacing at all interior nodes.
    pub fn check_shape(&self) -> Result<()> {
        let xs = self.grid.nodes();
        for n in 0..=self.grid.nt {
            let phi = self.slice(n);
            for j in 1..self.grid.nx - 1 {
                let left = (phi[j] - phi[j - 1]) / (xs[j] - xs[j - 1]);
                let right = (phi[j + 1] - phi[j]) / (xs[j + 1] - xs[j]);
                if !(left > 0.0 && right > 0.0) {
                    return Err(Error::MonotonicityLoss {
                        step: n,
                        node: j,
                        phi_x: left.min(right),
                    });
                }
                let phi_xx = 2.0 * (right - left) / (xs[j + 1] - xs[j - 1]);
                if phi_xx >= 0.0 || phi_xx.is_nan() {
                    return Err(Error::ConcavityLoss {
                        step: n,
                        node: j,
                        phi_xx,
                    });
                }
            }
        }
        Ok(())
    }

    /// Largest `|phi - reference| / |reference|` over all time rows and the
    /// interior band of nodes.
    pub fn max_relative_error(
        &self,
        mut reference: impl FnMut(f64, f64) -> f64,
        interior_fraction: f64,
    ) -> f64 {
        let band = self.grid.interior(interior_fraction);
        let mut worst = 0.0_f64;
        for n in 0..=self.grid.nt {
            let t = self.grid.t(n);
            for j in band.clone() {
                let exact = reference(t, self.grid.x(j));
                worst = worst.max((self.phi(n, j) - exact).abs() / exact.abs());
            }
        }
        worst
    }

    /// Largest `|pi - target|` over the interior band of the policy rows.
    pub fn max_policy_deviation(&self, target: f64, interior_fraction: f64) -> f64 {
        let band = self.grid.interior(interior_fraction);
        let mut worst = 0.0_f64;
        for n in 0..self.grid.nt {
            for j in band.clone() {
                worst = worst.max((self.pi(n, j) - target).abs());
            }
        }
        worst
    }
}

/// Parameters entering the portfolio part of the Hamiltonian.
#[derive(Debug, Clone, Copy)]
enum Market {
    Fixed { mu_lo: f64, mu_hi: f64, r: f64 },
    Rate { mu_lo: f64, mu_hi: f64, rate_lo: f64, rate_hi: f64 },
}

impl Market {
    /// Portfolio maximum plus the savings term.
    fn maximize(&self, coeffs: QuadCoeffs) -> PointwiseMax {
        match *self {
            Market::Fixed { mu_lo, mu_hi, r } => {
                let m = maximize_fixed_rate(coeffs, mu_lo, mu_hi, r);
                PointwiseMax {
                    pi_hat: m.pi_hat,
                    value: m.value + coeffs.b() * r,
                }
            }
            Market::Rate {
                mu_lo,
                mu_hi,
                rate_lo,
                rate_hi,
            } => maximize_rate_ambiguity(coeffs, mu_lo, mu_hi, rate_lo, rate_hi),
        }
    }
}

struct Hjb<'a> {
    market: Market,
    sigma_hi: f64,
    crra: &'a CrraParams,
    grid: &'a Grid1D,
    xs: Vec<f64>,
}

/// Node derivatives in log wealth.
struct LogDerivs {
    phi_y: f64,
    phi_yy: f64,
}

struct NodeUpdate {
    /// `-phi_t` implied by the HJB.
    rate: f64,
    /// Coefficient of `phi_y` under the optimal controls.
    drift: f64,
    phi_yy: f64,
    pi_hat: f64,
    c: f64,
}

impl NodeUpdate {
    /// Backward increment over one step, with the Lax-Wendroff term
    /// `dt^2 v^2 phi_yy / 2` that keeps central drift differences stable.
    fn increment(&self, dt: f64) -> f64 {
        dt * self.rate + 0.5 * dt * dt * self.drift * self.drift * self.phi_yy
    }

    /// Effective diffusion `sigma_hi^2 pi^2 + dt v^2` for the stability check.
    fn diffusion(&self, sigma_hi: f64, dt: f64) -> f64 {
        let s = sigma_hi * self.pi_hat;
        s * s + dt * self.drift * self.drift
    }
}

impl Hjb<'_> {
    fn derivs(&self, phi: &[f64], j: usize) -> LogDerivs {
        let h = self.grid.step();
        let last = phi.len() - 1;
        let (phi_y, phi_yy) = if j == 0 {
            (
                (-3.0 * phi[0] + 4.0 * phi[1] - phi[2]) / (2.0 * h),
                (phi[0] - 2.0 * phi[1] + phi[2]) / (h * h),
            )
        } else if j == last {
            (
                (3.0 * phi[last] - 4.0 * phi[last - 1] + phi[last - 2]) / (2.0 * h),
                (phi[last] - 2.0 * phi[last - 1] + phi[last - 2]) / (h * h),
            )
        } else {
            (
                (phi[j + 1] - phi[j - 1]) / (2.0 * h),
                (phi[j + 1] - 2.0 * phi[j] + phi[j - 1]) / (h * h),
            )
        };
        LogDerivs { phi_y, phi_yy }
    }

    fn node(&self, phi: &[f64], j: usize, step: usize) -> Result<NodeUpdate> {
        let LogDerivs { phi_y, phi_yy } = self.derivs(phi, j);
        let x = self.xs[j];
        let x2_phi_xx = phi_yy - phi_y;
        if phi_y <= 0.0 || phi_y.is_nan() {
            return Err(Error::MonotonicityLoss {
                step,
                node: j,
                phi_x: phi_y / x,
            });
        }
        if x2_phi_xx >= 0.0 || x2_phi_xx.is_nan() {
            return Err(Error::ConcavityLoss {
                step,
                node: j,
                phi_xx: x2_phi_xx / (x * x),
            });
        }
        let coeffs =
            QuadCoeffs::new(0.5 * self.sigma_hi * self.sigma_hi * x2_phi_xx, phi_y)?;
        let best = self.market.maximize(coeffs);
        let phi_x = phi_y / x;
        let c = self.crra.inverse_marginal(phi_x);
        // value = a pi^2 + (drift of the invested and saved wealth) phi_y
        let invest = (best.value - coeffs.a() * best.pi_hat * best.pi_hat) / phi_y;
        let ito = 0.5 * self.sigma_hi * self.sigma_hi * best.pi_hat * best.pi_hat;
        Ok(NodeUpdate {
            rate: self.crra.consumption_hamiltonian(phi_x) + best.value,
            drift: invest - ito - c / x,
            phi_yy,
            pi_hat: best.pi_hat,
            c,
        })
    }

    /// Stability of the first step, where the consumption drift peaks.
    fn check_terminal_stability(&self) -> Result<()> {
        let terminal: Vec<f64> = self.xs.iter().map(|&x| self.crra.bequest(x)).collect();
        let dt = self.grid.dt();
        let mut diffusion = 0.0_f64;
        for j in 1..self.grid.nx - 1 {
            diffusion = diffusion.max(self.node(&terminal, j, self.grid.nt)?.diffusion(self.sigma_hi, dt));
        }
        self.grid.check_stability(diffusion)
    }

    fn run(&self, boundary: Boundary, closed: &CrraSolution) -> Result<ValueSurface> {
        let grid = self.grid;
        let (nx, nt) = (grid.nx, grid.nt);
        let dt = grid.dt();
        let h = grid.step();
        let one_minus = 1.0 - self.crra.alpha();
        let pin = |t: f64, j: usize| closed.value_at(t, self.xs[j]);

        let mut values = vec![0.0; (nt + 1) * nx];
        let mut policy_pi = vec![0.0; nt * nx];
        let mut policy_c = vec![0.0; nt * nx];
        for (j, &x) in self.xs.iter().enumerate() {
            values[nt * nx + j] = self.crra.bequest(x);
        }

        for n in (0..nt).rev() {
            let (head, tail) = values.split_at_mut((n + 1) * nx);
            let prev = &tail[..nx];
            let cur = &mut head[n * nx..];
            let mut diffusion = 0.0_f64;
            for j in 0..nx {
                let upd = self.node(prev, j, n)?;
                policy_pi[n * nx + j] = upd.pi_hat;
                policy_c[n * nx + j] = upd.c;
                if j > 0 && j < nx - 1 {
                    cur[j] = prev[j] + upd.increment(dt);
                    diffusion = diffusion.max(upd.diffusion(self.sigma_hi, dt));
                }
            }
            grid.check_stability(diffusion)?;
            let t = grid.t(n);
            match boundary {
                Boundary::ClosedForm => {
                    cur[0] = pin(t, 0)?;
                    cur[nx - 1] = pin(t, nx - 1)?;
                }
                Boundary::Homothetic => {
                    let scale = (h * one_minus).exp();
                    cur[0] = cur[1] / scale;
                    cur[nx - 1] = cur[nx - 2] * scale;
                }
            }
        }
        Ok(ValueSurface::new(grid.clone(), values, policy_pi, policy_c))
    }
}

fn run_hjb(
    spec: &AmbiguitySpec,
    crra: &CrraParams,
    grid: &Grid1D,
    boundary: Boundary,
    market: Market,
    what: &'static str,
) -> Result<ValueSurface> {
    if grid.spacing != Spacing::Log {
        return Err(Error::InvalidGrid(format!("{what} needs a log-spaced grid")));
    }
    if (grid.t_max - crra.horizon_t()).abs() > 1e-12 * crra.horizon_t() {
        return Err(Error::InvalidGrid(format!(
            "grid horizon {} differs from T = {}",
            grid.t_max,
            crra.horizon_t()
        )));
    }
    let asset = spec.single_asset(what)?;
    let closed = solve(spec, crra)?;
    let hjb = Hjb {
        market,
        sigma_hi: asset.sigma_hi(),
        crra,
        grid,
        xs: grid.nodes(),
    };
    hjb.check_terminal_stability()?;
    hjb.run(boundary, &closed)
}

/// Backward induction for a known interest rate (single asset).
pub fn solve_hjb_fixed_rate(
    spec: &AmbiguitySpec,
    crra: &CrraParams,
    grid: &Grid1D,
    boundary: Boundary,
) -> Result<ValueSurface> {
    let r = spec
        .known_rate()
        .ok_or(Error::RateNotFixed("solve_hjb_fixed_rate"))?;
    let asset = spec.single_asset("solve_hjb_fixed_rate")?;
    let market = Market::Fixed {
        mu_lo: asset.mu_lo(),
        mu_hi: asset.mu_hi(),
        r,
    };
    run_hjb(spec, crra, grid, boundary, market, "solve_hjb_fixed_rate")
}

/// Backward induction with an ambiguous interest rate (single asset).
pub fn solve_hjb_rate_ambiguity(
    spec: &AmbiguitySpec,
    crra: &CrraParams,
    grid: &Grid1D,
    boundary: Boundary,
) -> Result<ValueSurface> {
    let asset = spec.single_asset("solve_hjb_rate_ambiguity")?;
    let market = Market::Rate {
        mu_lo: asset.mu_lo(),
        mu_hi: asset.mu_hi(),
        rate_lo: spec.rate_lo(),
        rate_hi: spec.rate_hi(),
    };
    run_hjb(spec, crra, grid, boundary, market, "solve_hjb_rate_ambiguity")
}

/// Largest relative residual of the closed form inside the discrete scheme,
/// `|phi(t_n) - phi(t_{n+1}) - step[phi(t_{n+1})]| / (dt |phi(t_n)|)` over the
/// interior band: the local truncation error per unit time.
pub fn closed_form_residual(
    spec: &AmbiguitySpec,
    crra: &CrraParams,
    grid: &Grid1D,
    interior_fraction: f64,
) -> Result<f64> {
    let asset = spec.single_asset("closed_form_residual")?;
    let market = match spec.known_rate() {
        Some(r) => Market::Fixed {
            mu_lo: asset.mu_lo(),
            mu_hi: asset.mu_hi(),
            r,
        },
        None => Market::Rate {
            mu_lo: asset.mu_lo(),
            mu_hi: asset.mu_hi(),
            rate_lo: spec.rate_lo(),
            rate_hi: spec.rate_hi(),
        },
    };
    let closed = solve(spec, crra)?;
    let hjb = Hjb {
        market,
        sigma_hi: asset.sigma_hi(),
        crra,
        grid,
        xs: grid.nodes(),
    };
    let slice = |t: f64| -> Result<Vec<f64>> {
        hjb.xs.iter().map(|&x| closed.value_at(t, x)).collect()
    };
    let band = grid.interior(interior_fraction);
    let mut worst = 0.0_f64;
    let mut next = slice(grid.t(grid.nt))?;
    for n in (0..grid.nt).rev() {
        let cur = slice(grid.t(n))?;
        for j in band.clone() {
            let step = hjb.node(&next, j, n)?.increment(grid.dt());
            let r = ((cur[j] - next[j] - step) / grid.dt()).abs() / cur[j].abs();
            worst = worst.max(r);
        }
        next = cur;
    }
    Ok(worst)
}
