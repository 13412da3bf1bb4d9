//! Pointwise maximization of the portfolio part of the uncertain Hamiltonian.
//!
//! At a node `(t, x)` write `a = sigma_hi^2 x^2 phi_xx / 2 < 0` and
//! `b = x phi_x > 0`. Taking the infimum over the parameter rectangle leaves a
//! concave piecewise quadratic in the weight `pi`:
//!
//! ```text
//! known rate:     a pi^2 + b pi (mu_lo - r) 1{pi > 0} + b pi (mu_hi - r) 1{pi <= 0}
//! rate interval:  a pi^2 + b pi (mu_lo - r_hi) 1{pi > 1} + b r_hi 1{pi > 1}
//!                        + b pi (mu_lo - r_lo) 1{0 <= pi <= 1}
//!                        + b pi (mu_hi - r_lo) 1{pi <= 0} + b r_lo 1{pi <= 1}
//! ```
//!
//! The known-rate objective omits the common `b r` savings term; the
//! rate-interval objective includes it because the worst rate depends on the
//! sign of `1 - pi`. Callers assembling a PDE must add `b r` themselves in the
//! first case only.

use serde::Serialize;

use crate::error::{Error, Result};

/// Coefficients `a < 0`, `b > 0` of the quadratic portfolio objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadCoeffs {
    a: f64,
    b: f64,
}

impl QuadCoeffs {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if a < 0.0 && b > 0.0 && a.is_finite() && b.is_finite() {
            Ok(Self { a, b })
        } else {
            Err(Error::InvalidCoeffs { a, b })
        }
    }

    /// Coefficients from value-function derivatives at wealth `x`.
    pub fn from_derivatives(sigma_hi: f64, x: f64, phi_x: f64, phi_xx: f64) -> Result<Self> {
        Self::new(0.5 * sigma_hi * sigma_hi * x * x * phi_xx, phi_x * x)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Unconstrained maximizer of `a pi^2 + b pi excess`.
    fn vertex(&self, excess: f64) -> f64 {
        -self.b * excess / (2.0 * self.a)
    }

    /// Value of `a pi^2 + b pi excess` at its vertex.
    fn vertex_value(&self, excess: f64) -> f64 {
        -self.b * self.b * excess * excess / (4.0 * self.a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointwiseMax {
    pub pi_hat: f64,
    pub value: f64,
}

/// Known rate `r`: long at `mu_lo` if `r <= mu_lo`, short at `mu_hi` if
/// `mu_hi <= r`, out of the asset otherwise.
pub fn maximize_fixed_rate(coeffs: QuadCoeffs, mu_lo: f64, mu_hi: f64, r: f64) -> PointwiseMax {
    if r <= mu_lo {
        let excess = mu_lo - r;
        PointwiseMax {
            pi_hat: coeffs.vertex(excess),
            value: coeffs.vertex_value(excess),
        }
    } else if mu_hi <= r {
        let excess = mu_hi - r;
        PointwiseMax {
            pi_hat: coeffs.vertex(excess),
            value: coeffs.vertex_value(excess),
        }
    } else {
        PointwiseMax {
            pi_hat: 0.0,
            value: 0.0,
        }
    }
}

/// The kinked rate-interval objective, including the savings intercept.
pub fn rate_objective(
    coeffs: QuadCoeffs,
    pi: f64,
    mu_lo: f64,
    mu_hi: f64,
    rate_lo: f64,
    rate_hi: f64,
) -> f64 {
    let QuadCoeffs { a, b } = coeffs;
    if pi > 1.0 {
        a * pi * pi + b * pi * (mu_lo - rate_hi) + b * rate_hi
    } else if pi >= 0.0 {
        a * pi * pi + b * pi * (mu_lo - rate_lo) + b * rate_lo
    } else {
        a * pi * pi + b * pi * (mu_hi - rate_lo) + b * rate_lo
    }
}

/// Rate interval `[rate_lo, rate_hi]`, single asset.
///
/// Cases on where the lower rate and drift sit:
/// 1. `mu_hi <= rate_lo`: short at the vertex of the `pi <= 0` branch;
/// 2. `mu_lo <= rate_lo < mu_hi`: out of the asset;
/// 3. `rate_lo < mu_lo < rate_hi`: the `0 <= pi <= 1` vertex, capped at 1;
/// 4. `mu_lo >= rate_hi`: the `[0, 1]` vertex if it is below 1, the `pi > 1`
///    vertex if that one is above 1, otherwise exactly 1.
pub fn maximize_rate_ambiguity(
    coeffs: QuadCoeffs,
    mu_lo: f64,
    mu_hi: f64,
    rate_lo: f64,
    rate_hi: f64,
) -> PointwiseMax {
    let pi_hat = if mu_hi <= rate_lo {
        coeffs.vertex(mu_hi - rate_lo)
    } else if mu_lo <= rate_lo {
        0.0
    } else if mu_lo < rate_hi {
        coeffs.vertex(mu_lo - rate_lo).min(1.0)
    } else {
        let save = coeffs.vertex(mu_lo - rate_lo);
        let borrow = coeffs.vertex(mu_lo - rate_hi);
        if save < 1.0 {
            save
        } else if borrow > 1.0 {
            borrow
        } else {
            1.0
        }
    };
    PointwiseMax {
        pi_hat,
        value: rate_objective(coeffs, pi_hat, mu_lo, mu_hi, rate_lo, rate_hi),
    }
}
