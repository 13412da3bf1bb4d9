use ambimerton::hjb::{maximize_fixed_rate, maximize_rate_ambiguity, QuadCoeffs};
use ambimerton::pde::{solve_g_heat, solve_hjb_fixed_rate, Boundary, Grid1D, Spacing};
use ambimerton::{AmbiguitySpec, AssetAmbiguity, CrraParams};
use proptest::prelude::*;

const EPS: f64 = 1e-8;

fn coeffs() -> impl Strategy<Value = QuadCoeffs> {
    (0.5..2.0f64, 0.02..0.5f64).prop_map(|(b, s)| QuadCoeffs::new(-b * s, b).unwrap())
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= 1e-6 * scale * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #[test]
    fn fixed_rate_value_never_below_staying_out(
        c in coeffs(),
        m in -0.1..0.3f64,
        w in 0.0..0.2f64,
        r in -0.05..0.3f64,
    ) {
        prop_assert!(maximize_fixed_rate(c, m, m + w, r).value >= 0.0);
    }

    #[test]
    fn fixed_rate_value_is_continuous_across_cases(
        c in coeffs(),
        r in -0.05..0.2f64,
        w in 0.001..0.2f64,
        upper in any::<bool>(),
    ) {
        // r sits on mu_lo or on mu_hi
        let mu_lo = if upper { r - w } else { r };
        let v = |d: f64| {
            let lo = mu_lo + d;
            maximize_fixed_rate(c, lo, lo + w, r).value
        };
        prop_assert!(close(v(-EPS), v(EPS), c.b()));
        prop_assert!(close(v(0.0), v(EPS), c.b()));
    }

    #[test]
    fn rate_value_is_continuous_across_cases(
        c in coeffs(),
        rate_lo in -0.05..0.15f64,
        spread in 0.001..0.1f64,
        w in 0.001..0.2f64,
        case in 0..5usize,
    ) {
        let rate_hi = rate_lo + spread;
        let unit = -2.0 * c.a() / c.b();
        let mu_lo = match case {
            0 => rate_lo - w,
            1 => rate_lo,
            2 => rate_hi,
            3 => rate_lo + unit,
            _ => rate_hi + unit,
        };
        let v = |d: f64| {
            let lo = mu_lo + d;
            maximize_rate_ambiguity(c, lo, lo + w, rate_lo, rate_hi).value
        };
        prop_assert!(close(v(-EPS), v(EPS), c.b()), "case {case}: {} vs {}", v(-EPS), v(EPS));
        prop_assert!(close(v(0.0), v(EPS), c.b()));
    }

    #[test]
    fn rate_value_dominates_staying_out(
        c in coeffs(),
        m in -0.1..0.3f64,
        w in 0.0..0.2f64,
        rate_lo in -0.05..0.15f64,
        spread in 0.0..0.1f64,
    ) {
        let m = maximize_rate_ambiguity(c, m, m + w, rate_lo, rate_lo + spread);
        prop_assert!(m.value >= c.b() * rate_lo - 1e-15);
    }
}

fn heat_grid() -> Grid1D {
    Grid1D::new(1.0, 3.0, 41, 200, 0.5, Spacing::Linear).unwrap()
}

fn payoff(c: [f64; 3]) -> impl Fn(f64) -> f64 {
    move |x| c[0] + c[1] * (x - 2.0) + c[2] * (x - 2.0).powi(2) * (x - 1.7).signum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn g_heat_is_sublinear_and_positively_homogeneous(
        p in prop::array::uniform3(-1.0..1.0f64),
        q in prop::array::uniform3(-1.0..1.0f64),
        lambda in 0.1..5.0f64,
    ) {
        let g = heat_grid();
        let (lo, hi) = (0.1, 0.3);
        let (fp, fq) = (payoff(p), payoff(q));
        let up = solve_g_heat(&fp, lo, hi, &g).unwrap();
        let uq = solve_g_heat(&fq, lo, hi, &g).unwrap();
        let sum = solve_g_heat(|x| fp(x) + fq(x), lo, hi, &g).unwrap();
        let scaled = solve_g_heat(|x| lambda * fp(x), lo, hi, &g).unwrap();
        let n = g.nt();
        for j in 0..g.nx() {
            prop_assert!(sum.value(n, j) <= up.value(n, j) + uq.value(n, j) + 1e-12);
            prop_assert!((scaled.value(n, j) - lambda * up.value(n, j)).abs() <= 1e-12 * lambda);
        }
    }

    #[test]
    fn g_heat_preserves_order(
        p in prop::array::uniform3(-1.0..1.0f64),
        shift in prop::array::uniform3(0.0..1.0f64),
    ) {
        let g = heat_grid();
        let lower = payoff(p);
        let upper = |x: f64| lower(x) + shift[0] + shift[1] * (x - 1.0) + shift[2] * (x - 1.0).powi(2);
        let ul = solve_g_heat(&lower, 0.1, 0.3, &g).unwrap();
        let uu = solve_g_heat(upper, 0.1, 0.3, &g).unwrap();
        for n in 0..=g.nt() {
            for j in 0..g.nx() {
                prop_assert!(ul.value(n, j) <= uu.value(n, j) + 1e-12);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn ambiguous_value_is_below_every_classical_value(
        mu in 0.05..0.09f64,
        sigma in 0.1..0.2f64,
    ) {
        let crra = CrraParams::new(2.0, 1.0, 10.0).unwrap();
        let grid = Grid1D::around(1.0, 60, 800, 10.0).unwrap();
        let amb = AmbiguitySpec::fixed_rate(AssetAmbiguity::new(0.05, 0.09, 0.1, 0.2).unwrap(), 0.01)
            .unwrap();
        let cls = AmbiguitySpec::fixed_rate(AssetAmbiguity::point(mu, sigma).unwrap(), 0.01).unwrap();
        let a = solve_hjb_fixed_rate(&amb, &crra, &grid, Boundary::Homothetic).unwrap();
        let c = solve_hjb_fixed_rate(&cls, &crra, &grid, Boundary::Homothetic).unwrap();
        for n in 0..=grid.nt() {
            for j in 0..grid.nx() {
                let (va, vc) = (a.phi(n, j), c.phi(n, j));
                prop_assert!(va <= vc + 1e-6 * vc.abs(), "n {n} j {j}: {va} > {vc}");
            }
        }
    }
}
