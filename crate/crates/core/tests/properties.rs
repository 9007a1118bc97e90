use mlhjb::defect::{delta_ml, semigroup_residual};
use mlhjb::fracderiv::{l1_frac_deriv, FracOrder, HistoryBuffer};
use mlhjb::quadrature::QuadratureConfig;
use mlhjb::specfun::{gamma, kernel, kernel_deriv, ml_one, ml_two, SeriesControl};
use mlhjb::DiscountSpec;
use proptest::prelude::*;

fn ctl() -> SeriesControl {
    SeriesControl::default()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

/// `E_α(z)` grows like `exp(z^{1/α})` for large positive `z`.
fn representable(alpha: f64, z: f64) -> bool {
    z <= 0.0 || z.powf(1.0 / alpha) < 600.0
}

proptest! {
    #[test]
    fn gamma_recurrence(x in 0.05f64..60.0) {
        let lhs = gamma(x + 1.0).unwrap();
        let rhs = x * gamma(x).unwrap();
        prop_assert!(close(lhs, rhs, 1e-13), "{lhs} vs {rhs}");
    }

    #[test]
    fn gamma_reflection(x in 0.01f64..0.99) {
        let prod = gamma(x).unwrap() * gamma(1.0 - x).unwrap();
        let want = std::f64::consts::PI / (std::f64::consts::PI * x).sin();
        prop_assert!(close(prod, want, 1e-13));
    }

    #[test]
    fn two_parameter_reduces_to_one(alpha in 0.1f64..2.0, z in -8.0f64..8.0) {
        prop_assume!(representable(alpha, z));
        let a = ml_one(alpha, z, &ctl()).unwrap();
        let b = ml_two(alpha, 1.0, z, &ctl()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn first_order_is_exponential(z in -20.0f64..20.0) {
        prop_assert!(close(ml_one(1.0, z, &ctl()).unwrap(), z.exp(), 1e-12));
    }

    // E_{α,β}(z) = 1/Γ(β) + z E_{α,α+β}(z)
    #[test]
    fn two_parameter_shift(alpha in 0.2f64..1.5, beta in 0.3f64..2.0, z in -4.0f64..4.0) {
        prop_assume!(representable(alpha, z));
        let lhs = ml_two(alpha, beta, z, &ctl()).unwrap();
        let rhs = 1.0 / gamma(beta).unwrap() + z * ml_two(alpha, alpha + beta, z, &ctl()).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn kernel_starts_at_one_and_decays(alpha in 0.1f64..1.0, lambda in -3.0f64..-0.01, t in 0.0f64..5.0) {
        let spec = DiscountSpec::new(alpha, lambda).unwrap();
        prop_assert_eq!(kernel(&spec, 0.0).unwrap(), 1.0);
        let k = kernel(&spec, t).unwrap();
        prop_assert!(k > 0.0 && k <= 1.0 + 1e-15);
        prop_assert!(kernel(&spec, t + 0.5).unwrap() <= k + 1e-15);
    }

    #[test]
    fn kernel_derivative_matches_difference(alpha in 0.2f64..1.0, lambda in -2.0f64..2.0, t in 0.3f64..3.0) {
        let spec = DiscountSpec::new(alpha, lambda).unwrap();
        let h = 1e-5;
        let fd = (kernel(&spec, t + h).unwrap() - kernel(&spec, t - h).unwrap()) / (2.0 * h);
        let d = kernel_deriv(&spec, t).unwrap();
        prop_assert!((fd - d).abs() < 1e-7 * (1.0 + d.abs()), "{fd} vs {d}");
    }

    #[test]
    fn l1_is_linear(mu in 0.1f64..0.9, c in -5.0f64..5.0) {
        let dt = 0.01;
        let mut a = HistoryBuffer::new(dt, 101).unwrap();
        let mut b = HistoryBuffer::new(dt, 101).unwrap();
        for i in 0..=100 {
            let t = i as f64 * dt;
            a.push(t, t * t).unwrap();
            b.push(t, c * t * t + 3.0).unwrap();
        }
        let order = FracOrder::new(mu).unwrap();
        let da = l1_frac_deriv(&a, order).unwrap();
        let db = l1_frac_deriv(&b, order).unwrap();
        prop_assert!((db - c * da).abs() < 1e-12 * (1.0 + da.abs() * c.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn defect_is_symmetric(alpha in 0.3f64..0.95, lambda in -1.0f64..1.0, t in 0.1f64..1.5, s in 0.1f64..1.5) {
        let spec = DiscountSpec::new(alpha, lambda).unwrap();
        let q = QuadratureConfig::default();
        let ts = delta_ml(&spec, t, s, &q).unwrap();
        let st = delta_ml(&spec, s, t, &q).unwrap();
        prop_assert!((ts - st).abs() < 1e-8, "{ts} vs {st}");
    }

    #[test]
    fn semigroup_identity_holds(alpha in 0.3f64..0.95, lambda in -1.0f64..1.0, t in 0.1f64..1.5, s in 0.1f64..1.5) {
        let spec = DiscountSpec::new(alpha, lambda).unwrap();
        let r = semigroup_residual(&spec, t, s, &QuadratureConfig::default()).unwrap();
        prop_assert!(r.abs() < 1e-8, "{r}");
    }
}

#[test]
fn l1_converges_for_power_functions() {
    for mu in [0.25, 0.5, 0.75] {
        let mut errs = Vec::new();
        for n in [250usize, 500, 1000] {
            let dt = 1.0 / n as f64;
            let mut h = HistoryBuffer::new(dt, n + 1).unwrap();
            for i in 0..=n {
                let t = i as f64 * dt;
                h.push(t, t * t).unwrap();
            }
            let got = l1_frac_deriv(&h, FracOrder::new(mu).unwrap()).unwrap();
            let want = 2.0 / gamma(3.0 - mu).unwrap();
            errs.push((got - want).abs());
        }
        let order = (errs[1] / errs[2]).log2();
        assert!(order >= 1.2, "mu = {mu}: order {order}, errors {errs:?}");
    }
}
