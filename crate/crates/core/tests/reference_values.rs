//! Values frozen from an independent 60-digit evaluation
//! (`tests/oracles/reference_values.py`).

// Oracle digits are pasted verbatim.
#![allow(clippy::excessive_precision)]

use approx::assert_relative_eq;
use mlhjb::defect::{inner_f, semigroup_residual, small_s_bound};
use mlhjb::quadrature::QuadratureConfig;
use mlhjb::specfun::{gamma, ml_one, ml_two, SeriesControl};
use mlhjb::{DiscountSpec, Error};

fn ctl() -> SeriesControl {
    SeriesControl::default()
}

#[test]
fn mittag_leffler_one_parameter() {
    let cases = [
        (0.5, 1.0, 5.0089800807622834663),
        (0.5, -1.0, 0.42758357615580700441),
        (0.3, 0.5, 2.0620157899559994895),
        (0.5, -5.0, 0.11070463773306862637),
        (1.5, -10.0, -0.10971305425274014669),
    ];
    for (a, z, want) in cases {
        assert_relative_eq!(ml_one(a, z, &ctl()).unwrap(), want, max_relative = 1e-13);
    }
}

#[test]
fn mittag_leffler_two_parameter() {
    let cases = [
        (0.5, 0.5, 0.25, 0.90385017607393681575),
        (0.5, 0.5, 1.0, 5.5731696643100397533),
        (0.8, 0.8, -2.0, 0.092077465517931656239),
        (0.9, 1.7, 3.0, 13.741804970879952447),
    ];
    for (a, b, z, want) in cases {
        assert_relative_eq!(ml_two(a, b, z, &ctl()).unwrap(), want, max_relative = 1e-13);
    }
}

#[test]
fn large_negative_arguments() {
    let cases = [
        (0.5, 1.0, -6.5, 0.085805670104894601778),
        (0.5, 1.0, -8.0, 0.069985166200880927723),
        (0.3, 1.0, -3.0, 0.21180263319643578203),
        (0.1, 1.0, -1.5, 0.38582613336378369311),
        (0.5, 0.5, -7.0, 0.005589203243685752519),
        (0.8, 0.8, -25.0, 0.00030897006189147382117),
        (0.9, 1.0, -40.0, 0.002743449697792099487),
    ];
    for (a, b, z, want) in cases {
        assert_relative_eq!(ml_two(a, b, z, &ctl()).unwrap(), want, max_relative = 1e-12);
    }
}

#[test]
fn hopeless_cancellation_is_an_error() {
    assert!(matches!(ml_one(1.0, -60.0, &ctl()), Err(Error::NonConvergence(_))));
    assert!(matches!(ml_one(1.5, -300.0, &ctl()), Err(Error::NonConvergence(_))));
}

#[test]
fn half_order_product_gap() {
    // E_½(−1)² − E_½(−√2): the defect at t = s = 1 for α = ½, λ = −1
    let e1 = ml_one(0.5, -1.0, &ctl()).unwrap();
    let e2 = ml_one(0.5, -2f64.sqrt(), &ctl()).unwrap();
    assert_relative_eq!(e1 * e1 - e2, -0.15337628784815240461, max_relative = 1e-12);
}

#[test]
fn small_s_defect_values() {
    // The defect shrinks only like s^α as s → 0.
    let spec = DiscountSpec::new(0.5, -1.0).unwrap();
    let rows = small_s_bound(&spec, 1.0, &[0.1, 0.01, 0.001], &QuadratureConfig::default()).unwrap();
    let expected = [0.10521691239006119122, 0.042914463203173458375, 0.014703088214699423494];
    for (row, want) in rows.iter().zip(expected) {
        assert_relative_eq!(row.magnitude, want, max_relative = 1e-9);
    }
}

#[test]
fn gamma_values() {
    let cases = [
        (0.1, 9.5135076986687312858),
        (10.3, 716430.68906237640663),
        (170.5, 5.5620924145599996107e305),
        (-2.5, -0.94530872048294188123),
    ];
    for (x, want) in cases {
        assert_relative_eq!(gamma(x).unwrap(), want, max_relative = 1e-14);
    }
}

#[test]
fn inner_integral_matches_fine_trapezoid() {
    // The reference is a graded trapezoid sum, good to roughly 1e-8.
    let spec = DiscountSpec::new(0.5, -1.0).unwrap();
    let got = inner_f(&spec, 1.0, 0.5, &QuadratureConfig::default()).unwrap();
    assert_relative_eq!(got, -2.3034618435731613e-01, max_relative = 1e-7);
}

#[test]
fn defect_reproduces_product_gap() {
    let spec = DiscountSpec::new(0.5, -1.0).unwrap();
    let r = semigroup_residual(&spec, 1.0, 1.0, &QuadratureConfig::default()).unwrap();
    assert!(r.abs() < 1e-9, "{r}");
}
