//! Reference values computed independently at 30 digits (adaptive
//! Gauss-Legendre quadrature and root finding in arbitrary precision).

use contest_core::equilibrium::EquilibriumModel;
use contest_core::objective::{evaluate, evaluate_general, gradient, PosyTerm};
use contest_core::structure::vandermonde_minor;
use contest_core::{CostParams, ObjectiveSpec, Policy, QuadratureConfig};

const UNI5_QUALITY_B2: f64 = 0.437_009_592_382_019_968_41;
const TWO04_CONVEX024_B2: f64 = 0.444_140_000_765_179_788_46;
const TWO04_ORDERSTAT_B2: f64 = 0.553_756_421_785_787_428_02;
const TWO04_EXP15_B2: f64 = 1.938_316_774_177_970_444;
const TWO04_INVERSE_S_B2: f64 = 0.456_336_178_126_687_112_3;
const GENERAL3_CONVEX05_B2: f64 = 0.356_639_171_520_012_610_56;
const CDF_TWO06_N4_B15_Q03: f64 = 0.355_220_634_775_529_468_82;
const MINOR_N6: f64 = 0.0279;
const GRAD_TWO05: [f64; 4] = [
    0.507_057_562_228_270_534_48,
    0.437_176_973_750_370_815_62,
    0.388_468_969_859_242_312_86,
    0.350_633_491_789_396_313_55,
];

fn beta(b: f64) -> CostParams {
    CostParams::new(b).unwrap()
}

fn fine() -> QuadratureConfig {
    QuadratureConfig::trapezoid(200_000).unwrap()
}

#[test]
fn uniform_quality() {
    let v = evaluate(&ObjectiveSpec::convex(0.0).unwrap(), beta(2.0), &Policy::uni(5).unwrap(), &fine()).unwrap();
    assert!((v - UNI5_QUALITY_B2).abs() < 1e-8, "{v}");
}

#[test]
fn objectives_on_a_two_level_policy() {
    let p = Policy::two_level(5, 0.4).unwrap();
    let q = fine();
    let cases = [
        (ObjectiveSpec::convex(0.24).unwrap(), TWO04_CONVEX024_B2),
        (ObjectiveSpec::MaxOrderStat, TWO04_ORDERSTAT_B2),
        (ObjectiveSpec::exponential(vec![1.5], None).unwrap(), TWO04_EXP15_B2),
        (ObjectiveSpec::inverse_s(), TWO04_INVERSE_S_B2),
    ];
    for (spec, want) in cases {
        let v = evaluate(&spec, beta(2.0), &p, &q).unwrap();
        assert!((v - want).abs() < 1e-8, "{spec}: {v} vs {want}");
    }
    let manual = ObjectiveSpec::posynomial(vec![
        PosyTerm::new(2.0, 3.0),
        PosyTerm::new(-3.0, 2.0),
        PosyTerm::new(2.0, 1.0),
    ])
    .unwrap();
    let v = evaluate(&manual, beta(2.0), &p, &q).unwrap();
    assert!((v - TWO04_INVERSE_S_B2).abs() < 1e-8);
}

#[test]
fn general_form_with_positive_last_share() {
    let p = Policy::new(vec![0.5, 0.3, 0.2]).unwrap();
    let v = evaluate_general(&ObjectiveSpec::convex(0.5).unwrap(), beta(2.0), &p, &fine())
        .unwrap()
        .value;
    assert!((v - GENERAL3_CONVEX05_B2).abs() < 1e-7, "{v}");
}

#[test]
fn gradient_on_a_two_level_policy() {
    let p = Policy::two_level(5, 0.5).unwrap();
    let g = gradient(&ObjectiveSpec::convex(0.5).unwrap(), beta(1.5), &p, &fine()).unwrap();
    for (got, want) in g.values.iter().zip(GRAD_TWO05) {
        assert!((got - want).abs() < 1e-6, "{got} vs {want}");
    }
}

#[test]
fn equilibrium_cdf_value() {
    let m = EquilibriumModel::new(Policy::two_level(4, 0.6).unwrap(), beta(1.5)).unwrap();
    let f = m.cdf(0.3).unwrap();
    assert!((f - CDF_TWO06_N4_B15_Q03).abs() < 1e-10, "{f}");
}

#[test]
fn kernel_minor() {
    let v = vandermonde_minor(6, &[0.2, 0.5, 0.7], &[1, 3, 5]).unwrap();
    assert!((v - MINOR_N6).abs() < 1e-14, "{v}");
}
