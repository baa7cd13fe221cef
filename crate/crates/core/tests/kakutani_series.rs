#![allow(clippy::excessive_precision)]

use cauchy_kakutani::hellinger::{summand_additive, DEFAULT_TOL};
use cauchy_kakutani::kakutani::{
    classify, kakutani_partial_sum, series_verdict, weighted_sequence, Method, ProductModel, SequenceSpec, Verdict,
};
use proptest::prelude::*;

// Per-term extended-precision quadrature of K(1/n), summed in 40-digit arithmetic.
const S_HARMONIC_400: f64 = 0.096_170_833_415_372_172;
const S_HARMONIC_1000: f64 = 0.096_264_419_472_020_421;
const K_0_2: f64 = 0.002_489_129_729_233_697_2;

fn power(a: f64, p: f64) -> SequenceSpec {
    SequenceSpec::PowerLaw {
        amplitude: a,
        exponent: p,
    }
}

fn unit() -> SequenceSpec {
    SequenceSpec::Constant { value: 1.0 }
}

fn suite() -> Vec<(SequenceSpec, Verdict)> {
    let mut v: Vec<_> = [(0.4, Verdict::Singular), (0.5, Verdict::Singular)]
        .into_iter()
        .chain([0.51, 0.75, 1.0, 2.0].map(|p| (p, Verdict::Equivalent)))
        .map(|(p, verdict)| (power(1.0, p), verdict))
        .collect();
    v.push((SequenceSpec::Constant { value: 0.1 }, Verdict::Singular));
    v.push((
        SequenceSpec::Geometric {
            amplitude: 1.0,
            ratio: 0.9,
        },
        Verdict::Equivalent,
    ));
    v
}

#[test]
fn classifier_suite_both_kinds() {
    for (spec, want) in suite() {
        let add = classify(&ProductModel::additive(spec.clone(), unit()).unwrap());
        let mul = classify(&ProductModel::multiplicative(spec.clone()).unwrap());
        assert_eq!(add.verdict, want, "additive {spec:?}");
        assert_eq!(mul.verdict, want, "multiplicative {spec:?}");
        assert_eq!(add.method, Method::SymbolicL2);
    }
}

#[test]
fn series_never_contradicts_classifier() {
    for (spec, _) in suite() {
        for model in [
            ProductModel::additive(spec.clone(), unit()).unwrap(),
            ProductModel::multiplicative(spec.clone()).unwrap(),
        ] {
            let symbolic = classify(&model).verdict;
            let numeric = series_verdict(&model, 2000, 500).unwrap();
            assert!(
                numeric.verdict == Verdict::Undetermined || numeric.verdict == symbolic,
                "{spec:?} {:?}: {:?} vs {symbolic:?}",
                model.kind(),
                numeric
            );
        }
    }
}

#[test]
fn harmonic_shift_reference_sums() {
    let m = ProductModel::additive(power(1.0, 1.0), unit()).unwrap();
    let s = kakutani_partial_sum(&m, 1000, DEFAULT_TOL).unwrap();
    assert!((s.sum - S_HARMONIC_1000).abs() < 1e-12, "{}", s.sum);
    assert!((s.rows[399].cumulative - S_HARMONIC_400).abs() < 1e-12);
    assert!(s.is_monotone());
    // the true remainder Σ_{n>1000} K(1/n) ≈ (1/16)·Σ_{n>1000} n^{-2}
    let approx_tail = 0.0625 * (1.0 / 1000.5);
    assert!(s.tail_low() <= approx_tail && approx_tail <= s.tail_high());
}

#[test]
fn constant_shift_doubles_exactly() {
    let m = ProductModel::additive(SequenceSpec::Constant { value: 0.2 }, unit()).unwrap();
    let k = summand_additive(0.2, DEFAULT_TOL).unwrap();
    assert!((k - K_0_2).abs() < 1e-15);
    for n in [10u64, 50, 120] {
        let s_n = kakutani_partial_sum(&m, n, DEFAULT_TOL).unwrap().sum;
        let s_2n = kakutani_partial_sum(&m, 2 * n, DEFAULT_TOL).unwrap().sum;
        assert!(((s_2n - s_n) - n as f64 * k).abs() <= 4.0 * f64::EPSILON * s_2n);
    }
}

#[test]
fn small_square_summable_shifts_stay_below_one_third() {
    let models = [
        SequenceSpec::Geometric {
            amplitude: 0.5,
            ratio: 0.5,
        },
        power(0.25, 1.0),
        power(0.25, 0.75),
        SequenceSpec::Explicit { values: vec![0.25; 16] },
    ];
    for spec in models {
        let m = ProductModel::additive(spec.clone(), unit()).unwrap();
        let n = m.len().map_or(200, |l| l as u64);
        let s = kakutani_partial_sum(&m, n, DEFAULT_TOL).unwrap();
        let bound = s.sum + s.tail_high();
        assert!(bound.is_finite() && bound <= 1.0 / 3.0, "{spec:?}: {bound}");
    }
}

#[test]
fn series_verdict_evidence_records_truncation() {
    let m = ProductModel::additive(power(1.0, 1.0), unit()).unwrap();
    let r = series_verdict(&m, 1000, 200).unwrap();
    assert_eq!(r.verdict, Verdict::Equivalent);
    assert_eq!(r.evidence.get("window"), Some(200.0));
    let slope = r.evidence.get("slope").unwrap();
    assert!((slope - 2.0).abs() < 0.01, "{slope}");
}

fn dyadic() -> impl Strategy<Value = f64> {
    (-8i32..8).prop_map(|k| 2f64.powi(k))
}

fn exponent() -> impl Strategy<Value = f64> {
    (1u32..16).prop_map(|k| k as f64 / 8.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rescaling_shift_and_scale_together_changes_nothing(
        a in dyadic(), p in exponent(), b in dyadic(), q in exponent(), c in dyadic(), s in exponent(),
    ) {
        let base = ProductModel::additive(power(a, p), power(b, q)).unwrap();
        let scaled = ProductModel::additive(power(a * c, p + s), power(b * c, q + s)).unwrap();
        prop_assert_eq!(classify(&base).verdict, classify(&scaled).verdict);
        for n in [1u64, 2, 7, 100, 12345] {
            prop_assert_eq!(weighted_sequence(&base, n).unwrap(), weighted_sequence(&scaled, n).unwrap());
        }
    }

    #[test]
    fn partial_sums_are_nondecreasing(
        values in proptest::collection::vec(-3.0f64..3.0, 1..40),
        multiplicative in any::<bool>(),
    ) {
        let spec = SequenceSpec::Explicit { values: values.iter().map(|v| if multiplicative { v.abs() * 0.3 - 0.45 } else { *v }).collect() };
        let m = if multiplicative {
            ProductModel::multiplicative(spec).unwrap()
        } else {
            ProductModel::additive(spec, unit()).unwrap()
        };
        let s = kakutani_partial_sum(&m, values.len() as u64, DEFAULT_TOL).unwrap();
        prop_assert!(s.is_monotone());
        prop_assert!(s.rows.iter().all(|r| r.summand >= 0.0));
    }
}
