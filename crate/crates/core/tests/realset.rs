use obslab::realset::{classify, GapRule, ThickVerdict, WeakVerdict};
use obslab::{Interval, RealSet, SetFamily};

fn iv(lo: f64, hi: f64) -> Interval {
    Interval::new(lo, hi).unwrap()
}

// brute-force midpoint count as an independent measure oracle
fn sampled_measure(set: &RealSet, w: Interval, n: usize) -> f64 {
    let h = w.len() / n as f64;
    (0..n).filter(|&i| set.contains(w.lo + (i as f64 + 0.5) * h)).count() as f64 * h
}

#[test]
fn measures_agree_with_sampling() {
    let fams = [
        SetFamily::HalfLine { a: 0.3 },
        SetFamily::Bounded { r: 2.5 },
        SetFamily::PeriodicPattern { period: 0.7 },
        SetFamily::DyadicGap { rule: GapRule::INDEX },
        SetFamily::PolynomialGap { eps: 0.5 },
    ];
    for fam in &fams {
        let set = RealSet::generate(fam, 200.0).unwrap();
        for w in [iv(-10.0, 10.0), iv(3.3, 47.1), iv(-150.0, -20.0)] {
            let exact = set.measure_in(w).unwrap();
            let approx = sampled_measure(&set, w, 2_000_000);
            assert!((exact - approx).abs() < 1e-3, "{fam:?} {w}: {exact} vs {approx}");
        }
    }
}

#[test]
fn periodic_pattern_has_half_density() {
    let set = RealSet::generate(&SetFamily::PeriodicPattern { period: 1.0 }, 100.0).unwrap();
    for x in [1.0, 10.0, 50.0, 99.0] {
        assert!((set.symmetric_density(x).unwrap() - 1.0).abs() < 1e-12);
    }
    assert!((set.measure_in(iv(0.0, 10.0)).unwrap() - 5.0).abs() < 1e-12);
}

#[test]
fn dyadic_pieces_match_closed_form() {
    // piece j on the positive side has length 2^j − j
    let set = RealSet::generate(&SetFamily::DyadicGap { rule: GapRule::INDEX }, 64.0).unwrap();
    for j in 1..5 {
        let lo = 2f64.powi(j);
        let got = set.measure_in(iv(lo, 2.0 * lo)).unwrap();
        assert!((got - (lo - j as f64)).abs() < 1e-12, "j={j}: {got}");
    }
}

#[test]
fn polynomial_gap_measure_is_a_partial_sum() {
    let set = RealSet::generate(&SetFamily::PolynomialGap { eps: 1.0 }, 1000.0).unwrap();
    let expect: f64 = (1..100).map(|j| 1.0 / (j as f64 + 1.0)).sum();
    let got = set.measure_in(iv(0.0, 100.0)).unwrap();
    assert!((got - expect).abs() < 1e-9);
}

#[test]
fn reflection_and_fold() {
    let set = RealSet::from_intervals([iv(-7.0, -5.0), iv(1.0, 2.0)]);
    let r = set.reflect();
    assert!(r.contains(-1.5) && !r.contains(1.5) && r.contains(6.0));
    let folded = set.parity_fold();
    assert!(folded.contains(6.0) && folded.contains(1.5) && !folded.contains(-6.0) && !folded.contains(3.0));
    let w = iv(-10.0, 10.0);
    assert!((folded.measure_in(w).unwrap() - set.measure_in(w).unwrap()).abs() < 1e-12);
}

#[test]
fn union_and_intersection_measures_add_up() {
    let a = RealSet::from_intervals([iv(0.0, 3.0), iv(4.0, 6.0)]);
    let b = RealSet::from_intervals([iv(2.0, 5.0)]);
    let w = iv(-1.0, 10.0);
    let lhs = a.union(&b).measure_in(w).unwrap() + a.intersect(&b).measure_in(w).unwrap();
    let rhs = a.measure_in(w).unwrap() + b.measure_in(w).unwrap();
    assert!((lhs - rhs).abs() < 1e-12);
}

#[test]
fn named_families_classify_as_expected() {
    let cases = [
        (SetFamily::HalfLine { a: 0.0 }, false, true),
        (SetFamily::Bounded { r: 2.0 }, false, false),
        (SetFamily::PeriodicPattern { period: 1.0 }, true, true),
        (SetFamily::DyadicGap { rule: GapRule::INDEX }, false, true),
        (SetFamily::DyadicGap { rule: GapRule::constant(1.0) }, true, true),
        (SetFamily::PolynomialGap { eps: 0.5 }, false, false),
    ];
    for (fam, thick, weak) in cases {
        let horizon = fam.min_classify_horizon().max(64.0);
        let set = RealSet::generate(&fam, horizon).unwrap();
        let v = classify(&set, horizon, 0.05).unwrap();
        assert_eq!(v.is_thick(), thick, "{fam:?}");
        assert_eq!(v.is_weakly_thick(), weak, "{fam:?}");
        if let ThickVerdict::Thick { gamma, .. } = v.thick {
            assert!(gamma > 0.0);
        }
        if let WeakVerdict::NotWeaklyThick { sequence } = &v.weakly_thick {
            assert!(sequence.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-12), "{fam:?} {sequence:?}");
        }
    }
}

#[test]
fn explicit_bounded_set_is_neither() {
    let set = RealSet::from_intervals([iv(-1.0, 1.0)]);
    let v = classify(&set, 400.0, 0.1).unwrap();
    assert!(!v.is_thick() && !v.is_weakly_thick());
}

#[test]
fn horizon_below_family_minimum_is_an_error() {
    let fam = SetFamily::PolynomialGap { eps: 0.5 };
    let set = RealSet::generate(&fam, 100.0).unwrap();
    assert!(classify(&set, 100.0, 0.1).is_err());
}

#[test]
fn spec_strings_and_json_round_trip() {
    for s in ["halfline:1", "bounded:2", "periodic:1", "dyadic"] {
        let fam: SetFamily = s.parse().unwrap();
        let json = serde_json::to_string(&fam).unwrap();
        let back: SetFamily = serde_json::from_str(&json).unwrap();
        assert_eq!(fam, back);
    }
}
