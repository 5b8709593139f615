use num_complex::Complex64;
use obslab::dynamics::{gaussian, l2_norm, ComplexHeatKernel};
use obslab::observability::{cell_weights, eigenmass, nazarov_constant};
use obslab::spectra::solve_spectrum;
use obslab::{Grid, Interval, Potential, RealSet, SpectrumTable};
use proptest::prelude::*;
use std::f64::consts::PI;
use std::sync::OnceLock;

fn table(m: u32) -> &'static SpectrumTable {
    static T1: OnceLock<SpectrumTable> = OnceLock::new();
    static T2: OnceLock<SpectrumTable> = OnceLock::new();
    let cell = if m == 1 { &T1 } else { &T2 };
    cell.get_or_init(|| solve_spectrum(&Potential::monomial(m).unwrap(), 30, 1e-8).unwrap())
}

prop_compose! {
    fn interval_union(max_pieces: usize, reach: f64)
        (pieces in prop::collection::vec((-reach..reach, 0.0..reach / 4.0), 1..=max_pieces)) -> RealSet {
        RealSet::from_intervals(pieces.into_iter().map(|(lo, len)| Interval::new(lo, lo + len).unwrap()))
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn parity_fold_never_gains_mass(set in interval_union(6, 8.0), m in 1u32..=2) {
        let t = table(m);
        let r = eigenmass(&set, t).unwrap();
        let folded = r.folded_masses.unwrap();
        for (e, f) in r.masses.iter().zip(&folded) {
            prop_assert!(*e >= f - 1e-9, "{} < {}", e, f);
        }
    }

    #[test]
    fn union_and_intersection_are_additive(a in interval_union(5, 20.0), b in interval_union(5, 20.0)) {
        let w = Interval::new(-30.0, 30.0).unwrap();
        let lhs = a.union(&b).measure_in(w).unwrap() + a.intersect(&b).measure_in(w).unwrap();
        let rhs = a.measure_in(w).unwrap() + b.measure_in(w).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-9);
    }

    #[test]
    fn window_measure_is_bounded_and_monotone(set in interval_union(6, 20.0), lo in -25.0..25.0f64, len in 0.0..10.0f64, extra in 0.0..5.0f64) {
        let w = Interval::new(lo, lo + len).unwrap();
        let wider = Interval::new(lo - extra, lo + len + extra).unwrap();
        let m = set.measure_in(w).unwrap();
        prop_assert!((-1e-12..=len + 1e-12).contains(&m));
        prop_assert!(set.measure_in(wider).unwrap() >= m - 1e-12);
    }

    #[test]
    fn reflection_preserves_symmetric_windows(set in interval_union(6, 20.0), x in 0.1..30.0f64) {
        let w = Interval::new(-x, x).unwrap();
        prop_assert!((set.measure_in(w).unwrap() - set.reflect().measure_in(w).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn cell_weights_lie_in_the_unit_interval(set in interval_union(6, 8.0)) {
        let grid = Grid::new(10.0, 201).unwrap();
        for w in cell_weights(&set, &grid).unwrap() {
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&w));
        }
    }

    #[test]
    fn eigenmasses_lie_in_the_unit_interval(set in interval_union(6, 8.0)) {
        let r = eigenmass(&set, table(1)).unwrap();
        for e in r.masses {
            prop_assert!((-1e-12..=1.0 + 1e-9).contains(&e));
        }
    }

    #[test]
    fn kernel_ratio_never_exceeds_the_gaussian_sup(x in -8.0..8.0f64, y in -8.0..8.0f64, s in 0.01..3.0f64, t in -2.0..2.0f64) {
        let k = ComplexHeatKernel::new(Complex64::new(s, t)).unwrap();
        prop_assert!(k.bound_ratio(x, y) <= 1.0 / (4.0 * PI).sqrt() + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn nazarov_constant_is_symmetric_and_at_least_one(a in 0.0..4.0f64, b in 0.0..4.0f64) {
        let p = nazarov_constant(a, b, 32).unwrap();
        let q = nazarov_constant(b, a, 32).unwrap();
        if p.best_constant.is_finite() && p.best_constant < 1e6 {
            prop_assert!((p.best_constant - q.best_constant).abs() <= 1e-8 * p.best_constant);
        } else {
            prop_assert!(q.best_constant > 1e5);
        }
        prop_assert!(p.best_constant >= 1.0 - 1e-12);
    }

    #[test]
    fn nazarov_constant_grows_with_the_set(a in 0.0..3.0f64, b in 0.0..3.0f64, d in 0.0..1.0f64) {
        let small = nazarov_constant(a, b, 32).unwrap();
        let large = nazarov_constant(a + d, b, 32).unwrap();
        prop_assert!(large.best_constant >= small.best_constant * (1.0 - 1e-10));
    }

    #[test]
    fn mehler_evolution_preserves_the_norm(shift in -2.0..2.0f64, t in 0.3..2.8f64) {
        prop_assume!((t - PI / 2.0).abs() > 0.2);
        let grid = Grid::with_spacing(10.0, 0.01).unwrap();
        let f = gaussian(&grid, shift);
        let u = obslab::dynamics::evolve_mehler(&f, t, &grid).unwrap();
        prop_assert!((u.norm - l2_norm(&grid, &f)).abs() < 1e-8);
    }
}
