use num_complex::Complex64;
use obslab::dynamics::{
    bump, evolve_eigen, evolve_mehler, evolve_resonant, fit_kernel_bound, gaussian, heat_witness, kernel_samples,
    l2_distance, l2_norm, mass_history, minimal_time_scan, sample, two_time_quotient, ComplexHeatKernel,
    MehlerKernel,
};
use obslab::{Error, Grid, Interval, RealSet, SetFamily, SpectrumTable};
use std::f64::consts::PI;

fn setup() -> (Grid, SpectrumTable) {
    let grid = Grid::with_spacing(12.0, 0.01).unwrap();
    (grid, SpectrumTable::hermite(120, grid))
}

fn states(grid: &Grid) -> Vec<Vec<Complex64>> {
    vec![
        gaussian(grid, 0.0),
        gaussian(grid, 1.5),
        sample(grid, |x| Complex64::from_polar((-0.5 * x * x).exp(), 2.0 * x)),
        sample(grid, |x| Complex64::new(x * (-0.5 * (x - 0.5).powi(2)).exp(), 0.0)),
    ]
}

#[test]
fn eigen_and_mehler_agree() {
    let (grid, table) = setup();
    for f in states(&grid) {
        for t in [0.3, 0.9, 1.2, 2.5] {
            let a = evolve_eigen(&f, t, &table).unwrap();
            let b = evolve_mehler(&f, t, &grid).unwrap();
            let d = l2_distance(&grid, &a.psi, &b.psi);
            assert!(d <= 1e-6, "t={t}: {d}");
        }
    }
}

#[test]
fn evolution_is_unitary() {
    let (grid, table) = setup();
    for f in states(&grid) {
        let n0 = l2_norm(&grid, &f);
        for t in [0.1, 1.0, 7.3] {
            let u = evolve_eigen(&f, t, &table).unwrap();
            assert!((u.norm - n0).abs() < 1e-10 * n0);
        }
    }
}

#[test]
fn group_law_holds() {
    let (grid, table) = setup();
    let f = gaussian(&grid, 1.0);
    let (s, t) = (0.4, 0.7);
    let once = evolve_eigen(&f, s + t, &table).unwrap();
    let mid = evolve_eigen(&f, s, &table).unwrap();
    let twice = evolve_eigen(&mid.psi, t, &table).unwrap();
    assert!(l2_distance(&grid, &once.psi, &twice.psi) < 1e-9);
    let m1 = evolve_mehler(&f, s, &grid).unwrap();
    let m2 = evolve_mehler(&m1.psi, t, &grid).unwrap();
    assert!(l2_distance(&grid, &once.psi, &m2.psi) < 1e-6);
}

#[test]
fn modulus_is_pi_periodic() {
    let (grid, table) = setup();
    let f = &states(&grid)[3];
    for t in [0.2, 1.1] {
        let a = evolve_eigen(f, t, &table).unwrap().modulus();
        let b = evolve_eigen(f, t + PI, &table).unwrap().modulus();
        let d = a.iter().zip(&b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        assert!(d < 1e-10);
    }
}

#[test]
fn even_data_returns_in_modulus_at_half_period() {
    let (grid, table) = setup();
    let f = sample(&grid, |x| Complex64::new((-0.5 * x * x).exp() * (1.0 + 0.3 * x * x), 0.0));
    let u = evolve_eigen(&f, PI / 2.0, &table).unwrap();
    let d = u.psi.iter().zip(&f).fold(0.0f64, |m, (a, b)| m.max((a.norm() - b.norm()).abs()));
    assert!(d < 1e-10);
    let r = evolve_resonant(&f, 1, &grid).unwrap();
    assert!(l2_distance(&grid, &u.psi, &r.psi) < 1e-10);
}

#[test]
fn resonant_reflection_matches_eigen_for_odd_data() {
    let (grid, table) = setup();
    let f = &states(&grid)[3];
    for multiple in 1..=4u64 {
        let a = evolve_eigen(f, multiple as f64 * PI / 2.0, &table).unwrap();
        let b = evolve_resonant(f, multiple, &grid).unwrap();
        assert!(l2_distance(&grid, &a.psi, &b.psi) < 1e-9, "multiple {multiple}");
    }
    assert!(matches!(MehlerKernel::new(PI / 2.0), Err(Error::ResonantTime { multiple: 1, .. })));
}

#[test]
fn coherent_state_follows_the_classical_orbit() {
    // |e^{−itH} φ₀(· − a)|² = π^{−1/2} exp(−(x − a cos 2t)²)
    let (grid, table) = setup();
    let a = 2.0;
    let f = gaussian(&grid, a);
    for t in [0.25, PI / 4.0, 1.0] {
        let u = evolve_eigen(&f, t, &table).unwrap();
        let c = a * (2.0 * t).cos();
        for (i, z) in u.psi.iter().enumerate() {
            let x = grid.x(i);
            let want = PI.powf(-0.5) * (-(x - c).powi(2)).exp();
            assert!((z.norm_sqr() - want).abs() < 1e-10, "t={t} x={x}");
        }
    }
}

#[test]
fn quarter_period_is_a_fourier_transform() {
    // e^{−i(π/4)H} f = e^{−iπ/4} F f, F f(x) = (2π)^{−1/2}∫ e^{−ixy} f(y) dy
    let (grid, table) = setup();
    let a = 1.3;
    let f = sample(&grid, |x| Complex64::new(PI.powf(-0.25) * (-0.5 * (x - a).powi(2)).exp(), 0.0));
    let u = evolve_eigen(&f, PI / 4.0, &table).unwrap();
    let phase = Complex64::from_polar(1.0, -PI / 4.0);
    for (i, z) in u.psi.iter().enumerate() {
        let x = grid.x(i);
        let ft = Complex64::from_polar(PI.powf(-0.25) * (-0.5 * x * x).exp(), -a * x);
        assert!((z - phase * ft).norm() < 1e-10, "x={x}");
    }
}

#[test]
fn heat_kernel_is_a_semigroup_and_damps_the_ground_state() {
    let grid = Grid::with_spacing(15.0, 0.005).unwrap();
    let z1 = Complex64::new(0.3, 0.4);
    let z2 = Complex64::new(0.5, -0.2);
    let (k1, k2) = (ComplexHeatKernel::new(z1).unwrap(), ComplexHeatKernel::new(z2).unwrap());
    let k12 = ComplexHeatKernel::new(z1 + z2).unwrap();
    for (x, y) in [(0.0, 0.0), (1.0, -0.5), (2.0, 1.5)] {
        let conv: Complex64 = grid.nodes().iter().map(|&w| k1.eval(x, w) * k2.eval(w, y)).sum::<Complex64>() * grid.h();
        assert!((conv - k12.eval(x, y)).norm() < 1e-10, "({x}, {y})");
    }
    // ∫K_z(x, y)φ₀(y)dy = e^{−z}φ₀(x)
    let phi0 = |x: f64| PI.powf(-0.25) * (-0.5 * x * x).exp();
    for x in [0.0, 0.7, -2.0] {
        let v: Complex64 = grid.nodes().iter().map(|&y| k1.eval(x, y) * phi0(y)).sum::<Complex64>() * grid.h();
        assert!((v - (-z1).exp() * phi0(x)).norm() < 1e-10);
    }
}

#[test]
fn kernel_bound_constant_transfers_between_seeds() {
    let fit = fit_kernel_bound(&kernel_samples(1, 10_000, 8.0, (0.01, 3.0), 2.0)).unwrap();
    assert!(fit.constant <= 1.0 / (4.0 * PI).sqrt() + 1e-12);
    let check = fit_kernel_bound(&kernel_samples(2, 10_000, 8.0, (0.01, 3.0), 2.0)).unwrap();
    assert!(check.constant <= 1.01 * fit.constant);
}

#[test]
fn heat_witness_lower_bound_holds() {
    let set = RealSet::generate(&SetFamily::PeriodicPattern { period: 1.0 }, 200.0).unwrap();
    for y0 in [0.0, 1.0, 3.0] {
        let w = heat_witness(&set, y0, 1.0, 10.0).unwrap();
        assert!(w.lhs_ok, "y0={y0}: {} < {}", w.lhs, w.lhs_bound);
        assert!(w.tail <= 0.5 * w.lhs + 1e-15);
        assert!(w.defect < 1e-8);
    }
}

#[test]
fn two_time_quotient_blows_up_only_at_resonance() {
    let grid = Grid::with_spacing(24.0, 0.01).unwrap();
    let table = SpectrumTable::hermite(150, grid);
    let f = bump(&grid, 5.0);
    let inf = f64::INFINITY;
    let e = RealSet::from_intervals([Interval { lo: -inf, hi: -5.0 }, Interval { lo: 5.0, hi: inf }]);
    let resonant = two_time_quotient(&f, 0.0, PI / 2.0, &e, &e, &table).unwrap();
    let generic = two_time_quotient(&f, 0.0, 1.0, &e, &e, &table).unwrap();
    assert!(resonant.resonant && !generic.resonant);
    assert!(resonant.quotient > 1e4 * generic.quotient, "{resonant:?} {generic:?}");
    assert!(generic.envelope_exponent.is_some());
}

#[test]
fn mass_history_matches_direct_evolution() {
    let (grid, table) = setup();
    let f = gaussian(&grid, 1.0);
    let set = RealSet::generate(&SetFamily::HalfLine { a: 0.5 }, 20.0).unwrap();
    let times = [0.0, 0.4, 1.3];
    let hist = mass_history(&f, &set, &table, &times).unwrap();
    for (t, m) in times.iter().zip(hist) {
        let u = evolve_eigen(&f, *t, &table).unwrap();
        let direct = obslab::dynamics::mass_on(&set, &grid, &u.psi).unwrap();
        assert!((m - direct).abs() < 1e-12);
    }
}

#[test]
fn minimal_time_scan_separates_short_and_long_times() {
    let set = RealSet::generate(&SetFamily::HalfLine { a: 1.0 }, 100.0).unwrap();
    let table = minimal_time_scan(&set, &[PI / 2.0, PI / 2.0 + 0.3], &[5.0, 20.0]).unwrap();
    assert!(table.stable);
    assert!(table.q[1][0] < table.q[0][0]);
    assert!(table.q[1][1] > 0.05);
    for (row, exact) in table.q.iter().zip(&table.q_exact) {
        for (q, e) in row.iter().zip(exact) {
            assert!((q - e).abs() <= 1e-2 * e.max(1e-4));
        }
    }
    let mut buf = Vec::new();
    table.write_csv(&mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 3 + 4);
}
