use obslab::spectra::{check_weyl_law, gap_profile, hermite_functions, sign_changes, solve_spectrum};
use obslab::{Grid, Parity, Potential, SpectrumTable};
use std::f64::consts::PI;

#[test]
fn harmonic_levels_are_odd_integers() {
    let t = solve_spectrum(&Potential::monomial(1).unwrap(), 20, 1e-9).unwrap();
    for p in &t.pairs {
        let exact = 2.0 * p.k as f64 - 1.0;
        assert!((p.lambda - exact).abs() / exact < 1e-6, "k={}: {}", p.k, p.lambda);
    }
}

#[test]
fn anharmonic_levels_match_literature() {
    // high-precision values for −u'' + x⁴u and −u'' + x⁶u
    let quartic = [1.060_362_090_484_183, 3.799_673_029_801_394, 7.455_697_937_986_738, 11.644_745_511_378_162];
    let t = solve_spectrum(&Potential::monomial(2).unwrap(), 4, 1e-10).unwrap();
    for (p, e) in t.pairs.iter().zip(quartic) {
        assert!((p.lambda - e).abs() / e < 1e-7, "k={}: {} vs {e}", p.k, p.lambda);
    }
    let t = solve_spectrum(&Potential::monomial(3).unwrap(), 1, 1e-10).unwrap();
    assert!((t.pairs[0].lambda - 1.144_802_453_797_052).abs() < 1e-7);
}

#[test]
fn eigenfunctions_are_orthonormal_with_parity_and_nodes() {
    let t = solve_spectrum(&Potential::monomial(2).unwrap(), 12, 1e-8).unwrap();
    let g = t.gram();
    for (i, row) in g.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let e = if i == j { 1.0 } else { 0.0 };
            assert!((v - e).abs() < 1e-8, "gram[{i}][{j}] = {v}");
        }
    }
    for p in &t.pairs {
        assert_eq!(p.parity, Some(Parity::of_index(p.k)));
        assert_eq!(sign_changes(&p.phi, 1e-8), p.k - 1);
        let c = t.grid.center();
        let s = Parity::of_index(p.k).sign();
        for d in 1..20 {
            assert!((p.phi[c + d] - s * p.phi[c - d]).abs() < 1e-9);
        }
    }
}

#[test]
fn low_hermite_functions_match_closed_forms() {
    for x in [-3.0f64, -0.4, 0.0, 1.1, 5.0] {
        let g = PI.powf(-0.25) * (-0.5 * x * x).exp();
        let h = hermite_functions(3, x);
        let want = [g, 2f64.sqrt() * x * g, (2.0 * x * x - 1.0) / 2f64.sqrt() * g];
        for (a, b) in h.iter().zip(want) {
            assert!((a - b).abs() < 1e-14, "x={x}: {a} vs {b}");
        }
    }
}

#[test]
fn hermite_table_is_orthonormal_on_its_grid() {
    let t = SpectrumTable::hermite(30, Grid::with_spacing(12.0, 0.01).unwrap());
    let g = t.gram();
    for (i, row) in g.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let e = if i == j { 1.0 } else { 0.0 };
            assert!((v - e).abs() < 1e-10);
        }
    }
}

#[test]
fn harmonic_gaps_are_constant() {
    let t = solve_spectrum(&Potential::monomial(1).unwrap(), 20, 1e-9).unwrap();
    let g = gap_profile(&t).unwrap();
    assert!((g.min_gap - 2.0).abs() < 1e-4);
    assert!(g.tail_slope.abs() < 0.02);
}

#[test]
fn quartic_gaps_grow() {
    let t = solve_spectrum(&Potential::monomial(2).unwrap(), 40, 1e-8).unwrap();
    let g = gap_profile(&t).unwrap();
    assert!((g.tail_slope - 1.0 / 3.0).abs() < 0.05, "{}", g.tail_slope);
    assert!(g.gaps.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn weyl_residuals_shrink() {
    let t = solve_spectrum(&Potential::monomial(2).unwrap(), 40, 1e-8).unwrap();
    let w = check_weyl_law(&t).unwrap();
    assert!((w.target_exponent - 4.0 / 3.0).abs() < 1e-15);
    let r10 = w.residuals[9].1.abs();
    let r40 = w.residuals[39].1.abs();
    assert!(r40 < r10 && r40 < 0.03, "{r10} {r40}");
}

#[test]
fn csv_has_header_and_rows() {
    let t = solve_spectrum(&Potential::monomial(1).unwrap(), 5, 1e-8).unwrap();
    let mut buf = Vec::new();
    t.write_csv(&mut buf).unwrap();
    let s = String::from_utf8(buf).unwrap();
    let mut lines = s.lines();
    assert_eq!(lines.next().unwrap(), "x,phi_1,phi_2,phi_3,phi_4,phi_5");
    assert_eq!(lines.count(), t.grid.n);
}

#[test]
fn bad_inputs_are_rejected() {
    assert!(Potential::monomial(0).is_err());
    assert!(solve_spectrum(&Potential::monomial(1).unwrap(), 0, 1e-8).is_err());
}
