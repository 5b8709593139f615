use obslab::spectra::solve_spectrum;
use obslab::wkb::{
    amplitude_constant, fit_amplitudes, liouville_frame, numeric_zeros, phase_integrals, s_minus, s_plus, scaling_fits,
    Region,
};
use obslab::Potential;
use std::f64::consts::PI;

fn table(m: u32, k: usize) -> obslab::SpectrumTable {
    solve_spectrum(&Potential::monomial(m).unwrap(), k, 1e-8).unwrap()
}

#[test]
fn harmonic_inner_phase_closed_form() {
    // ∫₀ˣ √(μ² − t²) dt = ½(x√(μ² − x²) + μ² asin(x/μ))
    for (mu, x) in [(3.0f64, 1.0f64), (5.0, 4.9), (2.0, 0.3)] {
        let exact = 0.5 * (x * (mu * mu - x * x).sqrt() + mu * mu * (x / mu).asin());
        assert!((s_minus(1, mu, x).unwrap() - exact).abs() < 1e-10);
    }
}

#[test]
fn harmonic_outer_phase_closed_form() {
    // ∫_μ^x √(t² − μ²) dt = ½(x√(x² − μ²) − μ² acosh(x/μ))
    for (mu, x) in [(3.0f64, 4.0f64), (2.0, 7.0)] {
        let exact = 0.5 * (x * (x * x - mu * mu).sqrt() - mu * mu * (x / mu).acosh());
        assert!((s_plus(1, mu, x).unwrap() - exact).abs() < 1e-10);
    }
}

#[test]
fn quantisation_matches_half_integer_rule() {
    // Bohr–Sommerfeld: 2 S⁻(μ_k) ≈ (k − ½)π
    let t = table(2, 40);
    for k in [10, 25, 40] {
        let p = phase_integrals(&t, k, t.pairs[k - 1].lambda.powf(0.25)).unwrap();
        let expect = (k as f64 - 0.5) * PI;
        assert!((2.0 * p.s_minus - expect).abs() / expect < 1e-2, "k={k}: {}", 2.0 * p.s_minus);
        assert!(p.s_plus.abs() < 1e-12);
    }
}

#[test]
fn zeros_agree_inside_the_amplitude_window() {
    for m in [1, 2] {
        let t = table(m, 40);
        for k in [25, 32, 40] {
            let prof = fit_amplitudes(&t, k).unwrap();
            let pair = &t.pairs[k - 1];
            let x_max = prof.osc_fit.hi;
            let predicted: Vec<f64> = prof.predicted_zeros().into_iter().filter(|z| *z < x_max).collect();
            let numeric = numeric_zeros(&t.grid, &pair.phi, x_max);
            let h = t.grid.h();
            assert!(!predicted.is_empty());
            for z in &predicted {
                let nearest = numeric.iter().map(|n| (n - z).abs()).fold(f64::INFINITY, f64::min);
                assert!(nearest <= h, "m={m} k={k} z={z}: nearest numeric zero {nearest} away, h={h}");
            }
        }
    }
}

#[test]
fn wkb_stays_inside_five_budgets() {
    for m in [1, 2] {
        let t = table(m, 40);
        for k in [25, 32, 40] {
            let prof = fit_amplitudes(&t, k).unwrap();
            assert!(prof.osc_fit.max_budget_ratio <= 5.0, "m={m} k={k}: {}", prof.osc_fit.max_budget_ratio);
            assert_eq!(prof.eval(0.0).region, Region::Oscillatory);
            assert_eq!(prof.eval(2.0 * prof.mu).region, Region::Tail);
        }
    }
}

#[test]
fn amplitude_and_constant_exponents() {
    for m in [1, 2] {
        let t = table(m, 40);
        let r = scaling_fits(&t, &[25, 32, 40]).unwrap();
        let target = (m as f64 - 1.0) / 2.0;
        assert!((r.osc_slope - target).abs() < 0.1, "m={m}: {}", r.osc_slope);
        let ctarget = 0.25 - 0.25 / m as f64;
        assert!((r.constant_slope - ctarget).abs() < 0.1, "m={m}: {}", r.constant_slope);
    }
}

#[test]
fn liouville_constant_of_hermite_functions() {
    // φ_k(0)² = n!/(2ⁿ((n/2)!)²√π) with n = k − 1 even, and |C| = λ^{1/4}|φ(0)|
    let t = table(1, 9);
    for k in [1usize, 3, 5, 9] {
        let n = (k - 1) as f64;
        let lg = statrs::function::gamma::ln_gamma;
        let ln_sq = lg(n + 1.0) - n * 2f64.ln() - 2.0 * lg(n / 2.0 + 1.0) - 0.5 * PI.ln();
        let phi0 = ln_sq.exp().sqrt();
        let expect = (2.0 * k as f64 - 1.0).powf(0.25) * phi0;
        let got = amplitude_constant(&t, k).unwrap();
        // φ carries the O(h²) error of the finest grid; only λ is extrapolated
        assert!((got - expect).abs() < 1e-4 * expect, "k={k}: {got} vs {expect}");
        let frame = liouville_frame(&t, k).unwrap();
        assert_eq!(frame.w0prime, 0.0);
    }
}

#[test]
fn non_monomial_potential_is_rejected() {
    let pot = Potential::ShiftedPower { coeff: 1.0, c: 1.5 };
    let t = solve_spectrum(&pot, 3, 1e-6).unwrap();
    assert!(fit_amplitudes(&t, 2).is_err());
}
