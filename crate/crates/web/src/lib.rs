//! Browser bindings for three interactive views: the spectrum of `x^{2m}`,
//! eigenfunction masses on a set, and harmonic propagation of a shifted
//! Gaussian. Each export returns a JSON string; errors come back as
//! `{"error": "..."}` so the page never has to catch exceptions.

use num_complex::Complex64;
use obslab::dynamics::{evolve_eigen, gaussian, mass_on};
use obslab::observability::eigenmass;
use obslab::realset::classify;
use obslab::spectra::solve_spectrum;
use obslab::{Grid, Potential, RealSet, Result, SetFamily, SpectrumTable};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Points per curve sent to the page.
pub const PLOT_POINTS: usize = 400;
pub const MAX_LEVELS: usize = 80;
const ACCURACY: f64 = 1e-6;
const CLASSIFY_STEP: f64 = 0.05;
const PROPAGATOR_MODES: usize = 80;
const PROPAGATOR_HALF_WIDTH: f64 = 12.0;
const PROPAGATOR_NODES: usize = 1201;
/// Largest `|shift|` whose Gaussian is captured by the propagator modes.
pub const MAX_SHIFT: f64 = 6.0;

fn stride(n: usize) -> usize {
    n.div_ceil(PLOT_POINTS).max(1)
}

fn downsample<T: Copy>(v: &[T]) -> Vec<T> {
    v.iter().step_by(stride(v.len())).copied().collect()
}

fn checked_levels(k: usize) -> Result<usize> {
    if k == 0 || k > MAX_LEVELS {
        return Err(obslab::Error::InvalidArgument(format!("K must lie in 1..={MAX_LEVELS}, got {k}")));
    }
    Ok(k)
}

fn clipped(set: &RealSet, w: f64) -> Vec<[f64; 2]> {
    set.intervals().iter().filter(|iv| iv.hi > -w && iv.lo < w).map(|iv| [iv.lo.max(-w), iv.hi.min(w)]).collect()
}

fn table(m: u32, k: usize) -> Result<SpectrumTable> {
    solve_spectrum(&Potential::monomial(m)?, checked_levels(k)?, ACCURACY)
}

/// Eigenvalues plus the first `shown` eigenfunctions, sampled on a common
/// downsampled grid.
pub fn spectrum(m: u32, k: usize, shown: usize) -> Result<Value> {
    let t = table(m, k)?;
    let x = downsample(&t.grid.nodes());
    let phis: Vec<Vec<f64>> = t.pairs.iter().take(shown).map(|p| downsample(&p.phi)).collect();
    Ok(json!({
        "m": m,
        "lambdas": t.lambdas(),
        "weyl_b": t.weyl_b,
        "min_gap": t.min_gap,
        "x": x,
        "phis": phis,
    }))
}

/// Masses `∫_E |φ_k|²` and the thickness verdict for an inline set such as
/// `periodic:1` or `intervals:-1,1;2,3`.
pub fn setmass(set: &str, m: u32, k: usize) -> Result<Value> {
    let family: SetFamily = set.parse()?;
    let t = table(m, k)?;
    let horizon = family.min_classify_horizon().max(t.grid.half_width + 1.0).max(100.0);
    let realset = RealSet::generate(&family, horizon)?;
    let verdict = classify(&realset, horizon, CLASSIFY_STEP)?;
    let report = eigenmass(&realset, &t)?;
    let w = t.grid.half_width;
    Ok(json!({
        "masses": report.masses,
        "inf_mass": report.inf_mass,
        "tail_slope": report.tail_slope,
        "verdict": report.verdict,
        "thick": verdict.thick,
        "weakly_thick": verdict.weakly_thick,
        "window": w,
        "intervals": clipped(&realset, w),
    }))
}

/// `|e^{−itH} f|` for `f` the unit Gaussian centred at `shift`, with the
/// mass it leaves on `E` when a set is given.
pub fn propagate(shift: f64, t: f64, set: Option<&str>) -> Result<Value> {
    if !shift.is_finite() || shift.abs() > MAX_SHIFT || !t.is_finite() {
        return Err(obslab::Error::InvalidArgument(format!("need |shift| ≤ {MAX_SHIFT} and finite t")));
    }
    let grid = Grid::new(PROPAGATOR_HALF_WIDTH, PROPAGATOR_NODES)?;
    let basis = SpectrumTable::hermite(PROPAGATOR_MODES, grid);
    let f: Vec<Complex64> = gaussian(&grid, shift);
    let state = evolve_eigen(&f, t, &basis)?;
    let (mass, intervals) = match set {
        Some(s) if !s.trim().is_empty() => {
            let family: SetFamily = s.parse()?;
            let realset = RealSet::generate(&family, family.min_classify_horizon().max(PROPAGATOR_HALF_WIDTH + 1.0))?;
            (Some(mass_on(&realset, &grid, &state.psi)?), clipped(&realset, PROPAGATOR_HALF_WIDTH))
        }
        _ => (None, Vec::new()),
    };
    Ok(json!({
        "t": t,
        "x": downsample(&grid.nodes()),
        "modulus": downsample(&state.modulus()),
        "norm": state.norm,
        "defect": state.defect,
        "mass_on_set": mass,
        "intervals": intervals,
    }))
}

fn respond(r: Result<Value>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e.to_string() }).to_string(),
    }
}

#[wasm_bindgen(js_name = spectrum)]
pub fn spectrum_js(m: u32, k: usize, shown: usize) -> String {
    respond(spectrum(m, k, shown))
}

#[wasm_bindgen(js_name = setmass)]
pub fn setmass_js(set: &str, m: u32, k: usize) -> String {
    respond(setmass(set, m, k))
}

#[wasm_bindgen(js_name = propagate)]
pub fn propagate_js(shift: f64, t: f64, set: &str) -> String {
    respond(propagate(shift, t, Some(set)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn downsampling_caps_the_point_count() {
        let v: Vec<usize> = (0..1201).collect();
        let d = downsample(&v);
        assert!(d.len() <= PLOT_POINTS + 1);
        assert_eq!(d[0], 0);
        assert!(downsample(&v[..10]).len() == 10);
    }

    #[test]
    fn errors_are_reported_as_json() {
        let v: Value = serde_json::from_str(&spectrum_js(1, 0, 1)).unwrap();
        assert!(v["error"].as_str().unwrap().contains("K must lie"));
    }

    #[test]
    fn shifts_outside_the_basis_are_rejected() {
        assert!(propagate(MAX_SHIFT + 1.0, 0.0, None).is_err());
    }
}
