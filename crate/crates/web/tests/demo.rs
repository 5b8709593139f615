use obslab_web::{propagate, propagate_js, setmass, setmass_js, spectrum, spectrum_js, MAX_SHIFT};
use serde_json::Value;
use std::f64::consts::PI;

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

#[test]
fn harmonic_levels_are_odd_integers() {
    let v = spectrum(1, 8, 3).unwrap();
    for (i, lam) in floats(&v["lambdas"]).iter().enumerate() {
        assert!((lam - (2 * i + 1) as f64).abs() < 1e-5, "λ_{} = {lam}", i + 1);
    }
    let phis = v["phis"].as_array().unwrap();
    assert_eq!(phis.len(), 3);
    assert_eq!(phis[0].as_array().unwrap().len(), v["x"].as_array().unwrap().len());
}

#[test]
fn half_line_carries_half_of_every_mass() {
    let v = setmass("halfline:0", 1, 10).unwrap();
    for e in floats(&v["masses"]) {
        assert!((e - 0.5).abs() < 1e-9, "{e}");
    }
    assert_eq!(v["weakly_thick"]["verdict"], "weakly_thick");
}

#[test]
fn coherent_state_follows_the_classical_orbit() {
    // H = −d²/dx² + x² has frequency 2: |e^{−itH} f|(x) = π^{−1/4} exp(−(x − a cos 2t)²/2).
    for &(a, t) in &[(3.0, 0.7), (MAX_SHIFT, PI), (-2.0, 2.0 * PI + 0.4)] {
        let v = propagate(a, t, None).unwrap();
        let (x, m) = (floats(&v["x"]), floats(&v["modulus"]));
        let centre = a * f64::cos(2.0 * t);
        let err = x
            .iter()
            .zip(&m)
            .map(|(x, m)| (m - PI.powf(-0.25) * (-0.5 * (x - centre).powi(2)).exp()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "a = {a}, t = {t}: {err}");
        assert!((v["norm"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    }
}

#[test]
fn symmetric_mass_of_a_centred_gaussian_is_one_half() {
    let v = propagate(0.0, 1.3, Some("halfline:0")).unwrap();
    assert!((v["mass_on_set"].as_f64().unwrap() - 0.5).abs() < 1e-6);
}

#[test]
fn exports_return_json_or_an_error_object() {
    let ok: Value = serde_json::from_str(&spectrum_js(2, 4, 1)).unwrap();
    assert!(ok.get("error").is_none());
    let bad: Value = serde_json::from_str(&setmass_js("nowhere:1", 1, 4)).unwrap();
    assert!(bad["error"].is_string());
    let empty_set: Value = serde_json::from_str(&propagate_js(1.0, 0.5, "")).unwrap();
    assert!(empty_set["mass_on_set"].is_null());
}
