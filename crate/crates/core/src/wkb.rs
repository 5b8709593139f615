//! Three-region WKB description of the eigenfunctions of `−d²/dx² + x^{2m}`
//! and the Liouville-frame constant at the origin.
//!
//! Regions are split at `μ ± δ·μ^{−(2m−1)/3}` with `μ = λ^{1/(2m)}`:
//! an oscillatory cosine/sine branch inside, an exponentially decaying
//! branch outside, and a turning window in between where only the
//! magnitude is tracked.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit;
use crate::quadrature::integrate;
use crate::spectra::{EigenPair, Grid, Parity, Potential, SpectrumTable};

const PHASE_REL_TOL: f64 = 1e-11;

/// `δ = 0.05·(2m)^{−1/3}`.
pub fn delta(m: u32) -> f64 {
    0.05 * (2.0 * m as f64).powf(-1.0 / 3.0)
}

/// Half-width `δ·μ^{−(2m−1)/3}` of the turning window.
pub fn turning_half_width(m: u32, mu: f64) -> f64 {
    delta(m) * mu.powf(-(2.0 * m as f64 - 1.0) / 3.0)
}

/// `1 − (1 − s²)^{2m}` and `(1 + s²)^{2m} − 1` without cancellation.
fn inner_gap(m: u32, s2: f64) -> f64 {
    -(2.0 * m as f64 * (-s2).ln_1p()).exp_m1()
}

fn outer_gap(m: u32, s2: f64) -> f64 {
    (2.0 * m as f64 * s2.ln_1p()).exp_m1()
}

/// `S⁻(x) = ∫₀^{min(|x|,μ)} √(μ^{2m} − t^{2m}) dt`.
pub fn s_minus(m: u32, mu: f64, x: f64) -> Result<f64> {
    let x = x.abs().min(mu);
    if x == 0.0 {
        return Ok(0.0);
    }
    let mu2m = mu.powi(2 * m as i32);
    let split = 0.5 * mu;
    let direct = |a: f64, b: f64| integrate(|t| (mu2m - t.powi(2 * m as i32)).max(0.0).sqrt(), a, b, PHASE_REL_TOL, 0.0);
    if x <= split {
        return direct(0.0, x);
    }
    // t = μ(1 − s²) removes the square-root endpoint at t = μ
    let s_lo = (1.0 - x / mu).max(0.0).sqrt();
    let s_hi = (1.0 - split / mu).sqrt();
    let near = integrate(
        |s| {
            let s2 = s * s;
            (mu2m * inner_gap(m, s2)).max(0.0).sqrt() * 2.0 * mu * s
        },
        s_lo,
        s_hi,
        PHASE_REL_TOL,
        0.0,
    )?;
    Ok(direct(0.0, split)? + near)
}

/// `S⁺(x) = ∫_μ^{|x|} √(t^{2m} − μ^{2m}) dt` (zero for `|x| ≤ μ`).
pub fn s_plus(m: u32, mu: f64, x: f64) -> Result<f64> {
    let x = x.abs();
    if x <= mu {
        return Ok(0.0);
    }
    let mu2m = mu.powi(2 * m as i32);
    // t = μ(1 + s²)
    let s_hi = (x / mu - 1.0).sqrt();
    integrate(|s| (mu2m * outer_gap(m, s * s)).sqrt() * 2.0 * mu * s, 0.0, s_hi, PHASE_REL_TOL, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseIntegrals {
    pub s_minus: f64,
    pub s_plus: f64,
}

/// Both phase integrals for the `k`-th level of `table` at `x`.
pub fn phase_integrals(table: &SpectrumTable, k: usize, x: f64) -> Result<PhaseIntegrals> {
    let m = require_monomial(&table.potential)?;
    let pair = table.pair(k).ok_or_else(|| Error::InvalidArgument(format!("level {k} is not in the table")))?;
    let mu = pair.lambda.powf(1.0 / (2.0 * m as f64));
    Ok(PhaseIntegrals { s_minus: s_minus(m, mu, x)?, s_plus: s_plus(m, mu, x)? })
}

fn require_monomial(p: &Potential) -> Result<u32> {
    p.monomial_m().ok_or_else(|| Error::InvalidArgument("WKB profiles are defined for x^{2m} potentials".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Oscillatory,
    Turning,
    Tail,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WkbValue {
    pub value: f64,
    pub region: Region,
    pub error_bound: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitWindow {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    pub max_residual: f64,
    pub rms_residual: f64,
    /// Largest ratio `|φ − wkb| / error_budget` inside the window.
    pub max_budget_ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WkbProfile {
    pub k: usize,
    pub m: u32,
    pub lambda: f64,
    pub mu: f64,
    pub delta: f64,
    /// `μ − δμ^{−(2m−1)/3}` and `μ + δμ^{−(2m−1)/3}`.
    pub inner_edge: f64,
    pub outer_edge: f64,
    pub parity: Parity,
    pub amplitude_osc: f64,
    pub amplitude_tail: f64,
    /// `max |φ|` over the turning window.
    pub turning_max: f64,
    pub osc_fit: FitWindow,
    pub tail_fit: FitWindow,
    /// Spread (max − min) of `log|φ| + S⁺ + ¼ log(x^{2m} − μ^{2m})` over the tail window.
    pub tail_log_spread: f64,
}

impl WkbProfile {
    pub fn s_minus(&self, x: f64) -> f64 {
        s_minus(self.m, self.mu, x).unwrap_or(f64::NAN)
    }

    pub fn s_plus(&self, x: f64) -> f64 {
        s_plus(self.m, self.mu, x).unwrap_or(f64::NAN)
    }

    pub fn region(&self, x: f64) -> Region {
        let a = x.abs();
        if a < self.inner_edge {
            Region::Oscillatory
        } else if a > self.outer_edge {
            Region::Tail
        } else {
            Region::Turning
        }
    }

    fn gap(&self, x: f64) -> f64 {
        (x.abs().powi(2 * self.m as i32) - self.mu.powi(2 * self.m as i32)).abs()
    }

    fn odd_sign(&self, x: f64) -> f64 {
        match self.parity {
            Parity::Even => 1.0,
            Parity::Odd => x.signum(),
        }
    }

    /// Oscillatory shape without the amplitude.
    fn osc_shape(&self, x: f64) -> f64 {
        let s = self.s_minus(x);
        let trig = match self.parity {
            Parity::Even => s.cos(),
            Parity::Odd => s.sin(),
        };
        self.odd_sign(x) * self.gap(x).powf(-0.25) * trig
    }

    fn tail_shape(&self, x: f64) -> f64 {
        self.odd_sign(x) * self.gap(x).powf(-0.25) * (-self.s_plus(x)).exp()
    }

    /// `|x^{2m} − μ^{2m}|^{−1/2}·||x| − μ|^{−1}`
    fn remainder(&self, x: f64) -> f64 {
        self.gap(x).powf(-0.5) / (x.abs() - self.mu).abs()
    }

    /// Bound on `|φ − wkb|` with unit constant in the remainder estimate.
    pub fn error_budget(&self, x: f64) -> f64 {
        match self.region(x) {
            Region::Oscillatory => self.amplitude_osc.abs() * self.gap(x).powf(-0.25) * self.remainder(x),
            Region::Tail => self.amplitude_tail.abs() * self.tail_shape(x).abs() * self.remainder(x),
            Region::Turning => self.turning_max,
        }
    }

    pub fn eval(&self, x: f64) -> WkbValue {
        let region = self.region(x);
        let value = match region {
            Region::Oscillatory => self.amplitude_osc * self.osc_shape(x),
            Region::Tail => self.amplitude_tail * self.tail_shape(x),
            Region::Turning => 0.0,
        };
        WkbValue { value, region, error_bound: self.error_budget(x) }
    }

    /// Solutions of `cos S⁻ = 0` (even) or `sin S⁻ = 0` (odd) in `[0, inner_edge)`.
    pub fn predicted_zeros(&self) -> Vec<f64> {
        let top = self.s_minus(self.inner_edge);
        let offset = match self.parity {
            Parity::Even => 0.5,
            Parity::Odd => 0.0,
        };
        let mut zeros = Vec::new();
        let mut j = 0.0;
        loop {
            let target = (j + offset) * std::f64::consts::PI;
            if target >= top {
                break;
            }
            let (mut lo, mut hi) = (0.0, self.inner_edge);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if self.s_minus(mid) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            zeros.push(0.5 * (lo + hi));
            j += 1.0;
        }
        zeros
    }
}

/// Linearly interpolated sign changes of `phi` on `[0, x_max)`.
pub fn numeric_zeros(grid: &Grid, phi: &[f64], x_max: f64) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for i in grid.center().saturating_sub(1)..grid.n - 1 {
        let (x0, x1) = (grid.x(i), grid.x(i + 1));
        if x1 >= x_max {
            break;
        }
        let (a, b) = (phi[i], phi[i + 1]);
        let z = if a == 0.0 {
            x0
        } else if a * b < 0.0 {
            x0 + (x1 - x0) * a / (a - b)
        } else {
            continue;
        };
        // an odd function crosses at the centre node once
        if z >= -0.5 * grid.h() && out.last().map_or(true, |l| z - l > 0.5 * grid.h()) {
            out.push(z.max(0.0));
        }
    }
    out
}

/// Least-squares amplitudes of the oscillatory and tail branches against a
/// numerically computed eigenfunction.
pub fn fit_amplitudes(table: &SpectrumTable, k: usize) -> Result<WkbProfile> {
    let m = require_monomial(&table.potential)?;
    let pair = table.pair(k).ok_or_else(|| Error::InvalidArgument(format!("level {k} is not in the table")))?;
    let grid = &table.grid;
    let phi = &pair.phi;
    let mu = pair.lambda.powf(1.0 / (2.0 * m as f64));
    let width = turning_half_width(m, mu);
    let parity = pair.parity.unwrap_or(Parity::of_index(k));
    let mut profile = WkbProfile {
        k,
        m,
        lambda: pair.lambda,
        mu,
        delta: delta(m),
        inner_edge: mu - width,
        outer_edge: mu + width,
        parity,
        amplitude_osc: 0.0,
        amplitude_tail: 0.0,
        turning_max: 0.0,
        osc_fit: empty_window(),
        tail_fit: empty_window(),
        tail_log_spread: 0.0,
    };
    let s_edge = s_minus(m, mu, profile.inner_edge)?;
    if s_edge / std::f64::consts::PI < 5.0 {
        return Err(Error::InvalidArgument(format!(
            "level {k} has fewer than 5 oscillations in its allowed region; use a higher level"
        )));
    }
    let right: Vec<usize> = (grid.center()..grid.n).collect();

    // oscillatory window: middle half by phase
    let osc: Vec<usize> = right
        .iter()
        .copied()
        .filter(|&i| {
            let x = grid.x(i);
            x < profile.inner_edge && {
                let s = s_minus(m, mu, x).unwrap_or(f64::NAN);
                s >= 0.25 * s_edge && s <= 0.75 * s_edge
            }
        })
        .collect();
    if osc.len() < 20 {
        return Err(Error::IllConditionedFit { window: "oscillatory", points: osc.len() });
    }
    let shapes: Vec<f64> = osc.iter().map(|&i| profile.osc_shape(grid.x(i))).collect();
    profile.amplitude_osc = ls_amplitude(osc.iter().map(|&i| phi[i]), &shapes);

    // tail window: past 3δ-widths and S⁺ ≥ 1, until |φ| < 1e-8·peak
    let peak = phi.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let tail_start = (mu + 3.0 * width).max(solve_s_plus(m, mu, 1.0)?);
    let cap = 0.95 * grid.half_width;
    let mut tail = Vec::new();
    for &i in &right {
        let x = grid.x(i);
        if x < tail_start {
            continue;
        }
        if x > cap || phi[i].abs() < 1e-8 * peak {
            break;
        }
        tail.push(i);
    }
    if tail.len() < 20 {
        return Err(Error::IllConditionedFit { window: "tail", points: tail.len() });
    }
    let tshapes: Vec<f64> = tail.iter().map(|&i| profile.tail_shape(grid.x(i))).collect();
    // weight by 1/shape so every point counts equally in relative terms
    profile.amplitude_tail = {
        let ratios: Vec<f64> = tail.iter().zip(&tshapes).map(|(&i, s)| phi[i] / s).collect();
        ratios.iter().sum::<f64>() / ratios.len() as f64
    };
    let logs: Vec<f64> = tail
        .iter()
        .map(|&i| {
            let x = grid.x(i);
            phi[i].abs().ln() + profile.s_plus(x) + 0.25 * profile.gap(x).ln()
        })
        .collect();
    profile.tail_log_spread = logs.iter().fold(f64::NEG_INFINITY, |a, b| a.max(*b))
        - logs.iter().fold(f64::INFINITY, |a, b| a.min(*b));

    profile.turning_max = right
        .iter()
        .filter(|&&i| profile.region(grid.x(i)) == Region::Turning)
        .map(|&i| phi[i].abs())
        .fold(0.0, f64::max);

    profile.osc_fit = window_stats(&profile, grid, phi, &osc);
    profile.tail_fit = window_stats(&profile, grid, phi, &tail);
    Ok(profile)
}

fn empty_window() -> FitWindow {
    FitWindow { lo: 0.0, hi: 0.0, points: 0, max_residual: 0.0, rms_residual: 0.0, max_budget_ratio: 0.0 }
}

fn ls_amplitude(values: impl Iterator<Item = f64>, shapes: &[f64]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (v, s) in values.zip(shapes) {
        num += v * s;
        den += s * s;
    }
    num / den
}

fn window_stats(profile: &WkbProfile, grid: &Grid, phi: &[f64], idx: &[usize]) -> FitWindow {
    let mut max_residual: f64 = 0.0;
    let mut sq = 0.0;
    let mut ratio: f64 = 0.0;
    for &i in idx {
        let x = grid.x(i);
        let v = profile.eval(x);
        let r = (phi[i] - v.value).abs();
        max_residual = max_residual.max(r);
        sq += r * r;
        ratio = ratio.max(r / v.error_bound);
    }
    FitWindow {
        lo: grid.x(idx[0]),
        hi: grid.x(idx[idx.len() - 1]),
        points: idx.len(),
        max_residual,
        rms_residual: (sq / idx.len() as f64).sqrt(),
        max_budget_ratio: ratio,
    }
}

/// `x > μ` with `S⁺(x) = target`.
fn solve_s_plus(m: u32, mu: f64, target: f64) -> Result<f64> {
    let mut hi = mu * 1.01 + 0.01;
    while s_plus(m, mu, hi)? < target {
        hi = mu + 2.0 * (hi - mu);
    }
    let mut lo = mu;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if s_plus(m, mu, mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Liouville frame at the origin for `y = ∫₀ˣ √(λ − V)`, `w = (λ − V)^{1/4} φ`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LiouvilleFrame {
    pub k: usize,
    pub lambda: f64,
    pub potential: Potential,
    pub w0: f64,
    pub w0prime: f64,
    /// `|C| = |w0 − i·w0′|`
    pub c_abs: f64,
    /// `arctan(w0′/w0)`
    pub theta0: f64,
    /// `{x : V(x) ≤ λ/2}` as `[−r, r]`.
    pub omega: (f64, f64),
}

impl LiouvilleFrame {
    /// `S(x) = ∫₀ˣ √(λ − V(t)) dt` on `omega`.
    pub fn phase(&self, x: f64) -> Result<f64> {
        let (lam, pot) = (self.lambda, self.potential);
        let v = integrate(|t| (lam - pot.eval(t)).max(0.0).sqrt(), 0.0, x.abs(), PHASE_REL_TOL, 0.0)?;
        Ok(v * x.signum())
    }
}

pub fn liouville_frame(table: &SpectrumTable, k: usize) -> Result<LiouvilleFrame> {
    let pair = table.pair(k).ok_or_else(|| Error::InvalidArgument(format!("level {k} is not in the table")))?;
    let grid = &table.grid;
    let pot = table.potential;
    let c = grid.center();
    if c < 2 {
        return Err(Error::InvalidArgument("grid too coarse for a five-point derivative".into()));
    }
    let p = &pair.phi;
    let h = grid.h();
    let phi0 = p[c];
    let dphi0 = (-p[c + 2] + 8.0 * p[c + 1] - 8.0 * p[c - 1] + p[c - 2]) / (12.0 * h);
    let gap0 = pair.lambda - pot.eval(0.0);
    let mut w0 = gap0.powf(0.25) * phi0;
    // dw/dy = (dw/dx)/√(λ − V)
    let dwdx = gap0.powf(0.25) * dphi0 - 0.25 * gap0.powf(-0.75) * pot.derivative(0.0) * phi0;
    let mut w0prime = dwdx / gap0.sqrt();
    match pair.parity {
        Some(Parity::Even) => w0prime = 0.0,
        Some(Parity::Odd) => w0 = 0.0,
        None => {}
    }
    let r = pot.turning_point(0.5 * pair.lambda);
    Ok(LiouvilleFrame {
        k,
        lambda: pair.lambda,
        potential: pot,
        w0,
        w0prime,
        c_abs: w0.hypot(w0prime),
        theta0: w0prime.atan2(w0),
        omega: (-r, r),
    })
}

/// `|C_{λ_k}|` of the Liouville frame.
pub fn amplitude_constant(table: &SpectrumTable, k: usize) -> Result<f64> {
    Ok(liouville_frame(table, k)?.c_abs)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingReport {
    pub ks: Vec<usize>,
    /// Slope of `log|a⁻|` against `log μ`; target `(m−1)/2`.
    pub osc_slope: f64,
    /// Slope of `log|a⁺|` against `log μ`; target `(m−1)/2`.
    pub tail_slope: f64,
    /// Slope of `log|C_λ|` against `log λ`; target `1/4 − 1/(4c)`.
    pub constant_slope: f64,
    pub amplitude_target: f64,
    pub constant_target: f64,
    pub profiles: Vec<WkbProfile>,
}

/// Amplitude and Liouville-constant exponents over the levels `ks`.
pub fn scaling_fits(table: &SpectrumTable, ks: &[usize]) -> Result<ScalingReport> {
    if ks.len() < 2 {
        return Err(Error::InsufficientData("scaling fits need at least two levels".into()));
    }
    let c = table.potential.growth();
    let mut profiles = Vec::with_capacity(ks.len());
    let mut consts = Vec::with_capacity(ks.len());
    for &k in ks {
        profiles.push(fit_amplitudes(table, k)?);
        consts.push(amplitude_constant(table, k)?);
    }
    let mus: Vec<f64> = profiles.iter().map(|p| p.mu).collect();
    let lams: Vec<f64> = profiles.iter().map(|p| p.lambda).collect();
    let osc: Vec<f64> = profiles.iter().map(|p| p.amplitude_osc).collect();
    let tail: Vec<f64> = profiles.iter().map(|p| p.amplitude_tail).collect();
    Ok(ScalingReport {
        ks: ks.to_vec(),
        osc_slope: fit::loglog_slope(&mus, &osc).0,
        tail_slope: fit::loglog_slope(&mus, &tail).0,
        constant_slope: fit::loglog_slope(&lams, &consts).0,
        amplitude_target: (c - 1.0) / 2.0,
        constant_target: 0.25 - 0.25 / c,
        profiles,
    })
}

/// Rows `(x, φ(x), wkb(x), budget(x))` on every grid node.
pub fn comparison_rows(profile: &WkbProfile, grid: &Grid, pair: &EigenPair) -> Vec<[f64; 4]> {
    (0..grid.n)
        .map(|i| {
            let x = grid.x(i);
            let v = profile.eval(x);
            [x, pair.phi[i], v.value, v.error_bound]
        })
        .collect()
}
