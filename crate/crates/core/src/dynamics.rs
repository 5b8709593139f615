//! Hermite oscillator dynamics (`H = −d²/dx² + x²`, eigenvalues `2k − 1`):
//! eigen-expansion and Mehler propagators, two-time quotients, the
//! coherent-state minimal-time scan and the complex-time heat kernel.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::{self, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observability::cell_weights;
use crate::realset::{Interval, RealSet, SetFamily};
use crate::spectra::{Grid, SpectrumTable};

/// Half-width of the band around `jπ/2` where the Mehler kernel is not used.
pub const RESONANT_GUARD: f64 = 1e-3;
/// Minimum samples per phase oscillation for the Mehler quadrature.
pub const POINTS_PER_OSCILLATION: f64 = 8.0;
/// Tolerated `1 − captured/‖f‖²` for the eigen expansion.
pub const MODE_DEFECT: f64 = 1e-8;
/// Time step of the composite midpoint rule.
pub const TIME_STEP: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Eigen,
    Mehler,
    Resonant,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PropagatorState {
    pub t: f64,
    pub grid: Grid,
    pub psi: Vec<Complex64>,
    pub norm: f64,
    pub provenance: Provenance,
    /// `1 − Σ|a_k|²/‖f‖²` for eigen evolution.
    pub defect: Option<f64>,
}

impl PropagatorState {
    fn new(t: f64, grid: Grid, psi: Vec<Complex64>, provenance: Provenance, defect: Option<f64>) -> Self {
        let norm = l2_norm(&grid, &psi);
        Self { t, grid, psi, norm, provenance, defect }
    }

    pub fn modulus(&self) -> Vec<f64> {
        self.psi.iter().map(|z| z.norm()).collect()
    }
}

pub fn l2_norm(grid: &Grid, f: &[Complex64]) -> f64 {
    grid.integrate(f.iter().map(|z| z.norm_sqr())).sqrt()
}

/// `‖f − g‖_{L²}` on a shared grid.
pub fn l2_distance(grid: &Grid, f: &[Complex64], g: &[Complex64]) -> f64 {
    grid.integrate(f.iter().zip(g).map(|(a, b)| (a - b).norm_sqr())).sqrt()
}

/// `∫_E |f|²` with partial-cell weights.
pub fn mass_on(set: &RealSet, grid: &Grid, f: &[Complex64]) -> Result<f64> {
    let w = cell_weights(&set.expand(grid.half_width)?, grid)?;
    Ok(grid.integrate(w.iter().zip(f).map(|(w, z)| w * z.norm_sqr())))
}

fn require_hermite(table: &SpectrumTable) -> Result<()> {
    if table.potential.monomial_m() != Some(1) {
        return Err(Error::InvalidArgument("oscillator dynamics need the m = 1 table".into()));
    }
    Ok(())
}

fn require_len(grid: &Grid, f: &[Complex64]) -> Result<()> {
    if f.len() != grid.n {
        return Err(Error::InvalidArgument(format!("data has {} samples, grid has {}", f.len(), grid.n)));
    }
    Ok(())
}

/// Fourier–Hermite coefficients `⟨f, φ_k⟩` and the truncation defect.
#[derive(Debug, Clone)]
pub struct Expansion {
    pub coeffs: Vec<Complex64>,
    pub lambdas: Vec<f64>,
    pub defect: f64,
}

pub fn expand(f: &[Complex64], table: &SpectrumTable) -> Result<Expansion> {
    require_hermite(table)?;
    let grid = &table.grid;
    require_len(grid, f)?;
    let h = grid.h();
    let coeffs: Vec<Complex64> = table
        .pairs
        .iter()
        .map(|p| f.iter().zip(&p.phi).map(|(z, v)| z * v).sum::<Complex64>() * h)
        .collect();
    let total = l2_norm(grid, f).powi(2);
    let captured: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    let defect = if total > 0.0 { (1.0 - captured / total).max(0.0) } else { 0.0 };
    if defect > MODE_DEFECT {
        return Err(Error::InsufficientModes { modes: table.len(), captured: captured / total, defect });
    }
    Ok(Expansion { coeffs, lambdas: table.lambdas(), defect })
}

impl Expansion {
    /// `Σ e^{−iλ_k t} a_k φ_k` on the nodes listed in `nodes`.
    fn synthesize(&self, table: &SpectrumTable, t: f64, nodes: &[usize]) -> Vec<Complex64> {
        let mut re = vec![0.0; nodes.len()];
        let mut im = vec![0.0; nodes.len()];
        for ((a, lam), pair) in self.coeffs.iter().zip(&self.lambdas).zip(&table.pairs) {
            let c = a * Complex64::from_polar(1.0, -lam * t);
            if c.norm_sqr() == 0.0 {
                continue;
            }
            for ((r, i), &n) in re.iter_mut().zip(im.iter_mut()).zip(nodes) {
                let v = pair.phi[n];
                *r += c.re * v;
                *i += c.im * v;
            }
        }
        re.into_iter().zip(im).map(|(r, i)| Complex64::new(r, i)).collect()
    }
}

pub fn evolve_eigen(f: &[Complex64], t: f64, table: &SpectrumTable) -> Result<PropagatorState> {
    let ex = expand(f, table)?;
    let all: Vec<usize> = (0..table.grid.n).collect();
    let psi = ex.synthesize(table, t, &all);
    Ok(PropagatorState::new(t, table.grid, psi, Provenance::Eigen, Some(ex.defect)))
}

/// `e^{−itH}` kernel for non-resonant `t`, with the phase continued across
/// every multiple of `π/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MehlerKernel {
    pub t: f64,
    pub inv_sin: f64,
    pub cot: f64,
    pub phase: Complex64,
}

/// `(j, distance)` of the nearest multiple `jπ/2`.
fn nearest_resonance(t: f64) -> (u64, f64) {
    let j = (t / FRAC_PI_2).round().max(0.0);
    (j as u64, (t - j * FRAC_PI_2).abs())
}

impl MehlerKernel {
    pub fn new(t: f64) -> Result<Self> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::InvalidArgument(format!("time must be finite and ≥ 0, got {t}")));
        }
        let (j, dist) = nearest_resonance(t);
        if dist < RESONANT_GUARD {
            return Err(Error::ResonantTime { t, multiple: j });
        }
        let s = (2.0 * t).sin();
        let sector = (t / FRAC_PI_2).floor();
        let phase = Complex64::from_polar(1.0, -PI / 4.0 - sector * FRAC_PI_2) / (2.0 * PI * s.abs()).sqrt();
        Ok(Self { t, inv_sin: 1.0 / s, cot: (2.0 * t).cos() / s, phase })
    }

    pub fn eval(&self, x: f64, y: f64) -> Complex64 {
        let arg = 0.5 * (x * x + y * y) * self.cot - x * y * self.inv_sin;
        self.phase * Complex64::from_polar(1.0, arg)
    }

    /// Largest `|∂_y phase|` for `|x| ≤ x_max`, `|y| ≤ y_max`.
    pub fn max_phase_gradient(&self, x_max: f64, y_max: f64) -> f64 {
        y_max * self.cot.abs() + x_max * self.inv_sin.abs()
    }
}

/// Trapezoid quadrature of the Mehler kernel against `f`.
pub fn evolve_mehler(f: &[Complex64], t: f64, grid: &Grid) -> Result<PropagatorState> {
    require_len(grid, f)?;
    let kernel = MehlerKernel::new(t)?;
    let peak = f.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let support: Vec<usize> = (0..grid.n).filter(|&i| f[i].norm() > 1e-17 * peak).collect();
    let y_max = support.iter().map(|&i| grid.x(i).abs()).fold(0.0, f64::max);
    let h = grid.h();
    let grad = kernel.max_phase_gradient(grid.half_width, y_max);
    if grad * h > 2.0 * PI / POINTS_PER_OSCILLATION {
        return Err(Error::InvalidArgument(format!(
            "spacing {h} gives {:.2} points per kernel oscillation at t = {t}; need {POINTS_PER_OSCILLATION}",
            2.0 * PI / (grad * h)
        )));
    }
    let a = 0.5 * kernel.cot;
    let b = kernel.inv_sin;
    let g: Vec<(f64, Complex64)> = support
        .iter()
        .map(|&l| {
            let y = grid.x(l);
            (y, f[l] * Complex64::from_polar(1.0, a * y * y))
        })
        .collect();
    let psi = (0..grid.n)
        .map(|i| {
            let x = grid.x(i);
            let s: Complex64 = g.iter().map(|(y, v)| v * Complex64::from_polar(1.0, -b * x * y)).sum();
            kernel.phase * Complex64::from_polar(1.0, a * x * x) * s * h
        })
        .collect();
    Ok(PropagatorState::new(t, *grid, psi, Provenance::Mehler, None))
}

/// `e^{−ijπ/2 H} f = e^{−ijπ/2} f((−1)^j x)`.
pub fn evolve_resonant(f: &[Complex64], multiple: u64, grid: &Grid) -> Result<PropagatorState> {
    require_len(grid, f)?;
    let phase = [Complex64::new(1.0, 0.0), Complex64::new(0.0, -1.0), Complex64::new(-1.0, 0.0), Complex64::new(0.0, 1.0)]
        [(multiple % 4) as usize];
    let n = grid.n;
    let psi = (0..n).map(|i| phase * if multiple % 2 == 1 { f[n - 1 - i] } else { f[i] }).collect();
    Ok(PropagatorState::new(multiple as f64 * FRAC_PI_2, *grid, psi, Provenance::Resonant, None))
}

/// Samples of a real function on the grid.
pub fn sample(grid: &Grid, f: impl Fn(f64) -> Complex64) -> Vec<Complex64> {
    grid.nodes().into_iter().map(f).collect()
}

/// `π^{−1/4} e^{−(x−a)²/2}`.
pub fn gaussian(grid: &Grid, shift: f64) -> Vec<Complex64> {
    sample(grid, |x| Complex64::new(PI.powf(-0.25) * (-0.5 * (x - shift) * (x - shift)).exp(), 0.0))
}

/// `exp(−1/(1 − (x/w)²))` on `|x| < w`, zero outside.
pub fn bump(grid: &Grid, width: f64) -> Vec<Complex64> {
    sample(grid, |x| {
        let u = x / width;
        Complex64::new(if u.abs() < 1.0 { (-1.0 / (1.0 - u * u)).exp() } else { 0.0 }, 0.0)
    })
}

// ---------------------------------------------------------------------------
// two-time quotient

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwoTimeRecord {
    pub s: f64,
    pub t: f64,
    pub norm_sq: f64,
    pub mass_s: f64,
    pub mass_t: f64,
    /// `‖f‖² / (∫_{E1}|u(S)|² + ∫_{E2}|u(T)|²)`; infinite when the denominator vanishes.
    pub quotient: f64,
    /// `T − S` within the guard band of a multiple of `π/2`.
    pub resonant: bool,
    /// `r1·r2/|sin 2(T−S)|` for centred ball complements.
    pub envelope_exponent: Option<f64>,
}

/// Radius `r` when `set` is the complement of `[−r, r]`.
fn ball_complement_radius(set: &RealSet) -> Option<f64> {
    match set.intervals() {
        [a, b] if a.lo == f64::NEG_INFINITY && b.hi == f64::INFINITY && (a.hi + b.lo).abs() < 1e-12 => Some(b.lo),
        _ => None,
    }
}

pub fn two_time_quotient(
    f: &[Complex64],
    s: f64,
    t: f64,
    e1: &RealSet,
    e2: &RealSet,
    table: &SpectrumTable,
) -> Result<TwoTimeRecord> {
    if !(0.0 <= s && s < t) {
        return Err(Error::InvalidArgument(format!("need 0 ≤ S < T, got S = {s}, T = {t}")));
    }
    let ex = expand(f, table)?;
    let grid = &table.grid;
    let all: Vec<usize> = (0..grid.n).collect();
    let us = ex.synthesize(table, s, &all);
    let ut = ex.synthesize(table, t, &all);
    let norm_sq = l2_norm(grid, f).powi(2);
    let mass_s = mass_on(e1, grid, &us)?;
    let mass_t = mass_on(e2, grid, &ut)?;
    let denom = mass_s + mass_t;
    let quotient = if denom > 0.0 { norm_sq / denom } else { f64::INFINITY };
    let resonant = nearest_resonance(t - s).1 < RESONANT_GUARD;
    let envelope_exponent = match (ball_complement_radius(e1), ball_complement_radius(e2)) {
        (Some(r1), Some(r2)) if !resonant => Some(r1 * r2 / (2.0 * (t - s)).sin().abs()),
        _ => None,
    };
    Ok(TwoTimeRecord { s, t, norm_sq, mass_s, mass_t, quotient, resonant, envelope_exponent })
}

/// Even bumps supported in `[−r, r]`; at resonant `T − S` their quotient
/// against `[−r, r]ᶜ` is unbounded.
pub fn blowup_family(grid: &Grid, r: f64, count: usize) -> Vec<Vec<Complex64>> {
    (0..count).map(|i| bump(grid, r / (1.0 + i as f64))).collect()
}

// ---------------------------------------------------------------------------
// coherent states and the minimal-time scan

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherentFamily {
    pub k: f64,
}

impl CoherentFamily {
    pub fn new(k: f64) -> Self {
        Self { k }
    }

    /// `π^{−1/4} e^{−x²/2 − ikx}`.
    pub fn initial(&self, grid: &Grid) -> Vec<Complex64> {
        let k = self.k;
        sample(grid, |x| Complex64::from_polar(PI.powf(-0.25) * (-0.5 * x * x).exp(), -k * x))
    }

    /// Modes holding all but about `e^{−30}` of the Poisson weight around `k²/2`.
    pub fn modes(&self) -> usize {
        let mean = 0.5 * self.k * self.k;
        (mean + 8.0 * mean.sqrt() + 30.0).ceil() as usize
    }

    /// Grid wide and fine enough for `modes()` Hermite functions.
    pub fn grid(&self) -> Result<Grid> {
        let top = (2.0 * self.modes() as f64 + 1.0).sqrt();
        Grid::with_spacing(top + 8.0, (0.9 / top).min(0.02))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinTimeTable {
    pub family: SetFamily,
    pub t_list: Vec<f64>,
    pub k_list: Vec<f64>,
    /// `q[i][j] = Q(k_i, T_j)` at the first two-digit-stable step.
    pub q: Vec<Vec<f64>>,
    /// Same at the base step.
    pub q_coarse: Vec<Vec<f64>>,
    /// Exact time integral of the same spatial quadrature.
    pub q_exact: Vec<Vec<f64>>,
    /// Midpoint step behind each entry of `q`.
    pub steps: Vec<Vec<f64>>,
    /// Every entry reached two-digit stability within `MAX_HALVINGS`.
    pub stable: bool,
    pub modes: Vec<usize>,
    pub half_widths: Vec<f64>,
    pub defects: Vec<f64>,
}

/// Halvings of the base time step before an entry is declared unstable.
pub const MAX_HALVINGS: usize = 12;

/// `∫_E |u(t)|² = Σ_{|d|<K} R_d e^{−2idt}` for `u = e^{−itH}f`.
struct MassSeries {
    /// `R_d` for `d ≥ 0`; `R_{−d} = conj(R_d)`.
    r: Vec<Complex64>,
}

impl MassSeries {
    fn new(ex: &Expansion, table: &SpectrumTable, weights: &[f64]) -> Self {
        let h = table.grid.h();
        let nodes: Vec<usize> = (0..table.grid.n).filter(|&i| weights[i] > 0.0).collect();
        let k = table.len();
        let phi = DMatrix::from_fn(nodes.len(), k, |r, c| (weights[nodes[r]] * h).sqrt() * table.pairs[c].phi[nodes[r]]);
        let gram = phi.tr_mul(&phi);
        let a = &ex.coeffs;
        let r = (0..k).map(|d| (d..k).map(|j| a[j] * a[j - d].conj() * gram[(j, j - d)]).sum()).collect();
        Self { r }
    }

    fn at(&self, t: f64) -> f64 {
        let osc: f64 =
            self.r.iter().enumerate().skip(1).map(|(d, r)| (r * Complex64::from_polar(1.0, -2.0 * d as f64 * t)).re).sum();
        self.r[0].re + 2.0 * osc
    }

    /// Composite midpoint rule on `ceil(T/step)` equal panels.
    fn midpoint(&self, t_final: f64, step: f64) -> f64 {
        let n = (t_final / step).ceil().max(1.0);
        let dt = t_final / n;
        let one = Complex64::new(1.0, 0.0);
        let mut total = n * self.r[0].re;
        for (d, r) in self.r.iter().enumerate().skip(1) {
            let w = Complex64::from_polar(1.0, -2.0 * d as f64 * dt);
            let geo = if (one - w).norm() < 1e-12 {
                Complex64::new(n, 0.0)
            } else {
                (one - Complex64::from_polar(1.0, -2.0 * d as f64 * dt * n)) / (one - w)
            };
            total += 2.0 * (r * Complex64::from_polar(1.0, -(d as f64) * dt) * geo).re;
        }
        total * dt
    }

    fn exact(&self, t_final: f64) -> f64 {
        let one = Complex64::new(1.0, 0.0);
        let mut total = t_final * self.r[0].re;
        for (d, r) in self.r.iter().enumerate().skip(1) {
            let f = 2.0 * d as f64;
            total += 2.0 * (r * (one - Complex64::from_polar(1.0, -f * t_final)) / Complex64::new(0.0, f)).re;
        }
        total
    }
}

struct ScanRow {
    fine: Vec<f64>,
    coarse: Vec<f64>,
    exact: Vec<f64>,
    steps: Vec<f64>,
    stable: bool,
    modes: usize,
    half_width: f64,
    defect: f64,
}

fn scan_one(set: &RealSet, k: f64, t_list: &[f64]) -> Result<ScanRow> {
    let fam = CoherentFamily::new(k);
    let grid = fam.grid()?;
    let table = SpectrumTable::hermite(fam.modes(), grid);
    let u0 = fam.initial(&grid);
    let ex = expand(&u0, &table)?;
    let norm_sq = l2_norm(&grid, &u0).powi(2);
    let w = cell_weights(&set.expand(grid.half_width)?, &grid)?;
    let series = MassSeries::new(&ex, &table, &w);
    let mut row = ScanRow {
        fine: Vec::new(),
        coarse: Vec::new(),
        exact: Vec::new(),
        steps: Vec::new(),
        stable: true,
        modes: table.len(),
        half_width: grid.half_width,
        defect: ex.defect,
    };
    for &t in t_list {
        let mut step = TIME_STEP;
        let mut prev = series.midpoint(t, step);
        row.coarse.push(prev / norm_sq);
        let mut settled = false;
        for _ in 0..MAX_HALVINGS {
            step *= 0.5;
            let next = series.midpoint(t, step);
            settled = (next - prev).abs() <= 5e-3 * next.abs() + 1e-14;
            prev = next;
            if settled {
                break;
            }
        }
        row.stable &= settled;
        row.fine.push(prev / norm_sq);
        row.steps.push(step);
        row.exact.push(series.exact(t) / norm_sq);
    }
    Ok(row)
}

/// `Q(k, T) = ∫₀ᵀ ∫_E |e^{−itH}u_{0,k}|² / ‖u_{0,k}‖²` for every pair.
pub fn minimal_time_scan(set: &RealSet, t_list: &[f64], k_list: &[f64]) -> Result<MinTimeTable> {
    if t_list.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(Error::InvalidArgument("observation times must be positive".into()));
    }
    if k_list.iter().any(|k| !k.is_finite()) {
        return Err(Error::InvalidArgument("wavenumbers must be finite".into()));
    }
    let results: Vec<Result<ScanRow>> = std::thread::scope(|scope| {
        let handles: Vec<_> = k_list.iter().map(|&k| scope.spawn(move || scan_one(set, k, t_list))).collect();
        handles.into_iter().map(|h| h.join().expect("scan worker panicked")).collect()
    });
    let mut table = MinTimeTable {
        family: set.family().clone(),
        t_list: t_list.to_vec(),
        k_list: k_list.to_vec(),
        q: Vec::new(),
        q_coarse: Vec::new(),
        q_exact: Vec::new(),
        steps: Vec::new(),
        stable: true,
        modes: Vec::new(),
        half_widths: Vec::new(),
        defects: Vec::new(),
    };
    for r in results {
        let row = r?;
        table.stable &= row.stable;
        table.q.push(row.fine);
        table.q_coarse.push(row.coarse);
        table.q_exact.push(row.exact);
        table.steps.push(row.steps);
        table.modes.push(row.modes);
        table.half_widths.push(row.half_width);
        table.defects.push(row.defect);
    }
    Ok(table)
}

/// `∫_E |e^{−itH}f|²` at the listed times through the mode Gram matrix.
pub fn mass_history(f: &[Complex64], set: &RealSet, table: &SpectrumTable, times: &[f64]) -> Result<Vec<f64>> {
    let ex = expand(f, table)?;
    let w = cell_weights(&set.expand(table.grid.half_width)?, &table.grid)?;
    let series = MassSeries::new(&ex, table, &w);
    Ok(times.iter().map(|&t| series.at(t)).collect())
}

impl MinTimeTable {
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "# set={}", serde_json::to_string(&self.family).unwrap_or_default())?;
        writeln!(w, "# base_step={TIME_STEP:e} stable={}", self.stable)?;
        writeln!(w, "k,T,Q,Q_coarse,Q_exact,step")?;
        for (i, k) in self.k_list.iter().enumerate() {
            for (j, t) in self.t_list.iter().enumerate() {
                writeln!(
                    w,
                    "{k:.17e},{t:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                    self.q[i][j], self.q_coarse[i][j], self.q_exact[i][j], self.steps[i][j]
                )?;
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// complex-time heat kernel

/// Kernel of `e^{−zH}` for `Re z > 0`:
/// `(2π sinh 2z)^{−1/2} exp(−coth(2z)(x² + y²)/2 + xy/sinh 2z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexHeatKernel {
    pub z: Complex64,
    coth: Complex64,
    inv_sinh: Complex64,
    /// `ln` of the prefactor on the branch continuous from real `z`.
    log_prefactor: Complex64,
}

impl ComplexHeatKernel {
    pub fn new(z: Complex64) -> Result<Self> {
        if !(z.re > 0.0 && z.is_finite()) {
            return Err(Error::InvalidArgument(format!("heat kernel needs Re z > 0, got {z}")));
        }
        let two_z = 2.0 * z;
        // sinh 2z = e^{2z}(1 − e^{−4z})/2 and Re(1 − e^{−4z}) > 0
        let q = (Complex64::new(1.0, 0.0) - (-2.0 * two_z).exp()) * 0.5;
        let log_prefactor = -0.5 * (2.0 * PI).ln() - z - 0.5 * q.ln();
        Ok(Self { z, coth: two_z.cosh() / two_z.sinh(), inv_sinh: 1.0 / two_z.sinh(), log_prefactor })
    }

    pub fn log_eval(&self, x: f64, y: f64) -> Complex64 {
        self.log_prefactor - 0.5 * self.coth * (x * x + y * y) + self.inv_sinh * (x * y)
    }

    pub fn eval(&self, x: f64, y: f64) -> Complex64 {
        self.log_eval(x, y).exp()
    }

    /// `|K_z(x,y)| · s^{1/2} · exp(s|x−y|²/(4(s² + t²)))`.
    pub fn bound_ratio(&self, x: f64, y: f64) -> f64 {
        let (s, t) = (self.z.re, self.z.im);
        (self.log_eval(x, y).re + 0.5 * s.ln() + s * (x - y).powi(2) / (4.0 * (s * s + t * t))).exp()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelBoundFit {
    pub samples: usize,
    /// Largest observed ratio: the fitted constant.
    pub constant: f64,
    /// `(x, y, s, t)` attaining it.
    pub worst: [f64; 4],
}

/// Random `(x, y, s, t)` with `|x|, |y| ≤ x_max`, `s` log-uniform in
/// `[s_min, s_max]` and `t ∈ [0, t_max]`.
pub fn kernel_samples(seed: u64, count: usize, x_max: f64, s_range: (f64, f64), t_max: f64) -> Vec<[f64; 4]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (ls, hs) = (s_range.0.ln(), s_range.1.ln());
    (0..count)
        .map(|_| {
            [
                rng.gen_range(-x_max..=x_max),
                rng.gen_range(-x_max..=x_max),
                rng.gen_range(ls..=hs).exp(),
                rng.gen_range(0.0..=t_max),
            ]
        })
        .collect()
}

pub fn fit_kernel_bound(samples: &[[f64; 4]]) -> Result<KernelBoundFit> {
    let mut best = KernelBoundFit { samples: samples.len(), constant: 0.0, worst: [0.0; 4] };
    for &[x, y, s, t] in samples {
        let r = ComplexHeatKernel::new(Complex64::new(s, t))?.bound_ratio(x, y);
        if r > best.constant {
            best.constant = r;
            best.worst = [x, y, s, t];
        }
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// heat-kernel witness

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HeatWitness {
    pub y0: f64,
    pub t_final: f64,
    pub c_obs: f64,
    /// `‖K₁(·, y0)‖²`.
    pub lhs: f64,
    /// `e^{−2}|φ₀(y0)|²`.
    pub lhs_bound: f64,
    pub lhs_ok: bool,
    /// `max(1, |y0|)`.
    pub rho: f64,
    /// Window radius is `L·ρ`.
    pub window_len: f64,
    pub window: Interval,
    /// `C_obs ∫₀ᵀ ∫_{outside} |v|²`.
    pub tail: f64,
    /// `sup |v|²` over the window and `[0, T]`.
    pub sup_density: f64,
    /// `(lhs − tail)/(C_obs·T·sup_density)`.
    pub measure_bound: f64,
    pub window_measure: f64,
    pub satisfied: bool,
    pub modes: usize,
    pub defect: f64,
}

pub fn heat_witness(set: &RealSet, y0: f64, t_final: f64, c_obs: f64) -> Result<HeatWitness> {
    if !(t_final > 0.0 && c_obs > 0.0 && y0.is_finite()) {
        return Err(Error::InvalidArgument(format!("need T > 0, C_obs > 0, finite y0 (got {t_final}, {c_obs}, {y0})")));
    }
    let centre = y0 / 2f64.cosh();
    let modes = 60 + 2 * (centre * centre).ceil() as usize;
    let top = (2.0 * modes as f64 + 1.0).sqrt();
    let grid = Grid::with_spacing(top.max(y0.abs()) + 10.0, 0.02)?;
    let table = SpectrumTable::hermite(modes, grid);
    let k1 = ComplexHeatKernel::new(Complex64::new(1.0, 0.0))?;
    let u0 = sample(&grid, |x| k1.eval(x, y0));
    let lhs = l2_norm(&grid, &u0).powi(2);
    let lhs_bound = (-2.0f64).exp() * PI.powf(-0.5) * (-y0 * y0).exp();
    let ex = expand(&u0, &table)?;
    let all: Vec<usize> = (0..grid.n).collect();
    let panels = (t_final / TIME_STEP).ceil() as usize;
    let dt = t_final / panels as f64;
    let mut density = vec![0.0; grid.n];
    let mut peak = vec![0.0f64; grid.n];
    for p in 0..panels {
        let v = ex.synthesize(&table, (p as f64 + 0.5) * dt, &all);
        for (i, z) in v.iter().enumerate() {
            density[i] += dt * z.norm_sqr();
            peak[i] = peak[i].max(z.norm_sqr());
        }
    }
    let h = grid.h();
    // grow the radius until the outside contribution drops below lhs/2
    let mut order: Vec<usize> = (0..grid.n).collect();
    order.sort_by(|&a, &b| (grid.x(a) - y0).abs().total_cmp(&(grid.x(b) - y0).abs()));
    let total: f64 = density.iter().sum::<f64>() * h;
    let mut inside = 0.0;
    let mut radius = 0.0;
    let mut sup_density = 0.0f64;
    for &i in &order {
        if c_obs * (total - inside) <= 0.5 * lhs {
            break;
        }
        inside += density[i] * h;
        sup_density = sup_density.max(peak[i]);
        radius = (grid.x(i) - y0).abs() + 0.5 * h;
    }
    let tail = c_obs * (total - inside).max(0.0);
    let rho = y0.abs().max(1.0);
    let window = Interval { lo: y0 - radius, hi: y0 + radius };
    let reach = window.lo.abs().max(window.hi.abs()) + 1.0;
    let window_measure = set.expand(reach)?.measure_in(window)?;
    let measure_bound = (lhs - tail) / (c_obs * t_final * sup_density);
    Ok(HeatWitness {
        y0,
        t_final,
        c_obs,
        lhs,
        lhs_bound,
        lhs_ok: lhs >= lhs_bound,
        rho,
        window_len: radius / rho,
        window,
        tail,
        sup_density,
        measure_bound,
        window_measure,
        satisfied: window_measure >= measure_bound,
        modes,
        defect: ex.defect,
    })
}
