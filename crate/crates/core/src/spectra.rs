//! Eigenpairs of `H = −d²/dx² + V` on ℝ.
//!
//! The operator is discretised by second-order central differences on a
//! uniform grid with Dirichlet walls at `±X`. Eigenvalues come from Sturm
//! bisection, eigenvectors from inverse iteration; eigenvalues are refined
//! by halving `h` and Richardson-extrapolating until the relative change
//! drops below the requested accuracy.

use std::f64::consts::PI;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit;
use crate::special::weyl_ratio;
use crate::tridiag::SymTridiag;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Potential {
    /// `x^{2m}`
    Monomial { m: u32 },
    /// `C(1+x²)^c`
    ShiftedPower { coeff: f64, c: f64 },
}

impl Potential {
    pub fn monomial(m: u32) -> Result<Self> {
        let p = Potential::Monomial { m };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Potential::Monomial { m } if m == 0 => Err(Error::InvalidArgument("monomial exponent m must be ≥ 1".into())),
            Potential::ShiftedPower { coeff, c } if !(coeff > 0.0 && c >= 1.0) => Err(Error::InvalidArgument(format!(
                "shifted power needs C > 0 and c ≥ 1, got C = {coeff}, c = {c}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Potential::Monomial { m } => x.powi(2 * m as i32),
            Potential::ShiftedPower { coeff, c } => coeff * (1.0 + x * x).powf(c),
        }
    }

    /// `V'(x)`
    pub fn derivative(&self, x: f64) -> f64 {
        match *self {
            Potential::Monomial { m } => 2.0 * m as f64 * x.powi(2 * m as i32 - 1),
            Potential::ShiftedPower { coeff, c } => 2.0 * c * coeff * x * (1.0 + x * x).powf(c - 1.0),
        }
    }

    /// Growth exponent `c` with `V ~ |x|^{2c}` (equals `m` for monomials).
    pub fn growth(&self) -> f64 {
        match *self {
            Potential::Monomial { m } => m as f64,
            Potential::ShiftedPower { c, .. } => c,
        }
    }

    pub fn monomial_m(&self) -> Option<u32> {
        match *self {
            Potential::Monomial { m } => Some(m),
            _ => None,
        }
    }

    /// Positive `x` with `V(x) = lambda`, or 0 when `lambda ≤ V(0)`.
    pub fn turning_point(&self, lambda: f64) -> f64 {
        match *self {
            Potential::Monomial { m } => lambda.max(0.0).powf(1.0 / (2.0 * m as f64)),
            Potential::ShiftedPower { coeff, c } => {
                let r = (lambda / coeff).max(1.0).powf(1.0 / c) - 1.0;
                r.max(0.0).sqrt()
            }
        }
    }

    /// Rough λ_k from the Weyl law, used only to size the first grid.
    fn weyl_guess(&self, k: usize) -> f64 {
        let c = self.growth();
        let ratio = c * PI / crate::special::beta(1.5, 1.0 / (2.0 * c));
        let base = (ratio * k as f64).powf(2.0 * c / (c + 1.0));
        match *self {
            Potential::Monomial { .. } => base,
            Potential::ShiftedPower { coeff, .. } => coeff.powf(1.0 / (c + 1.0)) * base + coeff,
        }
    }
}

/// Uniform grid with `n` interior nodes `x_i = −X + (i+1)·h`, `h = 2X/(n+1)`.
/// `n` is odd so that `x = 0` is the middle node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub half_width: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) || n < 3 || n % 2 == 0 {
            return Err(Error::InvalidArgument(format!("grid needs X > 0 and odd n ≥ 3, got X = {half_width}, n = {n}")));
        }
        Ok(Self { half_width, n })
    }

    /// Smallest odd-node grid on `[−X, X]` with spacing at most `h`.
    pub fn with_spacing(half_width: f64, h: f64) -> Result<Self> {
        let mut n = ((2.0 * half_width / h).ceil() as usize).saturating_sub(1).max(3);
        if n % 2 == 0 {
            n += 1;
        }
        Self::new(half_width, n)
    }

    pub fn h(&self) -> f64 {
        2.0 * self.half_width / (self.n as f64 + 1.0)
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 1.0) * self.h()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    pub fn center(&self) -> usize {
        self.n / 2
    }

    /// Same interval, spacing halved (`n → 2n+1`), nodes nested.
    pub fn refined(&self) -> Self {
        Self { half_width: self.half_width, n: 2 * self.n + 1 }
    }

    /// `−d²/dx² + V` with Dirichlet walls.
    pub fn operator(&self, potential: &Potential) -> SymTridiag {
        let h2 = self.h() * self.h();
        let diag = (0..self.n).map(|i| 2.0 / h2 + potential.eval(self.x(i))).collect();
        SymTridiag::new(diag, vec![-1.0 / h2; self.n - 1])
    }

    /// Trapezoid rule with zero boundary values: `h·Σ f_i`.
    pub fn integrate(&self, f: impl Iterator<Item = f64>) -> f64 {
        self.h() * f.sum::<f64>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of_index(k: usize) -> Self {
        if k % 2 == 1 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigenPair {
    /// 1-based index.
    pub k: usize,
    /// Grid-converged (extrapolated) eigenvalue.
    pub lambda: f64,
    /// Eigenvalue of the finest discrete operator; `phi` belongs to it.
    pub lambda_discrete: f64,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub phi: Vec<f64>,
    pub mu: Option<f64>,
    pub parity: Option<Parity>,
    /// `|‖φ‖ − 1|` after normalisation.
    pub norm_residual: f64,
    /// `‖Aφ − λ_discrete φ‖ / ‖φ‖` on the finest grid.
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Convergence {
    pub levels: usize,
    pub max_relative_change: f64,
    pub accuracy: f64,
    pub boundary_mass: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumTable {
    pub potential: Potential,
    pub grid: Grid,
    pub pairs: Vec<EigenPair>,
    /// `(mπ/B(3/2, 1/(2m)))^{1/(m+1)}` for monomials.
    pub weyl_b: Option<f64>,
    pub min_gap: f64,
    pub convergence: Option<Convergence>,
}

const MAX_LEVELS: usize = 9;
const MAX_ENLARGE: usize = 6;

/// First `count` eigenvalues of the discrete operator on `grid`.
pub fn discrete_eigenvalues(potential: &Potential, grid: &Grid, count: usize) -> Vec<f64> {
    grid.operator(potential).lowest_eigenvalues(count)
}

/// Converged first `k_max` eigenpairs of `−d²/dx² + V`.
pub fn solve_spectrum(potential: &Potential, k_max: usize, accuracy: f64) -> Result<SpectrumTable> {
    potential.validate()?;
    if k_max == 0 {
        return Err(Error::InvalidArgument("K must be at least 1".into()));
    }
    if !(accuracy > 0.0) {
        return Err(Error::InvalidArgument(format!("accuracy must be positive, got {accuracy}")));
    }

    // size the box from a coarse estimate of λ_K until the turning point settles
    let mut half_width: f64 = 10.0;
    let guess = potential.weyl_guess(k_max);
    half_width = half_width.max(1.5 * potential.turning_point(guess) + 10.0);
    for _ in 0..8 {
        let coarse = Grid::with_spacing(half_width, coarse_spacing(guess))?;
        if coarse.n <= k_max {
            break;
        }
        let lam_k = *discrete_eigenvalues(potential, &coarse, k_max).last().unwrap();
        let wanted = 1.5 * potential.turning_point(lam_k) + 10.0;
        if wanted <= half_width {
            break;
        }
        half_width = wanted;
    }

    let mut last_err = None;
    for _ in 0..MAX_ENLARGE {
        match solve_on_box(potential, k_max, accuracy, half_width) {
            Ok(table) => return Ok(table),
            Err(Error::TruncationTooSmall { mass, half_width: x }) => {
                last_err = Some(Error::TruncationTooSmall { mass, half_width: x });
                half_width *= 1.25;
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err.expect("at least one attempt"))
}

fn coarse_spacing(lambda_max: f64) -> f64 {
    (0.3 / lambda_max.max(1.0).sqrt()).min(0.1)
}

fn solve_on_box(potential: &Potential, k_max: usize, accuracy: f64, half_width: f64) -> Result<SpectrumTable> {
    let guess = potential.weyl_guess(k_max);
    let mut grid = Grid::with_spacing(half_width, coarse_spacing(guess))?;
    while grid.n <= 4 * k_max {
        grid = grid.refined();
    }

    // Romberg table over the even-power error expansion in h
    let mut rows: Vec<Vec<Vec<f64>>> = Vec::new();
    let mut change = f64::INFINITY;
    let mut converged = false;
    for level in 0..MAX_LEVELS {
        if level > 0 {
            grid = grid.refined();
        }
        let raw = discrete_eigenvalues(potential, &grid, k_max);
        let mut row = vec![raw];
        if let Some(prev) = rows.last() {
            for j in 1..=prev.len().min(2) {
                let factor = 4f64.powi(j as i32);
                let ext: Vec<f64> = row[j - 1]
                    .iter()
                    .zip(&prev[j - 1])
                    .map(|(fine, coarse)| (factor * fine - coarse) / (factor - 1.0))
                    .collect();
                row.push(ext);
            }
            let best = row.last().unwrap();
            let prev_best = prev.last().unwrap();
            change = best
                .iter()
                .zip(prev_best)
                .map(|(a, b)| ((a - b) / a.abs().max(1e-300)).abs())
                .fold(0.0, f64::max);
        }
        rows.push(row);
        if change < accuracy && rows.len() >= 3 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence { levels: rows.len(), change });
    }

    let last = rows.last().unwrap();
    let lambdas = last.last().unwrap().clone();
    let discrete = last[0].clone();
    let op = grid.operator(potential);
    let pairs = eigenpairs(potential, &grid, &op, &lambdas, &discrete)?;

    let outer = 0.95 * half_width;
    let boundary_mass = pairs
        .iter()
        .map(|p| grid.integrate(p.phi.iter().enumerate().filter(|(i, _)| grid.x(*i).abs() > outer).map(|(_, v)| v * v)))
        .fold(0.0, f64::max);
    if boundary_mass > accuracy {
        return Err(Error::TruncationTooSmall { mass: boundary_mass, half_width });
    }

    let convergence = Convergence { levels: rows.len(), max_relative_change: change, accuracy, boundary_mass };
    Ok(SpectrumTable::assemble(*potential, grid, pairs, Some(convergence)))
}

fn eigenpairs(
    potential: &Potential,
    grid: &Grid,
    op: &SymTridiag,
    lambdas: &[f64],
    discrete: &[f64],
) -> Result<Vec<EigenPair>> {
    let h = grid.h();
    let mut units: Vec<Vec<f64>> = Vec::with_capacity(lambdas.len());
    let mut pairs = Vec::with_capacity(lambdas.len());
    for (idx, (&lam, &lam_d)) in lambdas.iter().zip(discrete).enumerate() {
        // reorthogonalise only against numerically close neighbours
        let close: Vec<&[f64]> = units
            .iter()
            .zip(discrete)
            .filter(|(_, l)| (lam_d - **l).abs() < 1e-6 * lam_d.abs().max(1.0))
            .map(|(u, _)| u.as_slice())
            .collect();
        let v = op.inverse_iteration(lam_d, 2, &close)?;
        let av = op.matvec(&v);
        let residual = av.iter().zip(&v).map(|(a, b)| (a - lam_d * b).powi(2)).sum::<f64>().sqrt();
        units.push(v.clone());

        let mut phi: Vec<f64> = v.iter().map(|x| x / h.sqrt()).collect();
        fix_sign(&mut phi, grid.center());
        let norm = grid.integrate(phi.iter().map(|x| x * x)).sqrt();
        let k = idx + 1;
        let (mu, parity) = match potential {
            Potential::Monomial { m } => (Some(lam.powf(1.0 / (2.0 * *m as f64))), Some(measured_parity(&phi))),
            _ => (None, None),
        };
        pairs.push(EigenPair {
            k,
            lambda: lam,
            lambda_discrete: lam_d,
            phi,
            mu,
            parity,
            norm_residual: (norm - 1.0).abs(),
            residual,
        });
    }
    Ok(pairs)
}

fn measured_parity(phi: &[f64]) -> Parity {
    let n = phi.len();
    let s: f64 = (0..n).map(|i| phi[i] * phi[n - 1 - i]).sum();
    if s >= 0.0 {
        Parity::Even
    } else {
        Parity::Odd
    }
}

/// First node right of the centre with `|φ| > max/2` is made positive.
fn fix_sign(phi: &mut [f64], center: usize) {
    let max = phi.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    if let Some(v) = phi[center..].iter().find(|v| v.abs() > 0.5 * max) {
        if *v < 0.0 {
            phi.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

impl SpectrumTable {
    fn assemble(potential: Potential, grid: Grid, pairs: Vec<EigenPair>, convergence: Option<Convergence>) -> Self {
        let weyl_b = potential.monomial_m().map(|m| weyl_ratio(m).powf(1.0 / (m as f64 + 1.0)));
        let min_gap = pairs.windows(2).map(|w| w[1].lambda - w[0].lambda).fold(f64::INFINITY, f64::min);
        Self { potential, grid, pairs, weyl_b, min_gap, convergence }
    }

    /// Exact Hermite basis (`m = 1`, `λ_k = 2k − 1`) sampled on `grid`.
    pub fn hermite(k_max: usize, grid: Grid) -> Self {
        let mut phis = vec![Vec::with_capacity(grid.n); k_max];
        for x in grid.nodes() {
            for (k, v) in hermite_functions(k_max, x).into_iter().enumerate() {
                phis[k].push(v);
            }
        }
        let pairs = phis
            .into_iter()
            .enumerate()
            .map(|(i, phi)| {
                let k = i + 1;
                let lambda = 2.0 * k as f64 - 1.0;
                let norm = grid.integrate(phi.iter().map(|x| x * x)).sqrt();
                EigenPair {
                    k,
                    lambda,
                    lambda_discrete: lambda,
                    phi,
                    mu: Some(lambda.sqrt()),
                    parity: Some(Parity::of_index(k)),
                    norm_residual: (norm - 1.0).abs(),
                    residual: 0.0,
                }
            })
            .collect();
        Self::assemble(Potential::Monomial { m: 1 }, grid, pairs, None)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.lambda).collect()
    }

    pub fn pair(&self, k: usize) -> Option<&EigenPair> {
        k.checked_sub(1).and_then(|i| self.pairs.get(i))
    }

    /// `⟨φ_j, φ_l⟩` by the trapezoid rule.
    pub fn gram(&self) -> Vec<Vec<f64>> {
        let n = self.pairs.len();
        let mut g = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..=i {
                let v = self.grid.integrate(self.pairs[i].phi.iter().zip(&self.pairs[j].phi).map(|(a, b)| a * b));
                g[i][j] = v;
                g[j][i] = v;
            }
        }
        g
    }

    /// One row per node: `x, φ_1(x), …, φ_K(x)`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        write!(w, "x")?;
        for p in &self.pairs {
            write!(w, ",phi_{}", p.k)?;
        }
        writeln!(w)?;
        for i in 0..self.grid.n {
            write!(w, "{:.16e}", self.grid.x(i))?;
            for p in &self.pairs {
                write!(w, ",{:.16e}", p.phi[i])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Table with eigenfunction samples stripped, for JSON headers.
    pub fn header(&self) -> SpectrumTable {
        let mut t = self.clone();
        t.pairs.iter_mut().for_each(|p| p.phi.clear());
        t
    }
}

/// `φ_k(x)` for the harmonic oscillator, `k ≥ 1` (Hermite degree `k − 1`).
pub fn hermite_exact(k: usize, x: f64) -> f64 {
    assert!(k >= 1, "eigen index is 1-based");
    hermite_functions(k, x)[k - 1]
}

/// `[φ_1(x), …, φ_n(x)]` by the normalised three-term recurrence, carried
/// in scaled form so that no intermediate under- or overflows.
pub fn hermite_functions(n: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    // value = a · exp(log_scale)
    let mut log_scale = -0.5 * x * x - 0.25 * PI.ln();
    let mut prev = 0.0;
    let mut cur = 1.0;
    let big = 1e150;
    for j in 0..n {
        out.push(cur * log_scale.exp());
        let jf = j as f64;
        let next = (2.0 / (jf + 1.0)).sqrt() * x * cur - (jf / (jf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > big {
            prev /= big;
            cur /= big;
            log_scale += big.ln();
        }
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeylFit {
    pub exponent: f64,
    pub constant: f64,
    pub target_exponent: f64,
    pub target_constant: f64,
    /// Exponent of the same fit taken against `k − ½`.
    pub exponent_half_shifted: f64,
    /// `r_k = λ_k / (ratio·k)^{2m/(m+1)} − 1` for every stored k.
    pub residuals: Vec<(usize, f64)>,
}

/// Least-squares fit of `log λ_k` against `log k` over the top half of the
/// table.
pub fn check_weyl_law(table: &SpectrumTable) -> Result<WeylFit> {
    let m = table
        .potential
        .monomial_m()
        .ok_or_else(|| Error::InvalidArgument("Weyl-law fit needs a monomial potential".into()))?;
    let kmax = table.len();
    if kmax < 20 {
        return Err(Error::InsufficientData(format!("Weyl-law fit needs K ≥ 20, table has {kmax}")));
    }
    let mf = m as f64;
    let target_exponent = 2.0 * mf / (mf + 1.0);
    let ratio = weyl_ratio(m);
    let target_constant = ratio.powf(target_exponent);
    let top = &table.pairs[kmax / 2..];
    let ks: Vec<f64> = top.iter().map(|p| p.k as f64).collect();
    let ls: Vec<f64> = top.iter().map(|p| p.lambda).collect();
    let (exponent, intercept) = fit::loglog_slope(&ks, &ls);
    let shifted: Vec<f64> = ks.iter().map(|k| k - 0.5).collect();
    let (exponent_half_shifted, _) = fit::loglog_slope(&shifted, &ls);
    let residuals =
        table.pairs.iter().map(|p| (p.k, p.lambda / (ratio * p.k as f64).powf(target_exponent) - 1.0)).collect();
    Ok(WeylFit { exponent, constant: intercept.exp(), target_exponent, target_constant, exponent_half_shifted, residuals })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GapProfile {
    pub min_gap: f64,
    /// Log-log slope of `λ_{k+1} − λ_k` against `k` over the top half.
    pub tail_slope: f64,
    pub gaps: Vec<f64>,
}

pub fn gap_profile(table: &SpectrumTable) -> Result<GapProfile> {
    let kmax = table.len();
    if kmax < 10 {
        return Err(Error::InsufficientData(format!("gap profile needs K ≥ 10, table has {kmax}")));
    }
    let gaps: Vec<f64> = table.pairs.windows(2).map(|w| w[1].lambda - w[0].lambda).collect();
    let start = gaps.len() / 2;
    let ks: Vec<f64> = (start..gaps.len()).map(|i| (i + 1) as f64).collect();
    let (tail_slope, _) = fit::loglog_slope(&ks, &gaps[start..]);
    let min_gap = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(GapProfile { min_gap, tail_slope, gaps })
}

/// Count of strict sign changes, ignoring samples below `floor·max|φ|`.
pub fn sign_changes(phi: &[f64], floor: f64) -> usize {
    let max = phi.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let mut last = 0.0;
    let mut count = 0;
    for &v in phi {
        if v.abs() <= floor * max {
            continue;
        }
        if last != 0.0 && (v > 0.0) != (last > 0.0) {
            count += 1;
        }
        last = v;
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_central_values() {
        assert!((hermite_exact(1, 0.0) - 0.751_125_544_464_942_5).abs() < 1e-15);
        assert_eq!(hermite_exact(2, 0.0), 0.0);
        assert!((hermite_exact(3, 1.0) - 0.322_144_182_556_737_6).abs() < 1e-15);
    }

    #[test]
    fn hermite_survives_large_arguments() {
        let v = hermite_functions(1000, 40.0);
        assert!(v.iter().all(|x| x.is_finite()));
        assert!(v.iter().all(|x| x.abs() <= 1.09));
        // beyond the turning point √(2n+1) ≈ 44.7 everything is tiny but nonzero for high n
        assert!(v[999].abs() > 0.0);
    }

    #[test]
    fn harmonic_levels() {
        let t = solve_spectrum(&Potential::Monomial { m: 1 }, 5, 1e-9).unwrap();
        for (k, p) in t.pairs.iter().enumerate() {
            let exact = 2.0 * k as f64 + 1.0;
            assert!((p.lambda - exact).abs() < 1e-7 * exact, "{} vs {exact}", p.lambda);
            assert_eq!(p.parity, Some(Parity::of_index(k + 1)));
        }
    }

    #[test]
    fn quartic_ground_state() {
        // independent FD + double Richardson reference: 1.0603620904569646
        let t = solve_spectrum(&Potential::Monomial { m: 2 }, 1, 1e-10).unwrap();
        assert!((t.pairs[0].lambda - 1.060_362_090_456_964_6).abs() < 1e-7);
    }

    #[test]
    fn zero_k_is_rejected() {
        assert!(matches!(solve_spectrum(&Potential::Monomial { m: 1 }, 0, 1e-6), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn grid_refinement_nests_nodes() {
        let g = Grid::new(5.0, 9).unwrap();
        let f = g.refined();
        assert_eq!(f.n, 19);
        assert!((f.x(2 * 3 + 1) - g.x(3)).abs() < 1e-14);
        assert_eq!(g.x(g.center()), 0.0);
    }

    #[test]
    fn sign_change_counting() {
        assert_eq!(sign_changes(&[1.0, 0.5, -0.5, -1.0, 0.0, 2.0], 1e-3), 2);
    }
}
