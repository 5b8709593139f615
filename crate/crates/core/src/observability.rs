//! Observability diagnostics: eigenfunction masses on a set, the resolvent
//! margin, the Gaussian thickness witness for the free equation and a
//! discrete uncertainty constant.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit;
use crate::realset::{Interval, RealSet, SetFamily};
use crate::spectra::{gap_profile, Grid, Potential, SpectrumTable};
use crate::wkb::turning_half_width;

// ---------------------------------------------------------------------------
// eigenfunction masses

/// `|E ∩ [x_i − h/2, x_i + h/2]| / h` for every node of `grid`.
pub fn cell_weights(set: &RealSet, grid: &Grid) -> Result<Vec<f64>> {
    if set.horizon() < grid.half_width {
        return Err(Error::GridSetMismatch { horizon: set.horizon(), half_width: grid.half_width });
    }
    let h = grid.h();
    (0..grid.n)
        .map(|i| {
            let x = grid.x(i);
            Ok(set.measure_in(Interval { lo: x - 0.5 * h, hi: x + 0.5 * h })? / h)
        })
        .collect()
}

fn weighted_mass(grid: &Grid, weights: &[f64], phi: &[f64]) -> f64 {
    grid.integrate(weights.iter().zip(phi).map(|(w, p)| w * p * p))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MassVerdict {
    ObservableEvidence,
    NonObservableEvidence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapRegime {
    /// Bounded gaps: observability at some time.
    AtSomeTime,
    /// Growing gaps: observability at any time.
    AtAnyTime,
}

/// Masses decaying faster than `μ_k^{-1/4}` along the upper half of the
/// table count as evidence against observability.
pub const MASS_DECAY_SLOPE: f64 = -0.25;
/// Tail gap slope separating the two regimes.
pub const GROWING_GAP_SLOPE: f64 = 0.1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MassReport {
    pub family: SetFamily,
    pub horizon: f64,
    pub potential: Potential,
    /// `e_k = ∫_E |φ_k|²`, k = 1..K.
    pub masses: Vec<f64>,
    pub inf_mass: f64,
    /// `min_{k ≤ K/2} e_k`.
    pub inf_mass_half: f64,
    /// Slope of `log e_k` against `log μ_k` over the upper half of the table.
    pub tail_slope: f64,
    /// Same masses for the parity fold of the set (monomial potentials).
    pub folded_masses: Option<Vec<f64>>,
    pub verdict: MassVerdict,
    pub gap_regime: Option<GapRegime>,
}

pub fn eigenmass(set: &RealSet, table: &SpectrumTable) -> Result<MassReport> {
    let grid = &table.grid;
    let weights = cell_weights(set, grid)?;
    let masses: Vec<f64> = table.pairs.iter().map(|p| weighted_mass(grid, &weights, &p.phi)).collect();
    let folded_masses = match table.potential {
        Potential::Monomial { .. } => {
            let fw = cell_weights(&set.parity_fold(), grid)?;
            Some(table.pairs.iter().map(|p| weighted_mass(grid, &fw, &p.phi)).collect())
        }
        _ => None,
    };
    let inf_mass = masses.iter().copied().fold(f64::INFINITY, f64::min);
    let half = (masses.len() / 2).max(1);
    let inf_mass_half = masses[..half].iter().copied().fold(f64::INFINITY, f64::min);
    let upper: Vec<(f64, f64)> = table.pairs[half..]
        .iter()
        .zip(&masses[half..])
        .filter(|(_, e)| **e > 0.0)
        .map(|(p, e)| (table.potential.turning_point(p.lambda).ln(), e.ln()))
        .collect();
    let tail_slope = if upper.len() >= 2 {
        let (xs, ys): (Vec<f64>, Vec<f64>) = upper.into_iter().unzip();
        fit::line(&xs, &ys).0
    } else {
        0.0
    };
    let verdict = if inf_mass > 0.0 && tail_slope > MASS_DECAY_SLOPE {
        MassVerdict::ObservableEvidence
    } else {
        MassVerdict::NonObservableEvidence
    };
    let gap_regime = gap_profile(table).ok().map(|g| {
        if g.tail_slope > GROWING_GAP_SLOPE {
            GapRegime::AtAnyTime
        } else {
            GapRegime::AtSomeTime
        }
    });
    Ok(MassReport {
        family: set.family().clone(),
        horizon: set.horizon(),
        potential: table.potential,
        masses,
        inf_mass,
        inf_mass_half,
        tail_slope,
        folded_masses,
        verdict,
        gap_regime,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassDecomposition {
    /// Oscillatory, turning and tail contributions.
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
}

impl MassDecomposition {
    pub fn total(&self) -> f64 {
        self.i1 + self.i2 + self.i3
    }
}

/// Split `e_k(E)` along the WKB regions `|x| < μ − w`, `μ − w ≤ |x| ≤ μ + w`
/// and `|x| > μ + w`, `w = δμ^{−(2m−1)/3}`.
pub fn mass_profile_decomposition(set: &RealSet, table: &SpectrumTable, k: usize) -> Result<MassDecomposition> {
    let m = table
        .potential
        .monomial_m()
        .ok_or_else(|| Error::InvalidArgument("mass decomposition needs a monomial potential".into()))?;
    let pair = table.pair(k).ok_or_else(|| Error::InvalidArgument(format!("level {k} is not in the table")))?;
    let grid = &table.grid;
    let mu = pair.lambda.powf(1.0 / (2.0 * m as f64));
    let w = turning_half_width(m, mu);
    let (a, b) = (mu - w, mu + w);
    let inf = f64::INFINITY;
    let osc = RealSet::from_intervals([Interval { lo: -a, hi: a }]);
    let turning = RealSet::from_intervals([Interval { lo: -b, hi: -a }, Interval { lo: a, hi: b }]);
    let tail = RealSet::from_intervals([Interval { lo: -inf, hi: -b }, Interval { lo: b, hi: inf }]);
    let part = |region: &RealSet| -> Result<f64> {
        let weights = cell_weights(&set.intersect(region), grid)?;
        Ok(weighted_mass(grid, &weights, &pair.phi))
    };
    Ok(MassDecomposition { i1: part(&osc)?, i2: part(&turning)?, i3: part(&tail)? })
}

// ---------------------------------------------------------------------------
// resolvent margin

/// Discrete second-order operator used by the resolvent probe.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbeOperator {
    /// Node positions.
    pub nodes: Vec<f64>,
    pub h: f64,
    /// Diagonal of `A` (including the potential).
    pub diag: Vec<f64>,
    /// Off-diagonal value `−1/h²`.
    pub off: f64,
    /// Whether the first and last nodes are coupled.
    pub periodic: bool,
}

impl ProbeOperator {
    /// `−d²/dx²` on `[−X, X)` with periodic walls and `n` nodes.
    pub fn free_periodic(half_width: f64, n: usize) -> Result<Self> {
        if n < 8 || !(half_width > 0.0) {
            return Err(Error::InvalidArgument(format!("periodic probe grid needs n ≥ 8 and X > 0 (got {n}, {half_width})")));
        }
        let h = 2.0 * half_width / n as f64;
        Ok(Self {
            nodes: (0..n).map(|i| -half_width + i as f64 * h).collect(),
            h,
            diag: vec![2.0 / (h * h); n],
            off: -1.0 / (h * h),
            periodic: true,
        })
    }

    /// `−d²/dx² + V` with Dirichlet walls on a spectral grid.
    pub fn dirichlet(potential: &Potential, grid: &Grid) -> Self {
        let h = grid.h();
        Self {
            nodes: grid.nodes(),
            h,
            diag: grid.nodes().iter().map(|&x| 2.0 / (h * h) + potential.eval(x)).collect(),
            off: -1.0 / (h * h),
            periodic: false,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Frequencies up to `h^{-2}/4` are resolved.
    pub fn reliable_lambda(&self) -> f64 {
        0.25 / (self.h * self.h)
    }

    fn shifted_apply(&self, lambda: f64, u: &[f64]) -> Vec<f64> {
        let n = u.len();
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut s = (self.diag[i] - lambda) * u[i];
            if i > 0 {
                s += self.off * u[i - 1];
            } else if self.periodic {
                s += self.off * u[n - 1];
            }
            if i + 1 < n {
                s += self.off * u[i + 1];
            } else if self.periodic {
                s += self.off * u[0];
            }
            out[i] = s;
        }
        out
    }

    /// Cell weights of `set` on the probe nodes.
    pub fn set_weights(&self, set: &RealSet) -> Result<Vec<f64>> {
        let reach = self.nodes.iter().fold(0.0f64, |a, x| a.max(x.abs())) + self.h;
        if set.horizon() < reach {
            return Err(Error::GridSetMismatch { horizon: set.horizon(), half_width: reach });
        }
        self.nodes
            .iter()
            .map(|&x| Ok(set.measure_in(Interval { lo: x - 0.5 * self.h, hi: x + 0.5 * self.h })? / self.h))
            .collect()
    }
}

/// `B = M(A − λ)² + m_w·D_E` with a factorised shift for inverse iteration.
struct MarginForm<'a> {
    op: &'a ProbeOperator,
    lambda: f64,
    big_m: f64,
    m_w: f64,
    weights: &'a [f64],
    chol: BandCholesky,
    /// Woodbury data for the periodic wrap: indices, `Z = P⁻¹U`, `(I + W·UᵀZ)⁻¹·W`.
    wrap: Option<(Vec<usize>, DMatrix<f64>, DMatrix<f64>)>,
}

const SHIFT: f64 = 1e-6;

impl<'a> MarginForm<'a> {
    fn new(op: &'a ProbeOperator, weights: &'a [f64], big_m: f64, m_w: f64, lambda: f64) -> Result<Self> {
        let n = op.len();
        let c = op.off;
        let t: Vec<f64> = op.diag.iter().map(|d| d - lambda).collect();
        // pentadiagonal part M(T² + C²) + m_w D + shift
        let mut d0 = vec![0.0; n];
        let mut d1 = vec![0.0; n.saturating_sub(1)];
        let mut d2 = vec![0.0; n.saturating_sub(2)];
        for i in 0..n {
            let neighbours = if op.periodic { 2.0 } else { (i > 0) as u8 as f64 + (i + 1 < n) as u8 as f64 };
            d0[i] = big_m * (t[i] * t[i] + neighbours * c * c) + m_w * weights[i] + SHIFT;
        }
        for i in 0..n.saturating_sub(1) {
            d1[i] = big_m * c * (t[i] + t[i + 1]);
        }
        for v in d2.iter_mut() {
            *v = big_m * c * c;
        }
        let chol = BandCholesky::factor(d0, d1, d2).ok_or(Error::EigenIterationFailure { iterations: 0 })?;

        let wrap = if op.periodic {
            let idx = vec![0, 1, n - 2, n - 1];
            // W = M(TC + CT) restricted to idx
            let mut w = DMatrix::zeros(4, 4);
            let corner = big_m * c * (t[0] + t[n - 1]);
            let side = big_m * c * c;
            w[(0, 3)] = corner;
            w[(3, 0)] = corner;
            w[(1, 3)] = side;
            w[(3, 1)] = side;
            w[(0, 2)] = side;
            w[(2, 0)] = side;
            let mut z = DMatrix::zeros(n, 4);
            for (col, &j) in idx.iter().enumerate() {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                let s = chol.solve(&e);
                z.set_column(col, &DVector::from_vec(s));
            }
            let mut utz = DMatrix::zeros(4, 4);
            for (r, &j) in idx.iter().enumerate() {
                for col in 0..4 {
                    utz[(r, col)] = z[(j, col)];
                }
            }
            let core = DMatrix::identity(4, 4) + &w * utz;
            let inv = core.try_inverse().ok_or(Error::EigenIterationFailure { iterations: 0 })?;
            Some((idx, z, inv * w))
        } else {
            None
        };
        Ok(Self { op, lambda, big_m, m_w, weights, chol, wrap })
    }

    fn apply(&self, u: &[f64]) -> Vec<f64> {
        let r = self.op.shifted_apply(self.lambda, u);
        let rr = self.op.shifted_apply(self.lambda, &r);
        rr.iter().zip(self.weights).zip(u).map(|((a, w), ui)| self.big_m * a + self.m_w * w * ui).collect()
    }

    /// `(B + shift)⁻¹ y`
    fn solve(&self, y: &[f64]) -> Vec<f64> {
        let mut x = self.chol.solve(y);
        if let Some((idx, z, core)) = &self.wrap {
            let ut = DVector::from_iterator(4, idx.iter().map(|&j| x[j]));
            let corr = core * ut;
            let delta = z * corr;
            for (xi, di) in x.iter_mut().zip(delta.iter()) {
                *xi -= di;
            }
        }
        x
    }
}

/// Cholesky factor of a symmetric positive definite pentadiagonal matrix.
struct BandCholesky {
    l0: Vec<f64>,
    l1: Vec<f64>,
    l2: Vec<f64>,
}

impl BandCholesky {
    fn factor(d0: Vec<f64>, d1: Vec<f64>, d2: Vec<f64>) -> Option<Self> {
        let n = d0.len();
        let mut l0 = vec![0.0; n];
        let mut l1 = vec![0.0; n.saturating_sub(1)];
        let mut l2 = vec![0.0; n.saturating_sub(2)];
        for i in 0..n {
            // L[i][i-2], L[i][i-1], L[i][i]
            if i >= 2 {
                l2[i - 2] = d2[i - 2] / l0[i - 2];
            }
            if i >= 1 {
                let mut s = d1[i - 1];
                if i >= 2 {
                    s -= l2[i - 2] * l1[i - 2];
                }
                l1[i - 1] = s / l0[i - 1];
            }
            let mut s = d0[i];
            if i >= 1 {
                s -= l1[i - 1] * l1[i - 1];
            }
            if i >= 2 {
                s -= l2[i - 2] * l2[i - 2];
            }
            if !(s > 0.0) {
                return None;
            }
            l0[i] = s.sqrt();
        }
        Some(Self { l0, l1, l2 })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = b[i];
            if i >= 1 {
                s -= self.l1[i - 1] * y[i - 1];
            }
            if i >= 2 {
                s -= self.l2[i - 2] * y[i - 2];
            }
            y[i] = s / self.l0[i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            if i + 1 < n {
                s -= self.l1[i] * y[i + 1];
            }
            if i + 2 < n {
                s -= self.l2[i] * y[i + 2];
            }
            y[i] = s / self.l0[i];
        }
        y
    }
}

const BLOCK: usize = 6;
const MAX_ITER: usize = 3000;
const RQ_TOL: f64 = 1e-10;
/// Residual floor relative to `max(θ, 1)`; the Ritz value error is quadratic in it.
const RES_TOL: f64 = 1e-6;
/// Residual floor relative to `‖B‖`, where rounding in `B` dominates.
const RES_ROUNDING: f64 = 1e-9;

fn map_columns(x: &DMatrix<f64>, f: impl Fn(&[f64]) -> Vec<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(x.nrows(), x.ncols());
    for j in 0..x.ncols() {
        let col: Vec<f64> = x.column(j).iter().copied().collect();
        out.set_column(j, &DVector::from_vec(f(&col)));
    }
    out
}

/// Orthonormal basis of the span of the normalised columns, dropping
/// directions below `1e-12` of the Gram spectrum.
fn orthonormalize(s: &DMatrix<f64>) -> DMatrix<f64> {
    let mut s = s.clone();
    for mut c in s.column_iter_mut() {
        let n = c.norm();
        if n > 0.0 {
            c /= n;
        }
    }
    let eig = SymmetricEigen::new(s.transpose() * &s);
    let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..s.ncols()).filter(|&i| eig.eigenvalues[i] > 1e-12 * top).collect();
    let v = DMatrix::from_fn(s.ncols(), keep.len(), |r, c| eig.eigenvectors[(r, keep[c])]);
    (&s * v).qr().q()
}

/// Lowest `b` Ritz pairs of `B` on the span of the orthonormal `q`.
fn rayleigh_ritz(q: &DMatrix<f64>, bq: &DMatrix<f64>, b: usize) -> (Vec<f64>, DMatrix<f64>) {
    let hmat = q.transpose() * bq;
    let eig = SymmetricEigen::new((&hmat + hmat.transpose()) * 0.5);
    let mut order: Vec<usize> = (0..hmat.ncols()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let b = b.min(order.len());
    let c = DMatrix::from_fn(hmat.ncols(), b, |r, k| eig.eigenvectors[(r, order[k])]);
    ((0..b).map(|k| eig.eigenvalues[order[k]]).collect(), c)
}

/// Smallest eigenvalue of `M(A − λ)² + m_w·D` by LOBPCG preconditioned with
/// the exact shifted inverse; returns `(value, iterations)`.
pub fn smallest_margin(
    op: &ProbeOperator,
    weights: &[f64],
    big_m: f64,
    m_w: f64,
    lambda: f64,
    seed: u64,
) -> Result<(f64, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = DMatrix::from_fn(op.len(), BLOCK.min(op.len()), |_, _| rng.gen::<f64>() - 0.5);
    lobpcg(op, weights, big_m, m_w, lambda, start).map(|(v, it, _)| (v, it))
}

fn lobpcg(
    op: &ProbeOperator,
    weights: &[f64],
    big_m: f64,
    m_w: f64,
    lambda: f64,
    start: DMatrix<f64>,
) -> Result<(f64, usize, DMatrix<f64>)> {
    if !(big_m > 0.0 && m_w >= 0.0) {
        return Err(Error::InvalidArgument(format!("need M > 0 and m_w ≥ 0, got {big_m}, {m_w}")));
    }
    let form = MarginForm::new(op, weights, big_m, m_w, lambda)?;
    let a_norm = op.diag.iter().map(|d| (d - lambda).abs()).fold(0.0, f64::max) + 2.0 * op.off.abs();
    let b_norm = big_m * a_norm * a_norm + m_w;
    let b = start.ncols();
    let q = orthonormalize(&start);
    let bq = map_columns(&q, |c| form.apply(c));
    let (mut theta, c) = rayleigh_ritz(&q, &bq, b);
    let mut x = &q * c;
    let mut p: Option<DMatrix<f64>> = None;
    let mut theta_prev = f64::INFINITY;
    for iter in 1..=MAX_ITER {
        let bx = map_columns(&x, |c| form.apply(c));
        let mut r = bx.clone();
        for j in 0..x.ncols() {
            let xj = x.column(j) * theta[j];
            let mut rj = r.column_mut(j);
            rj -= xj;
        }
        let scale = theta[0].abs().max(1.0);
        let res = r.column(0).norm();
        if (theta[0] - theta_prev).abs() <= RQ_TOL * scale && res <= (RES_TOL * scale).max(RES_ROUNDING * b_norm) {
            return Ok((theta[0], iter, x));
        }
        theta_prev = theta[0];
        let w = map_columns(&r, |c| form.solve(c));
        let mut cols = vec![x.clone(), w];
        if let Some(p) = &p {
            cols.push(p.clone());
        }
        let total: usize = cols.iter().map(|m| m.ncols()).sum();
        let mut s = DMatrix::zeros(x.nrows(), total);
        let mut at = 0;
        for m in &cols {
            s.columns_mut(at, m.ncols()).copy_from(m);
            at += m.ncols();
        }
        let q = orthonormalize(&s);
        let bq = map_columns(&q, |c| form.apply(c));
        let (t, c) = rayleigh_ritz(&q, &bq, b);
        let xn = &q * c;
        let overlap = x.transpose() * &xn;
        p = Some(&xn - &x * overlap);
        x = xn;
        theta = t;
    }
    Err(Error::EigenIterationFailure { iterations: MAX_ITER })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResolventProbe {
    pub half_width: f64,
    pub n: usize,
    pub h: f64,
    pub periodic: bool,
    pub big_m: f64,
    pub m_w: f64,
    pub lambda_grid: Vec<f64>,
    pub margins: Vec<f64>,
    pub iterations: Vec<usize>,
    pub reliable_lambda: f64,
}

impl ResolventProbe {
    pub fn min_margin(&self) -> f64 {
        self.margins.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Discrete form of `‖u‖² ≤ M‖(A−λ)u‖² + m_w‖u‖²_E` holds at every probed λ.
    pub fn inequality_holds(&self) -> bool {
        self.min_margin() >= 1.0
    }
}

pub fn resolvent_margin(
    set: &RealSet,
    op: &ProbeOperator,
    big_m: f64,
    m_w: f64,
    lambdas: &[f64],
    seed: u64,
) -> Result<ResolventProbe> {
    let weights = op.set_weights(set)?;
    let mut margins = Vec::with_capacity(lambdas.len());
    let mut iterations = Vec::with_capacity(lambdas.len());
    for &lam in lambdas {
        let (v, it) = smallest_margin(op, &weights, big_m, m_w, lam, seed)?;
        margins.push(v);
        iterations.push(it);
    }
    let half_width = 0.5 * op.h * op.len() as f64;
    Ok(ResolventProbe {
        half_width,
        n: op.len(),
        h: op.h,
        periodic: op.periodic,
        big_m,
        m_w,
        lambda_grid: lambdas.to_vec(),
        margins,
        iterations,
        reliable_lambda: op.reliable_lambda(),
    })
}

/// Default sweep for the constants `(M, m_w)`.
pub const SWEEP_M: [f64; 3] = [0.1, 1.0, 10.0];
pub const SWEEP_MW: [f64; 4] = [1.0, 3.0, 10.0, 30.0];

/// Probe every `(M, m_w)` pair; the best pair maximises the minimum margin.
pub fn resolvent_sweep(
    set: &RealSet,
    op: &ProbeOperator,
    ms: &[f64],
    mws: &[f64],
    lambdas: &[f64],
    seed: u64,
) -> Result<Vec<ResolventProbe>> {
    let mut out = Vec::with_capacity(ms.len() * mws.len());
    for &big_m in ms {
        for &m_w in mws {
            out.push(resolvent_margin(set, op, big_m, m_w, lambdas, seed)?);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Gaussian witness for the free equation

/// `∫ |(4π)^{−1/2} e^{−x²/4}|² dx = 1/(2√(2π))`.
pub const GAUSSIAN_LHS: f64 = 0.199_471_140_200_716_34;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaussianWitness {
    pub t_final: f64,
    pub c_obs: f64,
    pub x0: f64,
    pub window_len: f64,
    pub window: Interval,
    pub window_measure: f64,
    pub lhs: f64,
    pub tail_term: f64,
    pub rhs: f64,
    /// `√(2π)/(4·C_obs·T)`.
    pub lower_bound: f64,
    /// Window measure meets the implied bound.
    pub satisfied: bool,
}

/// Smallest `L` with `(C·T/2π)·√(4π(1+T²))·e^{−L²/(16(1+T²))} ≤ 1/(4√(2π))`.
pub fn witness_window_len(t_final: f64, c_obs: f64) -> f64 {
    let s = 1.0 + t_final * t_final;
    let arg = c_obs * t_final / (2.0 * PI) * (4.0 * PI * s).sqrt() * 4.0 * (2.0 * PI).sqrt();
    if arg <= 1.0 {
        0.0
    } else {
        (16.0 * s * arg.ln()).sqrt()
    }
}

pub fn gaussian_thickness_witness(set: &RealSet, t_final: f64, c_obs: f64, x0: f64) -> Result<GaussianWitness> {
    if !(t_final > 0.0 && c_obs > 0.0) {
        return Err(Error::InvalidArgument(format!("need T > 0 and C_obs > 0, got {t_final}, {c_obs}")));
    }
    let len = witness_window_len(t_final, c_obs);
    let window = Interval { lo: x0 - 0.5 * len, hi: x0 + 0.5 * len };
    let window_measure = set.measure_in(window)?;
    let s = 1.0 + t_final * t_final;
    let pref = c_obs * t_final / (2.0 * PI);
    let tail_term = pref * (4.0 * PI * s).sqrt() * (-len * len / (16.0 * s)).exp();
    let rhs = pref * window_measure + tail_term;
    let lower_bound = (2.0 * PI).sqrt() / (4.0 * c_obs * t_final);
    Ok(GaussianWitness {
        t_final,
        c_obs,
        x0,
        window_len: len,
        window,
        window_measure,
        lhs: GAUSSIAN_LHS,
        tail_term,
        rhs,
        lower_bound,
        satisfied: window_measure >= lower_bound,
    })
}

/// First centre in `x0s` where the implied window bound fails.
pub fn first_violation<I: IntoIterator<Item = f64>>(
    set: &RealSet,
    t_final: f64,
    c_obs: f64,
    x0s: I,
) -> Result<Option<GaussianWitness>> {
    for x0 in x0s {
        let w = gaussian_thickness_witness(set, t_final, c_obs, x0)?;
        if !w.satisfied {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// discrete uncertainty constant

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NazarovProbe {
    pub s_len: f64,
    pub sigma_len: f64,
    pub n: usize,
    /// `dx = dξ = 1/√N`.
    pub spacing: f64,
    pub lambda_min: f64,
    /// `2/λ_min`, so that empty sets give 1; infinite when `λ_min ≤ NAZAROV_FLOOR`.
    pub best_constant: f64,
}

/// Eigenvalues of `D_{Sᶜ} + F*D_{Σᶜ}F` below this are treated as zero.
pub const NAZAROV_FLOOR: f64 = 1e-12;

/// Smallest eigenvalue of `D_{Sᶜ} + F*D_{Σᶜ}F` on the centred N-point line.
/// Once `#S + #Σ > N` a vector supported in `S` with transform in `Σ` exists
/// and the constant is infinite.
pub fn nazarov_constant(s_len: f64, sigma_len: f64, n: usize) -> Result<NazarovProbe> {
    if n < 4 || !n.is_power_of_two() {
        return Err(Error::InvalidArgument(format!("DFT size must be a power of two ≥ 4, got {n}")));
    }
    let spacing = 1.0 / (n as f64).sqrt();
    let line = n as f64 * spacing;
    if !(s_len >= 0.0 && sigma_len >= 0.0) || s_len > line || sigma_len > line {
        return Err(Error::InvalidArgument(format!("S and Σ lengths must lie in [0, {line}]")));
    }
    let c = (n / 2) as i64;
    let outside = |len: f64, j: usize| ((j as i64 - c) as f64 * spacing).abs() >= 0.5 * len;
    let dsig: Vec<f64> = (0..n).map(|k| outside(sigma_len, k) as u8 as f64).collect();
    // G_{jl} depends on j − l only
    let kernel: Vec<f64> = (0..n)
        .map(|d| {
            let s: f64 = (0..n)
                .filter(|&k| dsig[k] != 0.0)
                .map(|k| (2.0 * PI * (k as i64 - c) as f64 * d as f64 / n as f64).cos())
                .sum();
            s / n as f64
        })
        .collect();
    let p = DMatrix::from_fn(n, n, |j, l| {
        let d = if j >= l { j - l } else { l - j };
        kernel[d] + if j == l && outside(s_len, j) { 1.0 } else { 0.0 }
    });
    let eig = SymmetricEigen::new(p);
    let lambda_min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min).max(0.0);
    // ‖P‖ ≤ 2, so anything below the floor is a null vector at rounding level
    let best_constant = if lambda_min > NAZAROV_FLOOR { 2.0 / lambda_min } else { f64::INFINITY };
    Ok(NazarovProbe { s_len, sigma_len, n, spacing, lambda_min, best_constant })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NazarovSweep {
    pub probes: Vec<NazarovProbe>,
    /// Slope of `log best_constant` against `|S|·|Σ|` over the finite constants.
    pub slope: f64,
    pub intercept: f64,
    /// `log best_constant` never decreases along the sweep.
    pub monotone: bool,
}

/// Equal-length sweep `|S| = |Σ| = √p` over the products `p`.
pub fn nazarov_sweep(products: &[f64], n: usize) -> Result<NazarovSweep> {
    let probes: Vec<NazarovProbe> =
        products.iter().map(|p| nazarov_constant(p.sqrt(), p.sqrt(), n)).collect::<Result<_>>()?;
    let logs: Vec<f64> = probes.iter().map(|p| p.best_constant.ln()).collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        products.iter().zip(&logs).filter(|(_, l)| l.is_finite()).map(|(p, l)| (*p, *l)).unzip();
    if xs.len() < 2 {
        return Err(Error::InsufficientData("fewer than two finite constants in the sweep".into()));
    }
    let (slope, intercept) = fit::line(&xs, &ys);
    let monotone = logs.windows(2).all(|w| w[1] >= w[0] - 1e-9);
    Ok(NazarovSweep { probes, slope, intercept, monotone })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_cholesky_solves() {
        let n = 12;
        let d0: Vec<f64> = (0..n).map(|i| 6.0 + i as f64 * 0.1).collect();
        let d1 = vec![-2.0; n - 1];
        let d2 = vec![0.5; n - 2];
        let ch = BandCholesky::factor(d0.clone(), d1.clone(), d2.clone()).unwrap();
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let x = ch.solve(&b);
        for i in 0..n {
            let mut s = d0[i] * x[i];
            if i >= 1 {
                s += d1[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                s += d1[i] * x[i + 1];
            }
            if i >= 2 {
                s += d2[i - 2] * x[i - 2];
            }
            if i + 2 < n {
                s += d2[i] * x[i + 2];
            }
            assert!((s - b[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn periodic_solve_inverts_apply() {
        let op = ProbeOperator::free_periodic(3.0, 30).unwrap();
        let w: Vec<f64> = (0..30).map(|i| (i % 3 == 0) as u8 as f64).collect();
        let form = MarginForm::new(&op, &w, 0.7, 2.0, 5.0).unwrap();
        let y: Vec<f64> = (0..30).map(|i| (0.3 * i as f64).cos()).collect();
        let x = form.solve(&y);
        let back = form.apply(&x);
        for (a, (b, xi)) in back.iter().zip(y.iter().zip(&x)) {
            assert!((a + SHIFT * xi - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn full_set_margin_is_m_w() {
        let op = ProbeOperator::free_periodic(10.0, 200).unwrap();
        let w = vec![1.0; 200];
        for lam in [0.0, 3.3, 50.0] {
            let (v, _) = smallest_margin(&op, &w, 2.0, 1.0, lam, 7).unwrap();
            assert!(v >= 1.0 - 1e-9, "{v}");
        }
    }

    #[test]
    fn witness_window_suppresses_tail() {
        let (t, c) = (1.0, 5.0);
        let len = witness_window_len(t, c);
        let s: f64 = 2.0;
        let tail = c * t / (2.0 * PI) * (4.0 * PI * s).sqrt() * (-len * len / (16.0 * s)).exp();
        assert!((tail - 0.25 / (2.0 * PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn empty_sets_give_unit_constant() {
        let p = nazarov_constant(0.0, 0.0, 64).unwrap();
        assert!((p.best_constant - 1.0).abs() < 1e-12);
    }

    #[test]
    fn weights_match_partial_cells() {
        let grid = Grid::new(2.0, 3).unwrap();
        let set = RealSet::from_intervals([Interval { lo: 0.5, hi: 10.0 }]);
        let w = cell_weights(&set, &grid).unwrap();
        assert_eq!(w, vec![0.0, 0.0, 1.0]);
        let half = RealSet::from_intervals([Interval { lo: 0.0, hi: 10.0 }]);
        assert_eq!(cell_weights(&half, &grid).unwrap()[1], 0.5);
    }
}
