//! Symmetric tridiagonal eigenproblems: Sturm counts, bisection with a
//! Newton polish, and inverse iteration through a pivoted LU.

use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix; `off.len() == diag.len() - 1`.
#[derive(Debug, Clone)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert!(!diag.is_empty() && off.len() + 1 == diag.len());
        Self { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn sturm_count(&self, x: f64) -> usize {
        let tiny = f64::MIN_POSITIVE.sqrt();
        let mut count = 0;
        let mut q = self.diag[0] - x;
        for i in 0.. {
            if q == 0.0 {
                q = -tiny;
            }
            if q < 0.0 {
                count += 1;
            }
            if i + 1 == self.diag.len() {
                break;
            }
            let e = self.off[i];
            q = self.diag[i + 1] - x - e * e / q;
        }
        count
    }

    /// `(Σ q'_i/q_i)^{-1}`: the Newton correction for `det(A − x) = Π q_i`.
    fn newton_correction(&self, x: f64) -> Option<f64> {
        let mut q = self.diag[0] - x;
        let mut dq = -1.0;
        let mut s = dq / q;
        for i in 1..self.diag.len() {
            if q == 0.0 {
                return None;
            }
            let e2 = self.off[i - 1] * self.off[i - 1];
            let (qp, dqp) = (q, dq);
            q = self.diag[i] - x - e2 / qp;
            dq = -1.0 + e2 * dqp / (qp * qp);
            s += dq / q;
        }
        (s.is_finite() && s != 0.0).then(|| 1.0 / s)
    }

    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 } + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// The `k`-th smallest eigenvalue (0-based) inside the bracket `[lo, hi]`.
    pub fn eigenvalue_in(&self, k: usize, mut lo: f64, mut hi: f64) -> f64 {
        debug_assert!(self.sturm_count(lo) <= k && self.sturm_count(hi) > k);
        for _ in 0..256 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
                break;
            }
            if self.sturm_count(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let mid = 0.5 * (lo + hi);
        match self.newton_correction(mid) {
            Some(dx) if (mid - dx) >= lo && (mid - dx) <= hi => mid - dx,
            _ => mid,
        }
    }

    /// The `count` smallest eigenvalues in increasing order.
    pub fn lowest_eigenvalues(&self, count: usize) -> Vec<f64> {
        assert!(count <= self.len());
        let (glo, ghi) = self.gershgorin();
        let pad = 1e-12 * (glo.abs().max(ghi.abs()) + 1.0);
        let (glo, ghi) = (glo - pad, ghi + pad);
        let mut out = Vec::with_capacity(count);
        let mut lo = glo;
        for k in 0..count {
            // tighten the upper bracket by doubling from the last eigenvalue
            let mut hi = ghi;
            let mut step = (ghi - glo) / (self.len() as f64);
            let mut probe = lo + step;
            while probe < ghi {
                if self.sturm_count(probe) > k {
                    hi = probe;
                    break;
                }
                step *= 2.0;
                probe = lo + step;
            }
            let lam = self.eigenvalue_in(k, lo, hi);
            out.push(lam);
            // λ_k ≤ λ_{k+1}, so λ_k is a valid lower bracket unless rounding disagrees
            lo = if self.sturm_count(lam) <= k + 1 { lam } else { glo };
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut s = self.diag[i] * v[i];
            if i > 0 {
                s += self.off[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                s += self.off[i] * v[i + 1];
            }
            out[i] = s;
        }
        out
    }

    /// Eigenvector for the (accurate) eigenvalue `lambda` by inverse
    /// iteration; orthogonalised against `deflate` (unit vectors) after
    /// every solve. Returned with unit Euclidean norm.
    pub fn inverse_iteration(&self, lambda: f64, iterations: usize, deflate: &[&[f64]]) -> Result<Vec<f64>> {
        let n = self.len();
        let lu = TridiagLu::factor(self, lambda);
        // deterministic, non-symmetric start so both parities are reachable
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i as f64) * 0.618_033_988_749_895).fract()).collect();
        normalize(&mut v);
        for _ in 0..iterations.max(1) {
            let mut w = lu.solve(&v);
            for d in deflate {
                let c: f64 = w.iter().zip(d.iter()).map(|(a, b)| a * b).sum();
                for (wi, di) in w.iter_mut().zip(d.iter()) {
                    *wi -= c * di;
                }
            }
            if !normalize(&mut w) {
                return Err(Error::EigenIterationFailure { iterations });
            }
            v = w;
        }
        Ok(v)
    }
}

fn normalize(v: &mut [f64]) -> bool {
    let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(nrm > 0.0 && nrm.is_finite()) {
        return false;
    }
    v.iter_mut().for_each(|x| *x /= nrm);
    true
}

/// LU with partial pivoting of `T − shift·I` (one extra super-diagonal).
struct TridiagLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swap: Vec<bool>,
}

impl TridiagLu {
    fn factor(t: &SymTridiag, shift: f64) -> Self {
        let n = t.len();
        let mut d: Vec<f64> = t.diag.iter().map(|x| x - shift).collect();
        let mut dl = t.off.clone();
        let mut du = t.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swap = vec![false; n.saturating_sub(1)];
        let scale = t.gershgorin().1.abs().max(1.0);
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = f64::EPSILON * scale;
                }
                let f = dl[i] / d[i];
                dl[i] = f;
                d[i + 1] -= f * du[i];
            } else {
                swap[i] = true;
                let f = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = f;
                let tmp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = tmp - f * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -f * du[i + 1];
                }
            }
        }
        if d[n - 1] == 0.0 {
            d[n - 1] = f64::EPSILON * scale;
        }
        Self { dl, d, du, du2, swap }
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        let mut x = b.to_vec();
        for i in 0..n.saturating_sub(1) {
            if self.swap[i] {
                x.swap(i, i + 1);
            }
            x[i + 1] -= self.dl[i] * x[i];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            if i + 1 < n {
                s -= self.du[i] * x[i + 1];
            }
            if i + 2 < n {
                s -= self.du2[i] * x[i + 2];
            }
            x[i] = s / self.d[i];
        }
        x
    }
}
