//! Finite unions of closed intervals, the generated set families, and the
//! thick / weakly-thick classifiers.
//!
//! A [`RealSet`] is always stored as a sorted list of disjoint intervals.
//! Generated families (periodic, dyadic-gap, polynomial-gap) are expanded
//! up to a finite `horizon` and only answer questions about windows inside
//! `[-horizon, horizon]`; the remaining families are represented exactly
//! (possibly with infinite endpoints) and carry an infinite horizon.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::InvalidArgument(format!("malformed interval [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo < hi).then_some(Interval { lo, hi })
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Gap rule `a_j = coeff · j^power` of the dyadic family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapRule {
    pub coeff: f64,
    pub power: f64,
}

impl GapRule {
    /// `a_j = j`.
    pub const INDEX: GapRule = GapRule { coeff: 1.0, power: 1.0 };

    pub fn constant(a: f64) -> Self {
        Self { coeff: a, power: 0.0 }
    }

    pub fn gap(&self, j: u32) -> f64 {
        self.coeff * (j as f64).powf(self.power)
    }

    pub fn is_bounded(&self) -> bool {
        self.power <= 0.0
    }

    /// Supremum of a_j over j ≥ 1 (only meaningful when bounded).
    pub fn sup(&self) -> f64 {
        if self.is_bounded() {
            self.coeff
        } else {
            f64::INFINITY
        }
    }
}

/// The named set families plus explicit interval lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum SetFamily {
    /// `[a, ∞)`
    HalfLine { a: f64 },
    /// `[-r, r]`
    Bounded { r: f64 },
    /// `⋃_{k∈ℤ} [k·p, (k+½)·p]`
    PeriodicPattern { period: f64 },
    /// `⋃_{j≥1} [2^j, 2^{j+1} − a_j] ∪ [−2^{j+1} + a_j, −2^j]`
    DyadicGap { rule: GapRule },
    /// `⋃_{j≥1} [j, j + (j+1)^{−ε}]`
    PolynomialGap { eps: f64 },
    Explicit { intervals: Vec<Interval> },
}

impl SetFamily {
    pub fn is_generated(&self) -> bool {
        matches!(
            self,
            SetFamily::PeriodicPattern { .. } | SetFamily::DyadicGap { .. } | SetFamily::PolynomialGap { .. }
        )
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        match self {
            SetFamily::HalfLine { a } if !a.is_finite() => bad(format!("half-line start {a}")),
            SetFamily::Bounded { r } if !(*r > 0.0 && r.is_finite()) => bad(format!("bounded radius {r}")),
            SetFamily::PeriodicPattern { period } if !(*period > 0.0 && period.is_finite()) => {
                bad(format!("period {period}"))
            }
            SetFamily::PolynomialGap { eps } if !(*eps > 0.0) => bad(format!("polynomial gap requires ε > 0, got {eps}")),
            SetFamily::DyadicGap { rule } if !(rule.coeff > 0.0) => bad(format!("gap coefficient {}", rule.coeff)),
            _ => Ok(()),
        }
    }

    /// Smallest horizon the classifier accepts for this family.
    pub fn min_classify_horizon(&self) -> f64 {
        match self {
            SetFamily::DyadicGap { .. } => 32.0,
            SetFamily::PeriodicPattern { period } => 1000.0 * period,
            SetFamily::PolynomialGap { .. } => 1000.0,
            _ => 0.0,
        }
    }
}

/// Short textual form used on the command line:
/// `halfline:A`, `bounded:R`, `periodic:P`, `dyadic` (a_j = j),
/// `dyadic:COEFF,POWER`, `polygap:EPS`, `intervals:a,b;c,d`.
impl FromStr for SetFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = s.split_once(':').unwrap_or((s, ""));
        let nums = |args: &str| -> Result<Vec<f64>> {
            args.split(',')
                .filter(|t| !t.trim().is_empty())
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::InvalidArgument(format!("bad number '{t}' in set spec '{s}'")))
                })
                .collect()
        };
        let one = |args: &str| -> Result<f64> {
            match nums(args)?.as_slice() {
                [v] => Ok(*v),
                _ => Err(Error::InvalidArgument(format!("set spec '{s}' needs exactly one parameter"))),
            }
        };
        let fam = match name.trim().to_ascii_lowercase().as_str() {
            "halfline" | "half_line" => SetFamily::HalfLine { a: if args.is_empty() { 0.0 } else { one(args)? } },
            "bounded" => SetFamily::Bounded { r: one(args)? },
            "periodic" | "periodic_pattern" => SetFamily::PeriodicPattern { period: one(args)? },
            "dyadic" | "dyadic_gap" => {
                if args.is_empty() {
                    SetFamily::DyadicGap { rule: GapRule::INDEX }
                } else {
                    match nums(args)?.as_slice() {
                        [c] => SetFamily::DyadicGap { rule: GapRule::constant(*c) },
                        [c, p] => SetFamily::DyadicGap { rule: GapRule { coeff: *c, power: *p } },
                        _ => return Err(Error::InvalidArgument(format!("bad dyadic spec '{s}'"))),
                    }
                }
            }
            "polygap" | "polynomial_gap" => SetFamily::PolynomialGap { eps: one(args)? },
            "intervals" | "explicit" => {
                let mut intervals = Vec::new();
                for piece in args.split(';').filter(|p| !p.trim().is_empty()) {
                    match nums(piece)?.as_slice() {
                        [a, b] => intervals.push(Interval::new(*a, *b)?),
                        _ => return Err(Error::InvalidArgument(format!("bad interval '{piece}'"))),
                    }
                }
                SetFamily::Explicit { intervals }
            }
            "all" | "real_line" => SetFamily::Explicit {
                intervals: vec![Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY }],
            },
            other => return Err(Error::InvalidArgument(format!("unknown set family '{other}'"))),
        };
        fam.validate()?;
        Ok(fam)
    }
}

/// JSON set specification: `{"family": ..., "params": {...}}` or
/// `{"intervals": [[a, b], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SetSpec {
    Intervals { intervals: Vec<[f64; 2]> },
    Family(SetFamily),
}

impl SetSpec {
    pub fn into_family(self) -> Result<SetFamily> {
        let fam = match self {
            SetSpec::Intervals { intervals } => SetFamily::Explicit {
                intervals: intervals.iter().map(|[a, b]| Interval::new(*a, *b)).collect::<Result<_>>()?,
            },
            SetSpec::Family(f) => f,
        };
        fam.validate()?;
        Ok(fam)
    }
}

/// A measurable subset of ℝ represented by sorted disjoint closed intervals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealSet {
    intervals: Vec<Interval>,
    family: SetFamily,
    horizon: f64,
    #[serde(skip)]
    prefix: Vec<f64>,
}

impl RealSet {
    /// Exact set from an explicit interval list (touching pieces merge).
    pub fn from_intervals<I: IntoIterator<Item = Interval>>(intervals: I) -> Self {
        let intervals = normalize(intervals.into_iter().collect());
        let family = SetFamily::Explicit { intervals: intervals.clone() };
        Self::assemble(intervals, family, f64::INFINITY)
    }

    pub fn real_line() -> Self {
        Self::from_intervals([Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY }])
    }

    pub fn empty() -> Self {
        Self::from_intervals([])
    }

    /// Expand a family so that every window inside `[-horizon, horizon]` is
    /// answered exactly. Exact families ignore `horizon`.
    pub fn generate(family: &SetFamily, horizon: f64) -> Result<Self> {
        family.validate()?;
        if family.is_generated() && !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidArgument(format!("horizon must be positive and finite, got {horizon}")));
        }
        let h = horizon;
        let (raw, horizon) = match family {
            SetFamily::HalfLine { a } => (vec![Interval { lo: *a, hi: f64::INFINITY }], f64::INFINITY),
            SetFamily::Bounded { r } => (vec![Interval { lo: -r, hi: *r }], f64::INFINITY),
            SetFamily::Explicit { intervals } => (intervals.clone(), f64::INFINITY),
            SetFamily::PeriodicPattern { period } => {
                let k_lo = (-h / period).floor() as i64 - 1;
                let k_hi = (h / period).ceil() as i64;
                let mut v = Vec::with_capacity((k_hi - k_lo + 1) as usize);
                for k in k_lo..=k_hi {
                    let lo = k as f64 * period;
                    let hi = (k as f64 + 0.5) * period;
                    if hi > -h && lo < h {
                        v.push(Interval { lo: lo.max(-h), hi: hi.min(h) });
                    }
                }
                (v, h)
            }
            SetFamily::DyadicGap { rule } => {
                let mut v = Vec::new();
                let mut j = 1u32;
                loop {
                    let start = 2f64.powi(j as i32);
                    if start >= h {
                        break;
                    }
                    let a = rule.gap(j);
                    // pieces stay nonempty for a_j < 2^j; the family rule caps a_j at 2^{j-1}
                    if !(a > 0.0 && a <= 2f64.powi(j as i32 - 1)) {
                        return Err(Error::InvalidArgument(format!(
                            "dyadic gap a_{j} = {a} violates 0 < a_j <= 2^(j-1)"
                        )));
                    }
                    let end = (2.0 * start - a).min(h);
                    v.push(Interval { lo: start, hi: end });
                    v.push(Interval { lo: -end, hi: -start });
                    j += 1;
                    if j > 1000 {
                        break;
                    }
                }
                (v, h)
            }
            SetFamily::PolynomialGap { eps } => {
                let mut v = Vec::new();
                let mut j = 1u64;
                while (j as f64) < h {
                    let lo = j as f64;
                    let hi = (lo + (lo + 1.0).powf(-eps)).min(h);
                    v.push(Interval { lo, hi });
                    j += 1;
                }
                (v, h)
            }
        };
        Ok(Self::assemble(normalize(raw), family.clone(), horizon))
    }

    /// Regenerate at a larger horizon. Windows inside the old horizon are
    /// unaffected.
    pub fn expand(&self, horizon: f64) -> Result<Self> {
        if !self.family.is_generated() || horizon <= self.horizon {
            return Ok(self.clone());
        }
        Self::generate(&self.family, horizon)
    }

    fn assemble(intervals: Vec<Interval>, family: SetFamily, horizon: f64) -> Self {
        let mut prefix = Vec::with_capacity(intervals.len() + 1);
        let mut acc = 0.0;
        prefix.push(0.0);
        for iv in &intervals {
            let len = iv.len();
            acc += if len.is_finite() { len } else { 0.0 };
            prefix.push(acc);
        }
        Self { intervals, family, horizon, prefix }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn family(&self) -> &SetFamily {
        &self.family
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn contains(&self, x: f64) -> bool {
        let i = self.intervals.partition_point(|iv| iv.hi < x);
        i < self.intervals.len() && self.intervals[i].lo <= x
    }

    fn check_window(&self, window: &Interval) -> Result<()> {
        let needed = window.lo.abs().max(window.hi.abs());
        if needed > self.horizon {
            return Err(Error::HorizonTooSmall { horizon: self.horizon, needed });
        }
        Ok(())
    }

    /// Lebesgue measure of `self ∩ window`.
    pub fn measure_in(&self, window: Interval) -> Result<f64> {
        if window.lo > window.hi {
            return Err(Error::InvalidArgument(format!("malformed window {window}")));
        }
        self.check_window(&window)?;
        Ok(self.measure_unchecked(window))
    }

    fn measure_unchecked(&self, w: Interval) -> f64 {
        let ivs = &self.intervals;
        let i0 = ivs.partition_point(|iv| iv.hi <= w.lo);
        let i1 = ivs.partition_point(|iv| iv.lo < w.hi);
        if i1 <= i0 {
            return 0.0;
        }
        let clip = |iv: &Interval| iv.intersect(&w).map_or(0.0, |c| c.len());
        if i1 - i0 <= 2 {
            return ivs[i0..i1].iter().map(clip).sum();
        }
        // interior pieces are fully inside the (finite) window
        clip(&ivs[i0]) + clip(&ivs[i1 - 1]) + (self.prefix[i1 - 1] - self.prefix[i0 + 1])
    }

    /// `|E ∩ [−x, x]| / x`.
    pub fn symmetric_density(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::InvalidArgument(format!("symmetric density needs x > 0, got {x}")));
        }
        Ok(self.measure_in(Interval { lo: -x, hi: x })? / x)
    }

    /// Mirror image `−E`.
    pub fn reflect(&self) -> Self {
        let ivs: Vec<Interval> = self.intervals.iter().rev().map(|iv| Interval { lo: -iv.hi, hi: -iv.lo }).collect();
        let family = SetFamily::Explicit { intervals: ivs.clone() };
        Self::assemble(ivs, family, self.horizon)
    }

    /// `(E ∩ [0,∞)) ∪ −(E ∩ (−∞,0])`, a subset of `[0, ∞)`.
    pub fn parity_fold(&self) -> Self {
        let mut pieces = Vec::with_capacity(self.intervals.len());
        for iv in &self.intervals {
            if iv.hi > 0.0 {
                pieces.push(Interval { lo: iv.lo.max(0.0), hi: iv.hi });
            }
            if iv.lo < 0.0 {
                pieces.push(Interval { lo: -iv.hi.min(0.0), hi: -iv.lo });
            }
        }
        let ivs = normalize(pieces);
        let family = SetFamily::Explicit { intervals: ivs.clone() };
        Self::assemble(ivs, family, self.horizon)
    }

    pub fn intersect(&self, other: &RealSet) -> Self {
        let (a, b) = (&self.intervals, &other.intervals);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < a.len() && j < b.len() {
            if let Some(c) = a[i].intersect(&b[j]) {
                out.push(c);
            }
            if a[i].hi < b[j].hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        let ivs = normalize(out);
        let family = SetFamily::Explicit { intervals: ivs.clone() };
        Self::assemble(ivs, family, self.horizon.min(other.horizon))
    }

    pub fn union(&self, other: &RealSet) -> Self {
        let ivs = normalize(self.intervals.iter().chain(&other.intervals).copied().collect());
        let family = SetFamily::Explicit { intervals: ivs.clone() };
        Self::assemble(ivs, family, self.horizon.min(other.horizon))
    }

    /// Minimum of `|E ∩ [x, x+len]|` over `x ∈ range`, with its argmin.
    ///
    /// The window measure is piecewise linear in `x` with breakpoints where
    /// either window edge crosses an interval endpoint, so the minimum over
    /// the range is attained at a breakpoint or at the range ends; optional
    /// `grid_step` sampling is added on top.
    pub fn min_window_measure(&self, len: f64, range: Interval, grid_step: Option<f64>) -> Result<(f64, f64)> {
        if !(len > 0.0) {
            return Err(Error::InvalidArgument(format!("window length must be positive, got {len}")));
        }
        self.check_window(&Interval { lo: range.lo, hi: range.hi + len })?;
        let mut candidates = vec![range.lo, range.hi];
        for iv in &self.intervals {
            for e in [iv.lo, iv.hi] {
                if e.is_finite() {
                    for x in [e, e - len] {
                        if range.contains(x) {
                            candidates.push(x);
                        }
                    }
                }
            }
        }
        if let Some(step) = grid_step.filter(|s| *s > 0.0) {
            let n = ((range.hi - range.lo) / step).floor() as usize;
            candidates.extend((0..=n).map(|i| range.lo + i as f64 * step));
        }
        let mut best = (f64::INFINITY, range.lo);
        for x in candidates {
            let m = self.measure_unchecked(Interval { lo: x, hi: x + len });
            if m < best.0 {
                best = (m, x);
            }
        }
        Ok(best)
    }
}

fn normalize(mut ivs: Vec<Interval>) -> Vec<Interval> {
    ivs.retain(|iv| iv.hi > iv.lo);
    ivs.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let mut out: Vec<Interval> = Vec::with_capacity(ivs.len());
    for iv in ivs {
        match out.last_mut() {
            Some(last) if iv.lo <= last.hi => last.hi = last.hi.max(iv.hi),
            _ => out.push(iv),
        }
    }
    out
}

// ---------------------------------------------------------------------------
// classification

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Analytic,
    NumericProbe,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ThickVerdict {
    /// `|E ∩ [x, x+window_len]| ≥ gamma · window_len` at every probed x.
    Thick { gamma: f64, window_len: f64 },
    /// Sparsest probed window.
    NotThick { window: Interval, density: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum WeakVerdict {
    WeaklyThick { liminf_estimate: f64 },
    /// Points `(x, |E∩[−x,x]|/x)` with decaying density.
    NotWeaklyThick { sequence: Vec<(f64, f64)> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThicknessVerdict {
    pub thick: ThickVerdict,
    pub weakly_thick: WeakVerdict,
    pub horizon_used: f64,
    pub method: Method,
}

impl ThicknessVerdict {
    pub fn is_thick(&self) -> bool {
        matches!(self.thick, ThickVerdict::Thick { .. })
    }

    pub fn is_weakly_thick(&self) -> bool {
        matches!(self.weakly_thick, WeakVerdict::WeaklyThick { .. })
    }
}

/// Window lengths 2^-3 … 2^6.
pub fn probe_lengths() -> impl Iterator<Item = f64> {
    (-3..=6).map(|e| 2f64.powi(e))
}

/// Density levels 0.01, 0.02, …, 0.5.
pub fn probe_levels() -> impl Iterator<Item = f64> {
    (1..=50).map(|i| i as f64 / 100.0)
}

struct WindowProbe {
    /// (L, min density, argmin x) per probed length.
    rows: Vec<(f64, f64, f64)>,
}

impl WindowProbe {
    fn run(set: &RealSet, horizon: f64, grid_step: f64, extra: &[f64]) -> Result<Self> {
        let mut rows = Vec::new();
        for len in probe_lengths().chain(extra.iter().copied()) {
            if 2.0 * horizon <= len {
                continue;
            }
            let range = Interval { lo: -horizon, hi: horizon - len };
            let (m, x) = set.min_window_measure(len, range, Some(grid_step))?;
            rows.push((len, m / len, x));
        }
        Ok(Self { rows })
    }

    /// Best (γ, L) with γ on the probe level grid, if any level passes.
    fn witness(&self) -> Option<(f64, f64)> {
        let mut best: Option<(f64, f64)> = None;
        for &(len, dens, _) in &self.rows {
            let gamma = probe_levels().filter(|g| *g <= dens + 1e-12).last();
            if let Some(g) = gamma {
                if best.map_or(true, |(bg, _)| g > bg) {
                    best = Some((g, len));
                }
            }
        }
        best
    }

    fn sparsest(&self) -> ThickVerdict {
        // smallest density; among ties prefer the longer window
        let &(len, dens, x) = self
            .rows
            .iter()
            .min_by(|a, b| a.1.total_cmp(&b.1).then(b.0.total_cmp(&a.0)))
            .expect("at least one probe length");
        ThickVerdict::NotThick { window: Interval { lo: x, hi: x + len }, density: dens }
    }
}

fn tail_density_min(set: &RealSet, horizon: f64, grid_step: f64) -> Result<f64> {
    let lo = horizon / 4.0;
    let n = (((horizon - lo) / grid_step).ceil() as usize).max(1);
    let mut min = f64::INFINITY;
    for i in 0..=n {
        let x = (lo + i as f64 * (horizon - lo) / n as f64).min(horizon);
        min = min.min(set.symmetric_density(x)?);
    }
    // the density dips just before each piece starts
    for iv in set.intervals() {
        for e in [iv.lo.abs(), iv.hi.abs()] {
            if e >= lo && e <= horizon {
                min = min.min(set.symmetric_density(e)?);
            }
        }
    }
    Ok(min)
}

fn decay_sequence(set: &RealSet, horizon: f64) -> Result<Vec<(f64, f64)>> {
    (0..6)
        .rev()
        .map(|i| {
            let x = horizon / 2f64.powi(i);
            Ok((x, set.symmetric_density(x)?))
        })
        .collect()
}

/// Classify `set` as thick / weakly thick.
///
/// The five named families get their closed-form verdicts, with witnesses
/// measured over the horizon. Explicit sets are probed numerically on the
/// (γ, L) grid and the tail of the symmetric density.
pub fn classify(set: &RealSet, horizon: f64, grid_step: f64) -> Result<ThicknessVerdict> {
    if !(horizon > 0.0 && horizon.is_finite() && grid_step > 0.0) {
        return Err(Error::InvalidArgument(format!("classify needs horizon > 0 and grid_step > 0 (got {horizon}, {grid_step})")));
    }
    let family = set.family().clone();
    if horizon < family.min_classify_horizon() {
        return Err(Error::InvalidArgument(format!(
            "horizon {horizon} is below the minimum {} for this family",
            family.min_classify_horizon()
        )));
    }
    let set = set.expand(horizon)?;
    let probe_at = |extra: &[f64]| WindowProbe::run(&set, horizon, grid_step, extra);

    let verdict = match &family {
        SetFamily::HalfLine { .. } => ThicknessVerdict {
            thick: probe_at(&[])?.sparsest(),
            weakly_thick: WeakVerdict::WeaklyThick { liminf_estimate: 1.0 },
            horizon_used: horizon,
            method: Method::Analytic,
        },
        SetFamily::Bounded { .. } | SetFamily::PolynomialGap { .. } => ThicknessVerdict {
            thick: probe_at(&[])?.sparsest(),
            weakly_thick: WeakVerdict::NotWeaklyThick { sequence: decay_sequence(&set, horizon)? },
            horizon_used: horizon,
            method: Method::Analytic,
        },
        SetFamily::PeriodicPattern { period } => {
            let probe = probe_at(&[*period])?;
            let dens = probe.rows.iter().find(|r| r.0 == *period).map_or(0.0, |r| r.1);
            ThicknessVerdict {
                thick: ThickVerdict::Thick { gamma: dens.min(0.5), window_len: *period },
                weakly_thick: WeakVerdict::WeaklyThick { liminf_estimate: tail_density_min(&set, horizon, grid_step)? },
                horizon_used: horizon,
                method: Method::Analytic,
            }
        }
        SetFamily::DyadicGap { rule } => {
            let weak = WeakVerdict::WeaklyThick { liminf_estimate: tail_density_min(&set, horizon, grid_step)? };
            if rule.is_bounded() {
                let len = 4.0 * rule.sup().max(4.0);
                let probe = probe_at(&[len])?;
                let (gamma, window_len) = probe.witness().unwrap_or_else(|| {
                    let dens = probe.rows.iter().find(|r| r.0 == len).map_or(0.0, |r| r.1);
                    (dens, len)
                });
                ThicknessVerdict {
                    thick: ThickVerdict::Thick { gamma, window_len },
                    weakly_thick: weak,
                    horizon_used: horizon,
                    method: Method::Analytic,
                }
            } else {
                ThicknessVerdict {
                    thick: probe_at(&[])?.sparsest(),
                    weakly_thick: weak,
                    horizon_used: horizon,
                    method: Method::Analytic,
                }
            }
        }
        SetFamily::Explicit { .. } => {
            let probe = probe_at(&[])?;
            let thick = match probe.witness() {
                Some((gamma, window_len)) => ThickVerdict::Thick { gamma, window_len },
                None => probe.sparsest(),
            };
            let tail_min = tail_density_min(&set, horizon, grid_step)?;
            let at_horizon = set.symmetric_density(horizon)?;
            let weakly_thick = if tail_min >= 0.05 {
                WeakVerdict::WeaklyThick { liminf_estimate: tail_min }
            } else if at_horizon <= 0.01 {
                WeakVerdict::NotWeaklyThick { sequence: decay_sequence(&set, horizon)? }
            } else {
                return Err(Error::Inconclusive { horizon });
            };
            let v = ThicknessVerdict { thick, weakly_thick, horizon_used: horizon, method: Method::NumericProbe };
            if v.is_thick() && !v.is_weakly_thick() {
                return Err(Error::Inconclusive { horizon });
            }
            v
        }
    };
    Ok(verdict)
}

/// Minimum of `|E ∩ [−x, x]| / x` over the supplied sample points.
pub fn min_density_along<I: IntoIterator<Item = f64>>(set: &RealSet, points: I) -> Result<f64> {
    let mut min = f64::INFINITY;
    for x in points {
        min = min.min(set.symmetric_density(x)?);
    }
    Ok(min)
}
