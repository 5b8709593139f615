use crate::config::{missing, Command, OperatorKind, RunConfig};
use crate::report::{Claim, Outputs};
use obslab::dynamics::{blowup_family, expand, minimal_time_scan, two_time_quotient};
use obslab::observability::{
    eigenmass, mass_profile_decomposition, resolvent_sweep, ProbeOperator, SWEEP_M, SWEEP_MW,
};
use obslab::realset::classify;
use obslab::spectra::{check_weyl_law, gap_profile, solve_spectrum};
use obslab::wkb::{amplitude_constant, comparison_rows, fit_amplitudes, scaling_fits};
use obslab::{Error, Grid, Interval, RealSet, Result, SpectrumTable};
use serde::Serialize;
use serde_json::{json, Value};
use std::f64::consts::PI;
use std::io::Write;

pub const DEFAULT_ACCURACY: f64 = 1e-8;
/// Window step of the thickness probe.
pub const CLASSIFY_STEP: f64 = 0.05;
pub const DEFAULT_CLASSIFY_HORIZON: f64 = 400.0;
pub const DEFAULT_MINTIME_HORIZON: f64 = 100.0;
/// Tolerance on fitted exponents (Weyl law, WKB scaling).
pub const EXPONENT_TOL: f64 = 0.02;
pub const SCALING_TOL: f64 = 0.1;
pub const TWOTIME_STEP: f64 = 0.01;
pub const TWOTIME_HALF_WIDTH: f64 = 24.0;
pub const TWOTIME_MODES: usize = 150;
pub const TWOTIME_MAX_MODES: usize = 2400;

/// Result of one command before it is wrapped into a report.
pub struct Outcome {
    pub results: Value,
    pub claims: Vec<Claim>,
    pub outputs: Outputs,
}

fn value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values are plain data")
}

fn io_err(e: std::io::Error) -> Error {
    Error::InvalidArgument(format!("cannot render output: {e}"))
}

pub fn run(config: &RunConfig) -> Result<Outcome> {
    match config.command {
        Command::Spectrum => cmd_spectrum(config),
        Command::Setmass => cmd_setmass(config),
        Command::Wkb => cmd_wkb(config),
        Command::Mintime => cmd_mintime(config),
        Command::Resolvent => cmd_resolvent(config),
        Command::Twotime => cmd_twotime(config),
    }
}

fn accuracy(config: &RunConfig) -> Result<f64> {
    let a = config.accuracy.unwrap_or(DEFAULT_ACCURACY);
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::InvalidArgument(format!("accuracy must lie in (0, 1), got {a}")));
    }
    Ok(a)
}

fn k_max(config: &RunConfig) -> Result<usize> {
    match config.k_max {
        Some(0) => Err(Error::InvalidArgument("K must be at least 1".into())),
        Some(k) => Ok(k),
        None => Err(missing("k_max")),
    }
}

fn solve(config: &RunConfig, k: usize) -> Result<SpectrumTable> {
    solve_spectrum(&config.potential()?, k, accuracy(config)?)
}

pub fn cmd_spectrum(config: &RunConfig) -> Result<Outcome> {
    let k = k_max(config)?;
    let table = solve(config, k)?;
    let acc = accuracy(config)?;
    let mut claims: Vec<Claim> = table
        .pairs
        .iter()
        .map(|p| Claim::measured(&format!("lambda_{}", p.k), p.lambda, acc * p.lambda, "fd-dirichlet-sturm-romberg"))
        .collect();
    let weyl = if k >= 20 && table.potential.monomial_m().is_some() {
        let w = check_weyl_law(&table)?;
        claims.push(Claim::against("weyl_exponent", w.exponent, w.target_exponent, EXPONENT_TOL, "loglog-lsq-top-half"));
        claims.push(Claim::against(
            "weyl_exponent_half_shifted",
            w.exponent_half_shifted,
            w.target_exponent,
            EXPONENT_TOL,
            "loglog-lsq-top-half-k-minus-half",
        ));
        Some(w)
    } else {
        None
    };
    let gaps = if k >= 10 {
        let g = gap_profile(&table)?;
        claims.push(Claim::measured("min_gap", g.min_gap, 2.0 * acc * table.pairs[k - 1].lambda, "adjacent-difference"));
        claims.push(Claim::measured("gap_tail_slope", g.tail_slope, EXPONENT_TOL, "loglog-lsq-top-half"));
        Some(g)
    } else {
        None
    };
    let mut outputs = Outputs::default();
    outputs
        .csv("spectrum_eigenvalues.csv", |w| {
            writeln!(w, "k,lambda,lambda_discrete,residual")?;
            for p in &table.pairs {
                writeln!(w, "{},{:.16e},{:.16e},{:.16e}", p.k, p.lambda, p.lambda_discrete, p.residual)?;
            }
            Ok(())
        })
        .map_err(io_err)?;
    outputs.csv("spectrum_eigenfunctions.csv", |w| table.write_csv(w)).map_err(io_err)?;
    Ok(Outcome {
        results: json!({ "table": value(&table.header()), "weyl": value(&weyl), "gaps": value(&gaps) }),
        claims,
        outputs,
    })
}

fn generate(config: &RunConfig, horizon: f64) -> Result<RealSet> {
    RealSet::generate(config.set()?, horizon)
}

pub fn cmd_setmass(config: &RunConfig) -> Result<Outcome> {
    let family = config.set()?;
    let k = config.k_max.unwrap_or(40);
    if k == 0 {
        return Err(Error::InvalidArgument("K must be at least 1".into()));
    }
    let table = solve(config, k)?;
    let horizon = config
        .horizon
        .unwrap_or(DEFAULT_CLASSIFY_HORIZON)
        .max(family.min_classify_horizon())
        .max(table.grid.half_width + 1.0);
    let set = generate(config, horizon)?;
    let verdict = classify(&set, horizon, CLASSIFY_STEP)?;
    let masses = eigenmass(&set, &table)?;
    let levels = if config.levels.is_empty() { vec![k] } else { config.levels.clone() };
    let mut decompositions = Vec::new();
    if table.potential.monomial_m().is_some() {
        for &level in &levels {
            let d = mass_profile_decomposition(&set, &table, level)?;
            decompositions.push(json!({ "k": level, "i1": d.i1, "i2": d.i2, "i3": d.i3, "total": d.total() }));
        }
    }
    let quad_tol = accuracy(config)?.sqrt();
    let claims = vec![
        Claim::measured("inf_mass", masses.inf_mass, quad_tol, "trapezoid-partial-cell"),
        Claim::measured("inf_mass_half", masses.inf_mass_half, quad_tol, "trapezoid-partial-cell"),
        Claim::measured("mass_tail_slope", masses.tail_slope, 0.05, "loglog-lsq-upper-half-vs-turning-point"),
    ];
    let mut outputs = Outputs::default();
    outputs
        .csv("setmass_masses.csv", |w| {
            writeln!(w, "k,lambda,mass,folded_mass")?;
            for (i, p) in table.pairs.iter().enumerate() {
                let folded = masses.folded_masses.as_ref().map(|f| format!("{:.16e}", f[i])).unwrap_or_default();
                writeln!(w, "{},{:.16e},{:.16e},{folded}", p.k, p.lambda, masses.masses[i])?;
            }
            Ok(())
        })
        .map_err(io_err)?;
    Ok(Outcome {
        results: json!({
            "thickness": value(&verdict),
            "classify_step": CLASSIFY_STEP,
            "masses": value(&masses),
            "decompositions": decompositions,
        }),
        claims,
        outputs,
    })
}

pub fn cmd_wkb(config: &RunConfig) -> Result<Outcome> {
    if config.levels.is_empty() {
        return Err(missing("levels"));
    }
    if config.levels.contains(&0) {
        return Err(Error::InvalidArgument("levels are 1-based".into()));
    }
    let top = *config.levels.iter().max().expect("non-empty");
    let k = config.k_max.unwrap_or(top).max(top);
    let table = solve(config, k)?;
    let mut outputs = Outputs::default();
    let mut claims = Vec::new();
    let mut profiles = Vec::new();
    for &level in &config.levels {
        let profile = fit_amplitudes(&table, level)?;
        let c = amplitude_constant(&table, level)?;
        claims.push(Claim::measured(&format!("amplitude_osc_{level}"), profile.amplitude_osc, profile.osc_fit.rms_residual, "lsq-oscillatory-window"));
        claims.push(Claim::measured(&format!("amplitude_tail_{level}"), profile.amplitude_tail, profile.tail_fit.rms_residual, "lsq-tail-window"));
        claims.push(Claim::measured(&format!("liouville_c_{level}"), c, table.grid.h().powi(2), "five-point-derivative-at-origin"));
        let pair = table.pair(level).expect("level is in the table");
        let rows = comparison_rows(&profile, &table.grid, pair);
        outputs
            .csv(format!("wkb_k{level}.csv"), |w| {
                writeln!(w, "x,phi,wkb,error_bound")?;
                for r in &rows {
                    writeln!(w, "{:.16e},{:.16e},{:.16e},{:.16e}", r[0], r[1], r[2], r[3])?;
                }
                Ok(())
            })
            .map_err(io_err)?;
        profiles.push(json!({ "profile": value(&profile), "amplitude_constant": c }));
    }
    let scaling = if config.levels.len() >= 2 {
        let s = scaling_fits(&table, &config.levels)?;
        claims.push(Claim::against("osc_amplitude_exponent", s.osc_slope, s.amplitude_target, SCALING_TOL, "loglog-lsq-vs-mu"));
        claims.push(Claim::against("tail_amplitude_exponent", s.tail_slope, s.amplitude_target, SCALING_TOL, "loglog-lsq-vs-mu"));
        claims.push(Claim::against("constant_exponent", s.constant_slope, s.constant_target, SCALING_TOL, "loglog-lsq-vs-lambda"));
        let mut s = value(&s);
        if let Some(obj) = s.as_object_mut() {
            obj.remove("profiles");
        }
        Some(s)
    } else {
        None
    };
    Ok(Outcome { results: json!({ "levels": profiles, "scaling": scaling }), claims, outputs })
}

pub fn cmd_mintime(config: &RunConfig) -> Result<Outcome> {
    let times = config.times()?;
    if config.k_grid.is_empty() {
        return Err(missing("k_grid"));
    }
    let set = generate(config, config.horizon.unwrap_or(DEFAULT_MINTIME_HORIZON))?;
    let table = minimal_time_scan(&set, &times, &config.k_grid)?;
    let mut claims = Vec::new();
    for (i, k) in table.k_list.iter().enumerate() {
        for (j, t) in config.t_grid.iter().enumerate() {
            let q = table.q[i][j];
            let tol = (q - table.q_coarse[i][j]).abs();
            claims.push(Claim::measured(&format!("Q(k={k},T={t})"), q, tol, "hermite-gram-midpoint-halving"));
        }
    }
    let mut outputs = Outputs::default();
    outputs.csv("mintime_q.csv", |w| table.write_csv(w)).map_err(io_err)?;
    let tokens: Vec<String> = config.t_grid.iter().map(|t| t.0.clone()).collect();
    Ok(Outcome { results: json!({ "t_tokens": tokens, "scan": value(&table) }), claims, outputs })
}

pub fn cmd_resolvent(config: &RunConfig) -> Result<Outcome> {
    if config.lambda_grid.is_empty() {
        return Err(missing("lambda_grid"));
    }
    let kind = config.operator.unwrap_or(OperatorKind::Free);
    let half_width = config.half_width.unwrap_or(40.0);
    let nodes = config.nodes.unwrap_or(1600);
    let op = match kind {
        OperatorKind::Free => ProbeOperator::free_periodic(half_width, nodes)?,
        OperatorKind::Dirichlet => {
            let n = if nodes % 2 == 0 { nodes + 1 } else { nodes };
            ProbeOperator::dirichlet(&config.potential()?, &Grid::new(half_width, n)?)
        }
    };
    let set = generate(config, config.horizon.unwrap_or(0.0).max(half_width + 1.0))?;
    let ms = if config.big_m.is_empty() { SWEEP_M.to_vec() } else { config.big_m.clone() };
    let mws = if config.m_w.is_empty() { SWEEP_MW.to_vec() } else { config.m_w.clone() };
    let probes = resolvent_sweep(&set, &op, &ms, &mws, &config.lambda_grid, config.seed)?;
    let best = probes
        .iter()
        .max_by(|a, b| a.min_margin().total_cmp(&b.min_margin()))
        .expect("sweep has at least one candidate");
    let claims = vec![Claim::measured("best_min_margin", best.min_margin(), 1e-8 * best.min_margin().abs().max(1.0), "lobpcg-band-preconditioned")];
    let mut outputs = Outputs::default();
    outputs
        .csv("resolvent_margins.csv", |w| {
            write!(w, "lambda")?;
            for p in &probes {
                write!(w, ",margin_M{}_mw{}", p.big_m, p.m_w)?;
            }
            writeln!(w)?;
            for (i, lam) in config.lambda_grid.iter().enumerate() {
                write!(w, "{lam:.16e}")?;
                for p in &probes {
                    write!(w, ",{:.16e}", p.margins[i])?;
                }
                writeln!(w)?;
            }
            Ok(())
        })
        .map_err(io_err)?;
    Ok(Outcome {
        results: json!({
            "operator": kind,
            "best": { "big_m": best.big_m, "m_w": best.m_w, "min_margin": best.min_margin(), "inequality_holds": best.inequality_holds() },
            "probes": value(&probes),
        }),
        claims,
        outputs,
    })
}

/// Hermite table and bump family. Without an explicit `K` the mode count
/// doubles from [`TWOTIME_MODES`] until every bump is captured, and the grid
/// widens so that the top mode's turning point stays inside it.
fn twotime_basis(config: &RunConfig, r: f64, size: usize) -> Result<SpectrumTable> {
    let build = |k: usize| -> Result<SpectrumTable> {
        let x = config.half_width.unwrap_or(TWOTIME_HALF_WIDTH.max((2.0 * k as f64).sqrt() + 10.0));
        Ok(SpectrumTable::hermite(k, Grid::with_spacing(x, TWOTIME_STEP)?))
    };
    if let Some(k) = config.k_max {
        return build(k);
    }
    let mut k = TWOTIME_MODES;
    loop {
        let table = build(k)?;
        match blowup_family(&table.grid, r, size).iter().try_for_each(|f| expand(f, &table).map(|_| ())) {
            Ok(()) => return Ok(table),
            Err(Error::InsufficientModes { .. }) if k < TWOTIME_MAX_MODES => k *= 2,
            Err(e) => return Err(e),
        }
    }
}

fn ball_complement(r: f64) -> RealSet {
    let inf = f64::INFINITY;
    RealSet::from_intervals([Interval { lo: -inf, hi: -r }, Interval { lo: r, hi: inf }])
}

pub fn cmd_twotime(config: &RunConfig) -> Result<Outcome> {
    let times = config.times()?;
    let s = config.s_time.as_ref().map(|t| t.value()).transpose()?.unwrap_or(0.0);
    let [r1, r2] = config.radii.unwrap_or([5.0, 5.0]);
    if !(r1 > 0.0 && r2 > 0.0) {
        return Err(Error::InvalidArgument(format!("radii must be positive, got {r1}, {r2}")));
    }
    let size = config.family_size.unwrap_or(2);
    if size == 0 {
        return Err(Error::InvalidArgument("the blow-up family needs at least one member".into()));
    }
    let table = twotime_basis(config, r1.min(r2), size)?;
    let grid = table.grid;
    let family = blowup_family(&grid, r1.min(r2), size);
    if grid.half_width <= r1.max(r2) {
        return Err(Error::InvalidArgument(format!("half-width {} must exceed the radii", grid.half_width)));
    }
    let (e1, e2) = (ball_complement(r1), ball_complement(r2));
    let sets = [format!("[-{r1}, {r1}]^c"), format!("[-{r2}, {r2}]^c")];
    let s_token = config.s_time.as_ref().map(|t| t.0.clone()).unwrap_or_else(|| "0".into());
    let mut records = Vec::new();
    let mut claims = Vec::new();
    for (i, f) in family.iter().enumerate() {
        for (t, token) in times.iter().zip(&config.t_grid) {
            let rec = two_time_quotient(f, s, *t, &e1, &e2, &table)?;
            let regime = if rec.resonant { "resonant" } else { "generic" };
            claims.push(Claim::measured(&format!("quotient(f={i},T={token})"), rec.quotient, rec.quotient * 1e-6, "hermite-expansion"));
            records.push(json!({
                "S": s,
                "S_token": s_token,
                "T": t,
                "T_token": token.0,
                "sets": sets,
                "bump_width": r1.min(r2) / (1.0 + i as f64),
                "quotient": rec.quotient,
                "regime": regime,
                "record": value(&rec),
            }));
        }
    }
    let mut outputs = Outputs::default();
    outputs
        .csv("twotime_quotients.csv", |w| {
            writeln!(w, "member,S,T,T_minus_S_over_half_pi,quotient,resonant")?;
            for r in &records {
                let (t, q) = (r["T"].as_f64().unwrap_or(f64::NAN), r["quotient"].as_f64().unwrap_or(f64::INFINITY));
                let member = r["bump_width"].as_f64().unwrap_or(0.0);
                writeln!(w, "{member:.16e},{s:.16e},{t:.16e},{:.16e},{q:.16e},{}", (t - s) / (PI / 2.0), r["regime"] == "resonant")?;
            }
            Ok(())
        })
        .map_err(io_err)?;
    Ok(Outcome { results: json!({ "modes": table.len(), "grid": value(&grid), "records": records }), claims, outputs })
}
