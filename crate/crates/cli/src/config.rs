use obslab::realset::SetSpec;
use obslab::{Error, Potential, Result, SetFamily};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

/// A time written as a decimal or as `[c]pi[/d][±offset]`, stored verbatim so
/// that replays see the same token.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TimeToken(pub String);

impl TimeToken {
    pub fn value(&self) -> Result<f64> {
        parse_time(&self.0)
    }
}

impl fmt::Display for TimeToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for TimeToken {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_time(s)?;
        Ok(Self(s.trim().to_string()))
    }
}

fn bad_time(s: &str) -> Error {
    Error::InvalidArgument(format!("cannot parse time '{s}' (expected a number or [c]pi[/d][+x])"))
}

/// `1.5`, `pi`, `pi/2`, `3pi/4`, `pi/2+0.3`, `2*pi`.
pub fn parse_time(s: &str) -> Result<f64> {
    let t = s.trim().to_ascii_lowercase();
    let Some(at) = t.find("pi") else {
        return t.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| bad_time(s));
    };
    let coeff = match t[..at].trim().trim_end_matches('*').trim() {
        "" => 1.0,
        c => c.parse::<f64>().map_err(|_| bad_time(s))?,
    };
    let mut rest = t[at + 2..].trim();
    let mut den = 1.0;
    if let Some(r) = rest.strip_prefix('/') {
        let end = r.find(['+', '-']).unwrap_or(r.len());
        den = r[..end].trim().parse::<f64>().map_err(|_| bad_time(s))?;
        if den == 0.0 {
            return Err(bad_time(s));
        }
        rest = r[end..].trim();
    }
    let offset = if rest.is_empty() {
        0.0
    } else {
        let (sign, num) = match rest.split_at(1) {
            ("+", n) => (1.0, n),
            ("-", n) => (-1.0, n),
            _ => return Err(bad_time(s)),
        };
        sign * num.trim().parse::<f64>().map_err(|_| bad_time(s))?
    };
    Ok(coeff * PI / den + offset)
}

/// Comma lists and inclusive ranges `a..b` (unit step for integers).
pub fn parse_usize_list(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::InvalidArgument(format!("bad index list '{s}'"));
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let a: usize = a.trim().parse().map_err(|_| bad())?;
            let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
            if a > b {
                return Err(bad());
            }
            out.extend(a..=b);
        } else {
            out.push(part.parse().map_err(|_| bad())?);
        }
    }
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

pub fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    let out: Vec<f64> = s
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<f64>().map_err(|_| Error::InvalidArgument(format!("bad number '{p}' in '{s}'"))))
        .collect::<Result<_>>()?;
    if out.is_empty() {
        return Err(Error::InvalidArgument(format!("empty list '{s}'")));
    }
    Ok(out)
}

/// `a..b` with `step`, both ends included.
pub fn parse_range(s: &str, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
    }
    match s.split_once("..") {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| Error::InvalidArgument(format!("bad range '{s}'")))?;
            let b: f64 = b.trim().parse().map_err(|_| Error::InvalidArgument(format!("bad range '{s}'")))?;
            if b < a {
                return Err(Error::InvalidArgument(format!("empty range '{s}'")));
            }
            let n = ((b - a) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|i| a + i as f64 * step).collect())
        }
        None => parse_f64_list(s),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Spectrum,
    Setmass,
    Wkb,
    Mintime,
    Resolvent,
    Twotime,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Setmass => "setmass",
            Command::Wkb => "wkb",
            Command::Mintime => "mintime",
            Command::Resolvent => "resolvent",
            Command::Twotime => "twotime",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorKind {
    /// `−d²/dx²` with periodic walls.
    Free,
    /// `−d²/dx² + x^{2m}` with Dirichlet walls.
    Dirichlet,
}

/// Everything needed to replay one command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<Potential>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set: Option<SetFamily>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub levels: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub t_grid: Vec<TimeToken>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub k_grid: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lambda_grid: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<OperatorKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub big_m: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub m_w: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_time: Option<TimeToken>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family_size: Option<usize>,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(command: Command, seed: u64) -> Self {
        Self {
            command,
            potential: None,
            set: None,
            k_max: None,
            accuracy: None,
            horizon: None,
            levels: Vec::new(),
            t_grid: Vec::new(),
            k_grid: Vec::new(),
            lambda_grid: Vec::new(),
            operator: None,
            half_width: None,
            nodes: None,
            big_m: Vec::new(),
            m_w: Vec::new(),
            s_time: None,
            radii: None,
            family_size: None,
            seed,
            out_dir: None,
        }
    }

    pub fn potential(&self) -> Result<Potential> {
        let p = self.potential.ok_or_else(|| missing("potential"))?;
        p.validate()?;
        Ok(p)
    }

    pub fn set(&self) -> Result<&SetFamily> {
        self.set.as_ref().ok_or_else(|| missing("set"))
    }

    pub fn times(&self) -> Result<Vec<f64>> {
        if self.t_grid.is_empty() {
            return Err(missing("t_grid"));
        }
        self.t_grid.iter().map(TimeToken::value).collect()
    }
}

pub fn missing(field: &str) -> Error {
    Error::InvalidArgument(format!("run config is missing '{field}'"))
}

/// `m` for `x^{2m}`, or `shifted:COEFF,C` for `(1 + x²)^c`-type growth.
pub fn parse_potential(m: Option<u32>, spec: Option<&str>) -> Result<Potential> {
    match (m, spec) {
        (_, Some(s)) => {
            let (name, args) = s.split_once(':').unwrap_or((s, ""));
            let nums = parse_f64_list(args).unwrap_or_default();
            let p = match (name.trim(), nums.as_slice()) {
                ("monomial" | "x2m", [m]) if m.fract() == 0.0 && *m >= 1.0 => Potential::monomial(*m as u32)?,
                ("shifted", [coeff, c]) => Potential::ShiftedPower { coeff: *coeff, c: *c },
                _ => return Err(Error::InvalidArgument(format!("bad potential spec '{s}'"))),
            };
            p.validate()?;
            Ok(p)
        }
        (Some(m), None) => Potential::monomial(m),
        (None, None) => Potential::monomial(1),
    }
}

/// Set from an inline short form or a JSON file.
pub fn parse_set(inline: Option<&str>, file: Option<&PathBuf>) -> Result<SetFamily> {
    match (inline, file) {
        (Some(s), None) => s.parse(),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::InvalidArgument(format!("cannot read set file {}: {e}", path.display())))?;
            let spec: SetSpec = serde_json::from_str(&text)
                .map_err(|e| Error::InvalidArgument(format!("bad set file {}: {e}", path.display())))?;
            spec.into_family()
        }
        (Some(_), Some(_)) => Err(Error::InvalidArgument("give either --set or --set-file, not both".into())),
        (None, None) => Err(Error::InvalidArgument("a set is required (--set or --set-file)".into())),
    }
}
