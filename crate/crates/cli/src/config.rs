//! Run configuration: `key = value` lines, `#` comments.
//!
//! Physical quantities follow the preset. With `preset = hydrogen`, times are
//! in seconds, radii in metres and frequencies in rad/s. With
//! `preset = synthetic` everything is in scaled units: `p = cKt`, `r' = Kr`,
//! frequencies in units of `cK`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use lyman_core::units::MagneticNumber;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given twice")]
    Duplicate { line: usize, key: String },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("key `{key}`: {reason}")]
    Invalid { key: String, reason: String },
    #[error("key `{key}` conflicts with {reason}")]
    Conflict { key: String, reason: String },
}

type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Decay,
    Spectrum,
    Field,
    Asymptotics,
    Angular,
    Validate,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Decay => "decay",
            Mode::Spectrum => "spectrum",
            Mode::Field => "field",
            Mode::Asymptotics => "asymptotics",
            Mode::Angular => "angular",
            Mode::Validate => "validate",
        }
    }

    /// Keys this mode reads besides the always-allowed ones.
    fn keys(self) -> &'static [&'static str] {
        match self {
            Mode::Decay => &["t_grid", "tau_grid"],
            Mode::Spectrum => &["omega_grid"],
            Mode::Field => &["t", "p", "r_grid", "theta", "phi", "tol"],
            Mode::Asymptotics => &["t", "p", "r_grid", "theta", "phi", "tol"],
            Mode::Angular => &["t", "p", "r", "theta_grid", "phi", "tol"],
            Mode::Validate => &["p"],
        }
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "decay" => Mode::Decay,
            "spectrum" => Mode::Spectrum,
            "field" => Mode::Field,
            "asymptotics" => Mode::Asymptotics,
            "angular" => Mode::Angular,
            "validate" => Mode::Validate,
            other => return Err(format!("unknown mode `{other}`")),
        })
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preset {
    Hydrogen,
    /// Scaled half-width `A` and shifted frequency `B`.
    Synthetic { a: f64, b: f64 },
}

impl Preset {
    pub fn name(&self) -> &'static str {
        match self {
            Preset::Hydrogen => "hydrogen",
            Preset::Synthetic { .. } => "synthetic",
        }
    }
}

/// Time axis of a decay run.
#[derive(Debug, Clone, PartialEq)]
pub enum TimeGrid {
    /// Times in the preset's units.
    Time(Vec<f64>),
    /// Times as multiples of `1/Γ_a`.
    Tau(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub preset: Preset,
    pub m_e: MagneticNumber,
    /// `t` (hydrogen) or `p` (synthetic).
    pub time: Option<f64>,
    pub r: Option<f64>,
    pub theta: f64,
    pub phi: f64,
    pub time_grid: Option<TimeGrid>,
    pub r_grid: Option<Vec<f64>>,
    pub theta_grid: Option<Vec<f64>>,
    pub omega_grid: Option<Vec<f64>>,
    pub tol: Option<f64>,
    pub output: Option<PathBuf>,
    pub cache: Option<PathBuf>,
}

const ALWAYS: [&str; 7] = ["mode", "preset", "m_e", "A", "B", "output", "cache"];
const ALL_KEYS: [&str; 18] = [
    "mode", "preset", "m_e", "A", "B", "p", "t", "r", "theta", "phi", "r_grid", "t_grid",
    "tau_grid", "theta_grid", "omega_grid", "tol", "output", "cache",
];

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut raw: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: line_no,
            text: content.to_string(),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::Syntax {
                line: line_no,
                text: content.to_string(),
            });
        }
        if !ALL_KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey {
                line: line_no,
                key: key.to_string(),
            });
        }
        if raw.insert(key.to_string(), (line_no, value.to_string())).is_some() {
            return Err(ConfigError::Duplicate {
                line: line_no,
                key: key.to_string(),
            });
        }
    }
    let get = |k: &str| raw.get(k).map(|(_, v)| v.as_str());

    let a = get("A").map(|v| number("A", v)).transpose()?;
    let b = get("B").map(|v| number("B", v)).transpose()?;
    let preset = match get("preset").ok_or(ConfigError::Missing("preset"))? {
        "hydrogen" => {
            for key in ["A", "B", "p"] {
                if raw.contains_key(key) {
                    return Err(ConfigError::Conflict {
                        key: key.into(),
                        reason: "preset `hydrogen`, whose constants are fixed (use `t` in seconds)"
                            .into(),
                    });
                }
            }
            Preset::Hydrogen
        }
        "synthetic" => {
            if raw.contains_key("t") {
                return Err(ConfigError::Conflict {
                    key: "t".into(),
                    reason: "preset `synthetic`, which takes the scaled time `p`".into(),
                });
            }
            let a = a.ok_or(ConfigError::Missing("A"))?;
            let b = b.ok_or(ConfigError::Missing("B"))?;
            if !(a > 0.0 && b > 0.0) {
                return Err(invalid("A", "A and B must be positive".into()));
            }
            Preset::Synthetic { a, b }
        }
        other => return Err(invalid("preset", format!("unknown preset `{other}`"))),
    };

    let mode: Mode = get("mode")
        .ok_or(ConfigError::Missing("mode"))?
        .parse()
        .map_err(|reason| invalid("mode", reason))?;
    for key in raw.keys() {
        let k = key.as_str();
        if !ALWAYS.contains(&k) && !mode.keys().contains(&k) {
            return Err(ConfigError::Conflict {
                key: key.clone(),
                reason: format!("mode `{mode}`, which does not use it"),
            });
        }
    }

    let m_e = match get("m_e") {
        None => MagneticNumber::Zero,
        Some(v) => {
            let m: i32 = v
                .parse()
                .map_err(|_| invalid("m_e", format!("`{v}` is not an integer")))?;
            MagneticNumber::try_from(m).map_err(|e| invalid("m_e", e.to_string()))?
        }
    };

    let time = match (get("t"), get("p")) {
        (Some(v), None) => Some(nonneg("t", v)?),
        (None, Some(v)) => Some(nonneg("p", v)?),
        _ => None,
    };
    let time_grid = match (get("t_grid"), get("tau_grid")) {
        (Some(_), Some(_)) => {
            return Err(ConfigError::Conflict {
                key: "tau_grid".into(),
                reason: "`t_grid`; give one time axis".into(),
            })
        }
        (Some(v), None) => Some(TimeGrid::Time(grid("t_grid", v, nonneg_check)?)),
        (None, Some(v)) => Some(TimeGrid::Tau(grid("tau_grid", v, nonneg_check)?)),
        (None, None) => None,
    };
    let theta = get("theta").map(|v| angle("theta", v, PI)).transpose()?;
    let phi = get("phi").map(|v| angle("phi", v, 2.0 * PI)).transpose()?;
    let tol = get("tol").map(|v| positive("tol", v)).transpose()?;
    let r = get("r").map(|v| positive("r", v)).transpose()?;
    let r_grid = get("r_grid").map(|v| grid("r_grid", v, positive_check)).transpose()?;
    let theta_grid = get("theta_grid")
        .map(|v| grid("theta_grid", v, |x| (0.0..=PI).contains(&x)))
        .transpose()?;
    let omega_grid = get("omega_grid")
        .map(|v| grid("omega_grid", v, positive_check))
        .transpose()?;

    let cfg = RunConfig {
        mode,
        preset,
        m_e,
        time,
        r,
        theta: theta.unwrap_or(PI / 2.0),
        phi: phi.unwrap_or(0.0),
        time_grid,
        r_grid,
        theta_grid,
        omega_grid,
        tol,
        output: get("output").map(PathBuf::from),
        cache: get("cache").map(PathBuf::from),
    };
    cfg.check_mode_requirements()?;
    Ok(cfg)
}

impl RunConfig {
    fn time_key(&self) -> &'static str {
        match self.preset {
            Preset::Hydrogen => "t",
            Preset::Synthetic { .. } => "p",
        }
    }

    fn check_mode_requirements(&self) -> Result<()> {
        match self.mode {
            Mode::Field => {
                self.time.ok_or(ConfigError::Missing(self.time_key()))?;
                self.r_grid.as_ref().ok_or(ConfigError::Missing("r_grid"))?;
            }
            Mode::Asymptotics => {
                self.time.ok_or(ConfigError::Missing(self.time_key()))?;
                if self.preset == Preset::Hydrogen && self.r_grid.is_none() {
                    return Err(ConfigError::Missing("r_grid"));
                }
            }
            Mode::Angular => {
                if self.r.is_some() != self.time.is_some() {
                    return Err(ConfigError::Conflict {
                        key: "r".into(),
                        reason: format!(
                            "a numeric angular scan, which needs both `r` and `{}`",
                            self.time_key()
                        ),
                    });
                }
            }
            Mode::Validate => {
                if matches!(self.preset, Preset::Synthetic { .. }) {
                    self.time.ok_or(ConfigError::Missing("p"))?;
                }
            }
            Mode::Decay | Mode::Spectrum => {}
        }
        Ok(())
    }
}

fn invalid(key: &str, reason: String) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        reason,
    }
}

/// A float, `pi`, `pi/x` or `x*pi`.
fn number(key: &str, s: &str) -> Result<f64> {
    let s = s.trim();
    let parse = |t: &str| -> Result<f64> {
        let t = t.trim();
        if t == "pi" {
            return Ok(PI);
        }
        t.parse::<f64>()
            .map_err(|_| invalid(key, format!("`{s}` is not a number")))
    };
    let v = if let Some(den) = s.strip_prefix("pi/") {
        PI / parse(den)?
    } else if let Some(fac) = s.strip_suffix("*pi") {
        parse(fac)? * PI
    } else {
        parse(s)?
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(key, format!("`{s}` is not finite")))
    }
}

fn nonneg_check(x: f64) -> bool {
    x >= 0.0
}

fn positive_check(x: f64) -> bool {
    x > 0.0
}

fn nonneg(key: &str, s: &str) -> Result<f64> {
    let v = number(key, s)?;
    if nonneg_check(v) {
        Ok(v)
    } else {
        Err(invalid(key, format!("{v} is negative")))
    }
}

fn positive(key: &str, s: &str) -> Result<f64> {
    let v = number(key, s)?;
    if positive_check(v) {
        Ok(v)
    } else {
        Err(invalid(key, format!("{v} is not positive")))
    }
}

fn angle(key: &str, s: &str, max: f64) -> Result<f64> {
    let v = number(key, s)?;
    if (0.0..=max).contains(&v) {
        Ok(v)
    } else {
        Err(invalid(key, format!("{v} outside [0, {max}]")))
    }
}

/// `linspace(a,b,n)`, `logspace(a,b,n)` with endpoint values, or a comma list
/// optionally wrapped in brackets.
pub fn grid(key: &str, s: &str, accept: impl Fn(f64) -> bool) -> Result<Vec<f64>> {
    let s = s.trim();
    let values = if let Some(args) = call_args(s, "linspace") {
        let (a, b, n) = range_args(key, &args)?;
        if n == 1 {
            vec![a]
        } else {
            (0..n)
                .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
                .collect()
        }
    } else if let Some(args) = call_args(s, "logspace") {
        let (a, b, n) = range_args(key, &args)?;
        if !(a > 0.0 && b > 0.0) {
            return Err(invalid(key, "logspace endpoints must be positive".into()));
        }
        if n == 1 {
            vec![a]
        } else {
            let (la, lb) = (a.log10(), b.log10());
            (0..n)
                .map(|i| {
                    if i == 0 {
                        a
                    } else if i == n - 1 {
                        b
                    } else {
                        10f64.powf(la + (lb - la) * i as f64 / (n - 1) as f64)
                    }
                })
                .collect()
        }
    } else {
        let inner = s
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .unwrap_or(s);
        inner
            .split(',')
            .map(|t| number(key, t))
            .collect::<Result<Vec<_>>>()?
    };
    if values.is_empty() {
        return Err(invalid(key, "empty grid".into()));
    }
    if let Some(bad) = values.iter().find(|&&v| !accept(v)) {
        return Err(invalid(key, format!("grid value {bad} out of range")));
    }
    Ok(values)
}

fn call_args(s: &str, name: &str) -> Option<Vec<String>> {
    let rest = s.strip_prefix(name)?.trim_start();
    let inner = rest.strip_prefix('(')?.strip_suffix(')')?;
    Some(inner.split(',').map(|t| t.trim().to_string()).collect())
}

fn range_args(key: &str, args: &[String]) -> Result<(f64, f64, usize)> {
    if args.len() != 3 {
        return Err(invalid(key, "range needs (start, stop, count)".into()));
    }
    let n: usize = args[2]
        .parse()
        .map_err(|_| invalid(key, format!("count `{}` is not a positive integer", args[2])))?;
    if n == 0 {
        return Err(invalid(key, "count must be at least 1".into()));
    }
    Ok((number(key, &args[0])?, number(key, &args[1])?, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi_forms() {
        assert_eq!(number("x", "pi/2").unwrap(), PI / 2.0);
        assert_eq!(number("x", "2*pi").unwrap(), 2.0 * PI);
        assert!(number("x", "inf").is_err());
    }

    #[test]
    fn logspace_hits_endpoints() {
        let g = grid("r", "logspace(1e2, 1e4, 25)", positive_check).unwrap();
        assert_eq!(g.len(), 25);
        assert_eq!(g[0], 1e2);
        assert_eq!(g[24], 1e4);
        assert!((g[12] - 1e3).abs() < 1e-9);
    }

    #[test]
    fn comments_and_blank_lines() {
        let cfg = parse_config("# run\n\nmode = decay # curve\npreset = hydrogen\n").unwrap();
        assert_eq!(cfg.mode, Mode::Decay);
        assert_eq!(cfg.m_e, MagneticNumber::Zero);
    }
}
