//! Run configuration: flat `key = value` text with the experiment defaults.
//!
//! ```text
//! # couplings may be written as multiples of pi
//! N = 5
//! J_par = 0.1*pi
//! J_perp = 0.2*pi
//! gamma = 0.01
//! dt = 0.5
//! steps = 200
//! substeps = 50
//! initial_label = d,u,u,u,u
//! train_fraction = 0.5
//! rank = 19
//! reg = 1e-6
//! observables = polarization:1, polarization:5, current:3
//! output_dir = out
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::algebra::ComplexMatrix;
use crate::error::{Error, Result};
use crate::lindblad::{spin_current_op, spin_polarization_op, total_sz_op, SpinChainParams};
use crate::textio::fmt_exact;

pub const KEYS: [&str; 13] = [
    "N",
    "J_par",
    "J_perp",
    "gamma",
    "dt",
    "steps",
    "substeps",
    "initial_label",
    "train_fraction",
    "rank",
    "reg",
    "observables",
    "output_dir",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ObservableKind {
    Polarization,
    Current,
    TotalSz,
}

/// An observable requested for forecasting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ObservableSpec {
    pub kind: ObservableKind,
    pub site: usize,
}

impl ObservableSpec {
    pub fn polarization(site: usize) -> Self {
        Self {
            kind: ObservableKind::Polarization,
            site,
        }
    }

    pub fn current(site: usize) -> Self {
        Self {
            kind: ObservableKind::Current,
            site,
        }
    }

    pub fn total_sz() -> Self {
        Self {
            kind: ObservableKind::TotalSz,
            site: 0,
        }
    }

    /// Column value used in the forecast CSV, e.g. `polarization_1`.
    pub fn id(&self) -> String {
        match self.kind {
            ObservableKind::Polarization => format!("polarization_{}", self.site),
            ObservableKind::Current => format!("current_{}", self.site),
            ObservableKind::TotalSz => "total_sz".to_string(),
        }
    }

    pub fn operator(&self, params: &SpinChainParams) -> Result<ComplexMatrix> {
        match self.kind {
            ObservableKind::Polarization => spin_polarization_op(self.site, params.n),
            ObservableKind::Current => spin_current_op(self.site, params),
            ObservableKind::TotalSz => Ok(total_sz_op(params.n)),
        }
    }
}

impl fmt::Display for ObservableSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ObservableKind::Polarization => write!(f, "polarization:{}", self.site),
            ObservableKind::Current => write!(f, "current:{}", self.site),
            ObservableKind::TotalSz => write!(f, "total_sz"),
        }
    }
}

impl FromStr for ObservableSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, site) = match s.split_once(':') {
            Some((k, v)) => (k.trim(), Some(v.trim())),
            None => (s, None),
        };
        let site = || -> Result<usize> {
            let v = site.ok_or_else(|| Error::Config(format!("observable '{s}' needs a site")))?;
            v.parse()
                .map_err(|_| Error::Config(format!("bad site in observable '{s}'")))
        };
        match kind {
            "polarization" => Ok(Self::polarization(site()?)),
            "current" => Ok(Self::current(site()?)),
            "total_sz" => Ok(Self::total_sz()),
            other => Err(Error::Config(format!(
                "unknown observable kind '{other}' (expected polarization|current|total_sz)"
            ))),
        }
    }
}

/// Evaluates products and quotients of numbers and `pi`, e.g. `0.1*pi`.
pub fn parse_expr(text: &str) -> Result<f64> {
    let text = text.trim();
    if text.is_empty() {
        return Err(Error::Config("empty numeric value".into()));
    }
    let mut value = 1.0;
    let mut op = '*';
    let mut token = String::new();
    let apply = |value: &mut f64, op: char, token: &str| -> Result<()> {
        let t = token.trim();
        let x = if t.eq_ignore_ascii_case("pi") {
            std::f64::consts::PI
        } else {
            t.parse::<f64>()
                .map_err(|_| Error::Config(format!("cannot evaluate '{text}'")))?
        };
        if op == '*' {
            *value *= x;
        } else {
            *value /= x;
        }
        Ok(())
    };
    for c in text.chars() {
        // '*' and '/' separate factors; keep exponent signs like 1e-6 intact
        if (c == '*' || c == '/') && !token.trim().is_empty() {
            apply(&mut value, op, &token)?;
            token.clear();
            op = c;
        } else {
            token.push(c);
        }
    }
    apply(&mut value, op, &token)?;
    if !value.is_finite() {
        return Err(Error::Config(format!("'{text}' is not finite")));
    }
    Ok(value)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: SpinChainParams,
    pub initial_label: String,
    pub train_fraction: f64,
    pub rank: usize,
    pub reg: f64,
    pub observables: Vec<ObservableSpec>,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: SpinChainParams::default(),
            initial_label: "d,u,u,u,u".into(),
            train_fraction: 0.5,
            rank: 19,
            reg: 1e-6,
            observables: vec![
                ObservableSpec::polarization(1),
                ObservableSpec::polarization(5),
                ObservableSpec::current(3),
            ],
            output_dir: PathBuf::from("out"),
        }
    }
}

fn usize_value(key: &str, v: &str) -> Result<usize> {
    v.trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: expected a non-negative integer, got '{v}'")))
}

impl RunConfig {
    /// Applies one `key = value` assignment. Unknown keys are rejected.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim();
        let value = value.trim();
        match key {
            "N" => self.params.n = usize_value(key, value)?,
            "J_par" => self.params.j_par = parse_expr(value)?,
            "J_perp" => self.params.j_perp = parse_expr(value)?,
            "gamma" => self.params.gamma = parse_expr(value)?,
            "dt" => self.params.dt = parse_expr(value)?,
            "steps" => self.params.steps = usize_value(key, value)?,
            "substeps" => self.params.substeps = usize_value(key, value)?,
            "initial_label" => self.initial_label = value.to_string(),
            "train_fraction" => self.train_fraction = parse_expr(value)?,
            "rank" => self.rank = usize_value(key, value)?,
            "reg" => self.reg = parse_expr(value)?,
            "observables" => {
                self.observables = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(str::parse)
                    .collect::<Result<Vec<_>>>()?
            }
            "output_dir" => self.output_dir = PathBuf::from(value),
            other => {
                return Err(Error::Config(format!(
                    "unknown key '{other}' (valid keys: {})",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Parses `key = value` lines over the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, line) in text.lines().enumerate() {
            let t = line.split('#').next().unwrap_or("").trim();
            if t.is_empty() {
                continue;
            }
            let (k, v) = t.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            cfg.set(k, v)
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Applies `key=value` overrides (as given to `--set`).
    pub fn apply_overrides<S: AsRef<str>>(&mut self, overrides: &[S]) -> Result<()> {
        for o in overrides {
            let o = o.as_ref();
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override '{o}' is not key=value")))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.params
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        let labels = crate::lindblad::initial_state(&self.initial_label)
            .map_err(|e| Error::Config(e.to_string()))?;
        if labels.dim() != self.params.dim() {
            return Err(Error::Config(format!(
                "initial_label '{}' has {} sites but N = {}",
                self.initial_label,
                labels.dim().trailing_zeros(),
                self.params.n
            )));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config("train_fraction must lie in (0, 1)".into()));
        }
        if self.rank == 0 || self.rank > self.params.feature_dim() {
            return Err(Error::Config(format!(
                "rank {} outside 1..={}",
                self.rank,
                self.params.feature_dim()
            )));
        }
        if !(self.reg > 0.0) {
            return Err(Error::Config("reg must be > 0".into()));
        }
        for o in &self.observables {
            if o.kind != ObservableKind::TotalSz && (o.site == 0 || o.site > self.params.n) {
                return Err(Error::Config(format!(
                    "observable {o} refers to a site outside 1..={}",
                    self.params.n
                )));
            }
        }
        Ok(())
    }

    /// Canonical text form; parses back to the same config.
    pub fn to_text(&self) -> String {
        let p = &self.params;
        let obs: Vec<String> = self.observables.iter().map(|o| o.to_string()).collect();
        format!(
            "N = {}\nJ_par = {}\nJ_perp = {}\ngamma = {}\ndt = {}\nsteps = {}\nsubsteps = {}\n\
             initial_label = {}\ntrain_fraction = {}\nrank = {}\nreg = {}\nobservables = {}\n\
             output_dir = {}\n",
            p.n,
            fmt_exact(p.j_par),
            fmt_exact(p.j_perp),
            fmt_exact(p.gamma),
            fmt_exact(p.dt),
            p.steps,
            p.substeps,
            self.initial_label,
            fmt_exact(self.train_fraction),
            self.rank,
            fmt_exact(self.reg),
            obs.join(", "),
            self.output_dir.display()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn defaults_match_experiment() {
        let c = RunConfig::default();
        assert_eq!(c.params.n, 5);
        assert_eq!(c.params.j_par, 0.1 * PI);
        assert_eq!(c.params.j_perp, 0.2 * PI);
        assert_eq!(c.params.gamma, 0.01);
        assert_eq!(c.params.dt, 0.5);
        assert_eq!(c.params.steps, 200);
        assert_eq!(c.train_fraction, 0.5);
        assert_eq!(c.rank, 19);
        assert_eq!(c.reg, 1e-6);
        assert_eq!(c.initial_label, "d,u,u,u,u");
        c.validate().unwrap();
    }

    #[test]
    fn expressions() {
        assert_eq!(parse_expr("0.1*pi").unwrap(), 0.1 * PI);
        assert_eq!(parse_expr("pi / 10").unwrap(), PI / 10.0);
        assert_eq!(parse_expr("1e-6").unwrap(), 1e-6);
        assert_eq!(parse_expr("2.5E-3 * 2").unwrap(), 5e-3);
        assert!(parse_expr("tau").is_err());
        assert!(parse_expr("").is_err());
        assert!(parse_expr("1/0").is_err());
    }

    #[test]
    fn parse_and_round_trip() {
        let text = "# test\nN = 3\nJ_par = 0.3*pi # inline\nrank=4\nobservables = total_sz, current:2\n\
                    initial_label = u,d,u\n";
        let c = RunConfig::parse(text).unwrap();
        assert_eq!(c.params.n, 3);
        assert_eq!(c.params.j_par, 0.3 * PI);
        assert_eq!(c.rank, 4);
        assert_eq!(
            c.observables,
            vec![ObservableSpec::total_sz(), ObservableSpec::current(2)]
        );
        c.validate().unwrap();
        assert_eq!(RunConfig::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn errors_are_loud() {
        assert!(RunConfig::parse("J_para = 1").is_err());
        assert!(RunConfig::parse("N 5").is_err());
        assert!(RunConfig::parse("observables = spin:1").is_err());
        assert!(RunConfig::parse("observables = current").is_err());
        assert!(RunConfig::parse("steps = -2").is_err());
        let mut c = RunConfig::default();
        assert!(c.apply_overrides(&["rank"]).is_err());
        c.apply_overrides(&["rank=2", "gamma=0"]).unwrap();
        assert_eq!((c.rank, c.params.gamma), (2, 0.0));
        c.set("N", "4").unwrap();
        assert!(c.validate().is_err(), "label length must match N");
        let mut c = RunConfig::default();
        c.set("observables", "polarization:6").unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn observable_ids() {
        assert_eq!(ObservableSpec::polarization(1).id(), "polarization_1");
        assert_eq!(ObservableSpec::current(3).id(), "current_3");
        assert_eq!("total_sz".parse::<ObservableSpec>().unwrap().id(), "total_sz");
    }
}
