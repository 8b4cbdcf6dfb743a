//! Experiment configuration: flat `key = value` files plus command-line
//! overrides, validated against a per-experiment parameter table.
//!
//! Numbers may be written with `pi`: `pi/2`, `-3*pi/4`, `0.25`. A list is
//! comma-separated; `start:stop:count` expands to `count` evenly spaced
//! values including both ends.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, clap::ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Experiment {
    Overlap,
    Zeno,
    FidelityMap,
    OverallFidelity,
    Postselect,
    BellcatCost,
    DaknaFidelity,
    DaknaProbability,
    DaknaBell,
    DaknaGate,
    LossReamp,
    ThreeQubit,
    Amplify,
}

impl Experiment {
    pub const ALL: [Experiment; 13] = [
        Experiment::Overlap,
        Experiment::Zeno,
        Experiment::FidelityMap,
        Experiment::OverallFidelity,
        Experiment::Postselect,
        Experiment::BellcatCost,
        Experiment::DaknaFidelity,
        Experiment::DaknaProbability,
        Experiment::DaknaBell,
        Experiment::DaknaGate,
        Experiment::LossReamp,
        Experiment::ThreeQubit,
        Experiment::Amplify,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Overlap => "overlap",
            Experiment::Zeno => "zeno",
            Experiment::FidelityMap => "fidelity_map",
            Experiment::OverallFidelity => "overall_fidelity",
            Experiment::Postselect => "postselect",
            Experiment::BellcatCost => "bellcat_cost",
            Experiment::DaknaFidelity => "dakna_fidelity",
            Experiment::DaknaProbability => "dakna_probability",
            Experiment::DaknaBell => "dakna_bell",
            Experiment::DaknaGate => "dakna_gate",
            Experiment::LossReamp => "loss_reamp",
            Experiment::ThreeQubit => "three_qubit",
            Experiment::Amplify => "amplify",
        }
    }

    /// Accepted parameters with their defaults; `seed` is accepted everywhere.
    pub fn params(&self) -> &'static [ParamSpec] {
        use Kind::*;
        const fn p(key: &'static str, kind: Kind, default: &'static str) -> ParamSpec {
            ParamSpec { key, kind, default }
        }
        const POSTSELECT: &[ParamSpec] = &[p("alpha", Reals, "1,1.5,2,2.5,3,3.5,4"), p("theta", Real, "pi/2"), p("f_min", Real, "0.99")];
        match self {
            Experiment::Overlap => const { &[p("alpha", Reals, "0.5,1,1.5,2,2.5,3")] },
            Experiment::Zeno => {
                const {
                    &[
                        p("alpha", Real, "2"),
                        p("theta", Real, "pi/4"),
                        p("n", Counts, "1,2,4,8,16,30"),
                        p("model", Choice(&["ideal", "counting"]), "ideal"),
                        p("runs", Count, "400"),
                    ]
                }
            }
            Experiment::FidelityMap => const { &[p("alpha", Real, "2"), p("theta", Real, "pi/2")] },
            Experiment::OverallFidelity => const { &[p("alpha", Reals, "2"), p("theta", Reals, "pi/2,pi/16")] },
            Experiment::Postselect | Experiment::BellcatCost => POSTSELECT,
            Experiment::DaknaFidelity => {
                const { &[p("lambda", Real, "0.6"), p("m", Counts, "0,2,4"), p("x", Reals, "0.05:0.55:11"), p("cutoff", Count, "80")] }
            }
            Experiment::DaknaProbability => {
                const { &[p("lambda", Real, "0.6"), p("m", Counts, "0,2,4"), p("theta", Reals, "pi/36:17*pi/36:17"), p("cutoff", Count, "60")] }
            }
            Experiment::DaknaBell => {
                const { &[p("lambda", Real, "0.6"), p("m", Counts, "2,4"), p("x", Reals, "0.05:0.5:10"), p("cutoff", Count, "80")] }
            }
            Experiment::DaknaGate => {
                const {
                    &[
                        p("phi", Real, "pi/32"),
                        p("lambda", Real, "0.6"),
                        p("m", Counts, "2"),
                        p("x", Reals, "0.05:0.4:8"),
                        p("cutoff", Count, "40"),
                    ]
                }
            }
            Experiment::LossReamp => {
                const { &[p("alpha", Real, "2"), p("eps", Reals, "0:0.2:11"), p("input", Choice(&["y", "plus", "zero"]), "y")] }
            }
            Experiment::ThreeQubit => const { &[p("alpha", Real, "2"), p("gamma", Real, "0.1"), p("t", Real, "1")] },
            Experiment::Amplify => {
                const { &[p("alpha", Real, "1"), p("rounds", Count, "3"), p("model", Choice(&["ideal", "counting"]), "ideal")] }
            }
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|e| e.name() == s).ok_or_else(|| CliError::config(format!("unknown experiment `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kind {
    Real,
    Reals,
    Count,
    Counts,
    Choice(&'static [&'static str]),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSpec {
    pub key: &'static str,
    pub kind: Kind,
    pub default: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(CliError::config(format!("unknown format `{s}`; use csv or json"))),
        }
    }
}

/// A validated experiment configuration with every parameter resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    params: BTreeMap<String, String>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
}

/// Raw settings collected from a file and the command line, in order.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    entries: Vec<(String, String)>,
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut s = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| CliError::config(format!("line {}: expected `key = value`", i + 1)))?;
            s.set(k.trim(), v.trim());
        }
        Ok(s)
    }

    pub fn set(&mut self, key: &str, value: &str) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    /// Appends `other`, whose entries then take precedence.
    pub fn append(&mut self, other: Settings) {
        self.entries.extend(other.entries);
    }

    /// Reads `--key value` and `--key=value` pairs.
    pub fn extend_from_flags(&mut self, args: &[String]) -> Result<()> {
        let mut it = args.iter();
        while let Some(a) = it.next() {
            let flag = a.strip_prefix("--").ok_or_else(|| CliError::config(format!("expected `--key value`, found `{a}`")))?;
            match flag.split_once('=') {
                Some((k, v)) => self.set(k, v),
                None => {
                    let v = it.next().ok_or_else(|| CliError::config(format!("`--{flag}` needs a value")))?;
                    self.set(flag, v);
                }
            }
        }
        Ok(())
    }

    fn last(&self, key: &str) -> Option<&str> {
        self.entries.iter().rev().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn resolve(&self, experiment: Option<Experiment>) -> Result<ExperimentConfig> {
        let experiment = match (experiment, self.last("experiment")) {
            (Some(e), _) => e,
            (None, Some(name)) => name.parse()?,
            (None, None) => return Err(CliError::config("no experiment given")),
        };
        let specs = experiment.params();
        let mut params: BTreeMap<String, String> = specs.iter().map(|p| (p.key.to_string(), p.default.to_string())).collect();
        let mut seed = 0;
        let mut out = None;
        let mut format = Format::Csv;
        for (k, v) in &self.entries {
            match k.as_str() {
                "experiment" => {}
                "seed" => seed = v.parse().map_err(|_| CliError::config(format!("seed must be a non-negative integer, got `{v}`")))?,
                "out" => out = Some(PathBuf::from(v)),
                "format" => format = v.parse()?,
                _ => {
                    let spec = specs.iter().find(|p| p.key == k).ok_or_else(|| {
                        let known: Vec<_> = specs.iter().map(|p| p.key).collect();
                        CliError::config(format!("unknown key `{k}` for {experiment}; accepted: {}", known.join(", ")))
                    })?;
                    check_value(spec, v)?;
                    params.insert(k.clone(), v.clone());
                }
            }
        }
        for spec in specs {
            check_value(spec, &params[spec.key])?;
        }
        Ok(ExperimentConfig { experiment, params, seed, out, format })
    }
}

fn check_value(spec: &ParamSpec, v: &str) -> Result<()> {
    let bad = |why: String| CliError::config(format!("`{}` = `{v}`: {why}", spec.key));
    match spec.kind {
        Kind::Real => {
            parse_number(v).map_err(bad)?;
        }
        Kind::Reals => {
            parse_list(v).map_err(bad)?;
        }
        Kind::Count => {
            parse_count(v).map_err(bad)?;
        }
        Kind::Counts => {
            parse_counts(v).map_err(bad)?;
        }
        Kind::Choice(options) => {
            if !options.contains(&v) {
                return Err(bad(format!("expected one of {}", options.join(", "))));
            }
        }
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment, overrides: &[(&str, &str)]) -> Result<Self> {
        let mut s = Settings::default();
        for (k, v) in overrides {
            s.set(k, v);
        }
        s.resolve(Some(experiment))
    }

    /// Resolved parameters in key order, including `seed`.
    pub fn resolved(&self) -> Vec<(String, String)> {
        let mut v: Vec<(String, String)> = self.params.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        v.push(("seed".into(), self.seed.to_string()));
        v.sort();
        v
    }

    fn raw(&self, key: &str) -> &str {
        self.params.get(key).map(String::as_str).unwrap_or_else(|| panic!("`{key}` is not a parameter of {}", self.experiment))
    }

    pub fn real(&self, key: &str) -> f64 {
        parse_number(self.raw(key)).expect("validated")
    }

    pub fn reals(&self, key: &str) -> Vec<f64> {
        parse_list(self.raw(key)).expect("validated")
    }

    pub fn count(&self, key: &str) -> usize {
        parse_count(self.raw(key)).expect("validated")
    }

    pub fn counts(&self, key: &str) -> Vec<usize> {
        parse_counts(self.raw(key)).expect("validated")
    }

    pub fn choice(&self, key: &str) -> &str {
        self.raw(key)
    }
}

/// `term (('*' | '/') term)*` with `term = ['-'] (number | pi)`.
pub fn parse_number(s: &str) -> std::result::Result<f64, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty number".into());
    }
    let mut value = None;
    let mut op = '*';
    let mut rest = s;
    loop {
        let end = rest.find(['*', '/']).unwrap_or(rest.len());
        let token = rest[..end].trim();
        let (neg, token) = match token.strip_prefix('-') {
            Some(t) => (true, t.trim()),
            None => (false, token),
        };
        let t = match token {
            "pi" => std::f64::consts::PI,
            _ => token.parse::<f64>().map_err(|_| format!("cannot read `{token}` as a number"))?,
        };
        let t = if neg { -t } else { t };
        value = Some(match (value, op) {
            (None, _) => t,
            (Some(v), '*') => v * t,
            (Some(v), _) => v / t,
        });
        if end == rest.len() {
            break;
        }
        op = rest.as_bytes()[end] as char;
        rest = &rest[end + 1..];
    }
    let v = value.expect("at least one term");
    if !v.is_finite() {
        return Err(format!("`{s}` is not finite"));
    }
    Ok(v)
}

pub fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for item in s.split(',') {
        let parts: Vec<&str> = item.split(':').collect();
        match parts.as_slice() {
            [x] => out.push(parse_number(x)?),
            [a, b, n] => {
                let (a, b) = (parse_number(a)?, parse_number(b)?);
                let n = parse_count(n)?;
                if n < 2 {
                    return Err(format!("range `{item}` needs at least two points"));
                }
                out.extend((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64));
            }
            _ => return Err(format!("`{item}` is neither a number nor `start:stop:count`")),
        }
    }
    Ok(out)
}

fn parse_count(s: &str) -> std::result::Result<usize, String> {
    s.trim().parse().map_err(|_| format!("`{s}` is not a non-negative integer"))
}

fn parse_counts(s: &str) -> std::result::Result<Vec<usize>, String> {
    s.split(',').map(parse_count).collect()
}
