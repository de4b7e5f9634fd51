//! Flat `key=value` configuration shared by the config file and the
//! command line.
//!
//! A config file holds one `key=value` pair per line. Blank lines and
//! lines starting with `#` are skipped. Keys are case-insensitive and `_`
//! is read as `-`, so `family_cap=1000` and `family-cap=1000` agree.
//! Every key is also a long flag of the matching subcommand, and a flag
//! overrides the file.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use permlab::perm::HeavinessThreshold;
use serde::{Deserialize, Serialize};

use crate::error::{usage, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    Permanent,
    Moments,
    Anticonc,
    Grow,
    Endgame,
    MagnitudeSweep,
    Report,
}

/// Keys accepted by every subcommand.
pub const COMMON_KEYS: &[(&str, &str)] = &[
    ("n", "matrix dimension"),
    ("trials", "number of trials"),
    ("seed", "root seed"),
    (
        "threads",
        "worker threads (default: PERMLAB_THREADS, then all cores)",
    ),
    ("out", "output path; stdout when absent"),
    ("format", "csv or json"),
];

impl Subcommand {
    pub const ALL: [Subcommand; 7] = [
        Subcommand::Permanent,
        Subcommand::Moments,
        Subcommand::Anticonc,
        Subcommand::Grow,
        Subcommand::Endgame,
        Subcommand::MagnitudeSweep,
        Subcommand::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Permanent => "permanent",
            Subcommand::Moments => "moments",
            Subcommand::Anticonc => "anticonc",
            Subcommand::Grow => "grow",
            Subcommand::Endgame => "endgame",
            Subcommand::MagnitudeSweep => "magnitude-sweep",
            Subcommand::Report => "report",
        }
    }

    pub fn about(self) -> &'static str {
        match self {
            Subcommand::Permanent => "Exact permanents of random symmetric sign matrices",
            Subcommand::Moments => "Exact and Monte Carlo second moments of the permanent",
            Subcommand::Anticonc => {
                "Exact small-ball probabilities against the anti-concentration bounds"
            }
            Subcommand::Grow => "Weak growth, cover, growth and the composed single-minor pipeline",
            Subcommand::Endgame => "One endgame step on a complement-disjoint heavy family",
            Subcommand::MagnitudeSweep => "Median of log|per| / (n log n / 2) across dimensions",
            Subcommand::Report => "Merge records of one subcommand into a summary table",
        }
    }

    /// Subcommand-specific keys with their help text.
    pub fn keys(self) -> &'static [(&'static str, &'static str)] {
        match self {
            Subcommand::Permanent => &[("method", "ryser, glynn or naive")],
            Subcommand::Moments => &[
                ("n-list", "dimensions, comma separated"),
                ("epsilon", "exponent slack of the Markov tail"),
            ],
            Subcommand::Anticonc => &[
                ("vars", "largest number of variables"),
                (
                    "coef-max",
                    "coefficients are drawn from [-coef-max, coef-max]",
                ),
                ("r", "coefficient threshold of the linear chain"),
                ("t-list", "values of t, comma separated"),
            ],
            Subcommand::Grow => &[
                ("mode", "weak, cover, growth or pipeline"),
                ("l", "final corank L"),
                ("r", "weak-growth offset R"),
                ("s", "S of the cover and growth processes"),
                ("t", "T of the growth process"),
                ("delta", "weak-growth δ"),
                ("k", "weak-growth K"),
                ("lambda", "starting threshold λ"),
                ("steps", "cover or growth steps (default 3S or 5S)"),
                ("j1", "pipeline cover-R steps"),
                ("j2", "pipeline growth-L² steps"),
                ("j3", "pipeline growth-L steps"),
                ("x", "pipeline X, comma separated"),
                ("y", "pipeline Y, comma separated"),
                ("family-cap", "largest heavy family kept by weak growth"),
            ],
            Subcommand::Endgame => &[
                ("l", "corank L of the family"),
                ("m", "family size"),
                ("lambda", "family threshold λ"),
            ],
            Subcommand::MagnitudeSweep => &[
                ("n-list", "dimensions, comma separated"),
                ("svg", "optional chart path"),
            ],
            Subcommand::Report => &[
                ("inputs", "record CSV files, comma separated"),
                ("svg", "optional chart path"),
            ],
        }
    }

    /// Trials (or samples) when no `trials` key is given.
    pub fn default_trials(self) -> usize {
        match self {
            Subcommand::Permanent => 100,
            Subcommand::Moments => 10_000,
            Subcommand::Anticonc => 1000,
            Subcommand::Grow => 20,
            Subcommand::Endgame => 500,
            Subcommand::MagnitudeSweep => 200,
            Subcommand::Report => 0,
        }
    }

    pub fn accepts(self, key: &str) -> bool {
        COMMON_KEYS
            .iter()
            .chain(self.keys())
            .any(|(k, _)| *k == key)
    }
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Subcommand {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Subcommand::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| usage(format!("unknown subcommand {s:?}")))
    }
}

pub fn normalize_key(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('_', "-")
}

/// Parse the flat config format.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            usage(format!(
                "config line {}: expected key=value, got {line:?}",
                no + 1
            ))
        })?;
        let key = normalize_key(k);
        if key.is_empty() {
            return Err(usage(format!("config line {}: empty key", no + 1)));
        }
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(usage(format!("config line {}: key {key} repeated", no + 1)));
        }
    }
    Ok(out)
}

/// `p/q`, an integer, or a finite decimal, all read exactly.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).ok()?;
        let q = BigInt::from_str(q.trim()).ok()?;
        return (!q.is_zero()).then(|| BigRational::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let neg = int.starts_with('-');
        let whole = if int.is_empty() || int == "-" {
            BigInt::zero()
        } else {
            BigInt::from_str(int).ok()?
        };
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let f = BigInt::from_str(frac).ok()?;
        let f = if neg { -f } else { f };
        return Some(BigRational::new(whole * &den + f, den));
    }
    BigInt::from_str(s).ok().map(BigRational::from_integer)
}

/// Merged parameters of one run.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Params {
    values: BTreeMap<String, String>,
}

/// Keys that never affect data rows.
const PLUMBING: &[&str] = &["threads", "out", "format", "svg"];

impl Params {
    /// `flags` override `file`.
    pub fn merged(file: BTreeMap<String, String>, flags: BTreeMap<String, String>) -> Self {
        let mut values = file;
        values.extend(flags);
        Params { values }
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        Params {
            values: pairs
                .into_iter()
                .map(|(k, v)| (normalize_key(k), v.to_string()))
                .collect(),
        }
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(normalize_key(key), value.into());
    }

    pub fn check_known(&self, sub: Subcommand) -> Result<(), CliError> {
        match self.values.keys().find(|k| !sub.accepts(k)) {
            Some(k) => Err(usage(format!("{sub} does not take key {k:?}"))),
            None => Ok(()),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parsed<T: FromStr>(&self, key: &str, what: &str) -> Result<Option<T>, CliError> {
        self.get(key)
            .map(|v| {
                v.trim()
                    .parse::<T>()
                    .map_err(|_| usage(format!("{key} = {v:?} is not {what}")))
            })
            .transpose()
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, CliError> {
        Ok(self
            .parsed(key, "a non-negative integer")?
            .unwrap_or(default))
    }

    pub fn opt_usize(&self, key: &str) -> Result<Option<usize>, CliError> {
        self.parsed(key, "a non-negative integer")
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64, CliError> {
        Ok(self
            .parsed(key, "a 64-bit unsigned integer")?
            .unwrap_or(default))
    }

    pub fn rational_or(&self, key: &str, default: &str) -> Result<BigRational, CliError> {
        let v = self.get(key).unwrap_or(default);
        parse_rational(v)
            .ok_or_else(|| usage(format!("{key} = {v:?} is not a rational (p/q or decimal)")))
    }

    pub fn threshold_or(&self, key: &str, default: &str) -> Result<HeavinessThreshold, CliError> {
        let r = self.rational_or(key, default)?;
        HeavinessThreshold::from_rational(r).map_err(|e| usage(format!("{key}: {e}")))
    }

    pub fn usize_list_or(&self, key: &str, default: &str) -> Result<Vec<usize>, CliError> {
        let v = self.get(key).unwrap_or(default);
        if v.trim().is_empty() {
            return Ok(Vec::new());
        }
        v.split(',')
            .map(|p| {
                p.trim()
                    .parse()
                    .map_err(|_| usage(format!("{key} = {v:?} is not a list of integers")))
            })
            .collect()
    }

    pub fn rational_list_or(&self, key: &str, default: &str) -> Result<Vec<BigRational>, CliError> {
        let v = self.get(key).unwrap_or(default);
        v.split(',')
            .map(|p| {
                parse_rational(p)
                    .ok_or_else(|| usage(format!("{key} = {v:?} is not a list of rationals")))
            })
            .collect()
    }

    pub fn string_list(&self, key: &str) -> Vec<String> {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect()
            })
            .unwrap_or_default()
    }

    pub fn choice_or(
        &self,
        key: &str,
        choices: &[&str],
        default: &str,
    ) -> Result<String, CliError> {
        let v = self.get(key).unwrap_or(default);
        if choices.contains(&v) {
            Ok(v.to_string())
        } else {
            Err(usage(format!(
                "{key} = {v:?} must be one of {}",
                choices.join(", ")
            )))
        }
    }

    /// Every key that can change a data row, sorted.
    pub fn snapshot(&self) -> Vec<(String, String)> {
        self.values
            .iter()
            .filter(|(k, _)| !PLUMBING.contains(&k.as_str()))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// A validated run description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub subcommand: Subcommand,
    pub params: Params,
    pub trials: usize,
    pub root_seed: u64,
    /// `0` means all cores.
    pub threads: usize,
    pub format: Format,
}

impl ExperimentConfig {
    /// `env_threads` is the value of `PERMLAB_THREADS`, used when no
    /// `threads` key is set.
    pub fn new(
        subcommand: Subcommand,
        params: Params,
        default_trials: usize,
        env_threads: Option<&str>,
    ) -> Result<Self, CliError> {
        params.check_known(subcommand)?;
        let threads = match (params.get("threads"), env_threads) {
            (Some(_), _) => params.usize_or("threads", 0)?,
            (None, Some(v)) => v.trim().parse().map_err(|_| {
                usage(format!(
                    "PERMLAB_THREADS = {v:?} is not a non-negative integer"
                ))
            })?,
            (None, None) => 0,
        };
        let format = match params
            .choice_or("format", &["csv", "json"], "csv")?
            .as_str()
        {
            "json" => Format::Json,
            _ => Format::Csv,
        };
        Ok(ExperimentConfig {
            subcommand,
            trials: params.usize_or("trials", default_trials)?,
            root_seed: params.u64_or("seed", 1)?,
            threads,
            format,
            params,
        })
    }
}
