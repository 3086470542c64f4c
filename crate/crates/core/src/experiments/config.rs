use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::theory::second_component_bound;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Supercritical,
    Subcritical,
    Sprinkling,
    Gw,
    Hitprob,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::Supercritical => "supercritical",
            ExperimentKind::Subcritical => "subcritical",
            ExperimentKind::Sprinkling => "sprinkling",
            ExperimentKind::Gw => "gw",
            ExperimentKind::Hitprob => "hitprob",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "supercritical" => Ok(ExperimentKind::Supercritical),
            "subcritical" => Ok(ExperimentKind::Subcritical),
            "sprinkling" => Ok(ExperimentKind::Sprinkling),
            "gw" => Ok(ExperimentKind::Gw),
            "hitprob" => Ok(ExperimentKind::Hitprob),
            other => Err(format!("unknown experiment kind `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    #[default]
    Json,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(format!("unknown report format `{other}`")),
        }
    }
}

/// Keys accepted in a config file.
pub const CONFIG_KEYS: &[&str] = &[
    "kind",
    "d",
    "c",
    "eps",
    "trials",
    "seed",
    "w_threshold",
    "p2_exponent",
    "gap_lo",
    "gap_hi",
    "progeny_cap",
    "out",
    "format",
];

pub const DEFAULT_P2_EXPONENT: f64 = 5.0;
pub const DEFAULT_PROGENY_CAP: u64 = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub d: u32,
    pub c: Option<f64>,
    pub eps: Option<f64>,
    pub trials: u32,
    pub seed: u64,
    /// Component size at which a vertex joins W; defaults to `d^2`.
    pub w_threshold: Option<u64>,
    pub p2_exponent: f64,
    pub gap_lo: Option<u64>,
    pub gap_hi: Option<u64>,
    /// Total progeny at which a Galton-Watson tree counts as surviving.
    pub progeny_cap: u64,
    pub out: Option<PathBuf>,
    pub format: ReportFormat,
}

impl ExperimentConfig {
    /// A validated config with defaults for everything but the essentials.
    pub fn new(kind: ExperimentKind, d: u32, trials: u32, seed: u64) -> Self {
        ExperimentConfig {
            kind,
            d,
            c: None,
            eps: None,
            trials,
            seed,
            w_threshold: None,
            p2_exponent: DEFAULT_P2_EXPONENT,
            gap_lo: None,
            gap_hi: None,
            progeny_cap: DEFAULT_PROGENY_CAP,
            out: None,
            format: ReportFormat::default(),
        }
    }

    pub fn with_c(mut self, c: f64) -> Self {
        self.c = Some(c);
        self
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = Some(eps);
        self
    }

    /// Parses `key = value` lines; blank lines and `#` comments are skipped.
    pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
        let mut pairs = BTreeMap::new();
        let mut bad = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            match line.split_once('=') {
                Some((k, v)) => {
                    pairs.insert(k.trim().to_string(), v.trim().to_string());
                }
                None => bad.push(format!("line {}", lineno + 1)),
            }
        }
        if bad.is_empty() {
            Ok(pairs)
        } else {
            Err(Error::Config {
                keys: bad,
                message: "expected `key = value`".into(),
            })
        }
    }

    pub fn read_pairs(path: &Path) -> Result<BTreeMap<String, String>> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_pairs(&text)
    }

    /// Builds a config from key/value pairs, reporting every offending key
    /// at once.
    pub fn from_pairs(pairs: &BTreeMap<String, String>) -> Result<Self> {
        let mut problems: Vec<(String, String)> = Vec::new();
        for key in pairs.keys() {
            if !CONFIG_KEYS.contains(&key.as_str()) {
                problems.push((key.clone(), "unknown key".into()));
            }
        }

        fn field<T: FromStr>(
            pairs: &BTreeMap<String, String>,
            key: &str,
            problems: &mut Vec<(String, String)>,
        ) -> Option<T>
        where
            T::Err: fmt::Display,
        {
            let raw = pairs.get(key)?;
            match raw.parse::<T>() {
                Ok(v) => Some(v),
                Err(e) => {
                    problems.push((key.to_string(), format!("cannot parse `{raw}`: {e}")));
                    None
                }
            }
        }

        let kind: Option<ExperimentKind> = field(pairs, "kind", &mut problems);
        if !pairs.contains_key("kind") {
            problems.push(("kind".into(), "missing".into()));
        }
        let d: Option<u32> = field(pairs, "d", &mut problems);
        if !pairs.contains_key("d") {
            problems.push(("d".into(), "missing".into()));
        }
        let c = field(pairs, "c", &mut problems);
        let eps = field(pairs, "eps", &mut problems);
        let trials = field(pairs, "trials", &mut problems).unwrap_or(1);
        let seed = field(pairs, "seed", &mut problems).unwrap_or(0);
        let w_threshold = field(pairs, "w_threshold", &mut problems);
        let p2_exponent = field(pairs, "p2_exponent", &mut problems).unwrap_or(DEFAULT_P2_EXPONENT);
        let gap_lo = field(pairs, "gap_lo", &mut problems);
        let gap_hi = field(pairs, "gap_hi", &mut problems);
        let progeny_cap = field(pairs, "progeny_cap", &mut problems).unwrap_or(DEFAULT_PROGENY_CAP);
        let format = field(pairs, "format", &mut problems).unwrap_or_default();
        let out = pairs.get("out").map(PathBuf::from);

        if !problems.is_empty() {
            return Err(config_error(problems));
        }
        let cfg = ExperimentConfig {
            kind: kind.expect("checked above"),
            d: d.expect("checked above"),
            c,
            eps,
            trials,
            seed,
            w_threshold,
            p2_exponent,
            gap_lo,
            gap_hi,
            progeny_cap,
            out,
            format,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems: Vec<(String, String)> = Vec::new();
        let mut bad = |key: &str, msg: String| problems.push((key.to_string(), msg));
        if self.trials == 0 {
            bad("trials", "must be at least 1".into());
        }
        if self.d < 2 {
            bad("d", format!("must be at least 2, got {}", self.d));
        }
        match (self.c, self.eps) {
            (Some(_), Some(_)) => bad("c", "set exactly one of `c` and `eps`".into()),
            (None, None) => bad("c", "set exactly one of `c` and `eps`".into()),
            _ => {}
        }
        let d = f64::from(self.d);
        match self.kind {
            ExperimentKind::Supercritical | ExperimentKind::Sprinkling => {
                if let Some(c) = self.c {
                    if c.is_nan() || c <= 1.0 || c > d {
                        bad("c", format!("must satisfy 1 < c <= d, got {c}"));
                    }
                } else if self.eps.is_some() {
                    bad("eps", format!("{} experiments take `c`", self.kind));
                }
            }
            ExperimentKind::Subcritical => {
                if let Some(eps) = self.eps {
                    if !(eps > 0.0 && eps < 1.0) {
                        bad("eps", format!("must lie in (0, 1), got {eps}"));
                    }
                } else if self.c.is_some() {
                    bad("c", "subcritical experiments take `eps`".into());
                }
            }
            ExperimentKind::Gw | ExperimentKind::Hitprob => {
                if let Some(c) = self.c {
                    if !(0.0..=d).contains(&c) {
                        bad("c", format!("must satisfy 0 <= c <= d, got {c}"));
                    }
                } else if self.eps.is_some() {
                    bad("eps", format!("{} experiments take `c`", self.kind));
                }
            }
        }
        if self.w_threshold == Some(0) {
            bad("w_threshold", "must be at least 1".into());
        }
        if self.p2_exponent.is_nan() || self.p2_exponent <= 0.0 {
            bad("p2_exponent", "must be positive".into());
        }
        if self.progeny_cap == 0 {
            bad("progeny_cap", "must be at least 1".into());
        }
        if let (Some(lo), Some(hi)) = (self.gap_lo, self.gap_hi) {
            if lo > hi {
                bad("gap_lo", format!("gap window [{lo}, {hi}] is empty"));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(config_error(problems))
        }
    }

    /// Edge probability implied by the config.
    pub fn p(&self) -> f64 {
        match (self.c, self.eps) {
            (Some(c), _) => c / f64::from(self.d),
            (None, Some(eps)) => (1.0 - eps) / f64::from(self.d - 1),
            (None, None) => 0.0,
        }
    }

    pub fn resolved_w_threshold(&self) -> u64 {
        self.w_threshold
            .unwrap_or(u64::from(self.d) * u64::from(self.d))
    }

    /// `[ceil(d/(c - 1 - ln c)), floor(0.01 n)]` unless overridden.
    pub fn resolved_gap_window(&self) -> Result<(u64, u64)> {
        let lo = match self.gap_lo {
            Some(lo) => lo,
            None => {
                let c = self.c.ok_or_else(|| Error::config("gap_lo", "needs `c`"))?;
                second_component_bound(c, self.d)?.ceil() as u64
            }
        };
        let hi = match self.gap_hi {
            Some(hi) => hi,
            None => ((1u64 << self.d.min(63)) as f64 * 0.01).floor() as u64,
        };
        Ok((lo, hi))
    }
}

fn config_error(problems: Vec<(String, String)>) -> Error {
    let message = problems
        .iter()
        .map(|(k, m)| format!("{k}: {m}"))
        .collect::<Vec<_>>()
        .join("; ");
    let mut keys: Vec<String> = problems.into_iter().map(|(k, _)| k).collect();
    keys.dedup();
    Error::Config { keys, message }
}
