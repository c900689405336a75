//! Suite selection and run configuration.
//!
//! A config file holds `key = value` lines; `#` starts a comment. Command-line
//! flags are applied on top of the file.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sflab_core::sampling::DEFAULT_SEED;
use sflab_core::toric::Kappa;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SuiteName {
    Darboux,
    LagrangianLmu,
    GOfT,
    VanishingCycle,
    StdMonodromy,
    ModelTwist,
    LineIntegrals,
    SInvariance,
    XMonodromy,
}

impl SuiteName {
    pub const ALL: [SuiteName; 9] = [
        SuiteName::Darboux,
        SuiteName::LagrangianLmu,
        SuiteName::GOfT,
        SuiteName::VanishingCycle,
        SuiteName::StdMonodromy,
        SuiteName::ModelTwist,
        SuiteName::LineIntegrals,
        SuiteName::SInvariance,
        SuiteName::XMonodromy,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SuiteName::Darboux => "darboux",
            SuiteName::LagrangianLmu => "lagrangian-lmu",
            SuiteName::GOfT => "g-of-t",
            SuiteName::VanishingCycle => "vanishing-cycle",
            SuiteName::StdMonodromy => "std-monodromy",
            SuiteName::ModelTwist => "model-twist",
            SuiteName::LineIntegrals => "line-integrals",
            SuiteName::SInvariance => "s-invariance",
            SuiteName::XMonodromy => "x-monodromy",
        }
    }

    /// Suites that can write a CSV trace of one of their transports.
    pub fn records_trace(self) -> bool {
        matches!(
            self,
            SuiteName::VanishingCycle
                | SuiteName::StdMonodromy
                | SuiteName::SInvariance
                | SuiteName::XMonodromy
        )
    }
}

impl fmt::Display for SuiteName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SuiteName {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        SuiteName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| CliError::Usage(format!("unknown suite `{s}` (try `lab list`)")))
    }
}

/// Everything a suite run depends on. Unset options fall back to the
/// suite's own defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub suite: SuiteName,
    pub n: Option<usize>,
    pub mu: Option<f64>,
    pub kappa: Option<(f64, f64)>,
    pub t: Vec<f64>,
    pub step: Option<f64>,
    pub seed: u64,
    pub samples: Option<usize>,
    /// Replaces the tolerance of every check.
    pub tol: Option<f64>,
    /// Support radius of the twist profile.
    pub support: Option<f64>,
    pub out: Option<PathBuf>,
    pub trace: Option<PathBuf>,
    /// Write `duration_s = 0` so that reports are byte-for-byte reproducible.
    pub reproducible: bool,
}

impl SuiteConfig {
    pub fn new(suite: SuiteName) -> Self {
        SuiteConfig {
            suite,
            n: None,
            mu: None,
            kappa: None,
            t: Vec::new(),
            step: None,
            seed: DEFAULT_SEED,
            samples: None,
            tol: None,
            support: None,
            out: None,
            trace: None,
            reproducible: false,
        }
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let value = value.trim();
        match key.trim() {
            "suite" => self.suite = value.parse()?,
            "n" => self.n = Some(parse(key, value)?),
            "mu" => self.mu = Some(parse(key, value)?),
            "kappa" => self.kappa = Some(parse_kappa(value)?),
            "t" => self.t = parse_list(key, value)?,
            "step" => self.step = Some(parse(key, value)?),
            "seed" => self.seed = parse(key, value)?,
            "samples" => self.samples = Some(parse(key, value)?),
            "tol" => self.tol = Some(parse(key, value)?),
            "support" => self.support = Some(parse(key, value)?),
            "out" => self.out = Some(PathBuf::from(value)),
            "trace" => self.trace = Some(PathBuf::from(value)),
            "reproducible" => self.reproducible = parse(key, value)?,
            other => return Err(CliError::Usage(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Reads a config file. The file must name the suite unless `suite` is given.
    pub fn from_file(path: &Path, suite: Option<SuiteName>) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        let entries = parse_key_values(&text)?;
        let named = entries
            .iter()
            .find(|(k, _)| k == "suite")
            .map(|(_, v)| v.parse())
            .transpose()?;
        let suite = suite
            .or(named)
            .ok_or_else(|| CliError::Usage(format!("{} does not name a suite", path.display())))?;
        let mut cfg = SuiteConfig::new(suite);
        for (k, v) in entries.iter().filter(|(k, _)| k != "suite") {
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(mu) = self.mu {
            if !(mu > 1.0) || !mu.is_finite() {
                return Err(CliError::Usage(format!(
                    "mu must be a finite number above 1, got {mu}"
                )));
            }
        }
        if let Some((k1, k2)) = self.kappa {
            Kappa::new(k1, k2).map_err(|e| CliError::Usage(e.to_string()))?;
        }
        if self.samples == Some(0) {
            return Err(CliError::Usage("samples must be at least 1".into()));
        }
        if self.n == Some(0) {
            return Err(CliError::Usage("n must be at least 1".into()));
        }
        for (name, v) in [
            ("step", self.step),
            ("tol", self.tol),
            ("support", self.support),
        ] {
            if let Some(v) = v {
                if !(v > 0.0) || !v.is_finite() {
                    return Err(CliError::Usage(format!("{name} must be positive, got {v}")));
                }
            }
        }
        if self.t.iter().any(|t| !t.is_finite()) {
            return Err(CliError::Usage("t values must be finite".into()));
        }
        if self.trace.is_some() && !self.suite.records_trace() {
            return Err(CliError::Usage(format!(
                "suite {} does not record a trace",
                self.suite
            )));
        }
        Ok(())
    }
}

/// Splits `key = value` lines, skipping blanks and `#` comments.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("line {}: expected key=value", i + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Usage(format!("bad value `{value}` for {key}")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>, CliError> {
    value.split(',').map(|v| parse(key, v.trim())).collect()
}

pub fn parse_kappa(value: &str) -> Result<(f64, f64), CliError> {
    match parse_list("kappa", value)?.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(CliError::Usage(format!(
            "kappa needs two values R1,R2, got `{value}`"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in SuiteName::ALL {
            assert_eq!(s.as_str().parse::<SuiteName>().unwrap(), s);
        }
        assert!("darboux2".parse::<SuiteName>().is_err());
    }

    #[test]
    fn key_values_with_comments() {
        let kv = parse_key_values("# run\nsuite = g-of-t\n\n mu=2 # inline\nt = 1, 2.5\n").unwrap();
        assert_eq!(kv.len(), 3);
        assert_eq!(kv[1], ("mu".to_string(), "2".to_string()));
        assert!(parse_key_values("mu 2").is_err());
        let mut c = SuiteConfig::new(SuiteName::GOfT);
        for (k, v) in &kv {
            c.set(k, v).unwrap();
        }
        assert_eq!(c.t, vec![1.0, 2.5]);
        assert_eq!(c.mu, Some(2.0));
    }

    #[test]
    fn validation() {
        let mut c = SuiteConfig::new(SuiteName::Darboux);
        assert!(c.validate().is_ok());
        c.mu = Some(1.0);
        assert!(c.validate().is_err());
        c.mu = Some(2.0);
        c.kappa = Some((2.0, 1.0));
        assert!(c.validate().is_err());
        c.kappa = Some((1.0, 2.0));
        c.samples = Some(0);
        assert!(c.validate().is_err());
        c.samples = Some(3);
        c.trace = Some("t.csv".into());
        assert!(c.validate().is_err());
        assert!(c.set("colour", "red").is_err());
        assert!(c.set("n", "two").is_err());
        assert!(parse_kappa("1,2,3").is_err());
    }
}
