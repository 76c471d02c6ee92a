use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cutoff::CutoffSpec;
use crate::error::{Error, Result};
use crate::field::SuiteFunction;
use crate::norm::Exponent;

use super::checks;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    /// `[0,1]` with `ϖ_{0,γ}`; suite functions are read along the ray `ξ = e_1`.
    Interval,
    Surface,
    Cone,
}

impl Domain {
    fn supports(&self, d: usize) -> bool {
        match self {
            Domain::Interval => d == 1,
            Domain::Surface | Domain::Cone => (2..=3).contains(&d),
        }
    }
}

/// One experiment, read from a flat JSON object. Missing keys take the
/// default surface configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub domain: Domain,
    pub d: usize,
    pub gamma: f64,
    pub p: Exponent,
    pub r: usize,
    pub degrees: Vec<usize>,
    pub functions: Vec<String>,
    pub cutoff: CutoffSpec,
    #[serde(alias = "seeds")]
    pub seed: u64,
    /// Overrides keyed by check name, or `check.assertion`.
    pub tolerances: BTreeMap<String, f64>,
    /// Checks run by `verify`; empty selects all.
    pub checks: Vec<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            domain: Domain::Surface,
            d: 2,
            gamma: 0.0,
            p: Exponent::TWO,
            r: 1,
            degrees: vec![4, 8, 16, 32, 64],
            functions: SuiteFunction::ALL.iter().map(|f| f.name().to_string()).collect(),
            cutoff: CutoffSpec::ExponentialBump,
            seed: 0,
            tolerances: BTreeMap::new(),
            checks: Vec::new(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| Error::Usage(format!("config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Every violated constraint, one `field: problem` entry each.
    pub fn diagnostics(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.domain.supports(self.d) {
            let want = match self.domain {
                Domain::Interval => "1",
                _ => "2 or 3",
            };
            out.push(format!("d: {} is not supported on {:?}, expected {want}", self.d, self.domain));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            out.push(format!("gamma: must be finite and >= 0, got {}", self.gamma));
        }
        if !(1..=2).contains(&self.r) {
            out.push(format!("r: must be 1 or 2, got {}", self.r));
        }
        if self.degrees.is_empty() {
            out.push("degrees: must not be empty".into());
        }
        if self.degrees.windows(2).any(|w| w[0] >= w[1]) {
            out.push(format!("degrees: must be strictly ascending, got {:?}", self.degrees));
        }
        if self.degrees.iter().any(|&n| n == 0 || n > 128) {
            out.push(format!("degrees: each must lie in 1..=128, got {:?}", self.degrees));
        }
        if self.functions.is_empty() {
            out.push("functions: must not be empty".into());
        }
        for (i, name) in self.functions.iter().enumerate() {
            if SuiteFunction::from_name(name).is_err() {
                out.push(format!("functions[{i}]: unknown test function {name:?}"));
            }
        }
        for (i, name) in self.checks.iter().enumerate() {
            if checks::find(name).is_none() {
                out.push(format!("checks[{i}]: unknown check {name:?}"));
            }
        }
        for (key, tol) in &self.tolerances {
            let check = key.split('.').next().unwrap_or(key);
            if checks::find(check).is_none() {
                out.push(format!("tolerances.{key}: unknown check {check:?}"));
            }
            if !(*tol >= 0.0) {
                out.push(format!("tolerances.{key}: must be >= 0, got {tol}"));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let problems = self.diagnostics();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Usage(format!("invalid config: {}", problems.join("; "))))
        }
    }

    pub fn suite(&self) -> Vec<SuiteFunction> {
        self.functions.iter().filter_map(|n| SuiteFunction::from_name(n).ok()).collect()
    }

    /// The override for `check.label`, else for `check`, else `default`.
    pub fn tolerance(&self, check: &str, label: &str, default: f64) -> f64 {
        self.tolerances
            .get(&format!("{check}.{label}"))
            .or_else(|| self.tolerances.get(check))
            .copied()
            .unwrap_or(default)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid_and_round_trip() {
        let c = ExperimentConfig::default();
        c.validate().unwrap();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), c);
        assert_eq!(ExperimentConfig::from_json("{}").unwrap(), c);
    }

    #[test]
    fn rejects_unknown_keys() {
        let e = ExperimentConfig::from_json(r#"{"gama": 1}"#).unwrap_err();
        assert!(matches!(&e, Error::Usage(m) if m.contains("gama")), "{e}");
    }

    #[test]
    fn diagnostics_name_fields() {
        let e = ExperimentConfig::from_json(
            r#"{"domain": "cone", "d": 4, "gamma": -1, "degrees": [8, 4], "functions": ["smooth", "wiggly"]}"#,
        )
        .unwrap_err();
        let Error::Usage(msg) = e else { panic!("{e:?}") };
        for field in ["d:", "gamma:", "degrees:", "functions[1]:"] {
            assert!(msg.contains(field), "{msg}");
        }
    }

    #[test]
    fn seeds_alias_and_exponent_forms() {
        let c = ExperimentConfig::from_json(r#"{"seeds": 7, "p": "inf", "domain": "interval", "d": 1}"#).unwrap();
        assert_eq!(c.seed, 7);
        assert!(c.p.is_infinite());
    }

    #[test]
    fn tolerance_lookup_order() {
        let c =
            ExperimentConfig::from_json(r#"{"tolerances": {"kernel_backends": 0.5, "kernel_backends.gamma_1": 0.25}}"#)
                .unwrap();
        assert_eq!(c.tolerance("kernel_backends", "gamma_1", 1.0), 0.25);
        assert_eq!(c.tolerance("kernel_backends", "gamma_0", 1.0), 0.5);
        assert_eq!(c.tolerance("direct_theorem", "growth", 1.0), 1.0);
        assert!(ExperimentConfig::from_json(r#"{"tolerances": {"nope": 1}}"#).is_err());
    }
}
