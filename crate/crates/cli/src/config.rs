//! Scenario configuration: a flat JSON object, every key optional.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use hdfd_core::schedulers::{AccessDistribution, SchedulerName, WeightFunction};

use crate::error::{CliError, Result};

pub const FULL_HORIZON: u64 = 1_000_000;
pub const FULL_REPLICATIONS: usize = 10;
pub const QUICK_HORIZON: u64 = 100_000;
pub const QUICK_REPLICATIONS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioName {
    SamplePath,
    DelaySweep,
    FairnessSigma,
    FairnessNfd,
    FairnessRho,
    WeightTable,
    BoundsCurve,
    Custom,
}

impl ScenarioName {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioName::SamplePath => "sample-path",
            ScenarioName::DelaySweep => "delay-sweep",
            ScenarioName::FairnessSigma => "fairness-sigma",
            ScenarioName::FairnessNfd => "fairness-nfd",
            ScenarioName::FairnessRho => "fairness-rho",
            ScenarioName::WeightTable => "weight-table",
            ScenarioName::BoundsCurve => "bounds-curve",
            ScenarioName::Custom => "custom",
        }
    }

    /// Scenarios whose loads must stay strictly inside the capacity region.
    pub fn requires_stable_load(self) -> bool {
        !matches!(self, ScenarioName::SamplePath | ScenarioName::Custom)
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Evenly spaced grid from `lo` to `hi` inclusive, rounded to 1e-9 so grid
/// points print cleanly.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    (0..points)
        .map(|k| {
            let x = lo + (hi - lo) * k as f64 / (points - 1) as f64;
            (x * 1e9).round() / 1e9
        })
        .collect()
}

/// Config file as written by the user. Absent keys take scenario defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub scenario: Option<ScenarioName>,
    pub n_fd: Option<usize>,
    pub n_hd: Option<usize>,
    pub rho: Option<Vec<f64>>,
    pub sigma: Option<Vec<f64>>,
    pub nfd_grid: Option<Vec<usize>>,
    pub schedulers: Option<Vec<String>>,
    pub weights: Option<Vec<String>>,
    pub alpha: Option<Vec<f64>>,
    pub alpha_th: Option<f64>,
    pub horizon: Option<u64>,
    pub replications: Option<usize>,
    pub seed: Option<u64>,
    pub sample_stride: Option<u64>,
    pub warmup: Option<u64>,
}

/// Fully resolved and validated scenario.
///
/// `alpha` lists the user access probabilities of H-GMS and H-GMS-R; an
/// empty list means uniform `1/(N+1)`. `nfd_grid` holds the FD user counts
/// to sweep with the total user count `n_fd + n_hd` held fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub scenario: ScenarioName,
    pub n_fd: usize,
    pub n_hd: usize,
    pub rho: Vec<f64>,
    pub sigma: Vec<f64>,
    pub nfd_grid: Vec<usize>,
    pub schedulers: Vec<String>,
    pub weights: Vec<String>,
    pub alpha: Vec<f64>,
    pub alpha_th: f64,
    pub horizon: u64,
    pub replications: usize,
    pub seed: u64,
    pub sample_stride: u64,
    pub warmup: u64,
}

fn names(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::InvalidValue(msg.into())
}

impl RawConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        // A JSON summary written by `emit` carries its config under "config".
        let value = match value {
            serde_json::Value::Object(mut m)
                if m.contains_key("build") && m.contains_key("config") =>
            {
                m.remove("config").expect("key checked")
            }
            v => v,
        };
        Ok(serde_json::from_value(value)?)
    }

    /// Fills scenario defaults and validates. `scenario` applies when the
    /// file does not name one; a conflicting name is an error.
    pub fn resolve(self, scenario: Option<ScenarioName>) -> Result<ScenarioSpec> {
        let scenario = match (self.scenario, scenario) {
            (Some(a), Some(b)) if a != b => {
                return Err(invalid(format!(
                    "config scenario '{a}' does not match requested '{b}'"
                )));
            }
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => ScenarioName::Custom,
        };
        let n_fd = self.n_fd.unwrap_or(5);
        let n_hd = self.n_hd.unwrap_or(5);
        let rho_sweep = linspace(0.5, 0.95, 10);
        let rho = self.rho.unwrap_or_else(|| match scenario {
            ScenarioName::SamplePath => vec![0.95],
            ScenarioName::DelaySweep | ScenarioName::BoundsCurve | ScenarioName::FairnessRho => {
                rho_sweep
            }
            ScenarioName::WeightTable => vec![0.8, 0.98],
            ScenarioName::FairnessSigma => vec![0.8, 0.95],
            ScenarioName::FairnessNfd | ScenarioName::Custom => vec![0.8],
        });
        let sigma = self.sigma.unwrap_or_else(|| match scenario {
            ScenarioName::FairnessSigma => linspace(1.0, 2.0, 11),
            _ => vec![1.0],
        });
        let nfd_grid = self.nfd_grid.unwrap_or_else(|| match scenario {
            ScenarioName::FairnessNfd => (1..n_fd + n_hd).collect(),
            _ => vec![n_fd],
        });
        let schedulers = self.schedulers.unwrap_or_else(|| match scenario {
            ScenarioName::SamplePath | ScenarioName::DelaySweep => {
                SchedulerName::ALL.iter().map(|s| s.to_string()).collect()
            }
            ScenarioName::FairnessSigma
            | ScenarioName::FairnessNfd
            | ScenarioName::FairnessRho
            | ScenarioName::WeightTable => names(&["Q-CSMA", "H-GMS", "H-GMS-R", "H-GMS-E"]),
            ScenarioName::BoundsCurve | ScenarioName::Custom => names(&["H-GMS"]),
        });
        let weights = self.weights.unwrap_or_else(|| match scenario {
            ScenarioName::WeightTable => names(&["halflog", "log1p", "linear"]),
            _ => names(&["log1p"]),
        });
        let horizon = self.horizon.unwrap_or(FULL_HORIZON);
        let spec = ScenarioSpec {
            scenario,
            n_fd,
            n_hd,
            rho,
            sigma,
            nfd_grid,
            schedulers,
            weights,
            alpha: self.alpha.unwrap_or_default(),
            alpha_th: self.alpha_th.unwrap_or(0.01),
            horizon,
            replications: self.replications.unwrap_or(match scenario {
                ScenarioName::SamplePath => 1,
                _ => FULL_REPLICATIONS,
            }),
            seed: self.seed.unwrap_or(0),
            sample_stride: self.sample_stride.unwrap_or(1000.min(horizon.max(1))),
            warmup: self.warmup.unwrap_or(0),
        };
        spec.validated()
    }
}

impl ScenarioSpec {
    pub fn n_users(&self) -> usize {
        self.n_fd + self.n_hd
    }

    pub fn scheduler_names(&self) -> Vec<SchedulerName> {
        self.schedulers
            .iter()
            .map(|s| s.parse().expect("validated"))
            .collect()
    }

    pub fn weight_functions(&self) -> Vec<WeightFunction> {
        self.weights
            .iter()
            .map(|s| WeightFunction::from_name(s).expect("validated"))
            .collect()
    }

    pub fn access_distribution(&self) -> AccessDistribution {
        if self.alpha.is_empty() {
            AccessDistribution::uniform(self.n_users()).expect("validated")
        } else {
            AccessDistribution::new(self.alpha.clone()).expect("validated")
        }
    }

    /// Short runs for smoke tests and CI.
    pub fn quick(mut self) -> Self {
        self.horizon = QUICK_HORIZON;
        self.replications = self.replications.min(QUICK_REPLICATIONS);
        self.sample_stride = self.sample_stride.min(self.horizon);
        self.warmup = self.warmup.min(self.horizon / 2);
        self
    }

    /// Checks every field and canonicalizes scheduler and weight names.
    pub fn validated(mut self) -> Result<Self> {
        let n = self.n_users();
        if n == 0 {
            return Err(invalid("n_fd + n_hd must be at least 1"));
        }
        if self.rho.is_empty() || self.sigma.is_empty() || self.nfd_grid.is_empty() {
            return Err(invalid("rho, sigma and nfd_grid must be nonempty"));
        }
        for &r in &self.rho {
            if !(r.is_finite() && r > 0.0) {
                return Err(invalid(format!("rho must be positive, got {r}")));
            }
            if self.scenario.requires_stable_load() && r >= 1.0 {
                return Err(invalid(format!(
                    "rho must lie in (0, 1) for scenario '{}', got {r}",
                    self.scenario
                )));
            }
        }
        if self.scenario == ScenarioName::SamplePath && self.rho.len() != 1 {
            return Err(invalid("sample-path takes exactly one rho"));
        }
        for &s in &self.sigma {
            if !(s.is_finite() && s > 0.0) {
                return Err(invalid(format!("sigma must be positive, got {s}")));
            }
            if self.scenario == ScenarioName::FairnessSigma && !(1.0..=2.0).contains(&s) {
                return Err(invalid(format!("sigma must lie in [1, 2], got {s}")));
            }
        }
        if let Some(&k) = self.nfd_grid.iter().find(|&&k| k > n) {
            return Err(invalid(format!("nfd_grid entry {k} exceeds the {n} users")));
        }
        if self.schedulers.is_empty() {
            return Err(invalid("scheduler list is empty"));
        }
        let mut sched = Vec::with_capacity(self.schedulers.len());
        for s in &self.schedulers {
            let name = SchedulerName::from_str(s).map_err(|e| invalid(e.to_string()))?;
            sched.push(name);
        }
        if self.scenario == ScenarioName::WeightTable
            && !(sched.contains(&SchedulerName::QCsma) && sched.len() > 1)
        {
            return Err(invalid(
                "weight-table needs Q-CSMA and at least one other scheduler",
            ));
        }
        self.schedulers = sched.iter().map(|s| s.to_string()).collect();
        if self.weights.is_empty() {
            return Err(invalid("weight list is empty"));
        }
        let mut weights = Vec::with_capacity(self.weights.len());
        for w in &self.weights {
            let f = WeightFunction::from_name(w)
                .ok_or_else(|| invalid(format!("unknown weight function '{w}'")))?;
            weights.push(f.name().to_string());
        }
        self.weights = weights;
        if !self.alpha.is_empty() {
            if self.alpha.len() != n {
                return Err(invalid(format!(
                    "alpha has {} entries for {n} users",
                    self.alpha.len()
                )));
            }
            AccessDistribution::new(self.alpha.clone()).map_err(|e| invalid(e.to_string()))?;
        }
        if !(self.alpha_th > 0.0 && self.alpha_th < 1.0) {
            return Err(invalid(format!(
                "alpha_th must lie in (0, 1), got {}",
                self.alpha_th
            )));
        }
        if self.horizon == 0 || self.replications == 0 {
            return Err(invalid("horizon and replications must be at least 1"));
        }
        if self.warmup >= self.horizon {
            return Err(invalid("warmup must be shorter than the horizon"));
        }
        if self.sample_stride == 0 || self.sample_stride > self.horizon {
            return Err(invalid("sample_stride must lie in [1, horizon]"));
        }
        Ok(self)
    }
}

/// Reads and resolves a config file (or a JSON summary written by `emit`).
pub fn load_config(path: &Path, scenario: Option<ScenarioName>) -> Result<ScenarioSpec> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    RawConfig::from_json(&text)?.resolve(scenario)
}
