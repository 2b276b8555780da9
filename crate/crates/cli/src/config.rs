//! TOML experiment configuration.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub sampler: SamplerSection,
    pub run: RunSection,
    /// Present in emitted manifests; ignored on input.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<ManifestInfo>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    Bernoulli4d,
    Ising {
        #[serde(default = "default_side")]
        side: usize,
        #[serde(default = "default_ising_a")]
        a: f64,
        #[serde(default = "default_ising_b")]
        b: f64,
    },
    Tsp {
        /// TSPLIB file; the bundled 14-city instance when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        path: Option<PathBuf>,
    },
    Mlp {
        /// CSV with a header row, last column the target. When absent a
        /// synthetic teacher-network dataset is generated.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        csv: Option<PathBuf>,
        #[serde(default = "default_hidden")]
        hidden: usize,
        #[serde(default = "default_alphabet")]
        alphabet: Vec<f64>,
        #[serde(default = "default_rows")]
        rows: usize,
        #[serde(default = "default_inputs")]
        inputs: usize,
        #[serde(default = "default_noise_sd")]
        noise_sd: f64,
        #[serde(default)]
        data_seed: u64,
    },
}

fn default_side() -> usize {
    3
}
fn default_ising_a() -> f64 {
    0.5
}
fn default_ising_b() -> f64 {
    0.1
}
fn default_hidden() -> usize {
    10
}
fn default_alphabet() -> Vec<f64> {
    vec![-1.0, 1.0]
}
fn default_rows() -> usize {
    64
}
fn default_inputs() -> usize {
    4
}
fn default_noise_sd() -> f64 {
    0.1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerName {
    Hiss,
    Dmala,
    Gwg,
    PtDmala,
    HissGk,
    HissNomh,
}

impl SamplerName {
    pub const ALL: [SamplerName; 6] = [
        SamplerName::Hiss,
        SamplerName::Dmala,
        SamplerName::Gwg,
        SamplerName::PtDmala,
        SamplerName::HissGk,
        SamplerName::HissNomh,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SamplerName::Hiss => "hiss",
            SamplerName::Dmala => "dmala",
            SamplerName::Gwg => "gwg",
            SamplerName::PtDmala => "pt_dmala",
            SamplerName::HissGk => "hiss_gk",
            SamplerName::HissNomh => "hiss_nomh",
        }
    }

    pub fn is_hiss(self) -> bool {
        matches!(self, SamplerName::Hiss | SamplerName::HissGk | SamplerName::HissNomh)
    }
}

impl fmt::Display for SamplerName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerSection {
    pub name: SamplerName,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default = "default_g")]
    pub sweeps_g: usize,
    #[serde(default = "default_l")]
    pub refinements_l: usize,
    /// Step budget per emitted sample for single-step samplers; `G * L`
    /// (or `G` when `L = 0`) when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps_per_sample: Option<usize>,
    /// Noise variance of the Gaussian kernel variant.
    #[serde(default = "default_sigma2")]
    pub gk_sigma2: f64,
    #[serde(default = "default_temps")]
    pub num_temps: usize,
    #[serde(default = "default_min_beta")]
    pub min_beta: f64,
    #[serde(default = "default_swap_interval")]
    pub swap_interval: usize,
}

fn default_alpha() -> f64 {
    0.2
}
fn default_eta() -> f64 {
    4.0
}
fn default_g() -> usize {
    5
}
fn default_l() -> usize {
    2
}
fn default_sigma2() -> f64 {
    0.9
}
fn default_temps() -> usize {
    5
}
fn default_min_beta() -> f64 {
    0.1
}
fn default_swap_interval() -> usize {
    4
}

impl SamplerSection {
    pub fn new(name: SamplerName) -> Self {
        Self {
            name,
            alpha: default_alpha(),
            eta: default_eta(),
            sweeps_g: default_g(),
            refinements_l: default_l(),
            steps_per_sample: None,
            gk_sigma2: default_sigma2(),
            num_temps: default_temps(),
            min_beta: default_min_beta(),
            swap_interval: default_swap_interval(),
        }
    }

    pub fn resolved_steps(&self) -> usize {
        self.steps_per_sample
            .unwrap_or(self.sweeps_g * self.refinements_l.max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Tvd,
    LogMae,
    Coverage,
    MwgAcceptance,
    AcceptanceRate,
    Energy,
    Cost,
    BestCost,
    Mse,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Tvd => "tvd",
            Metric::LogMae => "log_mae",
            Metric::Coverage => "coverage",
            Metric::MwgAcceptance => "mwg_acceptance",
            Metric::AcceptanceRate => "acceptance_rate",
            Metric::Energy => "energy",
            Metric::Cost => "cost",
            Metric::BestCost => "best_cost",
            Metric::Mse => "mse",
        }
    }

    pub fn needs_enumeration(self) -> bool {
        matches!(self, Metric::Tvd | Metric::LogMae | Metric::Coverage)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub chains: usize,
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; 0 lets the pool decide.
    #[serde(default)]
    pub workers: usize,
    /// Defaults depend on the model when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<Vec<Metric>>,
    #[serde(default = "default_metric_every")]
    pub metric_every: usize,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    /// Writes real elapsed seconds into the metric CSV; off keeps it
    /// byte-reproducible.
    #[serde(default)]
    pub record_wall_time: bool,
    /// Emitted samples per chain (from the end) pooled for tour diversity.
    #[serde(default = "default_diversity_tail")]
    pub diversity_tail: usize,
}

fn default_metric_every() -> usize {
    10
}
fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_diversity_tail() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestInfo {
    pub version: String,
    pub git: String,
    pub nfe_measured: u64,
    pub nfe_predicted: u64,
}

impl ModelConfig {
    pub fn is_enumerable(&self) -> bool {
        match self {
            ModelConfig::Bernoulli4d => true,
            ModelConfig::Ising { side, .. } => side * side <= 24,
            ModelConfig::Tsp { .. } | ModelConfig::Mlp { .. } => false,
        }
    }

    pub fn default_metrics(&self) -> Vec<Metric> {
        match self {
            ModelConfig::Bernoulli4d | ModelConfig::Ising { .. } => vec![
                Metric::Tvd,
                Metric::LogMae,
                Metric::Coverage,
                Metric::MwgAcceptance,
                Metric::AcceptanceRate,
            ],
            ModelConfig::Tsp { .. } => vec![Metric::Cost, Metric::BestCost, Metric::MwgAcceptance],
            ModelConfig::Mlp { .. } => vec![Metric::Mse, Metric::Energy, Metric::MwgAcceptance],
        }
    }

    /// Makes relative data paths absolute against `base`.
    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(path) = p {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        };
        match self {
            ModelConfig::Tsp { path } => fix(path),
            ModelConfig::Mlp { csv, .. } => fix(csv),
            _ => {}
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses a file; relative data paths are taken from the file's
    /// directory and the output directory from the working directory.
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml_str(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.model.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn metrics(&self) -> Vec<Metric> {
        self.run
            .metrics
            .clone()
            .unwrap_or_else(|| self.model.default_metrics())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.run.chains == 0 {
            return bad("run.chains must be at least 1".into());
        }
        if self.run.samples == 0 {
            return bad("run.samples must be at least 1".into());
        }
        if self.run.metric_every == 0 {
            return bad("run.metric_every must be at least 1".into());
        }
        let s = &self.sampler;
        if !(s.alpha > 0.0 && s.alpha.is_finite()) {
            return bad(format!("sampler.alpha must be positive, got {}", s.alpha));
        }
        if !(s.eta > 0.0 && s.eta.is_finite()) {
            return bad(format!("sampler.eta must be positive, got {}", s.eta));
        }
        if s.sweeps_g == 0 {
            return bad("sampler.sweeps_g must be at least 1".into());
        }
        if s.steps_per_sample == Some(0) {
            return bad("sampler.steps_per_sample must be at least 1".into());
        }
        if s.name == SamplerName::PtDmala {
            if s.num_temps < 2 {
                return bad(format!("sampler.num_temps must be at least 2, got {}", s.num_temps));
            }
            if !(s.min_beta > 0.0 && s.min_beta < 1.0) {
                return bad(format!("sampler.min_beta must lie in (0, 1), got {}", s.min_beta));
            }
            if s.swap_interval == 0 {
                return bad("sampler.swap_interval must be at least 1".into());
            }
        }
        if s.name == SamplerName::Gwg && matches!(self.model, ModelConfig::Tsp { .. }) {
            // A single-coordinate change never maps a tour to a tour.
            return bad("sampler gwg cannot move on tour states; use hiss, dmala or pt_dmala".into());
        }
        if s.name == SamplerName::HissGk && !(s.gk_sigma2 > 0.0 && s.gk_sigma2 < 1.0) {
            return bad(format!("sampler.gk_sigma2 must lie in (0, 1), got {}", s.gk_sigma2));
        }
        for m in self.metrics() {
            let ok = match m {
                Metric::Tvd | Metric::LogMae | Metric::Coverage => self.model.is_enumerable(),
                Metric::Cost | Metric::BestCost => matches!(self.model, ModelConfig::Tsp { .. }),
                Metric::Mse => matches!(self.model, ModelConfig::Mlp { .. }),
                _ => true,
            };
            if !ok {
                return bad(format!("metric `{}` does not apply to this model", m.as_str()));
            }
        }
        match &self.model {
            ModelConfig::Tsp { path: Some(p) } | ModelConfig::Mlp { csv: Some(p), .. } if !p.exists() => {
                bad(format!("data file {} does not exist", p.display()))
            }
            ModelConfig::Ising { side: 0, .. } => bad("model.side must be at least 1".into()),
            ModelConfig::Mlp { hidden: 0, .. } => bad("model.hidden must be at least 1".into()),
            _ => Ok(()),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
[model]
kind = "bernoulli4d"

[sampler]
name = "hiss"

[run]
chains = 2
samples = 10
"#;

    #[test]
    fn defaults_fill_in() {
        let cfg = ExperimentConfig::from_toml_str(BASIC).unwrap();
        assert_eq!(cfg.sampler.sweeps_g, 5);
        assert_eq!(cfg.sampler.resolved_steps(), 10);
        assert_eq!(cfg.metrics()[0], Metric::Tvd);
    }

    #[test]
    fn unknown_sampler_lists_names() {
        let text = BASIC.replace("\"hiss\"", "\"metropolis\"");
        let err = ExperimentConfig::from_toml_str(&text).unwrap_err().to_string();
        for name in SamplerName::ALL {
            assert!(err.contains(name.as_str()), "{err}");
        }
        assert!(err.contains("line"), "{err}");
    }

    #[test]
    fn unknown_fields_rejected() {
        let text = BASIC.replace("chains = 2", "chains = 2\nchainz = 3");
        assert!(ExperimentConfig::from_toml_str(&text).is_err());
        let text = BASIC.replace("kind = \"bernoulli4d\"", "kind = \"ising\"\nsides = 3");
        assert!(ExperimentConfig::from_toml_str(&text).is_err());
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(ExperimentConfig::from_toml_str(&BASIC.replace("chains = 2", "chains = 0")).is_err());
        let text = BASIC.replace("name = \"hiss\"", "name = \"hiss\"\nalpha = -1.0");
        assert!(ExperimentConfig::from_toml_str(&text).is_err());
        let text = BASIC.replace("samples = 10", "samples = 10\nmetrics = [\"cost\"]");
        assert!(ExperimentConfig::from_toml_str(&text).is_err());
    }

    #[test]
    fn round_trip() {
        let cfg = ExperimentConfig::from_toml_str(BASIC).unwrap();
        let again = ExperimentConfig::from_toml_str(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, again);
    }
}
