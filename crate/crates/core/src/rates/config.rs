use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::numerics::NormOrder;
use crate::targets::MixingDensity;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyMode {
    /// `f̂` from a calibrated perturbation of `p`.
    OracleInject,
    /// `f̂` from the sieve fit to simulated draws.
    FullPipeline,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InjectShape {
    Bump,
    RandomPhase,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub spec: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSection {
    pub spec: String,
    pub lo: f64,
    pub hi: f64,
}

fn default_delta() -> f64 {
    0.5
}
fn default_replicates() -> usize {
    10
}
fn default_u() -> NormOrder {
    NormOrder::Infinity
}
fn default_xi() -> f64 {
    0.5
}
fn default_half_band() -> f64 {
    2.0
}
fn default_rho() -> f64 {
    0.5
}
fn default_leg() -> u32 {
    4
}
fn default_dx() -> f64 {
    0.01
}
fn default_pad() -> f64 {
    40.0
}
fn default_shape() -> InjectShape {
    InjectShape::RandomPhase
}
fn default_sieve_nodes() -> usize {
    40
}
fn default_sieve_band() -> f64 {
    2.0
}
fn default_output() -> String {
    "study".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySection {
    pub mode: StudyMode,
    /// `a_n = n^{-delta} (ln n)^{zeta}`.
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub zeta: f64,
    pub n_grid: Vec<u64>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default = "default_u")]
    pub u: NormOrder,
    #[serde(default)]
    pub deriv_order: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_xi")]
    pub xi: f64,
    /// Kernel half-band `M`.
    #[serde(default = "default_half_band")]
    pub half_band: f64,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default = "default_leg")]
    pub leg: u32,
    /// Spatial grid spacing of every grid in the study.
    #[serde(default = "default_dx")]
    pub dx: f64,
    /// Padding around the target support, in bandwidths.
    #[serde(default = "default_pad")]
    pub pad: f64,
    #[serde(default = "default_shape")]
    pub shape: InjectShape,
    #[serde(default = "default_sieve_nodes")]
    pub sieve_nodes: usize,
    #[serde(default = "default_sieve_band")]
    pub sieve_band: f64,
    /// Output directory, relative to the CLI out-dir.
    #[serde(default = "default_output")]
    pub output: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub model: ModelSection,
    pub target: TargetSection,
    pub study: StudySection,
}

impl StudyConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: StudyConfig = toml::from_str(text).map_err(|e| {
            let key = e
                .span()
                .and_then(|s| text.get(s))
                .map(|s| s.split(['=', '\n']).next().unwrap_or(s).trim().to_string())
                .filter(|s| !s.is_empty())
                .unwrap_or_else(|| "config".into());
            Error::config(key, e.message().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("study config serializes")
    }

    pub fn noise(&self) -> Result<NoiseModel> {
        NoiseModel::parse(&self.model.spec, 1, "model.spec")
    }

    pub fn mixing(&self) -> Result<MixingDensity> {
        MixingDensity::parse(&self.target.spec, self.target.lo, self.target.hi, 1, "target.spec")
    }

    /// `n^{-delta} (ln n)^{zeta}`.
    pub fn a_n(&self, n: u64) -> f64 {
        let n = n as f64;
        n.powf(-self.study.delta) * n.ln().powf(self.study.zeta)
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.study;
        if s.n_grid.len() < 3 {
            return Err(Error::config("n_grid", "need at least 3 sample sizes"));
        }
        if s.n_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("n_grid", "must be strictly increasing"));
        }
        if s.n_grid[0] < 2 {
            return Err(Error::config("n_grid", "sample sizes must be at least 2"));
        }
        if s.replicates == 0 {
            return Err(Error::config("replicates", "need at least one replicate"));
        }
        if !(s.delta > 0.0) || !s.delta.is_finite() {
            return Err(Error::config("delta", "must be positive"));
        }
        if !s.zeta.is_finite() {
            return Err(Error::config("zeta", "must be finite"));
        }
        if !(s.dx > 0.0) || !(s.pad >= 0.0) {
            return Err(Error::config("dx", "spacing must be positive and pad nonnegative"));
        }
        if s.output.is_empty() || Path::new(&s.output).is_absolute() || s.output.contains("..") {
            return Err(Error::config("output", "must be a relative path inside the out-dir"));
        }
        self.noise()?;
        self.mixing()?;
        for &n in &s.n_grid {
            let a = self.a_n(n);
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::config("n_grid", format!("a_n = {a} at n = {n} is outside (0, 1)")));
            }
        }
        Ok(())
    }
}
