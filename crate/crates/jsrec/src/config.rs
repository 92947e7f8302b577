//! JSON experiment descriptions.

use std::path::PathBuf;

use jsrec_core::recover::PipelineSettings;
use jsrec_core::SolverSettings;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Basis pursuit recovery rate against sparsity (r = 1).
    SmvSweep,
    /// ℓ1,1 against ℓ1,2 recovery rates.
    L11VsL12,
    /// Boosted ℓ1 and ℓ1,1 on a fixed support, with model curves.
    Boosted,
    /// ReMBo-ℓ1 on a fixed support, with its model curve.
    Rembo,
    /// ℓ1,2 and ℓ1,1 over barycentric weights of three vectors.
    Triangles,
    /// Unique sign patterns of `X̄w` against the number of draws.
    PatternSampling,
    /// The table of `C(n, d)`.
    CndTable,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::SmvSweep => "smv_sweep",
            Self::L11VsL12 => "l11_vs_l12",
            Self::Boosted => "boosted",
            Self::Rembo => "rembo",
            Self::Triangles => "triangles",
            Self::PatternSampling => "pattern_sampling",
            Self::CndTable => "cnd_table",
        }
    }
}

/// Optional overrides of the solver defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feas_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recovery_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub res_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support_threshold: Option<usize>,
}

impl Tolerances {
    pub fn solver(&self) -> SolverSettings {
        let d = SolverSettings::default();
        SolverSettings {
            feas_tol: self.feas_tol.unwrap_or(d.feas_tol),
            gap_tol: self.gap_tol.unwrap_or(d.gap_tol),
            max_iter: self.max_iter.unwrap_or(d.max_iter),
            recovery_tol: self.recovery_tol.unwrap_or(d.recovery_tol),
        }
    }

    pub fn pipeline(&self) -> PipelineSettings {
        let d = PipelineSettings::default();
        PipelineSettings {
            solver: self.solver(),
            res_tol: self.res_tol.unwrap_or(d.res_tol),
            threshold_override: self.support_threshold,
            keep_weights: false,
        }
    }
}

fn default_true() -> bool {
    true
}

fn default_max_iterations() -> usize {
    1
}

fn default_grid_density() -> usize {
    10
}

fn default_cnd_max() -> u64 {
    12
}

/// A declarative experiment. Unknown keys are rejected.
///
/// The meaning of `m`, `n`, `r_values` and `s_values` depends on `kind`:
/// `pattern_sampling` samples an `m × r` Gaussian `X̄`, `triangles` uses the
/// first entry of `s_values` as the support size, and `cnd_table` only reads
/// `cnd_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub kind: ExperimentKind,
    #[serde(default)]
    pub m: usize,
    #[serde(default)]
    pub n: usize,
    #[serde(default)]
    pub r_values: Vec<usize>,
    #[serde(default)]
    pub s_values: Vec<usize>,
    pub trials: u64,
    pub seed: u64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Decide boosted, ℓ1,1 and ReMBo trials from a face count of the fixed
    /// support instead of solving every trial.
    #[serde(default = "default_true")]
    pub use_face_cache: bool,
    #[serde(default = "default_grid_density")]
    pub grid_density: usize,
    #[serde(default = "default_cnd_max")]
    pub cnd_max: u64,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// The config with every default filled in; feeding it back reproduces
    /// the run exactly.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config is plain data");
        s.push('\n');
        s
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |msg: String| Err(ConfigError::Invalid(msg));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!("schema_version must be {SCHEMA_VERSION}, got {}", self.schema_version));
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if let Some(r) = self.r_values.iter().find(|&&r| r == 0) {
            return bad(format!("r_values entries must be at least 1, got {r}"));
        }
        if let Some(s) = self.s_values.iter().find(|&&s| s > self.n) {
            return bad(format!("s_values entry {s} exceeds n = {}", self.n));
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be at least 1".into());
        }
        if self.tolerances.solver().validate().is_err() {
            return bad("tolerances must be positive with recovery_tol > feas_tol".into());
        }
        let kind = self.kind.name();
        match self.kind {
            ExperimentKind::CndTable => {
                if self.cnd_max == 0 || self.cnd_max > 64 {
                    return bad("cnd_max must be in 1..=64".into());
                }
                return Ok(());
            }
            ExperimentKind::PatternSampling => {
                if self.m == 0 || self.m > 64 {
                    return bad("pattern_sampling needs 1 <= m <= 64".into());
                }
                if self.r_values.is_empty() {
                    return bad("pattern_sampling needs r_values".into());
                }
                return Ok(());
            }
            _ => {}
        }
        if self.m == 0 || self.n == 0 {
            return bad(format!("{kind} needs m and n"));
        }
        if self.s_values.is_empty() || self.s_values.contains(&0) {
            return bad(format!("{kind} needs nonempty s_values with entries >= 1"));
        }
        let needs_r = !matches!(self.kind, ExperimentKind::SmvSweep | ExperimentKind::Triangles);
        if needs_r && self.r_values.is_empty() {
            return bad(format!("{kind} needs r_values"));
        }
        match self.kind {
            ExperimentKind::Boosted | ExperimentKind::Rembo => {
                if let Some(s) = self.s_values.iter().find(|&&s| s > jsrec_core::analysis::MAX_FACE_SUPPORT) {
                    return bad(format!("{kind} enumerates faces, s = {s} is too large"));
                }
            }
            ExperimentKind::Triangles if self.grid_density < 2 => return bad("grid_density must be at least 2".into()),
            _ => {}
        }
        Ok(())
    }
}
