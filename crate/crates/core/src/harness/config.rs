//! Experiment configuration: a TOML schema covering every knob of a
//! convergence run. The dialect is TOML 1.0; unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dist::{AxisLaw, BoxSumSpec};
use crate::error::{Error, Result};
use crate::estimators::EstimatorKind;
use crate::groups::GroupAction;

/// Named estimator pipelines available to the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorName {
    Empirical,
    Invariant,
    TruncatedInvariant,
    HeatSmoothed,
    Augmented,
}

impl EstimatorName {
    pub fn label(self) -> &'static str {
        match self {
            EstimatorName::Empirical => "empirical",
            EstimatorName::Invariant => "invariant",
            EstimatorName::TruncatedInvariant => "truncated_invariant",
            EstimatorName::HeatSmoothed => "heat_smoothed",
            EstimatorName::Augmented => "augmented",
        }
    }

    pub fn kind(self) -> EstimatorKind {
        match self {
            EstimatorName::Empirical => EstimatorKind::Empirical,
            EstimatorName::Invariant => EstimatorKind::Invariant,
            EstimatorName::TruncatedInvariant => EstimatorKind::TruncatedInvariant,
            EstimatorName::HeatSmoothed => EstimatorKind::HeatSmoothed,
            EstimatorName::Augmented => EstimatorKind::Augmented,
        }
    }

    /// Stable id mixed into trial seeds; independent of config order.
    pub fn seed_id(self) -> u64 {
        match self {
            EstimatorName::Empirical => 1,
            EstimatorName::Invariant => 2,
            EstimatorName::TruncatedInvariant => 3,
            EstimatorName::HeatSmoothed => 4,
            EstimatorName::Augmented => 5,
        }
    }
}

/// Distribution: a named preset or an explicit per-axis product law.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionSpec {
    Preset { name: String },
    BoxSum { axes: Vec<AxisLaw> },
}

impl DistributionSpec {
    pub fn resolve(&self) -> Result<BoxSumSpec> {
        let spec = match self {
            DistributionSpec::BoxSum { axes } => BoxSumSpec { axes: axes.clone() },
            DistributionSpec::Preset { name } => match name.as_str() {
                // T⁶ product of wrapped sums of 3 uniforms on [0, 1/3].
                "fig1-noninv" => BoxSumSpec::isotropic(6, 3, 1.0 / 3.0),
                // T⁶: wrapped sums of 4 uniforms on [0, 1/4] on the first
                // four coordinates, uniform on the last two (invariant under
                // continuous shifts of coordinates 4 and 5).
                "fig1-inv" => BoxSumSpec::isotropic(6, 4, 0.25).with_uniform_tail(&[4, 5]),
                other => {
                    return Err(Error::Config(format!(
                        "unknown distribution preset '{other}' (known: fig1-noninv, fig1-inv)"
                    )))
                }
            },
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Divergence evaluated against the sampling distribution's oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricSpec {
    Sobolev { alpha: f64 },
    Mmd { beta: f64 },
    L2,
    Linf { grid_per_axis: usize },
    W1Upper,
}

impl MetricSpec {
    pub fn label(&self) -> String {
        match self {
            MetricSpec::Sobolev { alpha } => format!("sobolev(alpha={alpha})"),
            MetricSpec::Mmd { beta } => format!("mmd(beta={beta})"),
            MetricSpec::L2 => "l2".into(),
            MetricSpec::Linf { grid_per_axis } => format!("linf(grid={grid_per_axis})"),
            MetricSpec::W1Upper => "w1_upper".into(),
        }
    }
}

/// Spectrum slice the estimators live on: `λ_max = 4π²·sq_max`. With
/// `invariant_only`, only frequencies invariant under the group are
/// enumerated (diagonal actions only) — essential for high-dimensional
/// invariant sweeps.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliceSpec {
    pub sq_max: i64,
    #[serde(default)]
    pub invariant_only: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffMode {
    /// Balance bias and variance via the plug-in rule-of-thumb cutoff.
    #[default]
    RuleOfThumb,
    /// Use `lambda_t` verbatim for every n.
    Fixed,
}

/// Truncation / smoothing policy for the regularized estimators.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutoffSpec {
    #[serde(default)]
    pub mode: CutoffMode,
    /// Fixed truncation eigenvalue (required when `mode = "fixed"`).
    pub lambda_t: Option<f64>,
    /// Smoothness plugged into the rule of thumb; measured from the
    /// coefficient oracle's tail decay when absent.
    pub s: Option<f64>,
    /// Fixed heat-smoothing bandwidth; the volume-based rule when absent.
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_out_dir")]
    pub dir: PathBuf,
    /// CSV file name (under `dir`); `<name>.csv` when absent.
    pub csv: Option<String>,
    /// SVG file name (under `dir`); no plot emitted when absent.
    pub svg: Option<String>,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            dir: default_out_dir(),
            csv: None,
            svg: None,
        }
    }
}

fn default_rel_tol() -> f64 {
    1e-6
}

fn default_oracle_budget() -> u64 {
    20_000_000
}

fn default_element_budget() -> u64 {
    crate::spectrum::DEFAULT_ELEMENT_BUDGET
}

/// Full description of a convergence experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub master_seed: u64,
    pub repetitions: usize,
    /// Strictly increasing sample sizes.
    pub n_grid: Vec<usize>,
    /// Number of leading n-grid points excluded from the slope fit.
    #[serde(default)]
    pub burn_in: usize,
    pub estimators: Vec<EstimatorName>,
    pub distribution: DistributionSpec,
    pub group: GroupAction,
    pub metric: MetricSpec,
    pub slice: SliceSpec,
    #[serde(default)]
    pub cutoff: CutoffSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default = "default_rel_tol")]
    pub oracle_rel_tol: f64,
    #[serde(default = "default_oracle_budget")]
    pub oracle_budget: u64,
    #[serde(default = "default_element_budget")]
    pub element_budget: u64,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("config parse error: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() || self.n_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("n_grid must be strictly increasing".into()));
        }
        if self.n_grid[0] == 0 {
            return Err(Error::Config("sample sizes must be ≥ 1".into()));
        }
        if self.repetitions < 3 {
            return Err(Error::Config("repetitions must be ≥ 3".into()));
        }
        if self.estimators.is_empty() {
            return Err(Error::Config("at least one estimator required".into()));
        }
        if self.slice.sq_max < 0 {
            return Err(Error::Config("slice.sq_max must be ≥ 0".into()));
        }
        self.group
            .validate()
            .map_err(|e| Error::Config(format!("group: {e}")))?;
        let dist = self
            .distribution
            .resolve()
            .map_err(|e| Error::Config(format!("distribution: {e}")))?;
        if dist.dim() != self.group.ambient_dim() {
            return Err(Error::Config(format!(
                "distribution dimension {} != group ambient dimension {}",
                dist.dim(),
                self.group.ambient_dim()
            )));
        }
        if self.slice.invariant_only {
            self.group
                .invariant_steps()
                .map_err(|_| Error::Config("invariant_only slices need a diagonal action".into()))?;
        }
        if self.estimators.contains(&EstimatorName::HeatSmoothed)
            && self.cutoff.sigma.is_none()
            && self.group.quotient_dim() < 3
        {
            return Err(Error::Config(
                "heat_smoothed with the volume rule requires quotient dimension ≥ 3".into(),
            ));
        }
        if self.cutoff.mode == CutoffMode::Fixed
            && self.estimators.contains(&EstimatorName::TruncatedInvariant)
            && self.cutoff.lambda_t.is_none()
        {
            return Err(Error::Config("cutoff.mode = \"fixed\" requires lambda_t".into()));
        }
        if let MetricSpec::Sobolev { alpha } = self.metric {
            if alpha < 0.0 {
                return Err(Error::Config("metric alpha must be ≥ 0".into()));
            }
        }
        if let MetricSpec::Mmd { beta } = self.metric {
            if beta <= 0.0 {
                return Err(Error::Config("metric beta must be > 0".into()));
            }
        }
        Ok(())
    }

    /// Output directory after the `TORUS_SPECTRAL_OUT_DIR` override.
    pub fn effective_out_dir(&self) -> PathBuf {
        match std::env::var_os("TORUS_SPECTRAL_OUT_DIR") {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.output.dir.clone(),
        }
    }
}
