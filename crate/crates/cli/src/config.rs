//! JSON experiment configuration: schema, validation and geometry
//! construction.

use anyhow::{bail, Context};
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use lismodes::geometry::{rotation_x, rotation_y, transform, Surface, Wave};
use lismodes::modes::{CountRule, SvdMethod};

pub const SCHEMA_VERSION: u32 = 1;

fn default_mesh_lambda_frac() -> f64 {
    0.25
}
fn default_aspect() -> f64 {
    1.0
}
fn default_quad_tol() -> f64 {
    1e-4
}
fn default_noise() -> f64 {
    1.0
}
fn default_total_power() -> f64 {
    1.0
}
fn default_k_max() -> usize {
    64
}

/// An oriented rectangle: center, two Euler-style rotations about the fixed
/// x and y axes (applied in that order to the canonical xy-plane rectangle),
/// and side lengths in meters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSpec {
    pub center: [f64; 3],
    #[serde(default)]
    pub rot_x_deg: f64,
    #[serde(default)]
    pub rot_y_deg: f64,
    pub len_u: f64,
    pub len_v: f64,
}

impl SurfaceSpec {
    pub fn build(&self) -> anyhow::Result<Surface> {
        let base = Surface::xy_rectangle(Vector3::zeros(), self.len_u, self.len_v)
            .map_err(|e| anyhow::anyhow!("surface spec: {e}"))?;
        let rot = rotation_y(self.rot_y_deg.to_radians()) * rotation_x(self.rot_x_deg.to_radians());
        let center = Vector3::new(self.center[0], self.center[1], self.center[2]);
        transform(&base, &rot, &center).map_err(|e| anyhow::anyhow!("surface spec: {e}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Parallel,
    Perpendicular,
}

/// Receive-side sweep: surfaces of area `a_r` with the given aspect ratio
/// (len_v = aspect * len_u), placed along the transmit normal.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RxSweep {
    pub a_r: f64,
    #[serde(default = "default_aspect")]
    pub aspect: f64,
    pub orientation: Orientation,
}

/// A list of values or a linear/log range.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RangeSpec {
    Values(Vec<f64>),
    Range {
        start: f64,
        stop: f64,
        points: usize,
        #[serde(default)]
        log: bool,
    },
}

impl RangeSpec {
    pub fn expand(&self) -> anyhow::Result<Vec<f64>> {
        match self {
            RangeSpec::Values(v) => {
                if v.is_empty() {
                    bail!("sweep value list is empty");
                }
                Ok(v.clone())
            }
            RangeSpec::Range {
                start,
                stop,
                points,
                log,
            } => {
                if *points == 0 {
                    bail!("sweep range has zero points");
                }
                if !(*start > 0.0 && *stop > 0.0) && *log {
                    bail!("log range endpoints must be positive");
                }
                if *points == 1 {
                    return Ok(vec![*start]);
                }
                let n = *points as f64 - 1.0;
                Ok((0..*points)
                    .map(|i| {
                        let t = i as f64 / n;
                        if *log {
                            (start.ln() + t * (stop.ln() - start.ln())).exp()
                        } else {
                            start + t * (stop - start)
                        }
                    })
                    .collect())
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "rule")]
pub enum CountingRuleSpec {
    Knee,
    Relative { threshold_db: f64 },
}

impl CountingRuleSpec {
    pub fn to_rule(&self) -> CountRule {
        match self {
            CountingRuleSpec::Knee => CountRule::Knee,
            CountingRuleSpec::Relative { threshold_db } => CountRule::Relative(*threshold_db),
        }
    }
}

impl Default for CountingRuleSpec {
    fn default() -> Self {
        CountingRuleSpec::Knee
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SvdSpec {
    #[serde(default = "SvdSpec::default_method")]
    pub method: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
}

impl SvdSpec {
    fn default_method() -> String {
        "randomized".into()
    }

    pub fn to_method(&self) -> anyhow::Result<SvdMethod> {
        match self.method.as_str() {
            "exact" => Ok(SvdMethod::Exact),
            "randomized" => Ok(SvdMethod::Randomized),
            other => bail!("unknown SVD method `{other}` (expected `exact` or `randomized`)"),
        }
    }
}

impl Default for SvdSpec {
    fn default() -> Self {
        SvdSpec {
            method: Self::default_method(),
            seed: 0,
            k_max: default_k_max(),
        }
    }
}

/// Top-level experiment configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub frequency_hz: f64,
    pub tx: SurfaceSpec,
    /// Explicit receive surface (single-point runs).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rx: Option<SurfaceSpec>,
    /// Receive-side sweep specification; requires `distances` or `d2_over_ar`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rx_sweep: Option<RxSweep>,
    /// Center distances in meters.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distances: Option<RangeSpec>,
    /// Distances given as the ratio d^2 / A_R.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d2_over_ar: Option<RangeSpec>,
    #[serde(default = "default_mesh_lambda_frac")]
    pub mesh_lambda_frac: f64,
    #[serde(default)]
    pub counting_rule: CountingRuleSpec,
    #[serde(default)]
    pub svd: SvdSpec,
    #[serde(default = "default_quad_tol")]
    pub quad_tol: f64,
    #[serde(default = "default_noise")]
    pub noise: f64,
    #[serde(default = "default_total_power")]
    pub total_power: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).context("failed to parse experiment config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            bail!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            );
        }
        if !(self.frequency_hz > 0.0) {
            bail!("frequency_hz must be positive");
        }
        if !(self.mesh_lambda_frac > 0.0 && self.mesh_lambda_frac <= 1.0) {
            bail!("mesh_lambda_frac must lie in (0, 1]");
        }
        if !(self.quad_tol > 0.0 && self.quad_tol <= 1e-2) {
            bail!("quad_tol must lie in (0, 1e-2]");
        }
        if !(self.noise > 0.0) || !(self.total_power > 0.0) {
            bail!("noise and total_power must be positive");
        }
        if self.svd.k_max < 1 {
            bail!("svd.k_max must be at least 1");
        }
        self.svd.to_method()?;
        self.tx.build()?;
        match (&self.rx, &self.rx_sweep) {
            (Some(rx), None) => {
                rx.build()?;
            }
            (None, Some(sweep)) => {
                if !(sweep.a_r > 0.0) {
                    bail!("rx_sweep.a_r must be positive");
                }
                if !(sweep.aspect > 0.0) {
                    bail!("rx_sweep.aspect must be positive");
                }
                let n_dist = match (&self.distances, &self.d2_over_ar) {
                    (Some(d), None) => d.expand()?.len(),
                    (None, Some(r)) => r.expand()?.len(),
                    (None, None) => bail!("rx_sweep requires `distances` or `d2_over_ar`"),
                    (Some(_), Some(_)) => bail!("give `distances` or `d2_over_ar`, not both"),
                };
                if n_dist == 0 {
                    bail!("distance sweep is empty");
                }
            }
            (Some(_), Some(_)) => bail!("give `rx` or `rx_sweep`, not one of each"),
            (None, None) => bail!("config needs an `rx` surface or an `rx_sweep`"),
        }
        Ok(())
    }

    pub fn wave(&self) -> anyhow::Result<Wave> {
        Wave::from_frequency(self.frequency_hz).map_err(|e| anyhow::anyhow!("{e}"))
    }
}
