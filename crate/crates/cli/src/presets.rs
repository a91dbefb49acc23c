//! Built-in experiment presets reproducing the reference sweeps.
//!
//! Axis ranges for the mode-count and gain sweeps use d^2/A_R in
//! [1e-2, 1e2] (perpendicular variants start at 0.25 so the edge-on
//! receive surface stays clear of the transmit plane). These ranges are
//! approximate reconstructions of the reference figures.

use anyhow::bail;

use crate::config::{
    CountingRuleSpec, ExperimentConfig, Orientation, RangeSpec, RxSweep, SurfaceSpec, SvdSpec,
};

pub const PRESET_NAMES: &[&str] = &[
    "fig1",
    "fig3-28ghz-parallel-square",
    "fig3-28ghz-parallel-rect41",
    "fig3-28ghz-perpendicular-square",
    "fig3-60ghz-parallel-square",
    "fig4",
];

/// Sweep kind: mode-count/gain sweeps share the standard row format; the
/// Fraunhofer table has its own columns.
pub enum Preset {
    Standard(ExperimentConfig),
    FraunhoferTable {
        frequencies_hz: Vec<f64>,
        sizes_m: Vec<f64>,
    },
}

fn tx_5cm() -> SurfaceSpec {
    SurfaceSpec {
        center: [0.0, 0.0, 0.0],
        rot_x_deg: 0.0,
        rot_y_deg: 0.0,
        len_u: 0.05,
        len_v: 0.05,
    }
}

fn mode_sweep(frequency_hz: f64, aspect: f64, orientation: Orientation) -> ExperimentConfig {
    let start = match orientation {
        Orientation::Parallel => 1e-2,
        Orientation::Perpendicular => 0.25,
    };
    ExperimentConfig {
        schema_version: 1,
        frequency_hz,
        tx: tx_5cm(),
        rx: None,
        rx_sweep: Some(RxSweep {
            a_r: 0.04,
            aspect,
            orientation,
        }),
        distances: None,
        d2_over_ar: Some(RangeSpec::Range {
            start,
            stop: 1e2,
            points: 13,
            log: true,
        }),
        mesh_lambda_frac: 0.5,
        counting_rule: CountingRuleSpec::Knee,
        svd: SvdSpec {
            method: "randomized".into(),
            seed: 0,
            k_max: 96,
        },
        quad_tol: 1e-4,
        noise: 1.0,
        total_power: 1.0,
        out: None,
        workers: None,
    }
}

fn gain_sweep() -> ExperimentConfig {
    let mut cfg = mode_sweep(28e9, 1.0, Orientation::Parallel);
    // Fixed receive area, distance carried by the ratio axis; the gain
    // integral itself is frequency independent.
    cfg.d2_over_ar = Some(RangeSpec::Range {
        start: 1e-2,
        stop: 1e2,
        points: 25,
        log: true,
    });
    cfg
}

pub fn build(name: &str) -> anyhow::Result<Preset> {
    match name {
        "fig1" => Ok(Preset::FraunhoferTable {
            frequencies_hz: {
                // 3 GHz to 300 GHz, 41-point log grid.
                let n = 41;
                (0..n)
                    .map(|i| {
                        let t = i as f64 / (n - 1) as f64;
                        (3e9f64.ln() + t * (3e11f64.ln() - 3e9f64.ln())).exp()
                    })
                    .collect()
            },
            sizes_m: vec![0.1, 0.5, 1.0],
        }),
        "fig3-28ghz-parallel-square" => Ok(Preset::Standard(mode_sweep(
            28e9,
            1.0,
            Orientation::Parallel,
        ))),
        "fig3-28ghz-parallel-rect41" => Ok(Preset::Standard(mode_sweep(
            28e9,
            4.0,
            Orientation::Parallel,
        ))),
        "fig3-28ghz-perpendicular-square" => Ok(Preset::Standard(mode_sweep(
            28e9,
            1.0,
            Orientation::Perpendicular,
        ))),
        "fig3-60ghz-parallel-square" => Ok(Preset::Standard(mode_sweep(
            60e9,
            1.0,
            Orientation::Parallel,
        ))),
        "fig4" => Ok(Preset::Standard(gain_sweep())),
        other => bail!(
            "unknown preset `{other}` (available: {})",
            PRESET_NAMES.join(", ")
        ),
    }
}
