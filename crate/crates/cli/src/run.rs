//! Single-link evaluation and sweep execution with ordered, per-row
//! flushed CSV output.

use std::io::Write;
use std::sync::mpsc;

use anyhow::Context;
use rayon::prelude::*;

use lismodes::capacity::{capacity, waterfill};
use lismodes::emkernel::assemble_coupling_matrix;
use lismodes::geometry::{build_mesh, Mesh, Surface, Wave};
use lismodes::linkbudget::{gain_exact, GAIN_LIMIT};
use lismodes::modes::{count_modes, mode_spectrum, n_limit_parallel, n_paraxial};

use crate::config::{ExperimentConfig, Orientation};

/// Number of per-mode intensity columns in the CSV output.
pub const SIGMA_COLUMNS: usize = 8;

/// Per-surface point-count threshold above which the mesh falls back from
/// the requested spacing to lambda/2.
const MESH_POINT_BUDGET: usize = 5000;

pub fn csv_header() -> String {
    let mut cols = vec![
        "d".to_string(),
        "d2_over_AR".to_string(),
        "N_counted".to_string(),
        "N_paraxial".to_string(),
        "N_limit".to_string(),
    ];
    for i in 1..=SIGMA_COLUMNS {
        cols.push(format!("sigma2_db_rel_{i}"));
    }
    cols.extend(
        [
            "gain_exact_db",
            "gain_friis_db",
            "gain_limit_db",
            "capacity_bits",
            "error",
        ]
        .map(String::from),
    );
    cols.join(",")
}

/// One evaluated sweep point.
#[derive(Debug, Clone)]
pub struct LinkRow {
    pub d: f64,
    pub d2_over_ar: f64,
    pub n_counted: Option<usize>,
    pub n_paraxial: f64,
    pub n_limit: f64,
    pub sigma2_db_rel: Vec<f64>,
    pub gain_exact: Option<f64>,
    pub gain_friis: f64,
    pub capacity_bits: Option<f64>,
    pub error: Option<String>,
}

fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

impl LinkRow {
    pub fn to_csv(&self) -> String {
        let mut fields = vec![
            format!("{:.6e}", self.d),
            format!("{:.6e}", self.d2_over_ar),
            self.n_counted.map_or(String::new(), |n| n.to_string()),
            format!("{:.3}", self.n_paraxial),
            format!("{:.3}", self.n_limit),
        ];
        for i in 0..SIGMA_COLUMNS {
            fields.push(match self.sigma2_db_rel.get(i) {
                Some(v) => format!("{:.3}", v),
                None => String::new(),
            });
        }
        fields.push(
            self.gain_exact
                .map_or(String::new(), |g| format!("{:.3}", db(g))),
        );
        fields.push(format!("{:.3}", db(self.gain_friis)));
        fields.push(format!("{:.3}", db(GAIN_LIMIT)));
        fields.push(
            self.capacity_bits
                .map_or(String::new(), |c| format!("{:.6}", c)),
        );
        fields.push(match &self.error {
            Some(e) => e.replace([',', '\n'], ";"),
            None => String::new(),
        });
        fields.join(",")
    }
}

/// A fully resolved geometry point in a sweep.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub tx: Surface,
    pub rx: Surface,
    pub d: f64,
    pub seed: u64,
}

/// Build a receive surface of area `a_r` at center distance `d` along the
/// transmit normal, parallel or perpendicular to the transmitter.
pub fn place_rx(
    tx: &Surface,
    a_r: f64,
    aspect: f64,
    orientation: Orientation,
    d: f64,
) -> anyhow::Result<Surface> {
    let len_u = (a_r / aspect).sqrt();
    let len_v = aspect * len_u;
    let center = tx.center + tx.normal * d;
    let surface = match orientation {
        Orientation::Parallel => {
            Surface::new(center, tx.basis_u, tx.basis_v, len_u, len_v)
        }
        // Rotate the aperture plane onto the (basis_u, normal) plane: the
        // receive surface stands edge-on to the transmitter.
        Orientation::Perpendicular => {
            Surface::new(center, tx.basis_u, tx.normal, len_u, len_v)
        }
    };
    surface.map_err(|e| anyhow::anyhow!("rx placement: {e}"))
}

/// Expand the config into its sweep points, in sweep order.
pub fn resolve_points(cfg: &ExperimentConfig, seed_override: Option<u64>) -> anyhow::Result<Vec<SweepPoint>> {
    let tx = cfg.tx.build()?;
    let base_seed = seed_override.unwrap_or(cfg.svd.seed);
    if let Some(rx_spec) = &cfg.rx {
        let rx = rx_spec.build()?;
        let d = (rx.center - tx.center).norm();
        return Ok(vec![SweepPoint {
            tx,
            rx,
            d,
            seed: base_seed,
        }]);
    }
    let sweep = cfg
        .rx_sweep
        .as_ref()
        .expect("validated config has rx or rx_sweep");
    let distances: Vec<f64> = match (&cfg.distances, &cfg.d2_over_ar) {
        (Some(d), None) => d.expand()?,
        (None, Some(r)) => r
            .expand()?
            .into_iter()
            .map(|ratio| (ratio * sweep.a_r).sqrt())
            .collect(),
        _ => unreachable!("validated config has exactly one distance spec"),
    };
    distances
        .into_iter()
        .enumerate()
        .map(|(i, d)| {
            let rx = place_rx(&tx, sweep.a_r, sweep.aspect, sweep.orientation, d)?;
            Ok(SweepPoint {
                tx: tx.clone(),
                rx,
                d,
                seed: base_seed.wrapping_add(i as u64),
            })
        })
        .collect()
}

fn mesh_with_budget(surface: &Surface, wave: &Wave, lambda_frac: f64) -> anyhow::Result<Mesh> {
    let mut spacing = wave.wavelength * lambda_frac;
    let estimate = |sp: f64| {
        ((surface.len_u / sp).ceil() as usize).max(1) * ((surface.len_v / sp).ceil() as usize).max(1)
    };
    if lambda_frac < 0.5 && estimate(spacing) > MESH_POINT_BUDGET {
        eprintln!(
            "warning: {} points at lambda*{lambda_frac}; falling back to lambda/2 spacing",
            estimate(spacing)
        );
        spacing = wave.wavelength * 0.5;
    }
    build_mesh(surface, spacing).map_err(|e| anyhow::anyhow!("meshing: {e}"))
}

/// Evaluate one sweep point: mode spectrum, counts, gains and capacity.
pub fn evaluate_point(cfg: &ExperimentConfig, point: &SweepPoint) -> LinkRow {
    let a_r = point.rx.area();
    let ratio = point.d * point.d / a_r;
    let wave = cfg.wave().expect("validated config");
    let n_par = n_paraxial(point.tx.area(), a_r, &wave, point.d).unwrap_or(f64::NAN);
    let n_lim = n_limit_parallel(point.tx.area(), &wave).unwrap_or(f64::NAN);
    let friis = a_r / (4.0 * std::f64::consts::PI * point.d * point.d);

    let mut row = LinkRow {
        d: point.d,
        d2_over_ar: ratio,
        n_counted: None,
        n_paraxial: n_par,
        n_limit: n_lim,
        sigma2_db_rel: Vec::new(),
        gain_exact: None,
        gain_friis: friis,
        capacity_bits: None,
        error: None,
    };

    let result = (|| -> anyhow::Result<()> {
        let mesh_t = mesh_with_budget(&point.tx, &wave, cfg.mesh_lambda_frac)?;
        let mesh_r = mesh_with_budget(&point.rx, &wave, cfg.mesh_lambda_frac)?;
        let k = assemble_coupling_matrix(&mesh_t, &mesh_r, &wave)
            .with_context(|| format!("assembly at d = {} m", point.d))?;
        let spectrum = mode_spectrum(&k, cfg.svd.k_max, cfg.svd.to_method()?, point.seed)
            .with_context(|| format!("SVD at d = {} m", point.d))?;
        let n = count_modes(&spectrum, cfg.counting_rule.to_rule())
            .with_context(|| format!("mode counting at d = {} m", point.d))?;

        let s1_sq = spectrum.sigmas[0] * spectrum.sigmas[0];
        row.sigma2_db_rel = spectrum
            .sigmas
            .iter()
            .take(SIGMA_COLUMNS)
            .map(|s| db(s * s / s1_sq))
            .collect();
        row.n_counted = Some(n);

        // Waterfilling over the counted modes, gains normalized to mode 1.
        let gains: Vec<f64> = spectrum
            .sigmas
            .iter()
            .take(n)
            .map(|s| s * s / s1_sq)
            .filter(|g| *g > 0.0)
            .collect();
        let alloc = waterfill(&gains, cfg.noise, cfg.total_power)
            .with_context(|| format!("waterfilling at d = {} m", point.d))?;
        row.capacity_bits = Some(capacity(&alloc));

        // Near-field gain of an isotropic source at the transmit center
        // against the receive surface; polarization along the transmit
        // u axis.
        let gain = gain_exact(&point.rx, &point.tx.center, &point.tx.basis_u, cfg.quad_tol)
            .with_context(|| format!("gain quadrature at d = {} m", point.d))?;
        row.gain_exact = Some(gain.gain_exact);
        Ok(())
    })();
    if let Err(e) = result {
        row.error = Some(format!("{e:#}"));
    }
    row
}

/// Run a single-point config and return its row.
pub fn run_link(cfg: &ExperimentConfig, seed_override: Option<u64>) -> anyhow::Result<LinkRow> {
    let points = resolve_points(cfg, seed_override)?;
    if points.len() != 1 {
        anyhow::bail!(
            "`link` expects a single geometry point, config expands to {}",
            points.len()
        );
    }
    Ok(evaluate_point(cfg, &points[0]))
}

/// Run a sweep, writing header and rows to `out` in sweep order, flushing
/// after every row. Per-point failures land in the `error` column.
pub fn run_sweep<W: Write>(
    cfg: &ExperimentConfig,
    seed_override: Option<u64>,
    workers: Option<usize>,
    out: &mut W,
) -> anyhow::Result<()> {
    let points = resolve_points(cfg, seed_override)?;
    let total = points.len();
    writeln!(out, "{}", csv_header())?;
    out.flush()?;

    let worker_count = workers
        .or(cfg.workers)
        .unwrap_or_else(|| rayon::current_num_threads().min(total.max(1)));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count.max(1))
        .build()
        .context("building worker pool")?;

    let (tx_chan, rx_chan) = mpsc::channel::<(usize, LinkRow)>();
    pool.in_place_scope(|scope| -> anyhow::Result<()> {
        scope.spawn(|_| {
            points
                .par_iter()
                .enumerate()
                .for_each_with(tx_chan, |chan, (i, p)| {
                    let row = evaluate_point(cfg, p);
                    // Receiver only hangs up on write failure; nothing to do here.
                    let _ = chan.send((i, row));
                });
        });

        // Write rows in sweep order as they arrive.
        let mut pending = std::collections::BTreeMap::new();
        let mut next = 0usize;
        for (i, row) in rx_chan.iter() {
            pending.insert(i, row);
            while let Some(row) = pending.remove(&next) {
                eprintln!(
                    "[{}/{}] d = {:.4} m, d2/AR = {:.4}{}",
                    next + 1,
                    total,
                    row.d,
                    row.d2_over_ar,
                    row.error
                        .as_deref()
                        .map(|e| format!(" (error: {e})"))
                        .unwrap_or_default()
                );
                writeln!(out, "{}", row.to_csv())?;
                out.flush()?;
                next += 1;
            }
        }
        Ok(())
    })?;
    Ok(())
}
