//! Communication-mode decomposition of the coupling operator: SVD,
//! counting rules and closed-form mode-number predictions.

use std::io::Write;

use nalgebra::{DMatrix, QR};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::emkernel::CouplingMatrix;
use crate::error::Error;
use crate::geometry::Wave;
use crate::Result;

/// SVD backend selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SvdMethod {
    /// Full dense SVD; bit-reproducible reference path.
    Exact,
    /// Randomized range-finder SVD; reproducible given a seed.
    Randomized,
}

/// Oversampling used by the randomized method.
const RSVD_OVERSAMPLE: usize = 10;
/// Power (subspace) iterations used by the randomized method.
const RSVD_POWER_ITERS: usize = 2;

/// Mode-counting rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CountRule {
    /// Largest drop of at least one decade in the ordered intensity
    /// sequence, considered only where sigma_n^2 is still within 10 dB of
    /// sigma_1^2; falls back to the half-power count `Relative(3.0)` when
    /// the plateau ends without such a drop.
    Knee,
    /// Count modes with sigma_n^2 within `threshold_db` of sigma_1^2.
    Relative(f64),
}

/// Descending singular values (coupling coefficients) of a coupling matrix,
/// with optional discretized mode vectors.
#[derive(Debug, Clone)]
pub struct ModeSpectrum {
    /// Descending non-negative singular values sigma_n = |xi_n|.
    pub sigmas: Vec<f64>,
    /// Discretized transmit basis functions, M_T x k, orthonormal columns.
    pub tx_modes: Option<DMatrix<Complex64>>,
    /// Discretized receive basis functions, M_R x k, orthonormal columns.
    pub rx_modes: Option<DMatrix<Complex64>>,
    /// True when fewer than min(M_R, M_T) triplets were retained.
    pub truncated: bool,
    /// Squared Frobenius norm of the source matrix (total coupling energy).
    pub source_frobenius_sq: f64,
}

impl ModeSpectrum {
    pub fn retained(&self) -> usize {
        self.sigmas.len()
    }

    /// Sum of retained coupling intensities sigma_n^2.
    pub fn energy(&self) -> f64 {
        self.sigmas.iter().map(|s| s * s).sum()
    }

    /// CSV export with columns `n,sigma,sigma2_db_rel`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "n,sigma,sigma2_db_rel")?;
        let s1 = self.sigmas.first().copied().unwrap_or(0.0);
        for (i, s) in self.sigmas.iter().enumerate() {
            let db = if s1 > 0.0 && *s > 0.0 {
                20.0 * (s / s1).log10()
            } else {
                f64::NEG_INFINITY
            };
            writeln!(w, "{},{:e},{:.3}", i + 1, s, db)?;
        }
        Ok(())
    }
}

/// Top singular triplets of a coupling matrix.
///
/// The exact method computes the full decomposition and truncates; the
/// randomized method uses a Gaussian range finder with oversampling
/// [`RSVD_OVERSAMPLE`] and [`RSVD_POWER_ITERS`] power iterations, seeded by
/// `seed`. The exact path ignores the seed.
pub fn mode_spectrum(
    coupling: &CouplingMatrix,
    k_max: usize,
    method: SvdMethod,
    seed: u64,
) -> Result<ModeSpectrum> {
    if k_max < 1 {
        return Err(Error::InvalidArgument("k_max must be at least 1".into()));
    }
    if coupling.entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidInput(
            "coupling matrix contains non-finite entries".into(),
        ));
    }
    let min_dim = coupling.rows().min(coupling.cols());
    let k = k_max.min(min_dim);
    let frob_sq = coupling.frobenius_sq();

    let (u, sigmas, vt) = match method {
        SvdMethod::Exact => exact_svd(&coupling.entries)?,
        SvdMethod::Randomized => {
            if k + RSVD_OVERSAMPLE >= min_dim {
                // Sketch would not be smaller than the matrix; exact is cheaper.
                exact_svd(&coupling.entries)?
            } else {
                randomized_svd(&coupling.entries, k, seed)?
            }
        }
    };

    let k = k.min(sigmas.len());
    let rx_modes = u.columns(0, k).into_owned();
    let tx_modes = vt.rows(0, k).into_owned().adjoint();
    Ok(ModeSpectrum {
        sigmas: sigmas[..k].to_vec(),
        tx_modes: Some(tx_modes),
        rx_modes: Some(rx_modes),
        truncated: k < min_dim,
        source_frobenius_sq: frob_sq,
    })
}

/// Full SVD with singular values sorted descending.
fn exact_svd(a: &DMatrix<Complex64>) -> Result<(DMatrix<Complex64>, Vec<f64>, DMatrix<Complex64>)> {
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v_t requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| {
        svd.singular_values[j]
            .partial_cmp(&svd.singular_values[i])
            .unwrap()
    });
    let sigmas: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let u_sorted = DMatrix::from_fn(u.nrows(), order.len(), |r, c| u[(r, order[c])]);
    let vt_sorted = DMatrix::from_fn(order.len(), vt.ncols(), |r, c| vt[(order[r], c)]);
    Ok((u_sorted, sigmas, vt_sorted))
}

fn gaussian_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    // Box-Muller; keeps the dependency surface to rand + rand_chacha.
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    let r = (-2.0 * u1.ln()).sqrt();
    let th = 2.0 * std::f64::consts::PI * u2;
    Complex64::new(r * th.cos(), r * th.sin())
}

/// Halko-Martinsson-Tropp randomized SVD of `a`, rank `k`.
fn randomized_svd(
    a: &DMatrix<Complex64>,
    k: usize,
    seed: u64,
) -> Result<(DMatrix<Complex64>, Vec<f64>, DMatrix<Complex64>)> {
    let (m, n) = (a.nrows(), a.ncols());
    let l = (k + RSVD_OVERSAMPLE).min(m.min(n));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let omega = DMatrix::from_fn(n, l, |_, _| gaussian_complex(&mut rng));

    let mut q = thin_q(a * &omega);
    for _ in 0..RSVD_POWER_ITERS {
        let z = thin_q(a.adjoint() * &q);
        q = thin_q(a * &z);
    }

    let b = q.adjoint() * a; // l x n
    let (ub, sigmas, vt) = exact_svd(&b)?;
    let u = q * ub;
    Ok((u, sigmas, vt))
}

fn thin_q(y: DMatrix<Complex64>) -> DMatrix<Complex64> {
    QR::new(y).q()
}

/// Effective number of communication modes under a counting rule.
pub fn count_modes(spectrum: &ModeSpectrum, rule: CountRule) -> Result<usize> {
    if spectrum.sigmas.is_empty() {
        return Err(Error::InvalidArgument("spectrum is empty".into()));
    }
    match rule {
        CountRule::Relative(threshold_db) => Ok(count_relative(&spectrum.sigmas, threshold_db)),
        CountRule::Knee => {
            let s = &spectrum.sigmas;
            // Largest decade-or-more intensity drop between consecutive
            // modes, taken only while sigma_n^2 is still on the plateau
            // (within 10 dB of sigma_1^2). Tail drops grow without bound
            // for rapidly decaying spectra, so an unrestricted argmax
            // would land in the numerical tail instead of at the knee.
            let plateau_floor = s[0] * 10f64.powf(-0.5);
            let mut best: Option<(usize, f64)> = None;
            for n in 0..s.len().saturating_sub(1) {
                if s[n] < plateau_floor {
                    break;
                }
                let drop = 2.0 * (s[n].log10() - s[n + 1].log10());
                if drop >= 1.0 && best.map_or(true, |(_, b)| drop > b) {
                    best = Some((n + 1, drop));
                }
            }
            match best {
                Some((n, _)) => Ok(n),
                // No clear knee: the transition out of the plateau is
                // gradual and the half-power count is the stable proxy.
                None => Ok(count_relative(s, 3.0)),
            }
        }
    }
}

fn count_relative(sigmas: &[f64], threshold_db: f64) -> usize {
    let s1_sq = sigmas[0] * sigmas[0];
    let floor = s1_sq * 10f64.powf(-threshold_db / 10.0);
    sigmas
        .iter()
        .filter(|s| *s * *s >= floor)
        .count()
        .max(1)
}

/// Paraxial (small-aperture) mode-count prediction A_T A_R / (lambda d)^2.
pub fn n_paraxial(a_t: f64, a_r: f64, wave: &Wave, d: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "distance must be positive, got {d}"
        )));
    }
    let ld = wave.wavelength * d;
    Ok(a_t * a_r / (ld * ld))
}

/// Large-surface mode-count ceiling pi A_T / lambda^2.
pub fn n_limit_parallel(a_t: f64, wave: &Wave) -> Result<f64> {
    if !(a_t > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "transmit area must be positive, got {a_t}"
        )));
    }
    Ok(std::f64::consts::PI * a_t / (wave.wavelength * wave.wavelength))
}
