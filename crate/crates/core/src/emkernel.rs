//! Scalar free-space Green function and assembly of the discretized
//! coupling operator between a transmit and a receive mesh.
//!
//! The coupling matrix entry for receive point `r_m` (weight `w_m`) and
//! transmit point `s_n` (weight `w_n`) is
//!
//! ```text
//! K[m, n] = g(|r_m - s_n|) * sqrt(w_m * w_n),   g(R) = exp(-j k R) / (4 pi R)
//! ```
//!
//! with the e^{+j omega t} time convention. The symmetric weight split makes
//! the singular values of `K` approximate the singular system of the
//! continuous operator, and makes the squared Frobenius norm converge to the
//! Hilbert-Schmidt norm of the kernel under mesh refinement.

use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use nalgebra::{DMatrix, Vector3};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::Error;
use crate::geometry::{Mesh, Wave};
use crate::Result;

/// Default cap on dense storage for a single coupling matrix: 2 GiB.
pub const DEFAULT_MEMORY_CAP_BYTES: u64 = 2 << 30;

/// Dense discretization of the Green-function operator between two meshes.
///
/// Shape is receive-rows by transmit-columns.
#[derive(Debug, Clone)]
pub struct CouplingMatrix {
    pub entries: DMatrix<Complex64>,
    pub wave: Wave,
}

impl CouplingMatrix {
    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    /// Squared Frobenius norm: the discrete Hilbert-Schmidt energy.
    pub fn frobenius_sq(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Binary dump: u64 rows, u64 cols, then row-major (re, im) f64 pairs,
    /// all little-endian. Debugging aid, not a stability contract.
    pub fn write_binary<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_u64::<LittleEndian>(self.rows() as u64)?;
        w.write_u64::<LittleEndian>(self.cols() as u64)?;
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                let z = self.entries[(i, j)];
                w.write_f64::<LittleEndian>(z.re)?;
                w.write_f64::<LittleEndian>(z.im)?;
            }
        }
        Ok(())
    }

    /// Inverse of [`write_binary`](Self::write_binary).
    pub fn read_binary<R: Read>(mut r: R, wave: Wave) -> std::io::Result<Self> {
        let rows = r.read_u64::<LittleEndian>()? as usize;
        let cols = r.read_u64::<LittleEndian>()? as usize;
        let mut entries = DMatrix::<Complex64>::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                let re = r.read_f64::<LittleEndian>()?;
                let im = r.read_f64::<LittleEndian>()?;
                entries[(i, j)] = Complex64::new(re, im);
            }
        }
        Ok(CouplingMatrix { entries, wave })
    }
}

/// Scalar free-space Green function g(R) = exp(-j k R) / (4 pi R).
pub fn green_scalar(r: &Vector3<f64>, s: &Vector3<f64>, wave: &Wave) -> Result<Complex64> {
    let radius = (r - s).norm();
    if radius <= 0.0 {
        return Err(Error::SingularKernel);
    }
    let phase = -wave.wavenumber * radius;
    let amp = 1.0 / (4.0 * std::f64::consts::PI * radius);
    Ok(Complex64::new(amp * phase.cos(), amp * phase.sin()))
}

/// Assemble the dense coupling matrix with the default memory cap.
pub fn assemble_coupling_matrix(
    mesh_t: &Mesh,
    mesh_r: &Mesh,
    wave: &Wave,
) -> Result<CouplingMatrix> {
    assemble_with_cap(mesh_t, mesh_r, wave, DEFAULT_MEMORY_CAP_BYTES)
}

/// Assemble the dense coupling matrix with an explicit memory cap in bytes.
///
/// Rows are filled in parallel; each entry depends only on its own point
/// pair, so the result is bit-identical to sequential assembly.
pub fn assemble_with_cap(
    mesh_t: &Mesh,
    mesh_r: &Mesh,
    wave: &Wave,
    cap_bytes: u64,
) -> Result<CouplingMatrix> {
    if mesh_t.is_empty() || mesh_r.is_empty() {
        return Err(Error::InvalidArgument("meshes must be non-empty".into()));
    }
    let m_r = mesh_r.len();
    let m_t = mesh_t.len();
    let required_bytes = (m_r as u64) * (m_t as u64) * 16;
    if required_bytes > cap_bytes {
        return Err(Error::ResourceLimit {
            required_bytes,
            cap_bytes,
        });
    }

    let sqrt_wt: Vec<f64> = mesh_t.weights.iter().map(|w| w.sqrt()).collect();
    let sqrt_wr: Vec<f64> = mesh_r.weights.iter().map(|w| w.sqrt()).collect();

    // Row-major scratch so rayon can hand out disjoint row slices.
    let mut rows: Vec<Complex64> = vec![Complex64::default(); m_r * m_t];
    let failed = std::sync::atomic::AtomicBool::new(false);
    rows.par_chunks_mut(m_t).enumerate().for_each(|(m, row)| {
        let rp = mesh_r.points[m];
        for (n, slot) in row.iter_mut().enumerate() {
            match green_scalar(&rp, &mesh_t.points[n], wave) {
                Ok(g) => *slot = g * (sqrt_wr[m] * sqrt_wt[n]),
                Err(_) => failed.store(true, std::sync::atomic::Ordering::Relaxed),
            }
        }
    });
    if failed.load(std::sync::atomic::Ordering::Relaxed) {
        return Err(Error::SingularKernel);
    }

    let entries = DMatrix::from_row_iterator(m_r, m_t, rows);
    Ok(CouplingMatrix {
        entries,
        wave: *wave,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_mesh, rotation_x, transform, Surface};
    use approx::assert_relative_eq;

    fn wave_28ghz() -> Wave {
        Wave::from_frequency(28e9).unwrap()
    }

    fn point_mesh(p: Vector3<f64>) -> Mesh {
        Mesh {
            points: vec![p],
            weights: vec![1.0],
            spacing: 1.0,
            grid: (1, 1),
        }
    }

    #[test]
    fn green_full_and_half_cycle() {
        let w = wave_28ghz();
        let lam = w.wavelength;
        let origin = Vector3::zeros();

        let g = green_scalar(&Vector3::new(0.0, 0.0, lam), &origin, &w).unwrap();
        assert_relative_eq!(g.re, 1.0 / (4.0 * std::f64::consts::PI * lam), max_relative = 1e-10);
        assert!(g.im.abs() < 1e-12 / lam);

        let g = green_scalar(&Vector3::new(0.0, 0.0, lam / 2.0), &origin, &w).unwrap();
        assert_relative_eq!(g.re, -1.0 / (2.0 * std::f64::consts::PI * lam), max_relative = 1e-10);
        assert!(g.im.abs() < 1e-12 / lam);
    }

    #[test]
    fn green_modulus_is_spreading_only() {
        let w = wave_28ghz();
        for r in [0.001, 0.3, 2.0, 57.0] {
            let g = green_scalar(&Vector3::new(r, 0.0, 0.0), &Vector3::zeros(), &w).unwrap();
            assert_relative_eq!(g.norm(), 1.0 / (4.0 * std::f64::consts::PI * r), max_relative = 1e-12);
        }
    }

    #[test]
    fn green_zero_separation_is_singular() {
        let w = wave_28ghz();
        let p = Vector3::new(1.0, 2.0, 3.0);
        assert!(matches!(green_scalar(&p, &p, &w), Err(Error::SingularKernel)));
    }

    #[test]
    fn single_point_meshes_reduce_to_green() {
        let w = wave_28ghz();
        let d = 0.7;
        let mt = point_mesh(Vector3::zeros());
        let mr = point_mesh(Vector3::new(0.0, 0.0, d));
        let k = assemble_coupling_matrix(&mt, &mr, &w).unwrap();
        assert_eq!((k.rows(), k.cols()), (1, 1));
        let g = green_scalar(&mr.points[0], &mt.points[0], &w).unwrap();
        assert_relative_eq!(k.entries[(0, 0)].re, g.re, max_relative = 1e-15);
        assert_relative_eq!(k.entries[(0, 0)].im, g.im, max_relative = 1e-15);
    }

    #[test]
    fn swap_meshes_transposes() {
        let w = wave_28ghz();
        let st = Surface::xy_square(Vector3::zeros(), 0.03).unwrap();
        let sr = Surface::xy_square(Vector3::new(0.01, 0.0, 0.4), 0.05).unwrap();
        let mt = build_mesh(&st, 0.01).unwrap();
        let mr = build_mesh(&sr, 0.013).unwrap();
        let k = assemble_coupling_matrix(&mt, &mr, &w).unwrap();
        let kt = assemble_coupling_matrix(&mr, &mt, &w).unwrap();
        for i in 0..k.rows() {
            for j in 0..k.cols() {
                let a = k.entries[(i, j)];
                let b = kt.entries[(j, i)];
                assert!((a - b).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn far_zone_frobenius_matches_analytic() {
        // Parallel 5 cm squares at d = 2 m: Hilbert-Schmidt energy is
        // A_T*A_R/(16 pi^2 d^2) to first order in D/d.
        let w = wave_28ghz();
        let st = Surface::xy_square(Vector3::zeros(), 0.05).unwrap();
        let sr = Surface::xy_square(Vector3::new(0.0, 0.0, 2.0), 0.05).unwrap();
        let mt = build_mesh(&st, w.wavelength / 2.0).unwrap();
        let mr = build_mesh(&sr, w.wavelength / 2.0).unwrap();
        let k = assemble_coupling_matrix(&mt, &mr, &w).unwrap();
        let analytic =
            0.0025 * 0.0025 / (16.0 * std::f64::consts::PI.powi(2) * 2.0f64.powi(2));
        assert_relative_eq!(k.frobenius_sq(), analytic, max_relative = 0.02);
    }

    #[test]
    fn rigid_motion_invariance() {
        let w = wave_28ghz();
        let st = Surface::xy_square(Vector3::zeros(), 0.04).unwrap();
        let sr = Surface::xy_square(Vector3::new(0.0, 0.02, 0.5), 0.04).unwrap();
        let rot = rotation_x(0.83);
        let shift = Vector3::new(0.4, -1.2, 2.0);
        let st2 = transform(&st, &rot, &shift).unwrap();
        let sr2 = transform(&sr, &rot, &shift).unwrap();

        let spacing = w.wavelength / 2.0;
        let k1 = assemble_coupling_matrix(
            &build_mesh(&st, spacing).unwrap(),
            &build_mesh(&sr, spacing).unwrap(),
            &w,
        )
        .unwrap();
        let k2 = assemble_coupling_matrix(
            &build_mesh(&st2, spacing).unwrap(),
            &build_mesh(&sr2, spacing).unwrap(),
            &w,
        )
        .unwrap();
        let max_dev = k1
            .entries
            .iter()
            .zip(k2.entries.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        assert!(max_dev < 1e-12, "max entry deviation {max_dev}");
    }

    #[test]
    fn memory_cap_reports_required_bytes() {
        let w = wave_28ghz();
        let s = Surface::xy_square(Vector3::zeros(), 0.05).unwrap();
        let sr = Surface::xy_square(Vector3::new(0.0, 0.0, 1.0), 0.05).unwrap();
        let mt = build_mesh(&s, 0.005).unwrap();
        let mr = build_mesh(&sr, 0.005).unwrap();
        let err = assemble_with_cap(&mt, &mr, &w, 1024).unwrap_err();
        match err {
            Error::ResourceLimit {
                required_bytes,
                cap_bytes,
            } => {
                assert_eq!(required_bytes, (mt.len() * mr.len() * 16) as u64);
                assert_eq!(cap_bytes, 1024);
            }
            other => panic!("expected resource-limit error, got {other:?}"),
        }
    }

    #[test]
    fn coincident_points_rejected() {
        let w = wave_28ghz();
        let mt = point_mesh(Vector3::new(0.1, 0.2, 0.3));
        let mr = point_mesh(Vector3::new(0.1, 0.2, 0.3));
        assert!(matches!(
            assemble_coupling_matrix(&mt, &mr, &w),
            Err(Error::SingularKernel)
        ));
    }

    #[test]
    fn conjugate_wavenumber_conjugates_matrix() {
        let w = wave_28ghz();
        let neg = Wave {
            frequency: w.frequency,
            wavelength: w.wavelength,
            wavenumber: -w.wavenumber,
        };
        let st = Surface::xy_square(Vector3::zeros(), 0.03).unwrap();
        let sr = Surface::xy_square(Vector3::new(0.0, 0.0, 0.3), 0.03).unwrap();
        let mt = build_mesh(&st, 0.008).unwrap();
        let mr = build_mesh(&sr, 0.008).unwrap();
        let k = assemble_coupling_matrix(&mt, &mr, &w).unwrap();
        let kc = assemble_coupling_matrix(&mt, &mr, &neg).unwrap();
        for (a, b) in k.entries.iter().zip(kc.entries.iter()) {
            assert!((a.conj() - b).norm() < 1e-18);
        }
    }

    #[test]
    fn binary_round_trip() {
        let w = wave_28ghz();
        let st = Surface::xy_square(Vector3::zeros(), 0.02).unwrap();
        let sr = Surface::xy_square(Vector3::new(0.0, 0.0, 0.2), 0.02).unwrap();
        let mt = build_mesh(&st, 0.007).unwrap();
        let mr = build_mesh(&sr, 0.009).unwrap();
        let k = assemble_coupling_matrix(&mt, &mr, &w).unwrap();
        let mut buf = Vec::new();
        k.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 16 + k.rows() * k.cols() * 16);
        let k2 = CouplingMatrix::read_binary(buf.as_slice(), w).unwrap();
        assert_eq!(k.entries, k2.entries);
    }

    // Determinism of the parallel assembly path against a sequential loop.
    #[test]
    fn parallel_assembly_matches_sequential() {
        let w = wave_28ghz();
        let st = Surface::xy_square(Vector3::zeros(), 0.04).unwrap();
        let sr = Surface::xy_square(Vector3::new(0.0, 0.0, 0.3), 0.04).unwrap();
        let mt = build_mesh(&st, w.wavelength / 2.0).unwrap();
        let mr = build_mesh(&sr, w.wavelength / 2.0).unwrap();
        let k = assemble_coupling_matrix(&mt, &mr, &w).unwrap();
        let mut seq = DMatrix::<Complex64>::zeros(mr.len(), mt.len());
        for m in 0..mr.len() {
            for n in 0..mt.len() {
                let g = green_scalar(&mr.points[m], &mt.points[n], &w).unwrap();
                seq[(m, n)] = g * (mr.weights[m].sqrt() * mt.weights[n].sqrt());
            }
        }
        assert_eq!(k.entries, seq);
    }
}
