//! Oriented planar surfaces, quadrature meshes and classical region
//! boundaries.

use nalgebra::{Matrix3, Vector3};

use crate::error::Error;
use crate::Result;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

const ORTHO_TOL: f64 = 1e-12;

/// Monochromatic plane-wave parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wave {
    /// Frequency, Hz.
    pub frequency: f64,
    /// Wavelength λ = c/f, meters.
    pub wavelength: f64,
    /// Wavenumber k = 2π/λ, rad/m.
    pub wavenumber: f64,
}

impl Wave {
    pub fn from_frequency(frequency: f64) -> Result<Self> {
        if !(frequency > 0.0) || !frequency.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "frequency must be positive and finite, got {frequency}"
            )));
        }
        let wavelength = SPEED_OF_LIGHT / frequency;
        Ok(Wave {
            frequency,
            wavelength,
            wavenumber: 2.0 * std::f64::consts::PI / wavelength,
        })
    }
}

/// An oriented rectangle in 3-D space: a transmit or receive aperture.
///
/// `basis_u`, `basis_v`, `normal` form a right-handed orthonormal triad;
/// the rectangle spans `len_u` along `basis_u` and `len_v` along `basis_v`,
/// centered at `center`.
#[derive(Debug, Clone, PartialEq)]
pub struct Surface {
    pub center: Vector3<f64>,
    pub basis_u: Vector3<f64>,
    pub basis_v: Vector3<f64>,
    pub normal: Vector3<f64>,
    pub len_u: f64,
    pub len_v: f64,
}

impl Surface {
    /// Build a surface from a center, two in-plane basis vectors and side
    /// lengths. The normal is `basis_u × basis_v`.
    pub fn new(
        center: Vector3<f64>,
        basis_u: Vector3<f64>,
        basis_v: Vector3<f64>,
        len_u: f64,
        len_v: f64,
    ) -> Result<Self> {
        if !(len_u > 0.0) || !(len_v > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "side lengths must be positive, got {len_u} x {len_v}"
            )));
        }
        let normal = basis_u.cross(&basis_v);
        let s = Surface {
            center,
            basis_u,
            basis_v,
            normal,
            len_u,
            len_v,
        };
        s.check_triad()?;
        Ok(s)
    }

    /// Axis-aligned rectangle in the z = center.z plane, u along x, v along
    /// y, normal along +z.
    pub fn xy_rectangle(center: Vector3<f64>, len_u: f64, len_v: f64) -> Result<Self> {
        Surface::new(center, Vector3::x(), Vector3::y(), len_u, len_v)
    }

    /// Square in the z = center.z plane.
    pub fn xy_square(center: Vector3<f64>, side: f64) -> Result<Self> {
        Surface::xy_rectangle(center, side, side)
    }

    fn check_triad(&self) -> Result<()> {
        let vs = [self.basis_u, self.basis_v, self.normal];
        for v in &vs {
            if (v.norm() - 1.0).abs() > ORTHO_TOL {
                return Err(Error::InvalidArgument(format!(
                    "basis vector {v:?} is not unit-norm"
                )));
            }
        }
        for i in 0..3 {
            for j in (i + 1)..3 {
                if vs[i].dot(&vs[j]).abs() > ORTHO_TOL {
                    return Err(Error::InvalidArgument(
                        "basis vectors are not mutually orthogonal".into(),
                    ));
                }
            }
        }
        if (self.basis_u.cross(&self.basis_v) - self.normal).norm() > 1e-11 {
            return Err(Error::InvalidArgument(
                "triad is not right-handed (normal != u x v)".into(),
            ));
        }
        Ok(())
    }

    /// Surface area, m².
    pub fn area(&self) -> f64 {
        self.len_u * self.len_v
    }

    /// The size parameter D: the larger side of the rectangle.
    pub fn size(&self) -> f64 {
        self.len_u.max(self.len_v)
    }

    /// Point on the surface at local coordinates (u, v) measured from the
    /// center, meters.
    pub fn point_at(&self, u: f64, v: f64) -> Vector3<f64> {
        self.center + self.basis_u * u + self.basis_v * v
    }
}

/// Quadrature points and weights sampling a [`Surface`].
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub points: Vec<Vector3<f64>>,
    /// Cell areas, m²; all positive, summing to the surface area.
    pub weights: Vec<f64>,
    /// Achieved inter-sample spacing (largest cell side), meters.
    pub spacing: f64,
    /// Grid extents (n_u, n_v) of the generating uniform grid.
    pub grid: (usize, usize),
}

impl Mesh {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Uniform cell-center mesh over a surface.
///
/// Grid size per axis is `ceil(len/target_spacing)`; points are cell
/// centers, weights are cell areas. Ordering is row-major over u then v.
pub fn build_mesh(surface: &Surface, target_spacing: f64) -> Result<Mesh> {
    if !(target_spacing > 0.0) || !target_spacing.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "target spacing must be positive, got {target_spacing}"
        )));
    }
    let n_u = (surface.len_u / target_spacing).ceil() as usize;
    let n_v = (surface.len_v / target_spacing).ceil() as usize;
    let n_u = n_u.max(1);
    let n_v = n_v.max(1);
    let du = surface.len_u / n_u as f64;
    let dv = surface.len_v / n_v as f64;
    let w = du * dv;

    let mut points = Vec::with_capacity(n_u * n_v);
    for iu in 0..n_u {
        let u = ((iu as f64 + 0.5) / n_u as f64 - 0.5) * surface.len_u;
        for iv in 0..n_v {
            let v = ((iv as f64 + 0.5) / n_v as f64 - 0.5) * surface.len_v;
            points.push(surface.point_at(u, v));
        }
    }
    Ok(Mesh {
        points,
        weights: vec![w; n_u * n_v],
        spacing: du.max(dv),
        grid: (n_u, n_v),
    })
}

/// Rigid transform: rotate the surface about the origin, then translate.
pub fn transform(
    surface: &Surface,
    rotation: &Matrix3<f64>,
    translation: &Vector3<f64>,
) -> Result<Surface> {
    let rtr = rotation.transpose() * rotation;
    if (rtr - Matrix3::identity()).abs().max() > 1e-11 {
        return Err(Error::InvalidArgument(
            "rotation matrix is not orthonormal".into(),
        ));
    }
    if (rotation.determinant() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(
            "rotation matrix must be proper (det = +1)".into(),
        ));
    }
    Surface::new(
        rotation * surface.center + translation,
        rotation * surface.basis_u,
        rotation * surface.basis_v,
        surface.len_u,
        surface.len_v,
    )
}

/// Rotation matrix about the x axis, angle in radians.
pub fn rotation_x(angle: f64) -> Matrix3<f64> {
    Matrix3::new(
        1.0, 0.0, 0.0,
        0.0, angle.cos(), -angle.sin(),
        0.0, angle.sin(), angle.cos(),
    )
}

/// Rotation matrix about the y axis, angle in radians.
pub fn rotation_y(angle: f64) -> Matrix3<f64> {
    Matrix3::new(
        angle.cos(), 0.0, angle.sin(),
        0.0, 1.0, 0.0,
        -angle.sin(), 0.0, angle.cos(),
    )
}

/// Fraunhofer (far-field) boundary distance 2D²/λ for antenna size D.
pub fn fraunhofer_distance(size: f64, wave: &Wave) -> Result<f64> {
    if !(size >= 0.0) || !size.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "antenna size must be non-negative, got {size}"
        )));
    }
    Ok(2.0 * size * size / wave.wavelength)
}
