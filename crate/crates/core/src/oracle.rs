//! Brute-force reference computations used to cross-check the closed forms.
//!
//! Nothing here calls into [`crate::frames`] or [`crate::polygons`] beyond
//! reading frame rows.

use num_complex::Complex64;

use crate::frames::{ComplexFrame, Frame, RealFrame};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    /// Points per angular parameter.
    pub resolution: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { resolution: 2000 }
    }
}

impl GridSpec {
    pub fn new(resolution: usize) -> Self {
        assert!(resolution >= 8, "grid resolution must be at least 8");
        GridSpec { resolution }
    }

    /// Bound `10 (pi / resolution)^2` on how far a grid minimum may sit above
    /// the true minimum.
    pub fn tolerance(&self) -> f64 {
        10.0 * (std::f64::consts::PI / self.resolution as f64).powi(2)
    }
}

/// `min_phi (r_i . x)^2 + (r_j . x)^2` over `x = (cos phi, sin phi)`, `phi` on
/// a uniform grid of `[0, pi)`.
pub fn grid_min_projection_real(frame: &RealFrame, i: usize, j: usize, grid: GridSpec) -> f64 {
    let (a, b) = (frame.rows()[i], frame.rows()[j]);
    let h = std::f64::consts::PI / grid.resolution as f64;
    (0..grid.resolution)
        .map(|k| {
            let (s, c) = (k as f64 * h).sin_cos();
            (a[0] * c + a[1] * s).powi(2) + (b[0] * c + b[1] * s).powi(2)
        })
        .fold(f64::INFINITY, f64::min)
}

fn complex_projection(row: [Complex64; 2], u: Complex64, v: Complex64) -> f64 {
    (row[0] * u.conj() + row[1] * v.conj()).norm_sqr()
}

/// Unit vectors `(cos phi, sin phi e^{-i xi})`, `phi` in `[0, pi/2]` and `xi`
/// in `[0, 2pi)`. A common phase of `(u, v)` never changes the projections, so
/// only the phase difference is gridded.
fn complex_grid(grid: GridSpec) -> impl Iterator<Item = (Complex64, Complex64)> {
    let res = grid.resolution;
    let hphi = std::f64::consts::FRAC_PI_2 / res as f64;
    let hxi = std::f64::consts::TAU / res as f64;
    let phases: Vec<Complex64> = (0..res).map(|k| Complex64::from_polar(1.0, -(k as f64) * hxi)).collect();
    (0..=res).flat_map(move |a| {
        let (s, c) = (a as f64 * hphi).sin_cos();
        let phases = phases.clone();
        phases.into_iter().map(move |ph| (Complex64::new(c, 0.0), ph * s))
    })
}

/// `min |u_i ū + v_i v̄|^2 + |u_j ū + v_j v̄|^2` over the grid of unit `(u, v)`.
pub fn grid_min_projection_complex(frame: &ComplexFrame, i: usize, j: usize, grid: GridSpec) -> f64 {
    let (a, b) = (frame.rows()[i], frame.rows()[j]);
    complex_grid(grid)
        .map(|(u, v)| complex_projection(a, u, v) + complex_projection(b, u, v))
        .fold(f64::INFINITY, f64::min)
}

/// Largest deviation of the total squared projection from 1 over the grid.
pub fn full_projection_identity_check(frame: &Frame, grid: GridSpec) -> f64 {
    match frame {
        Frame::Real(f) => {
            let h = std::f64::consts::PI / grid.resolution as f64;
            (0..grid.resolution)
                .map(|k| {
                    let (s, c) = (k as f64 * h).sin_cos();
                    let total: f64 = f.rows().iter().map(|r| (r[0] * c + r[1] * s).powi(2)).sum();
                    (total - 1.0).abs()
                })
                .fold(0.0, f64::max)
        }
        Frame::Complex(f) => complex_grid(grid)
            .map(|(u, v)| {
                let total: f64 = f.rows().iter().map(|&r| complex_projection(r, u, v)).sum();
                (total - 1.0).abs()
            })
            .fold(0.0, f64::max),
    }
}

/// Least singular value as the square root of the smaller eigenvalue of the
/// Hermitian matrix `M^H M`, from its trace and discriminant.
pub fn eig_sigma_min(m: [[Complex64; 2]; 2]) -> f64 {
    // columns of M
    let (c0, c1) = ([m[0][0], m[1][0]], [m[0][1], m[1][1]]);
    let g00 = c0[0].norm_sqr() + c0[1].norm_sqr();
    let g11 = c1[0].norm_sqr() + c1[1].norm_sqr();
    let g01 = c0[0].conj() * c1[0] + c0[1].conj() * c1[1];
    let trace = g00 + g11;
    let disc = ((g00 - g11).powi(2) + 4.0 * g01.norm_sqr()).sqrt();
    (0.5 * (trace - disc)).max(0.0).sqrt()
}

/// [`eig_sigma_min`] for a real matrix.
pub fn eig_sigma_min_real(m: [[f64; 2]; 2]) -> f64 {
    let c = |x: f64| Complex64::new(x, 0.0);
    eig_sigma_min([[c(m[0][0]), c(m[0][1])], [c(m[1][0]), c(m[1][1])]])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eig_examples() {
        assert!((eig_sigma_min_real([[1.0, 0.0], [0.0, 1.0]]) - 1.0).abs() < 1e-15);
        assert!((eig_sigma_min_real([[3.0, 0.0], [0.0, 0.5]]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn identity_grid_values() {
        let f = RealFrame::from_rows(vec![[1.0, 0.0], [0.0, 1.0]]);
        let g = GridSpec::new(64);
        assert!((grid_min_projection_real(&f, 0, 1, g) - 1.0).abs() < 1e-15);
        assert!(full_projection_identity_check(&Frame::Real(f), g) < 1e-15);
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let c = ComplexFrame::from_rows(vec![[one, zero], [zero, one]]);
        assert!((grid_min_projection_complex(&c, 0, 1, g) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rank_one_pair_reaches_zero() {
        let f = RealFrame::from_rows(vec![[1.0, 0.0], [0.0, 0.0], [0.0, 1.0]]);
        // phi = pi / 2 is on the grid for even resolutions
        assert!(grid_min_projection_real(&f, 0, 1, GridSpec::new(64)) < 1e-30);
    }

    #[test]
    #[should_panic]
    fn tiny_grid_rejected() {
        GridSpec::new(4);
    }
}
