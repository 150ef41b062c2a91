//! Closed isoperimetric polygons in the plane and in space, and their
//! correspondence with orthonormal 2-frames.
//!
//! A real frame maps to a planar polygon by squaring each row viewed as a
//! complex number; a complex frame maps to a spatial polygon through the Hopf
//! map applied row by row. Both images close and have perimeter 2, and the
//! least singular value of the submatrix on rows `i`, `j` satisfies
//! `sigma_min^2 = deficit(i, j) / 2` where
//! `deficit(i, j) = |a_i| + |a_j| - |a_i + a_j|`.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::frames::{ComplexFrame, RealFrame, TwoFrame, TIE_TOL};

/// Relative closure tolerance: `|sum a_i| <= CLOSURE_TOL * max(1, perimeter)`.
pub const CLOSURE_TOL: f64 = 1e-12;

/// Perimeter tolerance accepted by the inverse maps.
pub const INVERSE_PERIMETER_TOL: f64 = 1e-9;

/// Relative pole threshold for the inverse Hopf map.
pub const POLE_EPS: f64 = 1e-12;

/// Ordered list of edge vectors in `R^D` that sum to zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Polygon<const D: usize> {
    edges: Vec<[f64; D]>,
    perimeter: f64,
}

pub type PlanarPolygon = Polygon<2>;
pub type SpatialPolygon = Polygon<3>;

/// A polygon of either dimension.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyPolygon {
    Planar(PlanarPolygon),
    Spatial(SpatialPolygon),
}

pub(crate) fn norm<const D: usize>(a: &[f64; D]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn add<const D: usize>(a: &[f64; D], b: &[f64; D]) -> [f64; D] {
    std::array::from_fn(|k| a[k] + b[k])
}

fn edge_sum<const D: usize>(edges: &[[f64; D]]) -> [f64; D] {
    edges.iter().fold([0.0; D], |acc, e| add(&acc, e))
}

/// The triangle-inequality slack `|a| + |b| - |a + b|`.
///
/// Near the zero set (nonnegatively parallel edges) the direct difference
/// cancels, so it is replaced by the equivalent
/// `2(|a||b| - <a, b>) / (|a| + |b| + |a + b|)` with the numerator written as
/// `|a||b| |â - b̂|^2`.
pub fn deficit<const D: usize>(a: &[f64; D], b: &[f64; D]) -> f64 {
    let (na, nb) = (norm(a), norm(b));
    let nab = norm(&add(a, b));
    let direct = na + nb - nab;
    if direct >= 1e-8 * (na + nb) || na == 0.0 || nb == 0.0 {
        return direct.max(0.0);
    }
    let unit_gap_sq: f64 = (0..D).map(|k| (a[k] / na - b[k] / nb).powi(2)).sum();
    na * nb * unit_gap_sq / (na + nb + nab)
}

impl<const D: usize> Polygon<D> {
    /// Builds a polygon, failing with a validation error when it does not close
    /// or has zero perimeter.
    pub fn new(edges: Vec<[f64; D]>) -> Result<Self> {
        let perimeter: f64 = edges.iter().map(norm).sum();
        if !perimeter.is_finite() || perimeter <= 0.0 {
            return Err(Error::validation(format!("polygon perimeter must be positive, got {perimeter}")));
        }
        let gap = norm(&edge_sum(&edges));
        if gap > CLOSURE_TOL * perimeter.max(1.0) {
            return Err(Error::validation(format!(
                "polygon does not close: |sum of edges| = {gap:e} (tolerance {:e})",
                CLOSURE_TOL * perimeter.max(1.0)
            )));
        }
        Ok(Polygon { edges, perimeter })
    }

    /// Subtracts the edge mean so that arbitrary vectors form a closed polygon.
    pub fn center_and_close(mut edges: Vec<[f64; D]>) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::invalid("polygon needs at least one edge"));
        }
        let n = edges.len() as f64;
        let mean = edge_sum(&edges).map(|s| s / n);
        for e in &mut edges {
            for k in 0..D {
                e[k] -= mean[k];
            }
        }
        Polygon::new(edges)
    }

    pub fn edges(&self) -> &[[f64; D]] {
        &self.edges
    }

    pub fn n(&self) -> usize {
        self.edges.len()
    }

    pub fn perimeter(&self) -> f64 {
        self.perimeter
    }

    /// Norm of the edge sum.
    pub fn closure_gap(&self) -> f64 {
        norm(&edge_sum(&self.edges))
    }

    pub fn edge_norm(&self, i: usize) -> f64 {
        norm(&self.edges[i])
    }

    /// Deficit of edges `i` and `j`.
    pub fn pair_deficit(&self, i: usize, j: usize) -> Result<f64> {
        let n = self.n();
        if i == j {
            return Err(Error::invalid(format!("edge indices must differ, got ({i}, {j})")));
        }
        if i >= n || j >= n {
            return Err(Error::invalid(format!("edge pair ({i}, {j}) out of range for n = {n}")));
        }
        Ok(deficit(&self.edges[i], &self.edges[j]))
    }

    /// Largest pair deficit over `i < j`, ties broken lexicographically.
    pub fn max_pair_deficit(&self) -> (f64, usize, usize) {
        let n = self.n();
        let mut best = (f64::NEG_INFINITY, 0, 1);
        for i in 0..n {
            for j in (i + 1)..n {
                let d = deficit(&self.edges[i], &self.edges[j]);
                if d > best.0 + TIE_TOL {
                    best = (d, i, j);
                }
            }
        }
        best
    }

    /// Scales all edges so that the perimeter becomes `target`.
    pub fn normalize_perimeter(&self, target: f64) -> Result<Self> {
        if !target.is_finite() || target <= 0.0 {
            return Err(Error::invalid(format!("target perimeter must be positive, got {target}")));
        }
        if target == self.perimeter {
            return Ok(self.clone());
        }
        let s = target / self.perimeter;
        let edges: Vec<[f64; D]> = self.edges.iter().map(|e| e.map(|x| x * s)).collect();
        let perimeter = edges.iter().map(norm).sum();
        Ok(Polygon { edges, perimeter })
    }

    /// Polygon with edge `k` taken from old edge `perm[k]`.
    pub fn permute(&self, perm: &[usize]) -> Self {
        Polygon { edges: perm.iter().map(|&k| self.edges[k]).collect(), perimeter: self.perimeter }
    }

    fn check_inverse_perimeter(&self) -> Result<f64> {
        if (self.perimeter - 2.0).abs() > INVERSE_PERIMETER_TOL {
            return Err(Error::invalid(format!(
                "inverse maps need perimeter 2 (±{INVERSE_PERIMETER_TOL:e}), got {}",
                self.perimeter
            )));
        }
        Ok(2.0 / self.perimeter)
    }
}

impl PlanarPolygon {
    /// Reorders edges by polar angle so that consecutive partial sums trace a
    /// convex polygon. Only meant for display.
    pub fn convex_order(&self) -> Self {
        let mut idx: Vec<usize> = (0..self.n()).collect();
        let angle = |e: &[f64; 2]| e[1].atan2(e[0]).rem_euclid(TAU);
        idx.sort_by(|&a, &b| angle(&self.edges[a]).total_cmp(&angle(&self.edges[b])));
        self.permute(&idx)
    }
}

impl AnyPolygon {
    pub fn dim(&self) -> usize {
        match self {
            AnyPolygon::Planar(_) => 2,
            AnyPolygon::Spatial(_) => 3,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            AnyPolygon::Planar(p) => p.n(),
            AnyPolygon::Spatial(p) => p.n(),
        }
    }

    pub fn perimeter(&self) -> f64 {
        match self {
            AnyPolygon::Planar(p) => p.perimeter(),
            AnyPolygon::Spatial(p) => p.perimeter(),
        }
    }

    pub fn max_pair_deficit(&self) -> (f64, usize, usize) {
        match self {
            AnyPolygon::Planar(p) => p.max_pair_deficit(),
            AnyPolygon::Spatial(p) => p.max_pair_deficit(),
        }
    }

    pub fn closure_gap(&self) -> f64 {
        match self {
            AnyPolygon::Planar(p) => p.closure_gap(),
            AnyPolygon::Spatial(p) => p.closure_gap(),
        }
    }

    /// Edges as variable-length vectors.
    pub fn edge_vecs(&self) -> Vec<Vec<f64>> {
        match self {
            AnyPolygon::Planar(p) => p.edges().iter().map(|e| e.to_vec()).collect(),
            AnyPolygon::Spatial(p) => p.edges().iter().map(|e| e.to_vec()).collect(),
        }
    }
}

fn require_valid<F: TwoFrame>(frame: &F) -> Result<()> {
    let v = frame.validate();
    if !v.valid {
        return Err(Error::invalid(format!(
            "frame is not orthonormal (n = {}, max Gram residual {:e})",
            frame.n(),
            v.max_residual()
        )));
    }
    Ok(())
}

fn check_image_perimeter<const D: usize>(p: &Polygon<D>) -> Result<()> {
    if (p.perimeter - 2.0).abs() > CLOSURE_TOL * 2.0 {
        return Err(Error::validation(format!("mapped polygon has perimeter {} instead of 2", p.perimeter)));
    }
    Ok(())
}

/// Complex square of every row: `(x, y) -> (x^2 - y^2, 2xy)`.
pub fn square_map(frame: &RealFrame) -> Result<PlanarPolygon> {
    require_valid(frame)?;
    let edges = frame.rows().iter().map(|&[x, y]| [x * x - y * y, 2.0 * x * y]).collect();
    let p = Polygon::new(edges)?;
    check_image_perimeter(&p)?;
    Ok(p)
}

/// Half-angle square root of each edge, with optional per-row signs.
///
/// Row `i` is `s_i sqrt(rho_i) (cos(psi_i / 2), sin(psi_i / 2))` with
/// `psi_i` in `[0, 2pi)`. The polygon is rescaled to perimeter exactly 2 first.
pub fn inverse_square_map(polygon: &PlanarPolygon, signs: Option<&[i8]>) -> Result<RealFrame> {
    let scale = polygon.check_inverse_perimeter()?;
    if let Some(s) = signs {
        if s.len() != polygon.n() {
            return Err(Error::invalid(format!("expected {} signs, got {}", polygon.n(), s.len())));
        }
        if s.iter().any(|&x| x != 1 && x != -1) {
            return Err(Error::invalid("signs must be +1 or -1"));
        }
    }
    let rows = polygon
        .edges()
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let (x, y) = (e[0] * scale, e[1] * scale);
            let rho = x.hypot(y);
            let psi = y.atan2(x).rem_euclid(TAU);
            let s = signs.map_or(1.0, |s| f64::from(s[k]));
            let r = s * rho.sqrt();
            [r * (0.5 * psi).cos(), r * (0.5 * psi).sin()]
        })
        .collect();
    Ok(RealFrame::from_rows(rows))
}

/// Hopf map of one row: `(u, v) -> (2 Re(ū v), -2 Im(ū v), |u|^2 - |v|^2)`.
pub fn hopf_row(u: Complex64, v: Complex64) -> [f64; 3] {
    let w = u.conj() * v;
    [2.0 * w.re, -2.0 * w.im, u.norm_sqr() - v.norm_sqr()]
}

/// Row-wise Hopf map of a complex frame.
pub fn hopf_map(frame: &ComplexFrame) -> Result<SpatialPolygon> {
    require_valid(frame)?;
    let mut edges = Vec::with_capacity(frame.n());
    for &[u, v] in frame.rows() {
        let e = hopf_row(u, v);
        let rho = u.norm_sqr() + v.norm_sqr();
        let gap = (norm(&e) - rho).abs();
        if gap > 1e-14 * rho.max(f64::MIN_POSITIVE) && gap > 0.0 {
            return Err(Error::validation(format!("Hopf edge norm {} differs from |u|^2 + |v|^2 = {rho}", norm(&e))));
        }
        edges.push(e);
    }
    let p = Polygon::new(edges)?;
    check_image_perimeter(&p)?;
    Ok(p)
}

/// Inverse Hopf map. `u` is taken real and nonnegative unless the edge sits at
/// the south pole; optional unit `phases` multiply the rows afterwards.
pub fn inverse_hopf_map(polygon: &SpatialPolygon, phases: Option<&[Complex64]>) -> Result<ComplexFrame> {
    let scale = polygon.check_inverse_perimeter()?;
    if let Some(ph) = phases {
        if ph.len() != polygon.n() {
            return Err(Error::invalid(format!("expected {} phases, got {}", polygon.n(), ph.len())));
        }
        if ph.iter().any(|w| (w.norm() - 1.0).abs() > 1e-12) {
            return Err(Error::invalid("phases must have unit modulus"));
        }
    }
    let rows = polygon
        .edges()
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let [x, y, z] = e.map(|c| c * scale);
            let rho = norm(&[x, y, z]);
            let mut row = if rho == 0.0 {
                [Complex64::new(0.0, 0.0); 2]
            } else {
                // rho + z, evaluated without cancellation in the southern hemisphere
                let s = if z >= 0.0 { rho + z } else { (x * x + y * y) / (rho - z) };
                if s > POLE_EPS * rho {
                    let u = (0.5 * s).sqrt();
                    [Complex64::new(u, 0.0), Complex64::new(x, -y) / (2.0 * u)]
                } else {
                    [Complex64::new(0.0, 0.0), Complex64::new(rho.sqrt(), 0.0)]
                }
            };
            if let Some(ph) = phases {
                row = [row[0] * ph[k], row[1] * ph[k]];
            }
            row
        })
        .collect();
    Ok(ComplexFrame::from_rows(rows))
}
