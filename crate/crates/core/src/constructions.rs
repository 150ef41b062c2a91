//! Explicit configurations: the planar three-vector equality family, the
//! balanced four-direction spatial family, and the `4 x 2` complex frame whose
//! six submatrices share one least singular value below 1/2.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frames::ComplexFrame;
use crate::optimizer::{balanced_partition, fit_support, OptimizerConfig, Space};
use crate::polygons::{deficit, AnyPolygon, PlanarPolygon, Polygon, SpatialPolygon};

/// Regular-tetrahedron unit directions with an even number of minus signs.
pub const TETRAHEDRON: [[f64; 3]; 4] = {
    const S: f64 = 0.577_350_269_189_625_8; // 1 / sqrt(3)
    [[S, S, S], [-S, -S, S], [-S, S, -S], [S, -S, -S]]
};

/// Tolerance on the equality-family deficits.
pub const EQUALITY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TriangleConfig {
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub r: usize,
    /// `|a|, |b|, |c|` with `|a| = 1/(4n) + 1/(4p)` and likewise for `q`, `r`.
    pub lengths: [f64; 3],
    pub directions: [[f64; 2]; 3],
}

/// `p` copies of `a`, `q` of `b` and `r` of `c` closing at unit perimeter.
///
/// The three sides `p|a|, q|b|, r|c|` of the closure triangle sum to 1 and
/// always satisfy the strict triangle inequality. The `p a` side points along
/// `+x` and the triangle is traversed counterclockwise in the upper half-plane.
pub fn triangle_config(n: usize, p: usize, q: usize, r: usize) -> Result<(PlanarPolygon, TriangleConfig)> {
    if p == 0 || q == 0 || r == 0 || p + q + r != n {
        return Err(Error::invalid(format!(
            "multiplicities must be positive with p + q + r = n, got p={p}, q={q}, r={r}, n={n}"
        )));
    }
    let len = |m: usize| 1.0 / (4.0 * n as f64) + 1.0 / (4.0 * m as f64);
    let lengths = [len(p), len(q), len(r)];
    let (sa, sb, sc) = (p as f64 * lengths[0], q as f64 * lengths[1], r as f64 * lengths[2]);
    // vertices (0, 0), (sa, 0), (x, y) with |(x, y) - (sa, 0)| = sb and |(x, y)| = sc
    let x = (sa * sa + sc * sc - sb * sb) / (2.0 * sa);
    let y = (sc * sc - x * x).max(0.0).sqrt();
    let directions = [[1.0, 0.0], [(x - sa) / sb, y / sb], [-x / sc, -y / sc]];

    let mut edges = Vec::with_capacity(n);
    for (k, &m) in [p, q, r].iter().enumerate() {
        let e = directions[k].map(|c| c * lengths[k]);
        edges.extend(std::iter::repeat_n(e, m));
    }
    let polygon = Polygon::new(edges)?;
    Ok((polygon, TriangleConfig { n, p, q, r, lengths, directions }))
}

/// Check of one `(p, q, r)` member of the equality family.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartitionCheck {
    pub p: usize,
    pub q: usize,
    pub r: usize,
    pub perimeter_residual: f64,
    /// Largest `|deficit - 1/n|` over the three distinct-direction pairs.
    pub max_deviation: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EqualityReport {
    pub n: usize,
    pub partitions: Vec<PartitionCheck>,
    pub pass: bool,
}

/// Builds one member of the family and compares its deficits with `1/n`.
pub fn verify_partition(n: usize, p: usize, q: usize, r: usize) -> Result<PartitionCheck> {
    let (_, cfg) = triangle_config(n, p, q, r)?;
    let edge = |k: usize| cfg.directions[k].map(|c| c * cfg.lengths[k]);
    let target = 1.0 / n as f64;
    let max_deviation =
        [(0, 1), (0, 2), (1, 2)].iter().map(|&(a, b)| (deficit(&edge(a), &edge(b)) - target).abs()).fold(0.0, f64::max);
    let perimeter = p as f64 * cfg.lengths[0] + q as f64 * cfg.lengths[1] + r as f64 * cfg.lengths[2];
    let perimeter_residual = (perimeter - 1.0).abs();
    Ok(PartitionCheck {
        p,
        q,
        r,
        perimeter_residual,
        max_deviation,
        pass: max_deviation <= EQUALITY_TOL && perimeter_residual <= 1e-12,
    })
}

/// Runs [`verify_partition`] over every `p ≤ q ≤ r` with `p + q + r = n`.
pub fn verify_equality_family(n: usize) -> Result<EqualityReport> {
    if n < 3 {
        return Err(Error::invalid(format!("n must be ≥ 3, got {n}")));
    }
    let mut partitions = Vec::new();
    for p in 1..=n / 3 {
        for q in p..=(n - p) / 2 {
            let r = n - p - q;
            partitions.push(verify_partition(n, p, q, r)?);
        }
    }
    let pass = partitions.iter().all(|c| c.pass);
    Ok(EqualityReport { n, partitions, pass })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfigStatus {
    /// Regular tetrahedron, `n` divisible by 4.
    Exact,
    /// Numerically optimized inside the balanced support.
    ConjecturedOptimum,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BalancedSpatialConfig {
    pub n: usize,
    pub multiplicities: [usize; 4],
    pub directions: [[f64; 3]; 4],
    pub lengths: [f64; 4],
    pub max_deficit: f64,
    pub status: ConfigStatus,
}

/// Four-direction spatial polygon with balanced multiplicities.
///
/// For `n` divisible by 4 this is the regular tetrahedron with all edges of
/// length `1/n`. Otherwise directions and lengths come from optimizing inside
/// the balanced support, started from a perturbed tetrahedron drawn with `seed`.
pub fn balanced_config(n: usize, seed: u64) -> Result<(SpatialPolygon, BalancedSpatialConfig)> {
    if n < 4 {
        return Err(Error::invalid(format!("balanced configurations need n ≥ 4, got {n}")));
    }
    let parts = balanced_partition(n, 4);
    let multiplicities = [parts[0], parts[1], parts[2], parts[3]];
    let (directions, lengths, status) = if n.is_multiple_of(4) {
        (TETRAHEDRON, [1.0 / n as f64; 4], ConfigStatus::Exact)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let init: Vec<Vec<f64>> = TETRAHEDRON
            .iter()
            .map(|d| d.iter().map(|x| (x + 0.05 * (rng.gen::<f64>() - 0.5)) / n as f64).collect())
            .collect();
        let schedule = OptimizerConfig::new(n, Space::Spatial).schedule();
        let fit = fit_support(Space::Spatial, &parts, &init, &schedule)?;
        let mut dirs = [[0.0; 3]; 4];
        let mut lens = [0.0; 4];
        for (k, w) in fit.cluster_edges.iter().enumerate() {
            let l = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            lens[k] = l;
            dirs[k] = [w[0] / l, w[1] / l, w[2] / l];
        }
        (dirs, lens, ConfigStatus::ConjecturedOptimum)
    };
    let mut edges = Vec::with_capacity(n);
    for k in 0..4 {
        let e = directions[k].map(|c| c * lengths[k]);
        edges.extend(std::iter::repeat_n(e, multiplicities[k]));
    }
    let polygon = Polygon::new(edges)?;
    let max_deficit = AnyPolygon::Spatial(polygon.clone()).max_pair_deficit().0;
    Ok((polygon, BalancedSpatialConfig { n, multiplicities, directions, lengths, max_deficit, status }))
}

/// The least singular value shared by all six submatrices of
/// [`counterexample_matrix`]: `sqrt(2 - 2 sqrt(1/3)) / 2`.
pub fn counterexample_sigma_min() -> f64 {
    0.5 * (2.0 - 2.0 * (1.0_f64 / 3.0).sqrt()).sqrt()
}

/// The explicit `4 x 2` complex frame `W A0`, where `W` is diagonal with the
/// given unit `row_phases` (identity by default) and
///
/// ```text
/// A0 = 1 / (2 * 3^(1/4)) * [ s+   (1 - i)/s+ ]
///                          [ s+  (-1 + i)/s+ ]
///                          [ s-   (1 + i)/s- ]
///                          [ s-  (-1 - i)/s- ],   s± = sqrt(sqrt(3) ± 1).
/// ```
pub fn counterexample_matrix(row_phases: Option<&[Complex64; 4]>) -> Result<ComplexFrame> {
    if let Some(w) = row_phases {
        if let Some(bad) = w.iter().find(|z| (z.norm() - 1.0).abs() > 1e-12) {
            return Err(Error::invalid(format!("row phases must have unit modulus, got |{bad}| = {}", bad.norm())));
        }
    }
    let r3 = 3.0_f64.sqrt();
    let pre = 1.0 / (2.0 * 3.0_f64.powf(0.25));
    let sp = (r3 + 1.0).sqrt();
    let sm = (r3 - 1.0).sqrt();
    let c = Complex64::new;
    let base = [
        [c(sp, 0.0), c(1.0, -1.0) / sp],
        [c(sp, 0.0), c(-1.0, 1.0) / sp],
        [c(sm, 0.0), c(1.0, 1.0) / sm],
        [c(sm, 0.0), c(-1.0, -1.0) / sm],
    ];
    let ones = [c(1.0, 0.0); 4];
    let w = row_phases.unwrap_or(&ones);
    let rows = base.iter().zip(w).map(|(row, &ph)| [row[0] * pre * ph, row[1] * pre * ph]).collect();
    Ok(ComplexFrame::from_rows(rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::{all_pairs, validate_frame};
    use crate::polygons::hopf_map;
    use approx::assert_abs_diff_eq;

    #[test]
    fn triangle_lengths() {
        let (poly, cfg) = triangle_config(4, 2, 1, 1).unwrap();
        assert_abs_diff_eq!(cfg.lengths[0], 3.0 / 16.0, epsilon = 1e-15);
        assert_abs_diff_eq!(cfg.lengths[1], 5.0 / 16.0, epsilon = 1e-15);
        assert_abs_diff_eq!(cfg.lengths[2], 5.0 / 16.0, epsilon = 1e-15);
        assert_abs_diff_eq!(poly.perimeter(), 1.0, epsilon = 1e-15);
        let (tri, cfg3) = triangle_config(3, 1, 1, 1).unwrap();
        assert_abs_diff_eq!(cfg3.lengths[0], 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(tri.max_pair_deficit().0, 1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn triangle_rejects_bad_multiplicities() {
        assert!(triangle_config(6, 0, 3, 3).is_err());
        assert!(triangle_config(6, 1, 2, 2).is_err());
    }

    #[test]
    fn equality_family_small_n() {
        let r3 = verify_equality_family(3).unwrap();
        assert_eq!(r3.partitions.len(), 1);
        assert!(r3.pass);
        let r6 = verify_equality_family(6).unwrap();
        let parts: Vec<_> = r6.partitions.iter().map(|c| (c.p, c.q, c.r)).collect();
        assert_eq!(parts, vec![(1, 1, 4), (1, 2, 3), (2, 2, 2)]);
        assert!(r6.pass);
    }

    #[test]
    fn counterexample_is_orthonormal_and_equioscillating() {
        let f = counterexample_matrix(None).unwrap();
        assert!(validate_frame(&f).valid);
        for c in all_pairs(&f) {
            assert_abs_diff_eq!(c.sigma_min, counterexample_sigma_min(), epsilon = 1e-12);
        }
        assert!(counterexample_sigma_min() < 0.5);
    }

    #[test]
    fn counterexample_maps_to_tetrahedron() {
        let p = hopf_map(&counterexample_matrix(None).unwrap()).unwrap();
        // (±1, ±1, ±1) / (2 sqrt(3)) are the unit directions at length 1/2
        let tetra: Vec<[f64; 3]> = TETRAHEDRON.iter().map(|d| d.map(|x| 0.5 * x)).collect();
        for e in p.edges() {
            assert!(e[0] * e[1] * e[2] > 0.0, "even sign pattern");
            assert!(tetra.iter().any(|t| (0..3).all(|k| (t[k] - e[k]).abs() < 1e-12)));
        }
    }

    #[test]
    fn non_unit_phases_rejected() {
        let c = Complex64::new;
        assert!(counterexample_matrix(Some(&[c(1.0, 0.0), c(2.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)])).is_err());
    }

    #[test]
    fn balanced_multiples_of_four() {
        let (p4, cfg) = balanced_config(4, 0).unwrap();
        assert_eq!(cfg.status, ConfigStatus::Exact);
        assert_abs_diff_eq!(p4.perimeter(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(cfg.max_deficit, (2.0 - 2.0 * (1.0_f64 / 3.0).sqrt()) / 4.0, epsilon = 1e-12);
        let (_, cfg8) = balanced_config(8, 0).unwrap();
        assert_eq!(cfg8.multiplicities, [2, 2, 2, 2]);
        assert_abs_diff_eq!(8.0 * cfg8.max_deficit, 2.0 - 2.0 * (1.0_f64 / 3.0).sqrt(), epsilon = 1e-10);
        assert!(balanced_config(3, 0).is_err());
    }
}
