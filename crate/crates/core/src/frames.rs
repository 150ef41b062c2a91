//! Orthonormal `n x 2` frames over the reals and the complex numbers.
//!
//! A frame spans a 2-dimensional subspace of `F^n`. The coordinate subspace
//! indexed by a row pair `(i, j)` deviates from it by the largest principal
//! angle, which is `arccos` of the least singular value of the `2 x 2`
//! submatrix built from rows `i` and `j`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance on the column Gram residuals of a valid frame.
pub const GRAM_TOL: f64 = 1e-12;

/// Two values closer than this are treated as tied when picking an argmax.
pub const TIE_TOL: f64 = 1e-12;

/// Scalar field of a frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

impl std::fmt::Display for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Field::Real => "real",
            Field::Complex => "complex",
        })
    }
}

/// Real `n x 2` matrix whose rows are vectors of the plane.
#[derive(Clone, Debug, PartialEq)]
pub struct RealFrame {
    rows: Vec<[f64; 2]>,
}

/// Complex `n x 2` matrix with rows `(u_i, v_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexFrame {
    rows: Vec<[Complex64; 2]>,
}

/// Either kind of frame, as read from or written to a frame file.
#[derive(Clone, Debug, PartialEq)]
pub enum Frame {
    Real(RealFrame),
    Complex(ComplexFrame),
}

/// One named Gram residual.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Residual {
    pub name: &'static str,
    pub value: f64,
}

/// Outcome of [`TwoFrame::validate`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrameValidation {
    pub valid: bool,
    pub residuals: Vec<Residual>,
}

impl FrameValidation {
    fn from_residuals(n: usize, residuals: Vec<Residual>) -> Self {
        let valid = n >= 2 && residuals.iter().all(|r| r.value <= GRAM_TOL);
        FrameValidation { valid, residuals }
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|r| r.value).fold(0.0, f64::max)
    }
}

/// Singular values of the `2 x 2` submatrix on rows `i` and `j`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubmatrixConditioning {
    pub i: usize,
    pub j: usize,
    pub sigma_min: f64,
    pub sigma_max: f64,
}

/// Squared Frobenius norm and squared determinant modulus of a `2 x 2` block.
#[derive(Clone, Copy, Debug)]
pub struct BlockInvariants {
    pub frobenius_sq: f64,
    pub det_abs_sq: f64,
}

/// Behaviour shared by real and complex frames.
pub trait TwoFrame {
    fn n(&self) -> usize;
    fn field(&self) -> Field;
    /// Invariants of the `2 x 2` submatrix on rows `i`, `j` (unchecked indices).
    fn block_invariants(&self, i: usize, j: usize) -> BlockInvariants;
    /// Column Gram residuals against the identity.
    fn validate(&self) -> FrameValidation;
    /// Squared Euclidean norm of row `i`.
    fn row_norm_sq(&self, i: usize) -> f64;
}

impl RealFrame {
    /// Wraps rows without checking orthonormality; see [`TwoFrame::validate`].
    pub fn from_rows(rows: Vec<[f64; 2]>) -> Self {
        RealFrame { rows }
    }

    pub fn rows(&self) -> &[[f64; 2]] {
        &self.rows
    }

    /// Right multiplication `A Q` by a `2 x 2` matrix given row-major.
    pub fn transform(&self, q: [[f64; 2]; 2]) -> RealFrame {
        let rows =
            self.rows.iter().map(|r| [r[0] * q[0][0] + r[1] * q[1][0], r[0] * q[0][1] + r[1] * q[1][1]]).collect();
        RealFrame { rows }
    }

    /// Returns the frame with its rows reordered so that row `k` is old row `perm[k]`.
    pub fn permute_rows(&self, perm: &[usize]) -> RealFrame {
        RealFrame { rows: perm.iter().map(|&k| self.rows[k]).collect() }
    }
}

impl ComplexFrame {
    /// Wraps rows without checking orthonormality; see [`TwoFrame::validate`].
    pub fn from_rows(rows: Vec<[Complex64; 2]>) -> Self {
        ComplexFrame { rows }
    }

    pub fn rows(&self) -> &[[Complex64; 2]] {
        &self.rows
    }

    /// Right multiplication `A Q` by a `2 x 2` complex matrix given row-major.
    pub fn transform(&self, q: [[Complex64; 2]; 2]) -> ComplexFrame {
        let rows =
            self.rows.iter().map(|r| [r[0] * q[0][0] + r[1] * q[1][0], r[0] * q[0][1] + r[1] * q[1][1]]).collect();
        ComplexFrame { rows }
    }

    /// Multiplies row `k` by `phases[k]` (left multiplication by a diagonal matrix).
    pub fn scale_rows(&self, phases: &[Complex64]) -> ComplexFrame {
        let rows = self.rows.iter().zip(phases).map(|(r, &w)| [w * r[0], w * r[1]]).collect();
        ComplexFrame { rows }
    }

    pub fn permute_rows(&self, perm: &[usize]) -> ComplexFrame {
        ComplexFrame { rows: perm.iter().map(|&k| self.rows[k]).collect() }
    }
}

impl TwoFrame for RealFrame {
    fn n(&self) -> usize {
        self.rows.len()
    }

    fn field(&self) -> Field {
        Field::Real
    }

    fn block_invariants(&self, i: usize, j: usize) -> BlockInvariants {
        let (a, b) = (self.rows[i], self.rows[j]);
        let det = a[0] * b[1] - a[1] * b[0];
        BlockInvariants { frobenius_sq: a[0] * a[0] + a[1] * a[1] + b[0] * b[0] + b[1] * b[1], det_abs_sq: det * det }
    }

    fn validate(&self) -> FrameValidation {
        let (mut g11, mut g22, mut g12) = (0.0, 0.0, 0.0);
        for r in &self.rows {
            g11 += r[0] * r[0];
            g22 += r[1] * r[1];
            g12 += r[0] * r[1];
        }
        FrameValidation::from_residuals(
            self.n(),
            vec![
                Residual { name: "gram_11", value: (g11 - 1.0).abs() },
                Residual { name: "gram_22", value: (g22 - 1.0).abs() },
                Residual { name: "gram_12", value: g12.abs() },
            ],
        )
    }

    fn row_norm_sq(&self, i: usize) -> f64 {
        let r = self.rows[i];
        r[0] * r[0] + r[1] * r[1]
    }
}

impl TwoFrame for ComplexFrame {
    fn n(&self) -> usize {
        self.rows.len()
    }

    fn field(&self) -> Field {
        Field::Complex
    }

    fn block_invariants(&self, i: usize, j: usize) -> BlockInvariants {
        let (a, b) = (self.rows[i], self.rows[j]);
        let det = a[0] * b[1] - a[1] * b[0];
        BlockInvariants {
            frobenius_sq: a[0].norm_sqr() + a[1].norm_sqr() + b[0].norm_sqr() + b[1].norm_sqr(),
            det_abs_sq: det.norm_sqr(),
        }
    }

    fn validate(&self) -> FrameValidation {
        let (mut g11, mut g22) = (0.0, 0.0);
        let mut g12 = Complex64::new(0.0, 0.0);
        for r in &self.rows {
            g11 += r[0].norm_sqr();
            g22 += r[1].norm_sqr();
            g12 += r[0].conj() * r[1];
        }
        FrameValidation::from_residuals(
            self.n(),
            vec![
                Residual { name: "gram_11", value: (g11 - 1.0).abs() },
                Residual { name: "gram_22", value: (g22 - 1.0).abs() },
                Residual { name: "gram_12", value: g12.norm() },
            ],
        )
    }

    fn row_norm_sq(&self, i: usize) -> f64 {
        self.rows[i][0].norm_sqr() + self.rows[i][1].norm_sqr()
    }
}

impl Frame {
    pub fn as_dyn(&self) -> &dyn TwoFrame {
        match self {
            Frame::Real(f) => f,
            Frame::Complex(f) => f,
        }
    }

    pub fn field(&self) -> Field {
        self.as_dyn().field()
    }

    pub fn n(&self) -> usize {
        self.as_dyn().n()
    }
}

/// Checks the column Gram matrix of `frame` against the identity.
pub fn validate_frame<F: TwoFrame + ?Sized>(frame: &F) -> FrameValidation {
    frame.validate()
}

/// Samples a frame from the orthogonally (unitarily) invariant distribution.
///
/// Gaussian entries are orthonormalized column-wise by modified Gram-Schmidt
/// with one re-orthogonalization pass. The output is a deterministic function
/// of `(n, field, seed)`.
pub fn random_frame(n: usize, field: Field, seed: u64) -> Result<Frame> {
    if n < 2 {
        return Err(Error::invalid("n must be ≥ 2"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gauss = || -> f64 { StandardNormal.sample(&mut rng) };
    Ok(match field {
        Field::Real => {
            let mut c0: Vec<Complex64> = (0..n).map(|_| Complex64::new(gauss(), 0.0)).collect();
            let mut c1: Vec<Complex64> = (0..n).map(|_| Complex64::new(gauss(), 0.0)).collect();
            orthonormalize(&mut c0, &mut c1);
            Frame::Real(RealFrame::from_rows(c0.iter().zip(&c1).map(|(a, b)| [a.re, b.re]).collect()))
        }
        Field::Complex => {
            let mut c0: Vec<Complex64> = (0..n).map(|_| Complex64::new(gauss(), gauss())).collect();
            let mut c1: Vec<Complex64> = (0..n).map(|_| Complex64::new(gauss(), gauss())).collect();
            orthonormalize(&mut c0, &mut c1);
            Frame::Complex(ComplexFrame::from_rows(c0.iter().zip(&c1).map(|(&a, &b)| [a, b]).collect()))
        }
    })
}

fn orthonormalize(c0: &mut [Complex64], c1: &mut [Complex64]) {
    fn normalize(c: &mut [Complex64]) {
        let norm = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        c.iter_mut().for_each(|z| *z /= norm);
    }
    normalize(c0);
    for _ in 0..2 {
        let proj: Complex64 = c0.iter().zip(c1.iter()).map(|(q, x)| q.conj() * x).sum();
        c1.iter_mut().zip(c0.iter()).for_each(|(x, q)| *x -= proj * q);
    }
    normalize(c1);
}

fn check_pair(n: usize, i: usize, j: usize) -> Result<()> {
    if i == j {
        return Err(Error::invalid(format!("row indices must differ, got ({i}, {j})")));
    }
    if i >= n || j >= n {
        return Err(Error::invalid(format!("row pair ({i}, {j}) out of range for n = {n}")));
    }
    Ok(())
}

/// Closed-form singular values of the `2 x 2` submatrix on rows `i`, `j`.
///
/// With `f = ||M||_F^2` and `d = |det M|^2` the squared singular values are
/// `(f ± sqrt(f^2 - 4d)) / 2`. The small one is evaluated as `d / sigma_max^2`,
/// which is the same quantity without the cancellation.
pub fn submatrix_sigma_min<F: TwoFrame + ?Sized>(frame: &F, i: usize, j: usize) -> Result<SubmatrixConditioning> {
    check_pair(frame.n(), i, j)?;
    Ok(conditioning_unchecked(frame, i, j))
}

fn conditioning_unchecked<F: TwoFrame + ?Sized>(frame: &F, i: usize, j: usize) -> SubmatrixConditioning {
    let BlockInvariants { frobenius_sq, det_abs_sq } = frame.block_invariants(i, j);
    let disc = (frobenius_sq * frobenius_sq - 4.0 * det_abs_sq).max(0.0).sqrt();
    let max_sq = 0.5 * (frobenius_sq + disc);
    let min_sq = if max_sq > 0.0 { det_abs_sq / max_sq } else { 0.0 };
    SubmatrixConditioning { i, j, sigma_min: min_sq.sqrt(), sigma_max: max_sq.sqrt() }
}

/// Pair of rows whose submatrix has the largest least singular value.
///
/// Ties (within [`TIE_TOL`]) go to the lexicographically smallest pair.
pub fn best_submatrix<F: TwoFrame + ?Sized>(frame: &F) -> Result<SubmatrixConditioning> {
    let n = frame.n();
    if n < 2 {
        return Err(Error::invalid("n must be ≥ 2"));
    }
    let mut best = conditioning_unchecked(frame, 0, 1);
    for i in 0..n {
        for j in (i + 1)..n {
            let c = conditioning_unchecked(frame, i, j);
            if c.sigma_min > best.sigma_min + TIE_TOL {
                best = c;
            }
        }
    }
    Ok(best)
}

/// Every pairwise conditioning, in lexicographic pair order.
pub fn all_pairs<F: TwoFrame + ?Sized>(frame: &F) -> Vec<SubmatrixConditioning> {
    let n = frame.n();
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            out.push(conditioning_unchecked(frame, i, j));
        }
    }
    out
}

/// Largest principal angle between the frame's span and coordinate plane `(i, j)`.
pub fn largest_principal_angle<F: TwoFrame + ?Sized>(frame: &F, i: usize, j: usize) -> Result<f64> {
    let c = submatrix_sigma_min(frame, i, j)?;
    Ok(c.sigma_min.clamp(0.0, 1.0).acos())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn identity() -> RealFrame {
        RealFrame::from_rows(vec![[1.0, 0.0], [0.0, 1.0]])
    }

    #[test]
    fn identity_is_valid() {
        let v = validate_frame(&identity());
        assert!(v.valid);
        assert_eq!(v.max_residual(), 0.0);
    }

    #[test]
    fn repeated_row_is_invalid() {
        let f = RealFrame::from_rows(vec![[1.0, 0.0], [1.0, 0.0]]);
        let v = validate_frame(&f);
        assert!(!v.valid);
        assert_eq!(v.residuals[0].value, 1.0);
    }

    #[test]
    fn random_frames_are_valid_and_deterministic() {
        let a = random_frame(5, Field::Real, 1).unwrap();
        let b = random_frame(5, Field::Real, 1).unwrap();
        assert_eq!(a, b);
        assert!(a.as_dyn().validate().valid);
        let c = random_frame(8, Field::Complex, 7).unwrap();
        assert!(c.as_dyn().validate().valid);
        assert!(matches!(random_frame(1, Field::Real, 0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn identity_sigma_and_angle() {
        let c = submatrix_sigma_min(&identity(), 0, 1).unwrap();
        assert_abs_diff_eq!(c.sigma_min, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(largest_principal_angle(&identity(), 0, 1).unwrap(), 0.0, epsilon = 1e-7);
    }

    #[test]
    fn zero_rows_give_right_angle() {
        let f = RealFrame::from_rows(vec![[1.0, 0.0], [0.0, 1.0], [0.0, 0.0], [0.0, 0.0]]);
        let angle = largest_principal_angle(&f, 2, 3).unwrap();
        assert_abs_diff_eq!(angle, std::f64::consts::FRAC_PI_2, epsilon = 1e-15);
        let best = best_submatrix(&f).unwrap();
        assert_eq!((best.i, best.j), (0, 1));
        assert_abs_diff_eq!(best.sigma_min, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn bad_pairs_rejected() {
        let f = identity();
        assert!(matches!(submatrix_sigma_min(&f, 0, 0), Err(Error::InvalidArgument(_))));
        assert!(matches!(submatrix_sigma_min(&f, 0, 2), Err(Error::InvalidArgument(_))));
        assert!(largest_principal_angle(&f, 1, 1).is_err());
    }

    #[test]
    fn singular_values_split_frobenius_norm() {
        let Frame::Complex(f) = random_frame(9, Field::Complex, 3).unwrap() else { unreachable!() };
        for c in all_pairs(&f) {
            let inv = f.block_invariants(c.i, c.j);
            assert!(0.0 <= c.sigma_min && c.sigma_min <= c.sigma_max);
            assert_abs_diff_eq!(c.sigma_min.powi(2) + c.sigma_max.powi(2), inv.frobenius_sq, epsilon = 1e-12);
        }
    }
}
