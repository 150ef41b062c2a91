//! C ABI over `polygap`.
//!
//! Objects are opaque heap handles released with the matching `*_free`.
//! Every fallible call returns a [`PolygapStatus`]; on failure the message is
//! available from [`polygap_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use polygap::constructions::counterexample_matrix;
use polygap::frames::submatrix_sigma_min;
use polygap::{best_submatrix, estimate_bn2, hopf_map, random_frame, square_map};
use polygap::{AnyPolygon, Error, Field, Frame, OptimizationReport, OptimizerConfig, Space};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolygapStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ValidationFailed = 3,
    Internal = 4,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolygapField {
    Real = 0,
    Complex = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolygapSpace {
    Planar = 0,
    Spatial = 1,
}

pub struct PolygapFrame(Frame);

pub struct PolygapPolygon(AnyPolygon);

pub struct PolygapReport(OptimizationReport);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> PolygapStatus {
    match err {
        Error::Validation(_) => PolygapStatus::ValidationFailed,
        Error::InvalidArgument(_) => PolygapStatus::InvalidArgument,
        _ => PolygapStatus::Internal,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (PolygapStatus, String)>) -> PolygapStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            PolygapStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            PolygapStatus::Internal
        }
    }
}

trait IntoFfi<T> {
    fn ffi(self) -> Result<T, (PolygapStatus, String)>;
}

impl<T> IntoFfi<T> for polygap::Result<T> {
    fn ffi(self) -> Result<T, (PolygapStatus, String)> {
        self.map_err(|e| (status_of(&e), e.to_string()))
    }
}

fn null(name: &str) -> (PolygapStatus, String) {
    (PolygapStatus::NullPointer, format!("{name} is null"))
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, (PolygapStatus, String)> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn write<T>(out: *mut T, value: T, name: &str) -> Result<(), (PolygapStatus, String)> {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(value);
    Ok(())
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn polygap_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `out` must be valid for writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn polygap_frame_random(
    n: usize,
    field: PolygapField,
    seed: u64,
    out: *mut *mut PolygapFrame,
) -> PolygapStatus {
    guard(|| {
        let field = match field {
            PolygapField::Real => Field::Real,
            PolygapField::Complex => Field::Complex,
        };
        let frame = random_frame(n, field, seed).ffi()?;
        write(out, boxed(PolygapFrame(frame)), "out")
    })
}

/// The `4 x 2` complex counterexample frame.
///
/// # Safety
/// `out` must be valid for writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn polygap_frame_counterexample(out: *mut *mut PolygapFrame) -> PolygapStatus {
    guard(|| {
        let frame = counterexample_matrix(None).ffi()?;
        write(out, boxed(PolygapFrame(Frame::Complex(frame))), "out")
    })
}

/// # Safety
/// `frame` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn polygap_frame_free(frame: *mut PolygapFrame) {
    if !frame.is_null() {
        drop(Box::from_raw(frame));
    }
}

/// Number of rows, or 0 for a null handle.
///
/// # Safety
/// `frame` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn polygap_frame_n(frame: *const PolygapFrame) -> usize {
    frame.as_ref().map_or(0, |f| f.0.n())
}

/// # Safety
/// `frame` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn polygap_frame_sigma_min(
    frame: *const PolygapFrame,
    i: usize,
    j: usize,
    out: *mut f64,
) -> PolygapStatus {
    guard(|| {
        let frame = deref(frame, "frame")?;
        let c = submatrix_sigma_min(frame.0.as_dyn(), i, j).ffi()?;
        write(out, c.sigma_min, "out")
    })
}

/// Best-conditioned row pair and its least singular value.
///
/// # Safety
/// `frame` must be a live handle; the out pointers must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn polygap_frame_best_submatrix(
    frame: *const PolygapFrame,
    out_i: *mut usize,
    out_j: *mut usize,
    out_sigma_min: *mut f64,
) -> PolygapStatus {
    guard(|| {
        let frame = deref(frame, "frame")?;
        if out_i.is_null() || out_j.is_null() {
            return Err(null("out_i/out_j"));
        }
        let c = best_submatrix(frame.0.as_dyn()).ffi()?;
        write(out_sigma_min, c.sigma_min, "out_sigma_min")?;
        out_i.write(c.i);
        out_j.write(c.j);
        Ok(())
    })
}

/// Polygon of a frame: planar for real frames, spatial for complex ones.
///
/// # Safety
/// `frame` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn polygap_frame_to_polygon(
    frame: *const PolygapFrame,
    out: *mut *mut PolygapPolygon,
) -> PolygapStatus {
    guard(|| {
        let frame = deref(frame, "frame")?;
        let poly = match &frame.0 {
            Frame::Real(f) => AnyPolygon::Planar(square_map(f).ffi()?),
            Frame::Complex(f) => AnyPolygon::Spatial(hopf_map(f).ffi()?),
        };
        write(out, boxed(PolygapPolygon(poly)), "out")
    })
}

/// # Safety
/// `polygon` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn polygap_polygon_free(polygon: *mut PolygapPolygon) {
    if !polygon.is_null() {
        drop(Box::from_raw(polygon));
    }
}

/// Number of edges, or 0 for a null handle.
///
/// # Safety
/// `polygon` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn polygap_polygon_n(polygon: *const PolygapPolygon) -> usize {
    polygon.as_ref().map_or(0, |p| p.0.n())
}

/// Ambient dimension (2 or 3), or 0 for a null handle.
///
/// # Safety
/// `polygon` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn polygap_polygon_dim(polygon: *const PolygapPolygon) -> usize {
    polygon.as_ref().map_or(0, |p| p.0.dim())
}

/// # Safety
/// `polygon` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn polygap_polygon_perimeter(polygon: *const PolygapPolygon, out: *mut f64) -> PolygapStatus {
    guard(|| {
        let p = deref(polygon, "polygon")?;
        write(out, p.0.perimeter(), "out")
    })
}

/// Largest pair deficit and the pair attaining it.
///
/// # Safety
/// `polygon` must be a live handle; the out pointers must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn polygap_polygon_max_pair_deficit(
    polygon: *const PolygapPolygon,
    out_value: *mut f64,
    out_i: *mut usize,
    out_j: *mut usize,
) -> PolygapStatus {
    guard(|| {
        let p = deref(polygon, "polygon")?;
        if out_i.is_null() || out_j.is_null() {
            return Err(null("out_i/out_j"));
        }
        let (value, i, j) = p.0.max_pair_deficit();
        write(out_value, value, "out_value")?;
        out_i.write(i);
        out_j.write(j);
        Ok(())
    })
}

/// Copies the edges row-major into `buf`, which must hold `n * dim` values.
///
/// # Safety
/// `polygon` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn polygap_polygon_edges(
    polygon: *const PolygapPolygon,
    buf: *mut f64,
    len: usize,
) -> PolygapStatus {
    guard(|| {
        let p = deref(polygon, "polygon")?;
        let flat: Vec<f64> = p.0.edge_vecs().into_iter().flatten().collect();
        if len < flat.len() {
            return Err((PolygapStatus::InvalidArgument, format!("buffer holds {len} values, {} needed", flat.len())));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(flat.as_ptr(), buf, flat.len());
        Ok(())
    })
}

/// Runs the multistart estimate of `B_n^2`. `restarts` of 0 keeps the default.
///
/// # Safety
/// `out` must be valid for writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn polygap_estimate_bn2(
    n: usize,
    space: PolygapSpace,
    restarts: usize,
    seed: u64,
    out: *mut *mut PolygapReport,
) -> PolygapStatus {
    guard(|| {
        let space = match space {
            PolygapSpace::Planar => Space::Planar,
            PolygapSpace::Spatial => Space::Spatial,
        };
        let mut config = OptimizerConfig::new(n, space).with_seed(seed);
        if restarts > 0 {
            config = config.with_restarts(restarts);
        }
        let report = estimate_bn2(&config).ffi()?;
        write(out, boxed(PolygapReport(report)), "out")
    })
}

/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn polygap_report_free(report: *mut PolygapReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Best max pair deficit at unit perimeter, or NaN for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn polygap_report_best_value(report: *const PolygapReport) -> f64 {
    report.as_ref().map_or(f64::NAN, |r| r.0.best_value)
}

/// Copy of the certificate polygon, owned by the caller.
///
/// # Safety
/// `report` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn polygap_report_certificate(
    report: *const PolygapReport,
    out: *mut *mut PolygapPolygon,
) -> PolygapStatus {
    guard(|| {
        let r = deref(report, "report")?;
        write(out, boxed(PolygapPolygon(r.0.certificate.clone())), "out")
    })
}
