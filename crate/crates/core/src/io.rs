//! JSON documents for frames and polygons.
//!
//! Frame: `{"field": "real"|"complex", "n": int, "rows": [...]}` where a real
//! row is `[x, y]` and a complex row is `[[re, im], [re, im]]`.
//! Polygon: `{"dim": 2|3, "edges": [[...], ...], "perimeter": float}`; the
//! perimeter is informational and is re-verified on read.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::frames::{ComplexFrame, Field, Frame, RealFrame};
use crate::polygons::{AnyPolygon, Polygon};

pub const PERIMETER_READ_TOL: f64 = 1e-9;

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RowsDoc {
    Real(Vec<[f64; 2]>),
    Complex(Vec<[[f64; 2]; 2]>),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameDoc {
    field: Field,
    n: usize,
    rows: RowsDoc,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolygonDoc {
    dim: usize,
    edges: Vec<Vec<f64>>,
    perimeter: f64,
}

pub fn frame_to_json(frame: &Frame) -> Result<String> {
    let doc = match frame {
        Frame::Real(f) => FrameDoc { field: Field::Real, n: f.rows().len(), rows: RowsDoc::Real(f.rows().to_vec()) },
        Frame::Complex(f) => FrameDoc {
            field: Field::Complex,
            n: f.rows().len(),
            rows: RowsDoc::Complex(f.rows().iter().map(|r| [[r[0].re, r[0].im], [r[1].re, r[1].im]]).collect()),
        },
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

pub fn frame_from_json(text: &str) -> Result<Frame> {
    let doc: FrameDoc = serde_json::from_str(text)?;
    let frame = match (doc.field, doc.rows) {
        (Field::Real, RowsDoc::Real(rows)) => Frame::Real(RealFrame::from_rows(rows)),
        (Field::Complex, RowsDoc::Complex(rows)) => Frame::Complex(ComplexFrame::from_rows(
            rows.iter().map(|r| [Complex64::new(r[0][0], r[0][1]), Complex64::new(r[1][0], r[1][1])]).collect(),
        )),
        // an empty row list parses as the first untagged variant
        (Field::Complex, RowsDoc::Real(rows)) if rows.is_empty() => Frame::Complex(ComplexFrame::from_rows(Vec::new())),
        (field, _) => return Err(Error::invalid(format!("rows do not match field \"{field}\""))),
    };
    if frame.n() != doc.n {
        return Err(Error::invalid(format!("n = {} but {} rows given", doc.n, frame.n())));
    }
    Ok(frame)
}

fn polygon_doc(p: &AnyPolygon) -> PolygonDoc {
    PolygonDoc { dim: p.dim(), edges: p.edge_vecs(), perimeter: p.perimeter() }
}

pub fn polygon_to_json(p: &AnyPolygon) -> Result<String> {
    Ok(serde_json::to_string_pretty(&polygon_doc(p))?)
}

/// `serialize_with` helper embedding a polygon as its JSON document.
pub fn serialize_polygon<S: Serializer>(p: &AnyPolygon, s: S) -> std::result::Result<S::Ok, S::Error> {
    polygon_doc(p).serialize(s)
}

/// Parses a polygon document. Closure and the recorded perimeter are checked
/// and reported as validation errors.
pub fn polygon_from_json(text: &str) -> Result<AnyPolygon> {
    let doc: PolygonDoc = serde_json::from_str(text)?;
    if let Some(bad) = doc.edges.iter().find(|e| e.len() != doc.dim) {
        return Err(Error::invalid(format!("edge of length {} in a dim-{} polygon", bad.len(), doc.dim)));
    }
    let poly = match doc.dim {
        2 => AnyPolygon::Planar(Polygon::new(doc.edges.iter().map(|e| [e[0], e[1]]).collect())?),
        3 => AnyPolygon::Spatial(Polygon::new(doc.edges.iter().map(|e| [e[0], e[1], e[2]]).collect())?),
        d => return Err(Error::invalid(format!("dim must be 2 or 3, got {d}"))),
    };
    let gap = (poly.perimeter() - doc.perimeter).abs();
    if gap > PERIMETER_READ_TOL {
        return Err(Error::validation(format!(
            "recorded perimeter {} differs from computed {} by {gap:e}",
            doc.perimeter,
            poly.perimeter()
        )));
    }
    Ok(poly)
}

pub fn read_frame(path: &Path) -> Result<Frame> {
    frame_from_json(&std::fs::read_to_string(path)?)
}

pub fn read_polygon(path: &Path) -> Result<AnyPolygon> {
    polygon_from_json(&std::fs::read_to_string(path)?)
}
