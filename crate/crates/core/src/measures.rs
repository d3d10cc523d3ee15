//! Per-instrument shape measurements and the dataset feature matrix.
//!
//! Raw measurements, with `y` growing downward and `T` the line through the
//! two fingerboard-exit corners QR and QL:
//!
//! * `a`, `d` – vertical extent of the right/left waist (AR→BR, AL→BL);
//! * `b`, `e` – vertical extent from `T` down to AR / AL;
//! * `c`, `f` – vertical extent from BR / BL down to the lowest point;
//! * `h1`, `h2` – Euclidean widths BL–BR and AL–AR;
//! * `ell` – vertical extent from the scroll tip down to `T`;
//! * `total` – full vertical extent of the outline;
//! * `sbar[i]` – mean |s| over the body segment `i`.
//!
//! Normalization makes everything dimensionless: lengths divide by `total`,
//! and each segment curvature is multiplied by the segment arc length in
//! pixels (point count times sample spacing), which removes the inverse
//! dependence of mean curvature on segment size. At unit sample spacing this
//! product reduces to mean curvature times point count.

use std::io::{Read, Write};

use thiserror::Error;

use crate::contour::{Contour, Point};
use crate::fmt::sig9;
use crate::geometry::{CurvatureProfile, GeometryError, LandmarkSet};
use crate::ingest::{Metadata, Period};

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error(transparent)]
    Landmark(#[from] GeometryError),
    #[error("normalization failed: {0}")]
    Normalization(String),
    #[error("need at least {needed} records, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("feature CSV: {0}")]
    Csv(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl MeasureError {
    pub fn kind(&self) -> &'static str {
        match self {
            MeasureError::Landmark(e) => e.kind(),
            MeasureError::Normalization(_) => "NormalizationError",
            MeasureError::InsufficientData { .. } => "InsufficientDataError",
            MeasureError::Csv(_) => "CsvError",
            MeasureError::Io(_) => "IoError",
        }
    }
}

/// Raw pixel-unit measurements of one outline.
#[derive(Debug, Clone, PartialEq)]
pub struct RawMeasures {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
    pub h1: f64,
    pub h2: f64,
    pub ell: f64,
    pub total: f64,
    pub sbar: [f64; 6],
    pub n_seg: [usize; 6],
    /// Arc length per resampled point (perimeter / point count).
    pub spacing: f64,
}

/// The normalized feature vector: nine dimensionless length ratios, the
/// retained absolute length in pixels, and six dimensionless segment
/// curvatures.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FeatureVector {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
    pub h1: f64,
    pub h2: f64,
    pub ell: f64,
    /// Absolute vertical extent in pixels; excluded from analysis matrices
    /// by default since every other length is expressed relative to it.
    pub total: f64,
    pub s: [f64; 6],
}

/// Reference band for the normalized waist extent `a` observed on
/// historical Stradivari instruments. Shipped as a documented sanity range
/// for real photographs; the pipeline never asserts it.
pub const STRADIVARI_A_BAND: (f64, f64) = (0.21, 0.26);

impl FeatureVector {
    /// Column labels of the analysis matrix, in CSV order.
    pub fn analysis_labels(include_total: bool) -> Vec<String> {
        let mut labels: Vec<String> =
            ["a", "b", "c", "d", "e", "f", "h1", "h2", "ell"].iter().map(|s| s.to_string()).collect();
        if include_total {
            labels.push("L".to_string());
        }
        labels.extend((1..=6).map(|i| format!("s{i}")));
        labels
    }

    pub fn analysis_row(&self, include_total: bool) -> Vec<f64> {
        let mut row = vec![self.a, self.b, self.c, self.d, self.e, self.f, self.h1, self.h2, self.ell];
        if include_total {
            row.push(self.total);
        }
        row.extend_from_slice(&self.s);
        row
    }

    /// Mean of the six normalized segment curvatures.
    pub fn s_mean(&self) -> f64 {
        self.s.iter().sum::<f64>() / 6.0
    }
}

/// One instrument: its feature vector plus catalog metadata.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct InstrumentRecord {
    pub meta: Metadata,
    pub features: FeatureVector,
}

impl InstrumentRecord {
    pub fn id(&self) -> &str {
        &self.meta.id
    }
}

pub(crate) struct LandmarkPoints {
    pub qr: Point,
    pub ar: Point,
    pub br: Point,
    pub bottom: Point,
    pub bl: Point,
    pub al: Point,
    pub ql: Point,
}

/// Length measurements shared between the extraction path and the synthetic
/// ground truth: `[a, b, c, d, e, f, h1, h2, ell, total]`.
pub(crate) fn lengths_from_points(lp: &LandmarkPoints, tip: Point) -> [f64; 10] {
    // The body-top line through QR and QL, evaluated at a given x.
    let t_at = |x: f64| -> f64 {
        let dx = lp.ql.x - lp.qr.x;
        if dx.abs() < 1e-9 {
            0.5 * (lp.qr.y + lp.ql.y)
        } else {
            lp.qr.y + (x - lp.qr.x) * (lp.ql.y - lp.qr.y) / dx
        }
    };
    let a = lp.br.y - lp.ar.y;
    let d = lp.bl.y - lp.al.y;
    let b = lp.ar.y - t_at(lp.ar.x);
    let e = lp.al.y - t_at(lp.al.x);
    let c = lp.bottom.y - lp.br.y;
    let f = lp.bottom.y - lp.bl.y;
    let h1 = lp.bl.distance(lp.br);
    let h2 = lp.al.distance(lp.ar);
    let ell = t_at(tip.x) - tip.y;
    let total = lp.bottom.y - tip.y;
    [a, b, c, d, e, f, h1, h2, ell, total]
}

/// Measure one outline given its landmark set and curvature profile.
pub fn extract_raw(
    c: &Contour,
    profile: &CurvatureProfile,
    lm: &LandmarkSet,
) -> Result<RawMeasures, MeasureError> {
    lm.validate()?;
    let n = c.points.len();
    if profile.len() != n || lm.n_points != n {
        return Err(GeometryError::ProfileMismatch { profile: profile.len(), contour: n }.into());
    }

    let lp = LandmarkPoints {
        qr: c.points[lm.qr],
        ar: c.points[lm.ar],
        br: c.points[lm.br],
        bottom: c.points[lm.bottom],
        bl: c.points[lm.bl],
        al: c.points[lm.al],
        ql: c.points[lm.ql],
    };
    let tip = c.points[c.top_index()];
    let [a, b, c_, d, e, f, h1, h2, ell, total] = lengths_from_points(&lp, tip);
    if [a, b, c_, d, e, f, h1, h2, ell, total].iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(GeometryError::LandmarkOrder.into());
    }

    let mut sbar = [0.0; 6];
    let mut n_seg = [0usize; 6];
    for (k, seg) in lm.segments.iter().enumerate() {
        if seg.len == 0 {
            return Err(GeometryError::LandmarkOrder.into());
        }
        n_seg[k] = seg.len;
        sbar[k] = seg.indices(n).map(|i| profile.abs_s[i]).sum::<f64>() / seg.len as f64;
    }

    Ok(RawMeasures {
        a,
        b,
        c: c_,
        d,
        e,
        f,
        h1,
        h2,
        ell,
        total,
        sbar,
        n_seg,
        spacing: c.perimeter() / n as f64,
    })
}

/// Normalize raw measurements into the dimensionless feature vector.
pub fn normalize(raw: &RawMeasures) -> Result<FeatureVector, MeasureError> {
    if !(raw.total.is_finite() && raw.total > 0.0) {
        return Err(MeasureError::Normalization(format!("total length {} must be > 0", raw.total)));
    }
    if raw.n_seg.contains(&0) {
        return Err(MeasureError::Normalization("empty outline segment".into()));
    }
    let mut s = [0.0; 6];
    for (v, (&sbar, &count)) in s.iter_mut().zip(raw.sbar.iter().zip(&raw.n_seg)) {
        *v = sbar * count as f64 * raw.spacing;
    }
    Ok(FeatureVector {
        a: raw.a / raw.total,
        b: raw.b / raw.total,
        c: raw.c / raw.total,
        d: raw.d / raw.total,
        e: raw.e / raw.total,
        f: raw.f / raw.total,
        h1: raw.h1 / raw.total,
        h2: raw.h2 / raw.total,
        ell: raw.ell / raw.total,
        total: raw.total,
        s,
    })
}

/// Column-standardized analysis matrix. Zero-variance columns are dropped
/// (their labels retained in `dropped`) so that degenerate datasets remain
/// processable.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub labels: Vec<String>,
    pub n_rows: usize,
    values: Vec<f64>, // row-major, n_rows x labels.len()
    pub dropped: Vec<String>,
}

impl FeatureMatrix {
    pub fn n_cols(&self) -> usize {
        self.labels.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.n_cols();
        &self.values[i * p..(i + 1) * p]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_cols() + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows).map(|i| self.get(i, j)).collect()
    }

    /// Build a matrix directly from rows (no standardization); test and
    /// analysis helper.
    pub fn from_rows(labels: Vec<String>, rows: &[Vec<f64>]) -> Self {
        let mut values = Vec::with_capacity(rows.len() * labels.len());
        for r in rows {
            assert_eq!(r.len(), labels.len());
            values.extend_from_slice(r);
        }
        FeatureMatrix { labels, n_rows: rows.len(), values, dropped: Vec::new() }
    }
}

/// Assemble the standardized feature matrix from records, in input order.
/// Each retained column is z-scored to mean 0 and unit population variance
/// (divisor `n`), so a two-value column standardizes to exactly ±1.
pub fn feature_matrix(
    records: &[InstrumentRecord],
    include_total: bool,
) -> Result<FeatureMatrix, MeasureError> {
    if records.len() < 2 {
        return Err(MeasureError::InsufficientData { needed: 2, got: records.len() });
    }
    let labels = FeatureVector::analysis_labels(include_total);
    let rows: Vec<Vec<f64>> = records.iter().map(|r| r.features.analysis_row(include_total)).collect();
    let n = rows.len();
    let p = labels.len();

    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    let mut stats = Vec::new(); // (mean, std) per kept column
    for j in 0..p {
        let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n as f64;
        let var = rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n as f64;
        let std = var.sqrt();
        if std > 0.0 && std.is_finite() {
            kept.push(j);
            stats.push((mean, std));
        } else {
            dropped.push(labels[j].clone());
        }
    }

    let mut values = Vec::with_capacity(n * kept.len());
    for r in &rows {
        for (k, &j) in kept.iter().enumerate() {
            let (mean, std) = stats[k];
            values.push((r[j] - mean) / std);
        }
    }
    Ok(FeatureMatrix {
        labels: kept.iter().map(|&j| labels[j].clone()).collect(),
        n_rows: n,
        values,
        dropped,
    })
}

const FEATURE_HEADER: [&str; 21] = [
    "id", "a", "b", "c", "d", "e", "f", "h1", "h2", "ell", "L", "s1", "s2", "s3", "s4", "s5",
    "s6", "maker", "country", "year", "period",
];

/// Write the per-instrument feature CSV (normalized values, nine
/// significant digits, missing metadata as empty fields).
pub fn write_features_csv<W: Write>(writer: W, records: &[InstrumentRecord]) -> Result<(), MeasureError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(FEATURE_HEADER).map_err(|e| MeasureError::Csv(e.to_string()))?;
    for r in records {
        let fv = &r.features;
        let mut fields: Vec<String> = vec![r.meta.id.clone()];
        for v in [fv.a, fv.b, fv.c, fv.d, fv.e, fv.f, fv.h1, fv.h2, fv.ell, fv.total] {
            fields.push(sig9(v));
        }
        for v in fv.s {
            fields.push(sig9(v));
        }
        fields.push(r.meta.maker.clone().unwrap_or_default());
        fields.push(r.meta.country.clone().unwrap_or_default());
        fields.push(r.meta.year.map(|y| y.to_string()).unwrap_or_default());
        fields.push(r.meta.period.map(|p| p.to_string()).unwrap_or_default());
        w.write_record(&fields).map_err(|e| MeasureError::Csv(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Read the feature CSV back into instrument records.
pub fn read_features_csv<R: Read>(reader: R) -> Result<Vec<InstrumentRecord>, MeasureError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    {
        let headers = rdr.headers().map_err(|e| MeasureError::Csv(e.to_string()))?;
        let got: Vec<&str> = headers.iter().map(|h| h.trim()).collect();
        if got != FEATURE_HEADER {
            return Err(MeasureError::Csv(format!("unexpected header `{}`", got.join(","))));
        }
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| MeasureError::Csv(e.to_string()))?;
        let num = |k: usize| -> Result<f64, MeasureError> {
            rec.get(k)
                .unwrap_or("")
                .trim()
                .parse()
                .map_err(|_| MeasureError::Csv(format!("row {}: bad number in column {k}", i + 2)))
        };
        let text = |k: usize| -> Option<String> {
            let s = rec.get(k).unwrap_or("").trim();
            if s.is_empty() {
                None
            } else {
                Some(s.to_string())
            }
        };
        let mut s = [0.0; 6];
        for (k, v) in s.iter_mut().enumerate() {
            *v = num(11 + k)?;
        }
        let year = match text(19) {
            Some(y) => Some(
                y.parse::<i32>()
                    .map_err(|_| MeasureError::Csv(format!("row {}: bad year `{y}`", i + 2)))?,
            ),
            None => None,
        };
        let period = match text(20) {
            Some(p) => Some(
                p.parse::<Period>().map_err(|e| MeasureError::Csv(format!("row {}: {e}", i + 2)))?,
            ),
            None => None,
        };
        out.push(InstrumentRecord {
            meta: Metadata {
                id: rec.get(0).unwrap_or("").trim().to_string(),
                maker: text(17),
                country: text(18),
                year,
                period,
            },
            features: FeatureVector {
                a: num(1)?,
                b: num(2)?,
                c: num(3)?,
                d: num(4)?,
                e: num(5)?,
                f: num(6)?,
                h1: num(7)?,
                h2: num(8)?,
                ell: num(9)?,
                total: num(10)?,
                s,
            },
        });
    }
    Ok(out)
}

pub fn read_features_file(path: &std::path::Path) -> Result<Vec<InstrumentRecord>, MeasureError> {
    let f = std::fs::File::open(path)?;
    read_features_csv(std::io::BufReader::new(f))
}
