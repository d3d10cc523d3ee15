//! Dataset ingestion: image decoding, binarization, boundary tracing and
//! metadata handling.
//!
//! Input images are museum-style photographs of upright instruments on a
//! contrasting background. The module decodes PGM (P2/P5) and PNG files,
//! thresholds them (Otsu by default), and traces the outer boundary of the
//! largest foreground component into a [`Contour`]. Interior holes such as
//! soundholes are ignored; only the outer outline feeds the measurements.

mod image_io;
mod trace;

pub use image_io::write_pgm;
pub use trace::trace_contour;

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contour::{Contour, Point};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("unreadable file: {0}")]
    Io(#[from] std::io::Error),
    #[error("unsupported or malformed image: {0}")]
    Format(String),
    #[error("image has a single intensity; cannot binarize")]
    DegenerateImage,
    #[error("no foreground component with at least {MIN_COMPONENT_PIXELS} pixels")]
    EmptyMask,
    #[error("duplicate instrument id `{0}`")]
    DuplicateId(String),
    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },
}

impl IngestError {
    /// Stable machine-readable error kind, used in run manifests.
    pub fn kind(&self) -> &'static str {
        match self {
            IngestError::Io(_) => "IoError",
            IngestError::Format(_) => "FormatError",
            IngestError::DegenerateImage => "DegenerateImageError",
            IngestError::EmptyMask => "EmptyMaskError",
            IngestError::DuplicateId(_) => "DuplicateIdError",
            IngestError::Parse { .. } => "ParseError",
        }
    }
}

/// Minimum pixel count for a foreground component to qualify for tracing.
pub const MIN_COMPONENT_PIXELS: usize = 64;

/// 8-bit grayscale image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl RasterImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, IngestError> {
        if width == 0 || height == 0 || pixels.len() != width * height {
            return Err(IngestError::Format(format!(
                "pixel buffer of {} does not match {width}x{height}",
                pixels.len()
            )));
        }
        Ok(Self { width, height, pixels })
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    /// Photometric inversion (`v -> 255 - v`).
    pub fn inverted(&self) -> RasterImage {
        RasterImage {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&v| 255 - v).collect(),
        }
    }
}

/// Boolean foreground mask, row-major, aligned with its source image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    pub width: usize,
    pub height: usize,
    pub data: Vec<bool>,
}

impl BinaryMask {
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    pub fn count_foreground(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }
}

/// Decode an image file. PGM is parsed directly; PNG goes through the
/// `image` crate. RGB collapses to gray with `0.299 R + 0.587 G + 0.114 B`,
/// rounded to the nearest integer.
pub fn load_image(path: &Path) -> Result<RasterImage, IngestError> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    match ext.as_str() {
        "pgm" => {
            let bytes = std::fs::read(path)?;
            image_io::decode_pgm(&bytes)
        }
        "png" => image_io::decode_png(path),
        other => Err(IngestError::Format(format!("unsupported image extension `{other}`"))),
    }
}

/// Otsu's threshold: the split of the intensity histogram that maximizes
/// between-class variance. Returns `T` such that the dark class is
/// `v < T`.
pub fn otsu_threshold(img: &RasterImage) -> Result<u8, IngestError> {
    let mut hist = [0u64; 256];
    for &v in &img.pixels {
        hist[v as usize] += 1;
    }
    let total = img.pixels.len() as f64;
    let sum_all: f64 = hist.iter().enumerate().map(|(v, &h)| v as f64 * h as f64).sum();

    let mut best_t = None;
    let mut best_var = f64::NEG_INFINITY;
    let mut w0 = 0.0;
    let mut sum0 = 0.0;
    for (t, &count) in hist.iter().enumerate().take(255) {
        w0 += count as f64;
        sum0 += t as f64 * count as f64;
        if w0 == 0.0 {
            continue;
        }
        let w1 = total - w0;
        if w1 == 0.0 {
            break;
        }
        let m0 = sum0 / w0;
        let m1 = (sum_all - sum0) / w1;
        let var = w0 * w1 * (m0 - m1) * (m0 - m1);
        if var > best_var {
            best_var = var;
            best_t = Some(t as u8);
        }
    }
    // best_t is the last dark intensity; the mask rule is `v < T`.
    best_t.map(|t| t + 1).ok_or(IngestError::DegenerateImage)
}

/// Threshold an image into a foreground mask. With no explicit threshold,
/// Otsu's method picks one. The foreground polarity follows a border-pixel
/// majority vote: a light border means the instrument is the dark class,
/// and vice versa.
pub fn binarize(img: &RasterImage, threshold: Option<u8>) -> Result<BinaryMask, IngestError> {
    let first = img.pixels[0];
    if img.pixels.iter().all(|&v| v == first) {
        return Err(IngestError::DegenerateImage);
    }
    let t = match threshold {
        Some(t) => t,
        None => otsu_threshold(img)?,
    };

    let mut dark_border = 0usize;
    let mut light_border = 0usize;
    let (w, h) = (img.width, img.height);
    let mut vote = |v: u8| {
        if v < t {
            dark_border += 1;
        } else {
            light_border += 1;
        }
    };
    for x in 0..w {
        vote(img.get(x, 0));
        if h > 1 {
            vote(img.get(x, h - 1));
        }
    }
    for y in 1..h.saturating_sub(1) {
        vote(img.get(0, y));
        if w > 1 {
            vote(img.get(w - 1, y));
        }
    }

    let foreground_dark = light_border >= dark_border;
    let data = img
        .pixels
        .iter()
        .map(|&v| if foreground_dark { v < t } else { v >= t })
        .collect();
    Ok(BinaryMask { width: w, height: h, data })
}

/// Historical period of classical music, derived from the fabrication year.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Period {
    Baroque,
    Classical,
    Romantic,
    Impressionist,
    Modern,
}

impl std::fmt::Display for Period {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Period::Baroque => "Baroque",
            Period::Classical => "Classical",
            Period::Romantic => "Romantic",
            Period::Impressionist => "Impressionist",
            Period::Modern => "Modern",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Period {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Baroque" => Ok(Period::Baroque),
            "Classical" => Ok(Period::Classical),
            "Romantic" => Ok(Period::Romantic),
            "Impressionist" => Ok(Period::Impressionist),
            "Modern" => Ok(Period::Modern),
            other => Err(format!("unknown period `{other}`")),
        }
    }
}

/// Year boundaries between periods: each field is the last year of the
/// period it names; Modern is everything after `impressionist_until`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodTable {
    pub baroque_until: i32,
    pub classical_until: i32,
    pub romantic_until: i32,
    pub impressionist_until: i32,
}

impl Default for PeriodTable {
    fn default() -> Self {
        Self {
            baroque_until: 1750,
            classical_until: 1820,
            romantic_until: 1900,
            impressionist_until: 1920,
        }
    }
}

impl PeriodTable {
    pub fn period_of(&self, year: i32) -> Period {
        if year <= self.baroque_until {
            Period::Baroque
        } else if year <= self.classical_until {
            Period::Classical
        } else if year <= self.romantic_until {
            Period::Romantic
        } else if year <= self.impressionist_until {
            Period::Impressionist
        } else {
            Period::Modern
        }
    }
}

/// Catalog entry for one instrument. Museum records are frequently
/// incomplete, so everything except the id is optional.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metadata {
    pub id: String,
    pub maker: Option<String>,
    pub country: Option<String>,
    pub year: Option<i32>,
    pub period: Option<Period>,
}

impl Metadata {
    pub fn bare(id: impl Into<String>) -> Self {
        Self { id: id.into(), maker: None, country: None, year: None, period: None }
    }
}

/// Valid fabrication-year range for catalog data.
pub const YEAR_RANGE: (i32, i32) = (1400, 2100);

/// Read a metadata CSV with header `id,maker,country,year`. Empty fields are
/// treated as missing; the period is derived from the year via `table`.
pub fn load_metadata<R: Read>(reader: R, table: &PeriodTable) -> Result<Vec<Metadata>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    {
        let headers = rdr.headers().map_err(|e| IngestError::Format(e.to_string()))?;
        let expected = ["id", "maker", "country", "year"];
        let got: Vec<&str> = headers.iter().map(|h| h.trim()).collect();
        if got != expected {
            return Err(IngestError::Format(format!(
                "metadata header must be `id,maker,country,year`, got `{}`",
                got.join(",")
            )));
        }
    }

    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2; // 1-based, after the header line
        let rec = rec.map_err(|e| IngestError::Parse { row, message: e.to_string() })?;
        let field = |k: usize| rec.get(k).unwrap_or("").trim().to_string();
        let id = field(0);
        if id.is_empty() {
            return Err(IngestError::Parse { row, message: "empty id".into() });
        }
        if !seen.insert(id.clone()) {
            return Err(IngestError::DuplicateId(id));
        }
        let opt = |s: String| if s.is_empty() { None } else { Some(s) };
        let year = match field(3).as_str() {
            "" => None,
            s => {
                let y: i32 = s.parse().map_err(|_| IngestError::Parse {
                    row,
                    message: format!("malformed year `{s}`"),
                })?;
                if y < YEAR_RANGE.0 || y > YEAR_RANGE.1 {
                    return Err(IngestError::Parse {
                        row,
                        message: format!("year {y} outside {:?}", YEAR_RANGE),
                    });
                }
                Some(y)
            }
        };
        out.push(Metadata {
            id,
            maker: opt(field(1)),
            country: opt(field(2)),
            year,
            period: year.map(|y| table.period_of(y)),
        });
    }
    Ok(out)
}

pub fn load_metadata_file(path: &Path, table: &PeriodTable) -> Result<Vec<Metadata>, IngestError> {
    let f = std::fs::File::open(path)?;
    load_metadata(std::io::BufReader::new(f), table)
}

/// Write metadata back out in the input CSV format (period is derived, not
/// stored).
pub fn write_metadata<W: Write>(writer: W, records: &[Metadata]) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["id", "maker", "country", "year"])
        .map_err(|e| IngestError::Format(e.to_string()))?;
    for m in records {
        w.write_record([
            m.id.as_str(),
            m.maker.as_deref().unwrap_or(""),
            m.country.as_deref().unwrap_or(""),
            &m.year.map(|y| y.to_string()).unwrap_or_default(),
        ])
        .map_err(|e| IngestError::Format(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Write a traced contour as `x,y` rows of decimal integers.
pub fn write_contour_csv<W: Write>(writer: W, contour: &Contour) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["x", "y"]).map_err(|e| IngestError::Format(e.to_string()))?;
    for p in &contour.points {
        w.write_record([format!("{:.0}", p.x), format!("{:.0}", p.y)])
            .map_err(|e| IngestError::Format(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_contour_csv<R: Read>(reader: R) -> Result<Contour, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let mut points = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| IngestError::Parse { row, message: e.to_string() })?;
        let get = |k: usize| -> Result<f64, IngestError> {
            rec.get(k)
                .unwrap_or("")
                .trim()
                .parse()
                .map_err(|_| IngestError::Parse { row, message: "bad coordinate".into() })
        };
        points.push(Point::new(get(0)?, get(1)?));
    }
    if points.is_empty() {
        return Err(IngestError::Format("empty contour file".into()));
    }
    Ok(Contour::new(points))
}
