//! The per-instrument extraction chain: image, mask, boundary, resampled
//! outline, curvature, landmarks, measurements, normalized features.

use thiserror::Error;

use crate::contour::Contour;
use crate::geometry::{
    curvature, detect_landmarks, resample, CurvatureProfile, GeometryError, LandmarkSet,
    SmoothingParams,
};
use crate::ingest::{binarize, trace_contour, IngestError, RasterImage};
use crate::measures::{extract_raw, normalize, FeatureVector, MeasureError, RawMeasures};

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

impl ExtractError {
    /// Stable error kind for run manifests.
    pub fn kind(&self) -> &'static str {
        match self {
            ExtractError::Ingest(e) => e.kind(),
            ExtractError::Geometry(e) => e.kind(),
            ExtractError::Measure(e) => e.kind(),
        }
    }
}

/// Every intermediate of one instrument's extraction.
#[derive(Debug, Clone)]
pub struct Extraction {
    /// Traced boundary in pixel coordinates (absent when starting from an
    /// outline instead of an image).
    pub traced: Option<Contour>,
    /// Arc-length resampled outline, reindexed to start at the scroll tip.
    pub resampled: Contour,
    pub profile: CurvatureProfile,
    pub landmarks: LandmarkSet,
    pub raw: RawMeasures,
    pub features: FeatureVector,
}

/// Full chain from a grayscale image.
pub fn extract_from_image(
    img: &RasterImage,
    params: &SmoothingParams,
) -> Result<Extraction, ExtractError> {
    let mask = binarize(img, None)?;
    let traced = trace_contour(&mask)?;
    let mut extraction = extract_from_contour(&traced, params)?;
    extraction.traced = Some(traced);
    Ok(extraction)
}

/// Chain from an already-traced (or synthetic) closed outline.
pub fn extract_from_contour(
    outline: &Contour,
    params: &SmoothingParams,
) -> Result<Extraction, ExtractError> {
    let resampled = resample(outline, params.n_resample)?.rotated_to_top();
    let profile = curvature(&resampled, params)?;
    let landmarks = detect_landmarks(&profile, &resampled)?;
    let raw = extract_raw(&resampled, &profile, &landmarks)?;
    let features = normalize(&raw)?;
    Ok(Extraction { traced: None, resampled, profile, landmarks, raw, features })
}
