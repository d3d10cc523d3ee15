//! Outline morphometrics for bowed string instruments.
//!
//! The crate turns instrument photographs into comparable shape descriptors
//! and dataset-level statistics. The stages are:
//!
//! 1. **ingest** – image decoding (PGM/PNG), thresholding, boundary tracing,
//!    metadata handling.
//! 2. **geometry** – arc-length resampling, Gaussian-derivative curvature,
//!    landmark detection, outline segmentation.
//! 3. **measures** – the normalized per-instrument feature vector (nine
//!    length ratios plus six segment curvatures).
//! 4. **analysis** – correlation maps, PCA, sliding-window year series.
//! 5. **tps** – thin-plate-spline morphing toward epoch-average landmark
//!    configurations, with deformation grids.
//! 6. **classify** – random-forest prediction of maker and country.
//! 7. **synth** – parametric outline generator with ground truth, for test
//!    corpora and benchmarks.
//!
//! All operations are pure functions over immutable values; processing many
//! instruments concurrently requires no shared mutable state.

pub mod analysis;
pub mod classify;
pub mod contour;
pub mod fmt;
pub mod geometry;
pub mod ingest;
pub mod measures;
pub mod pipeline;
pub mod svg;
pub mod synth;
pub mod tps;

pub use contour::{Contour, CyclicRange, Point};
pub use geometry::{CurvatureProfile, LandmarkSet, SmoothingParams};
pub use ingest::{BinaryMask, Metadata, Period, PeriodTable, RasterImage};
pub use measures::{FeatureMatrix, FeatureVector, InstrumentRecord, RawMeasures};
pub use pipeline::{extract_from_contour, extract_from_image, ExtractError, Extraction};
