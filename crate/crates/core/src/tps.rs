//! Thin-plate-spline interpolation between landmark configurations.
//!
//! The transform maps k source landmarks exactly onto k targets while
//! minimizing the integral bending energy, using the kernel
//! `U(r) = r^2 ln r` (with `U(0) = 0`) plus an affine part. Side conditions
//! keep the kernel weights orthogonal to `{1, x, y}`, so the non-affine
//! deformation decays at infinity. Bending energy is zero exactly when the
//! target configuration is an affine image of the source.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::analysis::{window_starts, AnalysisError};
use crate::contour::Point;

#[derive(Debug, Error)]
pub enum TpsError {
    #[error("singular landmark configuration: {0}")]
    SingularConfiguration(String),
    #[error("degenerate grid bounds: {0}")]
    Bounds(String),
}

impl TpsError {
    pub fn kind(&self) -> &'static str {
        match self {
            TpsError::SingularConfiguration(_) => "SingularConfigurationError",
            TpsError::Bounds(_) => "BoundsError",
        }
    }
}

/// Index-aligned source and target landmark coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkCorrespondence {
    pub source: Vec<Point>,
    pub target: Vec<Point>,
}

impl LandmarkCorrespondence {
    pub fn new(source: Vec<Point>, target: Vec<Point>) -> Self {
        Self { source, target }
    }
}

/// A fitted interpolating thin-plate spline.
#[derive(Debug, Clone, PartialEq)]
pub struct TpsTransform {
    /// Affine coefficients per output dimension: `[constant, x, y]`.
    pub affine: [[f64; 3]; 2],
    /// Kernel weights per output dimension, one per source landmark.
    pub weights: [Vec<f64>; 2],
    pub source: Vec<Point>,
    pub bending_energy: f64,
}

fn kernel(r: f64) -> f64 {
    if r <= 0.0 {
        0.0
    } else {
        r * r * r.ln()
    }
}

/// Solve the interpolating spline for the given correspondence.
pub fn fit_tps(corr: &LandmarkCorrespondence) -> Result<TpsTransform, TpsError> {
    let k = corr.source.len();
    if k < 3 {
        return Err(TpsError::SingularConfiguration(format!("{k} landmarks, need at least 3")));
    }
    if corr.target.len() != k {
        return Err(TpsError::SingularConfiguration(format!(
            "{} targets for {k} sources",
            corr.target.len()
        )));
    }

    // Scale for tolerance decisions.
    let scale = corr
        .source
        .iter()
        .flat_map(|p| corr.source.iter().map(move |q| p.distance(*q)))
        .fold(0.0_f64, f64::max);
    if scale <= 0.0 {
        return Err(TpsError::SingularConfiguration("all source points coincide".into()));
    }
    for i in 0..k {
        for j in i + 1..k {
            if corr.source[i].distance(corr.source[j]) < 1e-9 * scale {
                return Err(TpsError::SingularConfiguration(format!(
                    "duplicate source points {i} and {j}"
                )));
            }
        }
    }
    // Collinearity: compare triangle areas against the span.
    let p0 = corr.source[0];
    let far = *corr
        .source
        .iter()
        .max_by(|a, b| p0.distance(**a).partial_cmp(&p0.distance(**b)).unwrap())
        .unwrap();
    let v1 = far - p0;
    let max_area = corr
        .source
        .iter()
        .map(|p| v1.cross(*p - p0).abs())
        .fold(0.0_f64, f64::max);
    if max_area < 1e-10 * scale * scale {
        return Err(TpsError::SingularConfiguration("source points are collinear".into()));
    }

    // System: [[K, P], [P^T, 0]] [w; a] = [targets; 0].
    let dim = k + 3;
    let mut a = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..k {
        for j in 0..k {
            a[(i, j)] = kernel(corr.source[i].distance(corr.source[j]));
        }
        a[(i, k)] = 1.0;
        a[(i, k + 1)] = corr.source[i].x;
        a[(i, k + 2)] = corr.source[i].y;
        a[(k, i)] = 1.0;
        a[(k + 1, i)] = corr.source[i].x;
        a[(k + 2, i)] = corr.source[i].y;
    }
    let mut rhs = DMatrix::<f64>::zeros(dim, 2);
    for i in 0..k {
        rhs[(i, 0)] = corr.target[i].x;
        rhs[(i, 1)] = corr.target[i].y;
    }

    let lu = a.clone().lu();
    let sol = lu
        .solve(&rhs)
        .ok_or_else(|| TpsError::SingularConfiguration("spline system is singular".into()))?;

    let mut weights = [vec![0.0; k], vec![0.0; k]];
    for (d, w) in weights.iter_mut().enumerate() {
        for (i, wi) in w.iter_mut().enumerate() {
            *wi = sol[(i, d)];
        }
    }
    let affine = [
        [sol[(k, 0)], sol[(k + 1, 0)], sol[(k + 2, 0)]],
        [sol[(k, 1)], sol[(k + 1, 1)], sol[(k + 2, 1)]],
    ];

    // Bending energy: w^T K w summed over output dimensions, clamped against
    // roundoff below zero.
    let mut energy = 0.0;
    for w in &weights {
        for i in 0..k {
            for j in 0..k {
                energy += w[i] * a[(i, j)] * w[j];
            }
        }
    }
    let bending_energy = energy.max(0.0);

    Ok(TpsTransform { affine, weights, source: corr.source.clone(), bending_energy })
}

impl TpsTransform {
    /// Evaluate the transform at one point.
    pub fn apply(&self, p: Point) -> Point {
        let mut out = [0.0; 2];
        for (d, o) in out.iter_mut().enumerate() {
            let mut v = self.affine[d][0] + self.affine[d][1] * p.x + self.affine[d][2] * p.y;
            for (w, s) in self.weights[d].iter().zip(&self.source) {
                v += w * kernel(p.distance(*s));
            }
            *o = v;
        }
        Point::new(out[0], out[1])
    }
}

/// Map a point sequence through the transform.
pub fn warp_points(t: &TpsTransform, points: &[Point]) -> Vec<Point> {
    points.iter().map(|&p| t.apply(p)).collect()
}

/// Axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self { x0, y0, x1, y1 }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }
}

/// Sample count per deformation-grid line.
pub const GRID_LINE_SAMPLES: usize = 100;

/// A regular grid of `nx` vertical and `ny` horizontal polylines mapped
/// through the transform, for deformation visualization.
pub fn deformation_grid(
    t: &TpsTransform,
    bounds: Rect,
    nx: usize,
    ny: usize,
) -> Result<Vec<Vec<Point>>, TpsError> {
    if !(bounds.width() > 0.0 && bounds.height() > 0.0)
        || !bounds.width().is_finite()
        || !bounds.height().is_finite()
    {
        return Err(TpsError::Bounds(format!("{bounds:?}")));
    }
    if nx < 2 || ny < 2 {
        return Err(TpsError::Bounds(format!("grid {nx}x{ny} needs at least 2 lines per axis")));
    }
    let mut lines = Vec::with_capacity(nx + ny);
    for i in 0..nx {
        let x = bounds.x0 + bounds.width() * i as f64 / (nx - 1) as f64;
        let line: Vec<Point> = (0..GRID_LINE_SAMPLES)
            .map(|j| {
                let y = bounds.y0 + bounds.height() * j as f64 / (GRID_LINE_SAMPLES - 1) as f64;
                t.apply(Point::new(x, y))
            })
            .collect();
        lines.push(line);
    }
    for i in 0..ny {
        let y = bounds.y0 + bounds.height() * i as f64 / (ny - 1) as f64;
        let line: Vec<Point> = (0..GRID_LINE_SAMPLES)
            .map(|j| {
                let x = bounds.x0 + bounds.width() * j as f64 / (GRID_LINE_SAMPLES - 1) as f64;
                t.apply(Point::new(x, y))
            })
            .collect();
        lines.push(line);
    }
    Ok(lines)
}

/// Center landmark coordinates on their centroid and scale by the
/// instrument's total length, removing image-resolution effects before
/// epoch averaging.
pub fn normalize_landmarks(points: &[Point], total_length: f64) -> Vec<Point> {
    let n = points.len().max(1) as f64;
    let cx = points.iter().map(|p| p.x).sum::<f64>() / n;
    let cy = points.iter().map(|p| p.y).sum::<f64>() / n;
    points
        .iter()
        .map(|p| Point::new((p.x - cx) / total_length, (p.y - cy) / total_length))
        .collect()
}

/// Landmarks of one dated instrument, already normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct DatedShape {
    pub year: Option<i32>,
    pub landmarks: Vec<Point>,
}

/// Per-window mean landmark configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochTarget {
    pub start_year: i32,
    pub center_year: f64,
    pub count: usize,
    pub landmarks: Option<Vec<Point>>,
}

/// Average landmark coordinates per sliding window (same window semantics
/// as the feature time series; empty windows carry no landmarks).
pub fn epoch_targets(
    shapes: &[DatedShape],
    dt: i32,
    step: i32,
) -> Result<Vec<EpochTarget>, AnalysisError> {
    if dt < 1 || step < 1 {
        return Err(AnalysisError::Numerical(format!("dt {dt} and step {step} must be >= 1")));
    }
    let dated: Vec<&DatedShape> = shapes.iter().filter(|s| s.year.is_some()).collect();
    if dated.is_empty() {
        return Err(AnalysisError::NoDates);
    }
    let k = dated[0].landmarks.len();
    if dated.iter().any(|s| s.landmarks.len() != k) {
        return Err(AnalysisError::Dimension("landmark counts differ across instruments".into()));
    }
    let years: Vec<i32> = dated.iter().map(|s| s.year.unwrap()).collect();
    let min_year = *years.iter().min().unwrap();
    let max_year = *years.iter().max().unwrap();

    let mut out = Vec::new();
    for start in window_starts(min_year, max_year, step) {
        let members: Vec<usize> = years
            .iter()
            .enumerate()
            .filter(|(_, &y)| y >= start && y < start + dt)
            .map(|(i, _)| i)
            .collect();
        let landmarks = if members.is_empty() {
            None
        } else {
            let mut mean = vec![Point::new(0.0, 0.0); k];
            for &i in &members {
                for (m, p) in mean.iter_mut().zip(&dated[i].landmarks) {
                    m.x += p.x;
                    m.y += p.y;
                }
            }
            for m in &mut mean {
                m.x /= members.len() as f64;
                m.y /= members.len() as f64;
            }
            Some(mean)
        };
        out.push(EpochTarget {
            start_year: start,
            center_year: start as f64 + dt as f64 / 2.0,
            count: members.len(),
            landmarks,
        });
    }
    Ok(out)
}
