//! Planar points, closed contours and cyclic index ranges.

use serde::{Deserialize, Serialize};

/// A point in image coordinates: `x` grows rightward, `y` grows downward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        (dx * dx + dy * dy).sqrt()
    }

    /// z-component of the cross product of `self` and `other` as vectors.
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }
}

impl std::ops::Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Mul<f64> for Point {
    type Output = Point;
    fn mul(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }
}

/// A closed outline: an ordered point cycle where the last point connects
/// back to the first. Traced contours are normalized so that the shoelace
/// area in image coordinates is positive, which puts the right flank of an
/// upright instrument immediately after its topmost point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub points: Vec<Point>,
    pub closed: bool,
}

impl Contour {
    pub fn new(points: Vec<Point>) -> Self {
        Self { points, closed: true }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Perimeter including the closing edge.
    pub fn perimeter(&self) -> f64 {
        let n = self.points.len();
        if n < 2 {
            return 0.0;
        }
        (0..n)
            .map(|i| self.points[i].distance(self.points[(i + 1) % n]))
            .sum()
    }

    /// Shoelace area; positive for the normalized orientation.
    pub fn signed_area(&self) -> f64 {
        let n = self.points.len();
        let mut acc = 0.0;
        for i in 0..n {
            let p = self.points[i];
            let q = self.points[(i + 1) % n];
            acc += p.x * q.y - q.x * p.y;
        }
        acc / 2.0
    }

    /// Axis-aligned bounding box as `(min_x, min_y, max_x, max_y)`.
    pub fn bbox(&self) -> (f64, f64, f64, f64) {
        let mut min_x = f64::INFINITY;
        let mut min_y = f64::INFINITY;
        let mut max_x = f64::NEG_INFINITY;
        let mut max_y = f64::NEG_INFINITY;
        for p in &self.points {
            min_x = min_x.min(p.x);
            min_y = min_y.min(p.y);
            max_x = max_x.max(p.x);
            max_y = max_y.max(p.y);
        }
        (min_x, min_y, max_x, max_y)
    }

    /// Index of the topmost point (minimum `y`, ties broken by `x` then index).
    pub fn top_index(&self) -> usize {
        let mut best = 0;
        for (i, p) in self.points.iter().enumerate() {
            let b = self.points[best];
            if p.y < b.y || (p.y == b.y && p.x < b.x) {
                best = i;
            }
        }
        best
    }

    /// Index of the lowest point (maximum `y`, ties broken by `x` then index).
    pub fn bottom_index(&self) -> usize {
        let mut best = 0;
        for (i, p) in self.points.iter().enumerate() {
            let b = self.points[best];
            if p.y > b.y || (p.y == b.y && p.x < b.x) {
                best = i;
            }
        }
        best
    }

    /// Reindex the cycle so that traversal begins at the topmost point.
    pub fn rotated_to_top(&self) -> Contour {
        let k = self.top_index();
        let mut points = self.points.clone();
        points.rotate_left(k);
        Contour { points, closed: self.closed }
    }

    /// Reverse traversal direction: point `i` of the result is point
    /// `n - 1 - i` of the original.
    pub fn reversed(&self) -> Contour {
        let mut points = self.points.clone();
        points.reverse();
        Contour { points, closed: self.closed }
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Contour {
        Contour {
            points: self.points.iter().map(|p| Point::new(p.x + dx, p.y + dy)).collect(),
            closed: self.closed,
        }
    }

    pub fn scaled(&self, k: f64) -> Contour {
        Contour {
            points: self.points.iter().map(|p| Point::new(p.x * k, p.y * k)).collect(),
            closed: self.closed,
        }
    }

    /// Rotate all points by `angle` radians about the origin.
    pub fn rotated(&self, angle: f64) -> Contour {
        let (s, c) = angle.sin_cos();
        Contour {
            points: self
                .points
                .iter()
                .map(|p| Point::new(c * p.x - s * p.y, s * p.x + c * p.y))
                .collect(),
            closed: self.closed,
        }
    }
}

/// A contiguous run of indices on a cycle of length `n`, possibly wrapping.
/// Half-open: `start` is included, `start + len` is not. `len == 0` is the
/// degenerate empty range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CyclicRange {
    pub start: usize,
    pub len: usize,
}

impl CyclicRange {
    pub fn new(start: usize, len: usize) -> Self {
        Self { start, len }
    }

    /// Range from `start` forward to `end` (exclusive) on a cycle of length `n`.
    pub fn between(start: usize, end: usize, n: usize) -> Self {
        Self { start, len: (end + n - start) % n }
    }

    pub fn indices(&self, n: usize) -> impl Iterator<Item = usize> + '_ {
        let start = self.start;
        (0..self.len).map(move |k| (start + k) % n)
    }

    pub fn contains(&self, i: usize, n: usize) -> bool {
        let off = (i + n - self.start) % n;
        off < self.len
    }
}
