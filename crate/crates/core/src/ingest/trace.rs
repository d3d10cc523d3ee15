//! Boundary tracing of binary masks.
//!
//! The tracer labels foreground components (8-connectivity), keeps the
//! largest one, and walks its outer boundary with Moore-neighbor tracing,
//! stopping on Jacob's criterion (re-entering the start pixel from the
//! start direction). Interior holes never appear on the outer walk.

use super::{BinaryMask, IngestError, MIN_COMPONENT_PIXELS};
use crate::contour::{Contour, Point};

/// Clockwise Moore neighborhood in image coordinates, starting west.
const DIRS: [(i64, i64); 8] = [
    (-1, 0),  // W
    (-1, -1), // NW
    (0, -1),  // N
    (1, -1),  // NE
    (1, 0),   // E
    (1, 1),   // SE
    (0, 1),   // S
    (-1, 1),  // SW
];

/// Trace the outer boundary of the largest foreground component as a closed
/// contour, orientation-normalized to positive shoelace area.
pub fn trace_contour(mask: &BinaryMask) -> Result<Contour, IngestError> {
    let component = largest_component(mask)?;
    let mut points = moore_trace(&component, mask.width, mask.height);
    debug_assert!(!points.is_empty());

    // Normalize orientation, keeping the start pixel first.
    let area: f64 = {
        let n = points.len();
        (0..n)
            .map(|i| {
                let p = points[i];
                let q = points[(i + 1) % n];
                p.0 as f64 * q.1 as f64 - q.0 as f64 * p.1 as f64
            })
            .sum()
    };
    if area < 0.0 {
        points[1..].reverse();
    }

    Ok(Contour::new(
        points.into_iter().map(|(x, y)| Point::new(x as f64, y as f64)).collect(),
    ))
}

/// Label components with a scanline flood fill and return a mask that keeps
/// only the largest one (ties go to the first in scan order).
fn largest_component(mask: &BinaryMask) -> Result<Vec<bool>, IngestError> {
    let (w, h) = (mask.width, mask.height);
    let mut label = vec![0u32; w * h];
    let mut sizes: Vec<usize> = vec![0]; // sizes[0] unused: label 0 = background
    let mut stack = Vec::new();

    for start in 0..w * h {
        if !mask.data[start] || label[start] != 0 {
            continue;
        }
        let id = sizes.len() as u32;
        sizes.push(0);
        stack.push(start);
        label[start] = id;
        while let Some(idx) = stack.pop() {
            sizes[id as usize] += 1;
            let (x, y) = (idx % w, idx / w);
            for (dx, dy) in DIRS {
                let nx = x as i64 + dx;
                let ny = y as i64 + dy;
                if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                    continue;
                }
                let nidx = ny as usize * w + nx as usize;
                if mask.data[nidx] && label[nidx] == 0 {
                    label[nidx] = id;
                    stack.push(nidx);
                }
            }
        }
    }

    let best = sizes
        .iter()
        .enumerate()
        .skip(1)
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(id, &size)| (id as u32, size));
    match best {
        Some((id, size)) if size >= MIN_COMPONENT_PIXELS => {
            Ok(label.iter().map(|&l| l == id).collect())
        }
        _ => Err(IngestError::EmptyMask),
    }
}

fn moore_trace(fg: &[bool], w: usize, h: usize) -> Vec<(i64, i64)> {
    let at = |x: i64, y: i64| -> bool {
        x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h && fg[y as usize * w + x as usize]
    };

    // Start pixel: first foreground in scan order; its west neighbor is
    // background by construction.
    let start_idx = fg.iter().position(|&b| b).expect("component is non-empty");
    let start = ((start_idx % w) as i64, (start_idx / w) as i64);

    let mut points = vec![start];
    let mut cur = start;
    let mut backtrack = 0usize; // index into DIRS of the entry background pixel
    let start_backtrack = backtrack;
    let limit = 4 * w * h;

    for _ in 0..limit {
        // Scan clockwise from the backtrack direction.
        let mut found = None;
        for step in 1..=8 {
            let d = (backtrack + step) % 8;
            let (dx, dy) = DIRS[d];
            if at(cur.0 + dx, cur.1 + dy) {
                found = Some((d, step));
                break;
            }
        }
        let Some((dir, _)) = found else {
            // Isolated pixel: degenerate single-point boundary.
            break;
        };
        let (dx, dy) = DIRS[dir];
        let next = (cur.0 + dx, cur.1 + dy);
        // The new backtrack is the last background neighbor checked before
        // `next`, expressed as a direction from `next` back toward it.
        let prev_dir = (dir + 7) % 8;
        let (px, py) = DIRS[prev_dir];
        let back_pixel = (cur.0 + px, cur.1 + py);
        let mut next_backtrack = 0;
        for (i, (bx, by)) in DIRS.iter().enumerate() {
            if (next.0 + bx, next.1 + by) == back_pixel {
                next_backtrack = i;
                break;
            }
        }

        cur = next;
        backtrack = next_backtrack;
        if cur == start && backtrack == start_backtrack {
            break; // Jacob's criterion: entered the start the same way again
        }
        points.push(cur);
    }

    // Collapse any consecutive duplicates (paranoia; the walk always moves).
    points.dedup();
    if points.len() > 1 && points.first() == points.last() {
        points.pop();
    }
    points
}
