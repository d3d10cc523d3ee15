//! Parametric generator of violin-like outlines with exact ground truth.
//!
//! The right flank is assembled from circular arcs with controlled end
//! tangents: a semicircular cap at the scroll tip, a straight neck edge, an
//! upper-bout arc, a concave waist arc and a lower-bout arc that reaches the
//! bottom with a horizontal tangent. The left flank mirrors the right one
//! (optionally scaled for asymmetry), so the only tangent discontinuities on
//! the whole outline are the six landmark corners QR, AR, BR, BL, AL, QL.
//! Band-limited normal noise can be layered on top; the corner vertices are
//! tracked through it, so the ground truth stays exact.
//!
//! Rasterization (scanline even-odd fill) turns outlines into grayscale
//! images for end-to-end runs, since real museum photographs cannot be
//! redistributed with the code.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::contour::{Contour, Point};
use crate::ingest::{Metadata, PeriodTable, RasterImage};
use crate::measures::{lengths_from_points, LandmarkPoints};

/// Shape parameters in fractions of the total outline length. Corner
/// positions are `(x, y)` with `x` a fraction of the total length and `y` a
/// fraction of the body height below the fingerboard-exit line.
#[derive(Debug, Clone, PartialEq)]
pub struct OutlineSpec {
    /// Total vertical extent in pixels.
    pub total_len: f64,
    /// Fraction of the total length above the body-top line (scroll + neck).
    pub neck_frac: f64,
    /// Half-width of the neck, as a fraction of the total length.
    pub neck_halfwidth: f64,
    /// Upper waist corner AR.
    pub corner_upper: (f64, f64),
    /// Lower waist corner BR.
    pub corner_lower: (f64, f64),
    /// Outgoing tangent angle of the upper bout at QR, degrees from +x.
    pub shoulder_angle: f64,
    /// Outgoing tangent angle of the waist arc at AR, degrees from +x.
    pub waist_angle: f64,
    /// Horizontal scale applied to the mirrored left flank (1 = symmetric).
    pub left_scale: f64,
    /// Approximate distance between consecutive polygon vertices, pixels.
    pub vertex_spacing: f64,
    /// Normal-displacement noise amplitude as a fraction of the total length.
    pub noise_amp: f64,
    /// Inclusive band of noise harmonics along the outline.
    pub noise_harmonics: (u32, u32),
}

impl Default for OutlineSpec {
    fn default() -> Self {
        Self {
            total_len: 1000.0,
            neck_frac: 0.37,
            neck_halfwidth: 0.035,
            corner_upper: (0.112, 0.40),
            corner_lower: (0.120, 0.625),
            shoulder_angle: 25.0,
            waist_angle: 170.0,
            left_scale: 1.0,
            vertex_spacing: 1.0,
            noise_amp: 0.0,
            noise_harmonics: (2, 8),
        }
    }
}

/// Exact landmark coordinates and measurements of a generated outline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub qr: Point,
    pub ar: Point,
    pub br: Point,
    pub bottom: Point,
    pub bl: Point,
    pub al: Point,
    pub ql: Point,
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
}

impl GroundTruth {
    pub fn landmarks(&self) -> [(&'static str, Point); 7] {
        [
            ("QR", self.qr),
            ("AR", self.ar),
            ("BR", self.br),
            ("BOTTOM", self.bottom),
            ("BL", self.bl),
            ("AL", self.al),
            ("QL", self.ql),
        ]
    }
}

#[derive(Debug, Clone)]
pub struct SynthOutline {
    pub contour: Contour,
    pub truth: GroundTruth,
}

fn unit(angle: f64) -> Point {
    Point::new(angle.cos(), angle.sin())
}

fn wrap_angle(a: f64) -> f64 {
    let mut a = a % std::f64::consts::TAU;
    if a > std::f64::consts::PI {
        a -= std::f64::consts::TAU;
    }
    if a < -std::f64::consts::PI {
        a += std::f64::consts::TAU;
    }
    a
}

/// Sample the unique circular arc from `p0` to `p1` that leaves `p0` with
/// tangent direction `theta0`. Includes `p0`, excludes `p1`. Falls back to a
/// straight segment when the tangent already points along the chord.
pub fn arc_from_tangent(p0: Point, theta0: f64, p1: Point, spacing: f64) -> Vec<Point> {
    let chord = p1 - p0;
    let chord_len = p0.distance(p1);
    let phi = chord.y.atan2(chord.x);
    let alpha = wrap_angle(phi - theta0);
    if alpha.abs() < 1e-9 {
        return line_points(p0, p1, spacing);
    }
    let radius = chord_len / (2.0 * alpha.abs().sin());
    let sign = alpha.signum();
    let center = p0 + unit(theta0 + sign * std::f64::consts::FRAC_PI_2) * radius;
    let a0 = (p0.y - center.y).atan2(p0.x - center.x);
    let sweep = sign * 2.0 * alpha.abs();
    let count = ((radius * sweep.abs()) / spacing).ceil().max(2.0) as usize;
    (0..count)
        .map(|i| {
            let t = a0 + sweep * i as f64 / count as f64;
            center + unit(t) * radius
        })
        .collect()
}

fn line_points(p0: Point, p1: Point, spacing: f64) -> Vec<Point> {
    let len = p0.distance(p1);
    let count = (len / spacing).ceil().max(1.0) as usize;
    (0..count).map(|i| p0 + (p1 - p0) * (i as f64 / count as f64)).collect()
}

/// Reflect direction `theta` across a chord of direction `phi`: the tangent
/// at the far end of a circular arc makes the same angle with the chord as
/// the tangent at the near end.
fn reflect_across(theta: f64, phi: f64) -> f64 {
    wrap_angle(2.0 * phi - theta)
}

/// Generate one outline. The RNG drives only the noise term; with
/// `noise_amp == 0` the outline is fully determined by the parameters.
pub fn generate_outline(spec: &OutlineSpec, rng: &mut impl Rng) -> SynthOutline {
    let len = spec.total_len;
    let w = spec.neck_halfwidth * len;
    let y_top = spec.neck_frac * len;
    let body = len - y_top;
    let deg = std::f64::consts::PI / 180.0;

    let tip = Point::new(0.0, 0.0);
    let qr = Point::new(w, y_top);
    let ar = Point::new(spec.corner_upper.0 * len, y_top + spec.corner_upper.1 * body);
    let br = Point::new(spec.corner_lower.0 * len, y_top + spec.corner_lower.1 * body);
    let bottom = Point::new(0.0, len);
    let spacing = spec.vertex_spacing;

    // Right flank, top to bottom. Each piece excludes its end point.
    let mut right = Vec::new();
    right.extend(arc_from_tangent(tip, 0.0, Point::new(w, w), spacing));
    right.extend(line_points(Point::new(w, w), qr, spacing));
    let idx_qr = right.len();
    right.extend(arc_from_tangent(qr, spec.shoulder_angle * deg, ar, spacing));
    let idx_ar = right.len();
    right.extend(arc_from_tangent(ar, spec.waist_angle * deg, br, spacing));
    let idx_br = right.len();
    // Reach the bottom with a horizontal tangent so the mirrored flank joins
    // smoothly: the outgoing tangent at BR is the reflection of that
    // horizontal direction across the BR-bottom chord.
    let chord_phi = (bottom.y - br.y).atan2(bottom.x - br.x);
    let theta_br = reflect_across(std::f64::consts::PI, chord_phi);
    right.extend(arc_from_tangent(br, theta_br, bottom, spacing));

    let n_right = right.len();
    let mut points = right.clone();
    points.push(bottom);
    for p in right[1..].iter().rev() {
        points.push(Point::new(-spec.left_scale * p.x, p.y));
    }

    let mirror_idx = |i: usize| 2 * n_right - i;
    let (idx_bl, idx_al, idx_ql) = (mirror_idx(idx_br), mirror_idx(idx_ar), mirror_idx(idx_qr));

    if spec.noise_amp > 0.0 {
        apply_noise(&mut points, spec, rng);
    } else {
        // Keep RNG consumption identical whether or not noise is applied, so
        // corpora with different noise settings stay index-aligned.
        let _ = draw_harmonics(spec, rng);
    }

    let contour = Contour::new(points);
    debug_assert!(contour.signed_area() > 0.0);

    let lp = LandmarkPoints {
        qr: contour.points[idx_qr],
        ar: contour.points[idx_ar],
        br: contour.points[idx_br],
        bottom: contour.points[contour.bottom_index()],
        bl: contour.points[idx_bl],
        al: contour.points[idx_al],
        ql: contour.points[idx_ql],
    };
    let tip_actual = contour.points[contour.top_index()];
    let [a, b, c, d, e, f, h1, h2, ell, total] = lengths_from_points(&lp, tip_actual);
    let truth = GroundTruth {
        qr: lp.qr,
        ar: lp.ar,
        br: lp.br,
        bottom: lp.bottom,
        bl: lp.bl,
        al: lp.al,
        ql: lp.ql,
        a,
        b,
        c,
        d,
        e,
        f,
        h1,
        h2,
        ell,
        total,
    };
    SynthOutline { contour, truth }
}

fn draw_harmonics(spec: &OutlineSpec, rng: &mut impl Rng) -> Vec<(f64, f64, f64)> {
    let (lo, hi) = spec.noise_harmonics;
    (lo..=hi)
        .map(|k| {
            let amp: f64 = rng.gen_range(-1.0..1.0);
            let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            (k as f64, amp, phase)
        })
        .collect()
}

/// Displace each vertex along its local normal by a band-limited signal of
/// the arc fraction, bounded by `noise_amp * total_len`.
fn apply_noise(points: &mut [Point], spec: &OutlineSpec, rng: &mut impl Rng) {
    let harmonics = draw_harmonics(spec, rng);
    let norm: f64 = harmonics.iter().map(|(_, a, _)| a.abs()).sum::<f64>().max(1e-9);
    let amp = spec.noise_amp * spec.total_len;
    let n = points.len();
    let original: Vec<Point> = points.to_vec();
    for (i, p) in points.iter_mut().enumerate() {
        let prev = original[(i + n - 1) % n];
        let next = original[(i + 1) % n];
        let tangent = next - prev;
        let t_len = prev.distance(next).max(1e-12);
        let normal = Point::new(-tangent.y / t_len, tangent.x / t_len);
        let u = i as f64 / n as f64;
        let signal: f64 = harmonics
            .iter()
            .map(|(k, a, phase)| a * (std::f64::consts::TAU * k * u + phase).sin())
            .sum::<f64>()
            / norm;
        *p = *p + normal * (amp * signal);
    }
}

/// One synthetic instrument: outline, ground truth and catalog entry.
#[derive(Debug, Clone)]
pub struct SynthInstrument {
    pub id: String,
    pub meta: Metadata,
    pub contour: Contour,
    pub truth: GroundTruth,
}

struct Archetype {
    maker: &'static str,
    country: &'static str,
    corner_upper: (f64, f64),
    corner_lower: (f64, f64),
    neck_frac: f64,
    neck_halfwidth: f64,
    waist_angle: f64,
}

/// Maker families with distinct proportions, so that attribution from shape
/// is learnable on synthetic corpora.
const ARCHETYPES: [Archetype; 6] = [
    Archetype {
        maker: "Amati",
        country: "Italy",
        corner_upper: (0.106, 0.390),
        corner_lower: (0.113, 0.615),
        neck_frac: 0.375,
        neck_halfwidth: 0.035,
        waist_angle: 168.0,
    },
    Archetype {
        maker: "Stradivari",
        country: "Italy",
        corner_upper: (0.112, 0.405),
        corner_lower: (0.121, 0.630),
        neck_frac: 0.362,
        neck_halfwidth: 0.035,
        waist_angle: 171.0,
    },
    Archetype {
        maker: "Guarneri",
        country: "Italy",
        corner_upper: (0.116, 0.410),
        corner_lower: (0.125, 0.635),
        neck_frac: 0.368,
        neck_halfwidth: 0.036,
        waist_angle: 173.0,
    },
    Archetype {
        maker: "Hopf",
        country: "Germany",
        corner_upper: (0.104, 0.385),
        corner_lower: (0.112, 0.600),
        neck_frac: 0.385,
        neck_halfwidth: 0.032,
        waist_angle: 166.0,
    },
    Archetype {
        maker: "Vuillaume",
        country: "France",
        corner_upper: (0.113, 0.400),
        corner_lower: (0.122, 0.628),
        neck_frac: 0.360,
        neck_halfwidth: 0.035,
        waist_angle: 171.5,
    },
    Archetype {
        maker: "Chanot",
        country: "France",
        corner_upper: (0.108, 0.420),
        corner_lower: (0.118, 0.645),
        neck_frac: 0.372,
        neck_halfwidth: 0.034,
        waist_angle: 169.0,
    },
];

/// Fraction of instruments with a missing maker/country/year field,
/// mirroring incomplete museum catalogs.
const MISSING_FIELD_RATE: f64 = 0.08;

/// Deterministically generate `count` instruments. Years are stratified
/// over `year_range` so every sliding window in the range is populated.
pub fn generate_corpus(
    count: usize,
    noise_amp: f64,
    seed: u64,
    year_range: (i32, i32),
    table: &PeriodTable,
) -> Vec<SynthInstrument> {
    let (y0, y1) = year_range;
    (0..count)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let arch = &ARCHETYPES[i % ARCHETYPES.len()];

            let jitter = |rng: &mut ChaCha8Rng, v: f64| v * (1.0 + rng.gen_range(-0.025..0.025));
            let spec = OutlineSpec {
                total_len: rng.gen_range(750.0..1150.0),
                neck_frac: jitter(&mut rng, arch.neck_frac),
                neck_halfwidth: jitter(&mut rng, arch.neck_halfwidth),
                corner_upper: (
                    jitter(&mut rng, arch.corner_upper.0),
                    jitter(&mut rng, arch.corner_upper.1),
                ),
                corner_lower: (
                    jitter(&mut rng, arch.corner_lower.0),
                    jitter(&mut rng, arch.corner_lower.1),
                ),
                shoulder_angle: 25.0 + rng.gen_range(-2.0..2.0),
                waist_angle: arch.waist_angle + rng.gen_range(-1.5..1.5),
                left_scale: 1.0 + rng.gen_range(-0.005..0.005),
                vertex_spacing: 1.0,
                noise_amp,
                noise_harmonics: (2, 8),
            };
            let outline = generate_outline(&spec, &mut rng);

            let span = (y1 - y0).max(1) as f64;
            let year = if count > 1 {
                y0 + (span * i as f64 / (count - 1) as f64).round() as i32
                    + rng.gen_range(-3..=3)
            } else {
                y0
            };
            let year = year.clamp(y0.min(y1), y0.max(y1));

            let missing = |rng: &mut ChaCha8Rng| rng.gen::<f64>() < MISSING_FIELD_RATE;
            let maker = if missing(&mut rng) { None } else { Some(arch.maker.to_string()) };
            let country = if missing(&mut rng) { None } else { Some(arch.country.to_string()) };
            let year = if missing(&mut rng) { None } else { Some(year) };

            SynthInstrument {
                id: format!("synth_{i:04}"),
                meta: Metadata {
                    id: format!("synth_{i:04}"),
                    maker,
                    country,
                    year,
                    period: year.map(|y| table.period_of(y)),
                },
                contour: outline.contour,
                truth: outline.truth,
            }
        })
        .collect()
}

/// Background and foreground intensities of rasterized corpora.
pub const RASTER_BACKGROUND: u8 = 225;
pub const RASTER_FOREGROUND: u8 = 45;

/// Shift a contour (and its truth) so that the bounding box starts at
/// `margin` in both axes; needed before rasterizing into image coordinates.
pub fn place_in_image(outline: &mut SynthInstrument, margin: f64) {
    let (min_x, min_y, _, _) = outline.contour.bbox();
    let (dx, dy) = (margin - min_x, margin - min_y);
    outline.contour = outline.contour.translated(dx, dy);
    let t = &mut outline.truth;
    for p in [
        &mut t.qr, &mut t.ar, &mut t.br, &mut t.bottom, &mut t.bl, &mut t.al, &mut t.ql,
    ] {
        p.x += dx;
        p.y += dy;
    }
}

/// Scanline even-odd fill of a closed polygon into a grayscale image, dark
/// instrument on a light background.
pub fn rasterize(contour: &Contour, margin: f64) -> RasterImage {
    let (_, _, max_x, max_y) = contour.bbox();
    let width = (max_x + margin).ceil() as usize + 1;
    let height = (max_y + margin).ceil() as usize + 1;
    let mut pixels = vec![RASTER_BACKGROUND; width * height];

    let pts = &contour.points;
    let n = pts.len();
    let mut crossings: Vec<f64> = Vec::new();
    for y in 0..height {
        let cy = y as f64 + 0.5;
        crossings.clear();
        for i in 0..n {
            let p = pts[i];
            let q = pts[(i + 1) % n];
            if (p.y <= cy && cy < q.y) || (q.y <= cy && cy < p.y) {
                crossings.push(p.x + (cy - p.y) * (q.x - p.x) / (q.y - p.y));
            }
        }
        crossings.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for pair in crossings.chunks_exact(2) {
            // Pixels whose center lies in [pair[0], pair[1]).
            let x_start = ((pair[0] - 0.5).ceil() as i64).max(0);
            let x_end = ((pair[1] - 0.5).ceil() as i64 - 1).min(width as i64 - 1);
            for x in x_start..=x_end {
                pixels[y * width + x as usize] = RASTER_FOREGROUND;
            }
        }
    }
    RasterImage { width, height, pixels }
}
