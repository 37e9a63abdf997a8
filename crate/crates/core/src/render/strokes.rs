//! Multi-pass particle strokes.
//!
//! Each pass paints over the canvas with strokes of one nominal radius,
//! coarse to fine. Stroke seeds are drawn uniformly from a seeded stream and
//! kept with probability [`seed_density`], which grows with the local color
//! error and with the matte weight, so detail concentrates on the sitter.

use std::f32::consts::FRAC_PI_4;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::persona::{Rgb, StyleSpec};

use super::orientation::OrientationField;
use super::raster::{gaussian_blur, FloatImage, MatteMask, RasterImage};
use super::RenderError;

pub const PASSES: usize = 3;
pub(crate) const STROKE_STREAM: u64 = 2;
/// Color error (unit RGB distance) at which a seed is always kept.
pub const ERROR_SATURATION: f32 = 0.25;
/// Candidate seeds per pass: `CANDIDATES_PER_AREA · w · h / r²`.
pub const CANDIDATES_PER_AREA: f32 = 2.0;
/// Below this coherence the field is ignored and a stroke keeps its heading.
const MIN_COHERENCE: f32 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrokeParticle {
    pub x: f32,
    pub y: f32,
    pub direction: f32,
    pub length: f32,
    pub radius: f32,
    pub color: Rgb,
    pub opacity: f32,
    pub pass: u8,
}

/// Strokes output plus the instrumentation needed to audit placement.
#[derive(Debug, Clone)]
pub struct StrokeRender {
    pub image: RasterImage,
    pub strokes: Vec<StrokeParticle>,
    pub candidates_per_pass: [usize; PASSES],
}

/// Probability of keeping a candidate seed. Monotone in both `error` and
/// `matte`; background seeds are suppressed as `matte^abstraction`.
pub fn seed_density(error: f32, matte: f32, abstraction: f32) -> f32 {
    (error / ERROR_SATURATION).clamp(0.0, 1.0) * libm::powf(matte.clamp(0.0, 1.0), abstraction)
}

/// Nominal radius of each pass, evenly spaced from max down to min.
pub fn pass_radii(style: &StyleSpec) -> [f32; PASSES] {
    let (lo, hi) = (style.stroke.min_radius, style.stroke.max_radius);
    std::array::from_fn(|i| hi - (hi - lo) * i as f32 / (PASSES - 1) as f32)
}

pub fn render_strokes(
    base: &RasterImage,
    matte: &MatteMask,
    field: &OrientationField,
    style: &StyleSpec,
    seed: u64,
) -> Result<RasterImage, RenderError> {
    render_strokes_traced(base, matte, field, style, seed).map(|r| r.image)
}

pub fn render_strokes_traced(
    base: &RasterImage,
    matte: &MatteMask,
    field: &OrientationField,
    style: &StyleSpec,
    seed: u64,
) -> Result<StrokeRender, RenderError> {
    let dims = base.dimensions();
    for (what, found) in [
        ("matte", matte.dimensions()),
        ("orientation field", field.dimensions()),
    ] {
        if found != dims {
            return Err(RenderError::DimensionMismatch {
                what,
                expected: dims,
                found,
            });
        }
    }
    if style.palette.is_empty() {
        return Err(RenderError::InvalidInput("style palette is empty".into()));
    }

    let palette: Vec<[f32; 3]> = style.palette.iter().map(|c| c.to_unit()).collect();
    let source = base.to_float();
    let (w, h) = (source.width, source.height);
    let start = nearest(&palette, mean_color(&source));
    let mut canvas = FloatImage {
        width: w,
        height: h,
        data: vec![palette[start]; w * h],
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(STROKE_STREAM);
    let abstraction = style.abstraction;
    let mut strokes = Vec::new();
    let mut candidates_per_pass = [0; PASSES];

    for (pass, r) in pass_radii(style).into_iter().enumerate() {
        let reference = source.blurred(0.5 * r);
        let raw_error: Vec<f32> = reference
            .data
            .iter()
            .zip(&canvas.data)
            .map(|(a, b)| libm::sqrtf((0..3).map(|k| (a[k] - b[k]) * (a[k] - b[k])).sum()))
            .collect();
        let error = gaussian_blur(&raw_error, w, h, 0.5 * r);

        let count = libm::ceilf(CANDIDATES_PER_AREA * (w * h) as f32 / (r * r)) as usize;
        candidates_per_pass[pass] = count;
        for _ in 0..count {
            // Draw every variate up front so the stream stays aligned whether
            // or not the candidate is kept.
            let x = rng.random::<f32>() * w as f32;
            let y = rng.random::<f32>() * h as f32;
            let u = rng.random::<f32>();
            let jitter = rng.random::<f32>();

            let (xi, yi) = ((x as usize).min(w - 1), (y as usize).min(h - 1));
            let i = yi * w + xi;
            let m = matte.weights()[i];
            if u >= seed_density(error[i], m, abstraction) {
                continue;
            }
            let radius = (r * (1.0 + abstraction * (1.0 - m))).min(style.stroke.max_radius);
            let color = nearest(&palette, reference.data[i]);
            let direction = wrap_pi(
                field.angle(xi as u32, yi as u32)
                    + (jitter - 0.5) * style.stroke.jitter * FRAC_PI_4,
            );
            let path = trace_path(field, x, y, direction, style.stroke.length, radius);
            paint_capsules(
                &mut canvas,
                &path,
                radius,
                palette[color],
                style.stroke.opacity,
            );
            strokes.push(StrokeParticle {
                x,
                y,
                direction,
                length: style.stroke.length,
                radius,
                color: style.palette[color],
                opacity: style.stroke.opacity,
                pass: pass as u8,
            });
        }
    }

    Ok(StrokeRender {
        image: canvas.to_raster(),
        strokes,
        candidates_per_pass,
    })
}

fn wrap_pi(a: f32) -> f32 {
    let pi = std::f32::consts::PI;
    let r = a.rem_euclid(pi);
    if r >= pi {
        0.0
    } else {
        r
    }
}

fn mean_color(img: &FloatImage) -> [f32; 3] {
    let mut sum = [0.0f64; 3];
    for px in &img.data {
        for k in 0..3 {
            sum[k] += f64::from(px[k]);
        }
    }
    sum.map(|s| (s / img.data.len() as f64) as f32)
}

/// Index of the nearest palette color; ties go to the earlier entry.
fn nearest(palette: &[[f32; 3]], c: [f32; 3]) -> usize {
    let mut best = (0, f32::INFINITY);
    for (i, p) in palette.iter().enumerate() {
        let d: f32 = (0..3).map(|k| (c[k] - p[k]) * (c[k] - p[k])).sum();
        if d < best.1 {
            best = (i, d);
        }
    }
    best.0
}

/// Polyline through `(x, y)` following the field both ways for `length / 2`.
fn trace_path(
    field: &OrientationField,
    x: f32,
    y: f32,
    direction: f32,
    length: f32,
    radius: f32,
) -> Vec<[f32; 2]> {
    let step = (0.5 * radius).max(1.0);
    let steps = libm::ceilf(0.5 * length / step) as usize;
    let (w, h) = field.dimensions();
    let half = |sign: f32| {
        let mut pts = Vec::with_capacity(steps);
        let (mut px, mut py) = (x, y);
        let mut d = [sign * libm::cosf(direction), sign * libm::sinf(direction)];
        for _ in 0..steps {
            px += d[0] * step;
            py += d[1] * step;
            if px < 0.0 || py < 0.0 || px >= w as f32 || py >= h as f32 {
                break;
            }
            pts.push([px, py]);
            let (fx, fy) = (px as u32, py as u32);
            if field.coherence(fx, fy) >= MIN_COHERENCE {
                let t = field.angle(fx, fy);
                let mut nd = [libm::cosf(t), libm::sinf(t)];
                // The field is an axis, not a vector: keep the current heading.
                if nd[0] * d[0] + nd[1] * d[1] < 0.0 {
                    nd = [-nd[0], -nd[1]];
                }
                d = nd;
            }
        }
        pts
    };
    let forward = half(1.0);
    let mut path = half(-1.0);
    path.reverse();
    path.push([x, y]);
    path.extend(forward);
    path
}

fn segment_distance(p: [f32; 2], a: [f32; 2], b: [f32; 2]) -> f32 {
    let (abx, aby) = (b[0] - a[0], b[1] - a[1]);
    let (apx, apy) = (p[0] - a[0], p[1] - a[1]);
    let len2 = abx * abx + aby * aby;
    let t = if len2 > 0.0 {
        ((apx * abx + apy * aby) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (dx, dy) = (apx - t * abx, apy - t * aby);
    libm::sqrtf(dx * dx + dy * dy)
}

/// Composites a round-capped stroke with a one-pixel anti-aliased rim.
fn paint_capsules(
    canvas: &mut FloatImage,
    path: &[[f32; 2]],
    radius: f32,
    color: [f32; 3],
    opacity: f32,
) {
    let pad = radius + 1.0;
    let (mut x0, mut y0, mut x1, mut y1) = (
        f32::INFINITY,
        f32::INFINITY,
        f32::NEG_INFINITY,
        f32::NEG_INFINITY,
    );
    for p in path {
        x0 = x0.min(p[0]);
        y0 = y0.min(p[1]);
        x1 = x1.max(p[0]);
        y1 = y1.max(p[1]);
    }
    let clampx = |v: f32| (v.max(0.0) as usize).min(canvas.width - 1);
    let clampy = |v: f32| (v.max(0.0) as usize).min(canvas.height - 1);
    let (bx0, bx1) = (clampx(x0 - pad), clampx(x1 + pad));
    let (by0, by1) = (clampy(y0 - pad), clampy(y1 + pad));
    for py in by0..=by1 {
        for px in bx0..=bx1 {
            let c = [px as f32 + 0.5, py as f32 + 0.5];
            let dist = if path.len() == 1 {
                segment_distance(c, path[0], path[0])
            } else {
                path.windows(2)
                    .map(|s| segment_distance(c, s[0], s[1]))
                    .fold(f32::INFINITY, f32::min)
            };
            let coverage = (radius + 0.5 - dist).clamp(0.0, 1.0);
            if coverage <= 0.0 {
                continue;
            }
            let alpha = opacity * coverage;
            let dst = &mut canvas.data[py * canvas.width + px];
            for k in 0..3 {
                dst[k] += (color[k] - dst[k]) * alpha;
            }
        }
    }
}
