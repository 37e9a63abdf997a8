//! Heuristic foreground matte.
//!
//! A centered ellipse prior is blended with a silhouette found by casting
//! rays from the image center and keeping, per ray, the outermost strong
//! luminance edge. Pixels beyond that edge fade out.

use std::f32::consts::TAU;

use super::raster::{MatteMask, RasterImage};
use super::RenderError;

const RAYS: usize = 256;
const PRIOR_WEIGHT: f32 = 0.4;
/// A ray needs an edge at least this fraction of the global peak to count.
const RAY_EDGE_FLOOR: f32 = 0.2;
/// Fraction of the ray's own peak that marks the silhouette.
const RAY_EDGE_RATIO: f32 = 0.5;
const FLAT_GRADIENT: f32 = 1e-3;
const MEDIAN_WINDOW: usize = 15;

fn smoothstep(e0: f32, e1: f32, x: f32) -> f32 {
    let t = ((x - e0) / (e1 - e0)).clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

struct Geometry {
    cx: f32,
    cy: f32,
    rx: f32,
    ry: f32,
}

impl Geometry {
    fn new(w: u32, h: u32) -> Self {
        Self {
            cx: (w as f32 - 1.0) / 2.0,
            cy: (h as f32 - 1.0) / 2.0,
            rx: 0.42 * w as f32,
            ry: 0.48 * h as f32,
        }
    }

    fn prior(&self, x: f32, y: f32) -> f32 {
        let u = (x - self.cx) / self.rx;
        let v = (y - self.cy) / self.ry;
        1.0 - smoothstep(0.75, 1.15, libm::sqrtf(u * u + v * v))
    }

    /// Distance from the center to the prior's 1.0 contour along `angle`.
    fn ellipse_radius(&self, angle: f32) -> f32 {
        let (s, c) = (libm::sinf(angle), libm::cosf(angle));
        let a = self.ry * c;
        let b = self.rx * s;
        self.rx * self.ry / libm::sqrtf(a * a + b * b)
    }
}

/// Sobel gradient magnitude of luminance with replicated borders.
pub(crate) fn gradient_magnitude(lum: &[f32], w: usize, h: usize) -> Vec<f32> {
    let at = |x: isize, y: isize| {
        let xc = x.clamp(0, w as isize - 1) as usize;
        let yc = y.clamp(0, h as isize - 1) as usize;
        lum[yc * w + xc]
    };
    let mut out = vec![0.0; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let gx = ((at(x + 1, y - 1) + at(x + 1, y + 1)) + 2.0 * at(x + 1, y))
                - ((at(x - 1, y - 1) + at(x - 1, y + 1)) + 2.0 * at(x - 1, y));
            let gy = ((at(x - 1, y + 1) + at(x + 1, y + 1)) + 2.0 * at(x, y + 1))
                - ((at(x - 1, y - 1) + at(x + 1, y - 1)) + 2.0 * at(x, y - 1));
            out[y as usize * w + x as usize] = libm::sqrtf(gx * gx + gy * gy);
        }
    }
    out
}

/// Returns `user_mask` after validation, or a heuristic matte.
pub fn segment_foreground(
    image: &RasterImage,
    user_mask: Option<&MatteMask>,
) -> Result<MatteMask, RenderError> {
    let (w, h) = image.dimensions();
    if let Some(mask) = user_mask {
        if mask.dimensions() != (w, h) {
            return Err(RenderError::DimensionMismatch {
                what: "user mask",
                expected: (w, h),
                found: mask.dimensions(),
            });
        }
        return Ok(mask.clone());
    }

    let geo = Geometry::new(w, h);
    let (wu, hu) = (w as usize, h as usize);
    let prior: Vec<f32> = (0..hu)
        .flat_map(|y| (0..wu).map(move |x| (x, y)))
        .map(|(x, y)| geo.prior(x as f32, y as f32))
        .collect();

    let grad = gradient_magnitude(&image.luminance(), wu, hu);
    let peak = grad.iter().copied().fold(0.0f32, f32::max);
    if peak < FLAT_GRADIENT {
        return Ok(MatteMask::from_parts(w, h, prior));
    }

    let silhouette = smooth_circular(&ray_silhouette(&grad, wu, hu, &geo, peak));
    let weights = (0..hu)
        .flat_map(|y| (0..wu).map(move |x| (x, y)))
        .zip(prior)
        .map(|((x, y), p)| {
            let dx = x as f32 - geo.cx;
            let dy = y as f32 - geo.cy;
            let dist = libm::sqrtf(dx * dx + dy * dy);
            let edge = interpolate_ray(&silhouette, libm::atan2f(dy, dx));
            let refined = 1.0 - smoothstep(edge - 1.5, edge + 1.5, dist);
            (PRIOR_WEIGHT * p + (1.0 - PRIOR_WEIGHT) * refined).clamp(0.0, 1.0)
        })
        .collect();
    Ok(MatteMask::from_parts(w, h, weights))
}

fn ray_silhouette(grad: &[f32], w: usize, h: usize, geo: &Geometry, peak: f32) -> Vec<f32> {
    (0..RAYS)
        .map(|k| {
            let angle = TAU * k as f32 / RAYS as f32;
            let (dy, dx) = (libm::sinf(angle), libm::cosf(angle));
            let mut samples = Vec::new();
            let mut r = 1.0f32;
            loop {
                let x = libm::roundf(geo.cx + dx * r);
                let y = libm::roundf(geo.cy + dy * r);
                // Stay off the outermost pixel ring, where Sobel sees the border.
                if x < 1.0 || y < 1.0 || x > (w - 2) as f32 || y > (h - 2) as f32 {
                    break;
                }
                samples.push((r, grad[y as usize * w + x as usize]));
                r += 1.0;
            }
            let ray_peak = samples.iter().map(|s| s.1).fold(0.0f32, f32::max);
            if ray_peak < RAY_EDGE_FLOOR * peak {
                return geo.ellipse_radius(angle);
            }
            samples
                .iter()
                .rev()
                .find(|s| s.1 >= RAY_EDGE_RATIO * ray_peak)
                .map(|s| s.0)
                .expect("ray peak is one of the samples")
        })
        .collect()
}

/// Circular median over a window of rays; removes narrow outliers.
fn smooth_circular(radii: &[f32]) -> Vec<f32> {
    let n = radii.len();
    (0..n)
        .map(|i| {
            let mut win: Vec<f32> = (0..MEDIAN_WINDOW)
                .map(|j| radii[(i + n + j - MEDIAN_WINDOW / 2) % n])
                .collect();
            win.sort_by(f32::total_cmp);
            win[MEDIAN_WINDOW / 2]
        })
        .collect()
}

fn interpolate_ray(radii: &[f32], angle: f32) -> f32 {
    let n = radii.len();
    let pos = angle.rem_euclid(TAU) / TAU * n as f32;
    let i0 = (pos.floor() as usize) % n;
    let i1 = (i0 + 1) % n;
    let t = pos - pos.floor();
    radii[i0] + (radii[i1] - radii[i0]) * t
}
