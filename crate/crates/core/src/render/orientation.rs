//! Stroke direction field from the smoothed structure tensor.
//!
//! For luminance gradients `(gx, gy)` the tensor `[[gx², gx·gy], [gx·gy, gy²]]`
//! is Gaussian-smoothed per component. Its major eigenvector is the edge
//! normal; strokes follow the minor one, i.e. run along edges.

use std::f32::consts::{FRAC_PI_2, PI};

use super::raster::{gaussian_blur, RasterImage};
use super::RenderError;

/// Below this tensor trace a pixel counts as flat.
const FLAT_TRACE: f32 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct OrientationField {
    width: u32,
    height: u32,
    /// Edge-tangent angle in `[0, π)`.
    angles: Vec<f32>,
    /// `(λ1 - λ2) / (λ1 + λ2)`, 0 on flat regions.
    coherence: Vec<f32>,
}

impl OrientationField {
    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn angle(&self, x: u32, y: u32) -> f32 {
        self.angles[y as usize * self.width as usize + x as usize]
    }

    pub fn coherence(&self, x: u32, y: u32) -> f32 {
        self.coherence[y as usize * self.width as usize + x as usize]
    }

    pub fn angles(&self) -> &[f32] {
        &self.angles
    }

    pub fn coherences(&self) -> &[f32] {
        &self.coherence
    }
}

pub fn orientation_field(
    image: &RasterImage,
    smoothing_radius: f32,
) -> Result<OrientationField, RenderError> {
    if smoothing_radius.is_nan() || smoothing_radius < 1.0 {
        return Err(RenderError::InvalidInput(format!(
            "smoothing radius must be >= 1, got {smoothing_radius}"
        )));
    }
    let (w, h) = image.dimensions();
    let (wu, hu) = (w as usize, h as usize);
    let lum = image.luminance();
    let at = |x: isize, y: isize| {
        let xc = x.clamp(0, wu as isize - 1) as usize;
        let yc = y.clamp(0, hu as isize - 1) as usize;
        lum[yc * wu + xc]
    };

    let n = wu * hu;
    let (mut jxx, mut jxy, mut jyy) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for y in 0..hu as isize {
        for x in 0..wu as isize {
            // Sobel, with mirror taps paired so a half-turn only flips signs.
            let gx = ((at(x + 1, y - 1) + at(x + 1, y + 1)) + 2.0 * at(x + 1, y))
                - ((at(x - 1, y - 1) + at(x - 1, y + 1)) + 2.0 * at(x - 1, y));
            let gy = ((at(x - 1, y + 1) + at(x + 1, y + 1)) + 2.0 * at(x, y + 1))
                - ((at(x - 1, y - 1) + at(x + 1, y - 1)) + 2.0 * at(x, y - 1));
            let i = y as usize * wu + x as usize;
            jxx[i] = gx * gx;
            jxy[i] = gx * gy;
            jyy[i] = gy * gy;
        }
    }
    let jxx = gaussian_blur(&jxx, wu, hu, smoothing_radius);
    let jxy = gaussian_blur(&jxy, wu, hu, smoothing_radius);
    let jyy = gaussian_blur(&jyy, wu, hu, smoothing_radius);

    let mut angles = vec![0.0; n];
    let mut coherence = vec![0.0; n];
    for i in 0..n {
        let (a, b, c) = (jxx[i], jxy[i], jyy[i]);
        let trace = a + c;
        if trace <= FLAT_TRACE {
            continue;
        }
        let diff = a - c;
        let spread = libm::sqrtf(diff * diff + 4.0 * b * b);
        coherence[i] = (spread / trace).clamp(0.0, 1.0);
        if spread <= FLAT_TRACE {
            continue;
        }
        let normal = 0.5 * libm::atan2f(2.0 * b, diff);
        let mut tangent = normal + FRAC_PI_2;
        if tangent >= PI {
            tangent -= PI;
        }
        if tangent < 0.0 {
            tangent += PI;
        }
        angles[i] = tangent;
    }
    Ok(OrientationField {
        width: w,
        height: h,
        angles,
        coherence,
    })
}
