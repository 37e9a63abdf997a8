//! Baseline stylization stage.
//!
//! The stage is a trait so a learned stylizer can replace the procedural one
//! without touching the rest of the pipeline.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::persona::StyleSpec;

use super::raster::{luma, FloatImage, RasterImage};

pub trait BaseStylizer: Send + Sync {
    fn name(&self) -> &str;

    /// Must preserve dimensions and be a pure function of its arguments.
    fn stylize(&self, image: &RasterImage, style: &StyleSpec, seed: u64) -> RasterImage;
}

/// Soft palette quantization followed by a smooth seeded warp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowQuantize {
    /// Softness of palette assignment, in unit RGB distance.
    pub temperature: f32,
    /// Share of the source luminance kept after recoloring.
    pub luminance_detail: f32,
    /// Warp displacement in pixels at abstraction 1.
    pub max_displacement: f32,
    /// Spacing of the random displacement lattice in pixels.
    pub cell_size: f32,
}

impl Default for FlowQuantize {
    fn default() -> Self {
        Self {
            temperature: 0.03,
            luminance_detail: 1.0,
            max_displacement: 6.0,
            cell_size: 32.0,
        }
    }
}

pub const FLOW_QUANTIZE: &str = "flow-quantize";
pub(crate) const WARP_STREAM: u64 = 1;

impl BaseStylizer for FlowQuantize {
    fn name(&self) -> &str {
        FLOW_QUANTIZE
    }

    fn stylize(&self, image: &RasterImage, style: &StyleSpec, seed: u64) -> RasterImage {
        let quantized = self.quantize(image, style);
        let amplitude = self.max_displacement * style.abstraction;
        if amplitude <= 0.0 {
            return quantized.to_raster();
        }
        self.warp(&quantized, amplitude, seed).to_raster()
    }
}

impl FlowQuantize {
    fn quantize(&self, image: &RasterImage, style: &StyleSpec) -> FloatImage {
        let palette: Vec<[f32; 3]> = style.palette.iter().map(|c| c.to_unit()).collect();
        let inv_t2 = 1.0 / (self.temperature * self.temperature);
        let mut out = image.to_float();
        for px in &mut out.data {
            let c = *px;
            let d2: Vec<f32> = palette
                .iter()
                .map(|p| (0..3).map(|k| (c[k] - p[k]) * (c[k] - p[k])).sum())
                .collect();
            let nearest = d2.iter().copied().fold(f32::INFINITY, f32::min);
            let mut total = 0.0f32;
            let mut target = [0.0f32; 3];
            for (p, d) in palette.iter().zip(&d2) {
                let w = libm::expf(-(d - nearest) * inv_t2);
                total += w;
                for k in 0..3 {
                    target[k] += w * p[k];
                }
            }
            let target = target.map(|v| v / total);
            let shift = (luma(c) - luma(target)) * self.luminance_detail;
            *px = target.map(|v| (v + shift).clamp(0.0, 1.0));
        }
        out
    }

    fn warp(&self, src: &FloatImage, amplitude: f32, seed: u64) -> FloatImage {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(WARP_STREAM);
        let gw = (src.width as f32 / self.cell_size).ceil() as usize + 2;
        let gh = (src.height as f32 / self.cell_size).ceil() as usize + 2;
        let lattice: Vec<[f32; 2]> = (0..gw * gh)
            .map(|_| {
                [
                    rng.random_range(-1.0f32..1.0),
                    rng.random_range(-1.0f32..1.0),
                ]
            })
            .collect();
        let fade = |t: f32| t * t * (3.0 - 2.0 * t);
        let mut out = src.clone();
        for y in 0..src.height {
            for x in 0..src.width {
                let gx = x as f32 / self.cell_size;
                let gy = y as f32 / self.cell_size;
                let (ix, iy) = (gx.floor() as usize, gy.floor() as usize);
                let (tx, ty) = (fade(gx - ix as f32), fade(gy - iy as f32));
                let node = |i: usize, j: usize| lattice[j * gw + i];
                let (a, b, c, d) = (
                    node(ix, iy),
                    node(ix + 1, iy),
                    node(ix, iy + 1),
                    node(ix + 1, iy + 1),
                );
                let disp: [f32; 2] = std::array::from_fn(|k| {
                    let top = a[k] + (b[k] - a[k]) * tx;
                    let bottom = c[k] + (d[k] - c[k]) * tx;
                    (top + (bottom - top) * ty) * amplitude
                });
                out.data[y * src.width + x] = src.sample(x as f32 + disp[0], y as f32 + disp[1]);
            }
        }
        out
    }
}

/// The stylizer selected by `StyleSpec::base_style`; unknown names fall back
/// to the procedural default.
pub fn stylizer_for(name: &str) -> Box<dyn BaseStylizer> {
    match name {
        FLOW_QUANTIZE => Box::new(FlowQuantize::default()),
        other => {
            tracing::warn!(
                base_style = other,
                "unknown base style, using {FLOW_QUANTIZE}"
            );
            Box::new(FlowQuantize::default())
        }
    }
}

pub fn base_stylize(image: &RasterImage, style: &StyleSpec, seed: u64) -> RasterImage {
    stylizer_for(&style.base_style).stylize(image, style, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::persona::{Categorization, Rgb, StyleMap};

    fn gray_ramp_style() -> StyleSpec {
        let mut style = StyleMap::builtin()
            .style_for(&Categorization::Neutral)
            .clone();
        style.palette = (0..16).map(|i| Rgb([i * 17; 3])).collect();
        style.abstraction = 0.0;
        style
    }

    #[test]
    fn identity_ramp_without_abstraction_is_a_no_op() {
        let style = gray_ramp_style();
        let img = RasterImage::from_fn(64, 64, |x, y| [(((x + y) % 16) * 17) as u8; 3]);
        let out = base_stylize(&img, &style, 3);
        for (a, b) in img.pixels().iter().zip(out.pixels()) {
            for k in 0..3 {
                assert!(a[k].abs_diff(b[k]) <= 1, "{a:?} vs {b:?}");
            }
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let style = StyleMap::builtin()
            .style_for(&"O+C-".parse().unwrap())
            .clone();
        let img = super::super::raster::sample_portrait(96, 1);
        assert_eq!(base_stylize(&img, &style, 9), base_stylize(&img, &style, 9));
        assert_ne!(
            base_stylize(&img, &style, 9),
            base_stylize(&img, &style, 10)
        );
    }

    #[test]
    fn preserves_dimensions() {
        let style = StyleMap::builtin().neutral().clone();
        let img = RasterImage::filled(70, 65, [200, 10, 10]);
        assert_eq!(base_stylize(&img, &style, 1).dimensions(), (70, 65));
    }
}
