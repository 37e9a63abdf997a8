//! One-sided portrait relighting.

use crate::persona::{LightSide, Lighting};

use super::raster::{to_u8, RasterImage};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelightParams {
    /// Shape of the falloff from lit to shadow edge; 1 is linear.
    pub gamma: f32,
    /// S-curve amount per unit of lighting strength.
    pub contrast: f32,
}

impl Default for RelightParams {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            contrast: 0.25,
        }
    }
}

/// Gain at normalized distance `from_lit` from the lit edge: from
/// `1 + strength/2` at the lit edge down to `1 - strength/2` at the other.
pub fn light_gain(from_lit: f32, strength: f32, gamma: f32) -> f32 {
    1.0 + 0.5 * strength - strength * libm::powf(from_lit, gamma)
}

/// Mild contrast curve with fixed points at 0, 0.5 and 1.
pub fn s_curve(v: f32, amount: f32) -> f32 {
    let smooth = v * v * (3.0 - 2.0 * v);
    v + amount * (smooth - v)
}

pub fn apply_rembrandt(image: &RasterImage, lighting: &Lighting) -> RasterImage {
    apply_rembrandt_with(image, lighting, RelightParams::default())
}

pub fn apply_rembrandt_with(
    image: &RasterImage,
    lighting: &Lighting,
    params: RelightParams,
) -> RasterImage {
    if lighting.strength <= 0.0 {
        return image.clone();
    }
    let w = image.width();
    let amount = params.contrast * lighting.strength;
    let gains: Vec<f32> = (0..w)
        .map(|x| {
            let lit_col = match lighting.side {
                LightSide::Left => x,
                LightSide::Right => w - 1 - x,
            };
            let t = if w > 1 {
                lit_col as f32 / (w - 1) as f32
            } else {
                0.0
            };
            light_gain(t, lighting.strength, params.gamma)
        })
        .collect();
    RasterImage::from_fn(w, image.height(), |x, y| {
        let g = gains[x as usize];
        image.get(x, y).map(|c| {
            let v = (f32::from(c) / 255.0 * g).clamp(0.0, 1.0);
            to_u8(s_curve(v, amount))
        })
    })
}
