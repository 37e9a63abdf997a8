//! Portrait stylization: preprocess (matte + relight), base style, strokes.
//!
//! Every phase is a pure function of its inputs and the job seed. Random
//! draws come from ChaCha8 with one stream per phase, so changing one phase
//! never shifts another's sequence.

mod lighting;
mod matte;
mod orientation;
mod raster;
mod strokes;
mod stylize;

use crate::persona::StyleSpec;

pub use lighting::{apply_rembrandt, apply_rembrandt_with, light_gain, s_curve, RelightParams};
pub use matte::segment_foreground;
pub use orientation::{orientation_field, OrientationField};
pub use raster::{luma, sample_portrait, MatteMask, RasterImage, LUMA};
pub use strokes::{
    pass_radii, render_strokes, render_strokes_traced, seed_density, StrokeParticle, StrokeRender,
    CANDIDATES_PER_AREA, ERROR_SATURATION, PASSES,
};
pub use stylize::{base_stylize, stylizer_for, BaseStylizer, FlowQuantize, FLOW_QUANTIZE};

/// Smallest width and height accepted by [`render_portrait`].
pub const MIN_DIMENSION: u32 = 64;
/// Structure-tensor smoothing used by the pipeline, in pixels.
pub const FIELD_SMOOTHING: f32 = 3.0;
/// Name of the pinned generator; recorded with every job.
pub const RNG_ALGORITHM: &str = "chacha8";

#[derive(Debug, thiserror::Error)]
pub enum RenderError {
    #[error("image is {width}x{height}; both sides must be at least {MIN_DIMENSION}")]
    TooSmall { width: u32, height: u32 },
    #[error("{what} is {}x{}, expected {}x{}", found.0, found.1, expected.0, expected.1)]
    DimensionMismatch {
        what: &'static str,
        expected: (u32, u32),
        found: (u32, u32),
    },
    #[error("invalid mask: {0}")]
    InvalidMask(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("cannot decode image: {0}")]
    Decode(String),
    #[error("unsupported image format {0}; expected PNG or JPEG")]
    UnsupportedFormat(String),
    #[error("cannot encode PNG: {0}")]
    Encode(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("invalid style: {0}")]
    Style(String),
    #[error("{phase} failed: {source}")]
    Phase {
        phase: &'static str,
        #[source]
        source: Box<RenderError>,
    },
}

impl RenderError {
    fn in_phase(self, phase: &'static str) -> Self {
        RenderError::Phase {
            phase,
            source: Box::new(self),
        }
    }
}

/// Everything a render produces; `preprocessed`, `base` and `image` are the
/// three phase outputs.
#[derive(Debug, Clone)]
pub struct PortraitRender {
    pub matte: MatteMask,
    pub preprocessed: RasterImage,
    pub base: RasterImage,
    pub field: OrientationField,
    pub strokes: StrokeRender,
}

impl PortraitRender {
    pub fn final_image(&self) -> &RasterImage {
        &self.strokes.image
    }

    pub fn phase_outputs(&self) -> [&RasterImage; 3] {
        [&self.preprocessed, &self.base, &self.strokes.image]
    }
}

pub fn render_portrait(
    image: &RasterImage,
    style: &StyleSpec,
    seed: u64,
    user_mask: Option<&MatteMask>,
) -> Result<PortraitRender, RenderError> {
    let (width, height) = image.dimensions();
    if width < MIN_DIMENSION || height < MIN_DIMENSION {
        return Err(RenderError::TooSmall { width, height });
    }
    style
        .validate()
        .map_err(|e| RenderError::Style(e.to_string()))?;

    let matte = segment_foreground(image, user_mask).map_err(|e| e.in_phase("segmentation"))?;
    let preprocessed = apply_rembrandt(image, &style.lighting);
    let base = base_stylize(&preprocessed, style, seed);
    let field = orientation_field(&base, FIELD_SMOOTHING).map_err(|e| e.in_phase("orientation"))?;
    let strokes = render_strokes_traced(&base, &matte, &field, style, seed)
        .map_err(|e| e.in_phase("strokes"))?;
    tracing::debug!(
        width,
        height,
        seed,
        strokes = strokes.strokes.len(),
        "portrait rendered"
    );
    Ok(PortraitRender {
        matte,
        preprocessed,
        base,
        field,
        strokes,
    })
}

/// Mean over pixels of the luminance variance in the 3x3 neighborhood;
/// borders use the in-bounds part of the window.
pub fn local_variance(image: &RasterImage) -> f64 {
    let (w, h) = (image.width() as usize, image.height() as usize);
    let lum: Vec<f64> = image
        .pixels()
        .iter()
        .map(|p| f64::from(luma(p.map(|c| f32::from(c) / 255.0))))
        .collect();
    let mut total = 0.0;
    for y in 0..h {
        for x in 0..w {
            let (mut s, mut s2, mut n) = (0.0, 0.0, 0.0);
            for yy in y.saturating_sub(1)..(y + 2).min(h) {
                for xx in x.saturating_sub(1)..(x + 2).min(w) {
                    let v = lum[yy * w + xx];
                    s += v;
                    s2 += v * v;
                    n += 1.0;
                }
            }
            let mean = s / n;
            total += (s2 / n - mean * mean).max(0.0);
        }
    }
    total / (w * h) as f64
}
