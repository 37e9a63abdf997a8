use std::io::Cursor;
use std::path::Path;

use image::{ImageFormat, RgbImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::RenderError;

/// Rec. 709 luma weights applied to sRGB-encoded values.
pub const LUMA: [f32; 3] = [0.2126, 0.7152, 0.0722];

pub fn luma(c: [f32; 3]) -> f32 {
    LUMA[0] * c[0] + LUMA[1] * c[1] + LUMA[2] * c[2]
}

pub(crate) fn to_u8(v: f32) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// 8-bit sRGB raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: u32,
    height: u32,
    pixels: Vec<[u8; 3]>,
}

impl RasterImage {
    pub fn new(width: u32, height: u32, pixels: Vec<[u8; 3]>) -> Result<Self, RenderError> {
        let expected = width as usize * height as usize;
        if pixels.len() != expected {
            return Err(RenderError::InvalidInput(format!(
                "pixel buffer has {} entries for a {width}x{height} image",
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: u32, height: u32, color: [u8; 3]) -> Self {
        Self {
            width,
            height,
            pixels: vec![color; width as usize * height as usize],
        }
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> [u8; 3]) -> Self {
        let mut pixels = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    /// The image turned by half a revolution.
    pub fn rotated_180(&self) -> Self {
        let mut pixels = self.pixels.clone();
        pixels.reverse();
        Self { pixels, ..*self }
    }

    /// Decodes PNG or JPEG. Alpha, if present, is dropped.
    pub fn decode(bytes: &[u8]) -> Result<Self, RenderError> {
        let format = image::guess_format(bytes).map_err(|e| RenderError::Decode(e.to_string()))?;
        if !matches!(format, ImageFormat::Png | ImageFormat::Jpeg) {
            return Err(RenderError::UnsupportedFormat(format!("{format:?}")));
        }
        let img = image::load_from_memory_with_format(bytes, format)
            .map_err(|e| RenderError::Decode(e.to_string()))?
            .to_rgb8();
        Ok(Self::from_rgb(img))
    }

    pub fn open(path: &Path) -> Result<Self, RenderError> {
        Self::decode(&std::fs::read(path)?)
    }

    fn from_rgb(img: RgbImage) -> Self {
        let (width, height) = img.dimensions();
        let pixels = img.pixels().map(|p| p.0).collect();
        Self {
            width,
            height,
            pixels,
        }
    }

    fn to_rgb(&self) -> RgbImage {
        let raw: Vec<u8> = self.pixels.iter().flatten().copied().collect();
        RgbImage::from_raw(self.width, self.height, raw).expect("buffer matches dimensions")
    }

    pub fn encode_png(&self) -> Result<Vec<u8>, RenderError> {
        let mut out = Cursor::new(Vec::new());
        self.to_rgb()
            .write_to(&mut out, ImageFormat::Png)
            .map_err(|e| RenderError::Encode(e.to_string()))?;
        Ok(out.into_inner())
    }

    pub fn save_png(&self, path: &Path) -> Result<(), RenderError> {
        std::fs::write(path, self.encode_png()?)?;
        Ok(())
    }

    pub(crate) fn to_float(&self) -> FloatImage {
        FloatImage {
            width: self.width as usize,
            height: self.height as usize,
            data: self
                .pixels
                .iter()
                .map(|p| p.map(|c| f32::from(c) / 255.0))
                .collect(),
        }
    }

    pub(crate) fn luminance(&self) -> Vec<f32> {
        self.pixels
            .iter()
            .map(|p| luma(p.map(|c| f32::from(c) / 255.0)))
            .collect()
    }
}

/// Per-pixel foreground weight in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatteMask {
    width: u32,
    height: u32,
    weights: Vec<f32>,
}

impl MatteMask {
    pub fn new(width: u32, height: u32, weights: Vec<f32>) -> Result<Self, RenderError> {
        if weights.len() != width as usize * height as usize {
            return Err(RenderError::InvalidMask(format!(
                "{} weights for a {width}x{height} mask",
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(0.0..=1.0).contains(*w)) {
            return Err(RenderError::InvalidMask(format!(
                "weight {w} outside [0, 1]"
            )));
        }
        Ok(Self {
            width,
            height,
            weights,
        })
    }

    /// Grayscale image where white is foreground.
    pub fn from_image(img: &RasterImage) -> Self {
        let weights = img
            .pixels()
            .iter()
            .map(|p| luma(p.map(|c| f32::from(c) / 255.0)).clamp(0.0, 1.0))
            .collect();
        Self {
            width: img.width(),
            height: img.height(),
            weights,
        }
    }

    pub fn to_image(&self) -> RasterImage {
        let pixels = self.weights.iter().map(|w| [to_u8(*w); 3]).collect();
        RasterImage {
            width: self.width,
            height: self.height,
            pixels,
        }
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn weights(&self) -> &[f32] {
        &self.weights
    }

    pub fn get(&self, x: u32, y: u32) -> f32 {
        self.weights[y as usize * self.width as usize + x as usize]
    }

    pub(crate) fn from_parts(width: u32, height: u32, weights: Vec<f32>) -> Self {
        Self {
            width,
            height,
            weights,
        }
    }
}

/// Float working copy, channels in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct FloatImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<[f32; 3]>,
}

impl FloatImage {
    pub fn to_raster(&self) -> RasterImage {
        RasterImage {
            width: self.width as u32,
            height: self.height as u32,
            pixels: self.data.iter().map(|c| c.map(to_u8)).collect(),
        }
    }

    pub fn at(&self, x: usize, y: usize) -> [f32; 3] {
        self.data[y * self.width + x]
    }

    /// Bilinear sample with clamped borders.
    pub fn sample(&self, x: f32, y: f32) -> [f32; 3] {
        let xf = x.clamp(0.0, (self.width - 1) as f32);
        let yf = y.clamp(0.0, (self.height - 1) as f32);
        let x0 = xf.floor() as usize;
        let y0 = yf.floor() as usize;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let tx = xf - x0 as f32;
        let ty = yf - y0 as f32;
        let (a, b, c, d) = (
            self.at(x0, y0),
            self.at(x1, y0),
            self.at(x0, y1),
            self.at(x1, y1),
        );
        std::array::from_fn(|k| {
            let top = a[k] + (b[k] - a[k]) * tx;
            let bottom = c[k] + (d[k] - c[k]) * tx;
            top + (bottom - top) * ty
        })
    }

    pub fn blurred(&self, sigma: f32) -> FloatImage {
        let mut channels: [Vec<f32>; 3] =
            std::array::from_fn(|k| self.data.iter().map(|p| p[k]).collect());
        for ch in &mut channels {
            *ch = gaussian_blur(ch, self.width, self.height, sigma);
        }
        let data = (0..self.data.len())
            .map(|i| [channels[0][i], channels[1][i], channels[2][i]])
            .collect();
        FloatImage {
            width: self.width,
            height: self.height,
            data,
        }
    }
}

fn gaussian_kernel(sigma: f32) -> Vec<f32> {
    let radius = (3.0 * sigma).ceil().max(1.0) as usize;
    let mut k: Vec<f32> = (0..=radius)
        .map(|i| libm::expf(-((i * i) as f32) / (2.0 * sigma * sigma)))
        .collect();
    let total = k[0] + 2.0 * k[1..].iter().sum::<f32>();
    k.iter_mut().for_each(|v| *v /= total);
    k
}

/// Separable Gaussian blur with replicated borders. Mirror-image taps are
/// added before weighting, so the result of a flipped input is exactly the
/// flipped result.
pub(crate) fn gaussian_blur(src: &[f32], width: usize, height: usize, sigma: f32) -> Vec<f32> {
    if sigma <= 0.0 {
        return src.to_vec();
    }
    let kernel = gaussian_kernel(sigma);
    let mut tmp = vec![0.0f32; src.len()];
    for y in 0..height {
        let row = &src[y * width..(y + 1) * width];
        for x in 0..width {
            let mut acc = kernel[0] * row[x];
            for (i, w) in kernel.iter().enumerate().skip(1) {
                let l = row[x.saturating_sub(i)];
                let r = row[(x + i).min(width - 1)];
                acc += w * (l + r);
            }
            tmp[y * width + x] = acc;
        }
    }
    let mut out = vec![0.0f32; src.len()];
    for x in 0..width {
        for y in 0..height {
            let mut acc = kernel[0] * tmp[y * width + x];
            for (i, w) in kernel.iter().enumerate().skip(1) {
                let u = tmp[y.saturating_sub(i) * width + x];
                let d = tmp[(y + i).min(height - 1) * width + x];
                acc += w * (u + d);
            }
            out[y * width + x] = acc;
        }
    }
    out
}

/// Synthetic head-and-shoulders portrait with film grain, used for demos and
/// tests. `variant` changes palette, pose and grain.
pub fn sample_portrait(size: u32, variant: u32) -> RasterImage {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + u64::from(variant));
    let s = size as f32;
    let bg_top: [f32; 3] = match variant % 3 {
        0 => [0.30, 0.42, 0.55],
        1 => [0.55, 0.50, 0.35],
        _ => [0.25, 0.45, 0.30],
    };
    let bg_bottom = bg_top.map(|c| c * 0.55);
    let skin: [f32; 3] = match variant % 3 {
        0 => [0.87, 0.68, 0.55],
        1 => [0.62, 0.44, 0.32],
        _ => [0.80, 0.62, 0.50],
    };
    let hair: [f32; 3] = match variant % 3 {
        0 => [0.20, 0.13, 0.08],
        1 => [0.08, 0.06, 0.05],
        _ => [0.55, 0.35, 0.18],
    };
    let shirt: [f32; 3] = match variant % 3 {
        0 => [0.65, 0.15, 0.18],
        1 => [0.15, 0.30, 0.60],
        _ => [0.85, 0.85, 0.80],
    };
    let tilt = (variant as f32 - 1.0) * 0.04;
    let (cx, cy) = (0.5 * s + tilt * s, 0.42 * s);
    let (hx, hy) = (0.19 * s, 0.25 * s);
    let grain = 0.03 + 0.01 * (variant % 2) as f32;

    let ellipse = |x: f32, y: f32, ex: f32, ey: f32, rx: f32, ry: f32| -> f32 {
        let (u, v) = ((x - ex) / rx, (y - ey) / ry);
        u * u + v * v
    };
    let mix = |a: [f32; 3], b: [f32; 3], t: f32| -> [f32; 3] {
        std::array::from_fn(|k| a[k] + (b[k] - a[k]) * t.clamp(0.0, 1.0))
    };
    RasterImage::from_fn(size, size, |x, y| {
        let (fx, fy) = (x as f32 + 0.5, y as f32 + 0.5);
        let mut c = mix(bg_top, bg_bottom, fy / s);
        // Soft vignette on the backdrop.
        let v = ellipse(fx, fy, 0.5 * s, 0.45 * s, 0.7 * s, 0.7 * s);
        c = c.map(|ch| ch * (1.0 - 0.25 * v.min(1.0)));
        // Shoulders and neck.
        if ellipse(fx, fy, 0.5 * s, 1.02 * s, 0.42 * s, 0.30 * s) < 1.0 {
            c = mix(shirt, shirt.map(|ch| ch * 0.6), (fx - 0.1 * s) / (0.8 * s));
        }
        if (fx - cx).abs() < 0.07 * s && fy > cy + 0.15 * s && fy < 0.8 * s {
            c = skin.map(|ch| ch * 0.85);
        }
        // Hair behind the face.
        let hair_d = ellipse(fx, fy, cx, cy - 0.04 * s, hx * 1.18, hy * 1.08);
        if hair_d < 1.0 {
            c = hair;
        }
        let face_d = ellipse(fx, fy, cx, cy + 0.02 * s, hx, hy);
        if face_d < 1.0 && fy > cy - 0.12 * s {
            let shade = 1.0 - 0.25 * ((fx - cx) / hx).max(0.0) - 0.1 * face_d;
            c = skin.map(|ch| ch * shade);
            for side in [-1.0f32, 1.0] {
                let ex = cx + side * 0.075 * s;
                let ey = cy;
                let e = ellipse(fx, fy, ex, ey, 0.035 * s, 0.016 * s);
                if e < 1.0 {
                    c = [0.95, 0.95, 0.93];
                    if ellipse(fx, fy, ex, ey, 0.013 * s, 0.013 * s) < 1.0 {
                        c = [0.12, 0.10, 0.09];
                    }
                }
                if ellipse(fx, fy, ex, ey - 0.04 * s, 0.045 * s, 0.008 * s) < 1.0 {
                    c = hair.map(|ch| ch * 1.1);
                }
            }
            if ellipse(fx, fy, cx, cy + 0.07 * s, 0.015 * s, 0.05 * s) < 1.0 {
                c = c.map(|ch| ch * 0.88);
            }
            if ellipse(fx, fy, cx, cy + 0.145 * s, 0.06 * s, 0.015 * s) < 1.0 {
                c = [0.62, 0.28, 0.28];
            }
        }
        let n: f32 =
            (rng.random::<f32>() + rng.random::<f32>() + rng.random::<f32>() - 1.5) * 2.0 * grain;
        c.map(|ch| to_u8(ch + n))
    })
}
