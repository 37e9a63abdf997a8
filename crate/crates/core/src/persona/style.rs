use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub const MIN_PALETTE: usize = 8;
pub const MAX_PALETTE: usize = 16;

#[derive(Debug, Error, PartialEq)]
pub enum StyleSpecError {
    #[error("palette has {0} colors, expected 8 to 16")]
    PaletteSize(usize),
    #[error("stroke radii must satisfy 1 <= min_radius <= max_radius, got {0} and {1}")]
    Radii(f32, f32),
    #[error("{0} = {1} is outside its allowed range")]
    Range(&'static str, f32),
    #[error("invalid color {0:?}")]
    Color(String),
}

/// 8-bit sRGB color, written as `#rrggbb` in data files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rgb(pub [u8; 3]);

impl Rgb {
    pub fn to_unit(self) -> [f32; 3] {
        self.0.map(|c| f32::from(c) / 255.0)
    }
}

impl fmt::Display for Rgb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [r, g, b] = self.0;
        write!(f, "#{r:02x}{g:02x}{b:02x}")
    }
}

impl FromStr for Rgb {
    type Err = StyleSpecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || StyleSpecError::Color(s.to_string());
        let hex = s.trim().strip_prefix('#').ok_or_else(bad)?;
        if hex.len() != 6 {
            return Err(bad());
        }
        let mut rgb = [0u8; 3];
        for (i, c) in rgb.iter_mut().enumerate() {
            *c = u8::from_str_radix(&hex[2 * i..2 * i + 2], 16).map_err(|_| bad())?;
        }
        Ok(Rgb(rgb))
    }
}

impl Serialize for Rgb {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rgb {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrokeParams {
    pub min_radius: f32,
    pub max_radius: f32,
    pub length: f32,
    pub opacity: f32,
    pub jitter: f32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LightSide {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lighting {
    pub side: LightSide,
    pub strength: f32,
}

/// Rendering parameters chosen for a personality cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StyleSpec {
    /// Cell label (`E+A+`) or `neutral`.
    #[serde(default)]
    pub label: String,
    /// Human-facing style name from the style map.
    pub name: String,
    pub palette: Vec<Rgb>,
    pub stroke: StrokeParams,
    pub abstraction: f32,
    pub lighting: Lighting,
    #[serde(default = "default_base_style")]
    pub base_style: String,
}

fn default_base_style() -> String {
    "flow-quantize".to_string()
}

fn unit(name: &'static str, v: f32) -> Result<(), StyleSpecError> {
    if v.is_finite() && (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(StyleSpecError::Range(name, v))
    }
}

impl StyleSpec {
    pub fn validate(&self) -> Result<(), StyleSpecError> {
        let n = self.palette.len();
        if !(MIN_PALETTE..=MAX_PALETTE).contains(&n) {
            return Err(StyleSpecError::PaletteSize(n));
        }
        let s = &self.stroke;
        if !(s.min_radius.is_finite() && s.max_radius.is_finite())
            || s.min_radius < 1.0
            || s.min_radius > s.max_radius
        {
            return Err(StyleSpecError::Radii(s.min_radius, s.max_radius));
        }
        if !(s.length.is_finite() && s.length >= 1.0) {
            return Err(StyleSpecError::Range("stroke.length", s.length));
        }
        unit("stroke.opacity", s.opacity)?;
        unit("stroke.jitter", s.jitter)?;
        unit("abstraction", self.abstraction)?;
        unit("lighting.strength", self.lighting.strength)?;
        Ok(())
    }

    /// Stable fingerprint of palette and stroke, used by the table linter.
    pub(crate) fn look_key(&self) -> String {
        let s = &self.stroke;
        let palette: Vec<String> = self.palette.iter().map(Rgb::to_string).collect();
        format!(
            "{}|{}/{}/{}/{}/{}",
            palette.join(","),
            s.min_radius,
            s.max_radius,
            s.length,
            s.opacity,
            s.jitter
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn sample() -> StyleSpec {
        StyleSpec {
            label: "E+E+".into(),
            name: "test".into(),
            palette: (0..8).map(|i| Rgb([i * 30, 100, 200])).collect(),
            stroke: StrokeParams {
                min_radius: 2.0,
                max_radius: 8.0,
                length: 12.0,
                opacity: 0.8,
                jitter: 0.2,
            },
            abstraction: 0.5,
            lighting: Lighting {
                side: LightSide::Left,
                strength: 0.5,
            },
            base_style: default_base_style(),
        }
    }

    #[test]
    fn rgb_parse_and_display() {
        let c: Rgb = "#1a2B3c".parse().unwrap();
        assert_eq!(c, Rgb([0x1a, 0x2b, 0x3c]));
        assert_eq!(c.to_string(), "#1a2b3c");
        assert!("1a2b3c".parse::<Rgb>().is_err());
        assert!("#12345".parse::<Rgb>().is_err());
        assert!("#gg0000".parse::<Rgb>().is_err());
    }

    #[test]
    fn validation() {
        assert_eq!(sample().validate(), Ok(()));

        let mut s = sample();
        s.palette.truncate(7);
        assert_eq!(s.validate(), Err(StyleSpecError::PaletteSize(7)));

        let mut s = sample();
        s.stroke.min_radius = 9.0;
        assert!(matches!(s.validate(), Err(StyleSpecError::Radii(..))));

        let mut s = sample();
        s.abstraction = 1.2;
        assert_eq!(s.validate(), Err(StyleSpecError::Range("abstraction", 1.2)));

        let mut s = sample();
        s.stroke.opacity = -0.1;
        assert!(s.validate().is_err());
    }
}
