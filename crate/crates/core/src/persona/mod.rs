//! Big-Five profile scoring and AB5C circumplex categorization.

mod style;
mod tables;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::dialogue::AnswerRecord;

pub use style::{LightSide, Lighting, Rgb, StrokeParams, StyleSpec, StyleSpecError};
pub use tables::{AdjectiveTable, LintReport, StyleMap, TableError};

/// Scores with smaller magnitude do not count as dominant.
pub const DEFAULT_DOMINANCE_BAND: f64 = 0.1;

#[derive(Debug, Error, PartialEq)]
pub enum PersonaError {
    #[error("missing answer for dimension {0}")]
    MissingDimension(Dimension),
    #[error("duplicate answer for dimension {0}")]
    DuplicateDimension(Dimension),
    #[error("score for {0} is not a finite value in [-1, 1]")]
    ScoreOutOfRange(Dimension),
    #[error("invalid cell label {0:?}")]
    BadLabel(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dimension {
    #[serde(rename = "O")]
    Openness,
    #[serde(rename = "C")]
    Conscientiousness,
    #[serde(rename = "E")]
    Extraversion,
    #[serde(rename = "A")]
    Agreeableness,
    #[serde(rename = "N")]
    Neuroticism,
}

impl Dimension {
    /// Canonical O, C, E, A, N order; also the tie-break order for ranking.
    pub const ALL: [Dimension; 5] = [
        Dimension::Openness,
        Dimension::Conscientiousness,
        Dimension::Extraversion,
        Dimension::Agreeableness,
        Dimension::Neuroticism,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn letter(self) -> char {
        match self {
            Self::Openness => 'O',
            Self::Conscientiousness => 'C',
            Self::Extraversion => 'E',
            Self::Agreeableness => 'A',
            Self::Neuroticism => 'N',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|d| d.letter() == c.to_ascii_uppercase())
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Openness => "Openness",
            Self::Conscientiousness => "Conscientiousness",
            Self::Extraversion => "Extraversion",
            Self::Agreeableness => "Agreeableness",
            Self::Neuroticism => "Neuroticism",
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn of(x: f64) -> Self {
        if x < 0.0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

/// A signed factor such as `E+` or `N-`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pole {
    pub dimension: Dimension,
    pub sign: Sign,
}

impl Pole {
    pub fn new(dimension: Dimension, sign: Sign) -> Self {
        Self { dimension, sign }
    }

    pub fn all() -> impl Iterator<Item = Pole> {
        Dimension::ALL
            .into_iter()
            .flat_map(|d| [Pole::new(d, Sign::Plus), Pole::new(d, Sign::Minus)])
    }

    pub fn flip(self) -> Self {
        Pole::new(self.dimension, self.sign.flip())
    }
}

impl fmt::Display for Pole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.dimension.letter(), self.sign.symbol())
    }
}

/// Identity of one of the 90 AB5C cells: ten pure cells where both poles
/// coincide and eighty blends whose secondary pole lies on another factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellId {
    pub primary: Pole,
    pub secondary: Pole,
}

impl CellId {
    pub fn new(primary: Pole, secondary: Pole) -> Option<Self> {
        let pure = primary == secondary;
        if pure || primary.dimension != secondary.dimension {
            Some(Self { primary, secondary })
        } else {
            None
        }
    }

    pub fn pure(pole: Pole) -> Self {
        Self {
            primary: pole,
            secondary: pole,
        }
    }

    pub fn is_pure(&self) -> bool {
        self.primary == self.secondary
    }

    /// All 90 cells, ordered by primary pole then secondary pole.
    pub fn all() -> Vec<CellId> {
        let mut cells = Vec::with_capacity(90);
        for p in Pole::all() {
            for s in Pole::all() {
                if let Some(c) = CellId::new(p, s) {
                    cells.push(c);
                }
            }
        }
        cells
    }

    pub fn label(&self) -> String {
        format!("{}{}", self.primary, self.secondary)
    }

    pub fn negated(&self) -> Self {
        Self {
            primary: self.primary.flip(),
            secondary: self.secondary.flip(),
        }
    }
}

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.primary, self.secondary)
    }
}

impl FromStr for CellId {
    type Err = PersonaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PersonaError::BadLabel(s.to_string());
        let chars: Vec<char> = s.trim().chars().collect();
        if chars.len() != 4 {
            return Err(bad());
        }
        let pole = |d: char, g: char| -> Result<Pole, PersonaError> {
            let dim = Dimension::from_letter(d).ok_or_else(bad)?;
            let sign = match g {
                '+' => Sign::Plus,
                '-' | '−' => Sign::Minus,
                _ => return Err(bad()),
            };
            Ok(Pole::new(dim, sign))
        };
        let primary = pole(chars[0], chars[1])?;
        let secondary = pole(chars[2], chars[3])?;
        CellId::new(primary, secondary).ok_or_else(bad)
    }
}

impl Serialize for CellId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.label())
    }
}

impl<'de> Deserialize<'de> for CellId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Result of circumplex mapping: a cell, or the neutral fallback when no
/// trait clears the dominance band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Categorization {
    Cell(CellId),
    Neutral,
}

impl Categorization {
    pub const NEUTRAL_LABEL: &'static str = "neutral";

    pub fn label(&self) -> String {
        match self {
            Categorization::Cell(c) => c.label(),
            Categorization::Neutral => Self::NEUTRAL_LABEL.to_string(),
        }
    }

    pub fn cell(&self) -> Option<CellId> {
        match self {
            Categorization::Cell(c) => Some(*c),
            Categorization::Neutral => None,
        }
    }
}

impl fmt::Display for Categorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for Categorization {
    type Err = PersonaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim().eq_ignore_ascii_case(Self::NEUTRAL_LABEL) {
            Ok(Categorization::Neutral)
        } else {
            s.parse().map(Categorization::Cell)
        }
    }
}

impl Serialize for Categorization {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.label())
    }
}

impl<'de> Deserialize<'de> for Categorization {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Per-dimension direction converting answer polarity into trait score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Keying([i8; 5]);

impl Keying {
    pub fn new(o: i8, c: i8, e: i8, a: i8, n: i8) -> Self {
        let k = [o, c, e, a, n];
        assert!(
            k.iter().all(|v| *v == 1 || *v == -1),
            "keying must be +1 or -1"
        );
        Self(k)
    }

    pub fn get(&self, d: Dimension) -> i8 {
        self.0[d.index()]
    }

    pub fn set(&mut self, d: Dimension, k: i8) {
        assert!(k == 1 || k == -1);
        self.0[d.index()] = k;
    }
}

impl Default for Keying {
    /// Conscientiousness and Neuroticism questions are reverse keyed.
    fn default() -> Self {
        Keying::new(1, -1, 1, 1, -1)
    }
}

/// Signed trait scores in `[-1, 1]`, one per dimension.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BigFiveProfile {
    scores: [f64; 5],
}

impl BigFiveProfile {
    pub fn new(scores: [f64; 5]) -> Result<Self, PersonaError> {
        for d in Dimension::ALL {
            let s = scores[d.index()];
            if !s.is_finite() || !(-1.0..=1.0).contains(&s) {
                return Err(PersonaError::ScoreOutOfRange(d));
            }
        }
        Ok(Self { scores })
    }

    pub fn from_pairs(pairs: &[(Dimension, f64)]) -> Result<Self, PersonaError> {
        let mut scores = [0.0; 5];
        for &(d, s) in pairs {
            scores[d.index()] = s;
        }
        Self::new(scores)
    }

    pub fn get(&self, d: Dimension) -> f64 {
        self.scores[d.index()]
    }

    pub fn scores(&self) -> [f64; 5] {
        self.scores
    }

    /// Multiplies every score by `factor` and clamps back into `[-1, 1]`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            scores: self.scores.map(|s| (s * factor).clamp(-1.0, 1.0)),
        }
    }
}

impl Serialize for BigFiveProfile {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = s.serialize_map(Some(5))?;
        for d in Dimension::ALL {
            map.serialize_entry(&d.letter().to_string(), &self.get(d))?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for BigFiveProfile {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let map = std::collections::BTreeMap::<Dimension, f64>::deserialize(d)?;
        let mut scores = [0.0; 5];
        for dim in Dimension::ALL {
            scores[dim.index()] = *map
                .get(&dim)
                .ok_or_else(|| serde::de::Error::custom(format!("missing dimension {dim}")))?;
        }
        BigFiveProfile::new(scores).map_err(serde::de::Error::custom)
    }
}

/// `score(d) = keying(d) * polarity(d) * relevance(d)`, clamped to `[-1, 1]`.
pub fn score_profile(
    answers: &[AnswerRecord],
    keying: &Keying,
) -> Result<BigFiveProfile, PersonaError> {
    let mut seen: [Option<&AnswerRecord>; 5] = [None; 5];
    for a in answers {
        let slot = &mut seen[a.dimension.index()];
        if slot.is_some() {
            return Err(PersonaError::DuplicateDimension(a.dimension));
        }
        *slot = Some(a);
    }
    let mut scores = [0.0; 5];
    for d in Dimension::ALL {
        let a = seen[d.index()].ok_or(PersonaError::MissingDimension(d))?;
        let s = f64::from(keying.get(d)) * a.polarity.value * a.relevance;
        scores[d.index()] = s.clamp(-1.0, 1.0);
    }
    BigFiveProfile::new(scores)
}

/// Ranks dimensions by absolute score (ties in O, C, E, A, N order), drops
/// those under `band`, and picks the cell from the top one or two survivors.
pub fn map_ab5c(profile: &BigFiveProfile, band: f64) -> Categorization {
    let mut ranked: Vec<Dimension> = Dimension::ALL
        .into_iter()
        .filter(|d| profile.get(*d).abs() >= band)
        .collect();
    // Stable sort keeps the canonical order for equal magnitudes.
    ranked.sort_by(|a, b| {
        profile
            .get(*b)
            .abs()
            .partial_cmp(&profile.get(*a).abs())
            .expect("profile scores are finite")
    });
    let pole = |d: Dimension| Pole::new(d, Sign::of(profile.get(d)));
    match ranked.as_slice() {
        [] => Categorization::Neutral,
        [only] => Categorization::Cell(CellId::pure(pole(*only))),
        [first, second, ..] => Categorization::Cell(CellId {
            primary: pole(*first),
            secondary: pole(*second),
        }),
    }
}
