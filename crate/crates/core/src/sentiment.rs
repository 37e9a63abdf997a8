//! Lexicon-based polarity scoring with valence shifters.
//!
//! A [`Lexicon`] maps case-folded tokens either to a signed valence in
//! `[-5, +5]` or to a modifier (intensifier, downtoner, negator). Scoring
//! walks the token stream once; every valence token is shifted by the run of
//! modifier tokens directly in front of it, and the mean shifted valence is
//! normalized into `[-1, +1]`.

use std::collections::HashMap;
use std::fmt;
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MAX_VALENCE: f64 = 5.0;

static STARTER_LEXICON: &str = include_str!("../data/lexicon.tsv");

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: {message}")]
    Validation { line: usize, message: String },
    #[error("reading lexicon: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error, PartialEq)]
#[error("neutral band must lie in (0, 1), got {0}")]
pub struct BandError(pub f64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModifierKind {
    Intensifier,
    Downtoner,
    Negator,
}

impl ModifierKind {
    fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "intensifier" => Some(Self::Intensifier),
            "downtoner" => Some(Self::Downtoner),
            "negator" => Some(Self::Negator),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LexiconEntry {
    pub valence: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModifierEntry {
    pub kind: ModifierKind,
    /// Multiplier applied to the shifted valence. Always `None` for negators.
    pub factor: Option<f64>,
}

impl ModifierEntry {
    pub fn new(kind: ModifierKind, factor: Option<f64>) -> Result<Self, String> {
        match (kind, factor) {
            (ModifierKind::Negator, None) => Ok(Self { kind, factor }),
            (ModifierKind::Negator, Some(_)) => Err("negator carries no factor".into()),
            (_, None) => Err(format!("{kind:?} requires a factor")),
            (ModifierKind::Intensifier, Some(f)) if f.is_finite() && f > 1.0 => {
                Ok(Self { kind, factor })
            }
            (ModifierKind::Intensifier, Some(f)) => {
                Err(format!("intensifier factor must be > 1, got {f}"))
            }
            (ModifierKind::Downtoner, Some(f)) if f > 0.0 && f < 1.0 => Ok(Self { kind, factor }),
            (ModifierKind::Downtoner, Some(f)) => {
                Err(format!("downtoner factor must lie in (0, 1), got {f}"))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Entry {
    Valence(LexiconEntry),
    Modifier(ModifierEntry),
}

/// Immutable term table. Terms are unique after case folding.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: HashMap<String, Entry>,
    duplicates: Vec<String>,
}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// The starter lexicon bundled with the crate.
    pub fn starter() -> Self {
        Self::parse_str(STARTER_LEXICON).expect("bundled lexicon is valid")
    }

    pub fn parse_str(source: &str) -> Result<Self, LexiconError> {
        Self::load(source.as_bytes())
    }

    /// Reads a tab-separated lexicon. Rows are `term<TAB>valence` or
    /// `term<TAB>MOD<TAB>kind<TAB>factor`; blank lines and `#` comments are
    /// skipped. A repeated term replaces the earlier row.
    pub fn load<R: BufRead>(source: R) -> Result<Self, LexiconError> {
        let mut lexicon = Lexicon::new();
        for (idx, line) in source.lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = trimmed.split('\t').map(str::trim).collect();
            let parse_err = |message: String| LexiconError::Parse {
                line: lineno,
                message,
            };
            let term = cols[0].to_lowercase();
            if term.is_empty() {
                return Err(parse_err("empty term".into()));
            }
            let entry = match cols.as_slice() {
                [_, valence] => {
                    let v: f64 = valence
                        .parse()
                        .map_err(|_| parse_err(format!("invalid valence {valence:?}")))?;
                    if !(-MAX_VALENCE..=MAX_VALENCE).contains(&v) {
                        return Err(LexiconError::Validation {
                            line: lineno,
                            message: format!("valence {v} outside [-5, 5]"),
                        });
                    }
                    Entry::Valence(LexiconEntry { valence: v })
                }
                [_, tag, kind, rest @ ..] if tag.eq_ignore_ascii_case("MOD") && rest.len() <= 1 => {
                    let kind = ModifierKind::parse(kind)
                        .ok_or_else(|| parse_err(format!("unknown modifier kind {kind:?}")))?;
                    let factor = match rest.first() {
                        Some(f) if !f.is_empty() => Some(
                            f.parse::<f64>()
                                .map_err(|_| parse_err(format!("invalid factor {f:?}")))?,
                        ),
                        _ => None,
                    };
                    let m = ModifierEntry::new(kind, factor).map_err(|message| {
                        LexiconError::Validation {
                            line: lineno,
                            message,
                        }
                    })?;
                    Entry::Modifier(m)
                }
                _ => {
                    return Err(parse_err(format!(
                        "expected 2 or 4 columns, got {}",
                        cols.len()
                    )))
                }
            };
            lexicon.insert_entry(term, entry);
        }
        Ok(lexicon)
    }

    fn insert_entry(&mut self, term: String, entry: Entry) {
        if self.entries.insert(term.clone(), entry).is_some() {
            tracing::warn!(term = %term, "duplicate lexicon term, keeping the last row");
            self.duplicates.push(term);
        }
    }

    pub fn insert_valence(&mut self, term: &str, valence: f64) {
        assert!((-MAX_VALENCE..=MAX_VALENCE).contains(&valence));
        self.insert_entry(
            term.to_lowercase(),
            Entry::Valence(LexiconEntry { valence }),
        );
    }

    pub fn insert_modifier(&mut self, term: &str, modifier: ModifierEntry) {
        self.insert_entry(term.to_lowercase(), Entry::Modifier(modifier));
    }

    pub fn get(&self, term: &str) -> Option<&Entry> {
        self.entries.get(term)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn valence_terms(&self) -> usize {
        self.entries
            .values()
            .filter(|e| matches!(e, Entry::Valence(_)))
            .count()
    }

    pub fn modifier_terms(&self) -> usize {
        self.len() - self.valence_terms()
    }

    /// Terms that appeared more than once while loading.
    pub fn duplicates(&self) -> &[String] {
        &self.duplicates
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Entry)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Copy of this lexicon with every valence negated; modifiers unchanged.
    pub fn negated(&self) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|(k, e)| {
                let e = match *e {
                    Entry::Valence(v) => Entry::Valence(LexiconEntry {
                        valence: -v.valence,
                    }),
                    m => m,
                };
                (k.clone(), e)
            })
            .collect();
        Self {
            entries,
            duplicates: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolarityClass {
    Negative,
    Neutral,
    Positive,
}

impl PolarityClass {
    pub fn sign(self) -> i8 {
        match self {
            Self::Negative => -1,
            Self::Neutral => 0,
            Self::Positive => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Negative => "negative",
            Self::Neutral => "neutral",
            Self::Positive => "positive",
        }
    }
}

impl fmt::Display for PolarityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarityScore {
    pub value: f64,
    pub class: PolarityClass,
    pub term_hits: u32,
}

impl PolarityScore {
    pub const NEUTRAL: PolarityScore = PolarityScore {
        value: 0.0,
        class: PolarityClass::Neutral,
        term_hits: 0,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScoringConfig {
    /// Maximum number of modifier tokens looked at in front of a valence token.
    pub window: usize,
    pub negation_damping: f64,
    pub neutral_band: f64,
}

impl Default for ScoringConfig {
    fn default() -> Self {
        Self {
            window: 2,
            negation_damping: 0.5,
            neutral_band: 0.1,
        }
    }
}

impl ScoringConfig {
    pub fn validate(&self) -> Result<(), BandError> {
        check_band(self.neutral_band)
    }
}

fn check_band(band: f64) -> Result<(), BandError> {
    if band > 0.0 && band < 1.0 {
        Ok(())
    } else {
        Err(BandError(band))
    }
}

/// Three-way split of a normalized polarity value around a neutral band.
pub fn classify_polarity(value: f64, band: f64) -> Result<PolarityClass, BandError> {
    check_band(band)?;
    Ok(classify_unchecked(value, band))
}

fn classify_unchecked(value: f64, band: f64) -> PolarityClass {
    if value >= band {
        PolarityClass::Positive
    } else if value <= -band {
        PolarityClass::Negative
    } else {
        PolarityClass::Neutral
    }
}

/// Splits on anything that is not alphanumeric or an in-word apostrophe and
/// lowercases. `don't` stays one token; `'quoted'` loses its quotes.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !(c.is_alphanumeric() || c == '\'' || c == '\u{2019}'))
        .map(|t| t.trim_matches(|c| c == '\'' || c == '\u{2019}'))
        .filter(|t| !t.is_empty())
        .map(|t| t.replace('\u{2019}', "'").to_lowercase())
        .collect()
}

/// Scores an utterance. Total over all UTF-8 input; unknown tokens are ignored.
pub fn score_text(text: &str, lexicon: &Lexicon, config: &ScoringConfig) -> PolarityScore {
    let tokens = tokenize(text);
    let entries: Vec<Option<&Entry>> = tokens.iter().map(|t| lexicon.get(t)).collect();

    let mut sum = 0.0;
    let mut hits = 0u32;
    for (i, entry) in entries.iter().enumerate() {
        let Some(Entry::Valence(v)) = entry else {
            continue;
        };
        let mut contribution = v.valence;
        for prev in entries[..i].iter().rev().take(config.window) {
            match prev {
                Some(Entry::Modifier(m)) => match m.kind {
                    ModifierKind::Negator => contribution *= -config.negation_damping,
                    _ => contribution *= m.factor.unwrap_or(1.0),
                },
                _ => break,
            }
        }
        sum += contribution;
        hits += 1;
    }

    if hits == 0 {
        return PolarityScore::NEUTRAL;
    }
    let value = (sum / (MAX_VALENCE * f64::from(hits))).clamp(-1.0, 1.0);
    PolarityScore {
        value,
        class: classify_unchecked(value, config.neutral_band),
        term_hits: hits,
    }
}
