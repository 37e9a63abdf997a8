use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use super::{Categorization, CellId, StyleSpec};

static DEFAULT_ADJECTIVES: &str = include_str!("../../data/ab5c_adjectives.toml");
static DEFAULT_STYLES: &str = include_str!("../../data/styles.toml");

#[derive(Debug, Error)]
pub enum TableError {
    #[error("parsing table: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("reading table: {0}")]
    Io(#[from] std::io::Error),
    #[error("table problems:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
}

/// Descriptive adjectives for every AB5C cell.
#[derive(Debug, Clone)]
pub struct AdjectiveTable {
    cells: HashMap<CellId, Vec<String>>,
}

#[derive(Deserialize)]
struct RawAdjectives {
    cells: BTreeMap<String, Vec<String>>,
}

impl AdjectiveTable {
    pub fn builtin() -> Self {
        Self::parse(DEFAULT_ADJECTIVES).expect("bundled adjective table is valid")
    }

    pub fn from_path(path: &Path) -> Result<Self, TableError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(source: &str) -> Result<Self, TableError> {
        let raw: RawAdjectives = toml::from_str(source)?;
        let mut problems = Vec::new();
        let mut cells = HashMap::new();
        for (label, adjectives) in raw.cells {
            match label.parse::<CellId>() {
                Ok(cell) if adjectives.iter().any(|a| !a.trim().is_empty()) => {
                    cells.insert(cell, adjectives);
                }
                Ok(_) => problems.push(format!("{label}: no adjectives")),
                Err(e) => problems.push(e.to_string()),
            }
        }
        for cell in CellId::all() {
            if !cells.contains_key(&cell) {
                problems.push(format!("{cell}: missing"));
            }
        }
        if problems.is_empty() {
            Ok(Self { cells })
        } else {
            Err(TableError::Invalid(problems))
        }
    }

    /// Adjectives for a categorization; the neutral fallback has none.
    pub fn adjectives(&self, cat: &Categorization) -> &[String] {
        match cat {
            Categorization::Cell(c) => &self.cells[c],
            Categorization::Neutral => &[],
        }
    }
}

/// Style specification for each of the 90 cells plus the neutral fallback.
/// Coverage and ranges are checked once at load, so lookups cannot fail.
#[derive(Debug, Clone)]
pub struct StyleMap {
    neutral: StyleSpec,
    cells: HashMap<CellId, StyleSpec>,
}

#[derive(Deserialize)]
struct RawStyleMap {
    neutral: StyleSpec,
    #[serde(default)]
    cells: BTreeMap<String, StyleSpec>,
}

/// Findings of [`StyleMap::lint`]. Errors make the map unusable; the
/// distinctness check is reported separately.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct LintReport {
    pub errors: Vec<String>,
    pub indistinct: Vec<(String, String)>,
    pub cells: usize,
}

impl LintReport {
    pub fn is_clean(&self) -> bool {
        self.errors.is_empty() && self.indistinct.is_empty()
    }
}

impl StyleMap {
    pub fn builtin() -> Self {
        Self::parse(DEFAULT_STYLES).expect("bundled style map is valid")
    }

    pub fn from_path(path: &Path) -> Result<Self, TableError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(source: &str) -> Result<Self, TableError> {
        let raw: RawStyleMap = toml::from_str(source)?;
        let (map, errors) = Self::check(raw);
        if errors.is_empty() {
            Ok(map)
        } else {
            Err(TableError::Invalid(errors))
        }
    }

    fn check(raw: RawStyleMap) -> (Self, Vec<String>) {
        let mut errors = Vec::new();
        let mut neutral = raw.neutral;
        neutral.label = Categorization::NEUTRAL_LABEL.to_string();
        if let Err(e) = neutral.validate() {
            errors.push(format!("neutral: {e}"));
        }
        let mut cells = HashMap::new();
        for (label, mut spec) in raw.cells {
            let cell = match label.parse::<CellId>() {
                Ok(c) => c,
                Err(e) => {
                    errors.push(e.to_string());
                    continue;
                }
            };
            spec.label = cell.label();
            if let Err(e) = spec.validate() {
                errors.push(format!("{label}: {e}"));
            }
            cells.insert(cell, spec);
        }
        for cell in CellId::all() {
            if !cells.contains_key(&cell) {
                errors.push(format!("{cell}: missing"));
            }
        }
        (Self { neutral, cells }, errors)
    }

    /// Full check of a style map source: load errors plus pairs of entries
    /// that share both palette and stroke settings.
    pub fn lint(source: &str) -> LintReport {
        let raw: RawStyleMap = match toml::from_str(source) {
            Ok(r) => r,
            Err(e) => {
                return LintReport {
                    errors: vec![e.to_string()],
                    ..Default::default()
                }
            }
        };
        let (map, errors) = Self::check(raw);
        let mut seen: HashMap<String, String> = HashMap::new();
        let mut indistinct = Vec::new();
        let mut entries: Vec<&StyleSpec> = map.cells.values().collect();
        entries.sort_by(|a, b| a.label.cmp(&b.label));
        entries.insert(0, &map.neutral);
        for spec in entries {
            if let Some(prev) = seen.insert(spec.look_key(), spec.label.clone()) {
                indistinct.push((prev, spec.label.clone()));
            }
        }
        LintReport {
            errors,
            indistinct,
            cells: map.cells.len(),
        }
    }

    pub fn style_for(&self, cat: &Categorization) -> &StyleSpec {
        match cat {
            Categorization::Cell(c) => &self.cells[c],
            Categorization::Neutral => &self.neutral,
        }
    }

    pub fn neutral(&self) -> &StyleSpec {
        &self.neutral
    }
}
