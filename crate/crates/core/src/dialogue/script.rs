use std::collections::HashMap;
use std::path::Path;

use serde::Deserialize;

use super::DialogueError;
use crate::persona::{Dimension, Keying};
use crate::sentiment::PolarityClass;

static DEFAULT_SCRIPT: &str = include_str!("../../data/dialogue.toml");

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Question {
    pub dimension: Dimension,
    pub prompt: String,
    pub keying: i8,
    #[serde(rename = "exemplars")]
    pub exemplar_answers: Vec<String>,
}

/// One question per Big-Five dimension, stored in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct QuestionBank {
    questions: Vec<Question>,
}

impl QuestionBank {
    pub fn new(questions: Vec<Question>) -> Result<Self, DialogueError> {
        let mut slots: [Option<Question>; 5] = Default::default();
        for q in questions {
            let d = q.dimension;
            if q.prompt.trim().is_empty() {
                return Err(DialogueError::Config(format!(
                    "question {d} has an empty prompt"
                )));
            }
            if q.exemplar_answers.iter().all(|e| e.trim().is_empty()) {
                return Err(DialogueError::Config(format!(
                    "question {d} has no exemplar answers"
                )));
            }
            if q.keying != 1 && q.keying != -1 {
                return Err(DialogueError::Config(format!(
                    "question {d} keying must be +1 or -1"
                )));
            }
            if slots[d.index()].replace(q).is_some() {
                return Err(DialogueError::Config(format!(
                    "more than one question for {d}"
                )));
            }
        }
        let mut ordered = Vec::with_capacity(5);
        for (d, q) in Dimension::ALL.into_iter().zip(slots) {
            ordered.push(q.ok_or_else(|| DialogueError::Config(format!("no question for {d}")))?);
        }
        Ok(Self { questions: ordered })
    }

    pub fn get(&self, d: Dimension) -> &Question {
        &self.questions[d.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Question> {
        self.questions.iter()
    }

    pub fn keying(&self) -> Keying {
        let mut k = Keying::default();
        for q in &self.questions {
            k.set(q.dimension, q.keying);
        }
        k
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ByPolarity {
    pub positive: String,
    pub neutral: String,
    pub negative: String,
}

impl ByPolarity {
    pub fn get(&self, class: PolarityClass) -> &str {
        match class {
            PolarityClass::Positive => &self.positive,
            PolarityClass::Neutral => &self.neutral,
            PolarityClass::Negative => &self.negative,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ReplyTemplates {
    pub greeting: String,
    pub closing: String,
    pub closing_early: String,
    pub clarification: String,
    pub clarification_bridge: String,
    pub move_on: String,
    pub reactions: HashMap<Dimension, ByPolarity>,
    pub coping: HashMap<Dimension, ByPolarity>,
}

impl ReplyTemplates {
    fn validate(&self) -> Result<(), DialogueError> {
        for d in Dimension::ALL {
            if !self.reactions.contains_key(&d) {
                return Err(DialogueError::Config(format!(
                    "no reaction templates for {d}"
                )));
            }
            if !self.coping.contains_key(&d) {
                return Err(DialogueError::Config(format!(
                    "no coping templates for {d}"
                )));
            }
        }
        Ok(())
    }

    pub fn reaction(&self, d: Dimension, class: PolarityClass) -> &str {
        self.reactions[&d].get(class)
    }

    pub fn coping(&self, d: Dimension, class: PolarityClass) -> &str {
        self.coping[&d].get(class)
    }
}

/// Question bank plus reply wording, loaded from a TOML data file.
#[derive(Debug, Clone, PartialEq)]
pub struct DialogueScript {
    pub bank: QuestionBank,
    pub templates: ReplyTemplates,
}

#[derive(Deserialize)]
struct RawScript {
    questions: Vec<Question>,
    #[serde(flatten)]
    templates: ReplyTemplates,
}

impl DialogueScript {
    pub fn builtin() -> Self {
        Self::parse(DEFAULT_SCRIPT).expect("bundled dialogue script is valid")
    }

    pub fn from_path(path: &Path) -> Result<Self, DialogueError> {
        let source = std::fs::read_to_string(path)
            .map_err(|e| DialogueError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&source)
    }

    pub fn parse(source: &str) -> Result<Self, DialogueError> {
        let raw: RawScript =
            toml::from_str(source).map_err(|e| DialogueError::Config(e.to_string()))?;
        raw.templates.validate()?;
        Ok(Self {
            bank: QuestionBank::new(raw.questions)?,
            templates: raw.templates,
        })
    }
}
