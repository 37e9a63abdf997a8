//! Closed interview → profile, AB5C cell and adjectives.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dialogue::{AnswerRecord, DialogueEngine, DialogueError, DialogueState, EmotionHint};
use crate::persona::{
    map_ab5c, score_profile, AdjectiveTable, BigFiveProfile, Categorization, PersonaError,
};

#[derive(Debug, Error)]
pub enum AssessError {
    #[error(transparent)]
    Dialogue(#[from] DialogueError),
    #[error(transparent)]
    Persona(#[from] PersonaError),
    #[error("transcript ended after {turns} utterances before the interview closed")]
    Incomplete { turns: usize },
    #[error("line {line}: {message}")]
    Transcript { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assessment {
    pub profile: BigFiveProfile,
    pub cell: Categorization,
    pub adjectives: Vec<String>,
    pub answers: Vec<AnswerRecord>,
}

pub fn assess_state(
    engine: &DialogueEngine,
    state: &DialogueState,
    band: f64,
    adjectives: &AdjectiveTable,
) -> Result<Assessment, AssessError> {
    let answers = engine.finalize_session(state)?;
    let profile = score_profile(&answers, &engine.keying())?;
    let cell = map_ab5c(&profile, band);
    Ok(Assessment {
        profile,
        cell,
        adjectives: adjectives.adjectives(&cell).to_vec(),
        answers,
    })
}

/// One sitter utterance from a transcript file.
#[derive(Debug, Clone, PartialEq)]
pub struct Utterance {
    pub text: String,
    pub hint: Option<EmotionHint>,
}

/// Transcript files hold one utterance per line. Blank lines and `#`
/// comments are skipped; a leading `[joy]`-style tag sets the emotion hint.
pub fn parse_transcript(source: &str) -> Result<Vec<Utterance>, AssessError> {
    let mut out = Vec::new();
    for (i, raw) in source.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (hint, text) = match line.strip_prefix('[').and_then(|rest| rest.split_once(']')) {
            Some((tag, text)) => {
                let hint = tag.parse().map_err(|message| AssessError::Transcript {
                    line: i + 1,
                    message,
                })?;
                (Some(hint), text.trim())
            }
            None => (None, line),
        };
        out.push(Utterance {
            text: text.to_string(),
            hint,
        });
    }
    Ok(out)
}

/// Plays utterances into a fresh session until it closes. Utterances left
/// over after closing are ignored.
pub fn run_transcript(
    engine: &DialogueEngine,
    utterances: &[Utterance],
) -> Result<DialogueState, AssessError> {
    let (mut state, _) = engine.start_session();
    for u in utterances {
        if state.is_closed() {
            break;
        }
        engine.user_turn(&mut state, &u.text, u.hint)?;
    }
    if !state.is_closed() {
        return Err(AssessError::Incomplete {
            turns: utterances.len(),
        });
    }
    Ok(state)
}
