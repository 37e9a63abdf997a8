//! Turn-based interview engine.
//!
//! The engine is immutable and shared; all per-sitter data lives in a
//! serializable [`DialogueState`] that is threaded through each call, so a
//! session can be persisted or moved between workers between turns.
//!
//! Each user turn runs the listening, thinking and speaking steps in order:
//! the reply is scored for polarity and topical relevance, an answer is
//! recorded (or the question is asked again), and the agent composes an
//! affect-matched reaction, a bridge sentence, and the next prompt.

mod relevance;
mod script;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::persona::{Dimension, Keying};
use crate::sentiment::{score_text, Lexicon, PolarityClass, PolarityScore, ScoringConfig};

pub use relevance::TfIdfModel;
pub use script::{ByPolarity, DialogueScript, Question, QuestionBank, ReplyTemplates};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DialogueError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("session is closed")]
    SessionClosed,
    #[error("invalid session state: expected {expected:?}, found {found:?}")]
    InvalidState { expected: Phase, found: Phase },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Greeting,
    AwaitingAnswer,
    Thinking,
    Speaking,
    Closed,
}

/// Agent affect shown alongside a reply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmotionTag {
    Delighted,
    Warm,
    Neutral,
    Concerned,
    Sympathetic,
}

impl EmotionTag {
    pub fn valence(self) -> i8 {
        match self {
            Self::Delighted | Self::Warm => 1,
            Self::Neutral => 0,
            Self::Concerned | Self::Sympathetic => -1,
        }
    }

    /// Mirrors the user's polarity; the hint only picks the flavor within
    /// the same sign.
    pub fn matching(class: PolarityClass, hint: Option<EmotionHint>) -> Self {
        use EmotionHint::*;
        match class {
            PolarityClass::Positive => match hint {
                Some(Joy | Surprise) => Self::Delighted,
                _ => Self::Warm,
            },
            PolarityClass::Negative => match hint {
                Some(Sadness | Fear) => Self::Sympathetic,
                _ => Self::Concerned,
            },
            PolarityClass::Neutral => Self::Neutral,
        }
    }
}

/// Self-reported sitter emotion, in place of a facial-expression classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmotionHint {
    Joy,
    Surprise,
    Sadness,
    Fear,
    Anger,
    Disgust,
    Contempt,
    Neutral,
}

impl FromStr for EmotionHint {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "joy" | "happy" | "happiness" => Self::Joy,
            "surprise" | "surprised" => Self::Surprise,
            "sadness" | "sad" => Self::Sadness,
            "fear" | "afraid" => Self::Fear,
            "anger" | "angry" => Self::Anger,
            "disgust" => Self::Disgust,
            "contempt" => Self::Contempt,
            "neutral" => Self::Neutral,
            other => return Err(format!("unknown emotion hint {other:?}")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerRecord {
    pub dimension: Dimension,
    pub polarity: PolarityScore,
    pub relevance: f64,
    pub raw_text: String,
    /// Set when the answer was never on topic and neutral was substituted.
    #[serde(default)]
    pub forced_neutral: bool,
}

impl AnswerRecord {
    fn forced(dimension: Dimension, relevance: f64, raw_text: String) -> Self {
        Self {
            dimension,
            polarity: PolarityScore::NEUTRAL,
            relevance,
            raw_text,
            forced_neutral: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TurnKind {
    Greeting,
    Answer,
    Clarification,
    Closing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentTurn {
    pub kind: TurnKind,
    pub reaction: String,
    pub coping: String,
    pub prompt: String,
    pub emotion_tag: EmotionTag,
    pub backchannel: bool,
}

impl AgentTurn {
    pub fn text(&self) -> String {
        [&self.reaction, &self.coping, &self.prompt]
            .into_iter()
            .filter(|s| !s.is_empty())
            .cloned()
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Speaker {
    Agent,
    User,
}

/// One line of the exported transcript.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub speaker: Speaker,
    pub text: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub polarity: Option<PolarityScore>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub relevance: Option<f64>,
    pub state: Phase,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub emotion_tag: Option<EmotionTag>,
}

/// Everything that changes during an interview.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DialogueState {
    pub phase: Phase,
    /// Order in which dimensions are asked.
    pub order: Vec<Dimension>,
    pub question_index: usize,
    pub answers: Vec<AnswerRecord>,
    pub turn_count: u32,
    pub emotion_tag: EmotionTag,
    /// Clarifications already issued for the current question.
    pub reasks: u32,
    pub transcript: Vec<TranscriptRecord>,
}

impl DialogueState {
    pub fn is_closed(&self) -> bool {
        self.phase == Phase::Closed
    }

    pub fn current_dimension(&self) -> Option<Dimension> {
        self.order.get(self.question_index).copied()
    }

    /// Transcript as JSON lines, one record per turn.
    pub fn transcript_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.transcript {
            out.push_str(&serde_json::to_string(r).expect("transcript records serialize"));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DialogueConfig {
    pub accept_threshold: f64,
    pub reask_limit: u32,
    pub max_turns: u32,
    /// Permutes the question order when set.
    pub shuffle_seed: Option<u64>,
    pub scoring: ScoringConfig,
}

impl Default for DialogueConfig {
    fn default() -> Self {
        Self {
            accept_threshold: 0.15,
            reask_limit: 2,
            max_turns: 30,
            shuffle_seed: None,
            scoring: ScoringConfig::default(),
        }
    }
}

pub struct DialogueEngine {
    script: DialogueScript,
    config: DialogueConfig,
    lexicon: Arc<Lexicon>,
    tfidf: TfIdfModel,
}

impl fmt::Debug for DialogueEngine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DialogueEngine")
            .field("config", &self.config)
            .field("lexicon_terms", &self.lexicon.len())
            .field("vocabulary", &self.tfidf.vocabulary_size())
            .finish()
    }
}

impl DialogueEngine {
    pub fn new(
        script: DialogueScript,
        config: DialogueConfig,
        lexicon: Arc<Lexicon>,
    ) -> Result<Self, DialogueError> {
        config
            .scoring
            .validate()
            .map_err(|e| DialogueError::Config(e.to_string()))?;
        if !(0.0..=1.0).contains(&config.accept_threshold) {
            return Err(DialogueError::Config(format!(
                "accept_threshold {} outside [0, 1]",
                config.accept_threshold
            )));
        }
        // Greeting plus one turn per question is the shortest complete interview.
        if config.max_turns < 1 + Dimension::ALL.len() as u32 {
            return Err(DialogueError::Config(format!(
                "max_turns {} is too small to finish the survey",
                config.max_turns
            )));
        }
        let tfidf = TfIdfModel::fit(
            script
                .bank
                .iter()
                .flat_map(|q| q.exemplar_answers.iter().map(String::as_str)),
        );
        Ok(Self {
            script,
            config,
            lexicon,
            tfidf,
        })
    }

    /// Built-in script and starter lexicon with default thresholds.
    pub fn with_defaults() -> Self {
        Self::new(
            DialogueScript::builtin(),
            DialogueConfig::default(),
            Arc::new(Lexicon::starter()),
        )
        .expect("built-in configuration is valid")
    }

    pub fn config(&self) -> &DialogueConfig {
        &self.config
    }

    pub fn script(&self) -> &DialogueScript {
        &self.script
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn keying(&self) -> Keying {
        self.script.bank.keying()
    }

    pub fn score(&self, text: &str) -> PolarityScore {
        score_text(text, &self.lexicon, &self.config.scoring)
    }

    pub fn classify_relevance(&self, text: &str, question: &Question) -> f64 {
        self.tfidf.relevance(text, &question.exemplar_answers)
    }

    pub fn start_session(&self) -> (DialogueState, AgentTurn) {
        self.start_session_with_order(self.config.shuffle_seed)
    }

    pub fn start_session_with_order(
        &self,
        shuffle_seed: Option<u64>,
    ) -> (DialogueState, AgentTurn) {
        let mut order = Dimension::ALL.to_vec();
        if let Some(seed) = shuffle_seed {
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        }
        let t = &self.script.templates;
        let turn = AgentTurn {
            kind: TurnKind::Greeting,
            reaction: t.greeting.clone(),
            coping: String::new(),
            prompt: self.script.bank.get(order[0]).prompt.clone(),
            emotion_tag: EmotionTag::Neutral,
            backchannel: false,
        };
        let mut state = DialogueState {
            phase: Phase::Greeting,
            order,
            question_index: 0,
            answers: Vec::new(),
            turn_count: 1,
            emotion_tag: EmotionTag::Neutral,
            reasks: 0,
            transcript: Vec::new(),
        };
        push_agent(&mut state, &turn);
        state.phase = Phase::AwaitingAnswer;
        (state, turn)
    }

    pub fn user_turn(
        &self,
        state: &mut DialogueState,
        text: &str,
        emotion_hint: Option<EmotionHint>,
    ) -> Result<AgentTurn, DialogueError> {
        match state.phase {
            Phase::AwaitingAnswer => {}
            Phase::Closed => return Err(DialogueError::SessionClosed),
            found => {
                return Err(DialogueError::InvalidState {
                    expected: Phase::AwaitingAnswer,
                    found,
                })
            }
        }
        let dimension = state
            .current_dimension()
            .expect("open session has an unanswered question");
        let question = self.script.bank.get(dimension);

        // Listening.
        state.turn_count += 1;
        let polarity = self.score(text);
        let relevance = self.classify_relevance(text, question);
        state.transcript.push(TranscriptRecord {
            speaker: Speaker::User,
            text: text.to_string(),
            polarity: Some(polarity),
            relevance: Some(relevance),
            state: Phase::AwaitingAnswer,
            emotion_tag: None,
        });

        // Thinking.
        state.phase = Phase::Thinking;
        let emotion_tag = EmotionTag::matching(polarity.class, emotion_hint);
        state.emotion_tag = emotion_tag;
        let t = &self.script.templates;
        let (kind, reaction, coping) = if relevance >= self.config.accept_threshold {
            state.answers.push(AnswerRecord {
                dimension,
                polarity,
                relevance,
                raw_text: text.to_string(),
                forced_neutral: false,
            });
            (
                TurnKind::Answer,
                t.reaction(dimension, polarity.class).to_string(),
                t.coping(dimension, polarity.class).to_string(),
            )
        } else if state.reasks < self.config.reask_limit {
            state.reasks += 1;
            (
                TurnKind::Clarification,
                t.clarification.clone(),
                t.clarification_bridge.clone(),
            )
        } else {
            state
                .answers
                .push(AnswerRecord::forced(dimension, relevance, text.to_string()));
            (
                TurnKind::Answer,
                t.reaction(dimension, PolarityClass::Neutral).to_string(),
                t.move_on.clone(),
            )
        };
        if kind == TurnKind::Answer {
            state.question_index += 1;
            state.reasks = 0;
        }

        // Speaking.
        state.phase = Phase::Speaking;
        let complete = state.answers.len() == Dimension::ALL.len();
        let out_of_turns = state.turn_count >= self.config.max_turns;
        let turn = if complete || out_of_turns {
            let closing = if complete {
                &t.closing
            } else {
                &t.closing_early
            };
            AgentTurn {
                kind: TurnKind::Closing,
                reaction,
                coping,
                prompt: closing.clone(),
                emotion_tag,
                backchannel: kind == TurnKind::Answer,
            }
        } else {
            let next = state.current_dimension().expect("survey incomplete");
            AgentTurn {
                kind,
                reaction,
                coping,
                prompt: self.script.bank.get(next).prompt.clone(),
                emotion_tag,
                backchannel: kind == TurnKind::Answer,
            }
        };
        push_agent(state, &turn);
        state.phase = if turn.kind == TurnKind::Closing {
            Phase::Closed
        } else {
            Phase::AwaitingAnswer
        };
        Ok(turn)
    }

    /// Nod/typing cue while the sitter is composing an answer.
    pub fn backchannel_cue(&self, state: &DialogueState, pause_events: u32) -> bool {
        state.phase == Phase::AwaitingAnswer && pause_events > 0
    }

    /// Exactly one record per dimension in O, C, E, A, N order. Dimensions
    /// never answered (session closed on the turn limit) come back as
    /// flagged neutral records.
    pub fn finalize_session(
        &self,
        state: &DialogueState,
    ) -> Result<Vec<AnswerRecord>, DialogueError> {
        if state.phase != Phase::Closed {
            return Err(DialogueError::InvalidState {
                expected: Phase::Closed,
                found: state.phase,
            });
        }
        Ok(Dimension::ALL
            .into_iter()
            .map(|d| {
                state
                    .answers
                    .iter()
                    .find(|a| a.dimension == d)
                    .cloned()
                    .unwrap_or_else(|| AnswerRecord::forced(d, 0.0, String::new()))
            })
            .collect())
    }
}

fn push_agent(state: &mut DialogueState, turn: &AgentTurn) {
    state.transcript.push(TranscriptRecord {
        speaker: Speaker::Agent,
        text: turn.text(),
        polarity: None,
        relevance: None,
        state: state.phase,
        emotion_tag: Some(turn.emotion_tag),
    });
}
