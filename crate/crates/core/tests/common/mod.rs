//! Independent reference implementations used as test oracles.
//!
//! Nothing here calls into the scoring, relevance, dialogue or mapping code
//! under test: data files are parsed separately and every rule is
//! re-derived from its written definition, in the plainest form available.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const LEXICON_TSV: &str = include_str!("../../data/lexicon.tsv");
pub const DIALOGUE_TOML: &str = include_str!("../../data/dialogue.toml");
pub const SAMPLE_TRANSCRIPT: &str = include_str!("../../data/sample_transcript.txt");

pub const WINDOW: usize = 2;
pub const DAMPING: f64 = 0.5;
pub const NEUTRAL_BAND: f64 = 0.1;
pub const ACCEPT: f64 = 0.15;
pub const REASK_LIMIT: usize = 2;
pub const MAX_TURNS: usize = 30;
pub const DOMINANCE_BAND: f64 = 0.1;
pub const DIMS: [char; 5] = ['O', 'C', 'E', 'A', 'N'];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Word {
    Valence(f64),
    Scale(f64),
    Negate,
}

pub type OracleLexicon = HashMap<String, Word>;

pub fn parse_lexicon(src: &str) -> OracleLexicon {
    let mut out = HashMap::new();
    for line in src.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        let word = if f.len() == 2 {
            Word::Valence(f[1].trim().parse().unwrap())
        } else if f[2].trim() == "negator" {
            Word::Negate
        } else {
            Word::Scale(f[3].trim().parse().unwrap())
        };
        out.insert(f[0].trim().to_lowercase(), word);
    }
    out
}

/// Character-level tokenizer: runs of letters, digits and apostrophes, with
/// apostrophes trimmed from both ends.
pub fn tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let flush = |cur: &mut String, out: &mut Vec<String>| {
        let t = cur.trim_matches('\'').to_lowercase();
        if !t.is_empty() {
            out.push(t);
        }
        cur.clear();
    };
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            cur.push(ch);
        } else if ch == '\'' || ch == '\u{2019}' {
            cur.push('\'');
        } else {
            flush(&mut cur, &mut out);
        }
    }
    flush(&mut cur, &mut out);
    out
}

/// Returns (value, hits).
pub fn score(text: &str, lex: &OracleLexicon) -> (f64, u32) {
    let toks = tokens(text);
    let mut total = 0.0;
    let mut hits = 0;
    for i in 0..toks.len() {
        let Some(Word::Valence(v)) = lex.get(&toks[i]) else {
            continue;
        };
        let mut c = *v;
        let mut j = i;
        let mut used = 0;
        while j > 0 && used < WINDOW {
            j -= 1;
            match lex.get(&toks[j]) {
                Some(Word::Scale(f)) => c *= f,
                Some(Word::Negate) => c *= -DAMPING,
                _ => break,
            }
            used += 1;
        }
        total += c;
        hits += 1;
    }
    if hits == 0 {
        return (0.0, 0);
    }
    let v = total / (5.0 * hits as f64);
    (v.clamp(-1.0, 1.0), hits)
}

pub fn class_of(v: f64, band: f64) -> &'static str {
    if v >= band {
        "positive"
    } else if v <= -band {
        "negative"
    } else {
        "neutral"
    }
}

const STOP: &[&str] = &[
    "a", "an", "the", "and", "or", "but", "to", "of", "in", "on", "at", "for", "with", "is", "are",
    "am", "be", "been", "was", "were", "it", "it's", "its", "this", "that", "i", "i'm", "me", "my",
    "you", "your", "we", "our", "they", "them", "he", "she", "do", "does", "did", "so", "just",
    "here", "there", "as", "by", "from", "about", "have", "has", "had", "will", "would", "can",
    "could", "should", "what", "how", "if", "then", "than", "um", "uh", "well",
];

fn content(text: &str) -> Vec<String> {
    tokens(text)
        .into_iter()
        .filter(|t| !STOP.contains(&t.as_str()))
        .collect()
}

/// TF-IDF with raw counts, smoothed idf `ln((1+n)/(1+df)) + 1`, L2 norm.
pub struct OracleTfIdf {
    idf: BTreeMap<String, f64>,
}

impl OracleTfIdf {
    pub fn new(corpus: &[String]) -> Self {
        let mut df: BTreeMap<String, f64> = BTreeMap::new();
        for doc in corpus {
            let mut seen: Vec<String> = content(doc);
            seen.sort();
            seen.dedup();
            for t in seen {
                *df.entry(t).or_default() += 1.0;
            }
        }
        let n = corpus.len() as f64;
        let idf = df
            .into_iter()
            .map(|(t, d)| (t, ((1.0 + n) / (1.0 + d)).ln() + 1.0))
            .collect();
        Self { idf }
    }

    fn unit_vector(&self, text: &str) -> BTreeMap<String, f64> {
        let mut counts: BTreeMap<String, u32> = BTreeMap::new();
        for t in content(text) {
            if self.idf.contains_key(&t) {
                *counts.entry(t).or_default() += 1;
            }
        }
        let w: BTreeMap<String, f64> = counts
            .into_iter()
            .map(|(t, c)| {
                let idf = self.idf[&t];
                (t, c as f64 * idf)
            })
            .collect();
        let norm = w.values().map(|x| x * x).sum::<f64>().sqrt();
        w.into_iter().map(|(t, x)| (t, x / norm)).collect()
    }

    pub fn relevance(&self, text: &str, exemplars: &[String]) -> f64 {
        let q = self.unit_vector(text);
        if q.is_empty() {
            return 0.0;
        }
        let mut best = 0.0f64;
        for e in exemplars {
            let v = self.unit_vector(e);
            let dot: f64 = q.iter().filter_map(|(t, x)| v.get(t).map(|y| x * y)).sum();
            best = best.max(dot.clamp(0.0, 1.0));
        }
        best
    }
}

#[derive(Debug, Clone)]
pub struct OracleQuestion {
    pub dimension: char,
    pub prompt: String,
    pub keying: f64,
    pub exemplars: Vec<String>,
}

pub fn questions() -> Vec<OracleQuestion> {
    let doc: toml::Value = toml::from_str(DIALOGUE_TOML).unwrap();
    doc["questions"]
        .as_array()
        .unwrap()
        .iter()
        .map(|q| OracleQuestion {
            dimension: q["dimension"].as_str().unwrap().chars().next().unwrap(),
            prompt: q["prompt"].as_str().unwrap().to_string(),
            keying: q["keying"].as_integer().unwrap() as f64,
            exemplars: q["exemplars"]
                .as_array()
                .unwrap()
                .iter()
                .map(|e| e.as_str().unwrap().to_string())
                .collect(),
        })
        .collect()
}

/// Per-dimension (value, relevance) after playing the utterances through
/// the accept / re-ask / forced-neutral rules in O, C, E, A, N order.
pub fn play(utterances: &[String], lex: &OracleLexicon) -> Option<[(f64, f64); 5]> {
    let qs = questions();
    let corpus: Vec<String> = qs.iter().flat_map(|q| q.exemplars.clone()).collect();
    let tfidf = OracleTfIdf::new(&corpus);
    let mut answers: Vec<(char, f64, f64)> = Vec::new();
    let mut turns = 1;
    let mut reasks = 0;
    for u in utterances {
        if answers.len() == 5 || turns >= MAX_TURNS {
            break;
        }
        turns += 1;
        let q = qs
            .iter()
            .find(|q| q.dimension == DIMS[answers.len()])
            .unwrap();
        let (value, _) = score(u, lex);
        let rel = tfidf.relevance(u, &q.exemplars);
        if rel >= ACCEPT {
            answers.push((q.dimension, value, rel));
            reasks = 0;
        } else if reasks < REASK_LIMIT {
            reasks += 1;
        } else {
            answers.push((q.dimension, 0.0, rel));
            reasks = 0;
        }
    }
    let closed = answers.len() == 5 || turns >= MAX_TURNS;
    if !closed {
        return None;
    }
    let mut out = [(0.0, 0.0); 5];
    for (i, d) in DIMS.iter().enumerate() {
        if let Some(a) = answers.iter().find(|a| a.0 == *d) {
            out[i] = (a.1, a.2);
        }
    }
    Some(out)
}

pub fn profile_from(records: &[(f64, f64); 5]) -> [f64; 5] {
    let qs = questions();
    let mut p = [0.0; 5];
    for (i, d) in DIMS.iter().enumerate() {
        let k = qs.iter().find(|q| q.dimension == *d).unwrap().keying;
        p[i] = (k * records[i].0 * records[i].1).clamp(-1.0, 1.0);
    }
    p
}

/// AB5C label for a profile, or "neutral".
pub fn cell_label(p: &[f64; 5], band: f64) -> String {
    let mut idx: Vec<usize> = (0..5).filter(|&i| p[i].abs() >= band).collect();
    // Stable sort keeps O, C, E, A, N order among equal magnitudes.
    idx.sort_by(|&a, &b| p[b].abs().partial_cmp(&p[a].abs()).unwrap());
    let pole = |i: usize| format!("{}{}", DIMS[i], if p[i] > 0.0 { '+' } else { '-' });
    match idx.as_slice() {
        [] => "neutral".to_string(),
        [only] => format!("{}{}", pole(*only), pole(*only)),
        [a, b, ..] => format!("{}{}", pole(*a), pole(*b)),
    }
}

pub fn assess(utterances: &[String], lex: &OracleLexicon) -> Option<([f64; 5], String)> {
    let recs = play(utterances, lex)?;
    let p = profile_from(&recs);
    let label = cell_label(&p, DOMINANCE_BAND);
    Some((p, label))
}

const OFF_TOPIC: &[&str] = &[
    "zzzz qqqq",
    "banana xylophone",
    "purple umbrella giraffe",
    "hmm",
    "the weather on mars",
    "quantum spaghetti",
    "sorry what",
    "wonderful",
];
const SENTIMENT: &[&str] = &[
    "love", "great", "good", "happy", "awful", "bad", "terrible", "boring", "excited", "worried",
    "nice", "hate",
];
const MODIFIERS: &[&str] = &[
    "very",
    "really",
    "not",
    "never",
    "slightly",
    "extremely",
    "bit",
    "don't",
];

/// Seeded synthetic interview transcripts: a mix of on-topic answers with
/// sentiment phrases, plain exemplar echoes, and off-topic noise. Each
/// transcript has at least 15 lines, enough to close any interview.
pub fn synthetic_transcripts(n: usize, seed: u64) -> Vec<Vec<String>> {
    let qs = questions();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let mut lines = Vec::new();
            for d in DIMS {
                let q = qs.iter().find(|q| q.dimension == d).unwrap();
                let noise = rng.random_range(0..3usize);
                for _ in 0..noise {
                    lines.push(OFF_TOPIC[rng.random_range(0..OFF_TOPIC.len())].to_string());
                }
                let base = q.exemplars[rng.random_range(0..q.exemplars.len())].clone();
                let line = match rng.random_range(0..3) {
                    0 => base,
                    _ => {
                        let mut phrase = Vec::new();
                        for _ in 0..rng.random_range(0..3usize) {
                            phrase.push(MODIFIERS[rng.random_range(0..MODIFIERS.len())]);
                        }
                        phrase.push(SENTIMENT[rng.random_range(0..SENTIMENT.len())]);
                        let phrase = phrase.join(" ");
                        if rng.random_bool(0.5) {
                            format!("{phrase}, {base}")
                        } else {
                            format!("{base} and {phrase}!")
                        }
                    }
                };
                lines.push(line);
            }
            while lines.len() < 15 {
                lines.push(OFF_TOPIC[rng.random_range(0..OFF_TOPIC.len())].to_string());
            }
            lines
        })
        .collect()
}

/// Utterance lines of the shipped sample transcript, emotion tags removed.
pub fn sample_utterances() -> Vec<String> {
    SAMPLE_TRANSCRIPT
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| match l.strip_prefix('[') {
            Some(rest) => rest.split_once(']').unwrap().1.trim().to_string(),
            None => l.to_string(),
        })
        .collect()
}

/// Mean over pixels of the 3x3 luminance variance (Rec. 709 weights),
/// windows clipped at the border.
pub fn local_variance(w: usize, h: usize, rgb: &[[u8; 3]]) -> f64 {
    let lum: Vec<f64> = rgb
        .iter()
        .map(|p| (0.2126 * p[0] as f64 + 0.7152 * p[1] as f64 + 0.0722 * p[2] as f64) / 255.0)
        .collect();
    let mut acc = 0.0;
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let mut vals = Vec::with_capacity(9);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (xx, yy) = (x + dx, y + dy);
                    if xx >= 0 && yy >= 0 && xx < w as i64 && yy < h as i64 {
                        vals.push(lum[yy as usize * w + xx as usize]);
                    }
                }
            }
            let m = vals.iter().sum::<f64>() / vals.len() as f64;
            acc += vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / vals.len() as f64;
        }
    }
    acc / (w * h) as f64
}

/// Closed form of the lit-minus-shadow half-mean luminance difference for
/// flat gray input: the mean of the per-column gain over each half, times
/// the gray level, before the contrast curve. `contrast` bends it by the
/// same smoothstep S-curve evaluated per column, integrated numerically.
pub fn lighting_half_difference(width: usize, gray: f64, strength: f64, contrast: f64) -> f64 {
    let curve = |v: f64| v + contrast * strength * (v * v * (3.0 - 2.0 * v) - v);
    let col = |x: usize| {
        let t = x as f64 / (width - 1) as f64;
        let g = 1.0 + 0.5 * strength - strength * t;
        curve((gray * g).clamp(0.0, 1.0))
    };
    let half = width / 2;
    let lit: f64 = (0..half).map(col).sum::<f64>() / half as f64;
    let shadow: f64 = (width - half..width).map(col).sum::<f64>() / half as f64;
    lit - shadow
}
