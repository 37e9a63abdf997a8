//! TF-IDF cosine relevance of a reply against a question's sample answers.

use std::collections::{BTreeMap, HashMap};

use crate::sentiment::tokenize;

/// Function words dropped before vectorizing. Sentiment-bearing words such
/// as `not`, `no` and `yes` are kept.
const STOP_WORDS: &[&str] = &[
    "a", "an", "the", "and", "or", "but", "to", "of", "in", "on", "at", "for", "with", "is", "are",
    "am", "be", "been", "was", "were", "it", "it's", "its", "this", "that", "i", "i'm", "me", "my",
    "you", "your", "we", "our", "they", "them", "he", "she", "do", "does", "did", "so", "just",
    "here", "there", "as", "by", "from", "about", "have", "has", "had", "will", "would", "can",
    "could", "should", "what", "how", "if", "then", "than", "um", "uh", "well",
];

type SparseVector = BTreeMap<usize, f64>;

/// Vocabulary and smoothed inverse document frequencies fitted on the
/// exemplar corpus of the whole question bank.
#[derive(Debug, Clone)]
pub struct TfIdfModel {
    vocab: HashMap<String, usize>,
    idf: Vec<f64>,
}

pub(crate) fn content_tokens(text: &str) -> Vec<String> {
    tokenize(text)
        .into_iter()
        .filter(|t| !STOP_WORDS.contains(&t.as_str()))
        .collect()
}

impl TfIdfModel {
    pub fn fit<'a, I>(corpus: I) -> Self
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        let mut docs = 0usize;
        for doc in corpus {
            docs += 1;
            let mut tokens = content_tokens(doc);
            tokens.sort();
            tokens.dedup();
            for t in tokens {
                *df.entry(t).or_insert(0) += 1;
            }
        }
        // Ids follow term order, so every sum below runs in a fixed,
        // lexicographic order.
        let n = docs as f64;
        let mut vocab = HashMap::with_capacity(df.len());
        let mut idf = Vec::with_capacity(df.len());
        for (id, (term, d)) in df.into_iter().enumerate() {
            vocab.insert(term, id);
            idf.push(((1.0 + n) / (1.0 + d as f64)).ln() + 1.0);
        }
        Self { vocab, idf }
    }

    pub fn vocabulary_size(&self) -> usize {
        self.vocab.len()
    }

    /// L2-normalized vector of `count · idf`; out-of-vocabulary tokens are
    /// ignored.
    fn vectorize(&self, text: &str) -> SparseVector {
        let mut counts: BTreeMap<usize, u32> = BTreeMap::new();
        for t in content_tokens(text) {
            if let Some(&id) = self.vocab.get(&t) {
                *counts.entry(id).or_insert(0) += 1;
            }
        }
        let mut v: SparseVector = counts
            .into_iter()
            .map(|(id, c)| (id, f64::from(c) * self.idf[id]))
            .collect();
        let norm = v.values().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.values_mut().for_each(|x| *x /= norm);
        }
        v
    }

    fn cosine(a: &SparseVector, b: &SparseVector) -> f64 {
        a.iter()
            .filter_map(|(k, x)| b.get(k).map(|y| x * y))
            .sum::<f64>()
            .clamp(0.0, 1.0)
    }

    /// Highest cosine similarity between `text` and any exemplar.
    pub fn relevance<S: AsRef<str>>(&self, text: &str, exemplars: &[S]) -> f64 {
        let query = self.vectorize(text);
        if query.is_empty() {
            return 0.0;
        }
        exemplars
            .iter()
            .map(|e| Self::cosine(&query, &self.vectorize(e.as_ref())))
            .fold(0.0, f64::max)
    }
}
