//! Word-vector tables and composed sentence embeddings.
//!
//! Two trainer-free sentence embeddings are built from a word-vector table:
//! the arithmetic mean over the sentence's words, and the per-dimension
//! extrema (value of greatest magnitude, sign preserved). A deterministic
//! random table is available so the pipeline runs with zero downloads.

use std::collections::HashMap;

use thiserror::Error;

use crate::logging;
use crate::rng::Rng;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum EmbedError {
    #[error("word-vector file is empty")]
    EmptyFile,
    #[error("line {0}: expected {1} dimensions, found {2}")]
    InconsistentDimension(usize, usize, usize),
    #[error("line {0}: cannot parse {1:?} as a float")]
    BadFloat(usize, String),
    #[error("nearest_word on an empty table")]
    EmptyTable,
}

pub type Result<T> = std::result::Result<T, EmbedError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmbeddingKind {
    CombineSkip,
    GloveAverage,
    GloveExtrema,
}

impl EmbeddingKind {
    pub fn name(&self) -> &'static str {
        match self {
            EmbeddingKind::CombineSkip => "st",
            EmbeddingKind::GloveAverage => "glove-avg",
            EmbeddingKind::GloveExtrema => "glove-ext",
        }
    }

    pub fn parse(s: &str) -> Option<EmbeddingKind> {
        match s {
            "st" | "combine-skip" => Some(EmbeddingKind::CombineSkip),
            "glove-avg" | "glove-average" => Some(EmbeddingKind::GloveAverage),
            "glove-ext" | "glove-extrema" => Some(EmbeddingKind::GloveExtrema),
            _ => None,
        }
    }
}

/// Fixed-length sentence vector tagged with how it was composed.
#[derive(Clone, Debug, PartialEq)]
pub struct SentenceEmbedding {
    pub values: Vec<f64>,
    pub kind: EmbeddingKind,
}

impl SentenceEmbedding {
    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    Cosine,
    Euclidean,
}

/// Token -> vector map with a fixed dimension; iteration order is load order.
#[derive(Clone, Debug)]
pub struct WordVectorTable {
    dim: usize,
    tokens: Vec<String>,
    vectors: Vec<Vec<f64>>,
    index: HashMap<String, usize>,
}

impl WordVectorTable {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.index.get(token).map(|&i| self.vectors[i].as_slice())
    }

    /// Parse the standard text format: one "token v1 v2 ... vd" line per
    /// word, d inferred from the first line. A duplicate token keeps its last
    /// occurrence (warned).
    pub fn parse(text: &str) -> Result<WordVectorTable> {
        let mut table = WordVectorTable {
            dim: 0,
            tokens: Vec::new(),
            vectors: Vec::new(),
            index: HashMap::new(),
        };
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let token = parts.next().expect("non-empty line").to_string();
            let mut vector = Vec::new();
            for p in parts {
                let v: f64 =
                    p.parse().map_err(|_| EmbedError::BadFloat(lineno + 1, p.to_string()))?;
                vector.push(v);
            }
            if table.dim == 0 {
                if vector.is_empty() {
                    return Err(EmbedError::InconsistentDimension(lineno + 1, 1, 0));
                }
                table.dim = vector.len();
            } else if vector.len() != table.dim {
                return Err(EmbedError::InconsistentDimension(
                    lineno + 1,
                    table.dim,
                    vector.len(),
                ));
            }
            if let Some(&existing) = table.index.get(&token) {
                logging::warn(format!("duplicate word vector for {token:?}; keeping the last"));
                table.vectors[existing] = vector;
            } else {
                table.index.insert(token.clone(), table.tokens.len());
                table.tokens.push(token);
                table.vectors.push(vector);
            }
        }
        if table.tokens.is_empty() {
            return Err(EmbedError::EmptyFile);
        }
        Ok(table)
    }

    /// Seeded Gaussian table over a token list; the zero-download fallback.
    pub fn random(tokens: &[String], dim: usize, seed: u64) -> WordVectorTable {
        let mut rng = Rng::new(seed);
        let mut table = WordVectorTable {
            dim,
            tokens: Vec::new(),
            vectors: Vec::new(),
            index: HashMap::new(),
        };
        for token in tokens {
            if table.index.contains_key(token) {
                continue;
            }
            let mut v = vec![0.0; dim];
            rng.fill_normal(&mut v, 0.0, 1.0);
            table.index.insert(token.clone(), table.tokens.len());
            table.tokens.push(token.clone());
            table.vectors.push(v);
        }
        table
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (token, vector) in self.tokens.iter().zip(self.vectors.iter()) {
            out.push_str(token);
            for v in vector {
                out.push_str(&format!(" {v}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Arithmetic mean of the present tokens' vectors; OOV tokens are skipped and
/// an all-OOV sentence yields the zero vector (warned).
pub fn compose_average(tokens: &[String], table: &WordVectorTable) -> SentenceEmbedding {
    let mut sum = vec![0.0; table.dim()];
    let mut count = 0usize;
    for t in tokens {
        if let Some(v) = table.get(t) {
            for (s, x) in sum.iter_mut().zip(v.iter()) {
                *s += x;
            }
            count += 1;
        }
    }
    if count == 0 {
        logging::warn("all tokens out of vocabulary; average embedding is zero");
    } else {
        for s in sum.iter_mut() {
            *s /= count as f64;
        }
    }
    SentenceEmbedding { values: sum, kind: EmbeddingKind::GloveAverage }
}

/// Per dimension, the value of maximum absolute magnitude across the
/// sentence's word vectors, sign preserved; ties go to the earlier word.
pub fn compose_extrema(tokens: &[String], table: &WordVectorTable) -> SentenceEmbedding {
    let mut out = vec![0.0; table.dim()];
    let mut seen = false;
    for t in tokens {
        if let Some(v) = table.get(t) {
            if !seen {
                out.copy_from_slice(v);
                seen = true;
            } else {
                for (o, x) in out.iter_mut().zip(v.iter()) {
                    if x.abs() > o.abs() {
                        *o = *x;
                    }
                }
            }
        }
    }
    if !seen {
        logging::warn("all tokens out of vocabulary; extrema embedding is zero");
    }
    SentenceEmbedding { values: out, kind: EmbeddingKind::GloveExtrema }
}

/// Closest table token to a query vector; deterministic tie-break by load
/// order.
pub fn nearest_word(vector: &[f64], table: &WordVectorTable, metric: Metric) -> Result<String> {
    if table.is_empty() {
        return Err(EmbedError::EmptyTable);
    }
    let score = |v: &[f64]| -> f64 {
        match metric {
            Metric::Euclidean => {
                vector.iter().zip(v.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
            }
            Metric::Cosine => {
                let dot: f64 = vector.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
                let na: f64 = vector.iter().map(|a| a * a).sum::<f64>().sqrt();
                let nb: f64 = v.iter().map(|b| b * b).sum::<f64>().sqrt();
                if na == 0.0 || nb == 0.0 {
                    2.0
                } else {
                    1.0 - dot / (na * nb)
                }
            }
        }
    };
    let mut best = 0;
    let mut best_score = score(&table.vectors[0]);
    for i in 1..table.vectors.len() {
        let s = score(&table.vectors[i]);
        if s < best_score {
            best = i;
            best_score = s;
        }
    }
    Ok(table.tokens[best].clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(|t| t.to_string()).collect()
    }

    fn table_ab() -> WordVectorTable {
        WordVectorTable::parse("a 1 2\nb 3 4\n").unwrap()
    }

    #[test]
    fn parse_infers_dimension() {
        let t = table_ab();
        assert_eq!(t.dim(), 2);
        assert_eq!(t.len(), 2);
        assert_eq!(t.get("b").unwrap(), &[3.0, 4.0]);
    }

    #[test]
    fn parse_rejects_inconsistent_dimension() {
        let err = WordVectorTable::parse("a 1 2\nb 3\n").unwrap_err();
        assert_eq!(err, EmbedError::InconsistentDimension(2, 2, 1));
    }

    #[test]
    fn parse_rejects_empty() {
        assert_eq!(WordVectorTable::parse("").unwrap_err(), EmbedError::EmptyFile);
    }

    #[test]
    fn parse_duplicate_keeps_last() {
        let t = WordVectorTable::parse("a 1 2\na 9 9\n").unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.get("a").unwrap(), &[9.0, 9.0]);
    }

    #[test]
    fn average_is_mean() {
        let e = compose_average(&toks("a b"), &table_ab());
        assert_eq!(e.values, vec![2.0, 3.0]);
    }

    #[test]
    fn average_skips_oov_and_single_word_identity() {
        let t = table_ab();
        assert_eq!(compose_average(&toks("a zzz"), &t).values, vec![1.0, 2.0]);
        assert_eq!(compose_average(&toks("a"), &t).values, vec![1.0, 2.0]);
        assert_eq!(compose_average(&toks("zzz"), &t).values, vec![0.0, 0.0]);
    }

    #[test]
    fn extrema_picks_largest_magnitude_with_sign() {
        let t = WordVectorTable::parse("u 1 -2\nv -3 1\n").unwrap();
        assert_eq!(compose_extrema(&toks("u v"), &t).values, vec![-3.0, -2.0]);
    }

    #[test]
    fn extrema_tie_goes_to_earlier_word() {
        let t = WordVectorTable::parse("u 2 0\nv -2 5\n").unwrap();
        assert_eq!(compose_extrema(&toks("u v"), &t).values, vec![2.0, 5.0]);
    }

    #[test]
    fn extrema_single_word_identity() {
        let t = table_ab();
        assert_eq!(compose_extrema(&toks("b"), &t).values, vec![3.0, 4.0]);
    }

    #[test]
    fn extrema_dominates_average() {
        let t = WordVectorTable::random(&toks("p q r s t"), 8, 42);
        let sentence = toks("p q r s t");
        let avg = compose_average(&sentence, &t);
        let ext = compose_extrema(&sentence, &t);
        for (a, e) in avg.values.iter().zip(ext.values.iter()) {
            assert!(e.abs() >= a.abs() - 1e-12);
        }
    }

    #[test]
    fn nearest_exact_and_scaled() {
        let t = table_ab();
        assert_eq!(nearest_word(&[1.0, 2.0], &t, Metric::Euclidean).unwrap(), "a");
        // Cosine is scale invariant.
        assert_eq!(nearest_word(&[2.0, 4.0], &t, Metric::Cosine).unwrap(), "a");
    }

    #[test]
    fn nearest_midpoint_by_exhaustive_scan() {
        let t = WordVectorTable::parse("p 0 0\nq 10 0\n").unwrap();
        // 4 is nearer p (distance 4) than q (distance 6).
        assert_eq!(nearest_word(&[4.0, 0.0], &t, Metric::Euclidean).unwrap(), "p");
    }

    #[test]
    fn nearest_rejects_empty() {
        let t = WordVectorTable::random(&[], 4, 0);
        assert!(nearest_word(&[0.0; 4], &t, Metric::Cosine).is_err());
    }

    #[test]
    fn random_table_is_deterministic() {
        let tokens = toks("a b c");
        let t1 = WordVectorTable::random(&tokens, 5, 7);
        let t2 = WordVectorTable::random(&tokens, 5, 7);
        assert_eq!(t1.get("b").unwrap(), t2.get("b").unwrap());
    }
}
