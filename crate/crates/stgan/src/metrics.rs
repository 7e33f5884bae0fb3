//! Corpus-level evaluation: BLEU-n with clipped counts and brevity penalty,
//! ROUGE (L / 1 / 2), a resource-free METEOR, Pearson correlation, and the
//! weighted human-score table arithmetic.

use std::collections::HashMap;

use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum MetricError {
    #[error("empty evaluation corpus")]
    EmptyCorpus,
    #[error("max_n must be in 1..=4, got {0}")]
    BadMaxN(usize),
    #[error("pearson needs equal-length lists of >= 2 points, got {0} and {1}")]
    BadLengths(usize, usize),
    #[error("pearson is undefined when {0} has zero variance")]
    ZeroVariance(&'static str),
    #[error("rating {0} outside 1..=5")]
    BadRating(u8),
    #[error("metric value {0} outside [0, 1]")]
    ValueOutOfRange(f64),
}

pub type Result<T> = std::result::Result<T, MetricError>;

/// One hypothesis with one or more references. Tokens must not include the
/// start/end markers.
#[derive(Clone, Debug)]
pub struct EvalPair {
    pub hypothesis: Vec<String>,
    pub references: Vec<Vec<String>>,
}

impl EvalPair {
    pub fn new(hypothesis: Vec<String>, references: Vec<Vec<String>>) -> Self {
        assert!(!references.is_empty(), "EvalPair needs at least one reference");
        EvalPair { hypothesis, references }
    }
}

/// All contiguous n-grams with multiplicity; empty when the sequence is
/// shorter than n.
pub fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    assert!(n >= 1);
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

/// Smoothing applied to zero n-gram precisions.
pub const BLEU_EPSILON: f64 = 1e-9;

/// Corpus-level BLEU-max_n: pooled clipped modified n-gram precisions,
/// geometric mean, brevity penalty with the closest-length reference per pair.
pub fn bleu_n(pairs: &[EvalPair], max_n: usize) -> Result<f64> {
    if pairs.is_empty() {
        return Err(MetricError::EmptyCorpus);
    }
    if !(1..=4).contains(&max_n) {
        return Err(MetricError::BadMaxN(max_n));
    }
    let mut matched = vec![0usize; max_n];
    let mut total = vec![0usize; max_n];
    let mut hyp_len = 0usize;
    let mut ref_len = 0usize;

    for pair in pairs {
        hyp_len += pair.hypothesis.len();
        // Closest reference length; ties go to the shorter reference.
        let closest = pair
            .references
            .iter()
            .map(|r| r.len())
            .min_by_key(|&l| {
                let diff = (l as isize - pair.hypothesis.len() as isize).abs();
                (diff, l)
            })
            .unwrap();
        ref_len += closest;

        for k in 1..=max_n {
            let hyp_counts = ngram_counts(&pair.hypothesis, k);
            // Per-n-gram maximum count over the references (clipping bound).
            let mut ref_max: HashMap<&[String], usize> = HashMap::new();
            for r in &pair.references {
                for (gram, count) in ngram_counts(r, k) {
                    let e = ref_max.entry(gram).or_insert(0);
                    *e = (*e).max(count);
                }
            }
            for (gram, count) in &hyp_counts {
                total[k - 1] += count;
                matched[k - 1] += (*count).min(ref_max.get(gram).copied().unwrap_or(0));
            }
        }
    }

    let mut log_sum = 0.0;
    for k in 0..max_n {
        let p = if total[k] == 0 || matched[k] == 0 {
            BLEU_EPSILON
        } else {
            matched[k] as f64 / total[k] as f64
        };
        log_sum += p.ln();
    }
    let geo_mean = (log_sum / max_n as f64).exp();
    let bp = if hyp_len == 0 {
        0.0
    } else {
        (1.0 - ref_len as f64 / hyp_len as f64).exp().min(1.0)
    };
    Ok(bp * geo_mean)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RougeVariant {
    L,
    N1,
    N2,
}

fn lcs_len(a: &[String], b: &[String]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { prev[j + 1].max(cur[j]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// ROUGE-L F1 (β = 1) by default; ROUGE-1/2 are the n-gram recall analogs.
/// Corpus value is the mean over pairs of the best per-reference score.
pub fn rouge(pairs: &[EvalPair], variant: RougeVariant) -> Result<f64> {
    if pairs.is_empty() {
        return Err(MetricError::EmptyCorpus);
    }
    let mut sum = 0.0;
    for pair in pairs {
        let mut best: f64 = 0.0;
        for r in &pair.references {
            let score = match variant {
                RougeVariant::L => {
                    let lcs = lcs_len(&pair.hypothesis, r);
                    if lcs == 0 || pair.hypothesis.is_empty() || r.is_empty() {
                        0.0
                    } else {
                        let p = lcs as f64 / pair.hypothesis.len() as f64;
                        let rec = lcs as f64 / r.len() as f64;
                        2.0 * p * rec / (p + rec)
                    }
                }
                RougeVariant::N1 | RougeVariant::N2 => {
                    let n = if variant == RougeVariant::N1 { 1 } else { 2 };
                    let ref_counts = ngram_counts(r, n);
                    let total_ref: usize = ref_counts.values().sum();
                    if total_ref == 0 {
                        0.0
                    } else {
                        let hyp_counts = ngram_counts(&pair.hypothesis, n);
                        let matched: usize = ref_counts
                            .iter()
                            .map(|(g, c)| (*c).min(hyp_counts.get(g).copied().unwrap_or(0)))
                            .sum();
                        matched as f64 / total_ref as f64
                    }
                }
            };
            best = best.max(score);
        }
        sum += best;
    }
    Ok(sum / pairs.len() as f64)
}

/// Light suffix stripper for the METEOR stem-match stage.
fn stem(token: &str) -> String {
    for suffix in ["ing", "ed", "es", "ly", "s"] {
        if let Some(base) = token.strip_suffix(suffix) {
            if base.len() >= 3 {
                return base.to_string();
            }
        }
    }
    token.to_string()
}

struct Alignment {
    matches: usize,
    chunks: usize,
}

/// Two-stage greedy unigram alignment: exact matches first, then stem
/// matches. Hypothesis tokens scan left-to-right, each taking the first
/// unmatched reference token.
fn align(hyp: &[String], reference: &[String]) -> Alignment {
    let mut hyp_match: Vec<Option<usize>> = vec![None; hyp.len()];
    let mut ref_used = vec![false; reference.len()];

    for exact in [true, false] {
        for (i, h) in hyp.iter().enumerate() {
            if hyp_match[i].is_some() {
                continue;
            }
            for (j, r) in reference.iter().enumerate() {
                if ref_used[j] {
                    continue;
                }
                let hit = if exact { h == r } else { stem(h) == stem(r) };
                if hit {
                    hyp_match[i] = Some(j);
                    ref_used[j] = true;
                    break;
                }
            }
        }
    }

    let mut matches = 0;
    let mut chunks = 0;
    let mut prev: Option<usize> = None;
    for m in hyp_match.iter() {
        match m {
            Some(j) => {
                matches += 1;
                if prev != Some(j.wrapping_sub(1)) {
                    chunks += 1;
                }
                prev = Some(*j);
            }
            None => prev = None,
        }
    }
    Alignment { matches, chunks }
}

/// METEOR without synonym/paraphrase resources: F_mean = 10PR/(R+9P),
/// fragmentation penalty 0.5 (chunks/matches)^3, score per pair against the
/// best reference, corpus value the mean over pairs.
pub fn meteor_lite(pairs: &[EvalPair]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(MetricError::EmptyCorpus);
    }
    let mut sum = 0.0;
    for pair in pairs {
        let mut best: f64 = 0.0;
        for r in &pair.references {
            let a = align(&pair.hypothesis, r);
            if a.matches == 0 || pair.hypothesis.is_empty() || r.is_empty() {
                continue;
            }
            let p = a.matches as f64 / pair.hypothesis.len() as f64;
            let rec = a.matches as f64 / r.len() as f64;
            let f_mean = 10.0 * p * rec / (rec + 9.0 * p);
            let penalty = 0.5 * (a.chunks as f64 / a.matches as f64).powi(3);
            best = best.max(f_mean * (1.0 - penalty));
        }
        sum += best;
    }
    Ok(sum / pairs.len() as f64)
}

/// Sample Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(MetricError::BadLengths(x.len(), y.len()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (&a, &b) in x.iter().zip(y.iter()) {
        cov += (a - mx) * (b - my);
        vx += (a - mx) * (a - mx);
        vy += (b - my) * (b - my);
    }
    if vx == 0.0 {
        return Err(MetricError::ZeroVariance("x"));
    }
    if vy == 0.0 {
        return Err(MetricError::ZeroVariance("y"));
    }
    Ok(cov / (vx.sqrt() * vy.sqrt()))
}

// ---------------------------------------------------------------------------
// human-score table
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ActualLabel {
    Real,
    Fake,
}

/// Weighted rating mass: rows are the actual label, columns the judged label.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RatingTable {
    pub real_judged_real: f64,
    pub real_judged_fake: f64,
    pub fake_judged_real: f64,
    pub fake_judged_fake: f64,
}

impl RatingTable {
    pub fn from_counts(rjr: f64, rjf: f64, fjr: f64, fjf: f64) -> Self {
        RatingTable {
            real_judged_real: rjr,
            real_judged_fake: rjf,
            fake_judged_real: fjr,
            fake_judged_fake: fjf,
        }
    }

    /// Row percentages (judged-real %, judged-fake %) per actual label.
    /// `None` for a row with zero total mass.
    pub fn percentages(&self) -> (Option<(f64, f64)>, Option<(f64, f64)>) {
        let row = |a: f64, b: f64| {
            let total = a + b;
            if total == 0.0 {
                None
            } else {
                Some((100.0 * a / total, 100.0 * b / total))
            }
        };
        (
            row(self.real_judged_real, self.real_judged_fake),
            row(self.fake_judged_real, self.fake_judged_fake),
        )
    }

    pub fn to_csv(&self) -> String {
        let (real, fake) = self.percentages();
        let fmt = |r: Option<(f64, f64)>| match r {
            Some((a, b)) => format!("{a:.2},{b:.2}"),
            None => ",".to_string(),
        };
        format!(
            "actual,judged_real,judged_fake,pct_real,pct_fake\n\
             real,{},{},{}\n\
             fake,{},{},{}\n",
            self.real_judged_real,
            self.real_judged_fake,
            fmt(real),
            self.fake_judged_real,
            self.fake_judged_fake,
            fmt(fake),
        )
    }
}

/// Ratings are 1..=5 (1 = certainly real, 5 = certainly from a model);
/// |rating - 3| is the weight, ratings below 3 vote judged-real, above 3
/// judged-fake, and 3 contributes nothing.
pub fn weighted_human_scores(ratings: &[(ActualLabel, u8)]) -> Result<RatingTable> {
    let mut table = RatingTable::default();
    for &(actual, rating) in ratings {
        if !(1..=5).contains(&rating) {
            return Err(MetricError::BadRating(rating));
        }
        let weight = (rating as f64 - 3.0).abs();
        let judged_real = rating < 3;
        match (actual, judged_real) {
            (ActualLabel::Real, true) => table.real_judged_real += weight,
            (ActualLabel::Real, false) => table.real_judged_fake += weight,
            (ActualLabel::Fake, true) => table.fake_judged_real += weight,
            (ActualLabel::Fake, false) => table.fake_judged_fake += weight,
        }
    }
    Ok(table)
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

/// Rows of (model, embedding, metric, value in [0, 1]).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MetricReport {
    pub rows: Vec<(String, String, String, f64)>,
}

impl MetricReport {
    pub fn push(&mut self, model: &str, embedding: &str, metric: &str, value: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&value) || !value.is_finite() {
            return Err(MetricError::ValueOutOfRange(value));
        }
        self.rows.push((model.to_string(), embedding.to_string(), metric.to_string(), value));
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("model,embedding,metric,value\n");
        for (model, embedding, metric, value) in &self.rows {
            out.push_str(&format!("{model},{embedding},{metric},{value:.6}\n"));
        }
        out
    }
}
