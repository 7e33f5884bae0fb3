//! Independent brute-force scorers used to cross-check the metric
//! implementations. Written from the metric definitions directly, sharing no
//! code with the library: n-gram counting by exhaustive string enumeration,
//! LCS by a full dynamic-programming table, alignment by explicit repeated
//! scanning.

use std::collections::HashMap;

use stgan::metrics::EvalPair;

/// Count n-grams by enumerating every window and keying on the joined
/// string.
fn string_ngrams(tokens: &[String], n: usize) -> HashMap<String, usize> {
    let mut out = HashMap::new();
    if tokens.len() < n {
        return out;
    }
    for start in 0..=(tokens.len() - n) {
        let key = tokens[start..start + n].join("\u{1}");
        *out.entry(key).or_insert(0) += 1;
    }
    out
}

/// Corpus BLEU recomputed from scratch: pooled clipped counts, epsilon on
/// zero precisions, brevity penalty from the closest-length reference.
pub fn bleu_oracle(pairs: &[EvalPair], max_n: usize) -> f64 {
    let mut matched = vec![0usize; max_n];
    let mut total = vec![0usize; max_n];
    let mut hyp_len = 0usize;
    let mut ref_len = 0usize;
    for pair in pairs {
        hyp_len += pair.hypothesis.len();
        let mut best_ref = pair.references[0].len();
        for r in &pair.references {
            let better = (r.len() as isize - pair.hypothesis.len() as isize).abs()
                < (best_ref as isize - pair.hypothesis.len() as isize).abs();
            let tie_shorter = (r.len() as isize - pair.hypothesis.len() as isize).abs()
                == (best_ref as isize - pair.hypothesis.len() as isize).abs()
                && r.len() < best_ref;
            if better || tie_shorter {
                best_ref = r.len();
            }
        }
        ref_len += best_ref;
        for n in 1..=max_n {
            let hyp_counts = string_ngrams(&pair.hypothesis, n);
            for (gram, &count) in &hyp_counts {
                total[n - 1] += count;
                let clip = pair
                    .references
                    .iter()
                    .map(|r| string_ngrams(r, n).get(gram).copied().unwrap_or(0))
                    .max()
                    .unwrap_or(0);
                matched[n - 1] += count.min(clip);
            }
        }
    }
    let mut log_sum = 0.0;
    for n in 0..max_n {
        let p = if matched[n] == 0 { 1e-9 } else { matched[n] as f64 / total[n] as f64 };
        log_sum += p.ln();
    }
    let bp = if hyp_len == 0 {
        0.0
    } else {
        (1.0 - ref_len as f64 / hyp_len as f64).exp().min(1.0)
    };
    bp * (log_sum / max_n as f64).exp()
}

/// Full-table LCS.
fn lcs_table(a: &[String], b: &[String]) -> usize {
    let mut table = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            table[i][j] = if a[i - 1] == b[j - 1] {
                table[i - 1][j - 1] + 1
            } else {
                table[i - 1][j].max(table[i][j - 1])
            };
        }
    }
    table[a.len()][b.len()]
}

/// ROUGE-L F1 (beta = 1), best reference per pair, mean over pairs.
pub fn rouge_l_oracle(pairs: &[EvalPair]) -> f64 {
    let mut sum = 0.0;
    for pair in pairs {
        let mut best: f64 = 0.0;
        for r in &pair.references {
            let lcs = lcs_table(&pair.hypothesis, r);
            if lcs == 0 {
                continue;
            }
            let p = lcs as f64 / pair.hypothesis.len() as f64;
            let rec = lcs as f64 / r.len() as f64;
            best = best.max(2.0 * p * rec / (p + rec));
        }
        sum += best;
    }
    sum / pairs.len() as f64
}

fn oracle_stem(token: &str) -> String {
    for suffix in ["ing", "ed", "es", "ly", "s"] {
        if token.len() > suffix.len() {
            let cut = token.len() - suffix.len();
            if &token[cut..] == suffix && cut >= 3 {
                return token[..cut].to_string();
            }
        }
    }
    token.to_string()
}

/// Greedy two-stage alignment by explicit scanning, then chunk counting over
/// the match positions.
pub fn meteor_oracle(pairs: &[EvalPair]) -> f64 {
    let mut sum = 0.0;
    for pair in pairs {
        let mut best: f64 = 0.0;
        for reference in &pair.references {
            let mut hyp_to_ref: Vec<Option<usize>> = vec![None; pair.hypothesis.len()];
            let mut taken = vec![false; reference.len()];
            // Stage 1: exact.
            for (i, h) in pair.hypothesis.iter().enumerate() {
                for (j, r) in reference.iter().enumerate() {
                    if !taken[j] && hyp_to_ref[i].is_none() && h == r {
                        hyp_to_ref[i] = Some(j);
                        taken[j] = true;
                        break;
                    }
                }
            }
            // Stage 2: stems.
            for (i, h) in pair.hypothesis.iter().enumerate() {
                if hyp_to_ref[i].is_some() {
                    continue;
                }
                for (j, r) in reference.iter().enumerate() {
                    if !taken[j] && oracle_stem(h) == oracle_stem(r) {
                        hyp_to_ref[i] = Some(j);
                        taken[j] = true;
                        break;
                    }
                }
            }
            let m = hyp_to_ref.iter().filter(|x| x.is_some()).count();
            if m == 0 || pair.hypothesis.is_empty() || reference.is_empty() {
                continue;
            }
            // Chunks: maximal runs adjacent in both sequences.
            let mut chunks = 0usize;
            let mut last: Option<usize> = None;
            for slot in &hyp_to_ref {
                match slot {
                    Some(j) => {
                        let contiguous = matches!(last, Some(prev) if *j == prev + 1);
                        if !contiguous {
                            chunks += 1;
                        }
                        last = Some(*j);
                    }
                    None => last = None,
                }
            }
            let p = m as f64 / pair.hypothesis.len() as f64;
            let r = m as f64 / reference.len() as f64;
            let f_mean = 10.0 * p * r / (r + 9.0 * p);
            let penalty = 0.5 * (chunks as f64 / m as f64).powi(3);
            best = best.max(f_mean * (1.0 - penalty));
        }
        sum += best;
    }
    sum / pairs.len() as f64
}
