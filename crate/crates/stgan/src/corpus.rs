//! Corpus ingestion: tokenization, vocabularies, id sequences wrapped in
//! start/end tokens, sentence triples, same-length batching, and the
//! seeded train/valid/test split.
//!
//! Corpus files are plain text, one sentence per line; a blank line separates
//! documents, and triples never cross documents.

use std::collections::HashMap;

use thiserror::Error;

use crate::logging;
use crate::rng::Rng;

pub const PAD: usize = 0;
pub const BOS: usize = 1;
pub const EOS: usize = 2;
pub const UNK: usize = 3;

pub const RESERVED: [&str; 4] = ["<pad>", "<s>", "</s>", "<unk>"];

/// Sentences longer than this many body tokens are dropped during ingestion.
pub const DEFAULT_MAX_LEN: usize = 30;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum CorpusError {
    #[error("corpus contains no tokens")]
    EmptyCorpus,
    #[error("vocabulary file line {0} is malformed: {1:?}")]
    BadVocabLine(usize, String),
    #[error("min_freq must be >= 1")]
    BadMinFreq,
}

pub type Result<T> = std::result::Result<T, CorpusError>;

// ---------------------------------------------------------------------------
// tokenization
// ---------------------------------------------------------------------------

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

fn push_word(word: &str, out: &mut Vec<String>) {
    if word.is_empty() {
        return;
    }
    // Clitic splits in the corpus style: "can't" -> "ca n't", "person's" ->
    // "person 's".
    let chars: Vec<char> = word.chars().collect();
    if chars.len() > 3 && is_apostrophe(chars[chars.len() - 2]) {
        let tail: String = chars[chars.len() - 3..].iter().collect();
        if tail.starts_with('n') && tail.ends_with('t') {
            out.push(chars[..chars.len() - 3].iter().collect());
            out.push("n't".to_string());
            return;
        }
    }
    if let Some(pos) = chars.iter().position(|&c| is_apostrophe(c)) {
        if pos > 0 && pos < chars.len() {
            out.push(chars[..pos].iter().collect());
            let mut rest = String::from("'");
            rest.extend(&chars[pos + 1..]);
            if rest.len() > 1 {
                out.push(rest);
            }
            return;
        }
    }
    out.push(word.to_string());
}

/// Lowercase, split on whitespace, separate punctuation into standalone
/// tokens, and split clitics ("can't" -> "ca n't"). Deterministic; an empty
/// line yields an empty sequence.
pub fn tokenize(line: &str) -> Vec<String> {
    let lower = line.to_lowercase();
    let mut tokens = Vec::new();
    for word in lower.split_whitespace() {
        let mut run = String::new();
        for c in word.chars() {
            if is_word_char(c) || is_apostrophe(c) {
                run.push(c);
            } else {
                push_word(&run, &mut tokens);
                run.clear();
                tokens.push(c.to_string());
            }
        }
        push_word(&run, &mut tokens);
    }
    tokens
}

// ---------------------------------------------------------------------------
// vocabulary
// ---------------------------------------------------------------------------

/// Token/id bijection with reserved ids 0=PAD, 1=<s>, 2=</s>, 3=UNK.
#[derive(Clone, Debug)]
pub struct Vocabulary {
    token_to_id: HashMap<String, usize>,
    id_to_token: Vec<String>,
    frequencies: Vec<u64>,
}

impl Vocabulary {
    /// Build from corpus lines: tokens with frequency >= `min_freq`, sorted by
    /// descending frequency then lexicographically, truncated to `cap`
    /// non-reserved entries.
    pub fn build<'a>(lines: impl IntoIterator<Item = &'a str>, min_freq: u64, cap: usize) -> Result<Vocabulary> {
        if min_freq < 1 {
            return Err(CorpusError::BadMinFreq);
        }
        let mut counts: HashMap<String, u64> = HashMap::new();
        for line in lines {
            for tok in tokenize(line) {
                *counts.entry(tok).or_insert(0) += 1;
            }
        }
        if counts.is_empty() {
            return Err(CorpusError::EmptyCorpus);
        }
        let mut entries: Vec<(String, u64)> =
            counts.into_iter().filter(|&(_, c)| c >= min_freq).collect();
        entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        entries.truncate(cap);

        let mut vocab = Vocabulary {
            token_to_id: HashMap::new(),
            id_to_token: RESERVED.iter().map(|s| s.to_string()).collect(),
            frequencies: vec![0; RESERVED.len()],
        };
        for (i, name) in RESERVED.iter().enumerate() {
            vocab.token_to_id.insert(name.to_string(), i);
        }
        for (tok, freq) in entries {
            let id = vocab.id_to_token.len();
            vocab.token_to_id.insert(tok.clone(), id);
            vocab.id_to_token.push(tok);
            vocab.frequencies.push(freq);
        }
        Ok(vocab)
    }

    pub fn size(&self) -> usize {
        self.id_to_token.len()
    }

    /// Id for a token; unknown tokens map to UNK.
    pub fn lookup(&self, token: &str) -> usize {
        self.token_to_id.get(token).copied().unwrap_or(UNK)
    }

    pub fn token(&self, id: usize) -> &str {
        &self.id_to_token[id]
    }

    pub fn frequency(&self, id: usize) -> u64 {
        self.frequencies[id]
    }

    /// Serialize as "token\tid\tfrequency" lines in id order.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (id, tok) in self.id_to_token.iter().enumerate() {
            out.push_str(&format!("{}\t{}\t{}\n", tok, id, self.frequencies[id]));
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<Vocabulary> {
        let mut id_to_token = Vec::new();
        let mut frequencies = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split('\t');
            let (Some(tok), Some(id), Some(freq)) = (parts.next(), parts.next(), parts.next())
            else {
                return Err(CorpusError::BadVocabLine(lineno + 1, line.to_string()));
            };
            let id: usize = id
                .parse()
                .map_err(|_| CorpusError::BadVocabLine(lineno + 1, line.to_string()))?;
            let freq: u64 = freq
                .parse()
                .map_err(|_| CorpusError::BadVocabLine(lineno + 1, line.to_string()))?;
            if id != id_to_token.len() {
                return Err(CorpusError::BadVocabLine(lineno + 1, line.to_string()));
            }
            id_to_token.push(tok.to_string());
            frequencies.push(freq);
        }
        if id_to_token.len() < RESERVED.len() {
            return Err(CorpusError::EmptyCorpus);
        }
        let token_to_id =
            id_to_token.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Ok(Vocabulary { token_to_id, id_to_token, frequencies })
    }
}

// ---------------------------------------------------------------------------
// sentences, triples, documents
// ---------------------------------------------------------------------------

/// Id sequence with a leading `<s>` and trailing `</s>`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TokenizedSentence {
    pub ids: Vec<usize>,
    /// 1-based line number in the source file (0 for synthetic sentences).
    pub line: usize,
}

impl TokenizedSentence {
    pub fn new(ids: Vec<usize>, line: usize) -> Self {
        debug_assert!(ids.len() >= 2 && ids[0] == BOS && *ids.last().unwrap() == EOS);
        debug_assert!(ids[1..ids.len() - 1].iter().all(|&i| i != PAD));
        TokenizedSentence { ids, line }
    }

    /// Number of ids including the start/end tokens.
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Body ids, without the start/end tokens.
    pub fn body(&self) -> &[usize] {
        &self.ids[1..self.ids.len() - 1]
    }

    /// Body length in tokens.
    pub fn body_len(&self) -> usize {
        self.ids.len() - 2
    }

    pub fn decode(&self, vocab: &Vocabulary) -> Vec<String> {
        self.body().iter().map(|&id| vocab.token(id).to_string()).collect()
    }

    pub fn text(&self, vocab: &Vocabulary) -> String {
        self.decode(vocab).join(" ")
    }
}

/// Wrap a token sequence in `<s>`/`</s>` and map OOV tokens to UNK.
pub fn encode_ids(tokens: &[String], vocab: &Vocabulary, line: usize) -> TokenizedSentence {
    let mut ids = Vec::with_capacity(tokens.len() + 2);
    ids.push(BOS);
    ids.extend(tokens.iter().map(|t| vocab.lookup(t)));
    ids.push(EOS);
    TokenizedSentence::new(ids, line)
}

/// Three consecutive sentences of one document.
#[derive(Clone, Debug)]
pub struct SentenceTriple {
    pub prev: TokenizedSentence,
    pub current: TokenizedSentence,
    pub next: TokenizedSentence,
}

/// Sliding window of width 3, stride 1. Documents with fewer than three
/// sentences yield no triples (warned).
pub fn make_triples(document: &[TokenizedSentence]) -> Vec<SentenceTriple> {
    if document.len() < 3 {
        logging::warn(format!(
            "document with {} sentence(s) yields no triples",
            document.len()
        ));
        return Vec::new();
    }
    document
        .windows(3)
        .map(|w| SentenceTriple { prev: w[0].clone(), current: w[1].clone(), next: w[2].clone() })
        .collect()
}

/// A parsed corpus: documents of encoded sentences.
#[derive(Clone, Debug, Default)]
pub struct Corpus {
    pub documents: Vec<Vec<TokenizedSentence>>,
    pub dropped_too_long: usize,
}

impl Corpus {
    pub fn sentences(&self) -> impl Iterator<Item = &TokenizedSentence> {
        self.documents.iter().flatten()
    }

    pub fn sentence_count(&self) -> usize {
        self.documents.iter().map(|d| d.len()).sum()
    }

    pub fn triples(&self) -> Vec<SentenceTriple> {
        self.documents.iter().flat_map(|d| make_triples(d)).collect()
    }
}

/// Parse corpus text (one sentence per line, blank line separates documents)
/// against a vocabulary. Sentences longer than `max_len` body tokens are
/// dropped and counted.
pub fn parse_corpus(text: &str, vocab: &Vocabulary, max_len: usize) -> Corpus {
    let mut corpus = Corpus::default();
    let mut current: Vec<TokenizedSentence> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            if !current.is_empty() {
                corpus.documents.push(std::mem::take(&mut current));
            }
            continue;
        }
        let tokens = tokenize(line);
        if tokens.is_empty() {
            continue;
        }
        if tokens.len() > max_len {
            corpus.dropped_too_long += 1;
            continue;
        }
        current.push(encode_ids(&tokens, vocab, lineno + 1));
    }
    if !current.is_empty() {
        corpus.documents.push(current);
    }
    if corpus.dropped_too_long > 0 {
        logging::info(format!(
            "dropped {} sentence(s) longer than {max_len} tokens",
            corpus.dropped_too_long
        ));
    }
    corpus
}

// ---------------------------------------------------------------------------
// batching
// ---------------------------------------------------------------------------

/// Group sentences by exact id-sequence length; each batch is homogeneous in
/// length and holds at most `batch_size` items. Order within a length group
/// is shuffled deterministically by `rng`; groups are emitted shortest first.
pub fn batch_same_length(
    sentences: &[TokenizedSentence],
    batch_size: usize,
    rng: &mut Rng,
) -> Vec<Vec<TokenizedSentence>> {
    assert!(batch_size >= 1);
    let mut by_len: Vec<(usize, Vec<&TokenizedSentence>)> = Vec::new();
    let mut index: HashMap<usize, usize> = HashMap::new();
    for s in sentences {
        let slot = *index.entry(s.len()).or_insert_with(|| {
            by_len.push((s.len(), Vec::new()));
            by_len.len() - 1
        });
        by_len[slot].1.push(s);
    }
    by_len.sort_by_key(|(len, _)| *len);
    let mut batches = Vec::new();
    for (_, mut group) in by_len {
        rng.shuffle(&mut group);
        for chunk in group.chunks(batch_size) {
            batches.push(chunk.iter().map(|s| (*s).clone()).collect());
        }
    }
    batches
}

/// Group triples by their (prev, current, next) length signature so a batch
/// unrolls rectangularly, then shuffle the batch order.
pub fn batch_triples(
    triples: &[SentenceTriple],
    batch_size: usize,
    rng: &mut Rng,
) -> Vec<Vec<SentenceTriple>> {
    assert!(batch_size >= 1);
    let mut by_sig: Vec<((usize, usize, usize), Vec<&SentenceTriple>)> = Vec::new();
    let mut index: HashMap<(usize, usize, usize), usize> = HashMap::new();
    for t in triples {
        let sig = (t.prev.len(), t.current.len(), t.next.len());
        let slot = *index.entry(sig).or_insert_with(|| {
            by_sig.push((sig, Vec::new()));
            by_sig.len() - 1
        });
        by_sig[slot].1.push(t);
    }
    by_sig.sort_by_key(|(sig, _)| *sig);
    let mut batches = Vec::new();
    for (_, mut group) in by_sig {
        rng.shuffle(&mut group);
        for chunk in group.chunks(batch_size) {
            batches.push(chunk.iter().map(|t| (*t).clone()).collect::<Vec<_>>());
        }
    }
    rng.shuffle(&mut batches);
    batches
}

// ---------------------------------------------------------------------------
// splits
// ---------------------------------------------------------------------------

/// Contiguous sentence blocks assigned to train/valid/test in 5/1/1
/// proportion. Triples are formed within blocks only, so the split never
/// breaks a triple across sets.
#[derive(Clone, Debug, Default)]
pub struct SplitCorpus {
    pub train: Vec<Vec<TokenizedSentence>>,
    pub valid: Vec<Vec<TokenizedSentence>>,
    pub test: Vec<Vec<TokenizedSentence>>,
}

impl SplitCorpus {
    pub fn train_triples(&self) -> Vec<SentenceTriple> {
        self.train.iter().flat_map(|b| make_triples(b)).collect()
    }

    pub fn valid_triples(&self) -> Vec<SentenceTriple> {
        self.valid.iter().flat_map(|b| make_triples(b)).collect()
    }

    pub fn sentences_of(blocks: &[Vec<TokenizedSentence>]) -> Vec<TokenizedSentence> {
        blocks.iter().flatten().cloned().collect()
    }
}

/// Block length used when chopping documents for the split; long enough that
/// most sentences sit inside a triple, short enough to mix well at 200
/// sentences.
pub const SPLIT_BLOCK_LEN: usize = 7;

/// Deterministic seeded 5/1/1 split by contiguous sentence blocks.
pub fn split_corpus(corpus: &Corpus, rng: &mut Rng) -> SplitCorpus {
    let mut blocks: Vec<Vec<TokenizedSentence>> = Vec::new();
    for doc in &corpus.documents {
        let mut start = 0;
        while start < doc.len() {
            let mut end = (start + SPLIT_BLOCK_LEN).min(doc.len());
            // Avoid a trailing stub too short to form a triple.
            if doc.len() - end < 3 {
                end = doc.len();
            }
            blocks.push(doc[start..end].to_vec());
            start = end;
        }
    }
    rng.shuffle(&mut blocks);

    let total: usize = blocks.iter().map(|b| b.len()).sum();
    let targets = [5.0 / 7.0 * total as f64, 1.0 / 7.0 * total as f64, 1.0 / 7.0 * total as f64];
    let mut assigned = [0usize; 3];
    let mut split = SplitCorpus::default();
    for block in blocks {
        // Fill whichever split is furthest below its target.
        let deficit =
            |i: usize| (targets[i] - assigned[i] as f64) / targets[i].max(1.0);
        let mut best = 0;
        for i in 1..3 {
            if deficit(i) > deficit(best) {
                best = i;
            }
        }
        assigned[best] += block.len();
        match best {
            0 => split.train.push(block),
            1 => split.valid.push(block),
            _ => split.test.push(block),
        }
    }
    split
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
