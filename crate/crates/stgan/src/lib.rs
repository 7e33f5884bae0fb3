//! Desk-scale laboratory for adversarial text generation in sentence-embedding
//! space.
//!
//! The pieces, bottom to top:
//!
//! - [`tensor`]: a dense f64 tensor with define-by-run reverse-mode autodiff,
//!   Adam, and gradient clipping. Every learnable weight in the crate lives here.
//! - [`corpus`]: tokenization, vocabularies, start/end-token id sequences,
//!   sentence triples, and same-length batching.
//! - [`embed`]: word-vector tables and the two composed sentence embeddings
//!   (average and per-dimension extrema).
//! - [`skipthought`]: GRU encoder + twin conditional GRU decoders trained to
//!   reconstruct neighboring sentences, plus greedy and top-k decoding.
//! - [`gan`]: generator/critic stacks over sentence vectors with four
//!   objectives (non-saturating, least-squares, Wasserstein, Wasserstein with
//!   gradient penalty), minibatch discrimination, and a conditional mode.
//! - [`metrics`]: corpus BLEU-n, ROUGE, a resource-free METEOR, Pearson
//!   correlation, and weighted human-score tables.
//! - [`fixture`]: a seeded phrase-grammar corpus generator so everything runs
//!   without downloads.

pub mod corpus;
pub mod embed;
pub mod fixture;
pub mod gan;
pub mod logging;
pub mod metrics;
pub mod rng;
pub mod skipthought;
pub mod tensor;
