//! Experiment configuration: a TOML file plus flag overrides, with the desk
//! and paper-scale presets. Every run is seeded explicitly; nothing reads the
//! wall clock.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use stgan::embed::EmbeddingKind;
use stgan::gan::{FMeasure, GanConfig, MinibatchShape};
use stgan::skipthought::{CombineMode, SkipThoughtConfig};

use crate::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    Desk,
    PaperScale,
}

impl Preset {
    pub fn parse(s: &str) -> Option<Preset> {
        match s {
            "desk" => Some(Preset::Desk),
            "paper-scale" => Some(Preset::PaperScale),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Desk => "desk",
            Preset::PaperScale => "paper-scale",
        }
    }
}

/// Everything a full pipeline run needs. Built from a preset, optionally a
/// TOML file, then flag overrides, in that order.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub corpus: Option<PathBuf>,
    pub word_vectors: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: u64,
    pub preset: Preset,
    pub embedding: EmbeddingKind,
    pub skipthought: SkipThoughtConfig,
    pub gan: GanConfigDraft,
    pub sample_count: usize,
    pub decode: DecodeMode,
    pub metrics: Vec<String>,
    pub min_freq: u64,
    pub vocab_cap: usize,
    pub max_sentence_len: usize,
    /// Random-table dimension when no word-vector file is supplied.
    pub fallback_word_dim: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecodeMode {
    Greedy,
    TopK,
}

impl DecodeMode {
    pub fn parse(s: &str) -> Option<DecodeMode> {
        match s {
            "greedy" => Some(DecodeMode::Greedy),
            "topk" | "sample" => Some(DecodeMode::TopK),
            _ => None,
        }
    }
}

/// GAN settings without the data dimension (known only after encoding).
#[derive(Clone, Debug)]
pub struct GanConfigDraft {
    pub f_measure: FMeasure,
    pub minibatch: Option<MinibatchShape>,
    pub rounds: usize,
    pub batch_size: usize,
    pub noise_dim: usize,
    pub gen_layers: Vec<usize>,
    pub disc_layers: Vec<usize>,
    pub lr: f64,
    pub gp_lambda: f64,
    pub gen_updates: usize,
    pub disc_updates: usize,
    pub conditional: bool,
}

impl GanConfigDraft {
    pub fn desk() -> GanConfigDraft {
        GanConfigDraft {
            f_measure: FMeasure::WGanGp,
            minibatch: None,
            rounds: 2000,
            batch_size: 16,
            noise_dim: 32,
            gen_layers: vec![128, 128],
            disc_layers: vec![128, 64],
            lr: 3e-4,
            gp_lambda: 10.0,
            gen_updates: 2,
            disc_updates: 1,
            conditional: false,
        }
    }

    pub fn materialize(&self, data_dim: usize, condition_dim: Option<usize>, seed: u64) -> GanConfig {
        GanConfig {
            noise_dim: self.noise_dim,
            data_dim,
            gen_layers: self.gen_layers.clone(),
            disc_layers: self.disc_layers.clone(),
            f_measure: self.f_measure,
            minibatch: self.minibatch,
            gp_lambda: self.gp_lambda,
            conditional: condition_dim,
            gen_updates: self.gen_updates,
            disc_updates: self.disc_updates,
            batch_size: self.batch_size,
            lr: self.lr,
            rounds: self.rounds,
            leaky_slope: 0.2,
            weight_clip: 0.01,
            clip_norm: 5.0,
            seed,
        }
    }
}

impl ExperimentConfig {
    pub fn preset(preset: Preset, out: impl Into<PathBuf>, seed: u64) -> ExperimentConfig {
        let skipthought = match preset {
            Preset::Desk => SkipThoughtConfig::desk(),
            Preset::PaperScale => SkipThoughtConfig::paper_scale(),
        };
        ExperimentConfig {
            corpus: None,
            word_vectors: None,
            out: out.into(),
            seed,
            preset,
            embedding: EmbeddingKind::CombineSkip,
            skipthought,
            gan: GanConfigDraft::desk(),
            sample_count: 64,
            decode: DecodeMode::Greedy,
            metrics: vec![
                "bleu1".into(),
                "bleu2".into(),
                "bleu3".into(),
                "bleu4".into(),
                "rougeL".into(),
                "meteor".into(),
            ],
            min_freq: 1,
            vocab_cap: 10_000,
            max_sentence_len: stgan::corpus::DEFAULT_MAX_LEN,
            fallback_word_dim: 50,
        }
    }

    /// Per-stage deterministic sub-seed.
    pub fn stage_seed(&self, tag: u64) -> u64 {
        stgan::rng::Rng::new(self.seed).fork(tag).next_u64()
    }

    /// Swap in a preset's model settings, preserving paths, seed, and
    /// evaluation choices.
    pub fn apply_preset(&mut self, preset: Preset) {
        self.preset = preset;
        self.skipthought = match preset {
            Preset::Desk => SkipThoughtConfig::desk(),
            Preset::PaperScale => SkipThoughtConfig::paper_scale(),
        };
        self.gan = GanConfigDraft::desk();
    }
}

// ---------------------------------------------------------------------------
// TOML file
// ---------------------------------------------------------------------------

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    corpus: Option<String>,
    word_vectors: Option<String>,
    out: Option<String>,
    seed: Option<u64>,
    preset: Option<String>,
    embedding: Option<String>,
    sample_count: Option<usize>,
    decode: Option<String>,
    metrics: Option<Vec<String>>,
    min_freq: Option<u64>,
    vocab_cap: Option<usize>,
    max_sentence_len: Option<usize>,
    fallback_word_dim: Option<usize>,
    #[serde(default)]
    skipthought: FileSkipThought,
    #[serde(default)]
    gan: FileGan,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileSkipThought {
    word_dim: Option<usize>,
    hidden_enc: Option<usize>,
    hidden_dec: Option<usize>,
    combine: Option<String>,
    max_decode_len: Option<usize>,
    beam_width: Option<usize>,
    temperature: Option<f64>,
    epochs: Option<usize>,
    lr: Option<f64>,
    batch_size: Option<usize>,
    clip_norm: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileGan {
    fmeasure: Option<String>,
    minibatch_discrimination: Option<bool>,
    minibatch_kernels: Option<usize>,
    minibatch_kernel_dim: Option<usize>,
    rounds: Option<usize>,
    batch_size: Option<usize>,
    noise_dim: Option<usize>,
    gen_layers: Option<Vec<usize>>,
    disc_layers: Option<Vec<usize>>,
    lr: Option<f64>,
    gp_lambda: Option<f64>,
    gen_updates: Option<usize>,
    disc_updates: Option<usize>,
    conditional: Option<bool>,
}

/// Apply a TOML config file over a base config. Returns whether the file
/// provided a seed.
pub fn apply_file(base: &mut ExperimentConfig, path: &Path) -> Result<bool> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::validation(format!("cannot read config {}: {e}", path.display())))?;
    let file: FileConfig = toml::from_str(&text)
        .map_err(|e| CliError::validation(format!("bad config {}: {e}", path.display())))?;
    let seed_given = file.seed.is_some();

    if let Some(p) = file.preset {
        let preset = Preset::parse(&p)
            .ok_or_else(|| CliError::validation(format!("unknown preset {p:?}")))?;
        base.apply_preset(preset);
    }
    if let Some(v) = file.corpus {
        base.corpus = Some(v.into());
    }
    if let Some(v) = file.word_vectors {
        base.word_vectors = Some(v.into());
    }
    if let Some(v) = file.out {
        base.out = v.into();
    }
    if let Some(v) = file.seed {
        base.seed = v;
    }
    if let Some(v) = file.embedding {
        base.embedding = EmbeddingKind::parse(&v)
            .ok_or_else(|| CliError::validation(format!("unknown embedding {v:?}")))?;
    }
    if let Some(v) = file.sample_count {
        base.sample_count = v;
    }
    if let Some(v) = file.decode {
        base.decode = DecodeMode::parse(&v)
            .ok_or_else(|| CliError::validation(format!("unknown decode mode {v:?}")))?;
    }
    if let Some(v) = file.metrics {
        base.metrics = v;
    }
    if let Some(v) = file.min_freq {
        base.min_freq = v;
    }
    if let Some(v) = file.vocab_cap {
        base.vocab_cap = v;
    }
    if let Some(v) = file.max_sentence_len {
        base.max_sentence_len = v;
    }
    if let Some(v) = file.fallback_word_dim {
        base.fallback_word_dim = v;
    }

    let st = &mut base.skipthought;
    let f = file.skipthought;
    if let Some(v) = f.word_dim {
        st.word_dim = v;
    }
    if let Some(v) = f.hidden_enc {
        st.hidden_enc = v;
    }
    if let Some(v) = f.hidden_dec {
        st.hidden_dec = v;
    }
    if let Some(v) = f.combine {
        st.combine = CombineMode::parse(&v)
            .ok_or_else(|| CliError::validation(format!("unknown combine mode {v:?}")))?;
    }
    if let Some(v) = f.max_decode_len {
        st.max_decode_len = v;
    }
    if let Some(v) = f.beam_width {
        st.beam_width = v;
    }
    if let Some(v) = f.temperature {
        st.temperature = v;
    }
    if let Some(v) = f.epochs {
        st.epochs = v;
    }
    if let Some(v) = f.lr {
        st.lr = v;
    }
    if let Some(v) = f.batch_size {
        st.batch_size = v;
    }
    if let Some(v) = f.clip_norm {
        st.clip_norm = v;
    }

    let gd = &mut base.gan;
    let f = file.gan;
    if let Some(v) = f.fmeasure {
        gd.f_measure = FMeasure::parse(&v)
            .ok_or_else(|| CliError::validation(format!("unknown f-measure {v:?}")))?;
    }
    if let Some(v) = f.minibatch_discrimination {
        gd.minibatch = v.then(MinibatchShape::default);
    }
    if let Some(v) = f.minibatch_kernels {
        let mut shape = gd.minibatch.unwrap_or_default();
        shape.kernels = v;
        gd.minibatch = Some(shape);
    }
    if let Some(v) = f.minibatch_kernel_dim {
        let mut shape = gd.minibatch.unwrap_or_default();
        shape.kernel_dim = v;
        gd.minibatch = Some(shape);
    }
    if let Some(v) = f.rounds {
        gd.rounds = v;
    }
    if let Some(v) = f.batch_size {
        gd.batch_size = v;
    }
    if let Some(v) = f.noise_dim {
        gd.noise_dim = v;
    }
    if let Some(v) = f.gen_layers {
        gd.gen_layers = v;
    }
    if let Some(v) = f.disc_layers {
        gd.disc_layers = v;
    }
    if let Some(v) = f.lr {
        gd.lr = v;
    }
    if let Some(v) = f.gp_lambda {
        gd.gp_lambda = v;
    }
    if let Some(v) = f.gen_updates {
        gd.gen_updates = v;
    }
    if let Some(v) = f.disc_updates {
        gd.disc_updates = v;
    }
    if let Some(v) = f.conditional {
        gd.conditional = v;
    }
    Ok(seed_given)
}
