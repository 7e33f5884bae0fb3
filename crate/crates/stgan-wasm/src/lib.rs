//! Browser bindings for three interactive views of the lab:
//!
//! 1. [`MixtureLab`] — watch adversarial training on the 8-Gaussian ring,
//!    toggling the objective and minibatch discrimination, with live mode
//!    coverage.
//! 2. [`TextLab`] — train the tiny sentence encoder/decoder and an
//!    embedding-space GAN in the page, then sample generated sentences.
//! 3. [`score_metrics`] — corpus metrics for a typed hypothesis/reference
//!    pair.
//!
//! Everything is seeded explicitly; the same clicks reproduce the same runs.

use wasm_bindgen::prelude::*;

use stgan::corpus::{self, Vocabulary};
use stgan::fixture;
use stgan::gan::{mode_coverage, FMeasure, Gan, GanConfig, GanTrainer, MinibatchShape, TrainData};
use stgan::metrics::{self, EvalPair};
use stgan::rng::Rng;
use stgan::skipthought::{SkipThought, SkipThoughtConfig, StTrainer};

fn js_err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

const GAUSS_STD: f64 = 0.1;

fn parse_measure(name: &str) -> Result<FMeasure, JsValue> {
    FMeasure::parse(name).ok_or_else(|| js_err(format!("unknown objective {name:?}")))
}

// ---------------------------------------------------------------------------
// 8-Gaussian mixture lab
// ---------------------------------------------------------------------------

/// Adversarial training on the 8-Gaussian ring, stepped from the page.
#[wasm_bindgen]
pub struct MixtureLab {
    gan: Gan,
    trainer: GanTrainer,
    samples: Vec<Vec<f64>>,
    centers: Vec<Vec<f64>>,
    d_loss: f64,
    g_loss: f64,
    grad_norm: f64,
}

#[wasm_bindgen]
impl MixtureLab {
    #[wasm_bindgen(constructor)]
    pub fn new(objective: &str, minibatch: bool, seed: u32) -> Result<MixtureLab, JsValue> {
        let cfg = GanConfig {
            noise_dim: 8,
            data_dim: 2,
            gen_layers: vec![64, 64],
            disc_layers: vec![64, 32],
            f_measure: parse_measure(objective)?,
            minibatch: minibatch.then(MinibatchShape::default),
            gp_lambda: 10.0,
            conditional: None,
            gen_updates: 2,
            disc_updates: 1,
            batch_size: 16,
            lr: 3e-3,
            rounds: 0,
            leaky_slope: 0.2,
            weight_clip: 0.01,
            clip_norm: 5.0,
            seed: seed as u64,
        };
        let (samples, centers) = fixture::eight_gaussians(1024, 2.0, GAUSS_STD, 900 + seed as u64);
        let gan = Gan::new(cfg);
        let trainer = GanTrainer::new(&gan);
        Ok(MixtureLab { gan, trainer, samples, centers, d_loss: 0.0, g_loss: 0.0, grad_norm: f64::NAN })
    }

    /// Run `rounds` training rounds (1 critic + 2 generator updates each).
    pub fn step(&mut self, rounds: u32) -> Result<(), JsValue> {
        let data = TrainData { real: &self.samples, conditions: None };
        for _ in 0..rounds {
            let record = self.trainer.step(&mut self.gan, &data).map_err(js_err)?;
            self.d_loss = record.d_loss;
            self.g_loss = record.g_loss;
            self.grad_norm = record.grad_norm.unwrap_or(f64::NAN);
        }
        Ok(())
    }

    pub fn round(&self) -> u32 {
        self.trainer.rounds_done() as u32
    }

    pub fn d_loss(&self) -> f64 {
        self.d_loss
    }

    pub fn g_loss(&self) -> f64 {
        self.g_loss
    }

    /// Mean interpolate gradient norm of the last round (NaN unless the
    /// penalty objective is active).
    pub fn grad_norm(&self) -> f64 {
        self.grad_norm
    }

    /// `n` generated points, flattened [x0, y0, x1, y1, ...]; the draw seed
    /// follows the round counter so the cloud animates.
    pub fn generated(&self, n: u32) -> Result<Vec<f64>, JsValue> {
        let vectors = self
            .gan
            .sample_vectors(n as usize, None, 0xD00D + self.trainer.rounds_done() as u64)
            .map_err(js_err)?;
        Ok(vectors.into_iter().flatten().collect())
    }

    /// `n` real points, flattened.
    pub fn real(&self, n: u32) -> Vec<f64> {
        self.samples.iter().take(n as usize).flatten().copied().collect()
    }

    /// The 8 component centers, flattened.
    pub fn centers(&self) -> Vec<f64> {
        self.centers.iter().flatten().copied().collect()
    }

    /// Modes covered by 512 generated samples within 3 sigma.
    pub fn coverage(&self) -> Result<u32, JsValue> {
        let generated = self
            .gan
            .sample_vectors(512, None, 0xFEED + self.trainer.rounds_done() as u64)
            .map_err(js_err)?;
        Ok(mode_coverage(&generated, &self.centers, 3.0 * GAUSS_STD) as u32)
    }
}

// ---------------------------------------------------------------------------
// sentence lab
// ---------------------------------------------------------------------------

/// The text pipeline at browser scale: a ~120-sentence grammar corpus, the
/// sentence encoder/decoder, and an embedding-space GAN.
#[wasm_bindgen]
pub struct TextLab {
    vocab: Vocabulary,
    triples: Vec<corpus::SentenceTriple>,
    sentences: Vec<corpus::TokenizedSentence>,
    model: SkipThought,
    st_trainer: StTrainer,
    last_loss: f64,
    gan: Option<(Gan, GanTrainer, Vec<Vec<f64>>)>,
    gan_losses: (f64, f64),
}

#[wasm_bindgen]
impl TextLab {
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u32) -> Result<TextLab, JsValue> {
        let text = fixture::synthetic_corpus(120, 7000 + seed as u64);
        let vocab = Vocabulary::build(text.lines(), 1, 10_000).map_err(js_err)?;
        let parsed = corpus::parse_corpus(&text, &vocab, 30);
        let triples = parsed.triples();
        let sentences: Vec<_> = parsed.sentences().cloned().collect();
        let mut cfg = SkipThoughtConfig::desk();
        // Browser-sized model; one epoch stays around a second.
        cfg.word_dim = 48;
        cfg.hidden_enc = 48;
        cfg.hidden_dec = 64;
        let model = SkipThought::new(vocab.size(), cfg, seed as u64);
        let st_trainer = StTrainer::new(&model, seed as u64 ^ 0xaaaa);
        Ok(TextLab {
            vocab,
            triples,
            sentences,
            model,
            st_trainer,
            last_loss: f64::NAN,
            gan: None,
            gan_losses: (f64::NAN, f64::NAN),
        })
    }

    pub fn sentence_count(&self) -> u32 {
        self.sentences.len() as u32
    }

    pub fn corpus_preview(&self, n: u32) -> String {
        self.sentences
            .iter()
            .take(n as usize)
            .map(|s| s.text(&self.vocab))
            .collect::<Vec<_>>()
            .join("\n")
    }

    /// One training epoch of the sentence model; returns the mean loss.
    /// Invalidates any GAN trained on the previous embeddings.
    pub fn train_epoch(&mut self) -> Result<f64, JsValue> {
        let record = self
            .st_trainer
            .run_epoch(&mut self.model, &self.triples, None)
            .map_err(js_err)?;
        self.last_loss = record.train_loss;
        self.gan = None;
        Ok(record.train_loss)
    }

    pub fn epoch(&self) -> u32 {
        self.st_trainer.epochs_done() as u32
    }

    pub fn loss(&self) -> f64 {
        self.last_loss
    }

    /// Fraction of short training sentences (<= 6 tokens) reproduced exactly
    /// by greedy next-sentence decoding.
    pub fn reconstruction_rate(&self) -> Result<f64, JsValue> {
        self.model.reconstruction_rate(&self.triples, 6).map_err(js_err)
    }

    /// A few "current => decoded next |. expected next" lines.
    pub fn reconstructions(&self, n: u32, seed: u32) -> Result<String, JsValue> {
        let mut rng = Rng::new(seed as u64);
        let mut out = Vec::new();
        for _ in 0..n {
            let t = &self.triples[rng.below(self.triples.len())];
            let h = self.model.encode(&t.current).map_err(js_err)?;
            let decoded = self.model.greedy_next(&h).map_err(js_err)?;
            out.push(format!(
                "{}\n  => {}\n  expected: {}",
                t.current.text(&self.vocab),
                decoded.sentence.text(&self.vocab),
                t.next.text(&self.vocab),
            ));
        }
        Ok(out.join("\n"))
    }

    /// Encode the corpus with the current encoder and start an
    /// embedding-space GAN.
    pub fn init_gan(&mut self, objective: &str, minibatch: bool, seed: u32) -> Result<(), JsValue> {
        let embeddings = self
            .model
            .encode_all(&self.sentences, self.model.cfg.batch_size)
            .map_err(js_err)?;
        let cfg = GanConfig {
            noise_dim: 32,
            data_dim: self.model.embed_dim(),
            gen_layers: vec![128, 128],
            disc_layers: vec![128, 64],
            f_measure: parse_measure(objective)?,
            minibatch: minibatch.then(MinibatchShape::default),
            gp_lambda: 10.0,
            conditional: None,
            gen_updates: 2,
            disc_updates: 1,
            batch_size: 16,
            lr: 3e-4,
            rounds: 0,
            leaky_slope: 0.2,
            weight_clip: 0.01,
            clip_norm: 5.0,
            seed: seed as u64,
        };
        let gan = Gan::new(cfg);
        let trainer = GanTrainer::new(&gan);
        self.gan = Some((gan, trainer, embeddings));
        self.gan_losses = (f64::NAN, f64::NAN);
        Ok(())
    }

    pub fn gan_step(&mut self, rounds: u32) -> Result<(), JsValue> {
        let Some((gan, trainer, embeddings)) = self.gan.as_mut() else {
            return Err(js_err("call init_gan first"));
        };
        let data = TrainData { real: embeddings, conditions: None };
        for _ in 0..rounds {
            let record = trainer.step(gan, &data).map_err(js_err)?;
            self.gan_losses = (record.d_loss, record.g_loss);
        }
        Ok(())
    }

    pub fn gan_round(&self) -> u32 {
        self.gan.as_ref().map_or(0, |(_, t, _)| t.rounds_done() as u32)
    }

    pub fn gan_d_loss(&self) -> f64 {
        self.gan_losses.0
    }

    pub fn gan_g_loss(&self) -> f64 {
        self.gan_losses.1
    }

    /// Sample `n` vectors from the generator and greedy-decode them.
    pub fn sample(&self, n: u32, seed: u32) -> Result<String, JsValue> {
        let Some((gan, _, _)) = self.gan.as_ref() else {
            return Err(js_err("call init_gan first"));
        };
        let vectors = gan.sample_vectors(n as usize, None, seed as u64).map_err(js_err)?;
        let mut lines = Vec::with_capacity(vectors.len());
        for v in &vectors {
            let decoded = self.model.greedy_next(v).map_err(js_err)?;
            lines.push(decoded.sentence.text(&self.vocab));
        }
        Ok(lines.join("\n"))
    }
}

// ---------------------------------------------------------------------------
// metric explorer
// ---------------------------------------------------------------------------

/// Score hypothesis lines against reference lines (every hypothesis sees all
/// references). Returns "metric,value" CSV lines.
#[wasm_bindgen]
pub fn score_metrics(hyp_text: &str, ref_text: &str) -> Result<String, JsValue> {
    let hyp_lines: Vec<Vec<String>> = hyp_text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(corpus::tokenize)
        .collect();
    let ref_lines: Vec<Vec<String>> = ref_text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(corpus::tokenize)
        .collect();
    if hyp_lines.is_empty() || ref_lines.is_empty() {
        return Err(js_err("both panes need at least one sentence"));
    }
    let pairs: Vec<EvalPair> = hyp_lines
        .into_iter()
        .map(|h| EvalPair::new(h, ref_lines.clone()))
        .collect();
    let mut out = String::new();
    for n in 1..=4 {
        out.push_str(&format!("bleu{n},{:.4}\n", metrics::bleu_n(&pairs, n).map_err(js_err)?));
    }
    out.push_str(&format!(
        "rougeL,{:.4}\n",
        metrics::rouge(&pairs, metrics::RougeVariant::L).map_err(js_err)?
    ));
    out.push_str(&format!("meteor,{:.4}\n", metrics::meteor_lite(&pairs).map_err(js_err)?));
    Ok(out)
}
