//! The pipeline stages and their on-disk artifacts. Each stage reads only
//! files, so any stage can resume from the previous run's outputs; rerunning
//! a stage first removes everything downstream of it.

use std::path::{Path, PathBuf};

use stgan::corpus::{self, Corpus, TokenizedSentence, Vocabulary};
use stgan::embed::{self, EmbeddingKind, WordVectorTable};
use stgan::gan::{sample_and_decode, Gan, GanConfig, MinibatchShape, TrainData};
use stgan::logging;
use stgan::metrics::{self, EvalPair, MetricReport};
use stgan::skipthought::{CombineMode, CondDecoder, SkipThought, SkipThoughtConfig};

use crate::checkpoint::Checkpoint;
use crate::config::{DecodeMode, ExperimentConfig};
use crate::{report, CliError, Result};

// Per-stage seed tags.
const TAG_PREPARE: u64 = 1;
const TAG_TRAIN_ST: u64 = 2;
const TAG_TRAIN_GAN: u64 = 4;
const TAG_SAMPLE: u64 = 5;
const TAG_FALLBACK_WV: u64 = 7;

pub struct Paths {
    out: PathBuf,
}

impl Paths {
    pub fn new(out: &Path) -> Paths {
        Paths { out: out.to_path_buf() }
    }

    pub fn vocab(&self) -> PathBuf {
        self.out.join("vocab.tsv")
    }
    pub fn split(&self, name: &str) -> PathBuf {
        self.out.join(format!("{name}.txt"))
    }
    pub fn st_ckpt(&self) -> PathBuf {
        self.out.join("st.ckpt")
    }
    pub fn st_loss(&self) -> PathBuf {
        self.out.join("st_loss.csv")
    }
    pub fn embeddings(&self) -> PathBuf {
        self.out.join("embeddings.ckpt")
    }
    pub fn gan_ckpt(&self) -> PathBuf {
        self.out.join("gan.ckpt")
    }
    pub fn gan_history(&self) -> PathBuf {
        self.out.join("gan_history.csv")
    }
    pub fn samples_dir(&self) -> PathBuf {
        self.out.join("samples")
    }
    pub fn samples(&self) -> PathBuf {
        self.out.join("samples.txt")
    }
    pub fn report_csv(&self) -> PathBuf {
        self.out.join("report.csv")
    }
    pub fn report_svg(&self) -> PathBuf {
        self.out.join("report.svg")
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::runtime(format!("cannot read {}: {e}", path.display())))
}

fn load_vocab(paths: &Paths) -> Result<Vocabulary> {
    Ok(Vocabulary::from_tsv(&read(&paths.vocab())?)?)
}

fn load_split(paths: &Paths, vocab: &Vocabulary, name: &str, max_len: usize) -> Result<Corpus> {
    Ok(corpus::parse_corpus(&read(&paths.split(name))?, vocab, max_len))
}

/// The word-vector table for the composed embeddings: a user-supplied file,
/// or the deterministic fallback over the vocabulary.
fn word_table(cfg: &ExperimentConfig, vocab: &Vocabulary) -> Result<WordVectorTable> {
    match &cfg.word_vectors {
        Some(path) => Ok(WordVectorTable::parse(&read(path)?)?),
        None => {
            let tokens: Vec<String> =
                (0..vocab.size()).map(|i| vocab.token(i).to_string()).collect();
            Ok(WordVectorTable::random(
                &tokens,
                cfg.fallback_word_dim,
                cfg.stage_seed(TAG_FALLBACK_WV),
            ))
        }
    }
}

fn compose(kind: EmbeddingKind, tokens: &[String], table: &WordVectorTable) -> Vec<f64> {
    match kind {
        EmbeddingKind::GloveAverage => embed::compose_average(tokens, table).values,
        EmbeddingKind::GloveExtrema => embed::compose_extrema(tokens, table).values,
        EmbeddingKind::CombineSkip => unreachable!("combine-skip is not composed from a table"),
    }
}

// ---------------------------------------------------------------------------
// stages
// ---------------------------------------------------------------------------

/// Tokenize the corpus, build the vocabulary, and write the seeded 5/1/1
/// split as three corpus files.
pub fn prepare(cfg: &ExperimentConfig) -> Result<()> {
    let corpus_path = cfg
        .corpus
        .as_ref()
        .ok_or_else(|| CliError::validation("prepare needs --corpus"))?;
    if !corpus_path.exists() {
        return Err(CliError::validation(format!(
            "corpus file {} does not exist",
            corpus_path.display()
        )));
    }
    let text = read(corpus_path)?;
    let vocab = Vocabulary::build(text.lines(), cfg.min_freq, cfg.vocab_cap)?;
    let parsed = corpus::parse_corpus(&text, &vocab, cfg.max_sentence_len);
    if parsed.sentence_count() == 0 {
        return Err(CliError::validation("corpus contains no usable sentences"));
    }
    let mut rng = stgan::rng::Rng::new(cfg.stage_seed(TAG_PREPARE));
    let split = corpus::split_corpus(&parsed, &mut rng);

    let paths = Paths::new(&cfg.out);
    std::fs::create_dir_all(&cfg.out)?;
    std::fs::write(paths.vocab(), vocab.to_tsv())?;
    for (name, blocks) in
        [("train", &split.train), ("valid", &split.valid), ("test", &split.test)]
    {
        let mut out = String::new();
        for block in blocks {
            for s in block {
                out.push_str(&s.text(&vocab));
                out.push('\n');
            }
            out.push('\n');
        }
        std::fs::write(paths.split(name), out)?;
    }
    logging::info(format!(
        "prepared {} sentences ({} dropped as too long), vocabulary of {} entries",
        parsed.sentence_count(),
        parsed.dropped_too_long,
        vocab.size()
    ));
    Ok(())
}

fn split_triples(split: &Corpus) -> Vec<stgan::corpus::SentenceTriple> {
    split.triples()
}

/// Train the sentence model for the configured embedding: the full
/// encoder/decoder pair for combine-skip, or a conditional reconstruction
/// decoder over the composed word-vector embedding. Writes a checkpoint per
/// epoch and the "epoch,split,loss" curve.
pub fn train_st(cfg: &ExperimentConfig) -> Result<()> {
    let paths = Paths::new(&cfg.out);
    let vocab = load_vocab(&paths)?;
    let train = load_split(&paths, &vocab, "train", cfg.max_sentence_len)?;
    let valid = load_split(&paths, &vocab, "valid", cfg.max_sentence_len)?;
    let seed = cfg.stage_seed(TAG_TRAIN_ST);
    logging::debug(format!("train-st stage seed {seed}"));

    let mut loss_csv = String::from("epoch,split,loss\n");
    match cfg.embedding {
        EmbeddingKind::CombineSkip => {
            let train_triples = split_triples(&train);
            let valid_triples = split_triples(&valid);
            if train_triples.is_empty() {
                return Err(CliError::validation("training split yields no sentence triples"));
            }
            let mut model = SkipThought::new(vocab.size(), cfg.skipthought.clone(), seed);
            let ckpt_path = paths.st_ckpt();
            let outcome = model.train(
                &train_triples,
                Some(&valid_triples),
                seed ^ 0x5eed,
                |m, record| {
                    loss_csv.push_str(&format!(
                        "{},train,{:.6}\n",
                        record.epoch, record.train_loss
                    ));
                    if let Some(v) = record.valid_loss {
                        loss_csv.push_str(&format!("{},valid,{v:.6}\n", record.epoch));
                    }
                    if let Err(e) = save_skipthought(&ckpt_path, m) {
                        logging::warn(format!("checkpoint write failed: {e}"));
                    }
                    logging::info(format!(
                        "epoch {:>3}  train {:.4}  valid {}",
                        record.epoch,
                        record.train_loss,
                        record.valid_loss.map_or("-".to_string(), |v| format!("{v:.4}"))
                    ));
                },
            );
            std::fs::write(paths.st_loss(), &loss_csv)?;
            outcome.map_err(|e| CliError::runtime(format!("sentence-model training: {e}")))?;
        }
        kind => {
            let table = word_table(cfg, &vocab)?;
            let sentences: Vec<TokenizedSentence> =
                train.sentences().cloned().collect();
            if sentences.is_empty() {
                return Err(CliError::validation("training split is empty"));
            }
            let pairs: Vec<(Vec<f64>, TokenizedSentence)> = sentences
                .iter()
                .map(|s| (compose(kind, &s.decode(&vocab), &table), s.clone()))
                .collect();
            let mut model = CondDecoder::new(
                vocab.size(),
                table.dim(),
                cfg.skipthought.clone(),
                seed,
            );
            let ckpt_path = paths.st_ckpt();
            let outcome = model.train(&pairs, seed ^ 0x5eed, |m, record| {
                loss_csv.push_str(&format!("{},train,{:.6}\n", record.epoch, record.train_loss));
                if let Err(e) = save_cond_decoder(&ckpt_path, m, kind) {
                    logging::warn(format!("checkpoint write failed: {e}"));
                }
                logging::info(format!("epoch {:>3}  train {:.4}", record.epoch, record.train_loss));
            });
            std::fs::write(paths.st_loss(), &loss_csv)?;
            outcome.map_err(|e| CliError::runtime(format!("decoder training: {e}")))?;
        }
    }
    Ok(())
}

/// Encode the training split into the GAN's real-sample matrix (plus aligned
/// condition vectors when the GAN runs conditionally: the condition of a
/// sentence is the embedding of its predecessor).
pub fn encode(cfg: &ExperimentConfig) -> Result<()> {
    let paths = Paths::new(&cfg.out);
    let vocab = load_vocab(&paths)?;
    let train = load_split(&paths, &vocab, "train", cfg.max_sentence_len)?;
    let sentences: Vec<TokenizedSentence> = train.sentences().cloned().collect();
    if sentences.is_empty() {
        return Err(CliError::validation("training split is empty"));
    }

    let vectors: Vec<Vec<f64>> = match cfg.embedding {
        EmbeddingKind::CombineSkip => {
            let model = load_skipthought(&paths.st_ckpt())?;
            model.encode_all(&sentences, cfg.skipthought.batch_size)?
        }
        kind => {
            let table = word_table(cfg, &vocab)?;
            sentences.iter().map(|s| compose(kind, &s.decode(&vocab), &table)).collect()
        }
    };
    let dim = vectors[0].len();

    let mut ck = Checkpoint::new("embeddings");
    ck.set("embedding", cfg.embedding.name());
    ck.set("dim", dim);
    ck.set("count", vectors.len());
    let flat: Vec<f64> = vectors.iter().flatten().copied().collect();
    ck.tensors.push(("embeddings".into(), vec![vectors.len(), dim], flat));

    if cfg.gan.conditional {
        // Pair each in-document successor with its predecessor's embedding.
        let mut data_rows = Vec::new();
        let mut cond_rows = Vec::new();
        let mut offset = 0usize;
        for doc in &train.documents {
            for i in 1..doc.len() {
                data_rows.push(vectors[offset + i].clone());
                cond_rows.push(vectors[offset + i - 1].clone());
            }
            offset += doc.len();
        }
        if data_rows.is_empty() {
            return Err(CliError::validation("conditional mode needs multi-sentence documents"));
        }
        ck.set("conditional_count", data_rows.len());
        let flat_d: Vec<f64> = data_rows.iter().flatten().copied().collect();
        let flat_c: Vec<f64> = cond_rows.iter().flatten().copied().collect();
        ck.tensors.push(("conditional_data".into(), vec![data_rows.len(), dim], flat_d));
        ck.tensors.push(("conditions".into(), vec![cond_rows.len(), dim], flat_c));
    }
    ck.save(&paths.embeddings())?;
    logging::info(format!("encoded {} sentences into {dim}-dim vectors", vectors.len()));
    Ok(())
}

fn load_embedding_matrix(ck: &Checkpoint, name: &str) -> Result<Vec<Vec<f64>>> {
    let (shape, data) = ck.tensor(name)?;
    let (n, d) = (shape[0], shape[1]);
    Ok((0..n).map(|i| data[i * d..(i + 1) * d].to_vec()).collect())
}

/// Adversarial training over the encoded vectors; writes the round history
/// CSV, periodic decoded sample snapshots, and the GAN checkpoint.
pub fn train_gan(cfg: &ExperimentConfig) -> Result<()> {
    let paths = Paths::new(&cfg.out);
    let vocab = load_vocab(&paths)?;
    let emb = Checkpoint::load(&paths.embeddings())?;
    let decoder = SentenceDecoder::load(&paths.st_ckpt(), cfg)?;

    let (real, conditions): (Vec<Vec<f64>>, Option<Vec<Vec<f64>>>) = if cfg.gan.conditional {
        (
            load_embedding_matrix(&emb, "conditional_data")?,
            Some(load_embedding_matrix(&emb, "conditions")?),
        )
    } else {
        (load_embedding_matrix(&emb, "embeddings")?, None)
    };
    let dim = real[0].len();
    let gan_cfg = cfg.gan.materialize(
        dim,
        cfg.gan.conditional.then_some(dim),
        cfg.stage_seed(TAG_TRAIN_GAN),
    );
    let mut gan = Gan::new(gan_cfg);

    std::fs::create_dir_all(paths.samples_dir())?;
    let mut history_csv = String::from("round,d_loss,g_loss,grad_norm\n");
    let snapshot_every = (gan.cfg.rounds / 8).max(1);
    let snapshot_seed = cfg.stage_seed(TAG_TRAIN_GAN) ^ 0x51a9;
    let rounds = gan.cfg.rounds;
    let outcome = gan.train(
        TrainData { real: &real, conditions: conditions.as_deref() },
        |g, record| {
            history_csv.push_str(&format!(
                "{},{:.6},{:.6},{}\n",
                record.round,
                record.d_loss,
                record.g_loss,
                record.grad_norm.map_or(String::new(), |n| format!("{n:.6}"))
            ));
            if record.round % snapshot_every == 0 || record.round == rounds {
                let conds = conditions.as_ref().map(|c| pick_conditions(c, 8, snapshot_seed));
                if let Ok(texts) = decode_samples(
                    g,
                    &decoder,
                    &vocab,
                    8,
                    conds.as_deref(),
                    snapshot_seed,
                    DecodeMode::Greedy,
                    1.0,
                ) {
                    let path =
                        paths.samples_dir().join(format!("round_{:06}.txt", record.round));
                    let _ = std::fs::write(path, texts.join("\n") + "\n");
                }
            }
        },
    );
    std::fs::write(paths.gan_history(), &history_csv)?;
    let history =
        outcome.map_err(|e| CliError::runtime(format!("gan training: {e}")))?;
    save_gan(&paths.gan_ckpt(), &gan)?;
    if let Some(last) = history.last() {
        logging::info(format!(
            "gan finished after {} rounds (d_loss {:.4}, g_loss {:.4})",
            last.round, last.d_loss, last.g_loss
        ));
    }
    Ok(())
}

fn pick_conditions(pool: &[Vec<f64>], n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = stgan::rng::Rng::new(seed);
    (0..n).map(|_| pool[rng.below(pool.len())].clone()).collect()
}

/// Draw vectors from the trained generator and decode them to sentences.
pub fn sample(cfg: &ExperimentConfig) -> Result<()> {
    let paths = Paths::new(&cfg.out);
    let vocab = load_vocab(&paths)?;
    let gan = load_gan(&paths.gan_ckpt())?;
    let decoder = SentenceDecoder::load(&paths.st_ckpt(), cfg)?;
    let seed = cfg.stage_seed(TAG_SAMPLE);
    let conditions = if gan.cfg.conditional.is_some() {
        let emb = Checkpoint::load(&paths.embeddings())?;
        Some(pick_conditions(
            &load_embedding_matrix(&emb, "conditions")?,
            cfg.sample_count,
            seed ^ 0xc0,
        ))
    } else {
        None
    };
    let texts = decode_samples(
        &gan,
        &decoder,
        &vocab,
        cfg.sample_count,
        conditions.as_deref(),
        seed,
        cfg.decode,
        cfg.skipthought.temperature,
    )?;
    std::fs::write(paths.samples(), texts.join("\n") + "\n")?;
    logging::info(format!("wrote {} samples", cfg.sample_count));
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn decode_samples(
    gan: &Gan,
    decoder: &SentenceDecoder,
    vocab: &Vocabulary,
    n: usize,
    conditions: Option<&[Vec<f64>]>,
    seed: u64,
    mode: DecodeMode,
    temperature: f64,
) -> Result<Vec<String>> {
    let mut i = 0usize;
    let texts = sample_and_decode(gan, n, conditions, seed, |vector| {
        let decoded = match mode {
            DecodeMode::Greedy => decoder.greedy(vector),
            DecodeMode::TopK => {
                decoder.sample(vector, seed ^ (0x917 + i as u64), temperature)
            }
        };
        i += 1;
        decoded.map(|d| d.sentence.text(vocab))
    })?;
    texts.into_iter().collect()
}

/// Score the sampled sentences against the held-out test split. The samples
/// have no aligned references, so every hypothesis is paired with the whole
/// reference pool.
pub fn evaluate_pipeline(cfg: &ExperimentConfig) -> Result<()> {
    let paths = Paths::new(&cfg.out);
    let hyp_text = read(&paths.samples())?;
    let ref_text = read(&paths.split("test"))?;
    let report = evaluate_texts(
        &hyp_text,
        &ref_text,
        &cfg.metrics,
        true,
        cfg.gan.f_measure.name(),
        cfg.embedding.name(),
    )?;
    std::fs::write(paths.report_csv(), report.to_csv())?;
    Ok(())
}

/// Shared scoring path for the pipeline and the `evaluate` subcommand.
/// Aligned mode pairs line i with line i; pooled mode gives every hypothesis
/// the full reference list.
pub fn evaluate_texts(
    hyp_text: &str,
    ref_text: &str,
    metric_names: &[String],
    pool_refs: bool,
    model_label: &str,
    embedding_label: &str,
) -> Result<MetricReport> {
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
        return Err(CliError::validation("empty hypothesis or reference file"));
    }
    let pairs: Vec<EvalPair> = if pool_refs {
        hyp_lines
            .into_iter()
            .map(|h| EvalPair::new(h, ref_lines.clone()))
            .collect()
    } else {
        if hyp_lines.len() != ref_lines.len() {
            return Err(CliError::validation(format!(
                "aligned evaluation needs equal line counts ({} vs {}); pass --pool-refs to pool",
                hyp_lines.len(),
                ref_lines.len()
            )));
        }
        hyp_lines
            .into_iter()
            .zip(ref_lines)
            .map(|(h, r)| EvalPair::new(h, vec![r]))
            .collect()
    };

    let mut report = MetricReport::default();
    for name in metric_names {
        let value = compute_metric(name, &pairs)?;
        report.push(model_label, embedding_label, name, value)?;
    }
    Ok(report)
}

pub fn compute_metric(name: &str, pairs: &[EvalPair]) -> Result<f64> {
    let value = match name {
        "bleu1" => metrics::bleu_n(pairs, 1)?,
        "bleu2" => metrics::bleu_n(pairs, 2)?,
        "bleu3" => metrics::bleu_n(pairs, 3)?,
        "bleu4" => metrics::bleu_n(pairs, 4)?,
        "rougeL" | "rouge-l" => metrics::rouge(pairs, metrics::RougeVariant::L)?,
        "rouge1" => metrics::rouge(pairs, metrics::RougeVariant::N1)?,
        "rouge2" => metrics::rouge(pairs, metrics::RougeVariant::N2)?,
        "meteor" => metrics::meteor_lite(pairs)?,
        other => {
            return Err(CliError::validation(format!("unknown metric {other:?}")));
        }
    };
    Ok(value)
}

/// Emit the SVG charts from the written CSVs.
pub fn report_stage(cfg: &ExperimentConfig) -> Result<()> {
    let paths = Paths::new(&cfg.out);
    let report = report::parse_report_csv(&read(&paths.report_csv())?)?;
    if report.rows.is_empty() {
        return Err(CliError::validation("report.csv has no rows"));
    }
    let st_loss = std::fs::read_to_string(paths.st_loss()).ok();
    let gan_history = std::fs::read_to_string(paths.gan_history()).ok();
    report::write_report_charts(&cfg.out, &report, st_loss.as_deref(), gan_history.as_deref())?;
    Ok(())
}

// ---------------------------------------------------------------------------
// full pipeline with resume
// ---------------------------------------------------------------------------

type Stage = (&'static str, fn(&ExperimentConfig) -> Result<()>);

/// Stage order with each stage's marker artifacts (relative to the out dir).
fn stage_table() -> Vec<(Stage, Vec<&'static str>)> {
    vec![
        (("prepare", prepare as fn(&ExperimentConfig) -> Result<()>),
         vec!["vocab.tsv", "train.txt", "valid.txt", "test.txt"]),
        (("train-st", train_st), vec!["st.ckpt", "st_loss.csv"]),
        (("encode", encode), vec!["embeddings.ckpt"]),
        (("train-gan", train_gan), vec!["gan.ckpt", "gan_history.csv"]),
        (("sample", sample), vec!["samples.txt"]),
        (("evaluate", evaluate_pipeline), vec!["report.csv"]),
        (("report", report_stage), vec!["report.svg"]),
    ]
}

/// Run prepare -> train-st -> encode -> train-gan -> sample -> evaluate ->
/// report. A stage whose outputs all exist is skipped; a stage that runs
/// first deletes every downstream artifact so later stages rerun against the
/// fresh inputs. A failure halts with the stage name; earlier artifacts stay.
pub fn run_pipeline(cfg: &ExperimentConfig) -> Result<()> {
    std::fs::create_dir_all(&cfg.out)?;
    let table = stage_table();
    let mut must_run_rest = false;
    for (i, ((name, func), markers)) in table.iter().enumerate() {
        let complete = markers.iter().all(|m| cfg.out.join(m).exists());
        if complete && !must_run_rest {
            logging::info(format!("stage {name}: outputs present, skipping"));
            continue;
        }
        // Invalidate everything downstream before this stage runs.
        for ((_, _), later) in table.iter().skip(i + 1) {
            for m in later {
                let _ = std::fs::remove_file(cfg.out.join(m));
            }
        }
        must_run_rest = true;
        logging::info(format!("stage {name}: running"));
        func(cfg).map_err(|e| match e {
            CliError::Validation(msg) => CliError::Validation(format!("stage {name}: {msg}")),
            CliError::Runtime(msg) => CliError::Runtime(format!("stage {name}: {msg}")),
        })?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// model checkpoints
// ---------------------------------------------------------------------------

pub fn save_skipthought(path: &Path, model: &SkipThought) -> Result<()> {
    let mut ck = Checkpoint::new("skipthought");
    let c = &model.cfg;
    ck.set("vocab_size", model.vocab_size)
        .set("word_dim", c.word_dim)
        .set("hidden_enc", c.hidden_enc)
        .set("hidden_dec", c.hidden_dec)
        .set("combine", c.combine.name())
        .set("max_decode_len", c.max_decode_len)
        .set("beam_width", c.beam_width)
        .set("temperature", c.temperature)
        .set("epochs", c.epochs)
        .set("lr", c.lr)
        .set("batch_size", c.batch_size)
        .set("clip_norm", c.clip_norm);
    ck.push_store("", &model.store);
    ck.save(path)
}

pub fn load_skipthought(path: &Path) -> Result<SkipThought> {
    let ck = Checkpoint::load(path)?;
    if ck.kind != "skipthought" {
        return Err(CliError::runtime(format!(
            "{} is a {:?} checkpoint, expected skipthought",
            path.display(),
            ck.kind
        )));
    }
    let cfg = skipthought_config_from(&ck)?;
    let vocab_size: usize = ck.require_parsed("vocab_size")?;
    let mut model = SkipThought::new(vocab_size, cfg, 0);
    ck.restore_store("", &mut model.store)?;
    Ok(model)
}

fn skipthought_config_from(ck: &Checkpoint) -> Result<SkipThoughtConfig> {
    Ok(SkipThoughtConfig {
        word_dim: ck.require_parsed("word_dim")?,
        hidden_enc: ck.require_parsed("hidden_enc")?,
        hidden_dec: ck.require_parsed("hidden_dec")?,
        combine: CombineMode::parse(ck.require("combine")?)
            .ok_or_else(|| CliError::runtime("bad combine mode in checkpoint"))?,
        max_decode_len: ck.require_parsed("max_decode_len")?,
        beam_width: ck.require_parsed("beam_width")?,
        temperature: ck.require_parsed("temperature")?,
        epochs: ck.require_parsed("epochs")?,
        lr: ck.require_parsed("lr")?,
        batch_size: ck.require_parsed("batch_size")?,
        clip_norm: ck.require_parsed("clip_norm")?,
    })
}

pub fn save_cond_decoder(path: &Path, model: &CondDecoder, kind: EmbeddingKind) -> Result<()> {
    let mut ck = Checkpoint::new("cond-decoder");
    let c = &model.cfg;
    ck.set("vocab_size", model.vocab_size)
        .set("cond_dim", model.cond_dim)
        .set("embedding", kind.name())
        .set("word_dim", c.word_dim)
        .set("hidden_enc", c.hidden_enc)
        .set("hidden_dec", c.hidden_dec)
        .set("combine", c.combine.name())
        .set("max_decode_len", c.max_decode_len)
        .set("beam_width", c.beam_width)
        .set("temperature", c.temperature)
        .set("epochs", c.epochs)
        .set("lr", c.lr)
        .set("batch_size", c.batch_size)
        .set("clip_norm", c.clip_norm);
    ck.push_store("", &model.store);
    ck.save(path)
}

pub fn load_cond_decoder(path: &Path) -> Result<CondDecoder> {
    let ck = Checkpoint::load(path)?;
    if ck.kind != "cond-decoder" {
        return Err(CliError::runtime(format!(
            "{} is a {:?} checkpoint, expected cond-decoder",
            path.display(),
            ck.kind
        )));
    }
    let cfg = skipthought_config_from(&ck)?;
    let vocab_size: usize = ck.require_parsed("vocab_size")?;
    let cond_dim: usize = ck.require_parsed("cond_dim")?;
    let mut model = CondDecoder::new(vocab_size, cond_dim, cfg, 0);
    ck.restore_store("", &mut model.store)?;
    Ok(model)
}

pub fn save_gan(path: &Path, gan: &Gan) -> Result<()> {
    let mut ck = Checkpoint::new("gan");
    let c = &gan.cfg;
    let csv = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
    ck.set("noise_dim", c.noise_dim)
        .set("data_dim", c.data_dim)
        .set("gen_layers", csv(&c.gen_layers))
        .set("disc_layers", csv(&c.disc_layers))
        .set("f_measure", c.f_measure.name())
        .set(
            "minibatch",
            c.minibatch.map_or("none".to_string(), |m| format!("{}x{}", m.kernels, m.kernel_dim)),
        )
        .set("gp_lambda", c.gp_lambda)
        .set("conditional", c.conditional.map_or("none".to_string(), |d| d.to_string()))
        .set("gen_updates", c.gen_updates)
        .set("disc_updates", c.disc_updates)
        .set("batch_size", c.batch_size)
        .set("lr", c.lr)
        .set("rounds", c.rounds)
        .set("leaky_slope", c.leaky_slope)
        .set("weight_clip", c.weight_clip)
        .set("clip_norm", c.clip_norm)
        .set("seed", c.seed);
    ck.push_store("gen.", &gan.gen);
    ck.push_store("disc.", &gan.disc);
    ck.save(path)
}

pub fn load_gan(path: &Path) -> Result<Gan> {
    let ck = Checkpoint::load(path)?;
    if ck.kind != "gan" {
        return Err(CliError::runtime(format!(
            "{} is a {:?} checkpoint, expected gan",
            path.display(),
            ck.kind
        )));
    }
    let parse_csv = |s: &str| -> Result<Vec<usize>> {
        if s.is_empty() {
            return Ok(vec![]);
        }
        s.split(',')
            .map(|x| x.parse().map_err(|_| CliError::runtime("bad layer list")))
            .collect()
    };
    let minibatch = match ck.require("minibatch")? {
        "none" => None,
        spec => {
            let (k, d) = spec
                .split_once('x')
                .ok_or_else(|| CliError::runtime("bad minibatch spec"))?;
            Some(MinibatchShape {
                kernels: k.parse().map_err(|_| CliError::runtime("bad minibatch spec"))?,
                kernel_dim: d.parse().map_err(|_| CliError::runtime("bad minibatch spec"))?,
            })
        }
    };
    let conditional = match ck.require("conditional")? {
        "none" => None,
        d => Some(d.parse().map_err(|_| CliError::runtime("bad conditional dim"))?),
    };
    let cfg = GanConfig {
        noise_dim: ck.require_parsed("noise_dim")?,
        data_dim: ck.require_parsed("data_dim")?,
        gen_layers: parse_csv(ck.require("gen_layers")?)?,
        disc_layers: parse_csv(ck.require("disc_layers")?)?,
        f_measure: stgan::gan::FMeasure::parse(ck.require("f_measure")?)
            .ok_or_else(|| CliError::runtime("bad f_measure"))?,
        minibatch,
        gp_lambda: ck.require_parsed("gp_lambda")?,
        conditional,
        gen_updates: ck.require_parsed("gen_updates")?,
        disc_updates: ck.require_parsed("disc_updates")?,
        batch_size: ck.require_parsed("batch_size")?,
        lr: ck.require_parsed("lr")?,
        rounds: ck.require_parsed("rounds")?,
        leaky_slope: ck.require_parsed("leaky_slope")?,
        weight_clip: ck.require_parsed("weight_clip")?,
        clip_norm: ck.require_parsed("clip_norm")?,
        seed: ck.require_parsed("seed")?,
    };
    let mut gan = Gan::new(cfg);
    ck.restore_store("gen.", &mut gan.gen)?;
    ck.restore_store("disc.", &mut gan.disc)?;
    Ok(gan)
}

/// Either sentence decoder behind one face: the skip-thought next-sentence
/// decoder or the conditional reconstruction decoder.
pub enum SentenceDecoder {
    SkipThought(Box<SkipThought>),
    Cond(Box<CondDecoder>),
}

impl SentenceDecoder {
    pub fn load(path: &Path, cfg: &ExperimentConfig) -> Result<SentenceDecoder> {
        match cfg.embedding {
            EmbeddingKind::CombineSkip => {
                Ok(SentenceDecoder::SkipThought(Box::new(load_skipthought(path)?)))
            }
            _ => Ok(SentenceDecoder::Cond(Box::new(load_cond_decoder(path)?))),
        }
    }

    pub fn greedy(&self, vector: &[f64]) -> Result<stgan::skipthought::Decoded> {
        match self {
            SentenceDecoder::SkipThought(m) => Ok(m.greedy_next(vector)?),
            SentenceDecoder::Cond(m) => Ok(m.greedy(vector)?),
        }
    }

    pub fn sample(&self, vector: &[f64], seed: u64, temperature: f64) -> Result<stgan::skipthought::Decoded> {
        match self {
            SentenceDecoder::SkipThought(m) => {
                Ok(m.sample_next(vector, m.cfg.beam_width, temperature, seed)?)
            }
            SentenceDecoder::Cond(m) => Ok(m.sample(vector, m.cfg.beam_width, temperature, seed)?),
        }
    }
}
