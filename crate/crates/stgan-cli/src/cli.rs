//! Argument parsing and dispatch. Exit codes: 0 success, 1 validation error
//! (bad flags, bad inputs), 2 runtime failure.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use stgan::embed::EmbeddingKind;
use stgan::gan::{FMeasure, MinibatchShape};

use crate::config::{apply_file, DecodeMode, ExperimentConfig, Preset};
use crate::{pipeline, CliError, Result};

#[derive(Parser)]
#[command(
    name = "stgan",
    about = "Adversarial text generation over sentence embeddings, desk scale",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Default)]
pub struct Common {
    /// TOML experiment config; flags override file values
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Master seed; every stage derives from it (required: no wall-clock seeding)
    #[arg(long)]
    pub seed: Option<u64>,
    /// desk | paper-scale
    #[arg(long)]
    pub preset: Option<String>,
    /// Corpus file: one sentence per line, blank line between documents
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Word-vector text file ("token v1 .. vd"); omit for the seeded fallback table
    #[arg(long = "word-vectors")]
    pub word_vectors: Option<PathBuf>,
    /// Output directory for all artifacts
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// vanilla | lsgan | wgan | wgan-gp
    #[arg(long)]
    pub fmeasure: Option<String>,
    /// st | glove-avg | glove-ext
    #[arg(long)]
    pub embedding: Option<String>,
    /// Enable minibatch discrimination in the critic
    #[arg(long = "minibatch-disc")]
    pub minibatch_disc: Option<bool>,
    /// Sentence-model training epochs
    #[arg(long)]
    pub epochs: Option<usize>,
    /// GAN training rounds
    #[arg(long)]
    pub rounds: Option<usize>,
    /// Batch size for both trainers
    #[arg(long = "batch-size")]
    pub batch_size: Option<usize>,
    /// Comma-separated metric list (bleu1..bleu4, rougeL, rouge1, rouge2, meteor)
    #[arg(long, value_delimiter = ',')]
    pub metrics: Option<Vec<String>>,
}

#[derive(Subcommand)]
pub enum Command {
    /// Tokenize a corpus, build the vocabulary, write the 5/1/1 split
    Prepare(Common),
    /// Train the sentence encoder/decoder (or the composed-embedding decoder)
    TrainSt(Common),
    /// Encode the training split into the GAN's real-sample matrix
    Encode(Common),
    /// Adversarial training over the encoded vectors
    TrainGan(Common),
    /// Draw vectors from the generator and decode them to sentences
    Sample {
        #[command(flatten)]
        common: Common,
        /// Number of sentences to sample
        #[arg(long, default_value_t = 64)]
        n: usize,
        /// greedy | topk
        #[arg(long, default_value = "greedy")]
        decode: String,
    },
    /// Score a hypothesis file against a reference file
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// Hypothesis file, one sentence per line
        #[arg(long)]
        hyp: PathBuf,
        /// Reference file, one sentence per line (aligned with --hyp)
        #[arg(long = "ref")]
        reference: PathBuf,
        /// Give every hypothesis the whole reference file instead of line i
        #[arg(long = "pool-refs", default_value_t = false)]
        pool_refs: bool,
        /// Write the report CSV here as well as stdout
        #[arg(long = "report-csv")]
        report_csv: Option<PathBuf>,
    },
    /// Emit SVG charts from the written CSVs
    Report(Common),
    /// Run the whole pipeline, resuming from existing artifacts
    Run(Common),
    /// Write the bundled synthetic corpus to a file
    GenFixture {
        /// Destination path
        #[arg(long)]
        out: PathBuf,
        /// Minimum number of sentences
        #[arg(long, default_value_t = 200)]
        sentences: usize,
        /// Generator seed
        #[arg(long)]
        seed: u64,
    },
}

/// Build the experiment config: desk defaults, then the config file, then
/// flag overrides.
fn build_config(common: &Common, needs_seed: bool, needs_out: bool) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::preset(Preset::Desk, "out", 0);
    let mut seed_given = false;
    let mut out_given = false;
    if let Some(path) = &common.config {
        seed_given |= apply_file(&mut cfg, path)?;
        out_given = true; // the file may set out; its default still exists
    }
    if let Some(p) = &common.preset {
        let preset = Preset::parse(p)
            .ok_or_else(|| CliError::validation(format!("unknown preset {p:?}")))?;
        cfg.apply_preset(preset);
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
        seed_given = true;
    }
    if let Some(c) = &common.corpus {
        cfg.corpus = Some(c.clone());
    }
    if let Some(w) = &common.word_vectors {
        cfg.word_vectors = Some(w.clone());
    }
    if let Some(o) = &common.out {
        cfg.out = o.clone();
        out_given = true;
    }
    if needs_out && !out_given {
        return Err(CliError::validation("--out is required"));
    }
    if let Some(f) = &common.fmeasure {
        cfg.gan.f_measure = FMeasure::parse(f)
            .ok_or_else(|| CliError::validation(format!("unknown f-measure {f:?}")))?;
    }
    if let Some(e) = &common.embedding {
        cfg.embedding = EmbeddingKind::parse(e)
            .ok_or_else(|| CliError::validation(format!("unknown embedding {e:?}")))?;
    }
    if let Some(m) = common.minibatch_disc {
        cfg.gan.minibatch = m.then(MinibatchShape::default);
    }
    if let Some(e) = common.epochs {
        cfg.skipthought.epochs = e;
    }
    if let Some(r) = common.rounds {
        cfg.gan.rounds = r;
    }
    if let Some(b) = common.batch_size {
        cfg.skipthought.batch_size = b;
        cfg.gan.batch_size = b;
    }
    if let Some(m) = &common.metrics {
        cfg.metrics = m.clone();
    }
    if needs_seed && !seed_given {
        return Err(CliError::validation(
            "--seed is required (runs are never seeded from the clock)",
        ));
    }
    Ok(cfg)
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Prepare(common) => pipeline::prepare(&build_config(&common, true, true)?),
        Command::TrainSt(common) => pipeline::train_st(&build_config(&common, true, true)?),
        Command::Encode(common) => pipeline::encode(&build_config(&common, true, true)?),
        Command::TrainGan(common) => pipeline::train_gan(&build_config(&common, true, true)?),
        Command::Sample { common, n, decode } => {
            let mut cfg = build_config(&common, true, true)?;
            cfg.sample_count = n;
            cfg.decode = DecodeMode::parse(&decode)
                .ok_or_else(|| CliError::validation(format!("unknown decode mode {decode:?}")))?;
            pipeline::sample(&cfg)
        }
        Command::Evaluate { common, hyp, reference, pool_refs, report_csv } => {
            for path in [&hyp, &reference] {
                if !path.exists() {
                    return Err(CliError::validation(format!(
                        "file {} does not exist",
                        path.display()
                    )));
                }
            }
            let cfg = build_config(&common, false, false)?;
            let hyp_text = std::fs::read_to_string(&hyp)?;
            let ref_text = std::fs::read_to_string(&reference)?;
            let report = pipeline::evaluate_texts(
                &hyp_text,
                &ref_text,
                &cfg.metrics,
                pool_refs,
                "eval",
                hyp.file_stem().and_then(|s| s.to_str()).unwrap_or("hyp"),
            )?;
            print!("{}", report.to_csv());
            if let Some(path) = report_csv {
                std::fs::write(path, report.to_csv())?;
            }
            Ok(())
        }
        Command::Report(common) => pipeline::report_stage(&build_config(&common, false, true)?),
        Command::Run(common) => pipeline::run_pipeline(&build_config(&common, true, true)?),
        Command::GenFixture { out, sentences, seed } => {
            std::fs::write(&out, stgan::fixture::synthetic_corpus(sentences, seed))?;
            Ok(())
        }
    }
}

/// Parse argv and run; returns the process exit code. All diagnostics go to
/// stderr except `evaluate`'s CSV, which goes to stdout.
pub fn cmd_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders its own usage text; the artifact contract is
            // exit 1 for any argument problem (clap's default would be 2).
            let is_help = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            e.print().expect("stderr writable");
            return if is_help { 0 } else { 1 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
