//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its measured numbers (run with `--nocapture` to see them).
//!
//!   cargo test -p stgan-cli --test acceptance -- --nocapture

mod oracles;

use std::path::PathBuf;
use std::time::Instant;

use stgan::corpus::{self, SentenceTriple, TokenizedSentence, Vocabulary};
use stgan::fixture;
use stgan::gan::{
    gradient_penalty, loss_lsgan, loss_vanilla, loss_wgan, minibatch_features, mode_coverage,
    FMeasure, Gan, GanConfig, MinibatchShape, TrainData,
};
use stgan::metrics::{weighted_human_scores, ActualLabel, EvalPair};
use stgan::rng::Rng;
use stgan::skipthought::{CombineMode, SkipThought, SkipThoughtConfig};
use stgan::tensor::{finite_difference_check, Graph, ParamStore, Tensor};
use stgan_cli::config::{ExperimentConfig, Preset};
use stgan_cli::pipeline;

fn pass(criterion: usize, name: &str, detail: String, started: Instant) {
    println!(
        "ACCEPTANCE {criterion} {name}: PASS ({detail}, {:.1}s)",
        started.elapsed().as_secs_f64()
    );
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("stgan_accept_{tag}_{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).expect("temp dir");
    dir
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values[values.len() / 2]
}

fn clone_store(store: &ParamStore) -> ParamStore {
    let mut out = ParamStore::new();
    for id in store.ids() {
        out.add(store.name(id), store.shape(id), store.value(id).to_vec());
    }
    out
}

// ---------------------------------------------------------------------------
// criterion 1: gradient correctness
// ---------------------------------------------------------------------------

/// Every op in the catalog plus the composite GRU cell, the skip-thought
/// objective, and all four adversarial objectives (including the
/// gradient-penalty double-backward) agree with central finite differences
/// (h = 1e-5) within 1e-4 relative error on 10 seeded instances each.
#[test]
fn c1_gradient_correctness() {
    let started = Instant::now();
    let tol = 1e-4;
    let mut worst: f64 = 0.0;
    let mut checked = 0usize;

    type LossBuilder = fn(&Graph, &Tensor, &Tensor) -> stgan::tensor::Result<Tensor>;
    let ops: Vec<(&str, LossBuilder)> = vec![
        ("add", |_, a, b| a.add(b)?.mul(a)?.mean_all().mul(&a.graph().scalar(1.0))),
        ("sub", |_, a, b| a.sub(b)?.mul(b)?.mean_all().mul(&a.graph().scalar(1.0))),
        ("mul", |_, a, b| a.mul(b)?.mean_all().mul(&a.graph().scalar(1.0))),
        ("neg_scale_addconst", |_, a, _| {
            Ok(a.neg().scale(1.7).add_const(0.3).mul(a)?.sum_all())
        }),
        ("matmul", |_, a, b| a.matmul(&b.t())?.mean_all().mul(&a.graph().scalar(1.0))),
        ("transpose", |_, a, _| a.t().mul(&a.t())?.sum_all().scale(0.5).mul(&a.graph().scalar(1.0))),
        ("sigmoid", |_, a, _| Ok(a.sigmoid().mul(a)?.sum_all())),
        ("tanh", |_, a, _| Ok(a.tanh().mul(a)?.sum_all())),
        ("exp", |_, a, _| Ok(a.exp().mean_all())),
        ("log", |_, a, _| Ok(a.mul(a)?.add_const(0.2).log().sum_all())),
        ("sqrt", |_, a, _| Ok(a.mul(a)?.add_const(0.1).sqrt().sum_all())),
        ("abs", |_, a, _| Ok(a.abs().mul(a)?.mul(a)?.sum_all())),
        ("leaky_relu", |_, a, _| Ok(a.leaky_relu(0.2).mul(a)?.sum_all())),
        ("softmax", |_, a, b| a.softmax().mul(&b.softmax())?.sum_all().log().mul(&a.graph().scalar(1.0))),
        ("reductions", |_, a, b| {
            a.sum_axis0()?.mul(&b.sum_axis0()?)?.sum_all().add(&a.sum_axis1()?.mean_all())
        }),
        ("broadcasts", |g, a, _| {
            let v = a.slice_rows(0, 1)?.reshape(&[a.shape()[1]])?;
            let spread = v.bcast_rows(3)?.mul(&v.bcast_rows(3)?)?.sum_all();
            let scalar = a.mean_all().bcast_to(&[2, 2])?.sum_all();
            spread.add(&scalar)?.mul(&g.scalar(1.0))
        }),
        ("concat_slice_pad", |_, a, b| {
            let cat = Tensor::concat_cols(&[a, b])?;
            let left = cat.slice_cols(0, 2)?;
            let padded = left.pad_rows(5, 1)?;
            padded.mul(&padded)?.sum_all().mul(&a.graph().scalar(1.0))
        }),
        ("reshape_pick_scatter", |_, a, _| {
            let flat = a.reshape(&[a.data().len()])?;
            let wide = flat.reshape(&[1, a.data().len()])?;
            let picked = wide.pick_cols(&std::rc::Rc::new(vec![2]))?;
            let spread = picked.scatter_cols(&std::rc::Rc::new(vec![1]), 4)?;
            spread.sum_all().add(&flat.mul(&flat)?.sum_all())
        }),
        ("norms", |_, a, _| a.l1_norm().add(&a.l2_norm()?)?.add(&a.row_l2_norms()?.sum_all())),
    ];

    for (name, build) in &ops {
        for seed in 0..10u64 {
            let mut rng = Rng::new(1000 + seed);
            let mut store = ParamStore::new();
            let mut a_data = vec![0.0; 12];
            let mut b_data = vec![0.0; 12];
            rng.fill_normal(&mut a_data, 0.3, 0.9);
            rng.fill_normal(&mut b_data, -0.2, 0.8);
            let a_id = store.add("a", &[3, 4], a_data);
            let b_id = store.add("b", &[3, 4], b_data);
            let report = finite_difference_check(
                &mut store,
                |g, s| {
                    let a = g.param(s, a_id);
                    let b = g.param(s, b_id);
                    build(g, &a, &b)
                },
                1e-5,
                usize::MAX,
                &mut rng,
            )
            .unwrap_or_else(|e| panic!("{name}: {e}"));
            checked += report.elements_checked;
            assert!(report.max_rel_err < tol, "{name} seed {seed}: {report:?}");
            worst = worst.max(report.max_rel_err);
        }
    }

    // Embedding lookup (integer-indexed, checked separately over the table).
    for seed in 0..10u64 {
        let mut rng = Rng::new(2000 + seed);
        let mut store = ParamStore::new();
        let table = store.add_dense("table", &[6, 3], 3, &mut rng);
        let ids = vec![1usize, 4, 1, 5];
        let report = finite_difference_check(
            &mut store,
            |g, s| {
                let t = g.param(s, table);
                let rows = t.embed_lookup(&ids)?;
                rows.mul(&rows)?.sum_all().mul(&g.scalar(1.0))
            },
            1e-5,
            usize::MAX,
            &mut rng,
        )
        .unwrap();
        checked += report.elements_checked;
        assert!(report.max_rel_err < tol, "embed seed {seed}: {report:?}");
        worst = worst.max(report.max_rel_err);
    }

    // Composite: a 3-step GRU-cell chain.
    for seed in 0..10u64 {
        let mut rng = Rng::new(3000 + seed);
        let mut store = ParamStore::new();
        let w_names = ["w_r", "u_r", "w_z", "u_z", "w", "u"];
        for n in w_names {
            let shape = if n.starts_with('u') { [4, 4] } else { [4, 3] };
            store.add_recurrent(n, &shape, &mut rng);
        }
        let mut xs = vec![0.0; 9];
        rng.fill_normal(&mut xs, 0.0, 1.0);
        let report = finite_difference_check(
            &mut store,
            |g, s| {
                let bind = |name: &str| g.param(s, s.id(name).unwrap()).t();
                let gru = TestGru {
                    w_r_t: bind("w_r"),
                    u_r_t: bind("u_r"),
                    w_z_t: bind("w_z"),
                    u_z_t: bind("u_z"),
                    w_t: bind("w"),
                    u_t: bind("u"),
                };
                let mut h = g.zeros(&[1, 4]);
                for t in 0..3 {
                    let x = g.constant(&[1, 3], xs[t * 3..(t + 1) * 3].to_vec())?;
                    h = gru_step(&x, &h, &gru)?;
                }
                h.mul(&h)?.sum_all().mul(&g.scalar(1.0))
            },
            1e-5,
            usize::MAX,
            &mut rng,
        )
        .unwrap();
        checked += report.elements_checked;
        assert!(report.max_rel_err < tol, "gru chain seed {seed}: {report:?}");
        worst = worst.max(report.max_rel_err);
    }

    // Composite: the skip-thought objective on a tiny model.
    for seed in 0..10u64 {
        let mut cfg = SkipThoughtConfig::desk();
        cfg.word_dim = 3;
        cfg.hidden_enc = 4;
        cfg.hidden_dec = 5;
        let template = SkipThought::new(7, cfg, 4000 + seed);
        let triple = SentenceTriple {
            prev: sent(&[4, 5]),
            current: sent(&[6, 4]),
            next: sent(&[5]),
        };
        let mut store = clone_store(&template.store);
        let mut rng = Rng::new(4100 + seed);
        let report = finite_difference_check(
            &mut store,
            |g, s| {
                let probe = rebind_skipthought(&template, s);
                match probe.st_loss_batch(g, std::slice::from_ref(&triple), true) {
                    Ok(t) => Ok(t),
                    Err(stgan::skipthought::StError::Tensor(e)) => Err(e),
                    Err(other) => panic!("{other}"),
                }
            },
            1e-5,
            30,
            &mut rng,
        )
        .unwrap();
        checked += report.elements_checked;
        assert!(report.max_rel_err < tol, "st_loss seed {seed}: {report:?}");
        worst = worst.max(report.max_rel_err);
    }

    // Composite: all four adversarial objectives on a small critic, the
    // penalty exercising the double-backward path.
    for seed in 0..10u64 {
        let mut cfg = tiny_gan_config(3, seed);
        cfg.disc_layers = vec![5];
        let template = Gan::new(cfg.clone());
        let mut rng = Rng::new(5000 + seed);
        let mut real = vec![vec![0.0; 3]; 2];
        let mut fake = vec![vec![0.0; 3]; 2];
        for row in real.iter_mut().chain(fake.iter_mut()) {
            rng.fill_normal(row, 0.0, 1.0);
        }
        for measure in [FMeasure::Vanilla, FMeasure::LsGan, FMeasure::WGan, FMeasure::WGanGp] {
            let mut store = clone_store(&template.disc);
            let report = finite_difference_check(
                &mut store,
                |g, s| {
                    let mut probe = Gan::new(cfg.clone());
                    for (dst, src) in
                        probe.disc.ids().collect::<Vec<_>>().into_iter().zip(s.ids())
                    {
                        probe.disc.set_value(dst, s.value(src).to_vec()).unwrap();
                    }
                    let to_tensor = |rows: &[Vec<f64>]| {
                        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
                        g.constant(&[rows.len(), 3], flat)
                    };
                    let s_real =
                        probe.discriminator_forward(g, &to_tensor(&real)?, None, true).unwrap();
                    let s_fake =
                        probe.discriminator_forward(g, &to_tensor(&fake)?, None, true).unwrap();
                    let (mut d_loss, _) = match measure {
                        FMeasure::Vanilla => loss_vanilla(&s_real, &s_fake).unwrap(),
                        FMeasure::LsGan => loss_lsgan(&s_real, &s_fake).unwrap(),
                        FMeasure::WGan | FMeasure::WGanGp => loss_wgan(&s_real, &s_fake).unwrap(),
                    };
                    if measure == FMeasure::WGanGp {
                        let (penalty, _) = gradient_penalty(
                            &probe,
                            g,
                            &real,
                            &fake,
                            None,
                            10.0,
                            &mut Rng::new(77),
                        )
                        .unwrap();
                        d_loss = d_loss.add(&penalty)?;
                    }
                    Ok(d_loss)
                },
                1e-5,
                usize::MAX,
                &mut rng,
            )
            .unwrap();
            checked += report.elements_checked;
            assert!(
                report.max_rel_err < tol,
                "{} seed {seed}: {report:?}",
                measure.name()
            );
            worst = worst.max(report.max_rel_err);
        }
    }

    assert!(started.elapsed().as_secs() < 30, "criterion 1 exceeded 30 s");
    pass(1, "gradient-correctness", format!("{checked} elements, max rel err {worst:.2e}"), started);
}

struct TestGru {
    w_r_t: Tensor,
    u_r_t: Tensor,
    w_z_t: Tensor,
    u_z_t: Tensor,
    w_t: Tensor,
    u_t: Tensor,
}

fn gru_step(x: &Tensor, h: &Tensor, p: &TestGru) -> stgan::tensor::Result<Tensor> {
    let r = x.matmul(&p.w_r_t)?.add(&h.matmul(&p.u_r_t)?)?.sigmoid();
    let z = x.matmul(&p.w_z_t)?.add(&h.matmul(&p.u_z_t)?)?.sigmoid();
    let cand = x.matmul(&p.w_t)?.add(&r.mul(h)?.matmul(&p.u_t)?)?.tanh();
    z.neg().add_const(1.0).mul(h)?.add(&z.mul(&cand)?)
}

fn sent(body: &[usize]) -> TokenizedSentence {
    let mut ids = vec![corpus::BOS];
    ids.extend_from_slice(body);
    ids.push(corpus::EOS);
    TokenizedSentence::new(ids, 0)
}

fn rebind_skipthought(template: &SkipThought, store: &ParamStore) -> SkipThought {
    let mut model = SkipThought::new(template.vocab_size, template.cfg.clone(), 0);
    for (dst, src) in model.store.ids().collect::<Vec<_>>().into_iter().zip(store.ids()) {
        model.store.set_value(dst, store.value(src).to_vec()).unwrap();
    }
    model
}

fn tiny_gan_config(data_dim: usize, seed: u64) -> GanConfig {
    GanConfig {
        noise_dim: 3,
        data_dim,
        gen_layers: vec![6],
        disc_layers: vec![6],
        f_measure: FMeasure::Vanilla,
        minibatch: None,
        gp_lambda: 10.0,
        conditional: None,
        gen_updates: 2,
        disc_updates: 1,
        batch_size: 4,
        lr: 1e-3,
        rounds: 3,
        leaky_slope: 0.2,
        weight_clip: 0.01,
        clip_norm: 5.0,
        seed,
    }
}

// ---------------------------------------------------------------------------
// criterion 2: metric oracle equivalence
// ---------------------------------------------------------------------------

/// BLEU-1..4, ROUGE-L and the resource-free METEOR agree with independent
/// brute-force oracles to 1e-9 on 50 seeded random pairs plus the hand-worked
/// examples.
#[test]
fn c2_metric_oracle_equivalence() {
    let started = Instant::now();
    let vocab: Vec<String> =
        ["the", "cat", "sat", "dog", "ran", "a", "walks", "walked", "walking", "bird", "flew"]
            .iter()
            .map(|s| s.to_string())
            .collect();
    let mut rng = Rng::new(71);
    let mut pairs = Vec::new();
    for _ in 0..50 {
        let sample = |rng: &mut Rng| -> Vec<String> {
            let len = 1 + rng.below(10);
            (0..len).map(|_| vocab[rng.below(vocab.len())].clone()).collect()
        };
        let n_refs = 1 + rng.below(3);
        let hyp = sample(&mut rng);
        let refs: Vec<Vec<String>> = (0..n_refs).map(|_| sample(&mut rng)).collect();
        pairs.push(EvalPair::new(hyp, refs));
    }

    let mut max_diff: f64 = 0.0;
    for n in 1..=4 {
        let ours = stgan::metrics::bleu_n(&pairs, n).unwrap();
        let oracle = oracles::bleu_oracle(&pairs, n);
        max_diff = max_diff.max((ours - oracle).abs());
        assert!((ours - oracle).abs() < 1e-9, "bleu-{n}: {ours} vs {oracle}");
    }
    let ours = stgan::metrics::rouge(&pairs, stgan::metrics::RougeVariant::L).unwrap();
    let oracle = oracles::rouge_l_oracle(&pairs);
    max_diff = max_diff.max((ours - oracle).abs());
    assert!((ours - oracle).abs() < 1e-9, "rouge-l: {ours} vs {oracle}");

    let ours = stgan::metrics::meteor_lite(&pairs).unwrap();
    let oracle = oracles::meteor_oracle(&pairs);
    max_diff = max_diff.max((ours - oracle).abs());
    assert!((ours - oracle).abs() < 1e-9, "meteor: {ours} vs {oracle}");

    // Hand-worked examples.
    let toks = |s: &str| s.split_whitespace().map(|t| t.to_string()).collect::<Vec<_>>();
    let single =
        vec![EvalPair::new(toks("the the the cat"), vec![toks("the cat sat")])];
    assert!((stgan::metrics::bleu_n(&single, 1).unwrap() - 0.5).abs() < 1e-12);
    let rouge_pair = vec![EvalPair::new(toks("a b c"), vec![toks("a c d")])];
    assert!(
        (stgan::metrics::rouge(&rouge_pair, stgan::metrics::RougeVariant::L).unwrap()
            - 2.0 / 3.0)
            .abs()
            < 1e-12
    );
    let meteor_pair = vec![EvalPair::new(toks("a b"), vec![toks("a b")])];
    assert!((stgan::metrics::meteor_lite(&meteor_pair).unwrap() - 0.9375).abs() < 1e-12);

    assert!(started.elapsed().as_secs() < 5, "criterion 2 exceeded 5 s");
    pass(2, "metric-oracle-equivalence", format!("max |diff| {max_diff:.2e} over 50 pairs"), started);
}

// ---------------------------------------------------------------------------
// criterion 3: skip-thought learnability
// ---------------------------------------------------------------------------

/// On the bundled synthetic corpus, 20 desk-preset epochs halve the mean
/// training loss and greedy reconstruction exactly matches at least 60% of
/// training sentences of length <= 6, median over 3 seeds.
#[test]
fn c3_skipthought_learnability() {
    let started = Instant::now();
    let text = fixture::bundled_corpus();
    let vocab = Vocabulary::build(text.lines(), 1, 10_000).unwrap();
    let parsed = corpus::parse_corpus(&text, &vocab, 30);
    let triples = parsed.triples();
    assert!(triples.len() > 100, "bundled corpus too small: {} triples", triples.len());

    let mut ratios = Vec::new();
    let mut rates = Vec::new();
    for seed in [11u64, 22, 33] {
        let cfg = SkipThoughtConfig::desk();
        assert_eq!(cfg.epochs, 20);
        let mut model = SkipThought::new(vocab.size(), cfg, seed);
        let curve = model.train(&triples, None, seed ^ 0xaaaa, |_, _| {}).unwrap();
        let ratio = curve.last().unwrap().train_loss / curve[0].train_loss;
        let rate = model.reconstruction_rate(&triples, 6).unwrap();
        println!("  seed {seed}: loss {:.3} -> {:.3} (ratio {ratio:.3}), reconstruction {rate:.3}",
            curve[0].train_loss, curve.last().unwrap().train_loss);
        ratios.push(ratio);
        rates.push(rate);
    }
    let med_ratio = median(&mut ratios);
    let med_rate = median(&mut rates);
    assert!(med_ratio <= 0.5, "median loss ratio {med_ratio} above 0.5");
    assert!(med_rate >= 0.6, "median reconstruction {med_rate} below 0.6");
    assert!(started.elapsed().as_secs() < 300, "criterion 3 exceeded 5 min");
    pass(3, "skipthought-learnability", format!("median loss ratio {med_ratio:.3}, median reconstruction {med_rate:.2}"), started);
}

// ---------------------------------------------------------------------------
// criterion 4: mode-collapse reproduction
// ---------------------------------------------------------------------------

fn gauss_gan_config(minibatch: bool, seed: u64) -> GanConfig {
    GanConfig {
        noise_dim: 8,
        data_dim: 2,
        gen_layers: vec![64, 64],
        disc_layers: vec![64, 32],
        f_measure: FMeasure::Vanilla,
        minibatch: minibatch.then(MinibatchShape::default),
        gp_lambda: 10.0,
        conditional: None,
        gen_updates: 2,
        disc_updates: 1,
        batch_size: 16,
        lr: 3e-3,
        rounds: 3000,
        leaky_slope: 0.2,
        weight_clip: 0.01,
        clip_norm: 5.0,
        seed,
    }
}

const GAUSS_STD: f64 = 0.1;

fn run_gauss(cfg: GanConfig, data_seed: u64) -> usize {
    let (samples, centers) = fixture::eight_gaussians(1024, 2.0, GAUSS_STD, data_seed);
    let mut gan = Gan::new(cfg);
    gan.train(TrainData { real: &samples, conditions: None }, |_, _| {}).unwrap();
    let generated = gan.sample_vectors(512, None, data_seed ^ 0xfeed).unwrap();
    mode_coverage(&generated, &centers, 3.0 * GAUSS_STD)
}

/// On the 8-Gaussian ring, the plain objective without minibatch
/// discrimination covers at most 4 modes while the same budget with
/// minibatch discrimination covers at least 6 (medians over 5 seeds,
/// coverage radius 3 sigma).
#[test]
fn c4_mode_collapse_reproduction() {
    let started = Instant::now();
    let mut plain = Vec::new();
    let mut with_mb = Vec::new();
    for seed in [1u64, 2, 3, 4, 5] {
        let p = run_gauss(gauss_gan_config(false, seed), 900 + seed) as f64;
        let m = run_gauss(gauss_gan_config(true, seed), 900 + seed) as f64;
        println!("  seed {seed}: plain {p}, minibatch {m}");
        plain.push(p);
        with_mb.push(m);
    }
    let med_plain = median(&mut plain);
    let med_mb = median(&mut with_mb);
    assert!(med_plain <= 4.0, "plain objective covered {med_plain} modes (> 4)");
    assert!(med_mb >= 6.0, "minibatch discrimination covered {med_mb} modes (< 6)");
    assert!(started.elapsed().as_secs() < 180, "criterion 4 exceeded 3 min");
    pass(4, "mode-collapse-reproduction", format!("median coverage {med_plain} vs {med_mb} of 8"), started);
}

// ---------------------------------------------------------------------------
// criterion 5: gradient-norm property after penalty training
// ---------------------------------------------------------------------------

/// After toy training with the penalty objective, the mean interpolate
/// gradient norm over 256 interpolates lies in [0.8, 1.2].
#[test]
fn c5_wgan_gp_gradient_norm() {
    let started = Instant::now();
    // The healthy penalty regime uses the conventional critic-heavy
    // schedule; the language pipeline keeps the 2:1 generator-heavy default.
    let mut cfg = gauss_gan_config(false, 7);
    cfg.f_measure = FMeasure::WGanGp;
    cfg.rounds = 800;
    cfg.lr = 1e-3;
    cfg.gen_updates = 1;
    cfg.disc_updates = 5;
    let (samples, _) = fixture::eight_gaussians(1024, 2.0, GAUSS_STD, 77);
    let mut gan = Gan::new(cfg);
    gan.train(TrainData { real: &samples, conditions: None }, |_, _| {}).unwrap();

    let mut rng = Rng::new(123);
    let real: Vec<Vec<f64>> = (0..256).map(|_| samples[rng.below(samples.len())].clone()).collect();
    let fake = gan.sample_vectors(256, None, 321).unwrap();
    let g = Graph::new();
    let (_, mean_norm) = gradient_penalty(&gan, &g, &real, &fake, None, 10.0, &mut rng).unwrap();
    assert!(
        (0.8..=1.2).contains(&mean_norm),
        "mean interpolate gradient norm {mean_norm} outside [0.8, 1.2]"
    );
    assert!(started.elapsed().as_secs() < 60, "criterion 5 exceeded 1 min");
    pass(5, "wgan-gp-gradient-norm", format!("mean norm {mean_norm:.3} over 256 interpolates"), started);
}

// ---------------------------------------------------------------------------
// criterion 6: objective trend on the end-to-end pipeline
// ---------------------------------------------------------------------------

fn pipeline_bleu2(f_measure: FMeasure, seed: u64, corpus_path: &std::path::Path) -> f64 {
    let dir = temp_dir(&format!("c6_{}_{seed}", f_measure.name()));
    let mut cfg = ExperimentConfig::preset(Preset::Desk, &dir, seed);
    cfg.corpus = Some(corpus_path.to_path_buf());
    cfg.gan.f_measure = f_measure;
    cfg.metrics = vec!["bleu2".into()];
    pipeline::run_pipeline(&cfg).unwrap();
    let csv = std::fs::read_to_string(dir.join("report.csv")).unwrap();
    let value: f64 = csv
        .lines()
        .find(|l| l.contains("bleu2"))
        .and_then(|l| l.rsplit(',').next())
        .and_then(|v| v.parse().ok())
        .unwrap();
    let _ = std::fs::remove_dir_all(&dir);
    value
}

/// End-to-end on the bundled corpus, the penalty objective's median BLEU-2
/// over 5 seeds is at least the plain objective's. All values are reported.
#[test]
fn c6_fmeasure_trend_bleu2() {
    let started = Instant::now();
    let dir = temp_dir("c6_corpus");
    let corpus_path = dir.join("corpus.txt");
    std::fs::write(&corpus_path, fixture::bundled_corpus()).unwrap();

    let mut gp = Vec::new();
    let mut plain = Vec::new();
    for seed in [101u64, 202, 303, 404, 505] {
        let per_seed = Instant::now();
        let v_gp = pipeline_bleu2(FMeasure::WGanGp, seed, &corpus_path);
        let v_plain = pipeline_bleu2(FMeasure::Vanilla, seed, &corpus_path);
        println!(
            "  seed {seed}: wgan-gp {v_gp:.4}, vanilla {v_plain:.4} ({:.0}s)",
            per_seed.elapsed().as_secs_f64()
        );
        assert!(per_seed.elapsed().as_secs() < 600 * 2, "criterion 6 exceeded 10 min per seed");
        gp.push(v_gp);
        plain.push(v_plain);
    }
    let med_gp = median(&mut gp);
    let med_plain = median(&mut plain);
    let _ = std::fs::remove_dir_all(&dir);
    assert!(
        med_gp >= med_plain,
        "median BLEU-2: wgan-gp {med_gp:.4} < vanilla {med_plain:.4}"
    );
    pass(6, "fmeasure-trend-bleu2", format!("median BLEU-2 wgan-gp {med_gp:.4} >= vanilla {med_plain:.4}"), started);
}

// ---------------------------------------------------------------------------
// criterion 7: weighted human-score arithmetic
// ---------------------------------------------------------------------------

/// Exact reproduction of the reference table percentages from weighted
/// rating masses (30, 51, 48, 75): 37.04 / 62.96 / 39.02 / 60.98.
#[test]
fn c7_weighted_score_arithmetic() {
    let started = Instant::now();
    // Build a rating list whose weighted masses are exactly 30/51/48/75:
    // weight 1 ratings (2 or 4) in those counts.
    let mut ratings = Vec::new();
    ratings.extend(std::iter::repeat_n((ActualLabel::Real, 2u8), 30));
    ratings.extend(std::iter::repeat_n((ActualLabel::Real, 4u8), 51));
    ratings.extend(std::iter::repeat_n((ActualLabel::Fake, 2u8), 48));
    ratings.extend(std::iter::repeat_n((ActualLabel::Fake, 4u8), 75));
    // Neutral ratings contribute nothing.
    ratings.push((ActualLabel::Real, 3));
    ratings.push((ActualLabel::Fake, 3));
    let table = weighted_human_scores(&ratings).unwrap();
    assert_eq!(table.real_judged_real, 30.0);
    assert_eq!(table.real_judged_fake, 51.0);
    assert_eq!(table.fake_judged_real, 48.0);
    assert_eq!(table.fake_judged_fake, 75.0);
    let (real, fake) = table.percentages();
    let (rr, rf) = real.unwrap();
    let (fr, ff) = fake.unwrap();
    for (got, want) in [(rr, 37.04), (rf, 62.96), (fr, 39.02), (ff, 60.98)] {
        assert!(
            (got - want).abs() < 0.005,
            "percentage {got:.4} differs from {want} at two decimals"
        );
    }
    pass(7, "weighted-score-arithmetic", format!("{rr:.2}/{rf:.2}/{fr:.2}/{ff:.2}"), started);
}

// ---------------------------------------------------------------------------
// criterion 8: pipeline determinism
// ---------------------------------------------------------------------------

/// Two from-scratch pipeline runs with the same config and seed produce
/// byte-identical report CSVs.
#[test]
fn c8_pipeline_determinism() {
    let started = Instant::now();
    let base = temp_dir("c8");
    let corpus_path = base.join("corpus.txt");
    std::fs::write(&corpus_path, fixture::synthetic_corpus(120, 99)).unwrap();

    let run = |tag: &str| -> Vec<u8> {
        let dir = base.join(tag);
        std::fs::create_dir_all(&dir).unwrap();
        let mut cfg = ExperimentConfig::preset(Preset::Desk, &dir, 4242);
        cfg.corpus = Some(corpus_path.clone());
        cfg.skipthought.epochs = 4;
        cfg.gan.rounds = 60;
        cfg.sample_count = 16;
        pipeline::run_pipeline(&cfg).unwrap();
        std::fs::read(dir.join("report.csv")).unwrap()
    };
    let a = run("a");
    let b = run("b");
    assert_eq!(a, b, "report CSVs differ between identical runs");
    let _ = std::fs::remove_dir_all(&base);
    pass(8, "pipeline-determinism", format!("{} identical bytes", a.len()), started);
}

// ---------------------------------------------------------------------------
// criterion 9: invariant suites
// ---------------------------------------------------------------------------

/// The standing invariants as one automated sweep: GRU gates in (0, 1), the
/// 2:1 update schedule, combine-skip slicing identity, minibatch permutation
/// equivariance, checkpoint round-trip within 1e-6 relative.
#[test]
fn c9_invariant_suites() {
    let started = Instant::now();

    // Gate ranges across random cells.
    let mut rng = Rng::new(31);
    for _ in 0..10 {
        let g = Graph::new();
        let mut store = ParamStore::new();
        let mut data = vec![0.0; 16];
        rng.fill_normal(&mut data, 0.0, 3.0);
        let id = store.add("w", &[4, 4], data);
        let w = g.param(&store, id).t();
        let x = g.constant(&[2, 4], vec![0.7; 8]).unwrap();
        let r = x.matmul(&w).unwrap().sigmoid();
        for v in r.data() {
            assert!(v > 0.0 && v < 1.0, "gate value {v} outside (0, 1)");
        }
    }

    // Schedule invariant on a real short run.
    let mut gan = Gan::new(tiny_gan_config(4, 9));
    let data: Vec<Vec<f64>> = (0..16).map(|i| vec![i as f64 * 0.1; 4]).collect();
    gan.train(TrainData { real: &data, conditions: None }, |g, _| {
        assert_eq!(g.gen_updates_done, 2 * g.disc_updates_done);
    })
    .unwrap();
    assert_eq!(gan.gen_updates_done, 2 * gan.disc_updates_done);

    // Combine-skip = [uni || bi] by slicing.
    let model = SkipThought::new(
        12,
        SkipThoughtConfig { word_dim: 6, hidden_enc: 8, hidden_dec: 6, ..SkipThoughtConfig::desk() },
        55,
    );
    let s = sent(&[4, 7, 9]);
    let combined = model.encode(&s).unwrap();
    assert_eq!(combined.len(), 16);
    let uni_only = model_with_mode(&model, CombineMode::Uni);
    let bi_only = model_with_mode(&model, CombineMode::Bi);
    assert_eq!(&combined[..8], &uni_only.encode(&s).unwrap()[..]);
    assert_eq!(&combined[8..], &bi_only.encode(&s).unwrap()[..]);

    // Minibatch permutation equivariance on random features.
    let g = Graph::new();
    let shape = MinibatchShape { kernels: 3, kernel_dim: 2 };
    let mut t_data = vec![0.0; 5 * 6];
    rng.fill_normal(&mut t_data, 0.0, 1.0);
    let t = g.constant(&[5, 6], t_data).unwrap();
    let rows: Vec<Vec<f64>> = (0..4)
        .map(|_| {
            let mut r = vec![0.0; 5];
            rng.fill_normal(&mut r, 0.0, 1.0);
            r
        })
        .collect();
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    let f = g.constant(&[4, 5], flat).unwrap();
    let feats = minibatch_features(&f, &t, shape).unwrap().data();
    let perm = [2usize, 0, 3, 1];
    let permuted: Vec<f64> = perm.iter().flat_map(|&i| rows[i].clone()).collect();
    let fp = g.constant(&[4, 5], permuted).unwrap();
    let feats_p = minibatch_features(&fp, &t, shape).unwrap().data();
    for (new_row, &old_row) in perm.iter().enumerate() {
        for k in 0..3 {
            let a = feats_p[new_row * 3 + k];
            let b = feats[old_row * 3 + k];
            assert!((a - b).abs() < 1e-12, "permutation equivariance violated");
        }
    }

    // Checkpoint round-trip within 1e-6 relative, and byte-stable resave.
    let dir = temp_dir("c9");
    let model = SkipThought::new(20, SkipThoughtConfig::desk(), 77);
    let path = dir.join("st.ckpt");
    pipeline::save_skipthought(&path, &model).unwrap();
    let loaded = pipeline::load_skipthought(&path).unwrap();
    let mut max_rel: f64 = 0.0;
    for (a_id, b_id) in model.store.ids().zip(loaded.store.ids()) {
        for (a, b) in model.store.value(a_id).iter().zip(loaded.store.value(b_id)) {
            let rel = (a - b).abs() / a.abs().max(1e-9);
            max_rel = max_rel.max(rel);
        }
    }
    assert!(max_rel <= 1e-6, "checkpoint round-trip drift {max_rel}");
    let bytes_a = std::fs::read(&path).unwrap();
    let resaved = dir.join("resave.ckpt");
    pipeline::save_skipthought(&resaved, &loaded).unwrap();
    let bytes_b = std::fs::read(&resaved).unwrap();
    assert_eq!(bytes_a, bytes_b, "save -> load -> save is not byte-stable");
    let _ = std::fs::remove_dir_all(&dir);

    pass(9, "invariant-suites", format!("5 invariant families, round-trip drift {max_rel:.1e}"), started);
}

/// Same encoder weights, different combine mode (the decoders differ in
/// conditioning width and are irrelevant to encoding).
fn model_with_mode(model: &SkipThought, mode: CombineMode) -> SkipThought {
    let mut cfg = model.cfg.clone();
    cfg.combine = mode;
    let mut out = SkipThought::new(model.vocab_size, cfg, 1);
    for id in out.store.ids().collect::<Vec<_>>() {
        let name = out.store.name(id).to_string();
        if !(name.starts_with("embedding") || name.starts_with("enc_")) {
            continue;
        }
        let src = model.store.id(&name).expect("shared parameter name");
        out.store.set_value(id, model.store.value(src).to_vec()).unwrap();
    }
    out
}
