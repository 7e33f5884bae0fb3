//! Adversarial training over fixed-length vectors (sentence embeddings or 2-D
//! toy mixtures): dense generator/critic stacks, four objectives, minibatch
//! discrimination, a conditional mode, the 2:1 generator/critic update
//! schedule, and sample extraction.

use thiserror::Error;

use crate::rng::Rng;
use crate::tensor::{
    clamp_params, clip_global_norm, Adam, AdamConfig, Graph, ParamId, ParamStore, Tensor,
    TensorError,
};

#[derive(Error, Debug, Clone, PartialEq)]
pub enum GanError {
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error("minibatch discrimination needs a batch of at least 2 samples")]
    BatchTooSmall,
    #[error("conditional mode needs a condition batch")]
    MissingCondition,
    #[error("training needs at least 2 x batch_size real samples, got {0}")]
    NotEnoughData(usize),
    #[error("training diverged at round {0}; parameters rolled back")]
    Diverged(usize),
    #[error("non-finite interpolate gradient in the penalty term")]
    NonFinitePenalty,
}

pub type Result<T> = std::result::Result<T, GanError>;

/// The objective family used for both networks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FMeasure {
    Vanilla,
    LsGan,
    WGan,
    WGanGp,
}

impl FMeasure {
    pub fn name(&self) -> &'static str {
        match self {
            FMeasure::Vanilla => "vanilla",
            FMeasure::LsGan => "lsgan",
            FMeasure::WGan => "wgan",
            FMeasure::WGanGp => "wgan-gp",
        }
    }

    pub fn parse(s: &str) -> Option<FMeasure> {
        match s {
            "vanilla" | "gan" => Some(FMeasure::Vanilla),
            "lsgan" | "least-squares" => Some(FMeasure::LsGan),
            "wgan" => Some(FMeasure::WGan),
            "wgan-gp" | "wgangp" => Some(FMeasure::WGanGp),
            _ => None,
        }
    }
}

/// Minibatch-discrimination feature sizes: the similarity tensor maps the
/// critic's last hidden feature (size A_in, fixed by the layer stack) through
/// `kernels` x `kernel_dim` projections.
#[derive(Clone, Copy, Debug)]
pub struct MinibatchShape {
    pub kernels: usize,
    pub kernel_dim: usize,
}

impl Default for MinibatchShape {
    fn default() -> Self {
        MinibatchShape { kernels: 16, kernel_dim: 8 }
    }
}

#[derive(Clone, Debug)]
pub struct GanConfig {
    pub noise_dim: usize,
    pub data_dim: usize,
    pub gen_layers: Vec<usize>,
    pub disc_layers: Vec<usize>,
    pub f_measure: FMeasure,
    pub minibatch: Option<MinibatchShape>,
    pub gp_lambda: f64,
    /// Condition vector width when both networks are conditioned.
    pub conditional: Option<usize>,
    pub gen_updates: usize,
    pub disc_updates: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub rounds: usize,
    pub leaky_slope: f64,
    pub weight_clip: f64,
    pub clip_norm: f64,
    pub seed: u64,
}

impl GanConfig {
    pub fn desk(data_dim: usize) -> GanConfig {
        GanConfig {
            noise_dim: 32,
            data_dim,
            gen_layers: vec![128, 128],
            disc_layers: vec![128, 64],
            f_measure: FMeasure::WGanGp,
            minibatch: None,
            gp_lambda: 10.0,
            conditional: None,
            gen_updates: 2,
            disc_updates: 1,
            batch_size: 16,
            lr: 3e-4,
            rounds: 2000,
            leaky_slope: 0.2,
            weight_clip: 0.01,
            clip_norm: 5.0,
            seed: 0,
        }
    }
}

struct DenseIds {
    weights: Vec<(ParamId, ParamId)>, // (W [out, in], b [out]) per layer
}

impl DenseIds {
    fn add(store: &mut ParamStore, prefix: &str, sizes: &[usize], rng: &mut Rng) -> DenseIds {
        let mut weights = Vec::new();
        for (l, pair) in sizes.windows(2).enumerate() {
            let (input, output) = (pair[0], pair[1]);
            let w = store.add_dense(&format!("{prefix}.w{l}"), &[output, input], input, rng);
            let b = store.add_zeros(&format!("{prefix}.b{l}"), &[output]);
            weights.push((w, b));
        }
        DenseIds { weights }
    }

    fn bind(&self, g: &Graph, store: &ParamStore, trainable: bool) -> Vec<(Tensor, Tensor)> {
        self.weights
            .iter()
            .map(|&(w, b)| {
                let (wt, bt) = if trainable {
                    (g.param(store, w), g.param(store, b))
                } else {
                    (g.frozen(store, w), g.frozen(store, b))
                };
                (wt.t(), bt)
            })
            .collect()
    }
}

/// Generator and critic over a [`GanConfig`]. Parameters for the two networks
/// live in separate stores so each side's optimizer touches only its own.
pub struct Gan {
    pub cfg: GanConfig,
    pub gen: ParamStore,
    pub disc: ParamStore,
    /// Lifetime generator/critic update counters (schedule invariant:
    /// gen_updates_done = 2 x disc_updates_done at every round boundary with
    /// the default 2:1 schedule).
    pub gen_updates_done: u64,
    pub disc_updates_done: u64,
    gen_ids: DenseIds,
    disc_ids: DenseIds,
    minibatch_t: Option<ParamId>,
}

/// One round of history: the critic loss, the (last) generator loss, and the
/// mean interpolate gradient norm when the penalty is active.
#[derive(Clone, Debug)]
pub struct RoundRecord {
    pub round: usize,
    pub d_loss: f64,
    pub g_loss: f64,
    pub grad_norm: Option<f64>,
}

/// Aligned real samples with optional per-sample conditions.
pub struct TrainData<'a> {
    pub real: &'a [Vec<f64>],
    pub conditions: Option<&'a [Vec<f64>]>,
}

impl Gan {
    pub fn new(cfg: GanConfig) -> Gan {
        let mut rng = Rng::new(cfg.seed);
        let cond = cfg.conditional.unwrap_or(0);
        let mut gen = ParamStore::new();
        let mut gen_sizes = vec![cfg.noise_dim + cond];
        gen_sizes.extend_from_slice(&cfg.gen_layers);
        gen_sizes.push(cfg.data_dim);
        let gen_ids = DenseIds::add(&mut gen, "gen", &gen_sizes, &mut rng);

        let mut disc = ParamStore::new();
        let mut disc_sizes = vec![cfg.data_dim + cond];
        disc_sizes.extend_from_slice(&cfg.disc_layers);
        let feature_dim = *disc_sizes.last().unwrap();
        let minibatch_extra = cfg.minibatch.map(|m| m.kernels).unwrap_or(0);
        let disc_ids = DenseIds::add(&mut disc, "disc", &disc_sizes, &mut rng);
        // Final scoring layer sees the hidden feature plus similarity features.
        let head_in = feature_dim + minibatch_extra;
        let head_w = disc.add_dense("disc.head_w", &[1, head_in], head_in, &mut rng);
        let head_b = disc.add_zeros("disc.head_b", &[1]);
        let mut disc_ids = disc_ids;
        disc_ids.weights.push((head_w, head_b));
        let minibatch_t = cfg.minibatch.map(|m| {
            disc.add_dense(
                "disc.minibatch_t",
                &[feature_dim, m.kernels * m.kernel_dim],
                feature_dim,
                &mut rng,
            )
        });
        Gan { cfg, gen, disc, gen_updates_done: 0, disc_updates_done: 0, gen_ids, disc_ids, minibatch_t }
    }

    /// Dense stack with leaky-rectifier hidden activations and a linear
    /// output. Conditional mode concatenates the condition onto the noise.
    pub fn generator_forward(
        &self,
        g: &Graph,
        noise: &Tensor,
        condition: Option<&Tensor>,
        trainable: bool,
    ) -> Result<Tensor> {
        if self.cfg.conditional.is_some() && condition.is_none() {
            return Err(GanError::MissingCondition);
        }
        let layers = self.gen_ids.bind(g, &self.gen, trainable);
        let mut x = match condition {
            Some(c) => Tensor::concat_cols(&[noise, c])?,
            None => noise.clone(),
        };
        let last = layers.len() - 1;
        for (l, (w_t, b)) in layers.iter().enumerate() {
            x = x.matmul(w_t)?.add(b)?;
            if l != last {
                x = x.leaky_relu(self.cfg.leaky_slope);
            }
        }
        Ok(x)
    }

    /// Raw critic scores [n]; no link function is applied here — each
    /// objective applies its own. With minibatch discrimination, similarity
    /// features over the batch are concatenated before the scoring layer.
    pub fn discriminator_forward(
        &self,
        g: &Graph,
        x: &Tensor,
        condition: Option<&Tensor>,
        trainable: bool,
    ) -> Result<Tensor> {
        if self.cfg.conditional.is_some() && condition.is_none() {
            return Err(GanError::MissingCondition);
        }
        let n = x.shape()[0];
        if self.cfg.minibatch.is_some() && n < 2 {
            return Err(GanError::BatchTooSmall);
        }
        let layers = self.disc_ids.bind(g, &self.disc, trainable);
        let mut h = match condition {
            Some(c) => Tensor::concat_cols(&[x, c])?,
            None => x.clone(),
        };
        let head = layers.len() - 1;
        for (l, (w_t, b)) in layers.iter().enumerate() {
            if l == head {
                if let (Some(shape), Some(t_id)) = (self.cfg.minibatch, self.minibatch_t) {
                    let t = if trainable {
                        g.param(&self.disc, t_id)
                    } else {
                        g.frozen(&self.disc, t_id)
                    };
                    let feats = minibatch_features(&h, &t, shape)?;
                    h = Tensor::concat_cols(&[&h, &feats])?;
                }
            }
            h = h.matmul(w_t)?.add(b)?;
            if l != head {
                h = h.leaky_relu(self.cfg.leaky_slope);
            }
        }
        h.reshape(&[n]).map_err(GanError::Tensor)
    }
}

/// Similarity features over a batch: each sample's feature vector is mapped
/// through `t` to `kernels` rows of `kernel_dim`, and feature b of sample i
/// is the summed negative-exponential L1 distance to every other sample's
/// row b.
///
/// Vectorized over ordered sample pairs (gather rows, subtract, reduce, then
/// sum per first index through a constant selection matrix) so the recorded
/// graph stays a handful of nodes regardless of batch size.
pub fn minibatch_features(f: &Tensor, t: &Tensor, shape: MinibatchShape) -> Result<Tensor> {
    let n = f.shape()[0];
    if n < 2 {
        return Err(GanError::BatchTooSmall);
    }
    let m = f.matmul(t)?; // [n, kernels * kernel_dim]
    let g = f.graph().clone();

    let pair_count = n * (n - 1);
    let mut ids_i = Vec::with_capacity(pair_count);
    let mut ids_j = Vec::with_capacity(pair_count);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                ids_i.push(i);
                ids_j.push(j);
            }
        }
    }
    let left = m.embed_lookup(&ids_i)?;
    let right = m.embed_lookup(&ids_j)?;
    let l1_per_kernel = left
        .sub(&right)?
        .abs()
        .reshape(&[pair_count * shape.kernels, shape.kernel_dim])?
        .sum_axis1()?;
    let similarities = l1_per_kernel.neg().exp().reshape(&[pair_count, shape.kernels])?;

    // Constant 0/1 matrix summing the (n-1) ordered pairs that start at each i.
    let mut select = vec![0.0; n * pair_count];
    for (p, &i) in ids_i.iter().enumerate() {
        select[i * pair_count + p] = 1.0;
    }
    let select = g.constant(&[n, pair_count], select)?;
    select.matmul(&similarities).map_err(GanError::Tensor)
}

// ---------------------------------------------------------------------------
// objectives
// ---------------------------------------------------------------------------

/// Non-saturating minimax losses. The critic drives sigmoid(real scores)
/// toward 1 and sigmoid(fake scores) toward 0; the generator maximizes
/// log sigmoid(fake scores).
pub fn loss_vanilla(scores_real: &Tensor, scores_fake: &Tensor) -> Result<(Tensor, Tensor)> {
    let p_real = scores_real.sigmoid();
    let p_fake = scores_fake.sigmoid();
    let d_loss = p_real
        .log()
        .mean_all()
        .neg()
        .add(&p_fake.neg().add_const(1.0).log().mean_all().neg())?;
    let g_loss = p_fake.log().mean_all().neg();
    Ok((d_loss, g_loss))
}

/// Least-squares losses: the critic regresses real scores to 1 and fake to 0;
/// the generator regresses fake scores to 1.
pub fn loss_lsgan(scores_real: &Tensor, scores_fake: &Tensor) -> Result<(Tensor, Tensor)> {
    let half = 0.5;
    let d_loss = scores_real
        .add_const(-1.0)
        .mul(&scores_real.add_const(-1.0))?
        .mean_all()
        .scale(half)
        .add(&scores_fake.mul(scores_fake)?.mean_all().scale(half))?;
    let g_loss =
        scores_fake.add_const(-1.0).mul(&scores_fake.add_const(-1.0))?.mean_all().scale(half);
    Ok((d_loss, g_loss))
}

/// Wasserstein critic losses: d = mean(fake) - mean(real), g = -mean(fake).
/// Without the gradient penalty the caller clamps critic weights after each
/// update.
pub fn loss_wgan(scores_real: &Tensor, scores_fake: &Tensor) -> Result<(Tensor, Tensor)> {
    let d_loss = scores_fake.mean_all().sub(&scores_real.mean_all())?;
    let g_loss = scores_fake.mean_all().neg();
    Ok((d_loss, g_loss))
}

/// Gradient penalty at per-sample random interpolates between real and fake
/// rows: lambda * mean((||grad D(x_hat)||_2 - 1)^2). Returns the penalty term
/// (a graph tensor differentiable in the critic weights through the emitted
/// backward operations) and the mean interpolate gradient norm.
pub fn gradient_penalty(
    gan: &Gan,
    g: &Graph,
    x_real: &[Vec<f64>],
    x_fake: &[Vec<f64>],
    condition: Option<&Tensor>,
    lambda: f64,
    rng: &mut Rng,
) -> Result<(Tensor, f64)> {
    assert_eq!(x_real.len(), x_fake.len(), "interpolation needs equal batch sizes");
    let n = x_real.len();
    let d = gan.cfg.data_dim;
    let mut data = Vec::with_capacity(n * d);
    for (r, f) in x_real.iter().zip(x_fake.iter()) {
        let eps = rng.uniform();
        for k in 0..d {
            data.push(eps * r[k] + (1.0 - eps) * f[k]);
        }
    }
    let x_hat = g.input(&[n, d], data)?;
    let scores = gan.discriminator_forward(g, &x_hat, condition, true)?;
    let total = scores.sum_all();
    g.backward(&total)?;
    let grad = g.grad(&x_hat).ok_or(GanError::NonFinitePenalty)?;
    if grad.data().iter().any(|v| !v.is_finite()) {
        return Err(GanError::NonFinitePenalty);
    }
    let norms = grad.row_l2_norms()?;
    let mean_norm = norms.data().iter().sum::<f64>() / n as f64;
    let deviation = norms.add_const(-1.0);
    let penalty = deviation.mul(&deviation)?.mean_all().scale(lambda);
    Ok((penalty, mean_norm))
}

// ---------------------------------------------------------------------------
// training
// ---------------------------------------------------------------------------

fn rows_tensor(g: &Graph, rows: &[Vec<f64>]) -> crate::tensor::Result<Tensor> {
    let n = rows.len();
    let d = rows[0].len();
    let mut data = Vec::with_capacity(n * d);
    for r in rows {
        data.extend_from_slice(r);
    }
    g.constant(&[n, d], data)
}

fn sample_rows<'a>(pool: &'a [Vec<f64>], n: usize, rng: &mut Rng) -> Vec<&'a Vec<f64>> {
    (0..n).map(|_| &pool[rng.below(pool.len())]).collect()
}

impl Gan {
    fn noise_batch(&self, rng: &mut Rng, n: usize) -> Vec<f64> {
        let mut data = vec![0.0; n * self.cfg.noise_dim];
        rng.fill_normal(&mut data, 0.0, 1.0);
        data
    }

    fn snapshot(&self) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        (
            self.gen.ids().map(|id| self.gen.value(id).to_vec()).collect(),
            self.disc.ids().map(|id| self.disc.value(id).to_vec()).collect(),
        )
    }

    fn restore(&mut self, snap: (Vec<Vec<f64>>, Vec<Vec<f64>>)) {
        for (id, v) in self.gen.ids().collect::<Vec<_>>().into_iter().zip(snap.0) {
            self.gen.set_value(id, v).expect("snapshot shape");
        }
        for (id, v) in self.disc.ids().collect::<Vec<_>>().into_iter().zip(snap.1) {
            self.disc.set_value(id, v).expect("snapshot shape");
        }
    }

    /// One critic update followed by `gen_updates` generator updates per
    /// round (the critic-update count per round is also configurable).
    /// History records the losses and, when the penalty is active, the mean
    /// interpolate gradient norm. `on_round` fires after each round. A
    /// non-finite loss rolls the parameters back to the previous round and
    /// aborts.
    pub fn train(
        &mut self,
        data: TrainData,
        mut on_round: impl FnMut(&Gan, &RoundRecord),
    ) -> Result<Vec<RoundRecord>> {
        let mut trainer = GanTrainer::new(self);
        let mut history = Vec::with_capacity(self.cfg.rounds);
        let mut last_good = self.snapshot();
        for _ in 0..self.cfg.rounds {
            match trainer.step(self, &data) {
                Ok(record) => {
                    on_round(self, &record);
                    history.push(record);
                    last_good = self.snapshot();
                }
                Err(e) => {
                    self.restore(last_good);
                    return Err(e);
                }
            }
        }
        Ok(history)
    }

    /// Draw `n` vectors from the generator (frozen), deterministically from
    /// the seed. Conditional generators take one condition per sample.
    pub fn sample_vectors(&self, n: usize, conditions: Option<&[Vec<f64>]>, seed: u64) -> Result<Vec<Vec<f64>>> {
        if n == 0 {
            return Ok(Vec::new());
        }
        let mut rng = Rng::new(seed);
        let g = Graph::new();
        let noise = g.constant(&[n, self.cfg.noise_dim], self.noise_batch(&mut rng, n))?;
        let cond = match (self.cfg.conditional, conditions) {
            (Some(_), Some(rows)) => {
                assert_eq!(rows.len(), n, "one condition per sample");
                Some(rows_tensor(&g, rows)?)
            }
            (Some(_), None) => return Err(GanError::MissingCondition),
            _ => None,
        };
        let fake = self.generator_forward(&g, &noise, cond.as_ref(), false)?;
        let flat = fake.data();
        Ok((0..n).map(|i| flat[i * self.cfg.data_dim..(i + 1) * self.cfg.data_dim].to_vec()).collect())
    }
}

/// Incremental round-by-round training; optimizer moments and the sampling
/// stream persist across calls, so driving this step by step reproduces
/// [`Gan::train`] exactly.
pub struct GanTrainer {
    adam_g: Adam,
    adam_d: Adam,
    rng: Rng,
    round: usize,
}

impl GanTrainer {
    pub fn new(gan: &Gan) -> GanTrainer {
        GanTrainer {
            adam_g: Adam::new(&gan.gen, AdamConfig::with_lr(gan.cfg.lr)),
            adam_d: Adam::new(&gan.disc, AdamConfig::with_lr(gan.cfg.lr)),
            rng: Rng::new(gan.cfg.seed).fork(0x6742),
            round: 0,
        }
    }

    pub fn rounds_done(&self) -> usize {
        self.round
    }

    /// One round: `disc_updates` critic updates, then `gen_updates`
    /// generator updates. A non-finite loss aborts with the parameters left
    /// as they were mid-round; callers that need rollback snapshot first.
    pub fn step(&mut self, gan: &mut Gan, data: &TrainData) -> Result<RoundRecord> {
        if data.real.len() < 2 * gan.cfg.batch_size {
            return Err(GanError::NotEnoughData(data.real.len()));
        }
        if let Some(conds) = data.conditions {
            assert_eq!(conds.len(), data.real.len(), "conditions must align with real rows");
        }
        let rng = &mut self.rng;
        let n = gan.cfg.batch_size;
        self.round += 1;
        let round = self.round;
        let mut d_loss_value = 0.0;
        let mut grad_norm = None;

        for _ in 0..gan.cfg.disc_updates {
            gan.disc.zero_grads();
            let g = Graph::new();
            let picked: Vec<usize> = (0..n).map(|_| rng.below(data.real.len())).collect();
            let real_rows: Vec<Vec<f64>> = picked.iter().map(|&i| data.real[i].clone()).collect();
            let real = rows_tensor(&g, &real_rows)?;
            let cond = match data.conditions {
                Some(pool) => Some(rows_tensor(
                    &g,
                    &picked.iter().map(|&i| pool[i].clone()).collect::<Vec<_>>(),
                )?),
                None => None,
            };
            let noise = g.constant(&[n, gan.cfg.noise_dim], gan.noise_batch(rng, n))?;
            let fake = gan.generator_forward(&g, &noise, cond.as_ref(), false)?;
            let fake_rows: Vec<Vec<f64>> = {
                let flat = fake.data();
                (0..n)
                    .map(|i| flat[i * gan.cfg.data_dim..(i + 1) * gan.cfg.data_dim].to_vec())
                    .collect()
            };
            let s_real = gan.discriminator_forward(&g, &real, cond.as_ref(), true)?;
            let s_fake = gan.discriminator_forward(&g, &fake, cond.as_ref(), true)?;
            let (mut d_loss, _) = match gan.cfg.f_measure {
                FMeasure::Vanilla => loss_vanilla(&s_real, &s_fake)?,
                FMeasure::LsGan => loss_lsgan(&s_real, &s_fake)?,
                FMeasure::WGan | FMeasure::WGanGp => loss_wgan(&s_real, &s_fake)?,
            };
            if gan.cfg.f_measure == FMeasure::WGanGp {
                let (penalty, mean_norm) = gradient_penalty(
                    gan,
                    &g,
                    &real_rows,
                    &fake_rows,
                    cond.as_ref(),
                    gan.cfg.gp_lambda,
                    rng,
                )?;
                d_loss = d_loss.add(&penalty)?;
                grad_norm = Some(mean_norm);
            }
            d_loss_value = d_loss.item();
            if !d_loss_value.is_finite() {
                return Err(GanError::Diverged(round));
            }
            g.backward(&d_loss)?;
            g.apply_grads(&mut gan.disc);
            clip_global_norm(&mut gan.disc, gan.cfg.clip_norm)?;
            self.adam_d.step(&mut gan.disc)?;
            gan.disc_updates_done += 1;
            if gan.cfg.f_measure == FMeasure::WGan {
                clamp_params(&mut gan.disc, gan.cfg.weight_clip);
            }
        }

        let mut g_loss_value = 0.0;
        for _ in 0..gan.cfg.gen_updates {
            gan.gen.zero_grads();
            let g = Graph::new();
            let cond = match data.conditions {
                Some(pool) => Some(rows_tensor(
                    &g,
                    &sample_rows(pool, n, rng).into_iter().cloned().collect::<Vec<_>>(),
                )?),
                None => None,
            };
            let noise = g.constant(&[n, gan.cfg.noise_dim], gan.noise_batch(rng, n))?;
            let fake = gan.generator_forward(&g, &noise, cond.as_ref(), true)?;
            let s_fake = gan.discriminator_forward(&g, &fake, cond.as_ref(), false)?;
            // The generator objective only reads the fake scores; feed them
            // to both slots of the loss builders.
            let g_loss = match gan.cfg.f_measure {
                FMeasure::Vanilla => loss_vanilla(&s_fake, &s_fake)?.1,
                FMeasure::LsGan => loss_lsgan(&s_fake, &s_fake)?.1,
                FMeasure::WGan | FMeasure::WGanGp => loss_wgan(&s_fake, &s_fake)?.1,
            };
            g_loss_value = g_loss.item();
            if !g_loss_value.is_finite() {
                return Err(GanError::Diverged(round));
            }
            g.backward(&g_loss)?;
            g.apply_grads(&mut gan.gen);
            clip_global_norm(&mut gan.gen, gan.cfg.clip_norm)?;
            self.adam_g.step(&mut gan.gen)?;
            gan.gen_updates_done += 1;
        }
        debug_assert_eq!(
            gan.gen_updates_done * gan.cfg.disc_updates as u64,
            gan.disc_updates_done * gan.cfg.gen_updates as u64
        );
        Ok(RoundRecord { round, d_loss: d_loss_value, g_loss: g_loss_value, grad_norm })
    }
}

/// Sample `n` vectors and map each through a decoding function (typically a
/// frozen sentence decoder). Deterministic given the seed.
pub fn sample_and_decode<T>(
    gan: &Gan,
    n: usize,
    conditions: Option<&[Vec<f64>]>,
    seed: u64,
    decode: impl FnMut(&[f64]) -> T,
) -> Result<Vec<T>> {
    let vectors = gan.sample_vectors(n, conditions, seed)?;
    Ok(vectors.iter().map(|v| v.as_slice()).map(decode).collect())
}

/// Number of centers with at least one sample within `radius` (Euclidean).
pub fn mode_coverage(samples: &[Vec<f64>], centers: &[Vec<f64>], radius: f64) -> usize {
    assert!(radius > 0.0);
    centers
        .iter()
        .filter(|c| {
            samples.iter().any(|s| {
                let d2: f64 = s.iter().zip(c.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
                d2.sqrt() <= radius
            })
        })
        .count()
}

#[cfg(test)]
mod tests;
