//! GRU encoder and twin conditional GRU decoders trained to reconstruct the
//! neighbors of an encoded sentence, plus greedy and top-k decoding.
//!
//! The cell follows the four update equations exactly — gates from the input
//! and previous state, candidate from the reset-gated state, convex
//! combination — with no additive bias vectors. Decoder cells receive the
//! conditioning vector through three extra matrices applied to the update
//! gate, reset gate, and candidate state.

use thiserror::Error;

use crate::corpus::{SentenceTriple, TokenizedSentence, BOS, EOS};
use crate::rng::Rng;
use crate::tensor::{
    clip_global_norm, Adam, AdamConfig, Graph, ParamId, ParamStore, Tensor, TensorError,
};

#[derive(Error, Debug, Clone, PartialEq)]
pub enum StError {
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error("cannot encode an empty sentence")]
    EmptySentence,
    #[error("training diverged at epoch {0}; parameters rolled back to the last finite epoch")]
    Diverged(usize),
}

pub type Result<T> = std::result::Result<T, StError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CombineMode {
    Uni,
    Bi,
    CombineSkip,
}

impl CombineMode {
    pub fn name(&self) -> &'static str {
        match self {
            CombineMode::Uni => "uni",
            CombineMode::Bi => "bi",
            CombineMode::CombineSkip => "combine-skip",
        }
    }

    pub fn parse(s: &str) -> Option<CombineMode> {
        match s {
            "uni" => Some(CombineMode::Uni),
            "bi" => Some(CombineMode::Bi),
            "combine-skip" | "combine" => Some(CombineMode::CombineSkip),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SkipThoughtConfig {
    pub word_dim: usize,
    pub hidden_enc: usize,
    pub hidden_dec: usize,
    pub combine: CombineMode,
    pub max_decode_len: usize,
    pub beam_width: usize,
    pub temperature: f64,
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub clip_norm: f64,
}

impl SkipThoughtConfig {
    /// Sizes that train in minutes on a laptop core.
    pub fn desk() -> Self {
        SkipThoughtConfig {
            word_dim: 64,
            hidden_enc: 64,
            hidden_dec: 96,
            combine: CombineMode::CombineSkip,
            max_decode_len: 20,
            beam_width: 5,
            temperature: 1.0,
            epochs: 20,
            lr: 1e-2,
            batch_size: 16,
            clip_norm: 5.0,
        }
    }

    /// The full-scale preset: 620-dim word vectors, 2400 encoder units per
    /// model, 1600 decoder units. Constructible, not exercised by tests.
    pub fn paper_scale() -> Self {
        SkipThoughtConfig {
            word_dim: 620,
            hidden_enc: 2400,
            hidden_dec: 1600,
            combine: CombineMode::CombineSkip,
            max_decode_len: 40,
            beam_width: 10,
            temperature: 1.0,
            epochs: 1,
            lr: 1e-3,
            batch_size: 16,
            clip_norm: 5.0,
        }
    }

    /// Sentence-vector dimension produced by the configured combine mode.
    pub fn embed_dim(&self) -> usize {
        match self.combine {
            CombineMode::Uni | CombineMode::Bi => self.hidden_enc,
            CombineMode::CombineSkip => 2 * self.hidden_enc,
        }
    }
}

// ---------------------------------------------------------------------------
// parameter blocks
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
struct GruIds {
    w_r: ParamId,
    u_r: ParamId,
    w_z: ParamId,
    u_z: ParamId,
    w: ParamId,
    u: ParamId,
}

impl GruIds {
    fn add(store: &mut ParamStore, prefix: &str, in_dim: usize, hidden: usize, rng: &mut Rng) -> GruIds {
        let mut mat = |name: &str, shape: &[usize]| {
            store.add_recurrent(&format!("{prefix}.{name}"), shape, rng)
        };
        GruIds {
            w_r: mat("w_r", &[hidden, in_dim]),
            u_r: mat("u_r", &[hidden, hidden]),
            w_z: mat("w_z", &[hidden, in_dim]),
            u_z: mat("u_z", &[hidden, hidden]),
            w: mat("w", &[hidden, in_dim]),
            u: mat("u", &[hidden, hidden]),
        }
    }

    fn bind(&self, g: &Graph, store: &ParamStore, trainable: bool) -> BoundGru {
        let get = |id: ParamId| {
            let t = if trainable { g.param(store, id) } else { g.frozen(store, id) };
            t.t()
        };
        BoundGru {
            w_r_t: get(self.w_r),
            u_r_t: get(self.u_r),
            w_z_t: get(self.w_z),
            u_z_t: get(self.u_z),
            w_t: get(self.w),
            u_t: get(self.u),
        }
    }
}

/// GRU weights bound into a graph, pre-transposed for batch-row layout.
pub struct BoundGru {
    w_r_t: Tensor,
    u_r_t: Tensor,
    w_z_t: Tensor,
    u_z_t: Tensor,
    w_t: Tensor,
    u_t: Tensor,
}

/// Conditioning matrices for a decoder cell, pre-transposed.
pub struct BoundCond {
    c_r_t: Tensor,
    c_z_t: Tensor,
    c_t: Tensor,
}

#[derive(Clone, Copy, Debug)]
struct DecoderIds {
    gru: GruIds,
    c_r: ParamId,
    c_z: ParamId,
    c: ParamId,
    w_out: ParamId,
}

impl DecoderIds {
    fn add(
        store: &mut ParamStore,
        prefix: &str,
        word_dim: usize,
        hidden: usize,
        cond_dim: usize,
        vocab: usize,
        rng: &mut Rng,
    ) -> DecoderIds {
        let gru = GruIds::add(store, prefix, word_dim, hidden, rng);
        DecoderIds {
            gru,
            c_r: store.add_recurrent(&format!("{prefix}.c_r"), &[hidden, cond_dim], rng),
            c_z: store.add_recurrent(&format!("{prefix}.c_z"), &[hidden, cond_dim], rng),
            c: store.add_recurrent(&format!("{prefix}.c"), &[hidden, cond_dim], rng),
            w_out: store.add_dense(&format!("{prefix}.w_out"), &[vocab, hidden], hidden, rng),
        }
    }

    fn bind(&self, g: &Graph, store: &ParamStore, trainable: bool) -> BoundDecoder {
        let get = |id: ParamId| {
            let t = if trainable { g.param(store, id) } else { g.frozen(store, id) };
            t.t()
        };
        BoundDecoder {
            gru: self.gru.bind(g, store, trainable),
            cond: BoundCond { c_r_t: get(self.c_r), c_z_t: get(self.c_z), c_t: get(self.c) },
            w_out_t: get(self.w_out),
        }
    }
}

pub struct BoundDecoder {
    gru: BoundGru,
    cond: BoundCond,
    w_out_t: Tensor,
}

// ---------------------------------------------------------------------------
// cell and step operations
// ---------------------------------------------------------------------------

/// One GRU step over a batch: `x` is [n, d_in], `h_prev` [n, H]. With a
/// conditioning pair the three decoder bias matrices are added to the gate
/// and candidate pre-activations.
pub fn gru_cell(
    x: &Tensor,
    h_prev: &Tensor,
    params: &BoundGru,
    condition: Option<(&BoundCond, &Tensor)>,
) -> crate::tensor::Result<Tensor> {
    let mut r_pre = x.matmul(&params.w_r_t)?.add(&h_prev.matmul(&params.u_r_t)?)?;
    let mut z_pre = x.matmul(&params.w_z_t)?.add(&h_prev.matmul(&params.u_z_t)?)?;
    if let Some((cond, h_i)) = condition {
        r_pre = r_pre.add(&h_i.matmul(&cond.c_r_t)?)?;
        z_pre = z_pre.add(&h_i.matmul(&cond.c_z_t)?)?;
    }
    let r = r_pre.sigmoid();
    let z = z_pre.sigmoid();
    debug_assert_gate_range(&r);
    debug_assert_gate_range(&z);
    let mut cand_pre = x.matmul(&params.w_t)?.add(&r.mul(h_prev)?.matmul(&params.u_t)?)?;
    if let Some((cond, h_i)) = condition {
        cand_pre = cand_pre.add(&h_i.matmul(&cond.c_t)?)?;
    }
    let cand = cand_pre.tanh();
    // h = (1 - z) ⊙ h_prev + z ⊙ cand
    let keep = z.neg().add_const(1.0);
    keep.mul(h_prev)?.add(&z.mul(&cand)?)
}

// Gates live in the open interval (0, 1); in f64 the sigmoid rounds to
// exactly 0 or 1 beyond |x| ~ 36.7 (reachable when decoding far-off-manifold
// conditioning vectors), so the assertion admits the rounded endpoints.
fn debug_assert_gate_range(gate: &Tensor) {
    if cfg!(debug_assertions) {
        for v in gate.data() {
            debug_assert!((0.0..=1.0).contains(&v), "gate activation {v} outside [0, 1]");
        }
    }
}

/// One decoder step for a single sentence: embeds `prev_word_id`, applies the
/// conditioned cell, projects to vocabulary logits. `h_prev` and the returned
/// state are [1, H]; logits are [1, V].
pub fn decoder_step(
    prev_word_id: usize,
    h_prev: &Tensor,
    h_i: &Tensor,
    embedding: &Tensor,
    dec: &BoundDecoder,
) -> crate::tensor::Result<(Tensor, Tensor)> {
    let x = embedding.embed_lookup(&[prev_word_id])?;
    let h = gru_cell(&x, h_prev, &dec.gru, Some((&dec.cond, h_i)))?;
    let logits = h.matmul(&dec.w_out_t)?;
    Ok((logits, h))
}

// ---------------------------------------------------------------------------
// the model
// ---------------------------------------------------------------------------

/// Encoder/decoder pair over one vocabulary. The word embedding matrix is
/// shared by the encoder and both decoders; everything else is separate.
pub struct SkipThought {
    pub cfg: SkipThoughtConfig,
    pub vocab_size: usize,
    pub store: ParamStore,
    embedding: ParamId,
    enc_uni: Option<GruIds>,
    enc_fwd: Option<GruIds>,
    enc_bwd: Option<GruIds>,
    dec_next: DecoderIds,
    dec_prev: DecoderIds,
}

struct BoundEncoder {
    embedding: Tensor,
    uni: Option<BoundGru>,
    fwd: Option<BoundGru>,
    bwd: Option<BoundGru>,
}

impl SkipThought {
    pub fn new(vocab_size: usize, cfg: SkipThoughtConfig, seed: u64) -> SkipThought {
        assert!(
            cfg.combine == CombineMode::Uni || cfg.hidden_enc.is_multiple_of(2),
            "bidirectional encoding needs an even hidden size"
        );
        let mut rng = Rng::new(seed);
        let mut store = ParamStore::new();
        let embedding = store.add_recurrent("embedding", &[vocab_size, cfg.word_dim], &mut rng);
        let enc_uni = (cfg.combine != CombineMode::Bi)
            .then(|| GruIds::add(&mut store, "enc_uni", cfg.word_dim, cfg.hidden_enc, &mut rng));
        let half = cfg.hidden_enc / 2;
        let enc_fwd = (cfg.combine != CombineMode::Uni)
            .then(|| GruIds::add(&mut store, "enc_fwd", cfg.word_dim, half, &mut rng));
        let enc_bwd = (cfg.combine != CombineMode::Uni)
            .then(|| GruIds::add(&mut store, "enc_bwd", cfg.word_dim, half, &mut rng));
        let cond_dim = cfg.embed_dim();
        let dec_next = DecoderIds::add(
            &mut store, "dec_next", cfg.word_dim, cfg.hidden_dec, cond_dim, vocab_size, &mut rng,
        );
        let dec_prev = DecoderIds::add(
            &mut store, "dec_prev", cfg.word_dim, cfg.hidden_dec, cond_dim, vocab_size, &mut rng,
        );
        SkipThought { cfg, vocab_size, store, embedding, enc_uni, enc_fwd, enc_bwd, dec_next, dec_prev }
    }

    pub fn embed_dim(&self) -> usize {
        self.cfg.embed_dim()
    }

    fn bind_encoder(&self, g: &Graph, trainable: bool) -> BoundEncoder {
        let embedding = if trainable {
            g.param(&self.store, self.embedding)
        } else {
            g.frozen(&self.store, self.embedding)
        };
        BoundEncoder {
            embedding,
            uni: self.enc_uni.map(|e| e.bind(g, &self.store, trainable)),
            fwd: self.enc_fwd.map(|e| e.bind(g, &self.store, trainable)),
            bwd: self.enc_bwd.map(|e| e.bind(g, &self.store, trainable)),
        }
    }

    /// Unroll a GRU over a same-length batch and return the final state.
    fn run_gru(
        enc: &BoundEncoder,
        gru: &BoundGru,
        g: &Graph,
        sentences: &[&TokenizedSentence],
        hidden: usize,
        reversed: bool,
    ) -> crate::tensor::Result<Tensor> {
        let n = sentences.len();
        let len = sentences[0].len();
        let mut h = g.zeros(&[n, hidden]);
        for t in 0..len {
            let pos = if reversed { len - 1 - t } else { t };
            let ids: Vec<usize> = sentences.iter().map(|s| s.ids[pos]).collect();
            let x = enc.embedding.embed_lookup(&ids)?;
            h = gru_cell(&x, &h, gru, None)?;
        }
        Ok(h)
    }

    /// Encode a same-length batch to sentence vectors [n, D]. Uni mode is the
    /// forward GRU's final state; bi concatenates the two half-size
    /// directional states; combine-skip concatenates uni and bi.
    fn encode_bound(
        &self,
        g: &Graph,
        enc: &BoundEncoder,
        sentences: &[&TokenizedSentence],
    ) -> Result<Tensor> {
        if sentences.iter().any(|s| s.len() < 2) {
            return Err(StError::EmptySentence);
        }
        let len = sentences[0].len();
        assert!(sentences.iter().all(|s| s.len() == len), "encode batch must be same-length");
        let mut parts: Vec<Tensor> = Vec::new();
        if let Some(uni) = &enc.uni {
            parts.push(Self::run_gru(enc, uni, g, sentences, self.cfg.hidden_enc, false)?);
        }
        if let (Some(fwd), Some(bwd)) = (&enc.fwd, &enc.bwd) {
            let half = self.cfg.hidden_enc / 2;
            parts.push(Self::run_gru(enc, fwd, g, sentences, half, false)?);
            parts.push(Self::run_gru(enc, bwd, g, sentences, half, true)?);
        }
        let refs: Vec<&Tensor> = parts.iter().collect();
        Ok(Tensor::concat_cols(&refs)?)
    }

    /// Sentence vector for one sentence (frozen parameters).
    pub fn encode(&self, sentence: &TokenizedSentence) -> Result<Vec<f64>> {
        let g = Graph::new();
        let enc = self.bind_encoder(&g, false);
        let h = self.encode_bound(&g, &enc, &[sentence])?;
        Ok(h.data())
    }

    /// Encode many sentences (frozen parameters), batching same-length groups
    /// together; results keep the input order.
    pub fn encode_all(&self, sentences: &[TokenizedSentence], batch_size: usize) -> Result<Vec<Vec<f64>>> {
        use std::collections::BTreeMap;
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, s) in sentences.iter().enumerate() {
            groups.entry(s.len()).or_default().push(i);
        }
        let mut out = vec![Vec::new(); sentences.len()];
        for (_, indices) in groups {
            for chunk in indices.chunks(batch_size.max(1)) {
                let g = Graph::new();
                let enc = self.bind_encoder(&g, false);
                let batch: Vec<&TokenizedSentence> = chunk.iter().map(|&i| &sentences[i]).collect();
                let h = self.encode_bound(&g, &enc, &batch)?;
                let data = h.data();
                let d = self.embed_dim();
                for (row, &i) in chunk.iter().enumerate() {
                    out[i] = data[row * d..(row + 1) * d].to_vec();
                }
            }
        }
        Ok(out)
    }

    /// Teacher-forced negative log-likelihood of a same-length batch of
    /// target sentences under one decoder, conditioned on `h_i` [n, D].
    /// Returns the sum over tokens and batch rows.
    fn decoder_nll(
        &self,
        g: &Graph,
        embedding: &Tensor,
        dec: &BoundDecoder,
        targets: &[&TokenizedSentence],
        h_i: &Tensor,
    ) -> crate::tensor::Result<Tensor> {
        let n = targets.len();
        let len = targets[0].len();
        let mut h = g.zeros(&[n, self.cfg.hidden_dec]);
        let mut nll = g.scalar(0.0);
        for t in 1..len {
            let prev_ids: Vec<usize> = targets.iter().map(|s| s.ids[t - 1]).collect();
            let x = embedding.embed_lookup(&prev_ids)?;
            h = gru_cell(&x, &h, &dec.gru, Some((&dec.cond, h_i)))?;
            let logits = h.matmul(&dec.w_out_t)?;
            let probs = logits.softmax();
            let target_ids = std::rc::Rc::new(
                targets.iter().map(|s| s.ids[t]).collect::<Vec<usize>>(),
            );
            let log_p = probs.pick_cols(&target_ids)?.log();
            nll = nll.sub(&log_p.sum_all())?;
        }
        Ok(nll)
    }

    /// Skip-thought objective on a batch of triples whose three lengths are
    /// homogeneous: mean over triples of the summed next- and prev-sentence
    /// negative log-probabilities, conditioned on the current sentence's
    /// vector.
    pub fn st_loss_batch(&self, g: &Graph, batch: &[SentenceTriple], trainable: bool) -> Result<Tensor> {
        assert!(!batch.is_empty());
        let enc = self.bind_encoder(g, trainable);
        let currents: Vec<&TokenizedSentence> = batch.iter().map(|t| &t.current).collect();
        let h_i = self.encode_bound(g, &enc, &currents)?;

        let dec_next = self.dec_next.bind(g, &self.store, trainable);
        let dec_prev = self.dec_prev.bind(g, &self.store, trainable);
        let nexts: Vec<&TokenizedSentence> = batch.iter().map(|t| &t.next).collect();
        let prevs: Vec<&TokenizedSentence> = batch.iter().map(|t| &t.prev).collect();
        let nll_next = self.decoder_nll(g, &enc.embedding, &dec_next, &nexts, &h_i)?;
        let nll_prev = self.decoder_nll(g, &enc.embedding, &dec_prev, &prevs, &h_i)?;
        Ok(nll_next.add(&nll_prev)?.scale(1.0 / batch.len() as f64))
    }

    /// Loss of a single triple (frozen parameters); the per-triple sum of
    /// token negative log-probabilities.
    pub fn st_loss(&self, triple: &SentenceTriple) -> Result<f64> {
        let g = Graph::new();
        let loss = self.st_loss_batch(&g, std::slice::from_ref(triple), false)?;
        Ok(loss.item())
    }

    /// Mean per-triple loss over a triple set (frozen parameters).
    pub fn mean_loss(&self, triples: &[SentenceTriple], rng: &mut Rng) -> Result<f64> {
        if triples.is_empty() {
            return Ok(0.0);
        }
        let batches = crate::corpus::batch_triples(triples, self.cfg.batch_size, rng);
        let mut total = 0.0;
        for batch in &batches {
            let g = Graph::new();
            let loss = self.st_loss_batch(&g, batch, false)?;
            total += loss.item() * batch.len() as f64;
        }
        Ok(total / triples.len() as f64)
    }

    /// Run `epochs` of shuffled same-length-batched Adam training. The
    /// callback fires after every epoch (checkpointing); on a non-finite loss
    /// the parameters roll back to the last finite epoch and training aborts.
    pub fn train(
        &mut self,
        triples: &[SentenceTriple],
        valid: Option<&[SentenceTriple]>,
        seed: u64,
        mut per_epoch: impl FnMut(&SkipThought, &TrainRecord),
    ) -> Result<Vec<TrainRecord>> {
        let mut trainer = StTrainer::new(self, seed);
        let mut curve = Vec::new();
        let mut last_good: Vec<Vec<f64>> =
            self.store.ids().map(|id| self.store.value(id).to_vec()).collect();

        for _ in 0..self.cfg.epochs {
            match trainer.run_epoch(self, triples, valid) {
                Ok(record) => {
                    per_epoch(self, &record);
                    curve.push(record);
                    last_good =
                        self.store.ids().map(|id| self.store.value(id).to_vec()).collect();
                }
                Err(e) => {
                    for (id, good) in
                        self.store.ids().collect::<Vec<_>>().into_iter().zip(last_good)
                    {
                        self.store.set_value(id, good)?;
                    }
                    return Err(e);
                }
            }
        }
        Ok(curve)
    }

    fn bind_next_decoder(&self, g: &Graph) -> (Tensor, BoundDecoder) {
        (g.frozen(&self.store, self.embedding), self.dec_next.bind(g, &self.store, false))
    }

    fn bind_prev_decoder(&self, g: &Graph) -> (Tensor, BoundDecoder) {
        (g.frozen(&self.store, self.embedding), self.dec_prev.bind(g, &self.store, false))
    }

    /// Greedy argmax decode of the next-sentence decoder from a sentence
    /// vector.
    pub fn greedy_next(&self, h_i: &[f64]) -> Result<Decoded> {
        let g = Graph::new();
        let (embedding, dec) = self.bind_next_decoder(&g);
        decode(&g, &embedding, &dec, h_i, self.cfg.hidden_dec, self.cfg.max_decode_len, DecodeMode::Greedy)
    }

    /// Greedy argmax decode of the previous-sentence decoder.
    pub fn greedy_prev(&self, h_i: &[f64]) -> Result<Decoded> {
        let g = Graph::new();
        let (embedding, dec) = self.bind_prev_decoder(&g);
        decode(&g, &embedding, &dec, h_i, self.cfg.hidden_dec, self.cfg.max_decode_len, DecodeMode::Greedy)
    }

    /// Top-k stochastic decode of the next-sentence decoder: at each step,
    /// sample from the softmax restricted to the `beam_width` highest logits,
    /// temperature-scaled. Deterministic given the seed.
    pub fn sample_next(&self, h_i: &[f64], beam_width: usize, temperature: f64, seed: u64) -> Result<Decoded> {
        let g = Graph::new();
        let (embedding, dec) = self.bind_next_decoder(&g);
        let mut rng = Rng::new(seed);
        decode(
            &g,
            &embedding,
            &dec,
            h_i,
            self.cfg.hidden_dec,
            self.cfg.max_decode_len,
            DecodeMode::TopK { k: beam_width.max(1), temperature, rng: &mut rng },
        )
    }

    /// Fraction of triples with `next.body_len() <= max_body_len` whose
    /// greedy next-sentence reconstruction matches the target exactly.
    pub fn reconstruction_rate(&self, triples: &[SentenceTriple], max_body_len: usize) -> Result<f64> {
        let mut eligible = 0usize;
        let mut exact = 0usize;
        for t in triples {
            if t.next.body_len() > max_body_len {
                continue;
            }
            eligible += 1;
            let h = self.encode(&t.current)?;
            let decoded = self.greedy_next(&h)?;
            if decoded.sentence.ids == t.next.ids {
                exact += 1;
            }
        }
        Ok(if eligible == 0 { 0.0 } else { exact as f64 / eligible as f64 })
    }
}

#[derive(Clone, Debug)]
pub struct TrainRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub valid_loss: Option<f64>,
}

/// Incremental epoch-by-epoch training; optimizer moments persist across
/// calls, so stepping this manually reproduces [`SkipThought::train`].
pub struct StTrainer {
    adam: Adam,
    rng: Rng,
    epoch: usize,
}

impl StTrainer {
    pub fn new(model: &SkipThought, seed: u64) -> StTrainer {
        StTrainer {
            adam: Adam::new(&model.store, AdamConfig::with_lr(model.cfg.lr)),
            rng: Rng::new(seed),
            epoch: 0,
        }
    }

    pub fn epochs_done(&self) -> usize {
        self.epoch
    }

    /// One epoch over shuffled same-length batches. Returns the epoch record
    /// or a divergence error (parameters left mid-epoch; callers that need
    /// rollback snapshot first).
    pub fn run_epoch(
        &mut self,
        model: &mut SkipThought,
        triples: &[SentenceTriple],
        valid: Option<&[SentenceTriple]>,
    ) -> Result<TrainRecord> {
        self.epoch += 1;
        let epoch = self.epoch;
        let mut erng = self.rng.fork(epoch as u64);
        let batches = crate::corpus::batch_triples(triples, model.cfg.batch_size, &mut erng);
        crate::logging::debug(format!("epoch {epoch}: {} batches", batches.len()));
        let mut total = 0.0;
        let mut count = 0usize;
        for batch in &batches {
            model.store.zero_grads();
            let g = Graph::new();
            let loss = model.st_loss_batch(&g, batch, true)?;
            let value = loss.item();
            if !value.is_finite() {
                return Err(StError::Diverged(epoch));
            }
            g.backward(&loss).map_err(StError::Tensor)?;
            g.apply_grads(&mut model.store);
            clip_global_norm(&mut model.store, model.cfg.clip_norm)?;
            self.adam.step(&mut model.store)?;
            total += value * batch.len() as f64;
            count += batch.len();
        }
        let train_loss = total / count.max(1) as f64;
        let valid_loss = match valid {
            Some(v) if !v.is_empty() => {
                Some(model.mean_loss(v, &mut self.rng.fork(1_000_000 + epoch as u64))?)
            }
            _ => None,
        };
        Ok(TrainRecord { epoch, train_loss, valid_loss })
    }
}

/// A decoded sentence plus whether the length cap cut it off before `</s>`.
#[derive(Clone, Debug, PartialEq)]
pub struct Decoded {
    pub sentence: TokenizedSentence,
    pub truncated: bool,
}

enum DecodeMode<'a> {
    Greedy,
    TopK { k: usize, temperature: f64, rng: &'a mut Rng },
}

fn argmax(logits: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in logits.iter().enumerate() {
        if v > logits[best] {
            best = i;
        }
    }
    best
}

fn top_k_sample(logits: &[f64], k: usize, temperature: f64, rng: &mut Rng) -> usize {
    if k <= 1 || temperature <= 0.0 {
        return argmax(logits);
    }
    let mut order: Vec<usize> = (0..logits.len()).collect();
    order.sort_by(|&a, &b| logits[b].partial_cmp(&logits[a]).unwrap().then(a.cmp(&b)));
    order.truncate(k);
    let max = logits[order[0]];
    let weights: Vec<f64> = order.iter().map(|&i| ((logits[i] - max) / temperature).exp()).collect();
    let total: f64 = weights.iter().sum();
    let mut draw = rng.uniform() * total;
    for (idx, w) in order.iter().zip(weights.iter()) {
        if draw < *w {
            return *idx;
        }
        draw -= w;
    }
    *order.last().unwrap()
}

fn decode(
    g: &Graph,
    embedding: &Tensor,
    dec: &BoundDecoder,
    h_i: &[f64],
    hidden_dec: usize,
    max_len: usize,
    mut mode: DecodeMode,
) -> Result<Decoded> {
    assert!(max_len >= 1);
    let cond = g.constant(&[1, h_i.len()], h_i.to_vec())?;
    let mut h = g.zeros(&[1, hidden_dec]);
    let mut ids = vec![BOS];
    let mut prev = BOS;
    let mut truncated = true;
    for _ in 0..max_len {
        let (logits, h_next) = decoder_step(prev, &h, &cond, embedding, dec)?;
        h = h_next;
        let row = logits.data();
        let next = match &mut mode {
            DecodeMode::Greedy => argmax(&row),
            DecodeMode::TopK { k, temperature, rng } => top_k_sample(&row, *k, *temperature, rng),
        };
        if next == EOS {
            truncated = false;
            break;
        }
        ids.push(next);
        prev = next;
    }
    ids.push(EOS);
    Ok(Decoded { sentence: TokenizedSentence::new(ids, 0), truncated })
}

// ---------------------------------------------------------------------------
// conditional reconstruction decoder (for composed word-vector embeddings)
// ---------------------------------------------------------------------------

/// A single conditional GRU decoder trained to reproduce a sentence from an
/// externally composed vector (the decoder used with the averaged and extrema
/// word-vector embeddings). Same cell and projection as a skip-thought
/// decoder; the conditioning vector is supplied per sentence.
pub struct CondDecoder {
    pub cfg: SkipThoughtConfig,
    pub vocab_size: usize,
    pub cond_dim: usize,
    pub store: ParamStore,
    embedding: ParamId,
    dec: DecoderIds,
}

impl CondDecoder {
    pub fn new(vocab_size: usize, cond_dim: usize, cfg: SkipThoughtConfig, seed: u64) -> CondDecoder {
        let mut rng = Rng::new(seed);
        let mut store = ParamStore::new();
        let embedding = store.add_recurrent("embedding", &[vocab_size, cfg.word_dim], &mut rng);
        let dec = DecoderIds::add(
            &mut store, "dec", cfg.word_dim, cfg.hidden_dec, cond_dim, vocab_size, &mut rng,
        );
        CondDecoder { cfg, vocab_size, cond_dim, store, embedding, dec }
    }

    fn nll_batch(
        &self,
        g: &Graph,
        batch: &[(Vec<f64>, TokenizedSentence)],
        trainable: bool,
    ) -> Result<Tensor> {
        let n = batch.len();
        let len = batch[0].1.len();
        let embedding = if trainable {
            g.param(&self.store, self.embedding)
        } else {
            g.frozen(&self.store, self.embedding)
        };
        let dec = self.dec.bind(g, &self.store, trainable);
        let mut cond_data = Vec::with_capacity(n * self.cond_dim);
        for (c, _) in batch {
            cond_data.extend_from_slice(c);
        }
        let h_i = g.constant(&[n, self.cond_dim], cond_data)?;
        let mut h = g.zeros(&[n, self.cfg.hidden_dec]);
        let mut nll = g.scalar(0.0);
        for t in 1..len {
            let prev_ids: Vec<usize> = batch.iter().map(|(_, s)| s.ids[t - 1]).collect();
            let x = embedding.embed_lookup(&prev_ids)?;
            h = gru_cell(&x, &h, &dec.gru, Some((&dec.cond, &h_i)))?;
            let probs = h.matmul(&dec.w_out_t)?.softmax();
            let target_ids =
                std::rc::Rc::new(batch.iter().map(|(_, s)| s.ids[t]).collect::<Vec<usize>>());
            nll = nll.sub(&probs.pick_cols(&target_ids)?.log().sum_all())?;
        }
        Ok(nll.scale(1.0 / n as f64))
    }

    /// Train on (conditioning vector, sentence) pairs grouped by sentence
    /// length.
    pub fn train(
        &mut self,
        pairs: &[(Vec<f64>, TokenizedSentence)],
        seed: u64,
        mut per_epoch: impl FnMut(&CondDecoder, &TrainRecord),
    ) -> Result<Vec<TrainRecord>> {
        use std::collections::BTreeMap;
        let rng = Rng::new(seed);
        let mut adam = Adam::new(&self.store, AdamConfig::with_lr(self.cfg.lr));
        let mut curve = Vec::new();
        let mut last_good: Vec<Vec<f64>> =
            self.store.ids().map(|id| self.store.value(id).to_vec()).collect();

        for epoch in 1..=self.cfg.epochs {
            let mut erng = rng.fork(epoch as u64);
            let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for (i, (_, s)) in pairs.iter().enumerate() {
                groups.entry(s.len()).or_default().push(i);
            }
            let mut batches: Vec<Vec<usize>> = Vec::new();
            for (_, mut indices) in groups {
                erng.shuffle(&mut indices);
                for chunk in indices.chunks(self.cfg.batch_size) {
                    batches.push(chunk.to_vec());
                }
            }
            erng.shuffle(&mut batches);

            let mut total = 0.0;
            let mut count = 0usize;
            let mut finite = true;
            for chunk in &batches {
                let batch: Vec<(Vec<f64>, TokenizedSentence)> =
                    chunk.iter().map(|&i| pairs[i].clone()).collect();
                self.store.zero_grads();
                let g = Graph::new();
                let loss = self.nll_batch(&g, &batch, true)?;
                let value = loss.item();
                if !value.is_finite() {
                    finite = false;
                    break;
                }
                g.backward(&loss).map_err(StError::Tensor)?;
                g.apply_grads(&mut self.store);
                clip_global_norm(&mut self.store, self.cfg.clip_norm)?;
                adam.step(&mut self.store)?;
                total += value * batch.len() as f64;
                count += batch.len();
            }
            if !finite {
                for (id, good) in self.store.ids().collect::<Vec<_>>().into_iter().zip(last_good) {
                    self.store.set_value(id, good)?;
                }
                return Err(StError::Diverged(epoch));
            }
            let record =
                TrainRecord { epoch, train_loss: total / count.max(1) as f64, valid_loss: None };
            per_epoch(self, &record);
            curve.push(record);
            last_good = self.store.ids().map(|id| self.store.value(id).to_vec()).collect();
        }
        Ok(curve)
    }

    pub fn greedy(&self, cond: &[f64]) -> Result<Decoded> {
        let g = Graph::new();
        let embedding = g.frozen(&self.store, self.embedding);
        let dec = self.dec.bind(&g, &self.store, false);
        decode(&g, &embedding, &dec, cond, self.cfg.hidden_dec, self.cfg.max_decode_len, DecodeMode::Greedy)
    }

    pub fn sample(&self, cond: &[f64], beam_width: usize, temperature: f64, seed: u64) -> Result<Decoded> {
        let g = Graph::new();
        let embedding = g.frozen(&self.store, self.embedding);
        let dec = self.dec.bind(&g, &self.store, false);
        let mut rng = Rng::new(seed);
        decode(
            &g,
            &embedding,
            &dec,
            cond,
            self.cfg.hidden_dec,
            self.cfg.max_decode_len,
            DecodeMode::TopK { k: beam_width.max(1), temperature, rng: &mut rng },
        )
    }
}
