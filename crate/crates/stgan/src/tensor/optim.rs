//! Adam with bias correction, and global-norm gradient clipping.

use super::store::ParamStore;
use super::{Result, TensorError};

#[derive(Clone, Copy, Debug)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamConfig {
    pub fn with_lr(lr: f64) -> Self {
        AdamConfig { lr, ..AdamConfig::default() }
    }
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig { lr: 1e-3, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

/// Optimizer state for one [`ParamStore`]; moment buffers are kept in the
/// store's parameter order.
pub struct Adam {
    pub cfg: AdamConfig,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: u64,
}

impl Adam {
    pub fn new(store: &ParamStore, cfg: AdamConfig) -> Self {
        let m = store.ids().map(|id| vec![0.0; store.len(id)]).collect::<Vec<_>>();
        let v = m.clone();
        Adam { cfg, m, v, t: 0 }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    /// One Adam update over every parameter in the store. Gradients are left
    /// untouched. Errors if any parameter has no gradient.
    pub fn step(&mut self, store: &mut ParamStore) -> Result<()> {
        assert_eq!(self.m.len(), store.count(), "optimizer/store mismatch");
        for id in store.ids() {
            if store.grad(id).is_none() {
                return Err(TensorError::MissingGrad(store.name(id).to_string()));
            }
        }
        self.t += 1;
        let t = self.t as i32;
        let bc1 = 1.0 - self.cfg.beta1.powi(t);
        let bc2 = 1.0 - self.cfg.beta2.powi(t);
        for id in store.ids() {
            let grad = store.grad(id).expect("checked above").to_vec();
            let m = &mut self.m[id.0];
            let v = &mut self.v[id.0];
            let value = store.value_mut(id);
            for i in 0..grad.len() {
                let g = grad[i];
                m[i] = self.cfg.beta1 * m[i] + (1.0 - self.cfg.beta1) * g;
                v[i] = self.cfg.beta2 * v[i] + (1.0 - self.cfg.beta2) * g * g;
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                value[i] -= self.cfg.lr * m_hat / (v_hat.sqrt() + self.cfg.epsilon);
            }
        }
        Ok(())
    }
}

/// Scale all gradients so their joint L2 norm is at most `max_norm`.
/// Returns the pre-clip norm. Parameters without gradients are skipped.
pub fn clip_global_norm(store: &mut ParamStore, max_norm: f64) -> Result<f64> {
    assert!(max_norm > 0.0, "clip bound must be positive");
    let mut sq = 0.0;
    for id in store.ids().collect::<Vec<_>>() {
        if let Some(grad) = store.grad(id) {
            for &g in grad {
                if !g.is_finite() {
                    return Err(TensorError::NonFinite("gradient"));
                }
                sq += g * g;
            }
        }
    }
    let norm = sq.sqrt();
    if norm > max_norm {
        let scale = max_norm / norm;
        for id in store.ids().collect::<Vec<_>>() {
            if let Some(grad) = store.grad_mut(id) {
                for g in grad.iter_mut() {
                    *g *= scale;
                }
            }
        }
    }
    Ok(norm)
}

/// Clamp every parameter value to [-bound, bound] (Wasserstein critic without
/// gradient penalty).
pub fn clamp_params(store: &mut ParamStore, bound: f64) {
    for id in store.ids().collect::<Vec<_>>() {
        for v in store.value_mut(id).iter_mut() {
            *v = v.clamp(-bound, bound);
        }
    }
}
