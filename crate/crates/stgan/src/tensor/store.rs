//! Persistent parameter storage. Graphs are rebuilt every pass; parameters
//! live here between passes, in insertion order (which makes checkpoints and
//! optimizer state deterministic).

use std::collections::HashMap;

use crate::rng::Rng;

use super::{Result, TensorError};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct ParamId(pub(crate) usize);

struct Slot {
    name: String,
    shape: Vec<usize>,
    value: Vec<f64>,
    grad: Option<Vec<f64>>,
}

#[derive(Default)]
pub struct ParamStore {
    slots: Vec<Slot>,
    index: HashMap<String, usize>,
}

impl ParamStore {
    pub fn new() -> Self {
        ParamStore::default()
    }

    pub fn add(&mut self, name: &str, shape: &[usize], value: Vec<f64>) -> ParamId {
        assert_eq!(
            shape.iter().product::<usize>(),
            value.len(),
            "parameter {name}: shape/data mismatch"
        );
        assert!(!self.index.contains_key(name), "duplicate parameter {name}");
        let id = self.slots.len();
        self.index.insert(name.to_string(), id);
        self.slots.push(Slot { name: name.to_string(), shape: shape.to_vec(), value, grad: None });
        ParamId(id)
    }

    /// Recurrent-weight initialization: uniform in [-0.08, 0.08].
    pub fn add_recurrent(&mut self, name: &str, shape: &[usize], rng: &mut Rng) -> ParamId {
        let mut value = vec![0.0; shape.iter().product()];
        rng.fill_uniform(&mut value, -0.08, 0.08);
        self.add(name, shape, value)
    }

    /// Dense-layer initialization: normal with std 1/sqrt(fan_in).
    pub fn add_dense(&mut self, name: &str, shape: &[usize], fan_in: usize, rng: &mut Rng) -> ParamId {
        let mut value = vec![0.0; shape.iter().product()];
        rng.fill_normal(&mut value, 0.0, 1.0 / (fan_in as f64).sqrt());
        self.add(name, shape, value)
    }

    pub fn add_zeros(&mut self, name: &str, shape: &[usize]) -> ParamId {
        self.add(name, shape, vec![0.0; shape.iter().product()])
    }

    pub fn id(&self, name: &str) -> Option<ParamId> {
        self.index.get(name).copied().map(ParamId)
    }

    pub fn count(&self) -> usize {
        self.slots.len()
    }

    /// Parameter ids in insertion order.
    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.slots.len()).map(ParamId)
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.slots[id.0].name
    }

    pub fn shape(&self, id: ParamId) -> &[usize] {
        &self.slots[id.0].shape
    }

    pub fn len(&self, id: ParamId) -> usize {
        self.slots[id.0].value.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn value(&self, id: ParamId) -> &[f64] {
        &self.slots[id.0].value
    }

    pub fn value_mut(&mut self, id: ParamId) -> &mut [f64] {
        &mut self.slots[id.0].value
    }

    pub fn set_value(&mut self, id: ParamId, value: Vec<f64>) -> Result<()> {
        if value.len() != self.slots[id.0].value.len() {
            return Err(TensorError::DataLength {
                shape: self.slots[id.0].shape.clone(),
                need: self.slots[id.0].value.len(),
                got: value.len(),
            });
        }
        self.slots[id.0].value = value;
        Ok(())
    }

    pub fn grad(&self, id: ParamId) -> Option<&[f64]> {
        self.slots[id.0].grad.as_deref()
    }

    pub fn grad_mut(&mut self, id: ParamId) -> Option<&mut [f64]> {
        self.slots[id.0].grad.as_deref_mut()
    }

    /// Clear all gradients (back to "missing").
    pub fn zero_grads(&mut self) {
        for slot in &mut self.slots {
            slot.grad = None;
        }
    }

    pub(crate) fn accumulate_grad(&mut self, id: ParamId, grad: &[f64]) {
        let slot = &mut self.slots[id.0];
        debug_assert_eq!(grad.len(), slot.value.len());
        match &mut slot.grad {
            Some(existing) => {
                for (e, g) in existing.iter_mut().zip(grad.iter()) {
                    *e += g;
                }
            }
            None => slot.grad = Some(grad.to_vec()),
        }
    }

    /// Total number of scalar parameters.
    pub fn scalar_count(&self) -> usize {
        self.slots.iter().map(|s| s.value.len()).sum()
    }
}
