//! Central finite-difference gradient checking.
//!
//! The harness owns the loop over parameters so every module can verify its
//! loss functions against the same independent oracle: perturb one scalar,
//! rebuild the forward pass from scratch, difference the two losses.

use crate::rng::Rng;

use super::store::ParamStore;
use super::{Graph, Result, Tensor};

#[derive(Debug, Clone)]
pub struct FdReport {
    pub max_rel_err: f64,
    /// "param_name[index]" of the worst element.
    pub worst: String,
    pub elements_checked: usize,
}

/// Compare analytic gradients of a scalar loss against central finite
/// differences with step `h`.
///
/// `build_loss` must construct the loss from the store's *current* values;
/// it is re-run for every perturbation. At most `max_per_param` elements per
/// parameter are probed (chosen deterministically from `rng`); pass
/// `usize::MAX` to probe everything.
///
/// Relative error uses a 1e-4 denominator floor so that finite-difference
/// noise on near-zero gradients does not register as disagreement.
pub fn finite_difference_check<F>(
    store: &mut ParamStore,
    build_loss: F,
    h: f64,
    max_per_param: usize,
    rng: &mut Rng,
) -> Result<FdReport>
where
    F: Fn(&Graph, &ParamStore) -> Result<Tensor>,
{
    store.zero_grads();
    let graph = Graph::new();
    let loss = build_loss(&graph, store)?;
    graph.backward(&loss)?;
    graph.apply_grads(store);

    let analytic: Vec<Vec<f64>> = store
        .ids()
        .map(|id| store.grad(id).expect("bound parameter missing gradient").to_vec())
        .collect();

    let mut report = FdReport { max_rel_err: 0.0, worst: String::new(), elements_checked: 0 };

    for id in store.ids().collect::<Vec<_>>() {
        let len = store.len(id);
        let indices: Vec<usize> = if len <= max_per_param {
            (0..len).collect()
        } else {
            let mut picked = Vec::with_capacity(max_per_param);
            for _ in 0..max_per_param {
                picked.push(rng.below(len));
            }
            picked.sort_unstable();
            picked.dedup();
            picked
        };

        for i in indices {
            let original = store.value(id)[i];

            store.value_mut(id)[i] = original + h;
            let plus = build_loss(&Graph::new(), store)?.item();
            store.value_mut(id)[i] = original - h;
            let minus = build_loss(&Graph::new(), store)?.item();
            store.value_mut(id)[i] = original;

            let numeric = (plus - minus) / (2.0 * h);
            let a = analytic[id.0][i];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-4);
            report.elements_checked += 1;
            if rel > report.max_rel_err {
                report.max_rel_err = rel;
                report.worst = format!("{}[{}]", store.name(id), i);
            }
        }
    }
    Ok(report)
}
