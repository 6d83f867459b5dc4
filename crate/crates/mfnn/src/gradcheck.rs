//! Central finite-difference gradient verification.
//!
//! The checks here recompute losses through the forward path only, so they
//! stay independent of the hand-written backward implementations they are
//! used to verify. Verification runs in `f64`.

use crate::layers::softmax_xent;
use crate::model::MfnnModel;
use crate::tensor::Tensor;

/// Default perturbation step for `f64` checks.
pub const DEFAULT_STEP: f64 = 1e-6;

/// Central difference of a scalar function at each coordinate of `values`.
pub fn fd_grad(loss: &mut dyn FnMut(&[f64]) -> f64, values: &[f64], step: f64) -> Vec<f64> {
    let mut work = values.to_vec();
    (0..values.len())
        .map(|i| {
            let v = values[i];
            work[i] = v + step;
            let plus = loss(&work);
            work[i] = v - step;
            let minus = loss(&work);
            work[i] = v;
            (plus - minus) / (2.0 * step)
        })
        .collect()
}

/// Worst relative error between analytic and numeric gradients.
///
/// The denominator is floored at 1e-3 so that coordinates with near-zero
/// gradients compare on an absolute scale where central differences are
/// accurate to ~1e-9.
pub fn max_rel_err(analytic: &[f64], numeric: &[f64]) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    analytic
        .iter()
        .zip(numeric)
        .map(|(&a, &n)| (a - n).abs() / a.abs().max(n.abs()).max(1e-3))
        .fold(0.0, f64::max)
}

/// Analytic loss gradient of a model on one batch, flattened in parameter
/// declaration order, computed through the backward pass under test.
pub fn model_loss_and_grads(
    model: &mut MfnnModel<f64>,
    x: &Tensor<f64>,
    labels: &[usize],
) -> (f64, Vec<f64>) {
    model.zero_grad();
    let (logits, cache) = model.forward(x).expect("forward");
    let (loss, grad_logits, _) = softmax_xent(&logits, labels).expect("loss");
    model.backward(&cache, &grad_logits).expect("backward");
    let mut grads = Vec::new();
    model.visit_params_mut(&mut |_, _, g| grads.extend_from_slice(g));
    (loss, grads)
}

/// Check every parameter gradient of a model against central differences.
/// Returns the worst relative error across all parameters.
pub fn check_model_gradients(model: &mut MfnnModel<f64>, x: &Tensor<f64>, labels: &[usize], step: f64) -> f64 {
    let (_, analytic) = model_loss_and_grads(model, x, labels);

    let mut flat = Vec::new();
    model.visit_params_mut(&mut |_, p, _| flat.extend_from_slice(p));

    let mut worst = 0.0f64;
    let mut offset = 0usize;
    // walk tensors in the same order the analytic gradients were collected
    let mut spans = Vec::new();
    model.visit_params_mut(&mut |name, p, _| spans.push((name.to_string(), p.len())));
    for (_, len) in &spans {
        let len = *len;
        for i in 0..len {
            let idx = offset + i;
            let orig = flat[idx];
            let mut eval = |v: f64| {
                set_param(model, idx, v);
                let logits = model.infer(x).expect("forward");
                let (loss, _, _) = softmax_xent(&logits, labels).expect("loss");
                loss
            };
            let plus = eval(orig + step);
            let minus = eval(orig - step);
            set_param(model, idx, orig);
            let numeric = (plus - minus) / (2.0 * step);
            let a = analytic[idx];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-3);
            worst = worst.max(rel);
        }
        offset += len;
    }
    worst
}

fn set_param(model: &mut MfnnModel<f64>, flat_index: usize, value: f64) {
    let mut cursor = 0usize;
    model.visit_params_mut(&mut |_, p, _| {
        if flat_index >= cursor && flat_index < cursor + p.len() {
            p[flat_index - cursor] = value;
        }
        cursor += p.len();
    });
}
