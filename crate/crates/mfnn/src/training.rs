//! Adam optimization and the training loop.
//!
//! Training is deterministic given the seeds: parameter initialization comes
//! from the model config seed, shuffling from the train config seed. The
//! learning rate follows step decay (`lr0 · factor^floor(epoch/every)`),
//! applied at epoch boundaries. The checkpoint with the best validation
//! accuracy is retained and used for the final test evaluation; the
//! last-epoch test accuracy is reported alongside it.

use crate::error::{Error, Result};
use crate::layers::softmax_xent;
use crate::model::{MfnnModel, ModelConfig};
use crate::scalar::Scalar;
use crate::signals::generator::mix_seed;
use crate::signals::{SignalDataset, SplitDataset};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

/// Optimization hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    /// Initial learning rate.
    pub lr0: f64,
    /// Multiplicative decay applied every `decay_every` epochs.
    pub decay_factor: f64,
    pub decay_every: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Seed for shuffling and batching.
    pub seed: u64,
    /// Number of repeated runs for seed-averaged results.
    pub num_runs: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 32,
            epochs: 100,
            lr0: 1e-3,
            decay_factor: 0.5,
            decay_every: 30,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            seed: 0,
            num_runs: 5,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::invalid("TrainConfig", "batch_size must be >= 1"));
        }
        if !(self.decay_factor > 0.0 && self.decay_factor <= 1.0) {
            return Err(Error::invalid("TrainConfig", "decay_factor must be in (0, 1]"));
        }
        if self.decay_every == 0 {
            return Err(Error::invalid("TrainConfig", "decay_every must be >= 1"));
        }
        Ok(())
    }
}

/// Learning rate at a given epoch: `lr0 · decay_factor^floor(epoch/decay_every)`.
pub fn lr_at(epoch: usize, cfg: &TrainConfig) -> f64 {
    cfg.lr0 * cfg.decay_factor.powi((epoch / cfg.decay_every) as i32)
}

// ── Adam ───────────────────────────────────────────────────────────

/// Adam state: first/second moment per parameter tensor plus the shared
/// step counter for bias correction.
pub struct Adam<T> {
    m: Vec<Vec<T>>,
    v: Vec<Vec<T>>,
    t: u64,
    beta1: f64,
    beta2: f64,
    eps: f64,
}

impl<T: Scalar> Adam<T> {
    pub fn new<M>(model: &mut MfnnModel<M>, cfg: &TrainConfig) -> Self
    where
        M: Scalar,
    {
        let mut sizes = Vec::new();
        model.visit_params_mut(&mut |_, p, _| sizes.push(p.len()));
        Adam {
            m: sizes.iter().map(|&n| vec![T::zero(); n]).collect(),
            v: sizes.iter().map(|&n| vec![T::zero(); n]).collect(),
            t: 0,
            beta1: cfg.beta1,
            beta2: cfg.beta2,
            eps: cfg.eps,
        }
    }

    /// One Adam step over every parameter tensor, followed by the EAS
    /// constraint projection. Zero gradients with fresh state leave the
    /// parameters exactly unchanged, as does a zero learning rate.
    pub fn step(&mut self, model: &mut MfnnModel<T>, lr: f64) -> Result<()> {
        self.t += 1;
        let b1 = T::of_f64(self.beta1);
        let b2 = T::of_f64(self.beta2);
        let one_minus_b1 = T::of_f64(1.0 - self.beta1);
        let one_minus_b2 = T::of_f64(1.0 - self.beta2);
        let bias1 = T::of_f64(1.0 - self.beta1.powi(self.t as i32));
        let bias2 = T::of_f64(1.0 - self.beta2.powi(self.t as i32));
        let lr_t = T::of_f64(lr);
        let eps = T::of_f64(self.eps);
        let mut tensor_idx = 0usize;
        let mut failure: Option<Error> = None;
        let (m, v) = (&mut self.m, &mut self.v);
        model.visit_params_mut(&mut |name, params, grads| {
            if failure.is_some() {
                tensor_idx += 1;
                return;
            }
            if grads.iter().any(|g| !g.is_finite()) {
                failure = Some(Error::NonFinite {
                    what: format!("gradient of `{name}`"),
                });
                tensor_idx += 1;
                return;
            }
            let m = &mut m[tensor_idx];
            let v = &mut v[tensor_idx];
            for i in 0..params.len() {
                let g = grads[i];
                m[i] = b1 * m[i] + one_minus_b1 * g;
                v[i] = b2 * v[i] + one_minus_b2 * g * g;
                let m_hat = m[i] / bias1;
                let v_hat = v[i] / bias2;
                params[i] = params[i] - lr_t * m_hat / (v_hat.sqrt() + eps);
            }
            tensor_idx += 1;
        });
        if let Some(e) = failure {
            return Err(e);
        }
        model.project_constraints();
        Ok(())
    }
}

// ── Evaluation ─────────────────────────────────────────────────────

/// Argmax with ties broken toward the lowest class index.
pub fn argmax_row<T: Scalar>(row: &[T]) -> usize {
    let mut best = 0usize;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// Accuracy and K×K confusion matrix (`confusion[true][predicted]`).
pub fn accuracy_and_confusion(preds: &[usize], labels: &[usize], k: usize) -> (f64, Vec<Vec<u64>>) {
    let mut confusion = vec![vec![0u64; k]; k];
    let mut correct = 0u64;
    for (&p, &l) in preds.iter().zip(labels) {
        confusion[l][p] += 1;
        if p == l {
            correct += 1;
        }
    }
    let acc = if preds.is_empty() {
        0.0
    } else {
        correct as f64 / preds.len() as f64
    };
    (acc, confusion)
}

/// Run the model over a dataset and report accuracy plus confusion matrix.
pub fn evaluate<T: Scalar>(model: &MfnnModel<T>, data: &SignalDataset) -> Result<(f64, Vec<Vec<u64>>)> {
    let k = model.config.num_classes;
    let mut preds = Vec::with_capacity(data.n_windows);
    let chunk = 64usize;
    let mut start = 0usize;
    while start < data.n_windows {
        let end = (start + chunk).min(data.n_windows);
        let indices: Vec<usize> = (start..end).collect();
        let batch = data.batch::<T>(&indices);
        let logits = model.infer(&batch)?;
        let (_, classes) = logits.shape2()?;
        for b in 0..indices.len() {
            preds.push(argmax_row(&logits.data()[b * classes..(b + 1) * classes]));
        }
        start = end;
    }
    let labels: Vec<usize> = data.labels.iter().map(|&l| l as usize).collect();
    Ok(accuracy_and_confusion(&preds, &labels, k))
}

// ── Training loop ──────────────────────────────────────────────────

/// Per-epoch statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub lr: f64,
    pub train_loss: f64,
    pub val_acc: f64,
    pub wall_ms: f64,
}

/// Outcome of one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub model_seed: u64,
    pub train_seed: u64,
    pub epochs: Vec<EpochStats>,
    pub best_val_epoch: usize,
    pub best_val_acc: f64,
    /// Test accuracy of the best-validation checkpoint.
    pub test_acc: f64,
    /// Test accuracy of the last-epoch weights, reported alongside.
    pub last_epoch_test_acc: f64,
    /// Confusion matrix of the best-validation checkpoint on the test set.
    pub confusion: Vec<Vec<u64>>,
}

impl RunReport {
    pub fn final_train_loss(&self) -> f64 {
        self.epochs.last().map(|e| e.train_loss).unwrap_or(f64::NAN)
    }
}

fn epoch_order(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    idx
}

/// Train a model on an already-split dataset.
///
/// Shuffling, batching, and initialization all derive from the seeds; two
/// runs with identical seeds produce identical reports (bitwise in f64).
/// The last incomplete batch is trained on. A non-finite loss aborts.
///
/// `model` holds the last-epoch weights afterwards; the returned model is
/// the retained best-validation checkpoint the test numbers come from.
pub fn train<T: Scalar>(
    model: &mut MfnnModel<T>,
    data: &SplitDataset,
    cfg: &TrainConfig,
) -> Result<(RunReport, MfnnModel<T>)> {
    cfg.validate()?;
    for (name, split) in [("train", &data.train), ("val", &data.val), ("test", &data.test)] {
        if split.n_windows == 0 {
            return Err(Error::invalid("train", format!("{name} split is empty")));
        }
    }
    let n_train = data.train.n_windows;
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(cfg.seed, 0x7A17, 0));
    let mut adam = Adam::<T>::new(model, cfg);
    let mut epochs = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(usize, f64, MfnnModel<T>)> = None;

    for epoch in 0..cfg.epochs {
        let started = Instant::now();
        let lr = lr_at(epoch, cfg);
        let order = epoch_order(n_train, &mut rng);
        let mut loss_sum = 0.0f64;
        for batch_indices in order.chunks(cfg.batch_size) {
            let x = data.train.batch::<T>(batch_indices);
            let labels = data.train.labels_usize(batch_indices);
            model.zero_grad();
            let (logits, cache) = model.forward(&x)?;
            let (loss, grad_logits, _) = softmax_xent(&logits, &labels)?;
            let loss = loss.as_f64();
            if !loss.is_finite() {
                return Err(Error::NonFinite {
                    what: format!("training loss at epoch {epoch}"),
                });
            }
            loss_sum += loss * batch_indices.len() as f64;
            model.backward(&cache, &grad_logits)?;
            adam.step(model, lr)?;
        }
        let train_loss = loss_sum / n_train as f64;
        let (val_acc, _) = evaluate(model, &data.val)?;
        let improved = match &best {
            None => true,
            Some((_, best_acc, _)) => val_acc > *best_acc,
        };
        if improved {
            best = Some((epoch, val_acc, model.clone()));
        }
        epochs.push(EpochStats {
            epoch,
            lr,
            train_loss,
            val_acc,
            wall_ms: started.elapsed().as_secs_f64() * 1e3,
        });
    }

    let (best_val_epoch, best_val_acc, best_model) = best.expect("at least one epoch");
    let (last_epoch_test_acc, _) = evaluate(model, &data.test)?;
    let (test_acc, confusion) = evaluate(&best_model, &data.test)?;
    Ok((
        RunReport {
            model_seed: model.config.seed,
            train_seed: cfg.seed,
            epochs,
            best_val_epoch,
            best_val_acc,
            test_acc,
            last_epoch_test_acc,
            confusion,
        },
        best_model,
    ))
}

/// Train `cfg.num_runs` models with derived seeds on the same splits;
/// reports come back in run order.
pub fn train_runs<T: Scalar>(
    model_cfg: &ModelConfig,
    data: &SplitDataset,
    cfg: &TrainConfig,
) -> Result<Vec<RunReport>> {
    let mut reports = Vec::with_capacity(cfg.num_runs);
    for run in 0..cfg.num_runs {
        let mut model = MfnnModel::<T>::new(ModelConfig {
            seed: model_cfg.seed.wrapping_add(run as u64),
            ..model_cfg.clone()
        })?;
        let run_cfg = TrainConfig {
            seed: cfg.seed.wrapping_add(run as u64),
            ..cfg.clone()
        };
        reports.push(train(&mut model, data, &run_cfg)?.0);
    }
    Ok(reports)
}

// ── Report serialization ───────────────────────────────────────────

/// Key-value text form of a run report.
pub fn report_text(report: &RunReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("model_seed={}\n", report.model_seed));
    out.push_str(&format!("train_seed={}\n", report.train_seed));
    out.push_str(&format!("epochs={}\n", report.epochs.len()));
    out.push_str(&format!("best_val_epoch={}\n", report.best_val_epoch));
    out.push_str(&format!("best_val_acc={}\n", report.best_val_acc));
    out.push_str(&format!("test_acc_best_val={}\n", report.test_acc));
    out.push_str(&format!("test_acc_last_epoch={}\n", report.last_epoch_test_acc));
    out.push_str(&format!("final_train_loss={}\n", report.final_train_loss()));
    for (i, row) in report.confusion.iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
        out.push_str(&format!("confusion_row_{i}={}\n", cells.join(",")));
    }
    out
}

/// Per-epoch curves as CSV: `epoch,lr,train_loss,val_acc`.
pub fn curves_csv(report: &RunReport) -> String {
    let mut out = String::from("epoch,lr,train_loss,val_acc\n");
    for e in &report.epochs {
        out.push_str(&format!("{},{},{},{}\n", e.epoch, e.lr, e.train_loss, e.val_acc));
    }
    out
}
