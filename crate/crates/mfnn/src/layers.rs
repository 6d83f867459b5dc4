//! Differentiable layer wrappers with gradient accumulation.
//!
//! Parameterized layers (`Conv1dLayer`, `DenseLayer`, `EasLayer`) own their
//! parameters and same-shaped gradient accumulators. `backward` takes the
//! forward input back as its cache, adds the parameter gradients into the
//! accumulators, and returns the input gradient. Accumulators are zeroed
//! explicitly at the start of each optimization step; two backward passes
//! without zeroing therefore accumulate.
//!
//! Stateless operations (ReLU, flatten, channel concat/split, residual add)
//! are free functions.

use crate::activation::{eas_backward, eas_forward, EasParams};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::{
    conv1d, conv1d_backward, dense, dense_backward, Padding, Shape3,
    Tensor,
};
use rand::Rng;

fn kaiming_uniform<T: Scalar, R: Rng + ?Sized>(shape: Vec<usize>, fan_in: usize, rng: &mut R) -> Tensor<T> {
    let bound = (6.0 / fan_in as f64).sqrt();
    let numel: usize = shape.iter().product();
    let data = (0..numel).map(|_| T::uniform(rng, -bound, bound)).collect();
    Tensor::new(shape, data).expect("shape/data constructed consistently")
}

fn bias_uniform<T: Scalar, R: Rng + ?Sized>(len: usize, fan_in: usize, rng: &mut R) -> Tensor<T> {
    let bound = 1.0 / (fan_in as f64).sqrt();
    let data = (0..len).map(|_| T::uniform(rng, -bound, bound)).collect();
    Tensor::new(vec![len], data).expect("shape/data constructed consistently")
}

/// 1-D convolution layer (cross-correlation semantics).
#[derive(Debug, Clone)]
pub struct Conv1dLayer<T> {
    pub weight: Tensor<T>,
    pub bias: Tensor<T>,
    pub grad_weight: Tensor<T>,
    pub grad_bias: Tensor<T>,
    pub stride: usize,
    pub padding: Padding,
}

impl<T: Scalar> Conv1dLayer<T> {
    /// Fan-in scaled uniform initialization, drawn in declaration order
    /// (weight then bias) so construction is deterministic per seed.
    pub fn init<R: Rng + ?Sized>(
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        stride: usize,
        padding: Padding,
        rng: &mut R,
    ) -> Self {
        let fan_in = in_channels * kernel;
        let weight = kaiming_uniform(vec![out_channels, in_channels, kernel], fan_in, rng);
        let bias = bias_uniform(out_channels, fan_in, rng);
        Conv1dLayer {
            grad_weight: Tensor::zeros(weight.shape().to_vec()),
            grad_bias: Tensor::zeros(bias.shape().to_vec()),
            weight,
            bias,
            stride,
            padding,
        }
    }

    pub fn forward(&self, input: &Tensor<T>) -> Result<Tensor<T>> {
        conv1d(input, &self.weight, &self.bias, self.stride, self.padding)
    }

    /// Accumulates parameter gradients and returns the input gradient.
    /// `input` is the tensor passed to the matching `forward` call.
    pub fn backward(&mut self, input: &Tensor<T>, upstream: &Tensor<T>) -> Result<Tensor<T>> {
        let (gx, gw, gb) =
            conv1d_backward(input, &self.weight, upstream, self.stride, self.padding)?;
        accumulate(&mut self.grad_weight, &gw);
        accumulate(&mut self.grad_bias, &gb);
        Ok(gx)
    }

    pub fn zero_grad(&mut self) {
        self.grad_weight.data_mut().fill(T::zero());
        self.grad_bias.data_mut().fill(T::zero());
    }
}

/// Fully connected layer.
#[derive(Debug, Clone)]
pub struct DenseLayer<T> {
    pub weight: Tensor<T>,
    pub bias: Tensor<T>,
    pub grad_weight: Tensor<T>,
    pub grad_bias: Tensor<T>,
}

impl<T: Scalar> DenseLayer<T> {
    pub fn init<R: Rng + ?Sized>(in_features: usize, out_features: usize, rng: &mut R) -> Self {
        let weight = kaiming_uniform(vec![in_features, out_features], in_features, rng);
        let bias = bias_uniform(out_features, in_features, rng);
        DenseLayer {
            grad_weight: Tensor::zeros(weight.shape().to_vec()),
            grad_bias: Tensor::zeros(bias.shape().to_vec()),
            weight,
            bias,
        }
    }

    pub fn forward(&self, input: &Tensor<T>) -> Result<Tensor<T>> {
        dense(input, &self.weight, &self.bias)
    }

    pub fn backward(&mut self, input: &Tensor<T>, upstream: &Tensor<T>) -> Result<Tensor<T>> {
        let (gx, gw, gb) = dense_backward(input, &self.weight, upstream)?;
        accumulate(&mut self.grad_weight, &gw);
        accumulate(&mut self.grad_bias, &gb);
        Ok(gx)
    }

    pub fn zero_grad(&mut self) {
        self.grad_weight.data_mut().fill(T::zero());
        self.grad_bias.data_mut().fill(T::zero());
    }
}

/// EAS activation layer with trainable per-channel frequency and phase.
#[derive(Debug, Clone)]
pub struct EasLayer<T> {
    pub params: EasParams<T>,
    pub grad_omega: Vec<T>,
    pub grad_phi: Vec<T>,
}

impl<T: Scalar> EasLayer<T> {
    pub fn init<R: Rng + ?Sized>(channels: usize, rng: &mut R) -> Self {
        EasLayer {
            params: EasParams::init(channels, rng),
            grad_omega: vec![T::zero(); channels],
            grad_phi: vec![T::zero(); channels],
        }
    }

    pub fn forward(&self, input: &Tensor<T>) -> Result<Tensor<T>> {
        eas_forward(input, &self.params)
    }

    pub fn backward(&mut self, input: &Tensor<T>, upstream: &Tensor<T>) -> Result<Tensor<T>> {
        let (gx, go, gp) = eas_backward(input, &self.params, upstream)?;
        for (acc, g) in self.grad_omega.iter_mut().zip(go) {
            *acc += g;
        }
        for (acc, g) in self.grad_phi.iter_mut().zip(gp) {
            *acc += g;
        }
        Ok(gx)
    }

    pub fn zero_grad(&mut self) {
        self.grad_omega.fill(T::zero());
        self.grad_phi.fill(T::zero());
    }
}

/// Activation slot that is EAS in the standard model and ReLU in the
/// all-ReLU ablation; shapes are identical either way.
#[derive(Debug, Clone)]
pub enum ActLayer<T> {
    Eas(EasLayer<T>),
    Relu,
}

impl<T: Scalar> ActLayer<T> {
    pub fn forward(&self, input: &Tensor<T>) -> Result<Tensor<T>> {
        match self {
            ActLayer::Eas(layer) => layer.forward(input),
            ActLayer::Relu => Ok(relu(input)),
        }
    }

    pub fn backward(&mut self, input: &Tensor<T>, upstream: &Tensor<T>) -> Result<Tensor<T>> {
        match self {
            ActLayer::Eas(layer) => layer.backward(input, upstream),
            ActLayer::Relu => relu_backward(input, upstream),
        }
    }

    pub fn zero_grad(&mut self) {
        if let ActLayer::Eas(layer) = self {
            layer.zero_grad();
        }
    }
}

fn accumulate<T: Scalar>(acc: &mut Tensor<T>, delta: &Tensor<T>) {
    debug_assert_eq!(acc.shape(), delta.shape());
    for (a, &d) in acc.data_mut().iter_mut().zip(delta.data()) {
        *a += d;
    }
}

/// Elementwise `max(x, 0)`.
pub fn relu<T: Scalar>(input: &Tensor<T>) -> Tensor<T> {
    let mut out = input.clone();
    for v in out.data_mut() {
        if *v < T::zero() {
            *v = T::zero();
        }
    }
    out
}

/// ReLU gradient: upstream where the forward input was strictly positive.
pub fn relu_backward<T: Scalar>(input: &Tensor<T>, upstream: &Tensor<T>) -> Result<Tensor<T>> {
    if input.shape() != upstream.shape() {
        return Err(Error::shape(
            "relu_backward",
            format!("{:?}", input.shape()),
            format!("{:?}", upstream.shape()),
        ));
    }
    let mut out = upstream.clone();
    for (g, &x) in out.data_mut().iter_mut().zip(input.data()) {
        if x <= T::zero() {
            *g = T::zero();
        }
    }
    Ok(out)
}

/// `[B, C, L]` → `[B, C·L]`, channel-major then length (the row-major order
/// of the buffer). Checkpoint compatibility depends on this ordering.
pub fn flatten<T: Scalar>(input: &Tensor<T>) -> Result<Tensor<T>> {
    let s = input.shape3()?;
    input.clone().reshape(vec![s.batch, s.channels * s.length])
}

/// Inverse of [`flatten`] for the backward pass.
pub fn unflatten<T: Scalar>(upstream: &Tensor<T>, shape: Shape3) -> Result<Tensor<T>> {
    upstream
        .clone()
        .reshape(vec![shape.batch, shape.channels, shape.length])
}

/// Concatenate along the channel axis; all inputs must share batch and length.
pub fn concat_channels<T: Scalar>(parts: &[&Tensor<T>]) -> Result<Tensor<T>> {
    if parts.is_empty() {
        return Err(Error::invalid("concat_channels", "no inputs"));
    }
    let first = parts[0].shape3()?;
    let mut channels = 0usize;
    for p in parts {
        let s = p.shape3()?;
        if s.batch != first.batch || s.length != first.length {
            return Err(Error::shape(
                "concat_channels",
                format!("batch {} and length {}", first.batch, first.length),
                format!("{s}"),
            ));
        }
        channels += s.channels;
    }
    let mut out = Tensor::zeros(vec![first.batch, channels, first.length]);
    let od = out.data_mut();
    for b in 0..first.batch {
        let mut c_off = 0usize;
        for p in parts {
            let s = p.shape3().expect("validated above");
            let src = &p.data()[b * s.channels * s.length..][..s.channels * s.length];
            let dst = &mut od[(b * channels + c_off) * first.length..][..s.channels * s.length];
            dst.copy_from_slice(src);
            c_off += s.channels;
        }
    }
    Ok(out)
}

/// Split an upstream gradient back into per-part channel blocks.
pub fn split_channels<T: Scalar>(upstream: &Tensor<T>, channel_counts: &[usize]) -> Result<Vec<Tensor<T>>> {
    let s = upstream.shape3()?;
    let total: usize = channel_counts.iter().sum();
    if total != s.channels {
        return Err(Error::shape(
            "split_channels",
            format!("{total} channels"),
            format!("{}", s.channels),
        ));
    }
    let mut parts: Vec<Tensor<T>> = channel_counts
        .iter()
        .map(|&c| Tensor::zeros(vec![s.batch, c, s.length]))
        .collect();
    for b in 0..s.batch {
        let mut c_off = 0usize;
        for (part, &c) in parts.iter_mut().zip(channel_counts) {
            let src = &upstream.data()[(b * s.channels + c_off) * s.length..][..c * s.length];
            part.data_mut()[b * c * s.length..][..c * s.length].copy_from_slice(src);
            c_off += c;
        }
    }
    Ok(parts)
}

/// Elementwise sum of two same-shaped tensors (the residual join).
/// Its backward routes the upstream gradient to both summands unchanged.
pub fn add<T: Scalar>(a: &Tensor<T>, b: &Tensor<T>) -> Result<Tensor<T>> {
    if a.shape() != b.shape() {
        return Err(Error::shape(
            "add",
            format!("{:?}", a.shape()),
            format!("{:?}", b.shape()),
        ));
    }
    let mut out = a.clone();
    for (o, &v) in out.data_mut().iter_mut().zip(b.data()) {
        *o += v;
    }
    Ok(out)
}

/// Row-wise softmax with per-row max subtraction.
pub fn softmax<T: Scalar>(logits: &Tensor<T>) -> Result<Tensor<T>> {
    let (batch, classes) = logits.shape2()?;
    let mut probs = logits.clone();
    let pd = probs.data_mut();
    for b in 0..batch {
        let row = &mut pd[b * classes..][..classes];
        let max = row.iter().fold(T::neg_infinity(), |m, &v| m.max(v));
        let mut sum = T::zero();
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v = *v / sum;
        }
    }
    Ok(probs)
}

/// Softmax + cross-entropy head.
///
/// Returns `(loss, grad_logits, probs)` where the loss is the batch mean of
/// `-log p[label]` and `grad_logits = (probs - onehot) / B`.
pub fn softmax_xent<T: Scalar>(
    logits: &Tensor<T>,
    labels: &[usize],
) -> Result<(T, Tensor<T>, Tensor<T>)> {
    let (batch, classes) = logits.shape2()?;
    if classes < 2 {
        return Err(Error::invalid("softmax_xent", "need at least 2 classes"));
    }
    if labels.len() != batch {
        return Err(Error::shape(
            "softmax_xent",
            format!("{batch} labels"),
            format!("{}", labels.len()),
        ));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= classes) {
        return Err(Error::invalid(
            "softmax_xent",
            format!("label {bad} out of range for {classes} classes"),
        ));
    }
    let probs = softmax(logits)?;
    let inv_b = T::one() / T::from_usize(batch).unwrap();
    let mut grad = probs.clone();
    let gd = grad.data_mut();
    let mut loss = T::zero();
    for (b, &label) in labels.iter().enumerate() {
        let p = probs.data()[b * classes + label];
        loss -= p.ln();
        gd[b * classes + label] -= T::one();
    }
    loss = loss * inv_b;
    for g in gd.iter_mut() {
        *g *= inv_b;
    }
    if !loss.is_finite() {
        return Err(Error::NonFinite {
            what: "softmax_xent loss".into(),
        });
    }
    Ok((loss, grad, probs))
}
