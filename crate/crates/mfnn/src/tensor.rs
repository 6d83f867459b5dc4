//! Dense tensor substrate and the raw numeric primitives all layers build on.
//!
//! Tensors are row-major contiguous buffers with an explicit shape. The three
//! primitives here — 1-D cross-correlation, non-overlapping average pooling,
//! and the dense (affine) product — are pure functions over immutable inputs
//! and are safe to call concurrently. Every output element is accumulated in
//! a fixed traversal order (input-channel major, then kernel tap, batch
//! ascending for reductions), so results do not depend on how callers
//! partition the batch across threads.
//!
//! In debug builds every primitive checks its output for NaN/Inf.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense n-dimensional array, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T> {
    shape: Vec<usize>,
    data: Vec<T>,
}

/// Batch/channels/length view of a rank-3 shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape3 {
    pub batch: usize,
    pub channels: usize,
    pub length: usize,
}

impl std::fmt::Display for Shape3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}, {}]", self.batch, self.channels, self.length)
    }
}

impl<T: Scalar> Tensor<T> {
    /// Build a tensor from a shape and matching data buffer.
    pub fn new(shape: Vec<usize>, data: Vec<T>) -> Result<Self> {
        let numel: usize = shape.iter().product();
        if shape.iter().any(|&d| d == 0) {
            return Err(Error::invalid("Tensor::new", "zero-sized dimension"));
        }
        if numel != data.len() {
            return Err(Error::shape(
                "Tensor::new",
                format!("{numel} elements for shape {shape:?}"),
                format!("{} elements", data.len()),
            ));
        }
        Ok(Tensor { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let numel: usize = shape.iter().product();
        Tensor {
            shape,
            data: vec![T::zero(); numel],
        }
    }

    pub fn full(shape: Vec<usize>, value: T) -> Self {
        let numel: usize = shape.iter().product();
        Tensor {
            shape,
            data: vec![value; numel],
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn numel(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    /// Interpret as `[batch, channels, length]`.
    pub fn shape3(&self) -> Result<Shape3> {
        match self.shape.as_slice() {
            &[batch, channels, length] => Ok(Shape3 {
                batch,
                channels,
                length,
            }),
            other => Err(Error::shape(
                "Tensor::shape3",
                "rank-3 tensor",
                format!("{other:?}"),
            )),
        }
    }

    /// Interpret as `[rows, cols]`.
    pub fn shape2(&self) -> Result<(usize, usize)> {
        match self.shape.as_slice() {
            &[rows, cols] => Ok((rows, cols)),
            other => Err(Error::shape(
                "Tensor::shape2",
                "rank-2 tensor",
                format!("{other:?}"),
            )),
        }
    }

    /// Reinterpret the buffer under a new shape with the same element count.
    pub fn reshape(mut self, shape: Vec<usize>) -> Result<Self> {
        let numel: usize = shape.iter().product();
        if numel != self.data.len() {
            return Err(Error::shape(
                "Tensor::reshape",
                format!("{} elements", self.data.len()),
                format!("{numel} elements for shape {shape:?}"),
            ));
        }
        self.shape = shape;
        Ok(self)
    }

    /// Error if any element is NaN or infinite.
    pub fn check_finite(&self, what: &str) -> Result<()> {
        if self.data.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite { what: what.into() })
        }
    }

    /// Convert element width (used at checkpoint/dataset boundaries).
    pub fn cast<U: Scalar>(&self) -> Tensor<U> {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|v| U::of_f64(v.as_f64())).collect(),
        }
    }
}

#[inline]
fn debug_check_finite<T: Scalar>(t: &Tensor<T>, what: &str) {
    if cfg!(debug_assertions) {
        if let Err(e) = t.check_finite(what) {
            panic!("{e}");
        }
    }
}

/// Dot product with a fixed eight-lane accumulation order. The lane split
/// is part of the defined summation order: structurally fixed, so results
/// are identical across runs and thread counts (and it lets the reduction
/// vectorize, which a strict left-to-right fold cannot).
#[inline]
pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    const LANES: usize = 8;
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [T::zero(); LANES];
    let mut ac = a.chunks_exact(LANES);
    let mut bc = b.chunks_exact(LANES);
    for (ca, cb) in (&mut ac).zip(&mut bc) {
        for l in 0..LANES {
            acc[l] += ca[l] * cb[l];
        }
    }
    let mut tail = T::zero();
    for (&x, &y) in ac.remainder().iter().zip(bc.remainder()) {
        tail += x * y;
    }
    let mut total = T::zero();
    for lane in acc {
        total += lane;
    }
    total + tail
}

/// Sum with the same fixed eight-lane order as [`dot`].
#[inline]
pub(crate) fn lane_sum<T: Scalar>(a: &[T]) -> T {
    const LANES: usize = 8;
    let mut acc = [T::zero(); LANES];
    let mut ac = a.chunks_exact(LANES);
    for ca in &mut ac {
        for l in 0..LANES {
            acc[l] += ca[l];
        }
    }
    let mut tail = T::zero();
    for &x in ac.remainder() {
        tail += x;
    }
    let mut total = T::zero();
    for lane in acc {
        total += lane;
    }
    total + tail
}

/// Padding scheme for [`conv1d`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Padding {
    /// No padding; output shrinks by `K - 1` before striding.
    Valid,
    /// Symmetric zero padding of `floor(K/2)` on each side.
    Same,
}

impl Padding {
    pub fn pad(&self, kernel: usize) -> usize {
        match self {
            Padding::Valid => 0,
            Padding::Same => kernel / 2,
        }
    }
}

/// Output length of a 1-D cross-correlation:
/// `floor((L + 2*pad - K) / stride) + 1`, or `None` if the kernel does not fit.
pub fn conv1d_out_len(length: usize, kernel: usize, stride: usize, padding: Padding) -> Option<usize> {
    let padded = length + 2 * padding.pad(kernel);
    if padded < kernel || stride == 0 {
        None
    } else {
        Some((padded - kernel) / stride + 1)
    }
}

fn conv1d_validate<T: Scalar>(
    input: &Tensor<T>,
    weight: &Tensor<T>,
    bias: &Tensor<T>,
    stride: usize,
    padding: Padding,
) -> Result<(Shape3, usize, usize, usize)> {
    let x = input.shape3()?;
    let (cout, cin_w, kernel) = match weight.shape() {
        &[cout, cin, k] => (cout, cin, k),
        other => {
            return Err(Error::shape(
                "conv1d",
                "weights of shape [Cout, Cin, K]",
                format!("{other:?}"),
            ))
        }
    };
    if cin_w != x.channels {
        return Err(Error::shape(
            "conv1d",
            format!("input with {cin_w} channels to match weights"),
            format!("{} channels", x.channels),
        ));
    }
    if bias.shape() != [cout] {
        return Err(Error::shape(
            "conv1d",
            format!("bias of shape [{cout}]"),
            format!("{:?}", bias.shape()),
        ));
    }
    if stride == 0 {
        return Err(Error::invalid("conv1d", "stride must be >= 1"));
    }
    let out_len = conv1d_out_len(x.length, kernel, stride, padding).ok_or_else(|| {
        Error::invalid(
            "conv1d",
            format!(
                "kernel {kernel} does not fit input length {} with padding {padding:?}",
                x.length
            ),
        )
    })?;
    Ok((x, cout, kernel, out_len))
}

/// 1-D cross-correlation (no kernel flip) with optional symmetric zero padding.
///
/// `input` is `[B, Cin, L]`, `weight` is `[Cout, Cin, K]`, `bias` is `[Cout]`;
/// the result is `[B, Cout, Lout]` with `Lout = floor((L + 2*pad - K)/stride) + 1`.
pub fn conv1d<T: Scalar>(
    input: &Tensor<T>,
    weight: &Tensor<T>,
    bias: &Tensor<T>,
    stride: usize,
    padding: Padding,
) -> Result<Tensor<T>> {
    let (x, cout, kernel, out_len) = conv1d_validate(input, weight, bias, stride, padding)?;
    let pad = padding.pad(kernel) as isize;
    let length = x.length;

    let mut out = Tensor::zeros(vec![x.batch, cout, out_len]);
    let xd = input.data();
    let wd = weight.data();
    let bd = bias.data();
    let od = out.data_mut();

    for b in 0..x.batch {
        for oc in 0..cout {
            let out_row = &mut od[(b * cout + oc) * out_len..][..out_len];
            out_row.fill(bd[oc]);
            for ic in 0..x.channels {
                let x_row = &xd[(b * x.channels + ic) * length..][..length];
                let w_row = &wd[(oc * x.channels + ic) * kernel..][..kernel];
                for (k, &w) in w_row.iter().enumerate() {
                    // input index for output position lo is lo*stride + k - pad
                    let offset = k as isize - pad;
                    if stride == 1 {
                        let lo_start = (-offset).max(0) as usize;
                        let lo_end = ((length as isize - offset).max(0) as usize).min(out_len);
                        if lo_start >= lo_end {
                            continue;
                        }
                        let xs = (lo_start as isize + offset) as usize;
                        let xe = xs + (lo_end - lo_start);
                        for (o, &xv) in out_row[lo_start..lo_end].iter_mut().zip(&x_row[xs..xe]) {
                            *o += w * xv;
                        }
                    } else {
                        for (lo, o) in out_row.iter_mut().enumerate() {
                            let i = lo as isize * stride as isize + offset;
                            if i >= 0 && (i as usize) < length {
                                *o += w * x_row[i as usize];
                            }
                        }
                    }
                }
            }
        }
    }
    debug_check_finite(&out, "conv1d output");
    Ok(out)
}

/// Gradients of [`conv1d`] with respect to input, weights, and bias.
///
/// `upstream` is `[B, Cout, Lout]`; returns `(grad_input, grad_weight, grad_bias)`
/// with the same shapes as the corresponding forward arguments.
pub fn conv1d_backward<T: Scalar>(
    input: &Tensor<T>,
    weight: &Tensor<T>,
    upstream: &Tensor<T>,
    stride: usize,
    padding: Padding,
) -> Result<(Tensor<T>, Tensor<T>, Tensor<T>)> {
    let x = input.shape3()?;
    let (cout, cin_w, kernel) = match weight.shape() {
        &[cout, cin, k] => (cout, cin, k),
        other => {
            return Err(Error::shape(
                "conv1d_backward",
                "weights of shape [Cout, Cin, K]",
                format!("{other:?}"),
            ))
        }
    };
    let out_len = conv1d_out_len(x.length, kernel, stride, padding)
        .ok_or_else(|| Error::invalid("conv1d_backward", "kernel does not fit input"))?;
    let up = upstream.shape3()?;
    if cin_w != x.channels || up.batch != x.batch || up.channels != cout || up.length != out_len {
        return Err(Error::shape(
            "conv1d_backward",
            format!("upstream [{}, {cout}, {out_len}]", x.batch),
            format!("{up}"),
        ));
    }
    let pad = padding.pad(kernel) as isize;
    let length = x.length;

    let mut grad_input = Tensor::zeros(vec![x.batch, x.channels, length]);
    let mut grad_weight = Tensor::zeros(vec![cout, x.channels, kernel]);
    let mut grad_bias = Tensor::zeros(vec![cout]);

    let xd = input.data();
    let wd = weight.data();
    let ud = upstream.data();
    let gid = grad_input.data_mut();
    let gwd = grad_weight.data_mut();
    let gbd = grad_bias.data_mut();

    for b in 0..x.batch {
        for oc in 0..cout {
            let up_row = &ud[(b * cout + oc) * out_len..][..out_len];
            gbd[oc] += lane_sum(up_row);
            for ic in 0..x.channels {
                let x_row = &xd[(b * x.channels + ic) * length..][..length];
                let gx_row = &mut gid[(b * x.channels + ic) * length..][..length];
                let w_row = &wd[(oc * x.channels + ic) * kernel..][..kernel];
                let gw_row = &mut gwd[(oc * x.channels + ic) * kernel..][..kernel];
                for k in 0..kernel {
                    let offset = k as isize - pad;
                    if stride == 1 {
                        let lo_start = (-offset).max(0) as usize;
                        let lo_end = ((length as isize - offset).max(0) as usize).min(out_len);
                        if lo_start >= lo_end {
                            continue;
                        }
                        let xs = (lo_start as isize + offset) as usize;
                        let xe = xs + (lo_end - lo_start);
                        // dL/dw[k] = sum_lo up[lo] * x[lo + offset]
                        gw_row[k] += dot(&up_row[lo_start..lo_end], &x_row[xs..xe]);
                        // dL/dx[lo + offset] += up[lo] * w[k]
                        let w = w_row[k];
                        for (gx, &u) in gx_row[xs..xe].iter_mut().zip(&up_row[lo_start..lo_end]) {
                            *gx += w * u;
                        }
                    } else {
                        let w = w_row[k];
                        let mut acc = T::zero();
                        for (lo, &u) in up_row.iter().enumerate() {
                            let i = lo as isize * stride as isize + offset;
                            if i >= 0 && (i as usize) < length {
                                acc += u * x_row[i as usize];
                                gx_row[i as usize] += w * u;
                            }
                        }
                        gw_row[k] += acc;
                    }
                }
            }
        }
    }
    debug_check_finite(&grad_input, "conv1d grad_input");
    debug_check_finite(&grad_weight, "conv1d grad_weight");
    Ok((grad_input, grad_weight, grad_bias))
}

/// Non-overlapping average pooling over the length axis.
///
/// Windows of size `k` with stride `k`; trailing `L mod k` samples are dropped.
pub fn avgpool1d<T: Scalar>(input: &Tensor<T>, k: usize) -> Result<Tensor<T>> {
    let x = input.shape3()?;
    if k == 0 {
        return Err(Error::invalid("avgpool1d", "pool size must be >= 1"));
    }
    if x.length < k {
        return Err(Error::invalid(
            "avgpool1d",
            format!("input length {} shorter than pool size {k}", x.length),
        ));
    }
    let out_len = x.length / k;
    let inv_k = T::one() / T::from_usize(k).unwrap();
    let rows = x.batch * x.channels;

    let mut out = Tensor::zeros(vec![x.batch, x.channels, out_len]);
    let xd = input.data();
    let od = out.data_mut();
    for r in 0..rows {
        let x_row = &xd[r * x.length..][..x.length];
        let out_row = &mut od[r * out_len..][..out_len];
        for (j, o) in out_row.iter_mut().enumerate() {
            let mut acc = T::zero();
            for &v in &x_row[j * k..(j + 1) * k] {
                acc += v;
            }
            *o = acc * inv_k;
        }
    }
    debug_check_finite(&out, "avgpool1d output");
    Ok(out)
}

/// Gradient of [`avgpool1d`]: upstream spread uniformly over each window;
/// dropped trailing samples receive zero gradient.
pub fn avgpool1d_backward<T: Scalar>(
    input_shape: Shape3,
    k: usize,
    upstream: &Tensor<T>,
) -> Result<Tensor<T>> {
    let up = upstream.shape3()?;
    let out_len = input_shape.length / k;
    if up.batch != input_shape.batch || up.channels != input_shape.channels || up.length != out_len {
        return Err(Error::shape(
            "avgpool1d_backward",
            format!(
                "upstream [{}, {}, {out_len}]",
                input_shape.batch, input_shape.channels
            ),
            format!("{up}"),
        ));
    }
    let inv_k = T::one() / T::from_usize(k).unwrap();
    let rows = input_shape.batch * input_shape.channels;
    let mut grad = Tensor::zeros(vec![
        input_shape.batch,
        input_shape.channels,
        input_shape.length,
    ]);
    let ud = upstream.data();
    let gd = grad.data_mut();
    for r in 0..rows {
        let up_row = &ud[r * out_len..][..out_len];
        let g_row = &mut gd[r * input_shape.length..][..input_shape.length];
        for (j, &u) in up_row.iter().enumerate() {
            let share = u * inv_k;
            for g in &mut g_row[j * k..(j + 1) * k] {
                *g = share;
            }
        }
    }
    Ok(grad)
}

/// Affine map per batch row: `out[b] = input[b] · weights + bias`.
///
/// `input` is `[B, F]`, `weights` is `[F, G]`, `bias` is `[G]`.
pub fn dense<T: Scalar>(input: &Tensor<T>, weight: &Tensor<T>, bias: &Tensor<T>) -> Result<Tensor<T>> {
    let (batch, feat) = input.shape2()?;
    let (feat_w, out_w) = weight.shape2()?;
    if feat != feat_w {
        return Err(Error::shape(
            "dense",
            format!("input with {feat_w} features to match weights"),
            format!("{feat} features"),
        ));
    }
    if bias.shape() != [out_w] {
        return Err(Error::shape(
            "dense",
            format!("bias of shape [{out_w}]"),
            format!("{:?}", bias.shape()),
        ));
    }
    let mut out = Tensor::zeros(vec![batch, out_w]);
    let xd = input.data();
    let wd = weight.data();
    let bd = bias.data();
    let od = out.data_mut();
    for b in 0..batch {
        let out_row = &mut od[b * out_w..][..out_w];
        out_row.copy_from_slice(bd);
        let x_row = &xd[b * feat..][..feat];
        for (f, &xv) in x_row.iter().enumerate() {
            let w_row = &wd[f * out_w..][..out_w];
            for (o, &w) in out_row.iter_mut().zip(w_row) {
                *o += xv * w;
            }
        }
    }
    debug_check_finite(&out, "dense output");
    Ok(out)
}

/// Gradients of [`dense`]: returns `(grad_input, grad_weight, grad_bias)`.
pub fn dense_backward<T: Scalar>(
    input: &Tensor<T>,
    weight: &Tensor<T>,
    upstream: &Tensor<T>,
) -> Result<(Tensor<T>, Tensor<T>, Tensor<T>)> {
    let (batch, feat) = input.shape2()?;
    let (feat_w, out_w) = weight.shape2()?;
    let (up_b, up_g) = upstream.shape2()?;
    if feat != feat_w || up_b != batch || up_g != out_w {
        return Err(Error::shape(
            "dense_backward",
            format!("upstream [{batch}, {out_w}] for weights [{feat}, {out_w}]"),
            format!("[{up_b}, {up_g}]"),
        ));
    }
    let mut grad_input = Tensor::zeros(vec![batch, feat]);
    let mut grad_weight = Tensor::zeros(vec![feat, out_w]);
    let mut grad_bias = Tensor::zeros(vec![out_w]);
    let xd = input.data();
    let wd = weight.data();
    let ud = upstream.data();
    let gxd = grad_input.data_mut();
    let gwd = grad_weight.data_mut();
    let gbd = grad_bias.data_mut();
    for b in 0..batch {
        let up_row = &ud[b * out_w..][..out_w];
        let x_row = &xd[b * feat..][..feat];
        let gx_row = &mut gxd[b * feat..][..feat];
        for (g, &u) in gbd.iter_mut().zip(up_row) {
            *g += u;
        }
        for f in 0..feat {
            let w_row = &wd[f * out_w..][..out_w];
            let gw_row = &mut gwd[f * out_w..][..out_w];
            let xv = x_row[f];
            for (gw, &u) in gw_row.iter_mut().zip(up_row) {
                *gw += xv * u;
            }
            gx_row[f] = dot(w_row, up_row);
        }
    }
    Ok((grad_input, grad_weight, grad_bias))
}
