//! Activation functions.
//!
//! The centerpiece is EAS, a trainable periodic activation: a sine with
//! per-channel frequency and phase on the non-negative half-axis, and a
//! bounded asymptote on the negative half-axis. The function is continuous
//! at zero for every parameter setting, and its positive piece is periodic
//! in the input with period `2π/ω`.
//!
//! EUAF and SinTrx are fixed (non-trainable) activations kept around for
//! comparison experiments; they never appear inside the network.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;
use rand::Rng;

/// Trainable per-channel frequency/phase parameters for one EAS layer.
///
/// Invariants (restored by [`EasParams::project`] after each optimizer step):
/// `omega[c] >= 0` and `phi[c]` in `[-π, π]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EasParams<T> {
    pub omega: Vec<T>,
    pub phi: Vec<T>,
}

impl<T: Scalar> EasParams<T> {
    /// Seeded initialization: `ω ~ U[0.5, 3.0)`, `φ ~ U[-π/2, π/2)`.
    pub fn init<R: Rng + ?Sized>(channels: usize, rng: &mut R) -> Self {
        let omega = (0..channels).map(|_| T::uniform(rng, 0.5, 3.0)).collect();
        let phi = (0..channels)
            .map(|_| T::uniform(rng, -std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2))
            .collect();
        EasParams { omega, phi }
    }

    /// All-zero phases with unit frequency; used by tests that need EAS(0) = 0.
    pub fn neutral(channels: usize) -> Self {
        EasParams {
            omega: vec![T::one(); channels],
            phi: vec![T::zero(); channels],
        }
    }

    pub fn channels(&self) -> usize {
        self.omega.len()
    }

    /// Restore the parameter-domain invariants after an unconstrained update:
    /// clamp `ω` at zero and wrap `φ` into `[-π, π]` by multiples of `2π`.
    /// Parameters already in range are returned bit-identical.
    pub fn project(&mut self) {
        let pi = T::of_f64(std::f64::consts::PI);
        let two_pi = T::of_f64(2.0 * std::f64::consts::PI);
        for w in &mut self.omega {
            if *w < T::zero() {
                *w = T::zero();
            }
        }
        for p in &mut self.phi {
            while *p > pi {
                *p -= two_pi;
            }
            while *p < -pi {
                *p += two_pi;
            }
        }
    }
}

#[inline(always)]
fn eas_scalar<T: Scalar>(x: T, omega: T, phi: T) -> T {
    if x >= T::zero() {
        (omega * x + phi).sin()
    } else {
        x / (T::one() + x.abs()) + phi.sin()
    }
}

/// EAS applied elementwise to `[B, C, L]` with one `(ω, φ)` pair per channel.
///
/// For `x >= 0`: `sin(ω·x + φ)`; for `x < 0`: `x/(1+|x|) + sin(φ)`.
pub fn eas_forward<T: Scalar>(input: &Tensor<T>, params: &EasParams<T>) -> Result<Tensor<T>> {
    let s = input.shape3()?;
    if params.channels() != s.channels {
        return Err(Error::shape(
            "eas_forward",
            format!("{} channels of parameters", s.channels),
            format!("{}", params.channels()),
        ));
    }
    let mut out = input.clone();
    let od = out.data_mut();
    for b in 0..s.batch {
        for c in 0..s.channels {
            let omega = params.omega[c];
            let phi = params.phi[c];
            for v in &mut od[(b * s.channels + c) * s.length..][..s.length] {
                *v = eas_scalar(*v, omega, phi);
            }
        }
    }
    Ok(out)
}

/// Gradients of [`eas_forward`].
///
/// Returns `(grad_input, grad_omega, grad_phi)`; the parameter gradients are
/// summed over batch and length per channel. The `x = 0` tie uses the sine
/// branch. On the negative piece `∂/∂ω` is exactly zero and `∂/∂φ = cos(φ)`.
pub fn eas_backward<T: Scalar>(
    input: &Tensor<T>,
    params: &EasParams<T>,
    upstream: &Tensor<T>,
) -> Result<(Tensor<T>, Vec<T>, Vec<T>)> {
    let s = input.shape3()?;
    if params.channels() != s.channels {
        return Err(Error::shape(
            "eas_backward",
            format!("{} channels of parameters", s.channels),
            format!("{}", params.channels()),
        ));
    }
    if upstream.shape() != input.shape() {
        return Err(Error::shape(
            "eas_backward",
            format!("upstream {:?}", input.shape()),
            format!("{:?}", upstream.shape()),
        ));
    }
    let mut grad_input = Tensor::zeros(input.shape().to_vec());
    let mut grad_omega = vec![T::zero(); s.channels];
    let mut grad_phi = vec![T::zero(); s.channels];
    let xd = input.data();
    let ud = upstream.data();
    let gd = grad_input.data_mut();
    for b in 0..s.batch {
        for c in 0..s.channels {
            let omega = params.omega[c];
            let phi = params.phi[c];
            let cos_phi = phi.cos();
            let base = (b * s.channels + c) * s.length;
            let mut g_omega = T::zero();
            let mut g_phi = T::zero();
            for i in 0..s.length {
                let x = xd[base + i];
                let u = ud[base + i];
                if x >= T::zero() {
                    let cos_t = (omega * x + phi).cos();
                    gd[base + i] = u * omega * cos_t;
                    g_omega += u * x * cos_t;
                    g_phi += u * cos_t;
                } else {
                    let denom = T::one() + x.abs();
                    gd[base + i] = u / (denom * denom);
                    g_phi += u * cos_phi;
                }
            }
            grad_omega[c] += g_omega;
            grad_phi[c] += g_phi;
        }
    }
    Ok((grad_input, grad_omega, grad_phi))
}

/// Elementary universal activation function: a period-2 triangle wave on
/// `[0, ∞)` and the bounded asymptote `x/(1+|x|)` on `(-∞, 0)`. Fixed shape,
/// no trainable parameters; used for comparison experiments only.
pub fn euaf(x: f64) -> f64 {
    if x >= 0.0 {
        (x - 2.0 * ((x + 1.0) / 2.0).floor()).abs()
    } else {
        x / (1.0 + x.abs())
    }
}

/// Sine-extended arcsine: `(2/π)·asin(x)` on `[-1, 1]`, `sin(πx/2)` outside.
/// Fixed shape, no trainable parameters; comparison experiments only.
pub fn sintrx(x: f64) -> f64 {
    if (-1.0..=1.0).contains(&x) {
        std::f64::consts::FRAC_2_PI * x.asin()
    } else {
        (std::f64::consts::FRAC_PI_2 * x).sin()
    }
}
