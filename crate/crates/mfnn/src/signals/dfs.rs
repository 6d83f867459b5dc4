//! Discrete Fourier series.
//!
//! Forward: `X_k = Σ_i x_i · exp(-j·2π·k·i/N)` — the unscaled discrete form;
//! the sampling interval enters only when converting bin indices to hertz.
//! Inverse: `x_i = (1/N) · Σ_k X_k · exp(+j·2π·k·i/N)`, the sign/normalization
//! pair that makes `inverse ∘ forward` the identity.
//!
//! [`dfs_forward_direct`] is the O(N²) reference evaluation; [`dfs_forward`]
//! routes large inputs through an FFT and must agree with the direct form to
//! 1e-9 (covered by tests). Analysis code runs in `f64` throughout.

use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;

/// Input sizes up to this length use the direct O(N²) evaluation.
const DIRECT_LIMIT: usize = 512;

/// Frequency-domain representation of a sampled real signal.
#[derive(Debug, Clone)]
pub struct DfsSpectrum {
    /// Complex coefficients `X_k`, `k = 0..N-1`.
    pub coefficients: Vec<Complex64>,
    /// Number of time-domain samples.
    pub n: usize,
    /// Sampling interval in seconds.
    pub dt: f64,
}

impl DfsSpectrum {
    /// Frequency in hertz of bin `k`.
    pub fn frequency_hz(&self, k: usize) -> f64 {
        k as f64 / (self.n as f64 * self.dt)
    }

    /// Whether the spectrum satisfies `X_k = conj(X_{N-k})` within `tol`
    /// relative to the largest coefficient magnitude (true of every real
    /// signal's spectrum).
    pub fn is_conjugate_symmetric(&self, tol: f64) -> bool {
        let scale = self
            .coefficients
            .iter()
            .map(|c| c.norm())
            .fold(1.0f64, f64::max);
        (1..self.n).all(|k| {
            (self.coefficients[k] - self.coefficients[self.n - k].conj()).norm() <= tol * scale
        })
    }
}

/// Direct O(N²) evaluation of the forward sum; the reference all fast paths
/// are checked against.
pub fn dfs_forward_direct(x: &[f64], dt: f64) -> DfsSpectrum {
    let n = x.len();
    // table of exp(-j·2π·m/N); the index k·i is reduced mod N to keep the
    // angle argument small and exact
    let table: Vec<Complex64> = (0..n)
        .map(|m| Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * m as f64 / n as f64))
        .collect();
    let coefficients = (0..n)
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, &v) in x.iter().enumerate() {
                acc += table[(k * i) % n] * v;
            }
            acc
        })
        .collect();
    DfsSpectrum {
        coefficients,
        n,
        dt,
    }
}

/// Forward transform; direct evaluation for short inputs, FFT above
/// [`DIRECT_LIMIT`].
pub fn dfs_forward(x: &[f64], dt: f64) -> DfsSpectrum {
    let n = x.len();
    if n <= DIRECT_LIMIT {
        return dfs_forward_direct(x, dt);
    }
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    DfsSpectrum {
        coefficients: buf,
        n,
        dt,
    }
}

/// Inverse transform back to a real signal.
///
/// Errors if the spectrum is not conjugate-symmetric (the result would not
/// be real). The imaginary residue of the complex inverse is discarded; for
/// symmetric spectra it is below 1e-9 of the signal scale.
pub fn dfs_inverse(spec: &DfsSpectrum) -> Result<Vec<f64>> {
    if spec.coefficients.len() != spec.n {
        return Err(Error::invalid(
            "dfs_inverse",
            format!(
                "{} coefficients for N = {}",
                spec.coefficients.len(),
                spec.n
            ),
        ));
    }
    if spec.n == 0 {
        return Ok(Vec::new());
    }
    if !spec.is_conjugate_symmetric(1e-9) {
        return Err(Error::invalid(
            "dfs_inverse",
            "spectrum is not conjugate-symmetric; a real signal cannot be reconstructed",
        ));
    }
    Ok(inverse_complex(spec).into_iter().map(|c| c.re).collect())
}

fn inverse_complex(spec: &DfsSpectrum) -> Vec<Complex64> {
    let n = spec.n;
    let scale = 1.0 / n as f64;
    if n <= DIRECT_LIMIT {
        let table: Vec<Complex64> = (0..n)
            .map(|m| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * m as f64 / n as f64))
            .collect();
        (0..n)
            .map(|i| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (k, &c) in spec.coefficients.iter().enumerate() {
                    acc += table[(k * i) % n] * c;
                }
                acc * scale
            })
            .collect()
    } else {
        let mut buf = spec.coefficients.clone();
        FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
        buf.into_iter().map(|c| c * scale).collect()
    }
}
