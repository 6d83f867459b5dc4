//! Interpretability protocols: occlusion sensitivity maps, branch-output
//! dumps with per-channel spectral summaries, and DFS decomposition of raw
//! signals into their dominant periodic components.
//!
//! All outputs are plot-ready CSV with documented headers; no rendering.

use crate::error::{Error, Result};
use crate::layers::softmax;
use crate::model::{Backbone, MfnnModel};
use crate::scalar::Scalar;
use crate::signals::dfs::{dfs_forward, DfsSpectrum};
use crate::tensor::Tensor;

// ── Occlusion ──────────────────────────────────────────────────────

/// Per-position probability deltas from zeroing spans of the input.
///
/// `prob_delta[i] = baseline_prob - occluded_prob` for the true class;
/// positive values mark spans the model relies on.
#[derive(Debug, Clone)]
pub struct OcclusionMap {
    pub window_starts: Vec<usize>,
    pub prob_delta: Vec<f64>,
    pub baseline_prob: f64,
    pub occl_size: usize,
    pub occl_stride: usize,
}

impl OcclusionMap {
    pub fn positions(&self) -> usize {
        self.window_starts.len()
    }
}

fn true_class_prob<T: Scalar>(model: &MfnnModel<T>, x: &Tensor<T>, label: usize) -> Result<f64> {
    let logits = model.infer(x)?;
    let probs = softmax(&logits)?;
    let (_, k) = probs.shape2()?;
    if label >= k {
        return Err(Error::invalid(
            "occlude",
            format!("label {label} out of range for {k} classes"),
        ));
    }
    Ok(probs.data()[label].as_f64())
}

/// Slide a zeroing window of `size` samples with the given `stride` over
/// one input window `[1, C, L]` and record the true-class probability drop
/// at each position. Spans cover all channels. The trailing samples not
/// reached by the last position are never occluded.
pub fn occlude<T: Scalar>(
    model: &MfnnModel<T>,
    window: &Tensor<T>,
    label: usize,
    size: usize,
    stride: usize,
) -> Result<OcclusionMap> {
    let s = window.shape3()?;
    if s.batch != 1 {
        return Err(Error::invalid("occlude", "expected a single window (batch 1)"));
    }
    if size == 0 || stride == 0 {
        return Err(Error::invalid("occlude", "size and stride must be >= 1"));
    }
    if size > s.length {
        return Err(Error::invalid(
            "occlude",
            format!("occlusion size {size} exceeds window length {}", s.length),
        ));
    }
    let baseline_prob = true_class_prob(model, window, label)?;
    let positions = (s.length - size) / stride + 1;
    let mut window_starts = Vec::with_capacity(positions);
    let mut prob_delta = Vec::with_capacity(positions);
    for p in 0..positions {
        let start = p * stride;
        let mut occluded = window.clone();
        {
            let data = occluded.data_mut();
            for c in 0..s.channels {
                let row = c * s.length;
                data[row + start..row + start + size].fill(T::zero());
            }
        }
        let prob = true_class_prob(model, &occluded, label)?;
        window_starts.push(start);
        prob_delta.push(baseline_prob - prob);
    }
    Ok(OcclusionMap {
        window_starts,
        prob_delta,
        baseline_prob,
        occl_size: size,
        occl_stride: stride,
    })
}

/// CSV form: `start_index,end_index,prob_delta` with a comment line stating
/// the sign convention.
pub fn occlusion_csv(map: &OcclusionMap) -> String {
    let mut out = String::from(
        "# prob_delta = baseline_prob - occluded_prob for the true class; positive = important\n",
    );
    out.push_str(&format!("# baseline_prob={}\n", map.baseline_prob));
    out.push_str("start_index,end_index,prob_delta\n");
    for (start, delta) in map.window_starts.iter().zip(&map.prob_delta) {
        out.push_str(&format!("{},{},{}\n", start, start + map.occl_size, delta));
    }
    out
}

// ── Branch dumps ───────────────────────────────────────────────────

/// Dominant-frequency summary of one branch output channel.
#[derive(Debug, Clone)]
pub struct ChannelSummary {
    pub branch: usize,
    pub channel: usize,
    /// Frequency of the largest-magnitude bin (DC included), in hertz on
    /// the branch-output time base.
    pub dominant_freq_hz: f64,
    /// Amplitude of that bin (pair-merged scaling).
    pub amplitude: f64,
}

/// Branch outputs for one window plus per-channel spectral summaries.
///
/// `dt` is the sampling interval of the *input* window; branch outputs are
/// pooled down twice, so their time base is `dt · pool²`.
pub fn dump_branches<T: Scalar>(
    model: &MfnnModel<T>,
    window: &Tensor<T>,
    dt: f64,
) -> Result<(Vec<Tensor<T>>, Vec<ChannelSummary>)> {
    let s = window.shape3()?;
    if s.batch != 1 {
        return Err(Error::invalid("dump_branches", "expected a single window (batch 1)"));
    }
    let branches = match &model.backbone {
        Backbone::Branched(b) => b,
        Backbone::Single(_) => {
            return Err(Error::invalid(
                "dump_branches",
                "the single-path variant has no branch networks",
            ))
        }
    };
    let pool = model.config.pool;
    let out_dt = dt * (pool * pool) as f64;
    let mut outputs = Vec::with_capacity(branches.len());
    let mut summaries = Vec::new();
    for (bi, branch) in branches.iter().enumerate() {
        let (out, _) = branch.forward(window)?;
        let os = out.shape3()?;
        for c in 0..os.channels {
            let trace: Vec<f64> = out.data()[c * os.length..(c + 1) * os.length]
                .iter()
                .map(|v| v.as_f64())
                .collect();
            let spec = dfs_forward(&trace, out_dt);
            let (freq, amp) = dominant_component(&spec);
            summaries.push(ChannelSummary {
                branch: bi,
                channel: c,
                dominant_freq_hz: freq,
                amplitude: amp,
            });
        }
        outputs.push(out);
    }
    Ok((outputs, summaries))
}

/// Largest-magnitude bin over `k = 0..=N/2` with pair-merged amplitude.
fn dominant_component(spec: &DfsSpectrum) -> (f64, f64) {
    let n = spec.n;
    if n == 0 {
        return (0.0, 0.0);
    }
    let half = n / 2;
    let mut best_k = 0usize;
    for k in 1..=half {
        if spec.coefficients[k].norm() > spec.coefficients[best_k].norm() {
            best_k = k;
        }
    }
    (spec.frequency_hz(best_k), merged_amplitude(spec, best_k))
}

fn merged_amplitude(spec: &DfsSpectrum, k: usize) -> f64 {
    let n = spec.n;
    let mag = spec.coefficients[k].norm();
    if k == 0 || (n % 2 == 0 && k == n / 2) {
        mag / n as f64
    } else {
        2.0 * mag / n as f64
    }
}

/// Long-form CSV of branch outputs: `branch,channel,t,value`.
pub fn branch_dump_csv<T: Scalar>(outputs: &[Tensor<T>], dt_out: f64) -> Result<String> {
    let mut out = String::from("branch,channel,t,value\n");
    for (bi, tensor) in outputs.iter().enumerate() {
        let s = tensor.shape3()?;
        for c in 0..s.channels {
            for (i, v) in tensor.data()[c * s.length..(c + 1) * s.length].iter().enumerate() {
                out.push_str(&format!("{},{},{},{}\n", bi, c, i as f64 * dt_out, v));
            }
        }
    }
    Ok(out)
}

/// Summary CSV: `branch,channel,dominant_freq_hz,amplitude`.
pub fn branch_summary_csv(summaries: &[ChannelSummary]) -> String {
    let mut out = String::from("branch,channel,dominant_freq_hz,amplitude\n");
    for s in summaries {
        out.push_str(&format!(
            "{},{},{},{}\n",
            s.branch, s.channel, s.dominant_freq_hz, s.amplitude
        ));
    }
    out
}

// ── Signal decomposition ───────────────────────────────────────────

/// One periodic component of a decomposed signal.
#[derive(Debug, Clone)]
pub struct Component {
    pub rank: usize,
    /// Representative bin index (`0..=N/2`).
    pub bin: usize,
    pub freq_hz: f64,
    /// Pair-merged amplitude: `2|X_k|/N` (or `|X_k|/N` for DC/Nyquist).
    pub amplitude: f64,
    /// Phase in the `A·cos(2πkt/N + φ)` convention.
    pub phase_rad: f64,
    /// Reconstructed time-domain samples of this component alone.
    pub waveform: Vec<f64>,
}

/// Decomposition of a signal into its `top_k` dominant components plus the
/// residual; components and residual re-sum to the input exactly.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub components: Vec<Component>,
    pub residual: Vec<f64>,
}

impl Decomposition {
    pub fn residual_energy(&self) -> f64 {
        self.residual.iter().map(|v| v * v).sum()
    }
}

/// Pick the `top_k` largest-magnitude bins (conjugate pairs merged, ties to
/// the lower bin), reconstruct each as a time-domain component, and return
/// them with the residual.
pub fn decompose_signal(x: &[f64], dt: f64, top_k: usize) -> Result<Decomposition> {
    let n = x.len();
    if n < 2 {
        return Err(Error::invalid("decompose_signal", "need at least 2 samples"));
    }
    if top_k > n / 2 {
        return Err(Error::invalid(
            "decompose_signal",
            format!("top_k {top_k} exceeds the {} mergeable bins", n / 2),
        ));
    }
    let spec = dfs_forward(x, dt);
    let half = n / 2;
    let mut bins: Vec<usize> = (0..=half).collect();
    bins.sort_by(|&a, &b| {
        spec.coefficients[b]
            .norm()
            .partial_cmp(&spec.coefficients[a].norm())
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut components = Vec::with_capacity(top_k);
    let mut residual: Vec<f64> = x.to_vec();
    for (rank, &k) in bins.iter().take(top_k).enumerate() {
        let coeff = spec.coefficients[k];
        let amplitude = merged_amplitude(&spec, k);
        let phase = coeff.arg();
        let waveform: Vec<f64> = (0..n)
            .map(|i| {
                let angle = 2.0 * std::f64::consts::PI * (k * i) as f64 / n as f64;
                if k == 0 || (n % 2 == 0 && k == half) {
                    // self-conjugate bins: X_k/N · cos(angle) with X_k real
                    coeff.re / n as f64 * angle.cos()
                } else {
                    amplitude * (angle + phase).cos()
                }
            })
            .collect();
        for (r, w) in residual.iter_mut().zip(&waveform) {
            *r -= w;
        }
        components.push(Component {
            rank,
            bin: k,
            freq_hz: spec.frequency_hz(k),
            amplitude,
            phase_rad: phase,
            waveform,
        });
    }
    Ok(Decomposition { components, residual })
}

/// Component table CSV: `rank,freq_hz,amplitude,phase_rad`.
pub fn decomposition_csv(d: &Decomposition) -> String {
    let mut out = String::from("rank,freq_hz,amplitude,phase_rad\n");
    for c in &d.components {
        out.push_str(&format!("{},{},{},{}\n", c.rank, c.freq_hz, c.amplitude, c.phase_rad));
    }
    out
}

/// Component waveforms plus residual as CSV columns:
/// `t,component_0,...,component_{k-1},residual`.
pub fn decomposition_waveforms_csv(d: &Decomposition, dt: f64) -> String {
    let mut out = String::from("t");
    for c in &d.components {
        out.push_str(&format!(",component_{}", c.rank));
    }
    out.push_str(",residual\n");
    for i in 0..d.residual.len() {
        out.push_str(&format!("{}", i as f64 * dt));
        for c in &d.components {
            out.push_str(&format!(",{}", c.waveform[i]));
        }
        out.push_str(&format!(",{}\n", d.residual[i]));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelConfig, ModelVariant};
    use std::f64::consts::PI;

    fn tiny_model() -> MfnnModel<f64> {
        MfnnModel::new(ModelConfig {
            num_branches: 2,
            branch_filters: 2,
            kernel: 3,
            pool: 2,
            trunk_filters: 2,
            fc_width: 8,
            num_classes: 3,
            in_channels: 1,
            input_length: 64,
            variant: ModelVariant::Mfnn,
            seed: 1,
        })
        .unwrap()
    }

    fn test_window(len: usize) -> Tensor<f64> {
        Tensor::new(
            vec![1, 1, len],
            (0..len).map(|i| (i as f64 * 0.3).sin()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn position_count_formula() {
        let model = tiny_model();
        let window = test_window(64);
        let map = occlude(&model, &window, 0, 16, 8).unwrap();
        assert_eq!(map.positions(), (64 - 16) / 8 + 1);
        // swept grid
        for (len, size, stride) in [(64usize, 64usize, 1usize), (64, 1, 1), (64, 10, 7), (64, 16, 16)] {
            let w = test_window(len);
            let m = occlude(&model, &w, 1, size, stride).unwrap();
            assert_eq!(m.positions(), (len - size) / stride + 1, "{size}/{stride}");
        }
    }

    #[test]
    fn occluding_zero_span_gives_exactly_zero_delta() {
        let model = tiny_model();
        let mut data = vec![0.5; 64];
        for v in &mut data[16..32] {
            *v = 0.0;
        }
        let window = Tensor::new(vec![1, 1, 64], data).unwrap();
        let map = occlude(&model, &window, 0, 16, 16).unwrap();
        // position 1 covers [16, 32), already all zeros
        assert_eq!(map.prob_delta[1], 0.0);
    }

    #[test]
    fn full_window_occlusion_matches_zero_input() {
        let model = tiny_model();
        let window = test_window(64);
        let map = occlude(&model, &window, 2, 64, 1).unwrap();
        assert_eq!(map.positions(), 1);
        let zero = Tensor::zeros(vec![1, 1, 64]);
        let zero_prob = true_class_prob(&model, &zero, 2).unwrap();
        assert!((map.prob_delta[0] - (map.baseline_prob - zero_prob)).abs() <= 1e-15);
    }

    #[test]
    fn occlusion_size_exceeding_window_is_error() {
        let model = tiny_model();
        assert!(occlude(&model, &test_window(64), 0, 65, 1).is_err());
    }

    #[test]
    fn deltas_bounded_and_tiling_covers_window() {
        let model = tiny_model();
        let window = test_window(64);
        let map = occlude(&model, &window, 0, 16, 16).unwrap();
        assert!(map.prob_delta.iter().all(|d| (-1.0..=1.0).contains(d)));
        assert!(map.positions() * map.occl_size <= 64 + map.occl_size);
    }

    #[test]
    fn branch_dump_counts_and_zero_weights() {
        let model = tiny_model();
        let window = test_window(64);
        let (outs, summaries) = dump_branches(&model, &window, 1e-3).unwrap();
        assert_eq!(outs.len(), 2);
        assert_eq!(summaries.len(), 2 * 2);

        let mut zeroed = model.clone();
        zeroed.visit_params_mut(&mut |_, p, _| p.fill(0.0));
        let (outs, _) = dump_branches(&zeroed, &window, 1e-3).unwrap();
        for out in outs {
            assert!(out.data().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn pure_tone_channel_reports_its_frequency() {
        // feed the DFS-summary path directly with a synthetic trace
        let n = 128usize;
        let dt = 1.0 / 128.0;
        let tone: Vec<f64> = (0..n).map(|i| (2.0 * PI * 8.0 * i as f64 * dt).sin()).collect();
        let spec = dfs_forward(&tone, dt);
        let (freq, amp) = dominant_component(&spec);
        assert!((freq - 8.0).abs() < 1e-9);
        assert!((amp - 1.0).abs() < 1e-9);
    }

    #[test]
    fn decompose_pure_sine_recovers_amplitude_and_frequency() {
        let n = 1000usize;
        let dt = 1e-3; // one second of 50 Hz: bin 50
        let x: Vec<f64> = (0..n).map(|i| (2.0 * PI * 50.0 * i as f64 * dt).sin()).collect();
        let d = decompose_signal(&x, dt, 1).unwrap();
        let c = &d.components[0];
        assert!((c.freq_hz - 50.0).abs() < 1e-9);
        assert!((c.amplitude - 1.0).abs() < 1e-6);
        // sin = cos shifted by -π/2
        assert!((c.phase_rad + PI / 2.0).abs() < 1e-6);
        let total: f64 = x.iter().map(|v| v * v).sum();
        assert!(d.residual_energy() <= 1e-9 * total);
    }

    #[test]
    fn two_tones_recovered_with_tiny_residual() {
        let n = 800usize;
        let dt = 1.0 / 800.0;
        let x: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 * dt;
                1.5 * (2.0 * PI * 40.0 * t).sin() + 0.4 * (2.0 * PI * 120.0 * t + 0.7).cos()
            })
            .collect();
        let d = decompose_signal(&x, dt, 2).unwrap();
        let freqs: Vec<f64> = d.components.iter().map(|c| c.freq_hz).collect();
        assert!((freqs[0] - 40.0).abs() < 1e-9);
        assert!((freqs[1] - 120.0).abs() < 1e-9);
        assert!((d.components[0].amplitude - 1.5).abs() < 1e-6);
        assert!((d.components[1].amplitude - 0.4).abs() < 1e-6);
        let total: f64 = x.iter().map(|v| v * v).sum();
        assert!(d.residual_energy() <= 1e-9 * total);
    }

    #[test]
    fn components_plus_residual_resum_exactly() {
        let x: Vec<f64> = (0..256).map(|i| ((i * i) as f64 * 0.01).sin()).collect();
        let d = decompose_signal(&x, 1.0, 5).unwrap();
        for (i, &orig) in x.iter().enumerate() {
            let resum: f64 =
                d.components.iter().map(|c| c.waveform[i]).sum::<f64>() + d.residual[i];
            assert!((resum - orig).abs() <= 1e-9);
        }
    }

    #[test]
    fn residual_energy_monotone_in_top_k() {
        let x: Vec<f64> = (0..200).map(|i| ((i as f64) * 0.17).sin() + 0.3 * ((i as f64) * 0.61).cos()).collect();
        let mut prev = f64::INFINITY;
        for k in 0..=10 {
            let d = decompose_signal(&x, 1.0, k).unwrap();
            let e = d.residual_energy();
            assert!(e <= prev + 1e-12, "k={k}: {e} > {prev}");
            prev = e;
        }
    }

    #[test]
    fn top_k_out_of_range_is_error() {
        let x = vec![0.0; 16];
        assert!(decompose_signal(&x, 1.0, 9).is_err());
        assert!(decompose_signal(&x, 1.0, 8).is_ok());
    }
}
