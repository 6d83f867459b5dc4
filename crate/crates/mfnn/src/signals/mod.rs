//! Signal analysis and the dataset pipeline.
//!
//! [`dfs`] holds the discrete Fourier series, [`generator`] the synthetic
//! arc-current generator. This module owns the dataset container: fixed-size
//! labeled current windows, windowing/decimation, class balancing with
//! stratified splits, the binary `ARCD` file format, and CSV interchange.
//!
//! `ARCD` layout (little-endian): magic `b"ARCD"`, version `u16`,
//! `n_windows u32`, `channels u16`, `window_len u32`, `K u16`, then `K`
//! length-prefixed UTF-8 class names (`u16` length), `n_windows × u16`
//! labels, and `n·channels·window_len × f32` samples, window-major.
//! Generation metadata lives in run manifests, not in the container.

pub mod dfs;
pub mod generator;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;
use generator::{
    add_noise_snr, gen_arc_waveform, mix_seed, ArcParams, GeneratorConfig, LoadProfile, SignalKind,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::Path;

pub const MAGIC: &[u8; 4] = b"ARCD";
pub const VERSION: u16 = 1;

/// Generation metadata carried in memory alongside a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetMeta {
    /// Seconds per retained sample (after decimation).
    pub sampling_time_s: f64,
    /// Added noise level, if any.
    pub snr_db: Option<f64>,
    /// Master seed of the generation run.
    pub seed: u64,
    pub description: String,
}

impl Default for DatasetMeta {
    fn default() -> Self {
        DatasetMeta {
            sampling_time_s: 1.0,
            snr_db: None,
            seed: 0,
            description: String::new(),
        }
    }
}

/// Labeled fixed-length current windows.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalDataset {
    /// Samples, `[n_windows, channels, window_len]` row-major.
    pub samples: Vec<f32>,
    pub n_windows: usize,
    pub channels: usize,
    pub window_len: usize,
    pub labels: Vec<u16>,
    pub class_names: Vec<String>,
    pub meta: DatasetMeta,
}

impl SignalDataset {
    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn window(&self, i: usize) -> &[f32] {
        let w = self.channels * self.window_len;
        &self.samples[i * w..(i + 1) * w]
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples.len() != self.n_windows * self.channels * self.window_len {
            return Err(Error::shape(
                "SignalDataset",
                format!(
                    "{} samples",
                    self.n_windows * self.channels * self.window_len
                ),
                format!("{}", self.samples.len()),
            ));
        }
        if self.labels.len() != self.n_windows {
            return Err(Error::shape(
                "SignalDataset",
                format!("{} labels", self.n_windows),
                format!("{}", self.labels.len()),
            ));
        }
        let k = self.class_names.len();
        if let Some(&bad) = self.labels.iter().find(|&&l| l as usize >= k) {
            return Err(Error::invalid(
                "SignalDataset",
                format!("label {bad} out of range for {k} classes"),
            ));
        }
        Ok(())
    }

    /// Windows at `indices` assembled into a `[n, channels, window_len]`
    /// batch at the run's precision.
    pub fn batch<T: Scalar>(&self, indices: &[usize]) -> Tensor<T> {
        let w = self.channels * self.window_len;
        let mut data = Vec::with_capacity(indices.len() * w);
        for &i in indices {
            data.extend(self.window(i).iter().map(|&v| T::of_f32(v)));
        }
        Tensor::new(vec![indices.len(), self.channels, self.window_len], data)
            .expect("batch shape consistent")
    }

    pub fn labels_usize(&self, indices: &[usize]) -> Vec<usize> {
        indices.iter().map(|&i| self.labels[i] as usize).collect()
    }

    /// New dataset containing the given windows (in the given order).
    pub fn subset(&self, indices: &[usize]) -> SignalDataset {
        let w = self.channels * self.window_len;
        let mut samples = Vec::with_capacity(indices.len() * w);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            samples.extend_from_slice(self.window(i));
            labels.push(self.labels[i]);
        }
        SignalDataset {
            samples,
            n_windows: indices.len(),
            channels: self.channels,
            window_len: self.window_len,
            labels,
            class_names: self.class_names.clone(),
            meta: self.meta.clone(),
        }
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.num_classes()];
        for &l in &self.labels {
            counts[l as usize] += 1;
        }
        counts
    }
}

/// Train/validation/test partition of a dataset.
#[derive(Debug, Clone)]
pub struct SplitDataset {
    pub train: SignalDataset,
    pub val: SignalDataset,
    pub test: SignalDataset,
}

// ── Windowing ──────────────────────────────────────────────────────

/// Slice a record into sliding windows, then decimate each window by
/// keeping every `factor`-th sample (optionally averaging each block of
/// `factor` samples first). Returns `[n, 1, window/factor]` with
/// `n = floor((len - window)/step) + 1`.
pub fn window_and_downsample(
    x: &[f64],
    window: usize,
    step: usize,
    factor: usize,
    prefilter: bool,
) -> Result<Tensor<f32>> {
    if window == 0 || step == 0 {
        return Err(Error::invalid("window_and_downsample", "window and step must be >= 1"));
    }
    if window > x.len() {
        return Err(Error::invalid(
            "window_and_downsample",
            format!("window {window} exceeds record length {}", x.len()),
        ));
    }
    if factor == 0 || window % factor != 0 {
        return Err(Error::invalid(
            "window_and_downsample",
            format!("decimation factor {factor} must be >= 1 and divide window {window}"),
        ));
    }
    let n = (x.len() - window) / step + 1;
    let out_len = window / factor;
    let mut data = Vec::with_capacity(n * out_len);
    for w in 0..n {
        let start = w * step;
        let slice = &x[start..start + window];
        if prefilter && factor > 1 {
            for j in 0..out_len {
                let block = &slice[j * factor..(j + 1) * factor];
                let mean = block.iter().sum::<f64>() / factor as f64;
                data.push(mean as f32);
            }
        } else {
            for j in 0..out_len {
                data.push(slice[j * factor] as f32);
            }
        }
    }
    Tensor::new(vec![n, 1, out_len], data)
}

// ── Balancing and splitting ────────────────────────────────────────

/// Truncate every class to the smallest class count (seeded subsample),
/// then split each class `floor(r_train·n) / floor(r_val·n) / remainder`
/// into stratified shuffled train/val/test sets.
pub fn balance_and_split(
    dataset: &SignalDataset,
    ratios: (f64, f64, f64),
    seed: u64,
) -> Result<SplitDataset> {
    dataset.validate()?;
    let (r_train, r_val, r_test) = ratios;
    if r_train <= 0.0 || r_val < 0.0 || r_test < 0.0 || (r_train + r_val + r_test - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(
            "balance_and_split",
            format!("ratios must be positive and sum to 1, got {ratios:?}"),
        ));
    }
    let counts = dataset.class_counts();
    const MIN_PER_CLASS: usize = 10;
    if counts.iter().any(|&c| c < MIN_PER_CLASS) {
        return Err(Error::invalid(
            "balance_and_split",
            format!("every class needs >= {MIN_PER_CLASS} windows, got counts {counts:?}"),
        ));
    }
    let min_count = *counts.iter().min().expect("at least one class");

    let mut train_idx = Vec::new();
    let mut val_idx = Vec::new();
    let mut test_idx = Vec::new();
    for class in 0..dataset.num_classes() {
        let mut members: Vec<usize> = (0..dataset.n_windows)
            .filter(|&i| dataset.labels[i] as usize == class)
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 0xBA1A, class as u64));
        members.shuffle(&mut rng);
        members.truncate(min_count);
        let n_train = (r_train * min_count as f64).floor() as usize;
        let n_val = (r_val * min_count as f64).floor() as usize;
        train_idx.extend_from_slice(&members[..n_train]);
        val_idx.extend_from_slice(&members[n_train..n_train + n_val]);
        test_idx.extend_from_slice(&members[n_train + n_val..]);
    }
    // mix classes within each split
    for (salt, idx) in [(0u64, &mut train_idx), (1, &mut val_idx), (2, &mut test_idx)] {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 0x5917, salt));
        idx.shuffle(&mut rng);
    }
    Ok(SplitDataset {
        train: dataset.subset(&train_idx),
        val: dataset.subset(&val_idx),
        test: dataset.subset(&test_idx),
    })
}

// ── ARCD container ─────────────────────────────────────────────────

pub fn encode_dataset(ds: &SignalDataset) -> Result<Vec<u8>> {
    ds.validate()?;
    if ds.n_windows > u32::MAX as usize
        || ds.channels > u16::MAX as usize
        || ds.window_len > u32::MAX as usize
        || ds.num_classes() > u16::MAX as usize
    {
        return Err(Error::invalid("encode_dataset", "dimensions exceed container limits"));
    }
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(ds.n_windows as u32).to_le_bytes());
    out.extend_from_slice(&(ds.channels as u16).to_le_bytes());
    out.extend_from_slice(&(ds.window_len as u32).to_le_bytes());
    out.extend_from_slice(&(ds.num_classes() as u16).to_le_bytes());
    for name in &ds.class_names {
        let bytes = name.as_bytes();
        out.extend_from_slice(&(bytes.len() as u16).to_le_bytes());
        out.extend_from_slice(bytes);
    }
    for &label in &ds.labels {
        out.extend_from_slice(&label.to_le_bytes());
    }
    for &v in &ds.samples {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

/// Parse an `ARCD` container. Sizes from the header are validated against
/// the actual byte count before any allocation.
pub fn parse_dataset(bytes: &[u8], path: &str) -> Result<SignalDataset> {
    let need = |pos: usize, n: usize, what: &str| -> Result<()> {
        if bytes.len() < pos + n {
            Err(Error::format(path, format!("truncated while reading {what}")))
        } else {
            Ok(())
        }
    };
    need(0, 12, "header")?;
    if &bytes[0..4] != MAGIC {
        return Err(Error::format(
            path,
            format!("bad magic {:02x?}, expected \"ARCD\"", &bytes[0..4]),
        ));
    }
    let version = u16::from_le_bytes(bytes[4..6].try_into().unwrap());
    if version != VERSION {
        return Err(Error::format(path, format!("unsupported version {version}")));
    }
    let n_windows = u32::from_le_bytes(bytes[6..10].try_into().unwrap()) as usize;
    need(10, 2 + 4 + 2, "dimensions")?;
    let channels = u16::from_le_bytes(bytes[10..12].try_into().unwrap()) as usize;
    let window_len = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let k = u16::from_le_bytes(bytes[16..18].try_into().unwrap()) as usize;
    if channels == 0 || window_len == 0 {
        return Err(Error::format(path, "zero channels or window length"));
    }
    let mut pos = 18usize;
    let mut class_names = Vec::with_capacity(k.min(1024));
    for i in 0..k {
        need(pos, 2, "class-name length")?;
        let len = u16::from_le_bytes(bytes[pos..pos + 2].try_into().unwrap()) as usize;
        pos += 2;
        need(pos, len, "class name")?;
        let name = std::str::from_utf8(&bytes[pos..pos + len])
            .map_err(|_| Error::format(path, format!("class name {i} is not UTF-8")))?;
        class_names.push(name.to_string());
        pos += len;
    }
    let label_bytes = n_windows
        .checked_mul(2)
        .ok_or_else(|| Error::format(path, "label table overflow"))?;
    let sample_count = n_windows
        .checked_mul(channels)
        .and_then(|v| v.checked_mul(window_len))
        .ok_or_else(|| Error::format(path, "sample count overflow"))?;
    let sample_bytes = sample_count
        .checked_mul(4)
        .ok_or_else(|| Error::format(path, "sample table overflow"))?;
    let expected = pos + label_bytes + sample_bytes;
    if bytes.len() != expected {
        return Err(Error::format(
            path,
            format!("size mismatch: header implies {expected} bytes, file has {}", bytes.len()),
        ));
    }
    let labels: Vec<u16> = bytes[pos..pos + label_bytes]
        .chunks_exact(2)
        .map(|c| u16::from_le_bytes(c.try_into().unwrap()))
        .collect();
    pos += label_bytes;
    if let Some(&bad) = labels.iter().find(|&&l| l as usize >= k) {
        return Err(Error::format(path, format!("label {bad} out of range for {k} classes")));
    }
    let samples: Vec<f32> = bytes[pos..pos + sample_bytes]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(SignalDataset {
        samples,
        n_windows,
        channels,
        window_len,
        labels,
        class_names,
        meta: DatasetMeta::default(),
    })
}

pub fn save_dataset(ds: &SignalDataset, path: &Path) -> Result<()> {
    std::fs::write(path, encode_dataset(ds)?)?;
    Ok(())
}

pub fn load_dataset(path: &Path) -> Result<SignalDataset> {
    let bytes = std::fs::read(path)?;
    parse_dataset(&bytes, &path.display().to_string())
}

// ── CSV interchange ────────────────────────────────────────────────

/// One window per row: label in the first column, then
/// `channels · window_len` sample values in window-major order.
pub fn export_csv(ds: &SignalDataset, path: &Path) -> Result<()> {
    ds.validate()?;
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for i in 0..ds.n_windows {
        let mut record = Vec::with_capacity(1 + ds.channels * ds.window_len);
        record.push(ds.labels[i].to_string());
        record.extend(ds.window(i).iter().map(|v| v.to_string()));
        writer
            .write_record(&record)
            .map_err(|e| Error::format(path.display().to_string(), e.to_string()))?;
    }
    writer
        .flush()
        .map_err(|e| Error::format(path.display().to_string(), e.to_string()))?;
    Ok(())
}

/// Import a dataset from CSV. Class names default to `class_<k>` up to the
/// largest label present unless `class_names` is given.
pub fn import_csv(path: &Path, class_names: Option<Vec<String>>) -> Result<SignalDataset> {
    let display = path.display().to_string();
    let file = std::fs::File::open(path)?;
    import_csv_reader(file, &display, class_names)
}

/// CSV import from any reader; `display` names the source in errors.
pub fn import_csv_reader(
    source: impl std::io::Read,
    display: &str,
    class_names: Option<Vec<String>>,
) -> Result<SignalDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(false)
        .from_reader(source);
    let mut samples = Vec::new();
    let mut labels: Vec<u16> = Vec::new();
    let mut window_len: Option<usize> = None;
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::format(display, format!("row {row}: {e}")))?;
        if record.len() < 2 {
            return Err(Error::format(display, format!("row {row}: need label plus samples")));
        }
        let label: u16 = record[0]
            .trim()
            .parse()
            .map_err(|_| Error::format(display, format!("row {row}: bad label `{}`", &record[0])))?;
        let values: Vec<f32> = record
            .iter()
            .skip(1)
            .enumerate()
            .map(|(col, cell)| {
                cell.trim().parse::<f32>().map_err(|_| {
                    Error::format(display, format!("row {row}, column {}: bad sample `{cell}`", col + 1))
                })
            })
            .collect::<Result<_>>()?;
        match window_len {
            None => window_len = Some(values.len()),
            Some(w) if w != values.len() => {
                return Err(Error::format(
                    display,
                    format!("row {row}: {} samples, expected {w}", values.len()),
                ));
            }
            _ => {}
        }
        labels.push(label);
        samples.extend(values);
    }
    let window_len = window_len.ok_or_else(|| Error::format(display, "empty CSV"))?;
    let k = labels.iter().map(|&l| l as usize + 1).max().unwrap_or(0);
    let class_names = match class_names {
        Some(names) => {
            if names.len() < k {
                return Err(Error::format(
                    display,
                    format!("{} class names for labels up to {}", names.len(), k - 1),
                ));
            }
            names
        }
        None => (0..k).map(|i| format!("class_{i}")).collect(),
    };
    let ds = SignalDataset {
        n_windows: labels.len(),
        channels: 1,
        window_len,
        samples,
        labels,
        class_names,
        meta: DatasetMeta::default(),
    };
    ds.validate()?;
    Ok(ds)
}

// ── Sample-stream text format ──────────────────────────────────────

/// Parse a newline-delimited decimal sample stream (the streaming-inference
/// wire format). Blank lines are ignored. In strict mode a malformed line
/// is an error; otherwise it is skipped and reported through `on_skip`.
pub fn parse_sample_lines(
    source: impl std::io::BufRead,
    strict: bool,
    mut on_skip: impl FnMut(usize, &str),
) -> Result<Vec<f64>> {
    let mut samples = Vec::new();
    for (lineno, line) in source.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        match trimmed.parse::<f64>() {
            Ok(v) => samples.push(v),
            Err(_) if strict => {
                return Err(Error::format(
                    "sample stream",
                    format!("line {}: malformed sample `{trimmed}`", lineno + 1),
                ));
            }
            Err(_) => on_skip(lineno + 1, trimmed),
        }
    }
    Ok(samples)
}

// ── Full generation pipeline ───────────────────────────────────────

/// Settings for generating a labeled dataset from scratch.
#[derive(Debug, Clone)]
pub struct DatasetSpec {
    /// Total classes; must be even (each load contributes normal + arc).
    pub classes: usize,
    pub records_per_class: usize,
    pub duration_s: f64,
    pub sample_rate: f64,
    pub window: usize,
    pub step: usize,
    pub decimate: usize,
    pub snr_db: Option<f64>,
    pub seed: u64,
    /// Moving-average prefilter before decimation.
    pub prefilter: bool,
    pub mains_hz: f64,
    pub arc: ArcParams,
    /// Re-ignition ring frequency of the first load profile; profile `p`
    /// rings at `ring_base_hz · ring_step^p` (capped below Nyquist).
    pub ring_base_hz: f64,
    pub ring_step: f64,
    /// Trailing fraction of every non-first load's normal records spent in
    /// an operating state identical to the previous load (appliances cycle
    /// through resistive-equivalent modes). Windows inside that segment are
    /// exact cross-class collisions, so the task has a genuine Bayes floor
    /// instead of being perfectly separable.
    pub ambiguous_frac: f64,
}

impl DatasetSpec {
    pub fn new(classes: usize, records_per_class: usize) -> Self {
        DatasetSpec {
            classes,
            records_per_class,
            duration_s: 5.0,
            sample_rate: 200_000.0,
            window: 10_000,
            step: 5_000,
            decimate: 10,
            snr_db: None,
            seed: 0,
            prefilter: false,
            mains_hz: 50.0,
            arc: ArcParams::default(),
            ring_base_hz: 2_000.0,
            ring_step: 1.7,
            ambiguous_frac: 0.04,
        }
    }
}

/// Generate the full labeled dataset: `classes/2` load profiles, each with a
/// normal and an arcing class, `records_per_class` records each, windowed
/// and decimated, with optional additive noise at a fixed SNR.
pub fn generate_dataset(spec: &DatasetSpec) -> Result<SignalDataset> {
    if spec.classes < 2 || spec.classes % 2 != 0 {
        return Err(Error::invalid(
            "generate_dataset",
            format!("classes must be even and >= 2, got {}", spec.classes),
        ));
    }
    if spec.records_per_class == 0 {
        return Err(Error::invalid("generate_dataset", "records_per_class must be >= 1"));
    }
    let profiles: Vec<LoadProfile> =
        generator::default_profiles(spec.classes / 2, mix_seed(spec.seed, 0x906F, 0));
    let mut gen_cfg = GeneratorConfig::new(spec.sample_rate, spec.duration_s);
    gen_cfg.mains_hz = spec.mains_hz;

    let mut samples = Vec::new();
    let mut labels = Vec::new();
    let mut class_names = Vec::with_capacity(spec.classes);
    let mut window_len_out = 0usize;
    for (p, profile) in profiles.iter().enumerate() {
        // each load's re-ignition resonance sits at its own frequency
        gen_cfg.arc = ArcParams {
            ring_hz: if spec.ring_base_hz > 0.0 {
                (spec.ring_base_hz * spec.ring_step.powi(p as i32)).min(0.4 * spec.sample_rate)
            } else {
                0.0
            },
            ..spec.arc.clone()
        };
        for (kind_idx, kind) in [SignalKind::Normal, SignalKind::Arc].into_iter().enumerate() {
            let class = (p * 2 + kind_idx) as u16;
            class_names.push(format!(
                "{}-{}",
                profile.name,
                if kind == SignalKind::Normal { "normal" } else { "arc" }
            ));
            for r in 0..spec.records_per_class {
                let record_seed = mix_seed(spec.seed, class as u64, r as u64);
                let mut record = gen_arc_waveform(kind, profile, &gen_cfg, record_seed)?;
                if kind == SignalKind::Normal && p > 0 && spec.ambiguous_frac > 0.0 {
                    // the trailing segment replays the previous load's record
                    let twin_class = ((p - 1) * 2) as u64;
                    let twin_seed = mix_seed(spec.seed, twin_class, r as u64);
                    let twin =
                        gen_arc_waveform(SignalKind::Normal, &profiles[p - 1], &gen_cfg, twin_seed)?;
                    let n = record.len().min(twin.len());
                    let tail = ((spec.ambiguous_frac * n as f64).round() as usize).min(n);
                    record[n - tail..n].copy_from_slice(&twin[n - tail..n]);
                }
                if let Some(snr) = spec.snr_db {
                    record = add_noise_snr(&record, snr, mix_seed(spec.seed ^ 0x4E01_5E00, class as u64, r as u64))?;
                }
                let windows =
                    window_and_downsample(&record, spec.window, spec.step, spec.decimate, spec.prefilter)?;
                let shape = windows.shape3()?;
                window_len_out = shape.length;
                samples.extend_from_slice(windows.data());
                labels.extend(std::iter::repeat_n(class, shape.batch));
            }
        }
    }
    let ds = SignalDataset {
        n_windows: labels.len(),
        channels: 1,
        window_len: window_len_out,
        samples,
        labels,
        class_names,
        meta: DatasetMeta {
            sampling_time_s: spec.decimate as f64 / spec.sample_rate,
            snr_db: spec.snr_db,
            seed: spec.seed,
            description: format!(
                "synthetic {} classes x {} records, window {} step {} decimate {}",
                spec.classes, spec.records_per_class, spec.window, spec.step, spec.decimate
            ),
        },
    };
    ds.validate()?;
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::dfs::dfs_forward;

    fn toy_dataset(counts: &[usize]) -> SignalDataset {
        let window_len = 8usize;
        let mut samples = Vec::new();
        let mut labels = Vec::new();
        for (class, &count) in counts.iter().enumerate() {
            for i in 0..count {
                labels.push(class as u16);
                samples.extend((0..window_len).map(|j| (class * 1000 + i * 10 + j) as f32));
            }
        }
        SignalDataset {
            n_windows: labels.len(),
            channels: 1,
            window_len,
            samples,
            labels,
            class_names: counts.iter().enumerate().map(|(i, _)| format!("c{i}")).collect(),
            meta: DatasetMeta::default(),
        }
    }

    #[test]
    fn window_count_matches_paper_arithmetic() {
        // 1,000,000 samples, window 10,000, step 5,000 → 199 windows
        let x = vec![0.5f64; 1_000_000];
        let t = window_and_downsample(&x, 10_000, 5_000, 10, false).unwrap();
        assert_eq!(t.shape(), &[199, 1, 1_000]);
    }

    #[test]
    fn identity_downsampling_and_block_length() {
        let x: Vec<f64> = (0..40).map(|v| v as f64).collect();
        let t = window_and_downsample(&x, 20, 10, 1, false).unwrap();
        assert_eq!(t.shape(), &[3, 1, 20]);
        assert_eq!(&t.data()[..20], &(0..20).map(|v| v as f32).collect::<Vec<_>>()[..]);
        // window 10,000 with factor 5 → 2,000 per window
        let y = vec![1.0f64; 10_000];
        let t = window_and_downsample(&y, 10_000, 10_000, 5, false).unwrap();
        assert_eq!(t.shape(), &[1, 1, 2_000]);
    }

    #[test]
    fn window_larger_than_record_is_error() {
        assert!(window_and_downsample(&[0.0; 10], 20, 5, 1, false).is_err());
        assert!(window_and_downsample(&[0.0; 30], 20, 5, 3, false).is_err()); // 3 ∤ 20
    }

    #[test]
    fn decimated_tone_keeps_its_bin() {
        // 100 Hz tone at 8 kHz, decimate by 4 → 2 kHz, bin = 100·N·dt
        let rate = 8_000.0;
        let x: Vec<f64> = (0..8_000)
            .map(|i| (2.0 * std::f64::consts::PI * 100.0 * i as f64 / rate).sin())
            .collect();
        let windows = window_and_downsample(&x, 8_000, 8_000, 4, false).unwrap();
        let w: Vec<f64> = windows.data().iter().map(|&v| v as f64).collect();
        let spec = dfs_forward(&w, 4.0 / rate);
        let dominant = (1..w.len() / 2)
            .max_by(|&a, &b| {
                spec.coefficients[a]
                    .norm()
                    .partial_cmp(&spec.coefficients[b].norm())
                    .unwrap()
            })
            .unwrap();
        assert!((spec.frequency_hz(dominant) - 100.0).abs() < 1e-9);
    }

    #[test]
    fn balancing_truncates_to_min_count() {
        let ds = toy_dataset(&[120, 80]);
        let split = balance_and_split(&ds, (0.8, 0.1, 0.1), 7).unwrap();
        let total = split.train.n_windows + split.val.n_windows + split.test.n_windows;
        assert_eq!(total, 160); // both classes truncated to 80
        for s in [&split.train, &split.val, &split.test] {
            let counts = s.class_counts();
            assert_eq!(counts[0], counts[1]);
        }
    }

    #[test]
    fn split_ratios_800_100_100() {
        let ds = toy_dataset(&[500, 500]);
        let split = balance_and_split(&ds, (0.8, 0.1, 0.1), 3).unwrap();
        assert_eq!(split.train.n_windows, 800);
        assert_eq!(split.val.n_windows, 100);
        assert_eq!(split.test.n_windows, 100);
    }

    #[test]
    fn splits_are_disjoint_and_cover_balanced_set() {
        let ds = toy_dataset(&[37, 29, 41]);
        let split = balance_and_split(&ds, (0.8, 0.1, 0.1), 11).unwrap();
        // windows carry unique content, so compare fingerprints
        let finger = |s: &SignalDataset| -> std::collections::BTreeSet<String> {
            (0..s.n_windows)
                .map(|i| format!("{:?}", s.window(i)))
                .collect()
        };
        let a = finger(&split.train);
        let b = finger(&split.val);
        let c = finger(&split.test);
        assert!(a.is_disjoint(&b) && a.is_disjoint(&c) && b.is_disjoint(&c));
        assert_eq!(a.len() + b.len() + c.len(), 3 * 29);
    }

    #[test]
    fn same_seed_same_split_membership() {
        let ds = toy_dataset(&[50, 50]);
        let s1 = balance_and_split(&ds, (0.8, 0.1, 0.1), 42).unwrap();
        let s2 = balance_and_split(&ds, (0.8, 0.1, 0.1), 42).unwrap();
        assert_eq!(s1.train, s2.train);
        assert_eq!(s1.val, s2.val);
        assert_eq!(s1.test, s2.test);
    }

    #[test]
    fn class_below_minimum_is_error() {
        let ds = toy_dataset(&[50, 5]);
        let err = balance_and_split(&ds, (0.8, 0.1, 0.1), 1).unwrap_err();
        assert!(err.to_string().contains("[50, 5]"), "{err}");
    }

    #[test]
    fn container_roundtrip_byte_identical() {
        let ds = toy_dataset(&[12, 12]);
        let bytes = encode_dataset(&ds).unwrap();
        let back = parse_dataset(&bytes, "mem").unwrap();
        assert_eq!(back.samples, ds.samples);
        assert_eq!(back.labels, ds.labels);
        assert_eq!(back.class_names, ds.class_names);
        let again = encode_dataset(&back).unwrap();
        assert_eq!(bytes, again);
    }

    #[test]
    fn container_rejects_corruption() {
        let ds = toy_dataset(&[12, 12]);
        let bytes = encode_dataset(&ds).unwrap();
        let mut bad_magic = bytes.clone();
        bad_magic[0] = b'X';
        assert!(parse_dataset(&bad_magic, "mem").is_err());
        // truncation at every interesting boundary
        for cut in [3, 11, 17, 30, bytes.len() - 1] {
            assert!(parse_dataset(&bytes[..cut], "mem").is_err(), "cut {cut}");
        }
        // size mismatch: inflate n_windows
        let mut inflated = bytes.clone();
        inflated[6..10].copy_from_slice(&u32::MAX.to_le_bytes());
        assert!(parse_dataset(&inflated, "mem").is_err());
    }

    #[test]
    fn csv_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.csv");
        let ds = toy_dataset(&[11, 13]);
        export_csv(&ds, &path).unwrap();
        let back = import_csv(&path, Some(ds.class_names.clone())).unwrap();
        assert_eq!(back.samples, ds.samples);
        assert_eq!(back.labels, ds.labels);
        assert_eq!(back.window_len, ds.window_len);
    }

    #[test]
    fn generated_dataset_is_balanced_and_deterministic() {
        let mut spec = DatasetSpec::new(4, 2);
        spec.duration_s = 0.5;
        spec.sample_rate = 10_000.0;
        spec.window = 1_000;
        spec.step = 1_000;
        spec.decimate = 2;
        spec.seed = 5;
        let a = generate_dataset(&spec).unwrap();
        let b = generate_dataset(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.num_classes(), 4);
        let counts = a.class_counts();
        assert!(counts.iter().all(|&c| c == counts[0]));
        assert_eq!(a.window_len, 500);
        assert_eq!(a.meta.sampling_time_s, 2.0 / 10_000.0);
    }

    #[test]
    fn generated_dataset_with_noise_differs_from_clean() {
        let mut spec = DatasetSpec::new(2, 1);
        spec.duration_s = 0.2;
        spec.sample_rate = 5_000.0;
        spec.window = 500;
        spec.step = 500;
        spec.decimate = 1;
        let clean = generate_dataset(&spec).unwrap();
        spec.snr_db = Some(0.0);
        let noisy = generate_dataset(&spec).unwrap();
        assert_eq!(clean.n_windows, noisy.n_windows);
        assert_ne!(clean.samples, noisy.samples);
    }
}
