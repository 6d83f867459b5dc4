//! Command-line frontend: dataset generation, training, evaluation,
//! complexity counting, the occlusion/decomposition/branch-dump analysis
//! protocols, and streaming inference over newline-delimited samples.
//!
//! Every run emits a textual key-value manifest capturing the flag snapshot,
//! seeds, artifact paths, timing, and tool version. Exit codes: 0 success,
//! 2 usage, 3 file/format, 4 numeric failure.

use clap::{Args, Parser, Subcommand};
use mfnn::analysis;
use mfnn::checkpoint;
use mfnn::error::Error;
use mfnn::model::{count_complexity, count_params, MfnnModel, ModelConfig, ModelVariant};
use mfnn::scalar::Scalar;
use mfnn::signals::{self, generator::ArcParams, DatasetSpec, SignalDataset};
use mfnn::tensor::Tensor;
use mfnn::training::{self, TrainConfig};
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

const EXIT_USAGE: i32 = 2;
const EXIT_FILE: i32 = 3;
const EXIT_NUMERIC: i32 = 4;

#[derive(Parser)]
#[command(name = "mfnn", version, about = "Multi-frequency network arc-fault diagnosis toolkit")]
struct Cli {
    /// Floating-point width for this run (f32 for speed, f64 for verification).
    #[arg(long, global = true, default_value = "f32", value_parser = ["f32", "f64"])]
    precision: String,

    /// Write the run manifest here instead of next to the main output.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic labeled dataset and write an ARCD container.
    GenData(GenDataArgs),
    /// Train a model on an ARCD dataset.
    Train(TrainArgs),
    /// Evaluate a checkpoint on an ARCD dataset.
    Eval(EvalArgs),
    /// Report parameter count, FLOPs, and peak memory for a configuration.
    Count(CountArgs),
    /// Occlusion sensitivity map for one window.
    Occlude(OccludeArgs),
    /// Dump branch-network outputs and per-channel spectral summaries.
    DumpBranches(DumpBranchesArgs),
    /// Decompose a signal into its dominant periodic components.
    Decompose(DecomposeArgs),
    /// Classify a sliding window over a stream of decimal samples.
    Stream(StreamArgs),
    /// Convert between ARCD containers and CSV.
    Convert(ConvertArgs),
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct GenDataArgs {
    /// Total classes (each load profile contributes normal + arc).
    #[arg(long, default_value_t = 16)]
    classes: usize,
    #[arg(long, default_value_t = 10)]
    records_per_class: usize,
    #[arg(long, default_value_t = 5.0)]
    duration_s: f64,
    #[arg(long, default_value_t = 200_000.0)]
    sample_rate: f64,
    #[arg(long, default_value_t = 10_000)]
    window: usize,
    #[arg(long, default_value_t = 5_000)]
    step: usize,
    /// Keep every n-th sample of each window.
    #[arg(long, default_value_t = 10)]
    decimate: usize,
    /// Add white Gaussian noise at this SNR (dB).
    #[arg(long)]
    snr_db: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Moving-average prefilter before decimation.
    #[arg(long, default_value_t = false)]
    prefilter: bool,
    /// Latest fault onset as a fraction of the record duration.
    #[arg(long, default_value_t = 0.02)]
    onset_max: f64,
    /// Trailing fraction of non-first loads' normal records spent in a
    /// previous-load-equivalent operating state (cross-class ambiguity).
    #[arg(long, default_value_t = 0.04)]
    ambiguous_frac: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    /// ARCD dataset to train on.
    #[arg(long)]
    data: PathBuf,
    /// Checkpoint path for the best-validation model of the first run.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "mfnn", value_parser = ["mfnn", "one-trunk", "relu-m"])]
    variant: String,
    #[arg(long, default_value_t = 100)]
    epochs: usize,
    #[arg(long, default_value_t = 32)]
    batch_size: usize,
    #[arg(long, default_value_t = 1e-3)]
    lr: f64,
    #[arg(long, default_value_t = 0.5)]
    decay_factor: f64,
    #[arg(long, default_value_t = 30)]
    decay_every: usize,
    /// Training seed (shuffling); run r uses seed + r.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Model initialization seed; run r uses model-seed + r.
    #[arg(long, default_value_t = 0)]
    model_seed: u64,
    /// Split seed for the 0.8/0.1/0.1 partition.
    #[arg(long, default_value_t = 0)]
    split_seed: u64,
    /// Number of seed-averaged runs.
    #[arg(long, default_value_t = 1)]
    runs: usize,
    /// Directory for per-run reports and loss curves.
    #[arg(long)]
    report_dir: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    checkpoint: PathBuf,
}

#[derive(Args)]
struct CountArgs {
    /// Input window length the model is built for.
    #[arg(long)]
    length: usize,
    #[arg(long, default_value = "mfnn", value_parser = ["mfnn", "one-trunk", "relu-m"])]
    variant: String,
    #[arg(long, default_value_t = 16)]
    classes: usize,
    /// Also sweep input lengths and report where the parameter count lands
    /// nearest this target.
    #[arg(long)]
    params_target: Option<u64>,
}

#[derive(Args)]
struct OccludeArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Window index within the dataset.
    #[arg(long, default_value_t = 0)]
    index: usize,
    #[arg(long, default_value_t = 200)]
    size: usize,
    #[arg(long, default_value_t = 100)]
    stride: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DumpBranchesArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 0)]
    index: usize,
    /// Directory for branch_dump.csv and branch_summary.csv.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct DecomposeArgs {
    /// Newline-delimited decimal samples ("-" for stdin).
    #[arg(long)]
    input: String,
    /// Sampling interval in seconds.
    #[arg(long)]
    dt: f64,
    #[arg(long, default_value_t = 5)]
    top_k: usize,
    /// Component table CSV.
    #[arg(long)]
    out: PathBuf,
    /// Also write reconstructed component waveforms and the residual.
    #[arg(long)]
    waveforms_out: Option<PathBuf>,
}

#[derive(Args)]
struct StreamArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    /// Newline-delimited decimal samples ("-" for stdin).
    #[arg(long)]
    input: String,
    /// Window length; defaults to the checkpoint's input length.
    #[arg(long)]
    window: Option<usize>,
    /// Step between classified windows; defaults to window/2.
    #[arg(long)]
    step: Option<usize>,
    #[arg(long, default_value_t = 10.0)]
    latency_budget_ms: f64,
    /// Abort on malformed sample lines instead of skipping with a warning.
    #[arg(long, default_value_t = false)]
    strict: bool,
    /// Comma-separated class names for the output stream.
    #[arg(long)]
    class_names: Option<String>,
}

#[derive(Args)]
struct ConvertArgs {
    /// Input file (.arcd or .csv, by extension).
    #[arg(long)]
    input: PathBuf,
    /// Output file (.arcd or .csv, by extension).
    #[arg(long)]
    out: PathBuf,
}

fn main() {
    let cli = Cli::parse();
    let code = match run_dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) | Error::Format { .. } => EXIT_FILE,
                Error::InvalidArgument { .. } => EXIT_USAGE,
                Error::ShapeMismatch { .. } | Error::NonFinite { .. } => EXIT_NUMERIC,
            }
        }
    };
    std::process::exit(code);
}

fn run_dispatch(cli: &Cli) -> mfnn::Result<()> {
    match cli.precision.as_str() {
        "f64" => run::<f64>(cli),
        _ => run::<f32>(cli),
    }
}

fn run<T: Scalar>(cli: &Cli) -> mfnn::Result<()> {
    match &cli.command {
        Command::GenData(args) => cmd_gen_data(cli, args),
        Command::Train(args) => cmd_train::<T>(cli, args),
        Command::Eval(args) => cmd_eval::<T>(cli, args),
        Command::Count(args) => cmd_count(cli, args),
        Command::Occlude(args) => cmd_occlude::<T>(cli, args),
        Command::DumpBranches(args) => cmd_dump_branches::<T>(cli, args),
        Command::Decompose(args) => cmd_decompose(cli, args),
        Command::Stream(args) => cmd_stream::<T>(cli, args),
        Command::Convert(args) => cmd_convert(cli, args),
    }
}

/// Key-value run manifest accumulated by each command.
struct Manifest {
    entries: Vec<(String, String)>,
    started: Instant,
}

impl Manifest {
    fn new(command: &str, cli: &Cli) -> Self {
        let mut m = Manifest {
            entries: Vec::new(),
            started: Instant::now(),
        };
        m.push("command", command);
        m.push("tool_version", env!("CARGO_PKG_VERSION"));
        m.push("precision", &cli.precision);
        m
    }

    fn push(&mut self, key: &str, value: impl std::fmt::Display) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    /// Write to the explicit path if given, else next to the anchor output,
    /// else print to stdout.
    fn finish(mut self, explicit: Option<&Path>, anchor: Option<&Path>) -> mfnn::Result<()> {
        self.push("elapsed_s", format!("{:.3}", self.started.elapsed().as_secs_f64()));
        let text: String = self
            .entries
            .iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect();
        let path = explicit.map(PathBuf::from).or_else(|| {
            anchor.map(|p| {
                let mut os = p.as_os_str().to_owned();
                os.push(".run-manifest.txt");
                PathBuf::from(os)
            })
        });
        match path {
            Some(p) => std::fs::write(p, text)?,
            // keep stdout clean for parseable command output
            None => eprint!("--- run manifest ---\n{text}"),
        }
        Ok(())
    }
}

fn cmd_gen_data(cli: &Cli, args: &GenDataArgs) -> mfnn::Result<()> {
    let mut manifest = Manifest::new("gen-data", cli);
    let mut spec = DatasetSpec::new(args.classes, args.records_per_class);
    spec.duration_s = args.duration_s;
    spec.sample_rate = args.sample_rate;
    spec.window = args.window;
    spec.step = args.step;
    spec.decimate = args.decimate;
    spec.snr_db = args.snr_db;
    spec.seed = args.seed;
    spec.prefilter = args.prefilter;
    spec.ambiguous_frac = args.ambiguous_frac;
    spec.arc = ArcParams {
        onset_frac: (0.0, args.onset_max),
        ..ArcParams::default()
    };
    let ds = signals::generate_dataset(&spec)?;
    signals::save_dataset(&ds, &args.out)?;
    println!(
        "wrote {} windows ({} classes, window_len {}) to {}",
        ds.n_windows,
        ds.num_classes(),
        ds.window_len,
        args.out.display()
    );
    manifest.push("classes", args.classes);
    manifest.push("records_per_class", args.records_per_class);
    manifest.push("duration_s", args.duration_s);
    manifest.push("sample_rate", args.sample_rate);
    manifest.push("window", args.window);
    manifest.push("step", args.step);
    manifest.push("decimate", args.decimate);
    manifest.push("snr_db", args.snr_db.map_or("none".into(), |v| v.to_string()));
    manifest.push("seed", args.seed);
    manifest.push("prefilter", args.prefilter);
    manifest.push("onset_max", args.onset_max);
    manifest.push("ambiguous_frac", args.ambiguous_frac);
    manifest.push("out", args.out.display());
    manifest.push("n_windows", ds.n_windows);
    manifest.finish(cli.manifest.as_deref(), Some(&args.out))
}

fn cmd_train<T: Scalar>(cli: &Cli, args: &TrainArgs) -> mfnn::Result<()> {
    let mut manifest = Manifest::new("train", cli);
    let ds = signals::load_dataset(&args.data)?;
    let split = signals::balance_and_split(&ds, (0.8, 0.1, 0.1), args.split_seed)?;
    let model_cfg = ModelConfig {
        num_classes: ds.num_classes(),
        input_length: ds.window_len,
        in_channels: ds.channels,
        variant: ModelVariant::parse(&args.variant)?,
        seed: args.model_seed,
        ..ModelConfig::paper_defaults(ds.window_len)
    };
    let train_cfg = TrainConfig {
        batch_size: args.batch_size,
        epochs: args.epochs,
        lr0: args.lr,
        decay_factor: args.decay_factor,
        decay_every: args.decay_every,
        seed: args.seed,
        num_runs: args.runs,
        ..TrainConfig::default()
    };

    let mut reports = Vec::with_capacity(args.runs.max(1));
    for run in 0..args.runs.max(1) {
        let mut model = MfnnModel::<T>::new(ModelConfig {
            seed: args.model_seed.wrapping_add(run as u64),
            ..model_cfg.clone()
        })?;
        let cfg = TrainConfig {
            seed: args.seed.wrapping_add(run as u64),
            ..train_cfg.clone()
        };
        let (report, best_model) = training::train(&mut model, &split, &cfg)?;
        println!(
            "run {run}: best val acc {:.4} (epoch {}), test acc {:.4} (best-val) / {:.4} (last epoch)",
            report.best_val_acc, report.best_val_epoch, report.test_acc, report.last_epoch_test_acc
        );
        if let Some(dir) = &args.report_dir {
            std::fs::create_dir_all(dir)?;
            std::fs::write(
                dir.join(format!("run{run}_report.txt")),
                training::report_text(&report),
            )?;
            std::fs::write(
                dir.join(format!("run{run}_curves.csv")),
                training::curves_csv(&report),
            )?;
        }
        if run == 0 {
            checkpoint::save_model(&best_model, &args.out)?;
            println!(
                "best-validation checkpoint of run 0 written to {}",
                args.out.display()
            );
        }
        reports.push(report);
    }
    let mean_test: f64 = reports.iter().map(|r| r.test_acc).sum::<f64>() / reports.len() as f64;
    let mean_last: f64 =
        reports.iter().map(|r| r.last_epoch_test_acc).sum::<f64>() / reports.len() as f64;
    println!(
        "mean over {} run(s): test acc {:.4} (best-val) / {:.4} (last epoch)",
        reports.len(),
        mean_test,
        mean_last
    );
    manifest.push("data", args.data.display());
    manifest.push("out", args.out.display());
    manifest.push("variant", &args.variant);
    manifest.push("epochs", args.epochs);
    manifest.push("batch_size", args.batch_size);
    manifest.push("lr0", args.lr);
    manifest.push("decay_factor", args.decay_factor);
    manifest.push("decay_every", args.decay_every);
    manifest.push("seed", args.seed);
    manifest.push("model_seed", args.model_seed);
    manifest.push("split_seed", args.split_seed);
    manifest.push("runs", args.runs);
    manifest.push("mean_test_acc_best_val", mean_test);
    manifest.push("mean_test_acc_last_epoch", mean_last);
    manifest.finish(cli.manifest.as_deref(), Some(&args.out))
}

fn cmd_eval<T: Scalar>(cli: &Cli, args: &EvalArgs) -> mfnn::Result<()> {
    let mut manifest = Manifest::new("eval", cli);
    let ds = signals::load_dataset(&args.data)?;
    let model = checkpoint::load_model::<T>(&args.checkpoint)?;
    let (acc, confusion) = training::evaluate(&model, &ds)?;
    println!("accuracy {:.4} over {} windows", acc, ds.n_windows);
    println!("confusion (rows = true class):");
    for (i, row) in confusion.iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
        println!("  {i:>2} | {}", cells.join(" "));
    }
    manifest.push("data", args.data.display());
    manifest.push("checkpoint", args.checkpoint.display());
    manifest.push("accuracy", acc);
    manifest.finish(cli.manifest.as_deref(), None)
}

fn cmd_count(cli: &Cli, args: &CountArgs) -> mfnn::Result<()> {
    let mut manifest = Manifest::new("count", cli);
    let cfg = ModelConfig {
        num_classes: args.classes,
        variant: ModelVariant::parse(&args.variant)?,
        ..ModelConfig::paper_defaults(args.length)
    };
    let report = count_complexity(&cfg)?;
    println!("variant    | params   | flops     | peak MAC bytes");
    println!(
        "{:<10} | {:<8} | {:<9} | {}",
        args.variant, report.params, report.flops, report.peak_mac_bytes
    );
    manifest.push("length", args.length);
    manifest.push("variant", &args.variant);
    manifest.push("classes", args.classes);
    manifest.push("params", report.params);
    manifest.push("flops", report.flops);
    manifest.push("peak_mac_bytes", report.peak_mac_bytes);
    if let Some(target) = args.params_target {
        let mut best: Option<(usize, u64, u64)> = None;
        for length in 8..=8192usize {
            let c = ModelConfig {
                input_length: length,
                ..cfg.clone()
            };
            if c.validate().is_err() {
                continue;
            }
            let p = count_params(&c)?;
            let diff = p.abs_diff(target);
            if best.is_none_or(|(_, _, d)| diff < d) {
                best = Some((length, p, diff));
            }
        }
        if let Some((length, params, diff)) = best {
            println!("closest to {target} params: input length {length} ({params} params, off by {diff})");
            manifest.push("params_target", target);
            manifest.push("closest_length", length);
            manifest.push("closest_params", params);
        }
    }
    manifest.finish(cli.manifest.as_deref(), None)
}

fn load_window<T: Scalar>(ds: &SignalDataset, index: usize) -> mfnn::Result<(Tensor<T>, usize)> {
    if index >= ds.n_windows {
        return Err(Error::invalid(
            "window index",
            format!("{index} out of range for {} windows", ds.n_windows),
        ));
    }
    let data: Vec<T> = ds.window(index).iter().map(|&v| T::of_f32(v)).collect();
    let tensor = Tensor::new(vec![1, ds.channels, ds.window_len], data)?;
    Ok((tensor, ds.labels[index] as usize))
}

fn cmd_occlude<T: Scalar>(cli: &Cli, args: &OccludeArgs) -> mfnn::Result<()> {
    let mut manifest = Manifest::new("occlude", cli);
    let ds = signals::load_dataset(&args.data)?;
    let model = checkpoint::load_model::<T>(&args.checkpoint)?;
    let (window, label) = load_window::<T>(&ds, args.index)?;
    let map = analysis::occlude(&model, &window, label, args.size, args.stride)?;
    std::fs::write(&args.out, analysis::occlusion_csv(&map))?;
    println!(
        "occlusion map: {} positions, baseline prob {:.4}, written to {}",
        map.positions(),
        map.baseline_prob,
        args.out.display()
    );
    manifest.push("checkpoint", args.checkpoint.display());
    manifest.push("data", args.data.display());
    manifest.push("index", args.index);
    manifest.push("size", args.size);
    manifest.push("stride", args.stride);
    manifest.push("out", args.out.display());
    manifest.finish(cli.manifest.as_deref(), Some(&args.out))
}

fn cmd_dump_branches<T: Scalar>(cli: &Cli, args: &DumpBranchesArgs) -> mfnn::Result<()> {
    let mut manifest = Manifest::new("dump-branches", cli);
    let ds = signals::load_dataset(&args.data)?;
    let model = checkpoint::load_model::<T>(&args.checkpoint)?;
    let (window, _) = load_window::<T>(&ds, args.index)?;
    let dt = ds.meta.sampling_time_s;
    let (outputs, summaries) = analysis::dump_branches(&model, &window, dt)?;
    std::fs::create_dir_all(&args.out_dir)?;
    let pool = model.config.pool;
    let dump_path = args.out_dir.join("branch_dump.csv");
    std::fs::write(&dump_path, analysis::branch_dump_csv(&outputs, dt * (pool * pool) as f64)?)?;
    std::fs::write(
        args.out_dir.join("branch_summary.csv"),
        analysis::branch_summary_csv(&summaries),
    )?;
    println!(
        "{} branch traces ({} channels each) written to {}",
        outputs.len(),
        model.config.branch_filters,
        args.out_dir.display()
    );
    manifest.push("checkpoint", args.checkpoint.display());
    manifest.push("data", args.data.display());
    manifest.push("index", args.index);
    manifest.push("out_dir", args.out_dir.display());
    manifest.finish(cli.manifest.as_deref(), Some(&dump_path))
}

fn read_samples(input: &str, strict: bool) -> mfnn::Result<Vec<f64>> {
    let reader: Box<dyn BufRead> = if input == "-" {
        Box::new(std::io::stdin().lock())
    } else {
        Box::new(std::io::BufReader::new(std::fs::File::open(input)?))
    };
    signals::parse_sample_lines(reader, strict, |lineno, _| {
        eprintln!("warning: skipping malformed sample at line {lineno}");
    })
}

fn cmd_decompose(cli: &Cli, args: &DecomposeArgs) -> mfnn::Result<()> {
    let mut manifest = Manifest::new("decompose", cli);
    let samples = read_samples(&args.input, true)?;
    let decomposition = analysis::decompose_signal(&samples, args.dt, args.top_k)?;
    std::fs::write(&args.out, analysis::decomposition_csv(&decomposition))?;
    if let Some(path) = &args.waveforms_out {
        std::fs::write(path, analysis::decomposition_waveforms_csv(&decomposition, args.dt))?;
    }
    println!(
        "top {} components written to {} (residual energy {:.3e})",
        decomposition.components.len(),
        args.out.display(),
        decomposition.residual_energy()
    );
    manifest.push("input", &args.input);
    manifest.push("dt", args.dt);
    manifest.push("top_k", args.top_k);
    manifest.push("out", args.out.display());
    manifest.finish(cli.manifest.as_deref(), Some(&args.out))
}

fn cmd_stream<T: Scalar>(cli: &Cli, args: &StreamArgs) -> mfnn::Result<()> {
    let mut manifest = Manifest::new("stream", cli);
    let model = checkpoint::load_model::<T>(&args.checkpoint)?;
    let window = args.window.unwrap_or(model.config.input_length);
    let step = args.step.unwrap_or_else(|| (window / 2).max(1));
    if window != model.config.input_length {
        return Err(Error::invalid(
            "stream",
            format!(
                "window {window} does not match the checkpoint input length {}",
                model.config.input_length
            ),
        ));
    }
    if step == 0 {
        return Err(Error::invalid("stream", "step must be >= 1"));
    }
    let class_names: Vec<String> = match &args.class_names {
        Some(s) => s.split(',').map(|p| p.trim().to_string()).collect(),
        None => (0..model.config.num_classes)
            .map(|i| format!("class_{i}"))
            .collect(),
    };
    if class_names.len() < model.config.num_classes {
        return Err(Error::invalid(
            "stream",
            format!(
                "{} class names for {} classes",
                class_names.len(),
                model.config.num_classes
            ),
        ));
    }

    let samples = read_samples(&args.input, args.strict)?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let mut latencies_us: Vec<f64> = Vec::new();
    let mut start = 0usize;
    let mut index = 0usize;
    while start + window <= samples.len() {
        let data: Vec<T> = samples[start..start + window]
            .iter()
            .map(|&v| T::of_f64(v))
            .collect();
        let x = Tensor::new(vec![1, 1, window], data)?;
        let t0 = Instant::now();
        let logits = model.infer(&x)?;
        let latency_us = t0.elapsed().as_secs_f64() * 1e6;
        let probs = mfnn::layers::softmax(&logits)?;
        let row = probs.data();
        let pred = training::argmax_row(row);
        writeln!(
            out,
            "{},{},{:.6},{:.1}",
            index,
            class_names[pred],
            row[pred].as_f64(),
            latency_us
        )?;
        latencies_us.push(latency_us);
        start += step;
        index += 1;
    }
    drop(out);
    if latencies_us.is_empty() {
        eprintln!("stream shorter than one window; no classifications");
    } else {
        let mean = latencies_us.iter().sum::<f64>() / latencies_us.len() as f64;
        let mut sorted = latencies_us.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let p95 = sorted[((sorted.len() as f64 * 0.95).ceil() as usize).clamp(1, sorted.len()) - 1];
        let max = *sorted.last().unwrap();
        let budget_us = args.latency_budget_ms * 1e3;
        let verdict = if mean <= budget_us { "within" } else { "exceeds" };
        eprintln!(
            "latency summary: mean {mean:.1} us, p95 {p95:.1} us, max {max:.1} us ({verdict} budget {} ms)",
            args.latency_budget_ms
        );
        manifest.push("latency_mean_us", format!("{mean:.1}"));
        manifest.push("latency_p95_us", format!("{p95:.1}"));
        manifest.push("latency_max_us", format!("{max:.1}"));
    }
    manifest.push("checkpoint", args.checkpoint.display());
    manifest.push("input", &args.input);
    manifest.push("window", window);
    manifest.push("step", step);
    manifest.push("classified_windows", index);
    manifest.push("latency_budget_ms", args.latency_budget_ms);
    manifest.finish(cli.manifest.as_deref(), None)
}

fn cmd_convert(cli: &Cli, args: &ConvertArgs) -> mfnn::Result<()> {
    let mut manifest = Manifest::new("convert", cli);
    let ext = |p: &Path| {
        p.extension()
            .and_then(|e| e.to_str())
            .unwrap_or("")
            .to_ascii_lowercase()
    };
    let ds = match ext(&args.input).as_str() {
        "csv" => signals::import_csv(&args.input, None)?,
        _ => signals::load_dataset(&args.input)?,
    };
    match ext(&args.out).as_str() {
        "csv" => signals::export_csv(&ds, &args.out)?,
        _ => signals::save_dataset(&ds, &args.out)?,
    }
    println!(
        "converted {} windows from {} to {}",
        ds.n_windows,
        args.input.display(),
        args.out.display()
    );
    manifest.push("input", args.input.display());
    manifest.push("out", args.out.display());
    manifest.finish(cli.manifest.as_deref(), Some(&args.out))
}
