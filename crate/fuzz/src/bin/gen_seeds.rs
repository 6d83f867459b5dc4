//! Regenerates the checked-in corpus seeds from small valid inputs.
//! Run from the fuzz directory: `cargo run --bin gen_seeds`.

use mfnn::model::{MfnnModel, ModelConfig, ModelVariant};
use mfnn::signals::{encode_dataset, DatasetMeta, SignalDataset};
use std::path::Path;

fn main() {
    let corpus = Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus");

    // a tiny but fully valid checkpoint
    let model = MfnnModel::<f32>::new(ModelConfig {
        num_branches: 2,
        branch_filters: 2,
        kernel: 3,
        pool: 2,
        trunk_filters: 2,
        fc_width: 4,
        num_classes: 2,
        in_channels: 1,
        input_length: 8,
        variant: ModelVariant::Mfnn,
        seed: 1,
    })
    .expect("tiny config is valid");
    std::fs::write(
        corpus.join("checkpoint_parse/tiny_valid.ckpt"),
        mfnn::checkpoint::encode_model(&model),
    )
    .expect("write checkpoint seed");

    // a tiny but fully valid dataset container
    let ds = SignalDataset {
        samples: (0..4 * 6).map(|i| i as f32 * 0.25 - 2.0).collect(),
        n_windows: 4,
        channels: 1,
        window_len: 6,
        labels: vec![0, 1, 0, 1],
        class_names: vec!["normal".into(), "arc".into()],
        meta: DatasetMeta::default(),
    };
    std::fs::write(
        corpus.join("dataset_parse/tiny_valid.arcd"),
        encode_dataset(&ds).expect("valid dataset"),
    )
    .expect("write dataset seed");

    std::fs::write(
        corpus.join("csv_import/tiny_valid.csv"),
        "0,0.5,-0.25,1.0\n1,-0.5,0.25,-1.0\n",
    )
    .expect("write csv seed");

    std::fs::write(
        corpus.join("stream_samples/mixed_lines.txt"),
        "0.5\n-1.25e-3\n\n  7.0  \nnot-a-number\n42\n",
    )
    .expect("write stream seed");

    println!("corpus seeds written under {}", corpus.display());
}
