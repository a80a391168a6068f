//! A small method × stride sweep written as CSV and SVG.
//!
//! With MNIST available this uses 1,000 training images and one epoch;
//! otherwise synthetic data.
//!
//! cargo run --release --example sweep -- /tmp/compdl-sweep

use std::path::PathBuf;

use compdl::compressors::Method;
use compdl::dataset::{LabeledDataset, Split};
use compdl::experiment::{data_dir, run_sweep, Benchmark, DatasetName, Protocol, SweepConfig};

fn main() -> compdl::Result<()> {
    let out_dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("compdl-sweep"));
    let config = SweepConfig {
        methods: vec![Method::Downsample, Method::RandomConv, Method::Circulant],
        strides: vec![4, 5, 6],
        protocol: Protocol {
            train_samples: Some(1000),
            epochs: 1,
            ..Protocol::desk()
        },
        out_dir: out_dir.clone(),
        ..SweepConfig::default()
    };
    let bench = Benchmark::load(&data_dir(DatasetName::Mnist, None), &config.protocol, config.seed)
        .unwrap_or_else(|e| {
            eprintln!("{e}; using synthetic images");
            let mut test = LabeledDataset::synthetic(500, 28, 28, 99);
            test.split = Split::Test;
            Benchmark::new(LabeledDataset::synthetic(1000, 28, 28, 1), test, &config.protocol, 0)
        });
    for row in run_sweep(&config, &bench)? {
        println!("{}", row.csv_line());
    }
    println!("chart: {}", out_dir.join("accuracy.svg").display());
    Ok(())
}
