//! Every compression method applied to the same image at one stride.
//!
//! cargo run --release --example compressors -- 4

use compdl::compressors::{make_compressor_with, CompressorOptions, Method};
use compdl::dataset::LabeledDataset;
use compdl::nn::TrainConfig;

fn main() -> compdl::Result<()> {
    let stride: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(4);
    let train = LabeledDataset::synthetic(500, 28, 28, 3);
    let options = CompressorOptions {
        pnn_training: TrainConfig {
            epochs: 1,
            ..TrainConfig::default()
        },
        ..CompressorOptions::default()
    };
    let image = train.images.image(7);
    println!("{:<12} {:>6} {:>11}  first values", "method", "dims", "compression");
    for method in Method::ALL {
        let c = make_compressor_with(method, Some(&train), stride, 11, &options)?;
        let (h, w) = c.output_dims();
        let out = c.apply(image)?;
        println!(
            "{:<12} {:>6} {:>11.2}  {:.3?}",
            method.name(),
            format!("{h}x{w}"),
            c.compression(),
            &out[..3]
        );
    }
    Ok(())
}
