//! Trains a network whose first layer is a single strided 5×5 filter, then
//! splits it into a fixed compressor and a classifier and checks that the
//! split pipeline gives the same logits.
//!
//! cargo run --release --example pnn_filter

use compdl::compressors::{CompressorSpec, CompressorState, Method};
use compdl::dataset::{CompressedDataset, LabeledDataset};
use compdl::nn::{build_architecture, detach_classifier, evaluate, extract_pnn_filter, pnn_wrap, TrainConfig, Trainer};

fn main() -> compdl::Result<()> {
    let stride = 6;
    let data = LabeledDataset::synthetic(1000, 28, 28, 5);
    let joint = pnn_wrap(&build_architecture(5, 5)?, stride, 28, 28)?;
    let config = TrainConfig {
        epochs: 2,
        seed: 5,
        ..TrainConfig::default()
    };
    let mut trainer = Trainer::new(&joint, config)?;
    let raw = CompressedDataset::from_labeled(&data);
    for m in trainer.run(&raw)? {
        println!("epoch {} loss {:.4}", m.epoch, m.train_loss);
    }

    let filter = extract_pnn_filter(&trainer.network)?;
    for row in filter.values().chunks(filter.size()) {
        println!("{:+.3?}", row);
    }
    let compressor = CompressorSpec {
        method: Method::Pnn,
        stride,
        seed: config.seed,
        image_dims: (28, 28),
        state: CompressorState::Filter(filter),
    };
    let classifier = detach_classifier(&trainer.network)?;

    let mut worst: f64 = 0.0;
    for i in 0..10 {
        let image = data.images.image(i);
        let joint_logits = trainer.network.logits(image, 1)?;
        let split_logits = classifier.logits(&compressor.apply(image)?, 1)?;
        for (a, b) in joint_logits.iter().zip(&split_logits) {
            worst = worst.max((a - b).abs());
        }
    }
    println!("max logit difference joint vs detached: {worst:.2e}");
    let compressed = compressor.apply_dataset(&data)?;
    println!("training accuracy through the detached pipeline: {:.4}", evaluate(&classifier, &compressed)?);
    Ok(())
}
