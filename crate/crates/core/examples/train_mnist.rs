//! Compresses MNIST with one method and trains the matching classifier,
//! checkpointing after every epoch.
//!
//! cargo run --release --example train_mnist -- circulant 6

use compdl::compressors::{make_compressor, Method};
use compdl::experiment::{data_dir, Benchmark, DatasetName, Protocol};
use compdl::io::{load_checkpoint, save_checkpoint};
use compdl::nn::{build_architecture, evaluate, mega_flops, weight_count, Trainer};

fn main() -> compdl::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let method: Method = args.first().map_or("circulant", String::as_str).parse()?;
    let stride: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(6);
    if method == Method::Pnn {
        eprintln!("pnn learns its filter jointly; see the pnn_filter example");
        return Ok(());
    }

    let protocol = Protocol::desk();
    let bench = match Benchmark::load(&data_dir(DatasetName::Mnist, None), &protocol, 0) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("{e}\nplace the four MNIST IDX files in ./data/mnist or set COMPDL_DATA_DIR");
            std::process::exit(3);
        }
    };

    let compressor = make_compressor(method, Some(&bench.train), stride, 0)?;
    let train = compressor.apply_dataset(&bench.train)?;
    let test = compressor.apply_dataset(&bench.test)?;
    let spec = build_architecture(train.height, train.width)?;
    println!(
        "{method} stride {stride}: input {}x{}, {} weights, {:.2} MFLOPs",
        train.height,
        train.width,
        weight_count(&spec),
        mega_flops(&spec)
    );

    let checkpoint = std::env::temp_dir().join(format!("compdl-train-{}.cckp", std::process::id()));
    let mut trainer = Trainer::new(&spec, protocol.train_config(0))?;
    while !trainer.is_finished() {
        let metrics = trainer.run_epoch(&train)?;
        save_checkpoint(&trainer, &checkpoint)?;
        let accuracy = evaluate(&trainer.network, &test)?;
        println!("epoch {} loss {:.4} test accuracy {accuracy:.4}", metrics.epoch, metrics.train_loss);
    }
    assert_eq!(load_checkpoint(&checkpoint)?, trainer);
    std::fs::remove_file(&checkpoint).ok();
    Ok(())
}
