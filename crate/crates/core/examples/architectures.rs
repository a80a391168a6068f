//! Parameter and FLOP counts of the benchmark classifiers.
//!
//! cargo run --example architectures

use compdl::compressors::output_dims;
use compdl::nn::{build_architecture, build_reduced_architecture, mega_flops, weight_count, REDUCED_FILTERS};

fn main() -> compdl::Result<()> {
    println!("stride  input  weights   MFLOPs");
    for stride in 1..=6 {
        let (h, w) = output_dims(28, 28, stride);
        let spec = build_architecture(h, w)?;
        println!("{stride:>6}  {h:>2}x{w:<2}  {:>7}  {:>7.2}", weight_count(&spec), mega_flops(&spec));
    }
    println!();
    println!("index  filters   weights  MFLOPs");
    for (i, (a, b)) in REDUCED_FILTERS.iter().enumerate() {
        let spec = build_reduced_architecture(i + 1)?;
        println!("{:>5}  {a:>3},{b:<3}  {:>8}  {:>6.2}", i + 1, weight_count(&spec), mega_flops(&spec));
    }
    Ok(())
}
