//! `CCKP` files: a training run that can be resumed exactly.
//!
//! ```text
//! "CCKP" | version u16
//! | input shape | layer count u32 | layers
//! | tensor count u32 | per tensor: rank u32, dims u32…, f64 values
//! | lr f64 | dropout f64 | epochs u32 | batch u32 | seed u64
//! | epoch u32 | cursor u32 | loss_sum f64 | seen u64
//! | adam lr, beta1, beta2, epsilon f64 | step u64 | first, second moments
//! | CRC-32
//! ```

use std::path::Path;

use super::bytes::{container_header, open_container, read_file, write_exclusive, ByteReader, ByteWriter};
use crate::error::{Error, Result};
use crate::nn::{AdamState, LayerSpec, Network, NetworkSpec, Shape, Tensor, TrainConfig, Trainer};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"CCKP";
pub const CHECKPOINT_VERSION: u16 = 1;
const WHAT: &str = "checkpoint file";

fn malformed(detail: impl Into<String>) -> Error {
    Error::Malformed {
        what: WHAT,
        detail: detail.into(),
    }
}

fn write_shape(w: &mut ByteWriter, shape: Shape) {
    match shape {
        Shape::Spatial {
            channels,
            height,
            width,
        } => {
            w.u8(0);
            w.u32(channels);
            w.u32(height);
            w.u32(width);
        }
        Shape::Flat(n) => {
            w.u8(1);
            w.u32(n);
        }
    }
}

fn read_shape(r: &mut ByteReader<'_>) -> Result<Shape> {
    match r.u8()? {
        0 => Ok(Shape::Spatial {
            channels: r.count("channels")?,
            height: r.count("height")?,
            width: r.count("width")?,
        }),
        1 => Ok(Shape::Flat(r.count("features")?)),
        t => Err(malformed(format!("unknown shape tag {t}"))),
    }
}

fn write_layer(w: &mut ByteWriter, layer: &LayerSpec) {
    match *layer {
        LayerSpec::Conv {
            filters,
            kernel,
            stride,
            bias,
        } => {
            w.u8(0);
            w.u32(filters);
            w.u32(kernel);
            w.u32(stride);
            w.u8(bias as u8);
        }
        LayerSpec::Relu => w.u8(1),
        LayerSpec::MaxPool2 => w.u8(2),
        LayerSpec::Dense { units } => {
            w.u8(3);
            w.u32(units);
        }
        LayerSpec::Dropout { rate } => {
            w.u8(4);
            w.f64(rate);
        }
        LayerSpec::Softmax { classes } => {
            w.u8(5);
            w.u32(classes);
        }
    }
}

fn read_layer(r: &mut ByteReader<'_>) -> Result<LayerSpec> {
    Ok(match r.u8()? {
        0 => LayerSpec::Conv {
            filters: r.count("filters")?,
            kernel: r.count("kernel")?,
            stride: r.count("stride")?,
            bias: r.u8()? != 0,
        },
        1 => LayerSpec::Relu,
        2 => LayerSpec::MaxPool2,
        3 => LayerSpec::Dense {
            units: r.count("units")?,
        },
        4 => LayerSpec::Dropout { rate: r.f64()? },
        5 => LayerSpec::Softmax {
            classes: r.count("classes")?,
        },
        t => return Err(malformed(format!("unknown layer tag {t}"))),
    })
}

fn write_tensors(w: &mut ByteWriter, tensors: &[Tensor]) {
    w.u32(tensors.len());
    for t in tensors {
        w.u32(t.shape.len());
        for &d in &t.shape {
            w.u32(d);
        }
        w.f64s(&t.values);
    }
}

fn read_tensors(r: &mut ByteReader<'_>) -> Result<Vec<Tensor>> {
    let count = r.count("tensors")?;
    let mut out = Vec::with_capacity(count.min(1024));
    for _ in 0..count {
        let rank = r.count("tensor rank")?;
        let mut shape = Vec::with_capacity(rank.min(8));
        let mut len: u64 = 1;
        for _ in 0..rank {
            let d = r.count("tensor dimension")?;
            len = len.saturating_mul(d as u64);
            super::bytes::check_declared("tensor values", len)?;
            shape.push(d);
        }
        let values = r.f64s(len as usize)?;
        out.push(Tensor { shape, values });
    }
    Ok(out)
}

pub fn encode_checkpoint(trainer: &Trainer) -> Vec<u8> {
    let mut w = container_header(CHECKPOINT_MAGIC, CHECKPOINT_VERSION);
    let spec = trainer.network.spec();
    write_shape(&mut w, spec.input);
    w.u32(spec.layers.len());
    for layer in &spec.layers {
        write_layer(&mut w, layer);
    }
    write_tensors(&mut w, trainer.network.params());

    let c = &trainer.config;
    w.f64(c.lr);
    w.f64(c.dropout);
    w.u32(c.epochs);
    w.u32(c.batch_size);
    w.u64(c.seed);
    w.u32(trainer.epoch);
    w.u32(trainer.cursor);
    w.f64(trainer.loss_sum);
    w.u64(trainer.seen as u64);

    let a = &trainer.adam;
    w.f64(a.lr);
    w.f64(a.beta1);
    w.f64(a.beta2);
    w.f64(a.epsilon);
    w.u64(a.step);
    write_tensors(&mut w, &a.first);
    write_tensors(&mut w, &a.second);
    w.finish()
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<Trainer> {
    let body = open_container(bytes, CHECKPOINT_MAGIC, CHECKPOINT_VERSION, WHAT)?;
    let mut r = ByteReader::new(body, WHAT);
    let input = read_shape(&mut r)?;
    let layer_count = r.count("layers")?;
    let mut layers = Vec::with_capacity(layer_count.min(1024));
    for _ in 0..layer_count {
        layers.push(read_layer(&mut r)?);
    }
    let spec = NetworkSpec::new(input, layers).map_err(|e| malformed(e.to_string()))?;
    let params = read_tensors(&mut r)?;
    let network = Network::from_params(&spec, params).map_err(|e| malformed(e.to_string()))?;

    let config = TrainConfig {
        lr: r.f64()?,
        dropout: r.f64()?,
        epochs: r.u32()?,
        batch_size: r.u32()?,
        seed: r.u64()?,
    };
    let epoch = r.u32()?;
    let cursor = r.u32()?;
    let loss_sum = r.f64()?;
    let seen = usize::try_from(r.u64()?).map_err(|_| malformed("sample count"))?;

    let adam = AdamState {
        lr: r.f64()?,
        beta1: r.f64()?,
        beta2: r.f64()?,
        epsilon: r.f64()?,
        step: r.u64()?,
        first: read_tensors(&mut r)?,
        second: read_tensors(&mut r)?,
    };
    r.finish()?;
    let shapes_match = |moments: &[Tensor]| {
        moments.len() == network.params().len()
            && moments
                .iter()
                .zip(network.params())
                .all(|(m, p)| m.shape == p.shape)
    };
    if !shapes_match(&adam.first) || !shapes_match(&adam.second) {
        return Err(malformed("optimizer state does not match parameters"));
    }
    Ok(Trainer {
        network,
        adam,
        config,
        epoch,
        cursor,
        loss_sum,
        seen,
    })
}

pub fn save_checkpoint(trainer: &Trainer, path: &Path) -> Result<()> {
    write_exclusive(path, &encode_checkpoint(trainer))
}

pub fn load_checkpoint(path: &Path) -> Result<Trainer> {
    decode_checkpoint(&read_file(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::CompressedDataset;
    use crate::nn::build_reduced_architecture;

    fn data() -> CompressedDataset {
        let values = (0..40 * 25).map(|i| ((i * 7919) % 101) as f64 / 101.0).collect();
        let labels = (0..40).map(|i| (i % 10) as u8).collect();
        CompressedDataset::new(5, 5, values, labels).unwrap()
    }

    fn trainer() -> Trainer {
        let config = TrainConfig {
            epochs: 2,
            batch_size: 8,
            seed: 5,
            ..TrainConfig::default()
        };
        Trainer::new(&build_reduced_architecture(5).unwrap(), config).unwrap()
    }

    #[test]
    fn round_trip_mid_epoch() {
        let mut t = trainer();
        t.advance(&data(), 2).unwrap();
        let bytes = encode_checkpoint(&t);
        assert_eq!(decode_checkpoint(&bytes).unwrap(), t);
    }

    #[test]
    fn resumed_step_matches_uninterrupted() {
        let d = data();
        let mut straight = trainer();
        straight.advance(&d, 2).unwrap();
        let mut resumed = decode_checkpoint(&encode_checkpoint(&straight)).unwrap();
        straight.advance(&d, 1).unwrap();
        resumed.advance(&d, 1).unwrap();
        assert_eq!(straight, resumed);
    }

    #[test]
    fn corrupt_checkpoint() {
        let mut bytes = encode_checkpoint(&trainer());
        bytes[20] ^= 1;
        assert!(matches!(decode_checkpoint(&bytes), Err(Error::ChecksumMismatch { .. })));
    }
}
