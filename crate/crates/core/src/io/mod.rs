//! Dataset ingestion and binary persistence.
//!
//! Every format written here shares one header discipline: a four-byte
//! magic, a `u16` version, a little-endian body and a trailing CRC-32 over
//! all preceding bytes. Writers go through an exclusively created temporary
//! file, so two processes writing the same path cannot interleave.

mod bytes;
mod checkpoint;
mod compressed;
mod compressor;
mod idx;
mod projection;

pub use bytes::MAX_DECLARED;
pub use checkpoint::{
    decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint, CHECKPOINT_MAGIC,
    CHECKPOINT_VERSION,
};
pub use compressed::{
    decode_compressed_dataset, encode_compressed_dataset, load_compressed_dataset,
    save_compressed_dataset, Origin, DATASET_MAGIC, DATASET_VERSION,
};
pub use compressor::{
    decode_compressor, encode_compressor, load_compressor, save_compressor, COMPRESSOR_MAGIC,
    COMPRESSOR_VERSION,
};
pub use idx::{
    encode_idx, load_idx, load_mnist_dir, read_idx_images, read_idx_labels, IMAGE_MAGIC,
    LABEL_MAGIC,
};
pub use projection::{
    decode_projection, encode_projection, load_projection, projection_file_size, save_projection,
    PROJECTION_MAGIC, PROJECTION_VERSION,
};
