//! A small convolutional network stack: architectures, reverse-mode
//! gradients, ADAM, and the detachable compression layer.

mod adam;
mod network;
mod pnn;
mod spec;
mod train;

pub use adam::AdamState;
pub use network::{Forward, Mode, Network, Tensor, INIT_STD};
pub use pnn::{detach_classifier, extract_pnn_filter, pnn_stride};
pub use spec::{
    build_architecture, build_reduced_architecture, flop_count, mega_flops, pnn_wrap,
    weight_count, LayerSpec, NetworkSpec, Shape, DEFAULT_DROPOUT, KERNEL, REDUCED_FILTERS,
};
pub use train::{evaluate, train, with_dropout, EpochMetrics, TrainConfig, Trainer};
