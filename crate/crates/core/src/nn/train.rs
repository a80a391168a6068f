//! Mini-batch training with ADAM and seeded shuffling and dropout.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::adam::AdamState;
use super::network::{Mode, Network};
use super::spec::{LayerSpec, NetworkSpec};
use crate::dataset::CompressedDataset;
use crate::error::{Error, Result};
use crate::seed::derive_seed;

const INIT_STREAM: u64 = 1;
const SHUFFLE_STREAM: u64 = 2;
const DROPOUT_STREAM: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub lr: f64,
    pub dropout: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr: 0.01,
            dropout: 0.4,
            epochs: 10,
            batch_size: 32,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochMetrics {
    /// 1-based.
    pub epoch: usize,
    /// Mean per-sample cross-entropy over the epoch's mini-batches.
    pub train_loss: f64,
}

/// Training loop state. Everything needed to continue bit-identically is
/// held here and persisted by checkpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct Trainer {
    pub network: Network,
    pub adam: AdamState,
    pub config: TrainConfig,
    /// Completed epochs.
    pub epoch: usize,
    /// Mini-batches already consumed in the current epoch.
    pub cursor: usize,
    pub loss_sum: f64,
    pub seen: usize,
}

/// Copy of `spec` with every dropout layer set to `rate`.
pub fn with_dropout(spec: &NetworkSpec, rate: f64) -> NetworkSpec {
    let mut spec = spec.clone();
    for layer in &mut spec.layers {
        if let LayerSpec::Dropout { rate: r } = layer {
            *r = rate;
        }
    }
    spec
}

impl Trainer {
    pub fn new(spec: &NetworkSpec, config: TrainConfig) -> Result<Self> {
        if config.batch_size == 0 || !(config.lr > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "invalid training configuration {config:?}"
            )));
        }
        let spec = with_dropout(spec, config.dropout);
        spec.shapes()?;
        let network = Network::init(&spec, derive_seed(config.seed, &[INIT_STREAM]));
        Ok(Self::from_network(network, config))
    }

    /// Continues training an existing network with fresh optimizer state.
    pub fn from_network(network: Network, config: TrainConfig) -> Self {
        let adam = AdamState::new(network.params(), config.lr);
        Self {
            network,
            adam,
            config,
            epoch: 0,
            cursor: 0,
            loss_sum: 0.0,
            seen: 0,
        }
    }

    pub fn is_finished(&self) -> bool {
        self.epoch >= self.config.epochs
    }

    fn epoch_order(&self, len: usize) -> Vec<usize> {
        let mut order: Vec<usize> = (0..len).collect();
        let seed = derive_seed(self.config.seed, &[SHUFFLE_STREAM, self.epoch as u64]);
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        order
    }

    fn check_data(&self, data: &CompressedDataset) -> Result<()> {
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if data.sample_len() != self.network.input_len() {
            return Err(Error::dims(
                "training data",
                self.network.spec().input,
                format!("{}x{}", data.height, data.width),
            ));
        }
        Ok(())
    }

    /// Trains on `max_batches` more mini-batches (or until the end of the
    /// current epoch, whichever comes first). Returns the epoch's metrics
    /// when it completes.
    pub fn advance(
        &mut self,
        data: &CompressedDataset,
        max_batches: usize,
    ) -> Result<Option<EpochMetrics>> {
        self.check_data(data)?;
        let order = self.epoch_order(data.len());
        let batches: Vec<&[usize]> = order.chunks(self.config.batch_size).collect();
        let end = self.cursor.saturating_add(max_batches).min(batches.len());
        for b in self.cursor..end {
            let (x, y) = data.gather(batches[b]);
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                self.config.seed,
                &[DROPOUT_STREAM, self.adam.step],
            ));
            let (loss, grads) = self
                .network
                .loss_and_gradients(&x, &y, Mode::Train(&mut rng))?;
            if !loss.is_finite() {
                return Err(Error::Numeric(format!(
                    "non-finite loss at epoch {} batch {b}",
                    self.epoch + 1
                )));
            }
            self.adam.update(self.network.params_mut(), &grads)?;
            self.loss_sum += loss * y.len() as f64;
            self.seen += y.len();
            self.cursor = b + 1;
        }
        if self.cursor < batches.len() {
            return Ok(None);
        }
        self.epoch += 1;
        let metrics = EpochMetrics {
            epoch: self.epoch,
            train_loss: self.loss_sum / self.seen as f64,
        };
        self.cursor = 0;
        self.loss_sum = 0.0;
        self.seen = 0;
        Ok(Some(metrics))
    }

    pub fn run_epoch(&mut self, data: &CompressedDataset) -> Result<EpochMetrics> {
        loop {
            if let Some(m) = self.advance(data, usize::MAX)? {
                return Ok(m);
            }
        }
    }

    /// Runs the remaining epochs.
    pub fn run(&mut self, data: &CompressedDataset) -> Result<Vec<EpochMetrics>> {
        let mut history = Vec::new();
        while !self.is_finished() {
            history.push(self.run_epoch(data)?);
        }
        Ok(history)
    }
}

/// Trains a freshly initialized network.
pub fn train(
    spec: &NetworkSpec,
    data: &CompressedDataset,
    config: TrainConfig,
) -> Result<(Network, Vec<EpochMetrics>)> {
    let mut trainer = Trainer::new(spec, config)?;
    let history = trainer.run(data)?;
    Ok((trainer.network, history))
}

const EVAL_BATCH: usize = 500;

/// Fraction of samples whose most probable class equals the label.
pub fn evaluate(network: &Network, data: &CompressedDataset) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if data.sample_len() != network.input_len() {
        return Err(Error::dims(
            "evaluation data",
            network.spec().input,
            format!("{}x{}", data.height, data.width),
        ));
    }
    let mut correct = 0usize;
    let indices: Vec<usize> = (0..data.len()).collect();
    for chunk in indices.chunks(EVAL_BATCH) {
        let (x, y) = data.gather(chunk);
        let predicted = network.predict(&x, chunk.len())?;
        correct += predicted
            .iter()
            .zip(&y)
            .filter(|(p, &l)| **p == l as usize)
            .count();
    }
    Ok(correct as f64 / data.len() as f64)
}
