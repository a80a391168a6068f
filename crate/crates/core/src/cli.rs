//! The `compdl` command line. Lives in the library so tests can drive it
//! in-process; the binary only forwards `argv` and the exit code.
//!
//! Exit codes: 0 success, 2 usage or invalid input, 3 I/O or file format,
//! 4 numeric failure.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::Read;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::compressors::{make_compressor_with, CompressorOptions, CompressorSpec, CompressorState, Method};
use crate::dataset::{CompressedDataset, LabeledDataset, Split};
use crate::error::{Error, Result};
use crate::experiment::{
    self, data_dir, parse_list, subset_seed, Arch, Benchmark, DatasetName, Protocol, ResultRow,
    ResultsWriter, SweepConfig, MAX_STRIDE,
};
use crate::io::{self as cio, Origin};
use crate::nn::{self, Trainer};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "compdl", version, about = "Structured compression operators for compressive deep learning")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a compressor and save it (CPRJ for circulant, CCMP otherwise).
    BuildProjection(BuildArgs),
    /// Apply a saved compressor to a dataset split and save the result.
    Compress(CompressArgs),
    /// Train a classifier on compressed data; writes a checkpoint and CSV rows.
    Train(TrainArgs),
    /// Test accuracy of a checkpoint.
    Eval(EvalArgs),
    /// Method × stride sweep; writes results.csv and accuracy.svg.
    Sweep(SweepArgs),
    /// Reduced-filter networks at stride 6; writes reduced.csv.
    Reduced(ReducedArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// mnist or fashion-mnist.
    #[arg(long, default_value = "mnist", value_parser = parse_dataset)]
    pub dataset: DatasetName,
    /// Directory with the IDX files (default: $COMPDL_DATA_DIR, then ./data).
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
}

impl DataArgs {
    fn dir(&self) -> PathBuf {
        data_dir(self.dataset, self.data_dir.as_deref())
    }

    fn load(&self, split: Split) -> Result<LabeledDataset> {
        cio::load_mnist_dir(&self.dir(), split)
    }
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=MAX_STRIDE as u64))]
    pub stride: u64,
    #[arg(long, default_value = "circulant", value_parser = parse_method)]
    pub method: Method,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Training images used to fit the compressor.
    #[arg(long, default_value_t = 6000)]
    pub train_samples: usize,
    /// Epochs of joint training for pnn.
    #[arg(long, default_value_t = 2)]
    pub epochs: usize,
}

#[derive(Debug, Args)]
pub struct CompressArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// CCMP or CPRJ file.
    #[arg(long)]
    pub compressor: PathBuf,
    #[arg(long, value_parser = parse_split)]
    pub split: Split,
    #[arg(long)]
    pub out: PathBuf,
    /// Keep a seeded subset of this many images.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// A compressor (CCMP/CPRJ), applied to the raw dataset, or a
    /// compressed training set (CCDS), which then needs --test.
    #[arg(long)]
    pub input_spec: PathBuf,
    /// Compressed test set (CCDS).
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// auto or reduced:1..5.
    #[arg(long, default_value = "auto", value_parser = parse_arch)]
    pub arch: Arch,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 2)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.01)]
    pub lr: f64,
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
    #[arg(long, default_value_t = nn::DEFAULT_DROPOUT)]
    pub dropout: f64,
    /// Seeded training subset size when compressing raw data.
    #[arg(long, default_value_t = 6000)]
    pub train_samples: usize,
    /// Use the whole training split.
    #[arg(long)]
    pub full: bool,
    #[arg(long, default_value = "checkpoint.cckp")]
    pub checkpoint: PathBuf,
    #[arg(long, default_value = "train.csv")]
    pub csv: PathBuf,
    /// Continue from --checkpoint if it exists.
    #[arg(long)]
    pub resume: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// A compressor applied to the raw test split, or a CCDS test set.
    #[arg(long)]
    pub input_spec: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepOptions {
    /// Flat key=value file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_parser = parse_dataset)]
    pub dataset: Option<DatasetName>,
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    /// Comma-separated list.
    #[arg(long)]
    pub methods: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub train_samples: Option<usize>,
    /// 60,000 training images and 10 epochs.
    #[arg(long)]
    pub full: bool,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, hide = true)]
    pub stop_after: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub options: SweepOptions,
    /// Comma-separated list or range, e.g. 1..6.
    #[arg(long)]
    pub strides: Option<String>,
}

#[derive(Debug, Args)]
pub struct ReducedArgs {
    #[command(flatten)]
    pub options: SweepOptions,
    /// Comma-separated list or range of network indices.
    #[arg(long, default_value = "1..5")]
    pub indices: String,
}

fn parse_dataset(s: &str) -> std::result::Result<DatasetName, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_arch(s: &str) -> std::result::Result<Arch, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_split(s: &str) -> std::result::Result<Split, String> {
    match s {
        "train" => Ok(Split::Train),
        "test" => Ok(Split::Test),
        _ => Err(format!("unknown split '{s}' (expected train or test)")),
    }
}

pub fn exit_code(err: &Error) -> i32 {
    if err.is_io() {
        EXIT_IO
    } else if err.is_numeric() {
        EXIT_NUMERIC
    } else {
        EXIT_USAGE
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::BuildProjection(a) => cmd_build_projection(&a),
        Command::Compress(a) => cmd_compress(&a),
        Command::Train(a) => cmd_train(&a),
        Command::Eval(a) => cmd_eval(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Reduced(a) => cmd_reduced(&a),
    }
}

pub fn cmd_build_projection(a: &BuildArgs) -> Result<()> {
    let stride = a.stride as usize;
    let training = if a.method.needs_training_set() {
        let train = a.data.load(Split::Train)?;
        Some(train.subset(a.train_samples, subset_seed(a.seed)))
    } else {
        None
    };
    let options = CompressorOptions {
        pnn_training: Protocol {
            epochs: a.epochs,
            ..Protocol::desk()
        }
        .train_config(a.seed),
        ..CompressorOptions::default()
    };
    let c = make_compressor_with(a.method, training.as_ref(), stride, a.seed, &options)?;
    match &c.state {
        CompressorState::Circulant(p) => cio::save_projection(p, &a.out)?,
        _ => cio::save_compressor(&c, &a.out)?,
    }
    let (gm, gn) = c.output_dims();
    println!("method={} stride={stride} s={}", c.method, gm * gn);
    println!("dims={gm}x{gn} compression={:.2}", c.compression());
    Ok(())
}

fn magic(path: &Path) -> Result<[u8; 4]> {
    let mut buf = [0u8; 4];
    File::open(path)
        .and_then(|mut f| f.read_exact(&mut buf))
        .map_err(|e| Error::io(path, e))?;
    Ok(buf)
}

fn is_dataset_file(path: &Path) -> Result<bool> {
    Ok(&magic(path)? == cio::DATASET_MAGIC)
}

pub fn cmd_compress(a: &CompressArgs) -> Result<()> {
    let c = cio::load_compressor(&a.compressor)?;
    let mut data = a.data.load(a.split)?;
    if let Some(n) = a.samples {
        data = data.subset(n, subset_seed(a.seed));
    }
    let out = c.apply_dataset(&data)?;
    cio::save_compressed_dataset(
        &out,
        Some(Origin {
            method: c.method,
            stride: c.stride,
            image_dims: c.image_dims,
        }),
        &a.out,
    )?;
    println!("samples={} dims={}x{}", out.len(), out.height, out.width);
    Ok(())
}

struct Inputs {
    train: CompressedDataset,
    test: CompressedDataset,
    origin: Origin,
    compression: f64,
}

fn train_inputs(a: &TrainArgs) -> Result<Inputs> {
    if is_dataset_file(&a.input_spec)? {
        let (train, origin) = cio::load_compressed_dataset(&a.input_spec)?;
        let test_path = a.test.as_ref().ok_or_else(|| {
            Error::InvalidArgument("--test is required when --input-spec is a compressed dataset".into())
        })?;
        let (test, _) = cio::load_compressed_dataset(test_path)?;
        let origin = origin.ok_or_else(|| {
            Error::InvalidArgument("compressed dataset does not record its compressor".into())
        })?;
        let (m, n) = origin.image_dims;
        let compression = (m * n) as f64 / train.sample_len() as f64;
        return Ok(Inputs {
            train,
            test,
            origin,
            compression,
        });
    }
    let c = cio::load_compressor(&a.input_spec)?;
    let protocol = train_protocol(a);
    let bench = Benchmark::new(a.data.load(Split::Train)?, a.data.load(Split::Test)?, &protocol, a.seed);
    Ok(Inputs {
        train: c.apply_dataset(&bench.train)?,
        test: c.apply_dataset(&bench.test)?,
        origin: Origin {
            method: c.method,
            stride: c.stride,
            image_dims: c.image_dims,
        },
        compression: c.compression(),
    })
}

fn train_protocol(a: &TrainArgs) -> Protocol {
    Protocol {
        train_samples: if a.full { None } else { Some(a.train_samples) },
        epochs: a.epochs,
        lr: a.lr,
        batch_size: a.batch_size,
        dropout: a.dropout,
    }
}

pub fn cmd_train(a: &TrainArgs) -> Result<()> {
    let inputs = train_inputs(a)?;
    let spec = a.arch.spec(inputs.train.height, inputs.train.width)?;
    let config = train_protocol(a).train_config(a.seed);
    let mut trainer = if a.resume && a.checkpoint.exists() {
        let t = cio::load_checkpoint(&a.checkpoint)?;
        if t.network.input_len() != inputs.train.sample_len() {
            return Err(Error::dims("checkpoint input", t.network.spec().input, inputs.train.sample_len()));
        }
        t
    } else {
        Trainer::new(&spec, config)?
    };
    let mut writer = ResultsWriter::open(&a.csv)?;
    while !trainer.is_finished() {
        let metrics = trainer.run_epoch(&inputs.train)?;
        cio::save_checkpoint(&trainer, &a.checkpoint)?;
        let row = ResultRow {
            method: inputs.origin.method,
            stride: inputs.origin.stride,
            arch: a.arch,
            seed: a.seed,
            epoch: metrics.epoch,
            train_loss: metrics.train_loss,
            test_accuracy: nn::evaluate(&trainer.network, &inputs.test)?,
            weights: nn::weight_count(&spec),
            mflops: nn::mega_flops(&spec),
            compression: inputs.compression,
        };
        println!("{}", row.csv_line());
        writer.write(&row)?;
    }
    Ok(())
}

pub fn cmd_eval(a: &EvalArgs) -> Result<()> {
    let trainer = cio::load_checkpoint(&a.checkpoint)?;
    let test = if is_dataset_file(&a.input_spec)? {
        cio::load_compressed_dataset(&a.input_spec)?.0
    } else {
        let c: CompressorSpec = cio::load_compressor(&a.input_spec)?;
        c.apply_dataset(&a.data.load(Split::Test)?)?
    };
    let accuracy = nn::evaluate(&trainer.network, &test)?;
    println!("test_accuracy={accuracy:.4}");
    Ok(())
}

fn sweep_config(o: &SweepOptions) -> Result<(SweepConfig, Option<PathBuf>)> {
    let mut config = SweepConfig::default();
    if let Some(path) = &o.config {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        config.apply_config_text(&text)?;
    }
    if o.full {
        config.set("full", "true")?;
    }
    if let Some(d) = o.dataset {
        config.dataset = d;
    }
    if let Some(m) = &o.methods {
        config.methods = parse_list(m)?;
    }
    if let Some(s) = o.seed {
        config.seed = s;
    }
    if let Some(e) = o.epochs {
        config.protocol.epochs = e;
    }
    if let Some(n) = o.train_samples {
        config.protocol.train_samples = Some(n);
    }
    if let Some(d) = &o.out_dir {
        config.out_dir = d.clone();
    }
    config.stop_after = o.stop_after;
    Ok((config, o.data_dir.clone()))
}

fn load_bench(config: &SweepConfig, dir: Option<&Path>) -> Result<Benchmark> {
    Benchmark::load(&data_dir(config.dataset, dir), &config.protocol, config.seed)
}

pub fn cmd_sweep(a: &SweepArgs) -> Result<()> {
    let (mut config, dir) = sweep_config(&a.options)?;
    if let Some(s) = &a.strides {
        config.strides = parse_list(s)?;
    }
    config.validate()?;
    let bench = load_bench(&config, dir.as_deref())?;
    let rows = experiment::run_sweep(&config, &bench)?;
    println!(
        "{} rows in {}",
        rows.len(),
        config.out_dir.join("results.csv").display()
    );
    Ok(())
}

pub fn cmd_reduced(a: &ReducedArgs) -> Result<()> {
    let (config, dir) = sweep_config(&a.options)?;
    let indices: Vec<usize> = parse_list(&a.indices)?;
    config.validate()?;
    let bench = load_bench(&config, dir.as_deref())?;
    let rows = experiment::run_reduced(&config, &bench, &indices)?;
    println!(
        "{} rows in {}",
        rows.len(),
        config.out_dir.join("reduced.csv").display()
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code(args: &[&str]) -> i32 {
        run(std::iter::once("compdl").chain(args.iter().copied()))
    }

    #[test]
    fn stride_out_of_range_is_usage_error() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("p");
        let out = out.to_str().unwrap();
        assert_eq!(code(&["build-projection", "--stride", "7", "--out", out]), EXIT_USAGE);
        assert_eq!(code(&["build-projection", "--stride", "0", "--out", out]), EXIT_USAGE);
        assert_eq!(code(&["frobnicate"]), EXIT_USAGE);
    }

    #[test]
    fn downsample_needs_no_data() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("d.ccmp");
        let args = ["build-projection", "--stride", "1", "--method", "downsample", "--out", out.to_str().unwrap()];
        assert_eq!(code(&args), EXIT_OK);
        let c = cio::load_compressor(&out).unwrap();
        assert_eq!(c.compression(), 1.0);
    }

    #[test]
    fn missing_data_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("c.cprj");
        let args = [
            "build-projection",
            "--stride",
            "3",
            "--data-dir",
            dir.path().to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ];
        assert_eq!(code(&args), EXIT_IO);
    }

    #[test]
    fn error_classes() {
        assert_eq!(exit_code(&Error::Numeric("nan".into())), EXIT_NUMERIC);
        assert_eq!(exit_code(&Error::EmptyDataset), EXIT_USAGE);
        assert_eq!(
            exit_code(&Error::ChecksumMismatch {
                what: "x",
                stored: 0,
                computed: 1
            }),
            EXIT_IO
        );
    }
}
