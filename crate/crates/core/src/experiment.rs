//! The benchmark protocol: compress, train a classifier, evaluate, and
//! record one CSV row per (method, stride, architecture) cell.
//!
//! Each cell is seeded from the sweep seed, the method and the stride only,
//! so a cell's row does not depend on which other cells run or in what
//! order. Rows are flushed as they finish; rerunning an interrupted sweep
//! skips the cells already present.

use std::fmt;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::compressors::{
    make_compressor_with, output_dims, CompressorOptions, CompressorSpec, CompressorState, Method,
};
use crate::dataset::{CompressedDataset, LabeledDataset, Split};
use crate::error::{Error, Result};
use crate::nn::{self, NetworkSpec, TrainConfig, Trainer};
use crate::pca::{fit_pca, PcaProjection};
use crate::seed::{derive_seed, tag};

pub const CSV_HEADER: &str =
    "method,stride,arch,seed,epoch,train_loss,test_accuracy,weights,mflops,compression";
pub const DATA_DIR_ENV: &str = "COMPDL_DATA_DIR";
pub const MAX_STRIDE: usize = 6;
pub const REDUCED_STRIDE: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetName {
    Mnist,
    FashionMnist,
}

impl DatasetName {
    pub fn name(self) -> &'static str {
        match self {
            DatasetName::Mnist => "mnist",
            DatasetName::FashionMnist => "fashion-mnist",
        }
    }
}

impl fmt::Display for DatasetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DatasetName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mnist" => Ok(DatasetName::Mnist),
            "fashion-mnist" | "fashion" => Ok(DatasetName::FashionMnist),
            _ => Err(Error::InvalidArgument(format!(
                "unknown dataset '{s}' (expected mnist or fashion-mnist)"
            ))),
        }
    }
}

/// Directory holding the IDX files of `dataset`.
///
/// An explicit directory wins, then `$COMPDL_DATA_DIR`, then `./data`. If the
/// chosen base has a subdirectory named after the dataset, that is used.
pub fn data_dir(dataset: DatasetName, explicit: Option<&Path>) -> PathBuf {
    let base = explicit
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(DATA_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("data"));
    let sub = base.join(dataset.name());
    if sub.is_dir() {
        sub
    } else {
        base
    }
}

/// Classifier choice for a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arch {
    /// The benchmark network for the compressed size.
    Auto,
    /// A reduced-filter network (indices 1 to 5) on 5×5 input.
    Reduced(usize),
}

impl Arch {
    pub fn spec(self, height: usize, width: usize) -> Result<NetworkSpec> {
        match self {
            Arch::Auto => nn::build_architecture(height, width),
            Arch::Reduced(i) => {
                let spec = nn::build_reduced_architecture(i)?;
                if spec.input != nn::Shape::spatial(1, height, width) {
                    return Err(Error::dims("reduced architecture input", spec.input, format!("{height}x{width}")));
                }
                Ok(spec)
            }
        }
    }
}

impl fmt::Display for Arch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arch::Auto => f.write_str("auto"),
            Arch::Reduced(i) => write!(f, "reduced:{i}"),
        }
    }
}

impl FromStr for Arch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(Arch::Auto);
        }
        s.strip_prefix("reduced:")
            .and_then(|i| i.parse().ok())
            .filter(|i| (1..=nn::REDUCED_FILTERS.len()).contains(i))
            .map(Arch::Reduced)
            .ok_or_else(|| {
                Error::InvalidArgument(format!("unknown architecture '{s}' (expected auto or reduced:1..5)"))
            })
    }
}

/// Training recipe shared by every cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Protocol {
    /// Size of the seeded training subset; `None` uses the whole split.
    pub train_samples: Option<usize>,
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub dropout: f64,
}

impl Protocol {
    /// 6,000 training samples, 2 epochs.
    pub fn desk() -> Self {
        Self {
            train_samples: Some(6000),
            epochs: 2,
            ..Self::full()
        }
    }

    /// The whole training split, 10 epochs.
    pub fn full() -> Self {
        let d = TrainConfig::default();
        Self {
            train_samples: None,
            epochs: d.epochs,
            lr: d.lr,
            batch_size: d.batch_size,
            dropout: d.dropout,
        }
    }

    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            lr: self.lr,
            dropout: self.dropout,
            epochs: self.epochs,
            batch_size: self.batch_size,
            seed,
        }
    }
}

impl Default for Protocol {
    fn default() -> Self {
        Self::desk()
    }
}

/// Seed of the training subset drawn for a sweep.
pub fn subset_seed(seed: u64) -> u64 {
    derive_seed(seed, &[tag("subset")])
}

/// Training subset and full test split.
#[derive(Debug, Clone)]
pub struct Benchmark {
    pub train: LabeledDataset,
    pub test: LabeledDataset,
}

impl Benchmark {
    pub fn new(train: LabeledDataset, test: LabeledDataset, protocol: &Protocol, seed: u64) -> Self {
        let train = match protocol.train_samples {
            Some(n) if n < train.len() => train.subset(n, subset_seed(seed)),
            _ => train,
        };
        Self { train, test }
    }

    pub fn load(dir: &Path, protocol: &Protocol, seed: u64) -> Result<Self> {
        let train = crate::io::load_mnist_dir(dir, Split::Train)?;
        let test = crate::io::load_mnist_dir(dir, Split::Test)?;
        Ok(Self::new(train, test, protocol, seed))
    }

    pub fn image_dims(&self) -> (usize, usize) {
        (self.train.images.rows(), self.train.images.cols())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub method: Method,
    pub stride: usize,
    pub arch: Arch,
    pub seed: u64,
    pub epoch: usize,
    pub train_loss: f64,
    pub test_accuracy: f64,
    pub weights: usize,
    pub mflops: f64,
    pub compression: f64,
}

impl ResultRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{:.6},{:.4},{},{:.2},{:.2}",
            self.method,
            self.stride,
            self.arch,
            self.seed,
            self.epoch,
            self.train_loss,
            self.test_accuracy,
            self.weights,
            self.mflops,
            self.compression
        )
    }

    pub fn parse_csv_line(line: &str) -> Result<Self> {
        let bad = || Error::Malformed {
            what: "results CSV",
            detail: format!("cannot parse row '{line}'"),
        };
        let f: Vec<&str> = line.trim_end().split(',').collect();
        if f.len() != 10 {
            return Err(bad());
        }
        let num = |i: usize| f[i].parse::<f64>().map_err(|_| bad());
        let int = |i: usize| f[i].parse::<u64>().map_err(|_| bad());
        Ok(Self {
            method: f[0].parse().map_err(|_| bad())?,
            stride: int(1)? as usize,
            arch: f[2].parse().map_err(|_| bad())?,
            seed: int(3)?,
            epoch: int(4)? as usize,
            train_loss: num(5)?,
            test_accuracy: num(6)?,
            weights: int(7)? as usize,
            mflops: num(8)?,
            compression: num(9)?,
        })
    }

    fn key(&self) -> (Method, usize, Arch) {
        (self.method, self.stride, self.arch)
    }
}

/// Seed of one (method, stride) cell.
pub fn cell_seed(seed: u64, method: Method, stride: usize) -> u64 {
    derive_seed(seed, &[tag(method.name()), stride as u64])
}

/// Trains and evaluates one cell.
///
/// For `pnn` the joint network is trained and the reported accuracy is that
/// of its detached classifier on filter-compressed test images. Every other
/// method fits its compressor first and trains a classifier on the output.
pub fn run_cell(
    bench: &Benchmark,
    protocol: &Protocol,
    seed: u64,
    method: Method,
    stride: usize,
    arch: Arch,
    pca_basis: Option<&PcaProjection>,
) -> Result<ResultRow> {
    let (m, n) = bench.image_dims();
    if stride == 0 || stride > m.min(n) {
        return Err(Error::InvalidArgument(format!("stride {stride} outside 1..={}", m.min(n))));
    }
    let (gm, gn) = output_dims(m, n, stride);
    let spec = arch.spec(gm, gn)?;
    let config = protocol.train_config(cell_seed(seed, method, stride));

    let (train_loss, accuracy) = if method == Method::Pnn {
        let joint = nn::pnn_wrap(&spec, stride, m, n)?;
        let mut trainer = Trainer::new(&joint, config)?;
        let history = trainer.run(&CompressedDataset::from_labeled(&bench.train))?;
        let compressor = CompressorSpec {
            method,
            stride,
            seed: config.seed,
            image_dims: (m, n),
            state: CompressorState::Filter(nn::extract_pnn_filter(&trainer.network)?),
        };
        let classifier = nn::detach_classifier(&trainer.network)?;
        let test = compressor.apply_dataset(&bench.test)?;
        (last_loss(&history), nn::evaluate(&classifier, &test)?)
    } else {
        let options = CompressorOptions {
            image_dims: (m, n),
            pca_basis: pca_basis.cloned(),
            ..CompressorOptions::default()
        };
        let compressor = make_compressor_with(method, Some(&bench.train), stride, config.seed, &options)?;
        let train = compressor.apply_dataset(&bench.train)?;
        let test = compressor.apply_dataset(&bench.test)?;
        let (network, history) = nn::train(&spec, &train, config)?;
        (last_loss(&history), nn::evaluate(&network, &test)?)
    };

    Ok(ResultRow {
        method,
        stride,
        arch,
        seed,
        epoch: protocol.epochs,
        train_loss,
        test_accuracy: accuracy,
        weights: nn::weight_count(&spec),
        mflops: nn::mega_flops(&spec),
        compression: (m * n) as f64 / (gm * gn) as f64,
    })
}

fn last_loss(history: &[nn::EpochMetrics]) -> f64 {
    history.last().map_or(f64::NAN, |h| h.train_loss)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub methods: Vec<Method>,
    pub strides: Vec<usize>,
    pub dataset: DatasetName,
    pub seed: u64,
    pub protocol: Protocol,
    pub out_dir: PathBuf,
    /// Stop after this many newly computed cells (for staged runs).
    pub stop_after: Option<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            methods: Method::ALL.to_vec(),
            strides: (1..=MAX_STRIDE).collect(),
            dataset: DatasetName::Mnist,
            seed: 0,
            protocol: Protocol::desk(),
            out_dir: PathBuf::from("results"),
            stop_after: None,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() || self.strides.is_empty() {
            return Err(Error::InvalidArgument("sweep needs at least one method and one stride".into()));
        }
        if let Some(&k) = self.strides.iter().find(|&&k| !(1..=MAX_STRIDE).contains(&k)) {
            return Err(Error::InvalidArgument(format!("stride {k} outside 1..={MAX_STRIDE}")));
        }
        if self.protocol.epochs == 0 || self.protocol.batch_size == 0 || self.protocol.train_samples == Some(0) {
            return Err(Error::InvalidArgument(format!("invalid protocol {:?}", self.protocol)));
        }
        Ok(())
    }

    /// Applies `key=value` lines (`#` comments allowed). Unknown keys are
    /// errors.
    pub fn apply_config_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidArgument(format!("config line {}: expected key=value", lineno + 1))
            })?;
            self.set(key.trim(), value.trim())
                .map_err(|e| Error::InvalidArgument(format!("config line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let invalid = || Error::InvalidArgument(format!("bad value '{value}' for {key}"));
        match key {
            "methods" => self.methods = parse_list(value)?,
            "strides" => self.strides = parse_list(value).map_err(|_| invalid())?,
            "dataset" => self.dataset = value.parse()?,
            "seed" => self.seed = value.parse().map_err(|_| invalid())?,
            "epochs" => self.protocol.epochs = value.parse().map_err(|_| invalid())?,
            "lr" => self.protocol.lr = value.parse().map_err(|_| invalid())?,
            "batch_size" => self.protocol.batch_size = value.parse().map_err(|_| invalid())?,
            "dropout" => self.protocol.dropout = value.parse().map_err(|_| invalid())?,
            "train_samples" => {
                self.protocol.train_samples = match value {
                    "all" => None,
                    v => Some(v.parse().map_err(|_| invalid())?),
                }
            }
            "full" => {
                if value.parse::<bool>().map_err(|_| invalid())? {
                    self.protocol = Protocol {
                        lr: self.protocol.lr,
                        batch_size: self.protocol.batch_size,
                        dropout: self.protocol.dropout,
                        ..Protocol::full()
                    };
                }
            }
            "out_dir" => self.out_dir = PathBuf::from(value),
            _ => return Err(Error::InvalidArgument(format!("unknown key '{key}'"))),
        }
        Ok(())
    }
}

/// Parses `a,b,c`; numeric lists also accept ranges `lo..hi` (inclusive).
pub fn parse_list<T: FromStr>(text: &str) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((lo, hi)) = part.split_once("..") {
            let lo: usize = lo.trim().parse().map_err(|_| list_error(part))?;
            let hi: usize = hi.trim().trim_start_matches('=').parse().map_err(|_| list_error(part))?;
            for v in lo..=hi {
                out.push(v.to_string().parse().map_err(|_| list_error(part))?);
            }
        } else {
            out.push(part.parse().map_err(|_| list_error(part))?);
        }
    }
    if out.is_empty() {
        return Err(list_error(text));
    }
    Ok(out)
}

fn list_error(part: &str) -> Error {
    Error::InvalidArgument(format!("cannot parse list item '{part}'"))
}

/// Rows already present in a results file. A trailing partial line (from
/// an interrupted write) is dropped from the file.
pub fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(Error::io(path, e)),
    };
    let complete = match text.rfind('\n') {
        Some(i) => &text[..=i],
        None => "",
    };
    if complete.len() != text.len() {
        fs::write(path, complete).map_err(|e| Error::io(path, e))?;
    }
    let mut lines = complete.lines();
    match lines.next() {
        None => Ok(Vec::new()),
        Some(h) if h == CSV_HEADER => lines.map(ResultRow::parse_csv_line).collect(),
        Some(_) => Err(Error::Malformed {
            what: "results CSV",
            detail: format!("{} does not start with the expected header", path.display()),
        }),
    }
}

/// Appends rows one at a time, writing the header to a new file.
pub struct ResultsWriter {
    file: fs::File,
    path: PathBuf,
}

impl ResultsWriter {
    pub fn open(path: &Path) -> Result<Self> {
        let existing = read_results(path)?;
        let fresh = existing.is_empty() && fs::metadata(path).map_or(true, |m| m.len() == 0);
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        if fresh {
            writeln!(file, "{CSV_HEADER}").map_err(|e| Error::io(path, e))?;
        }
        Ok(Self {
            file,
            path: path.to_path_buf(),
        })
    }

    pub fn write(&mut self, row: &ResultRow) -> Result<()> {
        writeln!(self.file, "{}", row.csv_line())
            .and_then(|_| self.file.sync_data())
            .map_err(|e| Error::io(&self.path, e))
    }
}

/// One cell to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellSpec {
    pub method: Method,
    pub stride: usize,
    pub arch: Arch,
}

/// Runs the cells missing from `csv_path` in order, appending each row as
/// it completes. Returns all rows in file order.
pub fn run_cells(
    bench: &Benchmark,
    protocol: &Protocol,
    seed: u64,
    cells: &[CellSpec],
    csv_path: &Path,
    stop_after: Option<usize>,
) -> Result<Vec<ResultRow>> {
    let done: Vec<_> = read_results(csv_path)?.iter().map(ResultRow::key).collect();
    let todo: Vec<&CellSpec> = cells
        .iter()
        .filter(|c| !done.contains(&(c.method, c.stride, c.arch)))
        .take(stop_after.unwrap_or(usize::MAX))
        .collect();
    let mut writer = ResultsWriter::open(csv_path)?;

    let needs_pca = todo.iter().any(|c| matches!(c.method, Method::Pca | Method::Circulant));
    let basis = if needs_pca {
        let images = &bench.train.images;
        Some(fit_pca(images, images.image_len())?)
    } else {
        None
    };
    for cell in todo {
        let row = run_cell(bench, protocol, seed, cell.method, cell.stride, cell.arch, basis.as_ref())?;
        eprintln!("{}", row.csv_line());
        writer.write(&row)?;
    }
    read_results(csv_path)
}

/// Full method × stride grid. Writes `results.csv` and `accuracy.svg` into
/// the output directory.
pub fn run_sweep(config: &SweepConfig, bench: &Benchmark) -> Result<Vec<ResultRow>> {
    config.validate()?;
    fs::create_dir_all(&config.out_dir).map_err(|e| Error::io(&config.out_dir, e))?;
    let cells: Vec<CellSpec> = config
        .methods
        .iter()
        .flat_map(|&method| {
            config.strides.iter().map(move |&stride| CellSpec {
                method,
                stride,
                arch: Arch::Auto,
            })
        })
        .collect();
    let csv = config.out_dir.join("results.csv");
    let rows = run_cells(bench, &config.protocol, config.seed, &cells, &csv, config.stop_after)?;
    write_chart(&config.out_dir.join("accuracy.svg"), &rows)?;
    Ok(rows)
}

/// Reduced-filter networks at stride 6. Writes `reduced.csv`.
pub fn run_reduced(config: &SweepConfig, bench: &Benchmark, indices: &[usize]) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let arches = indices
        .iter()
        .map(|i| format!("reduced:{i}").parse::<Arch>())
        .collect::<Result<Vec<_>>>()?;
    fs::create_dir_all(&config.out_dir).map_err(|e| Error::io(&config.out_dir, e))?;
    let cells: Vec<CellSpec> = config
        .methods
        .iter()
        .flat_map(|&method| {
            arches.iter().map(move |&arch| CellSpec {
                method,
                stride: REDUCED_STRIDE,
                arch,
            })
        })
        .collect();
    let csv = config.out_dir.join("reduced.csv");
    run_cells(bench, &config.protocol, config.seed, &cells, &csv, config.stop_after)
}

fn write_chart(path: &Path, rows: &[ResultRow]) -> Result<()> {
    fs::write(path, render_chart(rows)).map_err(|e| Error::io(path, e))
}

const COLORS: [&str; 5] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd"];

/// Line chart of test accuracy against compression rate, one line per
/// method.
pub fn render_chart(rows: &[ResultRow]) -> String {
    let (w, h) = (640.0, 420.0);
    let (left, right, top, bottom) = (60.0, 150.0, 30.0, 50.0);
    let x_max = rows.iter().map(|r| r.compression).fold(1.0, f64::max).ceil();
    let x = |c: f64| left + (c - 1.0) / (x_max - 1.0).max(1.0) * (w - left - right);
    let y = |a: f64| top + (1.0 - a) * (h - top - bottom);

    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    );
    svg += &format!("<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n");
    svg += &format!(
        "<line x1=\"{left}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        h - bottom,
        w - right,
        h - bottom
    );
    svg += &format!("<line x1=\"{left}\" y1=\"{top}\" x2=\"{left}\" y2=\"{}\" stroke=\"black\"/>\n", h - bottom);
    for i in 0..=5 {
        let a = i as f64 / 5.0;
        svg += &format!(
            "<text x=\"{}\" y=\"{:.1}\" text-anchor=\"end\">{a:.1}</text>\n",
            left - 6.0,
            y(a) + 4.0
        );
    }
    let ticks = 5;
    for i in 0..=ticks {
        let c = 1.0 + (x_max - 1.0) * i as f64 / ticks as f64;
        svg += &format!(
            "<text x=\"{:.1}\" y=\"{}\" text-anchor=\"middle\">{c:.1}</text>\n",
            x(c),
            h - bottom + 18.0
        );
    }
    svg += &format!(
        "<text x=\"{:.1}\" y=\"{}\" text-anchor=\"middle\">compression rate</text>\n",
        (left + w - right) / 2.0,
        h - 10.0
    );
    svg += &format!(
        "<text x=\"15\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 15 {:.1})\">test accuracy</text>\n",
        (top + h - bottom) / 2.0,
        (top + h - bottom) / 2.0
    );

    let mut methods: Vec<Method> = rows.iter().map(|r| r.method).collect();
    methods.sort();
    methods.dedup();
    for (i, method) in methods.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.method == *method)
            .map(|r| (r.compression, r.test_accuracy))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let coords: Vec<String> = pts.iter().map(|&(c, a)| format!("{:.1},{:.1}", x(c), y(a))).collect();
        svg += &format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>\n",
            coords.join(" ")
        );
        let ly = top + 20.0 * i as f64;
        svg += &format!(
            "<line x1=\"{}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
            w - right + 15.0,
            w - right + 35.0
        );
        svg += &format!("<text x=\"{}\" y=\"{}\">{method}</text>\n", w - right + 40.0, ly + 4.0);
    }
    svg += "</svg>\n";
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arch_labels() {
        assert_eq!("auto".parse::<Arch>().unwrap(), Arch::Auto);
        assert_eq!("reduced:3".parse::<Arch>().unwrap(), Arch::Reduced(3));
        assert_eq!(Arch::Reduced(5).to_string(), "reduced:5");
        for bad in ["reduced:0", "reduced:6", "big", "reduced:"] {
            assert!(bad.parse::<Arch>().is_err(), "{bad}");
        }
        assert!(Arch::Reduced(1).spec(10, 10).is_err());
        assert_eq!(Arch::Reduced(1).spec(5, 5).unwrap(), nn::build_architecture(5, 5).unwrap());
    }

    #[test]
    fn row_round_trip() {
        let row = ResultRow {
            method: Method::Circulant,
            stride: 6,
            arch: Arch::Reduced(2),
            seed: 11,
            epoch: 2,
            train_loss: 0.1234567,
            test_accuracy: 0.87654,
            weights: 220874,
            mflops: 1.0696,
            compression: 31.36,
        };
        let line = row.csv_line();
        assert_eq!(line, "circulant,6,reduced:2,11,2,0.123457,0.8765,220874,1.07,31.36");
        assert_eq!(ResultRow::parse_csv_line(&line).unwrap().csv_line(), line);
        assert!(ResultRow::parse_csv_line("pca,1").is_err());
    }

    #[test]
    fn config_text() {
        let mut c = SweepConfig::default();
        c.apply_config_text("# comment\nmethods = pca,circulant\nstrides=2..4\nseed=9\nfull=true\n")
            .unwrap();
        assert_eq!(c.methods, vec![Method::Pca, Method::Circulant]);
        assert_eq!(c.strides, vec![2, 3, 4]);
        assert_eq!(c.seed, 9);
        assert_eq!(c.protocol, Protocol::full());
        assert!(c.apply_config_text("colour=blue").is_err());
        assert!(c.apply_config_text("strides").is_err());
        c.strides = vec![7];
        assert!(c.validate().is_err());
    }

    #[test]
    fn partial_line_is_dropped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        fs::write(&path, format!("{CSV_HEADER}\npca,1,auto,0,2,0.1,0.9,1,1.00,1.00\npca,2,au")).unwrap();
        assert_eq!(read_results(&path).unwrap().len(), 1);
        assert!(fs::read_to_string(&path).unwrap().ends_with("1.00\n"));
        fs::write(&path, "a,b\n").unwrap();
        assert!(read_results(&path).is_err());
    }

    #[test]
    fn chart_has_one_line_per_method() {
        let row = |method, stride: usize, acc| ResultRow {
            method,
            stride,
            arch: Arch::Auto,
            seed: 0,
            epoch: 1,
            train_loss: 0.0,
            test_accuracy: acc,
            weights: 0,
            mflops: 0.0,
            compression: (stride * stride) as f64,
        };
        let svg = render_chart(&[
            row(Method::Pca, 1, 0.9),
            row(Method::Pca, 2, 0.8),
            row(Method::Downsample, 1, 0.9),
        ]);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    }
}
