//! Fits the subsampled unitary BCCB projection to training images, saves
//! it as a CPRJ file and checks the reloaded copy.
//!
//! Uses MNIST from `$COMPDL_DATA_DIR` (or `./data`) when present, otherwise
//! synthetic images.
//!
//! cargo run --release --example build_projection -- 3

use compdl::dataset::{LabeledDataset, Split};
use compdl::experiment::{data_dir, DatasetName};
use compdl::io::{load_mnist_dir, load_projection, projection_file_size, save_projection};
use compdl::pca::fit_pca;
use compdl::subsample::{grid_sampler, projection_from_pca};

fn training_images() -> LabeledDataset {
    match load_mnist_dir(&data_dir(DatasetName::Mnist, None), Split::Train) {
        Ok(d) => d.subset(6000, 0),
        Err(e) => {
            eprintln!("{e}; using synthetic images");
            LabeledDataset::synthetic(2000, 28, 28, 0)
        }
    }
}

fn main() -> compdl::Result<()> {
    let stride: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(3);
    let train = training_images();
    let (m, n) = (train.images.rows(), train.images.cols());

    let sampler = grid_sampler(m, n, stride)?;
    let pca = fit_pca(&train.images, sampler.s())?;
    let projection = projection_from_pca(&pca, &sampler)?;
    let (gm, gn) = projection.output_grid();
    println!("s={} dims={gm}x{gn} compression={:.2}", projection.s(), (m * n) as f64 / projection.s() as f64);

    let dir = std::env::temp_dir().join(format!("compdl-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| compdl::Error::Io { path: dir.clone(), source: e })?;
    let path = dir.join(format!("stride{stride}.cprj"));
    save_projection(&projection, &path)?;
    let size = std::fs::metadata(&path).map(|m| m.len()).unwrap_or(0);
    println!("wrote {} ({size} bytes, expected {})", path.display(), projection_file_size(m, n, projection.s()));

    let reloaded = load_projection(&path)?;
    let image = train.images.image(0);
    assert_eq!(reloaded.compress(image)?, projection.compress(image)?);
    let coefficients = projection.compress(image)?;
    println!("first compressed values: {:.4?}", &coefficients[..4.min(coefficients.len())]);
    std::fs::remove_dir_all(&dir).ok();
    Ok(())
}
