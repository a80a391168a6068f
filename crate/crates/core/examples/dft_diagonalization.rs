//! The unitary 2D DFT diagonalizes every block circulant matrix with
//! circulant blocks: `F* C F = diag(√(mn) · F* c)` where `c` is the first
//! column of `C`.
//!
//! cargo run --example dft_diagonalization -- 4 6

use compdl::linalg::{dft_matrix, frobenius_norm, ComplexMatrix, Dft2Plan};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> compdl::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (m, n) = (*args.first().unwrap_or(&4), *args.get(1).unwrap_or(&6));
    let size = m * n;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let c: Vec<Complex64> = (0..size)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();

    // C[r, s] depends only on the wrapped 2D offset r ⊖ s.
    let bccb = ComplexMatrix::from_fn(size, size, |r, s| {
        let (a, b) = ((r / n + m - s / n) % m, (r % n + n - s % n) % n);
        c[a * n + b]
    });

    let f = dft_matrix(m, n)?;
    let d = f.adjoint() * &bccb * &f;
    let off_diagonal = frobenius_norm(&(d.clone() - ComplexMatrix::from_diagonal(&d.diagonal())));

    let plan = Dft2Plan::new(m, n)?;
    let scale = (size as f64).sqrt();
    let predicted: Vec<Complex64> = plan.forward(&c)?.into_iter().map(|v| v * scale).collect();
    let eig_error = d
        .diagonal()
        .iter()
        .zip(&predicted)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();

    println!("{m}x{n} blocks, matrix size {size}");
    println!("off-diagonal mass of F*CF: {off_diagonal:.3e}");
    println!("|diag(F*CF) - sqrt(mn) F*c|: {eig_error:.3e}");
    for (k, v) in predicted.iter().take(4).enumerate() {
        println!("  eigenvalue {k}: {:+.4} {:+.4}i", v.re, v.im);
    }
    Ok(())
}
