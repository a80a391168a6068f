//! Nearest unitary BCCB matrix to a random real matrix, and the nearest
//! subsampled one for a stride grid.
//!
//! cargo run --example nearest_bccb

use compdl::bccb::{nearest_unitary_bccb, UnitaryBccb};
use compdl::linalg::{frobenius_norm, RealMatrix};
use compdl::subsample::{grid_sampler, nearest_subsampled};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> compdl::Result<()> {
    let (m, n) = (3, 4);
    let size = m * n;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let w = RealMatrix::from_fn(size, size, |_, _| rng.gen_range(-1.0..1.0));

    let best = nearest_unitary_bccb(&w, m, n)?;
    let c = best.materialize();
    let max_imag = c.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    let unitarity = frobenius_norm(&(&c * c.adjoint() - nalgebra::DMatrix::<Complex64>::identity(size, size)));
    let distance = frobenius_norm(&(w.map(|v| Complex64::new(v, 0.0)) - &c));
    println!("|W - C_o|_F = {distance:.6}");
    println!("max |Im C_o| = {max_imag:.2e}, |C_o C_o* - I|_F = {unitarity:.2e}");

    // Any other unitary BCCB is at least as far away.
    for trial in 0..3 {
        let spectrum = (0..size)
            .map(|_| Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU)))
            .collect();
        let other = UnitaryBccb::from_spectrum(spectrum, m, n)?.materialize();
        let d = frobenius_norm(&(w.map(|v| Complex64::new(v, 0.0)) - other));
        println!("random unitary BCCB {trial}: {d:.6}");
    }

    let sampler = grid_sampler(m, n, 2)?;
    let sub = RealMatrix::from_fn(sampler.s(), size, |_, _| rng.gen_range(-1.0..1.0));
    let p = nearest_subsampled(&sub, &sampler, m, n)?;
    println!(
        "subsampled: {} rows on a {:?} grid, |W - P|_F = {:.6}",
        p.s(),
        p.output_grid(),
        (sub - p.rows()).norm()
    );
    Ok(())
}
