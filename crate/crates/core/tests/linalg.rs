mod common;

use common::{rng, to_complex};
use compdl::linalg::{chordal_distance, dft_matrix, frobenius_norm, ComplexMatrix, Dft2Plan, RealMatrix};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

/// Rows of the Q factor of a random `d × s` matrix: `s` orthonormal rows.
fn orthonormal_rows(s: usize, d: usize, seed: u64) -> RealMatrix {
    let mut r = rng(seed);
    let a = DMatrix::from_fn(d, s, |_, _| r.gen_range(-1.0..1.0));
    a.qr().q().transpose()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn chordal_bounded_by_frobenius(s in 1usize..5, extra in 0usize..5, seed in any::<u64>()) {
        let d = s + extra;
        let a = orthonormal_rows(s, d, seed);
        let b = orthonormal_rows(s, d, seed.wrapping_add(1));
        let dist = chordal_distance(&a, &b).unwrap();
        prop_assert!(dist <= s as f64 * frobenius_norm(&(&a - &b)) + 1e-12);
        // The sharper constant also holds for orthonormal rows.
        prop_assert!(dist <= frobenius_norm(&(&a - &b)) + 1e-12);
    }

    #[test]
    fn chordal_symmetric(s in 1usize..5, extra in 0usize..5, seed in any::<u64>()) {
        let d = s + extra;
        let a = orthonormal_rows(s, d, seed);
        let b = orthonormal_rows(s, d, seed ^ 0x55);
        let ab = chordal_distance(&a, &b).unwrap();
        let ba = chordal_distance(&b, &a).unwrap();
        prop_assert!((ab - ba).abs() < 1e-14);
    }

    #[test]
    fn chordal_zero_on_same_row_space(s in 1usize..5, extra in 0usize..5, seed in any::<u64>()) {
        let d = s + extra;
        let a = orthonormal_rows(s, d, seed);
        let q = orthonormal_rows(s, s, seed ^ 0xaa);
        let b = &q * &a;
        prop_assert!(chordal_distance(&a, &b).unwrap() < 1e-12);
        if extra > 0 {
            let c = orthonormal_rows(s, d, seed ^ 0xbb);
            let gram_gap = frobenius_norm(&(a.transpose() * &a - c.transpose() * &c));
            prop_assert!((chordal_distance(&a, &c).unwrap() - 0.5 * gram_gap).abs() < 1e-12);
            prop_assert!(gram_gap > 1e-9);
        }
    }
}

#[test]
fn dft_plan_is_unitary() {
    let mut r = rng(11);
    for (m, n) in [(1, 1), (1, 7), (3, 4), (5, 5), (8, 6)] {
        let plan = Dft2Plan::new(m, n).unwrap();
        let x: Vec<Complex64> = (0..m * n)
            .map(|_| Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)))
            .collect();
        let y = plan.forward(&x).unwrap();
        let norm = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!((norm(&x) - norm(&y)).abs() < 1e-12);
        let back = plan.adjoint(&y).unwrap();
        assert!(x.iter().zip(&back).all(|(a, b)| (a - b).norm() < 1e-12));

        let f = dft_matrix(m, n).unwrap();
        let id = ComplexMatrix::identity(m * n, m * n);
        assert!((f.adjoint() * &f - id).norm() < 1e-10);
        let dense = f.adjoint() * nalgebra::DVector::from_column_slice(&x);
        assert!(dense.iter().zip(&y).all(|(a, b)| (a - b).norm() < 1e-10));
    }
}

#[test]
fn dft_matrix_is_kronecker_product() {
    let (m, n) = (3, 4);
    let f = dft_matrix(m, n).unwrap();
    let fm = dft_matrix(1, m).unwrap();
    let fn_ = dft_matrix(1, n).unwrap();
    assert!((f - fm.kronecker(&fn_)).norm() < 1e-12);
    // Plain e^{+2πi jk/n}/√n entries.
    let w = std::f64::consts::TAU / n as f64;
    for j in 0..n {
        for k in 0..n {
            let expected = Complex64::from_polar(1.0 / (n as f64).sqrt(), w * (j * k) as f64);
            assert!((fn_[(j, k)] - expected).norm() < 1e-12);
        }
    }
}

#[test]
fn real_input_helpers() {
    let a = RealMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 4.0]);
    assert_eq!(frobenius_norm(&a), 5.0);
    assert_eq!(frobenius_norm(&to_complex(&a)), 5.0);
    assert!(chordal_distance(&a, &RealMatrix::zeros(3, 2)).is_err());
}
