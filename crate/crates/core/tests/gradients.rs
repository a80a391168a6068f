mod common;

use common::{conv, gradient_check, random_batch, rng, small_net};
use compdl::nn::{LayerSpec, Shape};

const TOL: f64 = 1e-4;

fn check(input: Shape, layers: Vec<LayerSpec>, seed: u64, dropout_seed: Option<u64>) -> f64 {
    let net = small_net(input, layers, seed);
    let (x, y) = random_batch(input.len(), 3, 4, seed + 100);
    gradient_check(&net, &x, &y, || dropout_seed.map(rng))
}

#[test]
fn dense_and_softmax() {
    let err = check(Shape::Flat(6), vec![LayerSpec::Dense { units: 5 }, LayerSpec::Softmax { classes: 4 }], 1, None);
    assert!(err < TOL, "{err}");
    let err = check(Shape::Flat(3), vec![LayerSpec::Softmax { classes: 4 }], 2, None);
    assert!(err < TOL, "{err}");
}

#[test]
fn conv_with_bias() {
    let layers = vec![conv(3, 3, 1, true), LayerSpec::Softmax { classes: 4 }];
    let err = check(Shape::spatial(2, 5, 4), layers, 3, None);
    assert!(err < TOL, "{err}");
}

#[test]
fn conv_without_bias() {
    let layers = vec![conv(2, 5, 1, false), LayerSpec::Softmax { classes: 4 }];
    let err = check(Shape::spatial(1, 6, 6), layers, 4, None);
    assert!(err < TOL, "{err}");
}

#[test]
fn strided_conv() {
    for stride in 2..=4 {
        let layers = vec![conv(2, 5, stride, false), conv(2, 3, 1, true), LayerSpec::Softmax { classes: 4 }];
        let err = check(Shape::spatial(1, 9, 8), layers, 5 + stride as u64, None);
        assert!(err < TOL, "stride {stride}: {err}");
    }
}

#[test]
fn relu() {
    let layers = vec![conv(3, 3, 1, true), LayerSpec::Relu, LayerSpec::Dense { units: 6 }, LayerSpec::Relu, LayerSpec::Softmax { classes: 4 }];
    let err = check(Shape::spatial(1, 4, 4), layers, 9, None);
    assert!(err < TOL, "{err}");
}

#[test]
fn max_pool() {
    // Odd sides exercise the dropped trailing row and column.
    for (h, w) in [(4, 4), (5, 7)] {
        let layers = vec![conv(2, 3, 1, true), LayerSpec::MaxPool2, LayerSpec::Softmax { classes: 4 }];
        let err = check(Shape::spatial(1, h, w), layers, 10 + h as u64, None);
        assert!(err < TOL, "{h}x{w}: {err}");
    }
}

#[test]
fn dropout_with_fixed_mask() {
    let layers = vec![LayerSpec::Dense { units: 8 }, LayerSpec::Dropout { rate: 0.4 }, LayerSpec::Softmax { classes: 4 }];
    let err = check(Shape::Flat(5), layers.clone(), 12, Some(77));
    assert!(err < TOL, "{err}");
    // Inactive in evaluation mode.
    let err = check(Shape::Flat(5), layers, 12, None);
    assert!(err < TOL, "{err}");
}

#[test]
fn benchmark_stack() {
    let layers = vec![
        conv(4, 5, 1, true),
        LayerSpec::Relu,
        LayerSpec::MaxPool2,
        conv(4, 5, 1, true),
        LayerSpec::Relu,
        LayerSpec::Dense { units: 8 },
        LayerSpec::Relu,
        LayerSpec::Dropout { rate: 0.4 },
        LayerSpec::Softmax { classes: 4 },
    ];
    let err = check(Shape::spatial(1, 6, 6), layers, 13, Some(5));
    assert!(err < TOL, "{err}");
}

#[test]
fn pnn_zeroth_layer() {
    let layers = vec![conv(1, 5, 3, false), conv(2, 3, 1, true), LayerSpec::Relu, LayerSpec::Softmax { classes: 4 }];
    let err = check(Shape::spatial(1, 9, 9), layers, 14, None);
    assert!(err < TOL, "{err}");
}
