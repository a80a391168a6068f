//! Splitting a jointly trained network with a single-filter strided zeroth
//! layer into a fixed compression filter and the classifier behind it.

use super::network::Network;
use super::spec::{LayerSpec, NetworkSpec};
use crate::compressors::Kernel;
use crate::error::{Error, Result};

fn zeroth_layer(net: &Network) -> Result<(usize, usize)> {
    match net.spec().layers.first() {
        Some(&LayerSpec::Conv {
            filters: 1,
            kernel,
            stride,
            bias: false,
        }) if matches!(
            net.spec().input,
            super::spec::Shape::Spatial { channels: 1, .. }
        ) =>
        {
            Ok((kernel, stride))
        }
        other => Err(Error::InvalidArgument(format!(
            "network does not start with a single-filter bias-free convolution (found {other:?})"
        ))),
    }
}

/// The zeroth layer's kernel.
pub fn extract_pnn_filter(net: &Network) -> Result<Kernel> {
    let (size, _) = zeroth_layer(net)?;
    Kernel::new(size, net.layer_params(0)[0].values.clone())
}

pub fn pnn_stride(net: &Network) -> Result<usize> {
    Ok(zeroth_layer(net)?.1)
}

/// Everything after the zeroth layer, with its trained parameters.
pub fn detach_classifier(net: &Network) -> Result<Network> {
    zeroth_layer(net)?;
    let shapes = net.spec().shapes()?;
    let spec = NetworkSpec::new(shapes[1], net.spec().layers[1..].to_vec())?;
    let skip = net.layer_params(0).len();
    Network::from_params(&spec, net.params()[skip..].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::spec::{build_architecture, pnn_wrap};

    #[test]
    fn kernel_is_five_by_five() {
        let spec = pnn_wrap(&build_architecture(5, 5).unwrap(), 6, 28, 28).unwrap();
        let net = Network::init(&spec, 3);
        let k = extract_pnn_filter(&net).unwrap();
        assert_eq!(k.size(), 5);
        assert_eq!(k.values().len(), 25);
        assert_eq!(pnn_stride(&net).unwrap(), 6);
        let base = detach_classifier(&net).unwrap();
        assert_eq!(base.spec(), &build_architecture(5, 5).unwrap());
    }

    #[test]
    fn plain_network_has_no_zeroth_layer() {
        let net = Network::init(&build_architecture(5, 5).unwrap(), 3);
        assert!(extract_pnn_filter(&net).is_err());
        assert!(detach_classifier(&net).is_err());
    }
}
