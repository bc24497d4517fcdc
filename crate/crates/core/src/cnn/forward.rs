use std::path::Path;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ExtendedColorType, ImageEncoder};

use super::ops::{conv2d, fully_connected, lrn, max_pool, relu};
use super::spec::{Layer, LayerKind, NetworkSpec};
use super::{CnnError, FeatureVector, Result, Tensor};

fn apply(layer: &Layer, input: Tensor) -> Result<Tensor> {
    match &layer.kind {
        LayerKind::Conv(c) => conv2d(&input, c),
        LayerKind::Relu => Ok(relu(&input)),
        LayerKind::MaxPool(p) => max_pool(&input, p),
        LayerKind::Lrn(l) => lrn(&input, l),
        LayerKind::FullyConnected(f) => fully_connected(&input, f),
    }
}

/// Runs layers `0..=last` on a preprocessed input.
fn run_through(net: &NetworkSpec, input: &Tensor, last: usize) -> Result<Tensor> {
    let (c, h, w) = net.input_dims;
    if input.dims != [c, h, w] {
        return Err(CnnError::DimMismatch(format!(
            "network input is {:?}, got {:?}",
            [c, h, w],
            input.dims
        )));
    }
    net.layers[..=last]
        .iter()
        .try_fold(input.clone(), |t, layer| apply(layer, t))
}

/// Output of `layer_name` (inclusive), flattened.
pub fn forward_to_layer(net: &NetworkSpec, input: &Tensor, layer_name: &str) -> Result<FeatureVector> {
    let idx = net.layer_index(layer_name)?;
    let out = run_through(net, input, idx)?;
    Ok(FeatureVector {
        values: out.data,
        extractor_id: "cnn".into(),
        layer_name: layer_name.to_string(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ActivationGrid {
    pub channel: usize,
    pub width: usize,
    pub height: usize,
    pub values: Vec<f32>,
}

/// One grid per output channel of a conv layer, taken after the ReLU that
/// immediately follows it (if any).
pub fn activation_maps(net: &NetworkSpec, input: &Tensor, layer_name: &str) -> Result<Vec<ActivationGrid>> {
    let idx = net.layer_index(layer_name)?;
    if !matches!(net.layers[idx].kind, LayerKind::Conv(_)) {
        return Err(CnnError::NotConvLayer(layer_name.to_string()));
    }
    let mut out = run_through(net, input, idx)?;
    if matches!(net.layers.get(idx + 1).map(|l| &l.kind), Some(LayerKind::Relu)) {
        out = relu(&out);
    }
    let (c, h, w) = out.chw()?;
    Ok((0..c)
        .map(|ch| ActivationGrid {
            channel: ch,
            width: w,
            height: h,
            values: out.data[ch * h * w..(ch + 1) * h * w].to_vec(),
        })
        .collect())
}

/// Binary PGM, values min-max scaled to 0..=255 (uniform grids map to 0).
pub fn write_pgm(grid: &ActivationGrid, path: &Path) -> Result<()> {
    let (lo, hi) = grid
        .values
        .iter()
        .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let range = hi - lo;
    let pixels: Vec<u8> = grid
        .values
        .iter()
        .map(|&v| {
            if range > 0.0 {
                ((v - lo) / range * 255.0).round() as u8
            } else {
                0
            }
        })
        .collect();
    let file = std::fs::File::create(path)?;
    PnmEncoder::new(std::io::BufWriter::new(file))
        .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
        .write_image(&pixels, grid.width as u32, grid.height as u32, ExtendedColorType::L8)
        .map_err(|e| CnnError::Io(std::io::Error::other(e)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnn::spec::{ConvLayer, FcLayer};

    fn identity_conv_net() -> NetworkSpec {
        // 1x1 conv picking the green channel, then ReLU, then a 2-out FC
        NetworkSpec {
            input_dims: (3, 2, 2),
            channel_means: [0.0; 3],
            layers: vec![
                Layer {
                    name: "conv".into(),
                    kind: LayerKind::Conv(ConvLayer {
                        out_ch: 1,
                        in_ch: 3,
                        kh: 1,
                        kw: 1,
                        stride: 1,
                        pad: 0,
                        weights: vec![0.0, 1.0, 0.0],
                        bias: vec![0.0],
                    }),
                },
                Layer {
                    name: "relu".into(),
                    kind: LayerKind::Relu,
                },
                Layer {
                    name: "fc".into(),
                    kind: LayerKind::FullyConnected(FcLayer {
                        out: 2,
                        inp: 4,
                        weights: vec![1.0, 1.0, 1.0, 1.0, 1.0, -1.0, 0.0, 0.0],
                        bias: vec![0.0, 0.5],
                    }),
                },
            ],
        }
    }

    fn input() -> Tensor {
        // R plane, G plane, B plane
        Tensor::new(vec![3, 2, 2], vec![9., 9., 9., 9., 1., -2., 3., -4., 7., 7., 7., 7.]).unwrap()
    }

    #[test]
    fn toy_net_hand_computed() {
        let net = identity_conv_net();
        let v = forward_to_layer(&net, &input(), "relu").unwrap();
        assert_eq!(v.values, vec![1.0, 0.0, 3.0, 0.0]);
        let v = forward_to_layer(&net, &input(), "fc").unwrap();
        assert_eq!(v.values, vec![4.0, 1.5]);
        assert_eq!(v.layer_name, "fc");
    }

    #[test]
    fn first_layer_prefix() {
        let net = identity_conv_net();
        let v = forward_to_layer(&net, &input(), "conv").unwrap();
        let LayerKind::Conv(c) = &net.layers[0].kind else {
            unreachable!()
        };
        assert_eq!(v.values, conv2d(&input(), c).unwrap().data);
    }

    #[test]
    fn unknown_layer_and_bad_input() {
        let net = identity_conv_net();
        assert!(matches!(
            forward_to_layer(&net, &input(), "fc9"),
            Err(CnnError::UnknownLayer(_))
        ));
        assert!(matches!(
            forward_to_layer(&net, &Tensor::zeros(vec![3, 3, 3]), "fc"),
            Err(CnnError::DimMismatch(_))
        ));
    }

    #[test]
    fn activation_maps_shape_and_relu() {
        let net = identity_conv_net();
        let maps = activation_maps(&net, &input(), "conv").unwrap();
        assert_eq!(maps.len(), 1);
        assert_eq!((maps[0].width, maps[0].height), (2, 2));
        assert_eq!(maps[0].values, vec![1.0, 0.0, 3.0, 0.0]);
        assert!(matches!(
            activation_maps(&net, &input(), "fc"),
            Err(CnnError::NotConvLayer(_))
        ));
        let zero = activation_maps(&net, &Tensor::zeros(vec![3, 2, 2]), "conv").unwrap();
        assert!(zero[0].values.iter().all(|&v| v == zero[0].values[0]));
    }

    #[test]
    fn pgm_export() {
        let dir = tempfile::tempdir().unwrap();
        let grid = ActivationGrid {
            channel: 0,
            width: 3,
            height: 1,
            values: vec![-1.0, 0.0, 1.0],
        };
        let path = dir.path().join("a.pgm");
        write_pgm(&grid, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert!(bytes.starts_with(b"P5"));
        assert_eq!(&bytes[bytes.len() - 3..], &[0, 128, 255]);
        let flat = ActivationGrid {
            values: vec![2.0; 3],
            ..grid
        };
        write_pgm(&flat, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(&bytes[bytes.len() - 3..], &[0, 0, 0]);
    }
}
