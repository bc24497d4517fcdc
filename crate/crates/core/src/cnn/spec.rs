use std::collections::HashSet;

use super::{CnnError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct ConvLayer {
    pub out_ch: usize,
    pub in_ch: usize,
    pub kh: usize,
    pub kw: usize,
    pub stride: usize,
    pub pad: usize,
    /// `out_ch * in_ch * kh * kw`, row-major in that order.
    pub weights: Vec<f32>,
    pub bias: Vec<f32>,
}

impl ConvLayer {
    pub fn output_hw(&self, h: usize, w: usize) -> Result<(usize, usize)> {
        window_output(h, w, self.kh, self.kw, self.stride, self.pad)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PoolLayer {
    pub k: usize,
    pub stride: usize,
    pub pad: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LrnLayer {
    pub k: f32,
    pub alpha: f32,
    pub beta: f32,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FcLayer {
    pub out: usize,
    pub inp: usize,
    /// `out * inp`, row-major.
    pub weights: Vec<f32>,
    pub bias: Vec<f32>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LayerKind {
    Conv(ConvLayer),
    Relu,
    MaxPool(PoolLayer),
    Lrn(LrnLayer),
    FullyConnected(FcLayer),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    pub name: String,
    pub kind: LayerKind,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NetworkSpec {
    pub input_dims: (usize, usize, usize),
    pub channel_means: [f32; 3],
    pub layers: Vec<Layer>,
}

/// Output spatial size for a sliding window with zero/neg-inf padding.
pub(crate) fn window_output(
    h: usize,
    w: usize,
    kh: usize,
    kw: usize,
    stride: usize,
    pad: usize,
) -> Result<(usize, usize)> {
    let (ph, pw) = (h + 2 * pad, w + 2 * pad);
    if kh > ph || kw > pw || kh == 0 || kw == 0 {
        return Err(CnnError::KernelTooLarge {
            kernel: kh,
            kernel_w: kw,
            height: ph,
            width: pw,
        });
    }
    Ok(((ph - kh) / stride + 1, (pw - kw) / stride + 1))
}

impl NetworkSpec {
    pub fn layer_index(&self, name: &str) -> Result<usize> {
        self.layers
            .iter()
            .position(|l| l.name == name)
            .ok_or_else(|| CnnError::UnknownLayer(name.to_string()))
    }

    /// Output dims after every layer, checking names, weight sizes and the
    /// dimension chain.
    pub fn shapes(&self) -> Result<Vec<Vec<usize>>> {
        let mut names = HashSet::new();
        let (c, h, w) = self.input_dims;
        let mut dims = vec![c, h, w];
        let mut out = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            if !names.insert(layer.name.as_str()) {
                return Err(CnnError::DuplicateLayer(layer.name.clone()));
            }
            let invalid = |reason: String| CnnError::InvalidLayer {
                layer: layer.name.clone(),
                reason,
            };
            let chw = |dims: &[usize]| -> Result<(usize, usize, usize)> {
                match *dims {
                    [c, h, w] => Ok((c, h, w)),
                    _ => Err(CnnError::DimMismatch(format!(
                        "layer {:?} needs a (C,H,W) input, got {dims:?}",
                        layer.name
                    ))),
                }
            };
            dims = match &layer.kind {
                LayerKind::Conv(conv) => {
                    let (c, h, w) = chw(&dims)?;
                    if conv.stride == 0 {
                        return Err(invalid("stride 0".into()));
                    }
                    if c != conv.in_ch {
                        return Err(CnnError::DimMismatch(format!(
                            "layer {:?} expects {} input channels, got {c}",
                            layer.name, conv.in_ch
                        )));
                    }
                    let n = conv.out_ch * conv.in_ch * conv.kh * conv.kw;
                    if conv.weights.len() != n || conv.bias.len() != conv.out_ch {
                        return Err(CnnError::DimMismatch(format!(
                            "layer {:?} weight/bias sizes do not match its shape",
                            layer.name
                        )));
                    }
                    let (ho, wo) = conv.output_hw(h, w)?;
                    vec![conv.out_ch, ho, wo]
                }
                LayerKind::Relu => dims,
                LayerKind::MaxPool(p) => {
                    let (c, h, w) = chw(&dims)?;
                    if p.stride == 0 || p.pad >= p.k {
                        return Err(invalid(format!("k={} stride={} pad={}", p.k, p.stride, p.pad)));
                    }
                    let (ho, wo) = window_output(h, w, p.k, p.k, p.stride, p.pad)?;
                    vec![c, ho, wo]
                }
                LayerKind::Lrn(l) => {
                    chw(&dims)?;
                    if l.n % 2 == 0 {
                        return Err(invalid(format!("window size {} must be odd", l.n)));
                    }
                    dims
                }
                LayerKind::FullyConnected(fc) => {
                    let len: usize = dims.iter().product();
                    if len != fc.inp {
                        return Err(CnnError::DimMismatch(format!(
                            "layer {:?} expects {} inputs, got {len}",
                            layer.name, fc.inp
                        )));
                    }
                    if fc.weights.len() != fc.out * fc.inp || fc.bias.len() != fc.out {
                        return Err(CnnError::DimMismatch(format!(
                            "layer {:?} weight/bias sizes do not match its shape",
                            layer.name
                        )));
                    }
                    vec![fc.out]
                }
            };
            out.push(dims.clone());
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        self.shapes().map(|_| ())
    }
}
