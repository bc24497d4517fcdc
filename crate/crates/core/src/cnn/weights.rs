//! `CNW1` weight files (little-endian).
//!
//! ```text
//! "CNW1" u32 version=1 u32 C,H,W  f32 mean[3]  u32 layer_count
//! per layer: u8 tag, u16 name_len, name (UTF-8), header, f32 data
//!   0 Conv  u32 out,in,kh,kw,stride,pad  weights[out*in*kh*kw] bias[out]
//!   1 ReLU
//!   2 MaxPool u32 k,stride,pad
//!   3 LRN   f32 k,alpha,beta  u32 n
//!   4 FC    u32 out,in  weights[out*in] bias[out]
//! ```

use std::path::Path;

use super::spec::{ConvLayer, FcLayer, Layer, LayerKind, LrnLayer, NetworkSpec, PoolLayer};
use super::{CnnError, Result};

pub const WEIGHTS_MAGIC: &[u8; 4] = b"CNW1";
const VERSION: u32 = 1;

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(CnnError::Truncated(what.to_string()));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u16(&mut self, what: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn usize(&mut self, what: &str) -> Result<usize> {
        self.u32(what).map(|v| v as usize)
    }

    fn f32(&mut self, what: &str) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn f32s(&mut self, count: usize, what: &str) -> Result<Vec<f32>> {
        let bytes = count
            .checked_mul(4)
            .ok_or_else(|| CnnError::Truncated(what.to_string()))?;
        Ok(self
            .take(bytes, what)?
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

fn checked_product(dims: &[usize], what: &str) -> Result<usize> {
    dims.iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| CnnError::Truncated(what.to_string()))
}

pub fn parse_weights(bytes: &[u8]) -> Result<NetworkSpec> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(4, "magic").map_err(|_| CnnError::BadMagic)? != WEIGHTS_MAGIC {
        return Err(CnnError::BadMagic);
    }
    let version = r.u32("version")?;
    if version != VERSION {
        return Err(CnnError::UnsupportedVersion(version));
    }
    let input_dims = (r.usize("input dims")?, r.usize("input dims")?, r.usize("input dims")?);
    let channel_means = [r.f32("means")?, r.f32("means")?, r.f32("means")?];
    let count = r.u32("layer count")?;

    let mut layers = Vec::new();
    for _ in 0..count {
        let tag = r.u8("layer tag")?;
        let name_len = r.u16("name length")? as usize;
        let name = std::str::from_utf8(r.take(name_len, "layer name")?)
            .map_err(|_| CnnError::InvalidName)?
            .to_string();
        let what = |part: &str| format!("{part} of layer {name:?}");
        let kind = match tag {
            0 => {
                let mut h = [0usize; 6];
                for v in &mut h {
                    *v = r.usize(&what("conv header"))?;
                }
                let [out_ch, in_ch, kh, kw, stride, pad] = h;
                let n = checked_product(&[out_ch, in_ch, kh, kw], &what("conv weights"))?;
                LayerKind::Conv(ConvLayer {
                    out_ch,
                    in_ch,
                    kh,
                    kw,
                    stride,
                    pad,
                    weights: r.f32s(n, &what("conv weights"))?,
                    bias: r.f32s(out_ch, &what("conv bias"))?,
                })
            }
            1 => LayerKind::Relu,
            2 => LayerKind::MaxPool(PoolLayer {
                k: r.usize(&what("pool header"))?,
                stride: r.usize(&what("pool header"))?,
                pad: r.usize(&what("pool header"))?,
            }),
            3 => LayerKind::Lrn(LrnLayer {
                k: r.f32(&what("lrn header"))?,
                alpha: r.f32(&what("lrn header"))?,
                beta: r.f32(&what("lrn header"))?,
                n: r.usize(&what("lrn header"))?,
            }),
            4 => {
                let out = r.usize(&what("fc header"))?;
                let inp = r.usize(&what("fc header"))?;
                let n = checked_product(&[out, inp], &what("fc weights"))?;
                LayerKind::FullyConnected(FcLayer {
                    out,
                    inp,
                    weights: r.f32s(n, &what("fc weights"))?,
                    bias: r.f32s(out, &what("fc bias"))?,
                })
            }
            other => return Err(CnnError::UnknownTag(other)),
        };
        layers.push(Layer { name, kind });
    }
    if r.pos != bytes.len() {
        return Err(CnnError::TrailingBytes(bytes.len() - r.pos));
    }
    let spec = NetworkSpec {
        input_dims,
        channel_means,
        layers,
    };
    spec.validate()?;
    Ok(spec)
}

pub fn read_weights(path: &Path) -> Result<NetworkSpec> {
    parse_weights(&std::fs::read(path)?)
}

pub fn serialize_weights(spec: &NetworkSpec) -> Vec<u8> {
    let mut out = Vec::new();
    let u32le = |out: &mut Vec<u8>, v: usize| out.extend_from_slice(&(v as u32).to_le_bytes());
    let f32s = |out: &mut Vec<u8>, vs: &[f32]| vs.iter().for_each(|v| out.extend_from_slice(&v.to_le_bytes()));

    out.extend_from_slice(WEIGHTS_MAGIC);
    u32le(&mut out, VERSION as usize);
    let (c, h, w) = spec.input_dims;
    for d in [c, h, w] {
        u32le(&mut out, d);
    }
    f32s(&mut out, &spec.channel_means);
    u32le(&mut out, spec.layers.len());
    for layer in &spec.layers {
        let tag = match layer.kind {
            LayerKind::Conv(_) => 0u8,
            LayerKind::Relu => 1,
            LayerKind::MaxPool(_) => 2,
            LayerKind::Lrn(_) => 3,
            LayerKind::FullyConnected(_) => 4,
        };
        out.push(tag);
        out.extend_from_slice(&(layer.name.len() as u16).to_le_bytes());
        out.extend_from_slice(layer.name.as_bytes());
        match &layer.kind {
            LayerKind::Conv(l) => {
                for v in [l.out_ch, l.in_ch, l.kh, l.kw, l.stride, l.pad] {
                    u32le(&mut out, v);
                }
                f32s(&mut out, &l.weights);
                f32s(&mut out, &l.bias);
            }
            LayerKind::Relu => {}
            LayerKind::MaxPool(p) => {
                for v in [p.k, p.stride, p.pad] {
                    u32le(&mut out, v);
                }
            }
            LayerKind::Lrn(l) => {
                f32s(&mut out, &[l.k, l.alpha, l.beta]);
                u32le(&mut out, l.n);
            }
            LayerKind::FullyConnected(l) => {
                u32le(&mut out, l.out);
                u32le(&mut out, l.inp);
                f32s(&mut out, &l.weights);
                f32s(&mut out, &l.bias);
            }
        }
    }
    out
}
