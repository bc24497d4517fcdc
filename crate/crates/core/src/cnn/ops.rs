//! Layer kernels.

use crate::par;

use super::spec::{window_output, ConvLayer, FcLayer, LrnLayer, PoolLayer};
use super::{CnnError, Result, Tensor};

#[inline]
fn dot64(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x as f64 * y as f64).sum()
}

/// Zero-padded cross-correlation (no kernel flip) via im2col and a
/// row-by-row matrix product. One task per output channel.
pub fn conv2d(input: &Tensor, layer: &ConvLayer) -> Result<Tensor> {
    let (c, h, w) = input.chw()?;
    if c != layer.in_ch {
        return Err(CnnError::DimMismatch(format!(
            "conv expects {} input channels, got {c}",
            layer.in_ch
        )));
    }
    if layer.stride == 0 {
        return Err(CnnError::InvalidLayer {
            layer: "conv".into(),
            reason: "stride 0".into(),
        });
    }
    let (ho, wo) = layer.output_hw(h, w)?;
    let (kh, kw, stride, pad) = (layer.kh, layer.kw, layer.stride, layer.pad as isize);
    let k = c * kh * kw;
    let positions = ho * wo;

    // Row p of `cols` holds the receptive field of output position p.
    let mut cols = vec![0f32; positions * k];
    par::for_each_chunk_mut(&mut cols, k, |p, row| {
        let (oy, ox) = (p / wo, p % wo);
        let mut i = 0;
        for ci in 0..c {
            let plane = &input.data[ci * h * w..(ci + 1) * h * w];
            for ky in 0..kh {
                let iy = (oy * stride + ky) as isize - pad;
                for kx in 0..kw {
                    let ix = (ox * stride + kx) as isize - pad;
                    if iy >= 0 && ix >= 0 && (iy as usize) < h && (ix as usize) < w {
                        row[i] = plane[iy as usize * w + ix as usize];
                    }
                    i += 1;
                }
            }
        }
    });

    let mut out = vec![0f32; layer.out_ch * positions];
    par::for_each_chunk_mut(&mut out, positions, |oc, plane| {
        let filter = &layer.weights[oc * k..(oc + 1) * k];
        let bias = layer.bias[oc] as f64;
        for (p, o) in plane.iter_mut().enumerate() {
            *o = (dot64(filter, &cols[p * k..(p + 1) * k]) + bias) as f32;
        }
    });
    Tensor::new(vec![layer.out_ch, ho, wo], out)
}

pub fn relu(input: &Tensor) -> Tensor {
    Tensor {
        dims: input.dims.clone(),
        data: input.data.iter().map(|&v| v.max(0.0)).collect(),
    }
}

/// Per-channel window maximum. Padding cells never win.
pub fn max_pool(input: &Tensor, pool: &PoolLayer) -> Result<Tensor> {
    let (c, h, w) = input.chw()?;
    if pool.stride == 0 || pool.pad >= pool.k {
        return Err(CnnError::InvalidLayer {
            layer: "max_pool".into(),
            reason: format!("k={} stride={} pad={}", pool.k, pool.stride, pool.pad),
        });
    }
    let (ho, wo) = window_output(h, w, pool.k, pool.k, pool.stride, pool.pad)?;
    let pad = pool.pad as isize;
    let mut out = vec![0f32; c * ho * wo];
    par::for_each_chunk_mut(&mut out, ho * wo, |ci, plane_out| {
        let plane = &input.data[ci * h * w..(ci + 1) * h * w];
        for oy in 0..ho {
            for ox in 0..wo {
                let y0 = (oy * pool.stride) as isize - pad;
                let x0 = (ox * pool.stride) as isize - pad;
                let mut best = f32::NEG_INFINITY;
                for y in y0.max(0)..(y0 + pool.k as isize).min(h as isize) {
                    for x in x0.max(0)..(x0 + pool.k as isize).min(w as isize) {
                        best = best.max(plane[y as usize * w + x as usize]);
                    }
                }
                plane_out[oy * wo + ox] = best;
            }
        }
    });
    Tensor::new(vec![c, ho, wo], out)
}

/// Cross-channel local response normalisation:
/// `b_c = a_c / (k + alpha/n * sum_{c' in window(c)} a_{c'}^2)^beta`,
/// with the window clipped at the channel range.
pub fn lrn(input: &Tensor, params: &LrnLayer) -> Result<Tensor> {
    let (c, h, w) = input.chw()?;
    if params.n.is_multiple_of(2) {
        return Err(CnnError::InvalidLayer {
            layer: "lrn".into(),
            reason: format!("window size {} must be odd", params.n),
        });
    }
    let hw = h * w;
    let half = params.n / 2;
    let (k, alpha, beta, n) = (
        params.k as f64,
        params.alpha as f64,
        params.beta as f64,
        params.n as f64,
    );
    let mut out = vec![0f32; c * hw];
    par::for_each_chunk_mut(&mut out, hw, |ci, plane_out| {
        let lo = ci.saturating_sub(half);
        let hi = (ci + half).min(c - 1);
        for (i, o) in plane_out.iter_mut().enumerate() {
            let sum: f64 = (lo..=hi)
                .map(|cj| {
                    let a = input.data[cj * hw + i] as f64;
                    a * a
                })
                .sum();
            let a = input.data[ci * hw + i] as f64;
            *o = (a / (k + alpha / n * sum).powf(beta)) as f32;
        }
    });
    Tensor::new(input.dims.clone(), out)
}

/// `W x + b` on the flattened input.
pub fn fully_connected(input: &Tensor, layer: &FcLayer) -> Result<Tensor> {
    if input.len() != layer.inp {
        return Err(CnnError::DimMismatch(format!(
            "fully connected layer expects {} inputs, got {}",
            layer.inp,
            input.len()
        )));
    }
    let mut out = vec![0f32; layer.out];
    let rows_per_task = (layer.out / 64).max(1);
    par::for_each_chunk_mut(&mut out, rows_per_task, |chunk, outs| {
        for (j, o) in outs.iter_mut().enumerate() {
            let r = chunk * rows_per_task + j;
            let row = &layer.weights[r * layer.inp..(r + 1) * layer.inp];
            *o = (dot64(row, &input.data) + layer.bias[r] as f64) as f32;
        }
    });
    Ok(Tensor::vector(out))
}
