use crate::acquisition::RasterImage;

use super::{CnnError, NetworkSpec, Result, Tensor};

/// Bilinear resize to the network's input size (pixel centres aligned, edges
/// clamped), RGB channel order, per-channel mean subtraction; CHW output.
pub fn preprocess(image: &RasterImage, net: &NetworkSpec) -> Result<Tensor> {
    let (c, oh, ow) = net.input_dims;
    if c != 3 {
        return Err(CnnError::DimMismatch(format!(
            "network expects {c} input channels; images are RGB"
        )));
    }
    if image.width == 0 || image.height == 0 {
        return Err(CnnError::DimMismatch("empty image".into()));
    }
    let (iw, ih) = (image.width as usize, image.height as usize);
    let sx = iw as f64 / ow as f64;
    let sy = ih as f64 / oh as f64;

    // Source coordinate and blend weight along one axis.
    let axis = |dst: usize, scale: f64, len: usize| -> (usize, usize, f64) {
        let src = ((dst as f64 + 0.5) * scale - 0.5).clamp(0.0, (len - 1) as f64);
        let lo = src.floor() as usize;
        let hi = (lo + 1).min(len - 1);
        (lo, hi, src - lo as f64)
    };
    let xs: Vec<_> = (0..ow).map(|x| axis(x, sx, iw)).collect();
    let ys: Vec<_> = (0..oh).map(|y| axis(y, sy, ih)).collect();

    let mut data = vec![0f32; 3 * oh * ow];
    for (ch, mean) in net.channel_means.iter().enumerate() {
        let sample = |x: usize, y: usize| image.data[(y * iw + x) * 3 + ch] as f64;
        for (y, &(y0, y1, fy)) in ys.iter().enumerate() {
            for (x, &(x0, x1, fx)) in xs.iter().enumerate() {
                let top = sample(x0, y0) * (1.0 - fx) + sample(x1, y0) * fx;
                let bottom = sample(x0, y1) * (1.0 - fx) + sample(x1, y1) * fx;
                let v = top * (1.0 - fy) + bottom * fy;
                data[(ch * oh + y) * ow + x] = (v - *mean as f64) as f32;
            }
        }
    }
    Tensor::new(vec![3, oh, ow], data)
}
