//! Weight-free 208-dimensional image descriptor.
//!
//! Layout: three 64-bin intensity histograms (R, G, B; each sums to 1),
//! then for each quadrant of a 2x2 partition (row-major) the mean |dx|,
//! mean |dy|, mean dx^2 and mean dy^2 of the luminance gradient, with
//! luminance scaled to [0, 1].

use crate::acquisition::RasterImage;

use super::FeatureVector;

pub const BASELINE_DIM: usize = 208;
pub const BASELINE_ID: &str = "baseline-v1";
const BINS: usize = 64;

pub fn baseline_descriptor(image: &RasterImage) -> FeatureVector {
    let mut values = vec![0f32; BASELINE_DIM];
    let (w, h) = (image.width as usize, image.height as usize);
    let n = w * h;

    if n > 0 {
        let mut counts = [[0u32; BINS]; 3];
        for px in image.data.chunks_exact(3) {
            for (c, &v) in px.iter().enumerate() {
                counts[c][(v >> 2) as usize] += 1;
            }
        }
        for (c, hist) in counts.iter().enumerate() {
            for (b, &k) in hist.iter().enumerate() {
                values[c * BINS + b] = (k as f64 / n as f64) as f32;
            }
        }
    }

    let luma = |x: usize, y: usize| {
        let p = image.pixel(x as u32, y as u32);
        (p[0] as f64 + p[1] as f64 + p[2] as f64) / (3.0 * 255.0)
    };
    let quadrant = |x: usize, y: usize| (y >= h.div_ceil(2)) as usize * 2 + (x >= w.div_ceil(2)) as usize;

    // [sum|dx|, n_dx, sum dx^2, sum|dy|, n_dy, sum dy^2] per quadrant
    let mut acc = [[0f64; 6]; 4];
    for y in 0..h {
        for x in 0..w {
            let q = quadrant(x, y);
            let l = luma(x, y);
            if x + 1 < w {
                let d = luma(x + 1, y) - l;
                acc[q][0] += d.abs();
                acc[q][1] += 1.0;
                acc[q][2] += d * d;
            }
            if y + 1 < h {
                let d = luma(x, y + 1) - l;
                acc[q][3] += d.abs();
                acc[q][4] += 1.0;
                acc[q][5] += d * d;
            }
        }
    }
    let mean = |s: f64, k: f64| if k > 0.0 { s / k } else { 0.0 };
    for (q, a) in acc.iter().enumerate() {
        let base = 3 * BINS + q * 4;
        values[base] = mean(a[0], a[1]) as f32;
        values[base + 1] = mean(a[3], a[4]) as f32;
        values[base + 2] = mean(a[2], a[1]) as f32;
        values[base + 3] = mean(a[5], a[4]) as f32;
    }

    FeatureVector {
        values,
        extractor_id: BASELINE_ID.into(),
        layer_name: "baseline".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_image() {
        let v = baseline_descriptor(&RasterImage::filled(10, 7, [0, 100, 255])).values;
        assert_eq!(v.len(), BASELINE_DIM);
        assert_eq!(v[0], 1.0);
        assert_eq!(v[64 + 25], 1.0);
        assert_eq!(v[128 + 63], 1.0);
        assert_eq!(v[..192].iter().sum::<f32>(), 3.0);
        assert!(v[192..].iter().all(|&g| g == 0.0));
    }

    #[test]
    fn vertical_stripes_have_dx_energy_only() {
        let mut data = Vec::new();
        for _y in 0..4 {
            for x in 0..4 {
                let v = if x % 2 == 0 { 0 } else { 255 };
                data.extend_from_slice(&[v, v, v]);
            }
        }
        let v = baseline_descriptor(&RasterImage::new(4, 4, data).unwrap()).values;
        for q in 0..4 {
            let g = &v[192 + q * 4..192 + q * 4 + 4];
            assert_eq!(g[1], 0.0);
            assert_eq!(g[3], 0.0);
            assert!(g[0] > 0.5 && g[2] > 0.5);
        }
    }

    #[test]
    fn tiny_images() {
        assert_eq!(
            baseline_descriptor(&RasterImage::filled(1, 1, [3, 3, 3])).values.len(),
            BASELINE_DIM
        );
        let v = baseline_descriptor(&RasterImage::new(0, 0, vec![]).unwrap()).values;
        assert!(v.iter().all(|&x| x == 0.0));
    }

    proptest! {
        #[test]
        fn histograms_ignore_pixel_order(pixels in proptest::collection::vec(any::<[u8; 3]>(), 16), seed in any::<u64>()) {
            let img = RasterImage::new(4, 4, pixels.concat()).unwrap();
            let perm = crate::rng::permutation(16, seed);
            let shuffled: Vec<u8> = perm.iter().flat_map(|&i| pixels[i]).collect();
            let img2 = RasterImage::new(4, 4, shuffled).unwrap();
            let a = baseline_descriptor(&img).values;
            let b = baseline_descriptor(&img2).values;
            prop_assert_eq!(&a[..192], &b[..192]);
            prop_assert!(a.iter().all(|v| v.is_finite()));
        }
    }
}
