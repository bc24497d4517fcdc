use ndarray::ArrayView2;

use super::{ModelError, Result};

/// Descending, log-spaced λ values from λ_max down to `λ_max·ratio`.
///
/// λ_max is the smallest λ at which every coefficient is zero (for
/// `alpha > 0`): `max_j |x_jᵀ(y − ȳ)| / (n·max(alpha, 0.001))`, nudged up
/// by ulps if rounding would leave a coordinate just above threshold.
pub fn lambda_path(
    xs: ArrayView2<f64>,
    y: &[f64],
    alpha: f64,
    path_length: usize,
    path_ratio: f64,
) -> Result<Vec<f64>> {
    let n = y.len();
    let mean = y.iter().sum::<f64>() / n as f64;
    let yc: Vec<f64> = y.iter().map(|v| v - mean).collect();
    if yc.iter().all(|v| v.abs() <= f64::EPSILON * mean.abs().max(1.0)) {
        return Err(ModelError::ConstantResponse);
    }
    let gmax = xs
        .columns()
        .into_iter()
        .map(|c| (c.iter().zip(&yc).map(|(x, r)| x * r).sum::<f64>() / n as f64).abs())
        .fold(0.0, f64::max);
    if gmax == 0.0 || !gmax.is_finite() {
        return Err(ModelError::NoSignal);
    }
    let a = alpha.max(0.001);
    let mut lambda_max = gmax / a;
    // soft_threshold zeroes z when |z| ≤ λα, so λ_max·α must not round below gmax
    while alpha > 0.0 && lambda_max * alpha < gmax {
        lambda_max = lambda_max.next_up();
    }
    if path_length == 1 {
        return Ok(vec![lambda_max]);
    }
    let last = (path_length - 1) as f64;
    Ok((0..path_length)
        .map(|k| {
            if k == 0 {
                lambda_max
            } else {
                lambda_max * path_ratio.powf(k as f64 / last)
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::standardize;
    use crate::model::testutil::random_problem;
    use ndarray::array;

    #[test]
    fn single_column_lambda_max() {
        let xs = standardize(array![[1.0], [2.0], [3.0], [4.0], [7.0]].view())
            .unwrap()
            .xs;
        let y: Vec<f64> = xs.column(0).to_vec();
        for alpha in [1.0, 0.5, 0.0] {
            let lmax = lambda_path(xs.view(), &y, alpha, 1, 0.5).unwrap()[0];
            let want = 1.0 / f64::max(alpha, 0.001);
            assert!((lmax - want).abs() < 1e-12 * want, "alpha {alpha}: {lmax}");
        }
    }

    #[test]
    fn shape_of_path() {
        let (x, y) = random_problem(20, 4, 7);
        let xs = standardize(x.view()).unwrap().xs;
        let path = lambda_path(xs.view(), &y, 0.5, 100, 1e-3).unwrap();
        assert_eq!(path.len(), 100);
        assert!(path.windows(2).all(|w| w[1] < w[0]));
        assert!((path[99] / path[0] - 1e-3).abs() < 1e-12);
    }

    #[test]
    fn constant_response_rejected() {
        let xs = standardize(array![[1.0], [2.0], [3.0]].view()).unwrap().xs;
        assert_eq!(
            lambda_path(xs.view(), &[4.0; 3], 0.5, 10, 0.1),
            Err(ModelError::ConstantResponse)
        );
        // y orthogonal to the only column
        assert_eq!(
            lambda_path(xs.view(), &[1.0, 0.0, 1.0], 0.5, 10, 0.1),
            Err(ModelError::NoSignal)
        );
    }
}
