use ndarray::{Array2, ArrayView2, ShapeBuilder};

use super::{ModelError, Result};

/// Columns with a smaller population sd are dropped.
pub const MIN_SD: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct Standardized {
    /// Surviving columns only, column-major, each with mean 0 and
    /// population variance 1.
    pub xs: Array2<f64>,
    /// Mean and sd of every input column, dropped ones included.
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
    /// Input indices of the columns in `xs`.
    pub kept: Vec<usize>,
    pub dropped: Vec<usize>,
}

pub fn standardize(x: ArrayView2<f64>) -> Result<Standardized> {
    let (n, p) = x.dim();
    if n < 2 {
        return Err(ModelError::TooFewRows { need: 2, got: n });
    }
    let mut means = Vec::with_capacity(p);
    let mut sds = Vec::with_capacity(p);
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    let mut data = Vec::with_capacity(n * p);
    for (j, col) in x.columns().into_iter().enumerate() {
        let mean = col.iter().sum::<f64>() / n as f64;
        let sd = (col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64).sqrt();
        means.push(mean);
        sds.push(sd);
        if sd < MIN_SD || !sd.is_finite() {
            dropped.push(j);
        } else {
            kept.push(j);
            data.extend(col.iter().map(|v| (v - mean) / sd));
        }
    }
    if kept.is_empty() {
        return Err(ModelError::AllColumnsConstant);
    }
    let xs = Array2::from_shape_vec((n, kept.len()).f(), data).expect("sized above");
    Ok(Standardized {
        xs,
        means,
        sds,
        kept,
        dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn one_two_three() {
        let s = standardize(array![[1.0], [2.0], [3.0]].view()).unwrap();
        let expect = 1.5f64.sqrt();
        assert!((s.xs[[0, 0]] + expect).abs() < 1e-12);
        assert_eq!(s.xs[[1, 0]], 0.0);
        assert!((s.xs[[2, 0]] - expect).abs() < 1e-12);
        assert!((s.xs[[2, 0]] - 1.2247).abs() < 1e-4);
    }

    #[test]
    fn constant_column_dropped() {
        let s = standardize(array![[1.0, 5.0], [2.0, 5.0], [4.0, 5.0]].view()).unwrap();
        assert_eq!(s.kept, [0]);
        assert_eq!(s.dropped, [1]);
        assert_eq!(s.xs.ncols(), 1);
        assert_eq!(s.means[1], 5.0);
        assert!(matches!(
            standardize(array![[1.0], [1.0]].view()),
            Err(ModelError::AllColumnsConstant)
        ));
        assert!(matches!(
            standardize(array![[1.0]].view()),
            Err(ModelError::TooFewRows { .. })
        ));
    }

    proptest! {
        #[test]
        fn idempotent(data in proptest::collection::vec(-100.0f64..100.0, 24)) {
            let x = Array2::from_shape_vec((8, 3), data).unwrap();
            let Ok(a) = standardize(x.view()) else { return Ok(()) };
            let b = standardize(a.xs.view()).unwrap();
            prop_assert!(b.dropped.is_empty());
            for (u, v) in a.xs.iter().zip(b.xs.iter()) {
                prop_assert!((u - v).abs() < 1e-12);
            }
            for j in 0..a.xs.ncols() {
                let c = a.xs.column(j);
                prop_assert!((c.sum() / 8.0).abs() < 1e-12);
                prop_assert!((c.mapv(|v| v * v).sum() / 8.0 - 1.0).abs() < 1e-12);
            }
        }
    }
}
