use ndarray::{Array2, ArrayView2, Axis};

use super::solver::CoordinateDescent;
use super::{lambda_path, standardize, ElasticNetConfig, ModelError, Result};
use crate::{par, rng};

#[derive(Clone, Debug, PartialEq)]
pub struct CvResult {
    /// The shared, descending λ path.
    pub lambdas: Vec<f64>,
    pub mean_cv_mse: Vec<f64>,
    pub folds: usize,
    /// Fold index of every row.
    pub fold_of: Vec<usize>,
    /// Out-of-fold predictions, one row per data row, one column per λ.
    pub oof: Array2<f64>,
}

impl CvResult {
    pub fn out_of_fold(&self, lambda_index: usize) -> Vec<f64> {
        self.oof.column(lambda_index).to_vec()
    }
}

/// Shuffles rows with `seed`, then deals them round-robin into `k` folds.
pub fn fold_assignment(n: usize, k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(ModelError::InvalidConfig("folds must be at least 2".into()));
    }
    if n < k {
        return Err(ModelError::TooFewRows { need: k, got: n });
    }
    let mut fold_of = vec![0; n];
    for (pos, row) in rng::permutation(n, seed).into_iter().enumerate() {
        fold_of[row] = pos % k;
    }
    // round-robin dealing makes the smallest fold floor(n/k) rows
    if n / k < 2 {
        return Err(ModelError::SmallFold {
            fold: k - 1,
            rows: n / k,
        });
    }
    Ok(fold_of)
}

/// Cross-validates the full-data λ path with `cfg.folds` folds.
pub fn kfold_cv(x: ArrayView2<f64>, y: &[f64], cfg: &ElasticNetConfig) -> Result<CvResult> {
    cfg.validate()?;
    let st = standardize(x)?;
    let lambdas = lambda_path(st.xs.view(), y, cfg.alpha, cfg.path_length, cfg.path_ratio)?;
    cv_on_path(x, y, &lambdas, cfg)
}

pub(crate) fn cv_on_path(x: ArrayView2<f64>, y: &[f64], lambdas: &[f64], cfg: &ElasticNetConfig) -> Result<CvResult> {
    let n = y.len();
    let k = cfg.folds.resolve(n);
    let fold_of = fold_assignment(n, k, cfg.seed)?;

    let per_fold = par::map_range(k, |f| fold_predictions(x, y, lambdas, &fold_of, f, cfg));
    let mut oof = Array2::zeros((n, lambdas.len()));
    let mut mse_sum = vec![0.0; lambdas.len()];
    for (f, res) in per_fold.into_iter().enumerate() {
        let (rows, preds) = res?;
        for (l, sum) in mse_sum.iter_mut().enumerate() {
            let sq: f64 = rows
                .iter()
                .enumerate()
                .map(|(t, &i)| (y[i] - preds[[t, l]]).powi(2))
                .sum();
            *sum += sq / rows.len() as f64;
        }
        debug_assert!(rows.iter().all(|&i| fold_of[i] == f));
        for (t, &i) in rows.iter().enumerate() {
            oof.row_mut(i).assign(&preds.row(t));
        }
    }
    Ok(CvResult {
        lambdas: lambdas.to_vec(),
        mean_cv_mse: mse_sum.into_iter().map(|s| s / k as f64).collect(),
        folds: k,
        fold_of,
        oof,
    })
}

/// Held-out rows of fold `f` and their predictions at every λ.
fn fold_predictions(
    x: ArrayView2<f64>,
    y: &[f64],
    lambdas: &[f64],
    fold_of: &[usize],
    f: usize,
    cfg: &ElasticNetConfig,
) -> Result<(Vec<usize>, Array2<f64>)> {
    let (test, train): (Vec<usize>, Vec<usize>) = (0..y.len()).partition(|&i| fold_of[i] == f);
    let x_train = x.select(Axis(0), &train);
    let y_train: Vec<f64> = train.iter().map(|&i| y[i]).collect();
    let st = standardize(x_train.view())?;

    // held-out rows on the training fold's scale
    let mut xt = Array2::zeros((test.len(), st.kept.len()));
    for (t, &i) in test.iter().enumerate() {
        for (c, &j) in st.kept.iter().enumerate() {
            xt[[t, c]] = (x[[i, j]] - st.means[j]) / st.sds[j];
        }
    }

    let mut cd = CoordinateDescent::new(st.xs.view(), &y_train);
    let y_mean = y_train.iter().sum::<f64>() / y_train.len() as f64;
    let mut preds = Array2::zeros((test.len(), lambdas.len()));
    for (l, &lambda) in lambdas.iter().enumerate() {
        cd.set_penalty(lambda, cfg.alpha);
        let fit = cd.fit(cfg.tol, cfg.max_sweeps)?;
        for t in 0..test.len() {
            preds[[t, l]] = y_mean + xt.row(t).iter().zip(&fit.beta).map(|(a, b)| a * b).sum::<f64>();
        }
    }
    Ok((test, preds))
}

/// Index of the λ with the lowest CV error among those whose full-data fit
/// keeps at most `feature_cap` nonzero coefficients. Ties go to the larger λ.
pub fn select_lambda(cv: &CvResult, feature_cap: usize, active_sizes: &[usize]) -> Result<usize> {
    let mut best: Option<usize> = None;
    for (l, (&mse, &active)) in cv.mean_cv_mse.iter().zip(active_sizes).enumerate() {
        if active > feature_cap {
            continue;
        }
        if best.is_none_or(|b| mse < cv.mean_cv_mse[b]) {
            best = Some(l);
        }
    }
    best.ok_or(ModelError::NoFeasibleLambda(feature_cap))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::testutil::random_problem;
    use crate::model::Folds;

    #[test]
    fn ten_rows_five_folds() {
        let f = fold_assignment(10, 5, 3).unwrap();
        for k in 0..5 {
            assert_eq!(f.iter().filter(|&&v| v == k).count(), 2);
        }
        assert_eq!(f, fold_assignment(10, 5, 3).unwrap());
        assert!(matches!(fold_assignment(9, 5, 3), Err(ModelError::SmallFold { .. })));
        assert!(matches!(fold_assignment(4, 5, 3), Err(ModelError::TooFewRows { .. })));
    }

    #[test]
    fn oof_covers_every_row_once_and_is_deterministic() {
        let (x, y) = random_problem(40, 5, 11);
        let cfg = ElasticNetConfig {
            path_length: 15,
            folds: Folds::Fixed(4),
            seed: 9,
            ..Default::default()
        };
        let a = kfold_cv(x.view(), &y, &cfg).unwrap();
        let b = kfold_cv(x.view(), &y, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.oof.dim(), (40, 15));
        assert_eq!(a.folds, 4);
        assert!(a.mean_cv_mse[14] < a.mean_cv_mse[0]);

        // a λ large enough to zero every fold predicts each row with its
        // training-fold mean
        let c = cv_on_path(x.view(), &y, &[1e6, 1e-2], &cfg).unwrap();
        assert_eq!(c.fold_of, a.fold_of);
        for i in 0..40 {
            let train: Vec<f64> = (0..40)
                .filter(|&r| c.fold_of[r] != c.fold_of[i])
                .map(|r| y[r])
                .collect();
            let mean = train.iter().sum::<f64>() / train.len() as f64;
            assert!((c.oof[[i, 0]] - mean).abs() < 1e-9);
        }
    }

    #[test]
    fn auto_folds_for_small_samples() {
        let (x, y) = random_problem(150, 3, 2);
        let cfg = ElasticNetConfig {
            path_length: 5,
            ..Default::default()
        };
        assert_eq!(kfold_cv(x.view(), &y, &cfg).unwrap().folds, 3);
    }

    fn cv_with(mse: Vec<f64>) -> CvResult {
        CvResult {
            lambdas: (0..mse.len()).map(|i| 1.0 / (i + 1) as f64).collect(),
            folds: 2,
            fold_of: vec![],
            oof: Array2::zeros((0, mse.len())),
            mean_cv_mse: mse,
        }
    }

    #[test]
    fn selection_rules() {
        let cv = cv_with(vec![5.0, 3.0, 2.0, 2.0, 4.0]);
        let active = [0, 1, 2, 3, 4];
        assert_eq!(select_lambda(&cv, 10, &active).unwrap(), 2);
        assert_eq!(select_lambda(&cv, 1, &active).unwrap(), 1);
        assert_eq!(select_lambda(&cv, 0, &active).unwrap(), 0);
        assert!(matches!(
            select_lambda(&cv, 0, &[1, 1, 2, 3, 4]),
            Err(ModelError::NoFeasibleLambda(0))
        ));
    }
}
