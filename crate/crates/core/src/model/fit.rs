use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::cv::{cv_on_path, select_lambda, CvResult};
use super::solver::{CoordinateDescent, StandardFit};
use super::{lambda_path, standardize, ElasticNetConfig, ModelError, Result, Standardized};
use crate::rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub name: String,
    pub coefficient: f64,
    pub mean: f64,
    pub sd: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvRow {
    pub lambda: f64,
    pub mean_mse: f64,
}

/// A fitted model on the original column scale. Serialises to the JSON fit
/// artifact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElasticNetFit {
    pub intercept: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub seed: u64,
    pub folds: usize,
    pub feature_cap: usize,
    pub active_set_size: usize,
    pub dropped_columns: Vec<String>,
    pub coefficients: Vec<Coefficient>,
    pub cv: Vec<CvRow>,
}

impl ElasticNetFit {
    pub fn coefficient_values(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.coefficient).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fit serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| ModelError::Artifact(e.to_string()))
    }
}

/// Everything a fit produces: the selected model plus the CV table and the
/// full-data path it was chosen from.
#[derive(Clone, Debug)]
pub struct ModelRun {
    pub fit: ElasticNetFit,
    pub cv: CvResult,
    pub selected: usize,
    /// Nonzero count of the full-data fit at each λ.
    pub path_active: Vec<usize>,
}

impl ModelRun {
    pub fn out_of_fold(&self) -> Vec<f64> {
        self.cv.out_of_fold(self.selected)
    }
}

fn destandardize(st: &Standardized, fit: &StandardFit, columns: &[String]) -> (f64, Vec<Coefficient>) {
    let p = st.means.len();
    let mut coef = vec![0.0; p];
    for (c, &j) in st.kept.iter().enumerate() {
        coef[j] = fit.beta[c] / st.sds[j];
    }
    let intercept = fit.intercept - coef.iter().zip(&st.means).map(|(b, m)| b * m).sum::<f64>();
    let coefficients = (0..p)
        .map(|j| Coefficient {
            name: columns[j].clone(),
            coefficient: coef[j],
            mean: st.means[j],
            sd: st.sds[j],
        })
        .collect();
    (intercept, coefficients)
}

/// Standardizes, builds the λ path on all rows, cross-validates it, picks λ
/// under the feature cap, and returns the full-data fit at that λ.
pub fn fit_elastic_net(x: ArrayView2<f64>, y: &[f64], columns: &[String], cfg: &ElasticNetConfig) -> Result<ModelRun> {
    cfg.validate()?;
    let (n, p) = x.dim();
    if columns.len() != p {
        return Err(ModelError::ColumnMismatch {
            expected: p,
            got: columns.len(),
        });
    }
    if y.len() != n {
        return Err(ModelError::TooFewRows { need: n, got: y.len() });
    }
    let st = standardize(x)?;
    let lambdas = lambda_path(st.xs.view(), y, cfg.alpha, cfg.path_length, cfg.path_ratio)?;

    let mut cd = CoordinateDescent::new(st.xs.view(), y);
    let mut path = Vec::with_capacity(lambdas.len());
    for &lambda in &lambdas {
        cd.set_penalty(lambda, cfg.alpha);
        path.push(cd.fit(cfg.tol, cfg.max_sweeps)?);
    }
    let path_active: Vec<usize> = path.iter().map(StandardFit::active_set_size).collect();

    let cv = cv_on_path(x, y, &lambdas, cfg)?;
    let cap = cfg.cap(n);
    let selected = select_lambda(&cv, cap, &path_active)?;
    let chosen = &path[selected];
    let (intercept, coefficients) = destandardize(&st, chosen, columns);

    let fit = ElasticNetFit {
        intercept,
        lambda: chosen.lambda,
        alpha: cfg.alpha,
        seed: cfg.seed,
        folds: cv.folds,
        feature_cap: cap,
        active_set_size: path_active[selected],
        dropped_columns: st.dropped.iter().map(|&j| columns[j].clone()).collect(),
        coefficients,
        cv: lambdas
            .iter()
            .zip(&cv.mean_cv_mse)
            .map(|(&lambda, &mean_mse)| CvRow { lambda, mean_mse })
            .collect(),
    };
    Ok(ModelRun {
        fit,
        cv,
        selected,
        path_active,
    })
}

pub fn predict(fit: &ElasticNetFit, x: ArrayView2<f64>) -> Result<Vec<f64>> {
    if x.ncols() != fit.coefficients.len() {
        return Err(ModelError::ColumnMismatch {
            expected: fit.coefficients.len(),
            got: x.ncols(),
        });
    }
    Ok(x.rows()
        .into_iter()
        .map(|row| {
            fit.intercept
                + row
                    .iter()
                    .zip(&fit.coefficients)
                    .map(|(v, c)| v * c.coefficient)
                    .sum::<f64>()
        })
        .collect())
}

/// Seeded random split of `0..n`; the train side gets `round(fraction·n)`
/// indices. Both sides are ascending.
pub fn split_indices(n: usize, fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if n < 2 {
        return Err(ModelError::TooFewRows { need: 2, got: n });
    }
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(ModelError::InvalidConfig(format!(
            "split fraction {fraction} outside (0, 1)"
        )));
    }
    let n_train = (fraction * n as f64).round() as usize;
    let mut in_train = vec![false; n];
    for &i in &rng::permutation(n, seed)[..n_train] {
        in_train[i] = true;
    }
    Ok((0..n).partition(|&i| in_train[i]))
}

/// [`split_indices`] applied to a list of ids; both sides keep input order.
pub fn train_test_split<T: Clone>(ids: &[T], fraction: f64, seed: u64) -> Result<(Vec<T>, Vec<T>)> {
    let (train, test) = split_indices(ids.len(), fraction, seed)?;
    Ok((
        train.iter().map(|&i| ids[i].clone()).collect(),
        test.iter().map(|&i| ids[i].clone()).collect(),
    ))
}
