//! Elastic net by cyclic coordinate descent.
//!
//! Columns are standardized internally (population sd) and coefficients are
//! reported on the original scale. The penalized objective is
//! `(1/2n)‖y − β₀ − Xβ‖² + λ(α‖β‖₁ + ((1−α)/2)‖β‖₂²)`.

mod cv;
mod fit;
mod path;
mod solver;
mod standardize;

pub use cv::{fold_assignment, kfold_cv, select_lambda, CvResult};
pub use fit::{fit_elastic_net, predict, split_indices, train_test_split, Coefficient, CvRow, ElasticNetFit, ModelRun};
pub use path::lambda_path;
pub use solver::{check_kkt, fit_at_lambda, soft_threshold, CoordinateDescent, StandardFit};
pub use standardize::{standardize, Standardized, MIN_SD};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("need at least {need} rows, got {got}")]
    TooFewRows { need: usize, got: usize },
    #[error("every column has zero variance")]
    AllColumnsConstant,
    #[error("zero-variance response")]
    ConstantResponse,
    #[error("no column is correlated with the response")]
    NoSignal,
    #[error("no convergence at lambda {lambda} after {sweeps} sweeps")]
    NotConverged { lambda: f64, sweeps: usize },
    #[error("expected {expected} columns, got {got}")]
    ColumnMismatch { expected: usize, got: usize },
    #[error("fold {fold} has {rows} rows; each fold needs at least 2")]
    SmallFold { fold: usize, rows: usize },
    #[error("no lambda on the path keeps at most {0} features")]
    NoFeasibleLambda(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("bad fit artifact: {0}")]
    Artifact(String),
}

pub type Result<T> = std::result::Result<T, ModelError>;

/// Number of cross-validation folds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Folds {
    /// 5, or 3 when there are fewer than 200 rows.
    #[default]
    Auto,
    Fixed(usize),
}

pub const SMALL_SAMPLE_ROWS: usize = 200;

impl Folds {
    pub fn resolve(self, n: usize) -> usize {
        match self {
            Folds::Auto if n < SMALL_SAMPLE_ROWS => 3,
            Folds::Auto => 5,
            Folds::Fixed(k) => k,
        }
    }
}

impl fmt::Display for Folds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Folds::Auto => f.write_str("auto"),
            Folds::Fixed(k) => write!(f, "{k}"),
        }
    }
}

impl FromStr for Folds {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "auto" {
            return Ok(Folds::Auto);
        }
        s.parse()
            .map(Folds::Fixed)
            .map_err(|_| format!("folds must be `auto` or an integer, got {s:?}"))
    }
}

impl Serialize for Folds {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Folds {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElasticNetConfig {
    /// Mixing weight: 1 is pure lasso, 0 pure ridge.
    pub alpha: f64,
    pub path_length: usize,
    /// Smallest λ on the path as a fraction of λ_max.
    pub path_ratio: f64,
    pub tol: f64,
    pub max_sweeps: usize,
    pub folds: Folds,
    /// Maximum number of nonzero coefficients; `None` means the row count.
    pub feature_cap: Option<usize>,
    pub seed: u64,
}

impl Default for ElasticNetConfig {
    fn default() -> Self {
        ElasticNetConfig {
            alpha: 0.5,
            path_length: 100,
            path_ratio: 1e-3,
            tol: 1e-7,
            max_sweeps: 100_000,
            folds: Folds::Auto,
            feature_cap: None,
            seed: 0,
        }
    }
}

impl ElasticNetConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(ModelError::InvalidConfig(m.to_string()));
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad("alpha must lie in [0, 1]");
        }
        if self.path_length == 0 {
            return bad("path_length must be at least 1");
        }
        if self.path_length > 1 && !(self.path_ratio > 0.0 && self.path_ratio < 1.0) {
            return bad("path_ratio must lie in (0, 1)");
        }
        if !(self.tol > 0.0) {
            return bad("tol must be positive");
        }
        if self.max_sweeps == 0 {
            return bad("max_sweeps must be at least 1");
        }
        if matches!(self.folds, Folds::Fixed(k) if k < 2) {
            return bad("folds must be at least 2");
        }
        if self.feature_cap == Some(0) {
            return bad("feature_cap must be at least 1");
        }
        Ok(())
    }

    pub fn cap(&self, n: usize) -> usize {
        self.feature_cap.unwrap_or(n)
    }
}
