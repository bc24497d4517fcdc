//! Metrics, pooled and per-region evaluation runs, and the scatter /
//! choropleth / report files derived from them.

mod emit;
mod metrics;

pub use emit::{annotate_collection, emit_outputs, format_sig, write_report_csv, EmittedFiles, REPORT_HEADER};
pub use metrics::{pearson, r_squared, rmse};

use std::collections::HashSet;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{DesignMatrix, Target};
use crate::model::{fit_elastic_net, predict, split_indices, ElasticNetConfig, ElasticNetFit, ModelError};
use crate::par;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{0}")]
    Metric(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("region {region:?}: {source}")]
    Region {
        region: String,
        #[source]
        source: Box<EvalError>,
    },
    #[error("holdout split leaves {0} test rows; need at least 2")]
    SmallTestSet(usize),
    #[error("choropleth input is not a GeoJSON FeatureCollection")]
    NotFeatureCollection,
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, EvalError>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalMode {
    /// Metrics on out-of-fold predictions at the selected λ.
    #[default]
    Cv,
    /// Fit on a random training share, score the rest.
    Holdout,
}

impl fmt::Display for EvalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EvalMode::Cv => "cv",
            EvalMode::Holdout => "holdout",
        })
    }
}

impl FromStr for EvalMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "cv" => Ok(EvalMode::Cv),
            "holdout" => Ok(EvalMode::Holdout),
            _ => Err(format!("unknown evaluation mode {s:?} (expected cv or holdout)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub model: ElasticNetConfig,
    pub mode: EvalMode,
    /// Training share in holdout mode.
    pub split: f64,
    pub target: Target,
    /// Label of the feature source (`cnn`, `baseline`, `poi`).
    pub featurizer: String,
    pub per_region: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            model: ElasticNetConfig::default(),
            mode: EvalMode::Cv,
            split: 0.6,
            target: Target::Prevalence,
            featurizer: "baseline".into(),
            per_region: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// `pooled` or `region:<label>`.
    pub scope: String,
    pub target: Target,
    pub featurizer: String,
    pub mode: EvalMode,
    pub n: usize,
    pub folds: usize,
    pub alpha: f64,
    pub lambda: f64,
    pub active_set_size: usize,
    pub r2: f64,
    pub rmse: f64,
    /// None when the predictions are constant (a null model was selected).
    pub pearson: Option<f64>,
    pub seed: u64,
    pub excluded: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub tract_id: String,
    pub region: String,
    pub actual: f64,
    pub predicted: f64,
}

/// Reports (pooled first, then regions alphabetically), the pooled
/// predictions that were scored, and the pooled model.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EvalRun {
    pub reports: Vec<EvalReport>,
    pub predictions: Vec<Prediction>,
    pub fit: ElasticNetFit,
    /// Every modeled tract and its observed outcome.
    pub observed: Vec<(String, f64)>,
}

pub const POOLED: &str = "pooled";

struct Scored {
    report: EvalReport,
    predictions: Vec<Prediction>,
    fit: ElasticNetFit,
}

fn score(design: &DesignMatrix, cfg: &EvalConfig, scope: String) -> Result<Scored> {
    let (fit, rows, predicted, folds) = match cfg.mode {
        EvalMode::Cv => {
            let run = fit_elastic_net(design.x.view(), &design.y, &design.columns, &cfg.model)?;
            let oof = run.out_of_fold();
            let folds = run.cv.folds;
            (run.fit, (0..design.n()).collect::<Vec<_>>(), oof, folds)
        }
        EvalMode::Holdout => {
            let (train, test) = split_indices(design.n(), cfg.split, cfg.model.seed)?;
            let train_ids: HashSet<&str> = train.iter().map(|&i| design.ids[i].as_str()).collect();
            assert!(
                test.iter().all(|&i| !train_ids.contains(design.ids[i].as_str())),
                "holdout rows overlap the training rows"
            );
            if test.len() < 2 {
                return Err(EvalError::SmallTestSet(test.len()));
            }
            let tr = design.select_rows(&train);
            let te = design.select_rows(&test);
            let run = fit_elastic_net(tr.x.view(), &tr.y, &tr.columns, &cfg.model)?;
            let pred = predict(&run.fit, te.x.view())?;
            let folds = run.cv.folds;
            (run.fit, test, pred, folds)
        }
    };
    let actual: Vec<f64> = rows.iter().map(|&i| design.y[i]).collect();
    let report = EvalReport {
        scope,
        target: cfg.target,
        featurizer: cfg.featurizer.clone(),
        mode: cfg.mode,
        n: rows.len(),
        folds,
        alpha: fit.alpha,
        lambda: fit.lambda,
        active_set_size: fit.active_set_size,
        r2: r_squared(&actual, &predicted)?,
        rmse: rmse(&actual, &predicted)?,
        pearson: correlation(&actual, &predicted)?,
        seed: cfg.model.seed,
        excluded: design.excluded.clone(),
    };
    let predictions = rows
        .iter()
        .zip(&predicted)
        .map(|(&i, &p)| Prediction {
            tract_id: design.ids[i].clone(),
            region: design.regions[i].clone(),
            actual: design.y[i],
            predicted: p,
        })
        .collect();
    Ok(Scored {
        report,
        predictions,
        fit,
    })
}

/// Runs the pooled evaluation and, when `cfg.per_region` is set, the same
/// procedure on each region's rows alone (fold count re-derived per region).
pub fn evaluate_run(design: &DesignMatrix, cfg: &EvalConfig) -> Result<EvalRun> {
    let pooled = score(design, cfg, POOLED.to_string())?;
    let mut reports = vec![pooled.report];
    if cfg.per_region {
        let names = design.region_names();
        let regional = par::try_map(&names, |name| {
            score(&design.region(name), cfg, format!("region:{name}"))
                .map(|s| s.report)
                .map_err(|e| EvalError::Region {
                    region: name.clone(),
                    source: Box::new(e),
                })
        })?;
        reports.extend(regional);
    }
    Ok(EvalRun {
        reports,
        predictions: pooled.predictions,
        fit: pooled.fit,
        observed: design.ids.iter().cloned().zip(design.y.iter().copied()).collect(),
    })
}

/// Pearson correlation, or None when the predictions carry no variation.
fn correlation(actual: &[f64], predicted: &[f64]) -> Result<Option<f64>> {
    if predicted.iter().all(|p| *p == predicted[0]) {
        return Ok(None);
    }
    Ok(Some(pearson(actual, predicted)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::{parse_tract_collection, PropertyMap};
    use crate::model::Folds;
    use serde_json::{json, Value};

    fn design(sizes: &[(&str, usize)], seed: u64) -> DesignMatrix {
        let n: usize = sizes.iter().map(|s| s.1).sum();
        let (x, y) = crate::model::testutil::random_problem(n, 4, seed);
        let regions: Vec<String> = sizes
            .iter()
            .flat_map(|(r, k)| std::iter::repeat_n(r.to_string(), *k))
            .collect();
        DesignMatrix {
            ids: (0..n).map(|i| format!("t{i:04}")).collect(),
            columns: (0..4).map(|j| format!("f{j}")).collect(),
            x,
            y,
            regions,
            excluded: vec!["t9999".into()],
            excluded_regions: vec!["b".into()],
        }
    }

    #[test]
    fn constant_predictions_have_no_correlation() {
        assert_eq!(correlation(&[1.0, 2.0, 4.0], &[2.0, 2.0, 2.0]).unwrap(), None);
        assert!((correlation(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap().unwrap() - 1.0).abs() < 1e-12);
        assert!(correlation(&[1.0, 1.0], &[1.0, 2.0]).is_err());
    }

    fn cfg(mode: EvalMode) -> EvalConfig {
        EvalConfig {
            model: ElasticNetConfig {
                path_length: 20,
                seed: 7,
                ..Default::default()
            },
            mode,
            ..Default::default()
        }
    }

    #[test]
    fn pooled_plus_one_report_per_region() {
        let d = design(&[("b", 30), ("a", 40), ("c", 150)], 1);
        let run = evaluate_run(&d, &cfg(EvalMode::Cv)).unwrap();
        let scopes: Vec<&str> = run.reports.iter().map(|r| r.scope.as_str()).collect();
        assert_eq!(scopes, ["pooled", "region:a", "region:b", "region:c"]);
        assert_eq!(run.reports[0].n, 220);
        assert_eq!(run.reports[0].folds, 5);
        assert_eq!(run.reports[3].n, 150);
        assert_eq!(run.reports[3].folds, 3);
        assert_eq!(run.reports[2].excluded, ["t9999"]);
        assert!(run.reports[1].excluded.is_empty());
        assert_eq!(run.predictions.len(), 220);
        for r in &run.reports {
            assert!(r.r2 <= 1.0 && r.rmse >= 0.0 && r.pearson.is_some_and(|p| (-1.0..=1.0).contains(&p)));
            assert!(r.r2 > 0.5, "{} r2 {}", r.scope, r.r2);
        }
    }

    #[test]
    fn holdout_scores_only_test_rows() {
        let d = design(&[("a", 50), ("b", 50)], 2);
        let run = evaluate_run(&d, &cfg(EvalMode::Holdout)).unwrap();
        assert_eq!(run.reports[0].n, 40);
        assert_eq!(run.predictions.len(), 40);
        let (train, _) = split_indices(100, 0.6, 7).unwrap();
        let train: HashSet<&str> = train.iter().map(|&i| d.ids[i].as_str()).collect();
        assert!(run.predictions.iter().all(|p| !train.contains(p.tract_id.as_str())));
        assert_eq!(run.reports[1].n, 20);
    }

    #[test]
    fn deterministic() {
        let d = design(&[("a", 60)], 3);
        let a = evaluate_run(&d, &cfg(EvalMode::Cv)).unwrap();
        let b = crate::par::with_threads(1, || evaluate_run(&d, &cfg(EvalMode::Cv)).unwrap());
        assert_eq!(a.reports, b.reports);
        assert_eq!(a.predictions, b.predictions);
    }

    #[test]
    fn small_region_is_an_error() {
        let d = design(&[("a", 60), ("tiny", 4)], 4);
        let mut c = cfg(EvalMode::Cv);
        c.model.folds = Folds::Fixed(3);
        let err = evaluate_run(&d, &c).unwrap_err();
        assert!(
            matches!(err, EvalError::Region { ref region, .. } if region == "tiny"),
            "{err}"
        );
        c.per_region = false;
        assert_eq!(evaluate_run(&d, &c).unwrap().reports.len(), 1);
    }

    fn square(id: &str, lon0: f64, prevalence: Value) -> Value {
        json!({
            "type": "Feature",
            "properties": {"GEOID": id, "region": "a", "prevalence": prevalence},
            "geometry": {"type": "Polygon", "coordinates": [[[lon0, 35.0], [lon0 + 0.01, 35.0], [lon0 + 0.01, 35.01], [lon0, 35.01], [lon0, 35.0]]]}
        })
    }

    #[test]
    fn outputs_on_disk() {
        let d = design(&[("a", 40)], 5);
        let run = evaluate_run(&d, &cfg(EvalMode::Cv)).unwrap();
        let collection = json!({
            "type": "FeatureCollection",
            "features": [square("t0000", -90.0, json!(20.0)), square("t9999", -89.9, Value::Null)]
        });
        let dir = tempfile::tempdir().unwrap();
        let files = emit_outputs(&run, &collection, &PropertyMap::default(), dir.path()).unwrap();

        let scatter = std::fs::read_to_string(&files.scatter).unwrap();
        assert!(scatter.starts_with("tract_id,region,actual,predicted\n"));
        assert_eq!(scatter.lines().count(), 41);

        let report = std::fs::read_to_string(&files.report_csv).unwrap();
        assert!(report.starts_with("scope,target,featurizer,mode,n,folds,alpha,lambda,r2,rmse,pearson,seed\n"));
        assert_eq!(report.lines().count(), 3);
        assert!(report
            .lines()
            .nth(1)
            .unwrap()
            .starts_with("pooled,prevalence,baseline,cv,40,3,0.5,"));

        let text = std::fs::read_to_string(&files.choropleth).unwrap();
        let geo: Value = serde_json::from_str(&text).unwrap();
        let p0 = &geo["features"][0]["properties"];
        assert_eq!(p0["actual"].as_f64(), Some(d.y[0]));
        let residual = p0["actual"].as_f64().unwrap() - p0["predicted"].as_f64().unwrap();
        assert!((p0["residual"].as_f64().unwrap() - residual).abs() < 1e-12);
        let p1 = &geo["features"][1]["properties"];
        assert!(p1["actual"].is_null() && p1["predicted"].is_null() && p1["residual"].is_null());
        assert_eq!(geo["features"][1]["geometry"], collection["features"][1]["geometry"]);

        let tracts = parse_tract_collection(&text, &PropertyMap::default()).unwrap();
        let orig = parse_tract_collection(&collection.to_string(), &PropertyMap::default()).unwrap();
        assert_eq!(tracts, orig);

        let reports: Vec<EvalReport> =
            serde_json::from_str(&std::fs::read_to_string(&files.report_json).unwrap()).unwrap();
        assert_eq!(reports, run.reports);
    }
}
