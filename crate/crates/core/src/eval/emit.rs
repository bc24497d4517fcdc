use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use super::{EvalError, EvalReport, EvalRun, Result};
use crate::geo::{feature_id, PropertyMap};

pub const REPORT_HEADER: [&str; 12] = [
    "scope",
    "target",
    "featurizer",
    "mode",
    "n",
    "folds",
    "alpha",
    "lambda",
    "r2",
    "rmse",
    "pearson",
    "seed",
];

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `%g`-style formatting with six significant digits.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> EvalError + '_ {
    move |source| EvalError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> EvalError + '_ {
    move |e| EvalError::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e),
    }
}

pub fn write_report_csv(reports: &[EvalReport], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(REPORT_HEADER).map_err(csv_err(path))?;
    for r in reports {
        w.write_record([
            r.scope.clone(),
            r.target.to_string(),
            r.featurizer.clone(),
            r.mode.to_string(),
            r.n.to_string(),
            r.folds.to_string(),
            format_sig(r.alpha),
            format_sig(r.lambda),
            format_sig(r.r2),
            format_sig(r.rmse),
            r.pearson.map_or(String::new(), format_sig),
            r.seed.to_string(),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

fn write_scatter(run: &EvalRun, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(["tract_id", "region", "actual", "predicted"])
        .map_err(csv_err(path))?;
    for p in &run.predictions {
        w.write_record([&p.tract_id, &p.region, &p.actual.to_string(), &p.predicted.to_string()])
            .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

fn number(v: Option<f64>) -> Value {
    v.and_then(serde_json::Number::from_f64)
        .map_or(Value::Null, Value::Number)
}

/// The input collection with `actual`, `predicted` and `residual`
/// (actual − predicted) added to each feature's properties. Tracts that were
/// not modeled, or not scored, get nulls.
pub fn annotate_collection(run: &EvalRun, collection: &Value, props: &PropertyMap) -> Result<Value> {
    let mut out = collection.clone();
    let features = out
        .get_mut("features")
        .and_then(Value::as_array_mut)
        .ok_or(EvalError::NotFeatureCollection)?;
    let observed: std::collections::HashMap<&str, f64> = run.observed.iter().map(|(id, y)| (id.as_str(), *y)).collect();
    let predicted: std::collections::HashMap<&str, f64> = run
        .predictions
        .iter()
        .map(|p| (p.tract_id.as_str(), p.predicted))
        .collect();
    for feature in features {
        let id = feature_id(feature, &props.id);
        let actual = id.as_deref().and_then(|i| observed.get(i).copied());
        let pred = id.as_deref().and_then(|i| predicted.get(i).copied());
        let residual = actual.zip(pred).map(|(a, p)| a - p);
        let Some(obj) = feature.as_object_mut() else {
            return Err(EvalError::NotFeatureCollection);
        };
        let properties = obj.entry("properties").or_insert_with(|| Value::Object(Map::new()));
        if !properties.is_object() {
            *properties = Value::Object(Map::new());
        }
        let p = properties.as_object_mut().unwrap();
        p.insert("actual".into(), number(actual));
        p.insert("predicted".into(), number(pred));
        p.insert("residual".into(), number(residual));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmittedFiles {
    pub scatter: PathBuf,
    pub choropleth: PathBuf,
    pub report_csv: PathBuf,
    pub report_json: PathBuf,
}

/// Writes `scatter.csv`, `choropleth.geojson`, `report.csv` and
/// `reports.json` into `out_dir`.
pub fn emit_outputs(run: &EvalRun, collection: &Value, props: &PropertyMap, out_dir: &Path) -> Result<EmittedFiles> {
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let files = EmittedFiles {
        scatter: out_dir.join("scatter.csv"),
        choropleth: out_dir.join("choropleth.geojson"),
        report_csv: out_dir.join("report.csv"),
        report_json: out_dir.join("reports.json"),
    };
    write_scatter(run, &files.scatter)?;
    let geo = annotate_collection(run, collection, props)?;
    let text = serde_json::to_string_pretty(&geo).expect("JSON value serialises");
    std::fs::write(&files.choropleth, text).map_err(io_err(&files.choropleth))?;
    write_report_csv(&run.reports, &files.report_csv)?;
    let text = serde_json::to_string_pretty(&run.reports).expect("reports serialise");
    std::fs::write(&files.report_json, text).map_err(io_err(&files.report_json))?;
    Ok(files)
}
