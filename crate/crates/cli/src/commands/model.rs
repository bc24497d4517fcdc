use std::path::Path;

use tractscope_core::eval::{evaluate_run, write_report_csv, EvalConfig, EvalRun};
use tractscope_core::features::{build_design_matrix, DesignMatrix, FeatureTable, Target};
use tractscope_core::geo::TractRecord;
use tractscope_core::model::{fit_elastic_net, ElasticNetConfig};

use super::{featurizer_label, load_features, load_tracts, write_json, Ctx};
use crate::args::{EvaluateArgs, ModelFitArgs};
use crate::error::{CliError, CliResult, StageExt};

const STAGE: &str = "model";
pub const EVALUATION_FILE: &str = "evaluation.json";
pub const FIT_FILE: &str = "fit.json";
pub const REPORT_FILE: &str = "report.csv";

pub fn design(stage: &str, table: &FeatureTable, tracts: &[TractRecord], target: Target) -> CliResult<DesignMatrix> {
    let d = build_design_matrix(table, tracts, target).input(stage)?;
    if !d.excluded.is_empty() {
        log::info!(target: stage, "{} tracts excluded (no features or no {target})", d.excluded.len());
    }
    log::info!(target: stage, "design matrix {} x {}", d.n(), d.p());
    Ok(d)
}

fn check_config(stage: &str, cfg: &ElasticNetConfig) -> CliResult<()> {
    cfg.validate().input(stage)
}

/// Evaluates and writes `evaluation.json`, `fit.json` and `report.csv`.
pub fn evaluate_into(stage: &str, d: &DesignMatrix, cfg: &EvalConfig, out: &Path) -> CliResult<EvalRun> {
    check_config(stage, &cfg.model)?;
    if !(cfg.split > 0.0 && cfg.split < 1.0) {
        return Err(CliError::input(stage, anyhow::anyhow!("--split must lie in (0, 1)")));
    }
    let run = evaluate_run(d, cfg).runtime(stage)?;
    for r in &run.reports {
        log::info!(
            target: stage,
            "{} {} n={} r2={:.4} rmse={:.4} pearson={} lambda={:.4e} active={}",
            r.mode,
            r.scope,
            r.n,
            r.r2,
            r.rmse,
            r.pearson.map_or("n/a".into(), |p| format!("{p:.4}")),
            r.lambda,
            r.active_set_size
        );
    }
    write_json(stage, &out.join(EVALUATION_FILE), &run)?;
    std::fs::write(out.join(FIT_FILE), run.fit.to_json() + "\n").runtime(stage)?;
    write_report_csv(&run.reports, &out.join(REPORT_FILE)).runtime(stage)?;
    Ok(run)
}

pub fn fit(ctx: &Ctx, a: &ModelFitArgs) -> CliResult<()> {
    let t = load_tracts(ctx, STAGE, &a.tracts)?;
    let (table, extractor) = load_features(ctx, STAGE, &a.features)?;
    let d = design(STAGE, &table, &t.records, a.target)?;
    let cfg = a.model.config();
    check_config(STAGE, &cfg)?;
    let run = fit_elastic_net(d.x.view(), &d.y, &d.columns, &cfg).runtime(STAGE)?;
    log::info!(
        target: STAGE,
        "lambda={:.4e} active={} of {} folds={}",
        run.fit.lambda,
        run.fit.active_set_size,
        d.p(),
        run.fit.folds
    );

    let out = ctx.out_dir(STAGE, &a.out)?;
    std::fs::write(out.join(FIT_FILE), run.fit.to_json() + "\n").runtime(STAGE)?;
    let mut w = csv::Writer::from_path(out.join("cv.csv")).runtime(STAGE)?;
    w.write_record(["lambda", "mean_cv_mse", "active_set_size", "selected"])
        .runtime(STAGE)?;
    for (i, (l, m)) in run.cv.lambdas.iter().zip(&run.cv.mean_cv_mse).enumerate() {
        w.write_record([
            l.to_string(),
            m.to_string(),
            run.path_active[i].to_string(),
            (i == run.selected).to_string(),
        ])
        .runtime(STAGE)?;
    }
    w.flush().runtime(STAGE)?;
    ctx.stamp(a)
        .seed(cfg.seed)
        .extractor(extractor)
        .input("tracts", &t.path)
        .input("features", &ctx.resolve(&a.features))
        .write(STAGE, &out)
}

pub fn evaluate(ctx: &Ctx, a: &EvaluateArgs) -> CliResult<()> {
    let t = load_tracts(ctx, STAGE, &a.tracts)?;
    let (table, extractor) = load_features(ctx, STAGE, &a.features)?;
    let d = design(STAGE, &table, &t.records, a.eval.target)?;
    let cfg = EvalConfig {
        model: a.model.config(),
        mode: a.eval.mode,
        split: a.eval.split,
        target: a.eval.target,
        featurizer: a.featurizer.clone().unwrap_or_else(|| featurizer_label(&extractor)),
        per_region: !a.eval.no_per_region,
    };
    let out = ctx.out_dir(STAGE, &a.out)?;
    evaluate_into(STAGE, &d, &cfg, &out)?;
    ctx.stamp(a)
        .seed(cfg.model.seed)
        .extractor(extractor)
        .input("tracts", &t.path)
        .input("features", &ctx.resolve(&a.features))
        .write(STAGE, &out)
}
