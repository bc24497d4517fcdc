use std::path::Path;

use tractscope_core::acquisition::{write_poi_ndjson, TileCache};
use tractscope_core::eval::{emit_outputs, write_report_csv, EvalConfig, EvalMode, EvalReport};
use tractscope_core::features::{DesignMatrix, PoiMode};

use super::features::{extract_into, network_for};
use super::model::{design, evaluate_into};
use super::poi::{aggregate_into, fetch_records, RECORDS_FILE};
use super::tiles::{fill_cache, plan_all};
use super::{featurizer_label, load_tracts, Ctx, Tracts};
use crate::args::PipelineArgs;
use crate::error::{CliResult, StageExt};

const STAGE: &str = "pipeline";
const MODES: [EvalMode; 2] = [EvalMode::Cv, EvalMode::Holdout];

/// Both evaluation modes over one design, each in its own directory with
/// emitted figure data.
fn evaluate_modes(
    ctx: &Ctx,
    a: &PipelineArgs,
    tracts: &Tracts,
    d: &DesignMatrix,
    featurizer: &str,
    base: &Path,
    inputs: &[(&str, &Path)],
) -> CliResult<Vec<EvalReport>> {
    let mut reports = Vec::new();
    for mode in MODES {
        let cfg = EvalConfig {
            model: a.model.config(),
            mode,
            split: a.split,
            target: a.target,
            featurizer: featurizer.to_string(),
            per_region: !a.no_per_region,
        };
        let out = ctx.out_dir("model", &base.join(mode.to_string()))?;
        let run = evaluate_into("model", d, &cfg, &out)?;
        emit_outputs(&run, &tracts.collection, &a.tracts.property_map(), &out).runtime("report")?;
        let mut stamp = ctx.stamp(a).seed(cfg.model.seed).extractor(featurizer);
        for (role, p) in inputs {
            stamp = stamp.input(role, p);
        }
        stamp.write("report", &out)?;
        reports.extend(run.reports);
    }
    Ok(reports)
}

pub fn run(ctx: &Ctx, a: &PipelineArgs) -> CliResult<()> {
    let t = load_tracts(ctx, "tracts", &a.tracts)?;
    let network = network_for(ctx, a.extractor, a.weights.as_ref(), a.layer.as_deref())?;
    let out = ctx.out_dir(STAGE, &a.out)?;

    let (specs, _) = plan_all("tiles", &t.records, &a.tiles)?;
    let cache = ctx.out_dir("tiles", &a.cache)?;
    fill_cache("tiles", &specs, &a.endpoint, &TileCache::new(&cache))?;

    let feat_dir = ctx.out_dir("features", &out.join("features"))?;
    let ex = extract_into("features", &t.records, &cache, &a.tiles, network.as_ref(), &feat_dir)?;
    let mut stamp = ctx
        .stamp(a)
        .extractor(ex.store.extractor_id.clone())
        .input("tracts", &t.path)
        .input("tile_cache", &cache);
    if let Some(w) = &a.weights {
        stamp = stamp.input("weights", &ctx.resolve(w));
    }
    stamp.write("features", &feat_dir)?;

    let store_path = feat_dir.join(super::features::STORE_FILE);
    let d = design("model", &ex.store.to_table(), &t.records, a.target)?;
    let featurizer = featurizer_label(&ex.store.extractor_id);
    let inputs = [("tracts", t.path.as_path()), ("features", store_path.as_path())];
    let mut reports = evaluate_modes(ctx, a, &t, &d, &featurizer, &out, &inputs)?;

    if a.poi_fixture.is_some() || a.poi_remote {
        let poi_dir = ctx.out_dir("poi", &out.join("poi"))?;
        let records = fetch_records(ctx, "poi", &t.records, &a.endpoint, a.poi_fixture.as_ref(), a.radius)?;
        write_poi_ndjson(&poi_dir.join(RECORDS_FILE), &records).runtime("poi")?;
        let m = aggregate_into("poi", &records, &t.records, &[], a.poi_mode, &poi_dir)?;
        let mut stamp = ctx.stamp(a).input("tracts", &t.path);
        if let Some(f) = &a.poi_fixture {
            stamp = stamp.input("poi_fixture", &ctx.resolve(f));
        }
        stamp.write("poi", &poi_dir)?;

        let table_path = poi_dir.join(super::poi::TABLE_FILE);
        let d = design("model", &m.table, &t.records, a.target)?;
        let label = match a.poi_mode {
            PoiMode::Counts => "poi",
            PoiMode::PerKm2 => "poi-per-km2",
        };
        let inputs = [("tracts", t.path.as_path()), ("features", table_path.as_path())];
        reports.extend(evaluate_modes(ctx, a, &t, &d, label, &poi_dir, &inputs)?);
    }

    write_report_csv(&reports, &out.join("report.csv")).runtime(STAGE)?;
    log::info!(target: STAGE, "{} reports written to {}", reports.len(), out.display());
    ctx.stamp(a)
        .seed(a.model.seed)
        .extractor(ex.store.extractor_id.clone())
        .input("tracts", &t.path)
        .write(STAGE, &out)
}
