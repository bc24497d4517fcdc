use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::Serialize;
use tractscope_core::acquisition::{
    fetch_pois, parse_poi_fixture, write_poi_ndjson, HttpTransport, PoiFixture, PoiRecord, PoiSource,
};
use tractscope_core::features::{poi_feature_matrix, write_table_csv, PoiMatrix, PoiMode, PoiTally};
use tractscope_core::geo::{plan_poi_grid, GeoError, TractRecord};

use super::{endpoint_config, load_tracts, read_input, write_json, Ctx};
use crate::args::{EndpointArgs, PoiAggregateArgs, PoiFetchArgs};
use crate::error::{CliError, CliResult, StageExt};

const STAGE: &str = "poi";
pub const RECORDS_FILE: &str = "poi.ndjson";
pub const TABLE_FILE: &str = "poi_features.csv";

/// Queries every tract's probe grid, from a fixture when one is given.
pub fn fetch_records(
    ctx: &Ctx,
    stage: &str,
    tracts: &[TractRecord],
    endpoint: &EndpointArgs,
    fixture: Option<&PathBuf>,
    radius: f64,
) -> CliResult<Vec<PoiRecord>> {
    let mut probes = Vec::new();
    for t in tracts {
        match plan_poi_grid(t, radius) {
            Ok(p) => probes.extend(p),
            Err(GeoError::DegenerateGeometry(_)) => {
                log::warn!(target: stage, "tract {} has degenerate geometry; no POI probes", t.id)
            }
            Err(e) => return Err(CliError::input(stage, e)),
        }
    }
    let cfg = endpoint_config(endpoint);
    let transport = HttpTransport::default();
    let loaded;
    let source = match fixture {
        Some(p) => {
            let path = ctx.resolve(p);
            loaded = PoiFixture::load(&path).input(stage)?;
            PoiSource::Fixture(&loaded)
        }
        None if cfg.base_url.is_empty() => {
            return Err(CliError::input(
                stage,
                anyhow::anyhow!("need --poi-fixture or --endpoint"),
            ));
        }
        None => PoiSource::Remote(&transport),
    };
    let fetched = fetch_pois(&probes, &cfg, &source).runtime(stage)?;
    if fetched.warnings > 0 {
        log::warn!(target: stage, "{} malformed results skipped", fetched.warnings);
    }
    log::info!(target: stage, "{} probes returned {} records", probes.len(), fetched.records.len());
    Ok(fetched.records)
}

pub fn fetch(ctx: &Ctx, a: &PoiFetchArgs) -> CliResult<()> {
    let t = load_tracts(ctx, STAGE, &a.tracts)?;
    let records = fetch_records(ctx, STAGE, &t.records, &a.endpoint, a.poi_fixture.as_ref(), a.radius)?;
    let out = ctx.out_dir(STAGE, &a.out)?;
    write_poi_ndjson(&out.join(RECORDS_FILE), &records).runtime(STAGE)?;
    let mut stamp = ctx.stamp(a).input("tracts", &t.path);
    if let Some(f) = &a.poi_fixture {
        stamp = stamp.input("poi_fixture", &ctx.resolve(f));
    }
    stamp.write(STAGE, &out)
}

#[derive(Serialize)]
struct TallyFile<'a> {
    mode: PoiMode,
    categories: &'a [String],
    #[serde(flatten)]
    tally: &'a PoiTally,
}

/// Builds the per-tract POI table and writes it with its tallies.
pub fn aggregate_into(
    stage: &str,
    records: &[PoiRecord],
    tracts: &[TractRecord],
    categories: &[String],
    mode: PoiMode,
    out: &Path,
) -> CliResult<PoiMatrix> {
    let categories: Vec<String> = if categories.is_empty() {
        records
            .iter()
            .map(|r| r.category.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    } else {
        categories.to_vec()
    };
    let m = poi_feature_matrix(records, tracts, &categories, mode).input(stage)?;
    let t = &m.tally;
    log::info!(
        target: stage,
        "{} records: {} counted, {} duplicates, {} outside every tract",
        t.input,
        t.counted,
        t.duplicates,
        t.outside
    );
    for (c, n) in &t.unknown_categories {
        log::warn!(target: stage, "{n} records in category {c:?} outside the vocabulary");
    }
    write_table_csv(&m.table, &out.join(TABLE_FILE)).runtime(stage)?;
    let tally = TallyFile {
        mode,
        categories: &categories,
        tally: &m.tally,
    };
    write_json(stage, &out.join("tally.json"), &tally)?;
    Ok(m)
}

pub fn aggregate(ctx: &Ctx, a: &PoiAggregateArgs) -> CliResult<()> {
    let t = load_tracts(ctx, STAGE, &a.tracts)?;
    let poi_path = ctx.resolve(&a.poi);
    let text = String::from_utf8(read_input(STAGE, &poi_path)?).input(STAGE)?;
    let records = parse_poi_fixture(&text).input(STAGE)?;
    let out = ctx.out_dir(STAGE, &a.out)?;
    aggregate_into(STAGE, &records, &t.records, &a.categories, a.mode, &out)?;
    ctx.stamp(a)
        .input("tracts", &t.path)
        .input("poi", &poi_path)
        .write(STAGE, &out)
}
