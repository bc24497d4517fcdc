use std::collections::BTreeMap;

use serde::Serialize;
use tractscope_core::geo::polygon_area_km2;

use super::{load_tracts, write_json, Ctx};
use crate::args::ValidateArgs;
use crate::error::CliResult;

const STAGE: &str = "tracts";

#[derive(Serialize)]
struct Validation {
    tracts: usize,
    regions: BTreeMap<String, usize>,
    with_prevalence: usize,
    with_income: usize,
    with_land_area: usize,
    polygons: usize,
    total_area_km2: f64,
    /// Tracts with zero projected area; they get no tiles or POI probes.
    degenerate: Vec<String>,
}

pub fn validate(ctx: &Ctx, a: &ValidateArgs) -> CliResult<()> {
    let t = load_tracts(ctx, STAGE, &a.tracts)?;
    let mut v = Validation {
        tracts: t.records.len(),
        regions: BTreeMap::new(),
        with_prevalence: 0,
        with_income: 0,
        with_land_area: 0,
        polygons: 0,
        total_area_km2: 0.0,
        degenerate: Vec::new(),
    };
    for r in &t.records {
        *v.regions.entry(r.region.clone()).or_default() += 1;
        v.with_prevalence += r.prevalence.is_some() as usize;
        v.with_income += r.income.is_some() as usize;
        v.with_land_area += r.land_area_km2.is_some() as usize;
        v.polygons += r.geometry.polygons.len();
        let area = polygon_area_km2(&r.geometry);
        if area > 0.0 && area.is_finite() {
            v.total_area_km2 += area;
        } else {
            v.degenerate.push(r.id.clone());
        }
    }
    v.degenerate.sort();
    for id in &v.degenerate {
        log::warn!(target: STAGE, "tract {id} has degenerate geometry");
    }
    log::info!(
        target: STAGE,
        "{} tracts in {} regions; {} with prevalence, {} with income",
        v.tracts,
        v.regions.len(),
        v.with_prevalence,
        v.with_income
    );

    let out = ctx.out_dir(STAGE, &a.out)?;
    write_json(STAGE, &out.join("validation.json"), &v)?;
    ctx.stamp(a).input("tracts", &t.path).write(STAGE, &out)
}
