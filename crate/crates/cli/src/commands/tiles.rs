use tractscope_core::acquisition::{ensure_cached, HttpTransport, TileCache};
use tractscope_core::geo::{plan_tiles, tile_plan_csv, GeoError, TileSpec, TractRecord};

use super::{check_tile_args, endpoint_config, load_tracts, Ctx};
use crate::args::{TileArgs, TileFetchArgs, TilePlanArgs};
use crate::error::{CliError, CliResult, StageExt};

const STAGE: &str = "tiles";

/// Tiles for every tract in input order. Degenerate tracts are skipped with
/// a warning and returned separately.
pub fn plan_all(stage: &str, tracts: &[TractRecord], t: &TileArgs) -> CliResult<(Vec<TileSpec>, Vec<String>)> {
    check_tile_args(stage, t)?;
    let mut specs = Vec::new();
    let mut skipped = Vec::new();
    for r in tracts {
        match plan_tiles(r, t.zoom, t.tile_px, t.tile_px) {
            Ok(s) => specs.extend(s),
            Err(GeoError::DegenerateGeometry(_)) => {
                log::warn!(target: stage, "tract {} has degenerate geometry; no tiles", r.id);
                skipped.push(r.id.clone());
            }
            Err(e) => return Err(CliError::input(stage, anyhow::anyhow!("tract {}: {e}", r.id))),
        }
    }
    Ok((specs, skipped))
}

pub fn plan(ctx: &Ctx, a: &TilePlanArgs) -> CliResult<()> {
    let t = load_tracts(ctx, STAGE, &a.tracts)?;
    let (specs, _) = plan_all(STAGE, &t.records, &a.tiles)?;
    log::info!(target: STAGE, "{} tiles planned", specs.len());
    let out = ctx.out_dir(STAGE, &a.out)?;
    let path = out.join("tile_plan.csv");
    std::fs::write(&path, tile_plan_csv(&specs)).runtime(STAGE)?;
    ctx.stamp(a).input("tracts", &t.path).write(STAGE, &out)
}

/// Makes sure the cache holds every planned tile.
pub fn fill_cache(stage: &str, specs: &[TileSpec], a: &crate::args::EndpointArgs, cache: &TileCache) -> CliResult<()> {
    let cfg = endpoint_config(a);
    if !cfg.offline && cfg.base_url.is_empty() {
        let missing = specs.iter().filter(|s| !cache.contains(&TileCache::key(s))).count();
        if missing > 0 {
            return Err(CliError::input(
                stage,
                anyhow::anyhow!("{missing} tiles are not cached and no --endpoint was given"),
            ));
        }
    }
    let summary = ensure_cached(specs, &cfg, cache, &HttpTransport::default()).runtime(stage)?;
    log::info!(
        target: stage,
        "{} tiles planned, {} unique, {} cached, {} downloaded",
        summary.planned,
        summary.unique,
        summary.cached,
        summary.downloaded
    );
    Ok(())
}

pub fn fetch(ctx: &Ctx, a: &TileFetchArgs) -> CliResult<()> {
    let t = load_tracts(ctx, STAGE, &a.tracts)?;
    let (specs, _) = plan_all(STAGE, &t.records, &a.tiles)?;
    let dir = ctx.out_dir(STAGE, &a.cache)?;
    fill_cache(STAGE, &specs, &a.endpoint, &TileCache::new(&dir))?;
    ctx.stamp(a).input("tracts", &t.path).write(STAGE, &dir)
}
