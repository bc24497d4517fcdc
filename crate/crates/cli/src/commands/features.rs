use std::path::{Path, PathBuf};

use serde::Serialize;
use tractscope_core::acquisition::TileCache;
use tractscope_core::cnn::{parse_weights, NetworkSpec};
use tractscope_core::features::{extract_store, write_store_binary, write_store_csv, Extraction, Extractor};
use tractscope_core::geo::TractRecord;

use super::{check_tile_args, read_input, write_json, Ctx};
use crate::args::{ExtractArgs, ExtractorKind, TileArgs};
use crate::error::{CliError, CliResult, StageExt};

const STAGE: &str = "features";
pub const STORE_FILE: &str = "features.fvs";
pub const STORE_CSV: &str = "features.csv";

#[derive(Serialize)]
struct Summary<'a> {
    extractor: &'a str,
    dim: usize,
    tracts: usize,
    tiles: usize,
    skipped: &'a [String],
}

pub struct Network {
    pub net: NetworkSpec,
    pub layer: String,
}

pub fn load_network(ctx: &Ctx, stage: &str, weights: &Path, layer: Option<&str>) -> CliResult<Network> {
    let path = ctx.resolve(weights);
    let bytes = read_input(stage, &path)?;
    let net = parse_weights(&bytes).map_err(|e| CliError::input(stage, anyhow::anyhow!("{}: {e}", path.display())))?;
    let layer = match layer {
        Some(l) => l.to_string(),
        None => net
            .layers
            .last()
            .map(|l| l.name.clone())
            .ok_or_else(|| CliError::input(stage, anyhow::anyhow!("{}: network has no layers", path.display())))?,
    };
    net.layer_index(&layer).input(stage)?;
    Ok(Network { net, layer })
}

/// Runs the extractor over cached tiles and writes the store in binary and
/// CSV form into `out`.
pub fn extract_into(
    stage: &str,
    tracts: &[TractRecord],
    cache: &Path,
    tiles: &TileArgs,
    network: Option<&Network>,
    out: &Path,
) -> CliResult<Extraction> {
    check_tile_args(stage, tiles)?;
    let extractor = match network {
        Some(n) => Extractor::Cnn {
            net: &n.net,
            layer: &n.layer,
        },
        None => Extractor::Baseline,
    };
    let ex = extract_store(tracts, &TileCache::new(cache), tiles.zoom, tiles.tile_px, &extractor).map_err(|e| {
        CliError::runtime(
            stage,
            anyhow::anyhow!("{e}; run `tiles fetch` first if tiles are missing"),
        )
    })?;
    for id in &ex.skipped {
        log::warn!(target: stage, "tract {id} has degenerate geometry; no features");
    }
    log::info!(
        target: stage,
        "{} tracts, {} tiles, {} dims ({})",
        ex.store.records.len(),
        ex.tiles,
        ex.store.dim,
        ex.store.extractor_id
    );
    write_store_binary(&ex.store, &out.join(STORE_FILE)).runtime(stage)?;
    write_store_csv(&ex.store, &out.join(STORE_CSV)).runtime(stage)?;
    let summary = Summary {
        extractor: &ex.store.extractor_id,
        dim: ex.store.dim,
        tracts: ex.store.records.len(),
        tiles: ex.tiles,
        skipped: &ex.skipped,
    };
    write_json(stage, &out.join("extraction.json"), &summary)?;
    Ok(ex)
}

pub fn network_for(
    ctx: &Ctx,
    kind: ExtractorKind,
    weights: Option<&PathBuf>,
    layer: Option<&str>,
) -> CliResult<Option<Network>> {
    match (kind, weights) {
        (ExtractorKind::Baseline, _) => Ok(None),
        (ExtractorKind::Cnn, Some(w)) => load_network(ctx, STAGE, w, layer).map(Some),
        (ExtractorKind::Cnn, None) => Err(CliError::input(
            STAGE,
            anyhow::anyhow!("--weights is required for the cnn extractor"),
        )),
    }
}

pub fn extract(ctx: &Ctx, a: &ExtractArgs) -> CliResult<()> {
    let t = super::load_tracts(ctx, STAGE, &a.tracts)?;
    let network = network_for(ctx, a.extractor, a.weights.as_ref(), a.layer.as_deref())?;
    let cache = ctx.resolve(&a.cache);
    let out = ctx.out_dir(STAGE, &a.out)?;
    let ex = extract_into(STAGE, &t.records, &cache, &a.tiles, network.as_ref(), &out)?;
    let mut stamp = ctx
        .stamp(a)
        .extractor(ex.store.extractor_id.clone())
        .input("tracts", &t.path)
        .input("tile_cache", &cache);
    if let Some(w) = &a.weights {
        stamp = stamp.input("weights", &ctx.resolve(w));
    }
    stamp.write(STAGE, &out)
}
