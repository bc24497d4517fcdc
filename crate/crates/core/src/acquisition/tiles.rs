use std::collections::HashSet;

use crate::geo::TileSpec;
use crate::par;

use super::cache::{CacheEntry, TileCache};
use super::raster::{decode_image, RasterImage};
use super::transport::{get_with_retry, Transport};
use super::{AcquisitionError, EndpointConfig, Result};

pub fn tile_request_url(spec: &TileSpec, cfg: &EndpointConfig) -> String {
    let mut url = format!(
        "{}?center={:.6},{:.6}&zoom={}&size={}x{}&maptype=satellite",
        cfg.base_url, spec.center.lat, spec.center.lon, spec.zoom, spec.width_px, spec.height_px
    );
    if let Some(key) = &cfg.api_key {
        url.push_str("&key=");
        url.push_str(key);
    }
    url
}

fn wrap(spec: &TileSpec, key: &str) -> impl FnOnce(AcquisitionError) -> AcquisitionError {
    let (key, tract_id) = (key.to_string(), spec.tract_id.clone());
    move |e| match e {
        e @ AcquisitionError::CacheMiss { .. } => e,
        e => AcquisitionError::Tile {
            key,
            tract_id,
            source: Box::new(e),
        },
    }
}

/// Returns the raw bytes for `spec`, from cache when present, otherwise
/// downloaded and cached. The flag reports whether a download happened.
fn load_bytes(
    spec: &TileSpec,
    cfg: &EndpointConfig,
    cache: &TileCache,
    transport: &dyn Transport,
) -> Result<(Vec<u8>, bool)> {
    let key = TileCache::key(spec);
    if let Some(bytes) = cache.read(&key).map_err(wrap(spec, &key))? {
        return Ok((bytes, false));
    }
    if cfg.offline {
        return Err(AcquisitionError::CacheMiss {
            key,
            tract_id: spec.tract_id.clone(),
        });
    }
    let fetch = || -> Result<Vec<u8>> {
        let bytes = get_with_retry(transport, &tile_request_url(spec, cfg), cfg)?;
        // Reject junk before it reaches the cache.
        decode_image(&bytes)?;
        cache.write(&key, &bytes)?;
        Ok(bytes)
    };
    fetch().map(|b| (b, true)).map_err(wrap(spec, &key))
}

/// Cached or freshly downloaded tile, decoded.
pub fn fetch_tile(
    spec: &TileSpec,
    cfg: &EndpointConfig,
    cache: &TileCache,
    transport: &dyn Transport,
) -> Result<RasterImage> {
    let key = TileCache::key(spec);
    let (bytes, downloaded) = load_bytes(spec, cfg, cache, transport)?;
    if downloaded {
        cache
            .record(&[CacheEntry {
                key: key.clone(),
                tract_id: spec.tract_id.clone(),
                fetched_at: now(),
            }])
            .map_err(wrap(spec, &key))?;
    }
    decode_image(&bytes).map_err(wrap(spec, &key))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FetchSummary {
    pub planned: usize,
    pub unique: usize,
    pub cached: usize,
    pub downloaded: usize,
}

/// Makes sure every planned tile is in the cache, downloading at most
/// `max_concurrent` at a time. Duplicate specs are fetched once, and the
/// manifest is updated in plan order.
pub fn ensure_cached(
    specs: &[TileSpec],
    cfg: &EndpointConfig,
    cache: &TileCache,
    transport: &dyn Transport,
) -> Result<FetchSummary> {
    let mut seen = HashSet::new();
    let unique: Vec<&TileSpec> = specs.iter().filter(|s| seen.insert(TileCache::key(s))).collect();
    let missing: Vec<&TileSpec> = unique
        .iter()
        .copied()
        .filter(|s| !cache.contains(&TileCache::key(s)))
        .collect();

    let downloaded = par::with_threads(cfg.max_concurrent, || {
        par::try_map(&missing, |spec| {
            load_bytes(spec, cfg, cache, transport).map(|(_, fresh)| fresh)
        })
    })?;

    let stamp = now();
    let entries: Vec<CacheEntry> = missing
        .iter()
        .zip(&downloaded)
        .filter(|(_, &fresh)| fresh)
        .map(|(s, _)| CacheEntry {
            key: TileCache::key(s),
            tract_id: s.tract_id.clone(),
            fetched_at: stamp.clone(),
        })
        .collect();
    cache.record(&entries)?;

    Ok(FetchSummary {
        planned: specs.len(),
        unique: unique.len(),
        cached: unique.len() - missing.len(),
        downloaded: entries.len(),
    })
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}
