use crate::acquisition::{decode_image, AcquisitionError, TileCache};
use crate::cnn::{
    baseline_descriptor, forward_to_layer, preprocess, FeatureVector, NetworkSpec, BASELINE_DIM, BASELINE_ID,
};
use crate::geo::{plan_tiles, GeoError, TractRecord};
use crate::par;

use super::{aggregate_tract, FeatureStore, FeaturesError, Result};

/// How a tile image becomes a vector.
pub enum Extractor<'a> {
    Baseline,
    Cnn { net: &'a NetworkSpec, layer: &'a str },
}

impl Extractor<'_> {
    pub fn id(&self) -> String {
        match self {
            Extractor::Baseline => BASELINE_ID.to_string(),
            Extractor::Cnn { layer, .. } => format!("cnn:{layer}"),
        }
    }

    pub fn dim(&self) -> Result<usize> {
        match self {
            Extractor::Baseline => Ok(BASELINE_DIM),
            Extractor::Cnn { net, layer } => {
                let idx = net.layer_index(layer)?;
                let shapes = net.shapes()?;
                Ok(shapes[idx].iter().product())
            }
        }
    }

    fn apply(&self, image: &crate::acquisition::RasterImage) -> Result<FeatureVector> {
        match self {
            Extractor::Baseline => Ok(baseline_descriptor(image)),
            Extractor::Cnn { net, layer } => {
                let mut v = forward_to_layer(net, &preprocess(image, net)?, layer)?;
                v.extractor_id = self.id();
                Ok(v)
            }
        }
    }
}

/// Result of a store build: tracts whose geometry could not be tiled are
/// skipped and listed rather than failing the run.
pub struct Extraction {
    pub store: FeatureStore,
    pub skipped: Vec<String>,
    pub tiles: usize,
}

/// Plans each tract's tiles, reads them from `cache`, runs the extractor and
/// stores the per-tract mean. Every planned tile must already be cached.
pub fn extract_store(
    tracts: &[TractRecord],
    cache: &TileCache,
    zoom: u32,
    tile_px: u32,
    extractor: &Extractor<'_>,
) -> Result<Extraction> {
    let dim = extractor.dim()?;
    let per_tract = par::try_map(tracts, |t| -> Result<Option<(FeatureVector, u32)>> {
        let specs = match plan_tiles(t, zoom, tile_px, tile_px) {
            Ok(s) => s,
            Err(GeoError::DegenerateGeometry(_)) => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let vectors = specs
            .iter()
            .map(|spec| {
                let key = TileCache::key(spec);
                let bytes = cache.read(&key)?.ok_or_else(|| AcquisitionError::CacheMiss {
                    key: key.clone(),
                    tract_id: t.id.clone(),
                })?;
                extractor.apply(&decode_image(&bytes)?)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Some((aggregate_tract(&vectors)?, specs.len() as u32)))
    })?;

    let mut store = FeatureStore::new(extractor.id(), dim);
    let mut skipped = Vec::new();
    let mut tiles = 0;
    for (t, res) in tracts.iter().zip(per_tract) {
        match res {
            Some((v, n)) => {
                tiles += n as usize;
                store.insert(t.id.clone(), v, n)?;
            }
            None => skipped.push(t.id.clone()),
        }
    }
    skipped.sort();
    Ok(Extraction { store, skipped, tiles })
}

impl From<AcquisitionError> for FeaturesError {
    fn from(e: AcquisitionError) -> Self {
        FeaturesError::Tile(Box::new(e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::{parse_tract_collection, PropertyMap};
    use crate::synth::{generate_world, SynthConfig};

    fn world(dir: &std::path::Path) -> (Vec<TractRecord>, TileCache, SynthConfig) {
        let cfg = SynthConfig {
            n_tracts: 12,
            ..SynthConfig::default()
        };
        let w = generate_world(&cfg, dir).unwrap();
        let text = std::fs::read_to_string(dir.join(&w.tracts)).unwrap();
        let tracts = parse_tract_collection(&text, &PropertyMap::default()).unwrap();
        (tracts, TileCache::new(dir.join(&w.tile_cache)), cfg)
    }

    #[test]
    fn baseline_store_covers_every_tract() {
        let dir = tempfile::tempdir().unwrap();
        let (tracts, cache, cfg) = world(dir.path());
        let ex = extract_store(&tracts, &cache, cfg.zoom, cfg.image_px, &Extractor::Baseline).unwrap();
        assert_eq!(ex.store.records.len(), tracts.len());
        assert_eq!(ex.store.dim, BASELINE_DIM);
        assert_eq!(ex.store.extractor_id, BASELINE_ID);
        assert!(ex.skipped.is_empty());
        let total: u32 = ex.store.records.values().map(|r| r.tile_count).sum();
        assert_eq!(total as usize, ex.tiles);
        for r in ex.store.records.values() {
            assert!((4..=16).contains(&r.tile_count));
        }
    }

    #[test]
    fn missing_tile_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let (tracts, cache, cfg) = world(dir.path());
        let spec = &plan_tiles(&tracts[3], cfg.zoom, cfg.image_px, cfg.image_px).unwrap()[0];
        std::fs::remove_file(cache.path(&TileCache::key(spec))).unwrap();
        let err = extract_store(&tracts, &cache, cfg.zoom, cfg.image_px, &Extractor::Baseline)
            .err()
            .unwrap();
        assert!(err.to_string().contains(&tracts[3].id), "{err}");
    }

    #[test]
    fn degenerate_tract_is_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let (mut tracts, cache, cfg) = world(dir.path());
        let p = tracts[0].geometry.polygons[0].exterior[0];
        tracts[0].geometry = crate::geo::Geometry::polygon(vec![p, p, p, p]);
        let ex = extract_store(&tracts, &cache, cfg.zoom, cfg.image_px, &Extractor::Baseline).unwrap();
        assert_eq!(ex.skipped, vec![tracts[0].id.clone()]);
        assert_eq!(ex.store.records.len(), tracts.len() - 1);
    }
}
