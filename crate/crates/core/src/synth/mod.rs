//! A seeded synthetic world: rectangular tracts, procedural tiles whose
//! green level and road density track a latent `z ∈ [0, 1]`, POIs with
//! category rates linear in `z`, and outcomes linear in `z` plus noise.
//!
//! Tracts are laid out so each covers an exact block of tile footprints,
//! which makes the tile plan of every tract known in advance.

use std::path::{Path, PathBuf};

use rand::Rng as _;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::acquisition::{
    encode_png, write_poi_ndjson, AcquisitionError, CacheEntry, PoiRecord, RasterImage, TileCache,
};
use crate::geo::{
    latlon_to_world_pixel, plan_tiles, polygon_area_km2, world_pixel_to_latlon, GeoError, Geometry, LatLon, TractRecord,
};
use crate::rng::{seeded, Rng};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synthetic configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Geo(#[from] GeoError),
    #[error(transparent)]
    Acquisition(#[from] AcquisitionError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, SynthError>;

/// An outcome generated as `intercept + slope·z + N(0, noise_sd²)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeModel {
    pub intercept: f64,
    pub slope: f64,
}

/// Expected count of one POI category in a tract: `base + slope·z`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CategoryRate {
    pub category: String,
    pub base: f64,
    pub slope: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_tracts: usize,
    /// Tiles per tract side; a tract covers `a x b` tiles with both sides
    /// drawn from this inclusive range.
    pub tile_side: (u32, u32),
    pub image_px: u32,
    pub zoom: u32,
    /// Generative R² of each outcome on `z`, used to derive the noise sd.
    pub target_r2: f64,
    /// Fixed prevalence noise sd, overriding `target_r2`. Income noise is
    /// scaled by the slope ratio so both outcomes keep the same R².
    pub noise_sd: Option<f64>,
    /// Green-channel mean is `green_base + green_gap·z`.
    pub green_base: f64,
    pub green_gap: f64,
    pub prevalence: OutcomeModel,
    pub income: OutcomeModel,
    pub regions: Vec<(String, LatLon)>,
    pub categories: Vec<CategoryRate>,
    /// Share of tracts whose outcomes are withheld (null).
    pub missing_fraction: f64,
    /// Chance that a POI is listed twice under the same place id.
    pub duplicate_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        let cat = |c: &str, base: f64, slope: f64| CategoryRate {
            category: c.into(),
            base,
            slope,
        };
        SynthConfig {
            seed: 42,
            n_tracts: 200,
            tile_side: (2, 4),
            image_px: 64,
            zoom: 18,
            target_r2: 0.8,
            noise_sd: None,
            green_base: 60.0,
            green_gap: 80.0,
            prevalence: OutcomeModel {
                intercept: 30.0,
                slope: -15.0,
            },
            income: OutcomeModel {
                intercept: 20_000.0,
                slope: 40_000.0,
            },
            regions: vec![
                ("Los Angeles".into(), LatLon::new(34.05, -118.25)),
                ("Memphis".into(), LatLon::new(35.15, -90.05)),
                ("San Antonio".into(), LatLon::new(29.42, -98.49)),
                ("Seattle".into(), LatLon::new(47.61, -122.33)),
            ],
            categories: vec![
                cat("fast_food", 6.0, -5.0),
                cat("convenience_store", 4.0, -3.0),
                cat("bar", 2.0, 0.0),
                cat("restaurant", 3.0, 2.0),
                cat("grocery", 1.0, 2.0),
                cat("gym", 0.5, 3.0),
                cat("park", 0.5, 4.0),
                cat("school", 1.0, 0.0),
            ],
            missing_fraction: 0.0,
            duplicate_rate: 0.1,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(SynthError::InvalidConfig(m.into()));
        if self.n_tracts < 10 {
            return bad("n_tracts must be at least 10");
        }
        if self.tile_side.0 == 0 || self.tile_side.0 > self.tile_side.1 {
            return bad("tile_side must be a non-empty range of positive sizes");
        }
        if !(self.target_r2 > 0.0 && self.target_r2 <= 1.0) {
            return bad("target_r2 must lie in (0, 1]");
        }
        if self.noise_sd.is_some_and(|s| !(s >= 0.0)) {
            return bad("noise_sd must be non-negative");
        }
        if self.regions.is_empty() {
            return bad("at least one region is required");
        }
        if !(0.0..1.0).contains(&self.missing_fraction) {
            return bad("missing_fraction must lie in [0, 1)");
        }
        if !(0.0..=1.0).contains(&self.duplicate_rate) {
            return bad("duplicate_rate must lie in [0, 1]");
        }
        Ok(())
    }

    /// Noise sd giving generative R² `target_r2` for `z ~ U(0, 1)`.
    pub fn noise_sd_for(&self, outcome: &OutcomeModel) -> f64 {
        match self.noise_sd {
            Some(s) => s * (outcome.slope / self.prevalence.slope).abs(),
            None => outcome.slope.abs() * ((1.0 / self.target_r2 - 1.0) / 12.0).sqrt(),
        }
    }

    pub fn category_names(&self) -> Vec<String> {
        self.categories.iter().map(|c| c.category.clone()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TractTruth {
    pub tract_id: String,
    pub region: String,
    pub z: f64,
    pub prevalence: Option<f64>,
    pub income: Option<f64>,
    pub tiles: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeTruth {
    pub intercept: f64,
    pub slope: f64,
    pub noise_sd: f64,
    /// `1 − Σnoise² / Σ(y − ȳ)²` over tracts with an outcome.
    pub achieved_r2: f64,
}

/// Paths of everything written, relative to the output directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthWorld {
    pub tracts: PathBuf,
    pub tile_cache: PathBuf,
    pub poi_fixture: PathBuf,
    pub truth_csv: PathBuf,
    pub truth_json: PathBuf,
    pub categories: Vec<String>,
    pub n_tiles: usize,
    pub n_poi_records: usize,
    pub truth: Vec<TractTruth>,
    pub prevalence: OutcomeTruth,
    pub income: OutcomeTruth,
}

pub const TRACTS_FILE: &str = "tracts.geojson";
pub const TILE_DIR: &str = "tiles";
pub const POI_FILE: &str = "poi.ndjson";
pub const TRUTH_CSV: &str = "truth.csv";
pub const TRUTH_JSON: &str = "truth.json";
pub const FETCHED_AT: &str = "synthetic";

/// One procedural tile. Green carries the level signal; gray roads (which
/// raise red and blue but leave green alone) carry the edge signal, with
/// more roads at low `z`.
pub fn render_tile(z: f64, px: u32, green_base: f64, green_gap: f64, rng: &mut Rng) -> RasterImage {
    let n = px as usize;
    let green = green_base + green_gap * z;
    let mut road = vec![false; n * n];
    let lines = (6.0 * (1.0 - z)).round() as usize + 1;
    for _ in 0..lines {
        let at = rng.random_range(0..n.saturating_sub(1).max(1));
        let vertical = rng.random_bool(0.5);
        for k in 0..n {
            for w in at..(at + 2).min(n) {
                let idx = if vertical { k * n + w } else { w * n + k };
                road[idx] = true;
            }
        }
    }
    let mut data = Vec::with_capacity(n * n * 3);
    let channel = |mean: f64, spread: f64, rng: &mut Rng| {
        (mean + rng.random_range(-spread..=spread)).round().clamp(0.0, 255.0) as u8
    };
    for &is_road in &road {
        let (r, b) = if is_road { (200.0, 200.0) } else { (90.0, 70.0) };
        let rv = channel(r, 20.0, rng);
        let gv = channel(green, 24.0, rng);
        let bv = channel(b, 20.0, rng);
        data.extend_from_slice(&[rv, gv, bv]);
    }
    RasterImage::new(px, px, data).expect("sized above")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SynthError + '_ {
    move |source| SynthError::Io {
        path: path.to_path_buf(),
        source,
    }
}

struct Layout {
    tract: TractRecord,
    /// Pixel-space rectangle: (x0, y0, x1, y1).
    rect: (f64, f64, f64, f64),
}

fn tract_ids(cfg: &SynthConfig) -> Vec<(usize, String)> {
    // regions get contiguous, near-equal blocks of tracts
    let k = cfg.regions.len();
    (0..cfg.n_tracts)
        .map(|i| {
            let r = i * k / cfg.n_tracts;
            (r, format!("{:02}{:03}{:06}", 10 + r, 1, (i + 1) * 100))
        })
        .collect()
}

fn layout(cfg: &SynthConfig, sides: &[(u32, u32)]) -> Result<Vec<Layout>> {
    let tile = cfg.image_px as f64;
    let cell = (cfg.tile_side.1 + 1) as f64 * tile;
    let per_row = 20usize;
    let ids = tract_ids(cfg);
    let mut out = Vec::with_capacity(ids.len());
    let mut slot = vec![0usize; cfg.regions.len()];
    for ((r, id), &(a, b)) in ids.into_iter().zip(sides) {
        let (_, origin) = &cfg.regions[r];
        let (ox, oy) = latlon_to_world_pixel(origin.lat, origin.lon, cfg.zoom)?;
        let (ox, oy) = ((ox / tile).floor() * tile, (oy / tile).floor() * tile);
        let s = slot[r];
        slot[r] += 1;
        let x0 = ox + (s % per_row) as f64 * cell;
        let y0 = oy + (s / per_row) as f64 * cell;
        let (x1, y1) = (x0 + a as f64 * tile, y0 + b as f64 * tile);
        let nw = world_pixel_to_latlon(x0, y0, cfg.zoom)?;
        let se = world_pixel_to_latlon(x1, y1, cfg.zoom)?;
        let ring = vec![
            LatLon::new(se.lat, nw.lon),
            LatLon::new(se.lat, se.lon),
            LatLon::new(nw.lat, se.lon),
            LatLon::new(nw.lat, nw.lon),
            LatLon::new(se.lat, nw.lon),
        ];
        out.push(Layout {
            tract: TractRecord {
                id,
                region: cfg.regions[r].0.clone(),
                geometry: Geometry::polygon(ring),
                prevalence: None,
                income: None,
                land_area_km2: None,
            },
            rect: (x0, y0, x1, y1),
        });
    }
    Ok(out)
}

fn achieved_r2(y: &[f64], noise: &[f64]) -> f64 {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let ss_noise: f64 = noise.iter().map(|e| e * e).sum();
    if ss_tot == 0.0 {
        1.0
    } else {
        1.0 - ss_noise / ss_tot
    }
}

fn tract_feature(t: &TractRecord) -> serde_json::Value {
    let ring: Vec<[f64; 2]> = t.geometry.polygons[0].exterior.iter().map(|p| [p.lon, p.lat]).collect();
    json!({
        "type": "Feature",
        "properties": {
            "GEOID": t.id,
            "region": t.region,
            "prevalence": t.prevalence,
            "income": t.income,
            "land_area_km2": t.land_area_km2,
        },
        "geometry": {"type": "Polygon", "coordinates": [ring]},
    })
}

/// Writes the world into `out_dir`. The same config always produces
/// byte-identical files.
pub fn generate_world(cfg: &SynthConfig, out_dir: &Path) -> Result<SynthWorld> {
    cfg.validate()?;
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let mut rng = seeded(cfg.seed);

    // draw order: per-tract shape and latent, then outcome noise, then
    // missingness, then tiles, then POIs
    let (lo, hi) = cfg.tile_side;
    let mut sides = Vec::with_capacity(cfg.n_tracts);
    let mut zs = Vec::with_capacity(cfg.n_tracts);
    for _ in 0..cfg.n_tracts {
        sides.push((rng.random_range(lo..=hi), rng.random_range(lo..=hi)));
        zs.push(rng.random::<f64>());
    }
    let mut tracts = layout(cfg, &sides)?;

    let sd_p = cfg.noise_sd_for(&cfg.prevalence);
    let sd_i = cfg.noise_sd_for(&cfg.income);
    let std_normal = Normal::new(0.0, 1.0).expect("valid normal");
    let mut noise_p = Vec::with_capacity(cfg.n_tracts);
    let mut noise_i = Vec::with_capacity(cfg.n_tracts);
    for _ in 0..cfg.n_tracts {
        noise_p.push(sd_p * std_normal.sample(&mut rng));
        noise_i.push(sd_i * std_normal.sample(&mut rng));
    }
    let missing: Vec<bool> = (0..cfg.n_tracts)
        .map(|_| rng.random::<f64>() < cfg.missing_fraction)
        .collect();

    let mut truth = Vec::with_capacity(cfg.n_tracts);
    for (i, l) in tracts.iter_mut().enumerate() {
        let t = &mut l.tract;
        t.land_area_km2 = Some(polygon_area_km2(&t.geometry));
        if !missing[i] {
            t.prevalence =
                Some((cfg.prevalence.intercept + cfg.prevalence.slope * zs[i] + noise_p[i]).clamp(0.0, 100.0));
            t.income = Some((cfg.income.intercept + cfg.income.slope * zs[i] + noise_i[i]).max(0.0));
        }
    }

    // tiles
    let cache = TileCache::new(out_dir.join(TILE_DIR));
    std::fs::create_dir_all(cache.dir()).map_err(io_err(cache.dir()))?;
    let mut entries = Vec::new();
    for (i, l) in tracts.iter().enumerate() {
        let specs = plan_tiles(&l.tract, cfg.zoom, cfg.image_px, cfg.image_px)?;
        for spec in &specs {
            let img = render_tile(zs[i], cfg.image_px, cfg.green_base, cfg.green_gap, &mut rng);
            let key = TileCache::key(spec);
            cache.write(&key, &encode_png(&img))?;
            entries.push(CacheEntry {
                key,
                tract_id: l.tract.id.clone(),
                fetched_at: FETCHED_AT.into(),
            });
        }
        truth.push(TractTruth {
            tract_id: l.tract.id.clone(),
            region: l.tract.region.clone(),
            z: zs[i],
            prevalence: l.tract.prevalence,
            income: l.tract.income,
            tiles: specs.len(),
        });
    }
    cache.record(&entries)?;

    // places
    let mut pois = Vec::new();
    let mut next_id = 0usize;
    for (i, l) in tracts.iter().enumerate() {
        let (x0, y0, x1, y1) = l.rect;
        for cat in &cfg.categories {
            let rate = (cat.base + cat.slope * zs[i]).max(0.0);
            let count = if rate > 0.0 {
                Poisson::new(rate).expect("positive rate").sample(&mut rng) as usize
            } else {
                0
            };
            for _ in 0..count {
                // keep a small margin so the point is strictly inside
                let px = x0 + (x1 - x0) * rng.random_range(0.02..0.98);
                let py = y0 + (y1 - y0) * rng.random_range(0.02..0.98);
                let rec = PoiRecord {
                    place_id: format!("place-{next_id:07}"),
                    category: cat.category.clone(),
                    location: world_pixel_to_latlon(px, py, cfg.zoom)?,
                };
                next_id += 1;
                if rng.random::<f64>() < cfg.duplicate_rate {
                    pois.push(rec.clone());
                }
                pois.push(rec);
            }
        }
    }
    let poi_path = out_dir.join(POI_FILE);
    write_poi_ndjson(&poi_path, &pois)?;

    // tracts
    let features: Vec<_> = tracts.iter().map(|l| tract_feature(&l.tract)).collect();
    let collection = json!({"type": "FeatureCollection", "features": features});
    let tracts_path = out_dir.join(TRACTS_FILE);
    let text = serde_json::to_string_pretty(&collection).expect("JSON value serialises");
    std::fs::write(&tracts_path, text).map_err(io_err(&tracts_path))?;

    // truth
    let observed: Vec<usize> = (0..cfg.n_tracts).filter(|&i| !missing[i]).collect();
    let outcome_truth = |m: &OutcomeModel, sd: f64, y: &dyn Fn(usize) -> f64, noise: &[f64]| OutcomeTruth {
        intercept: m.intercept,
        slope: m.slope,
        noise_sd: sd,
        achieved_r2: achieved_r2(
            &observed.iter().map(|&i| y(i)).collect::<Vec<_>>(),
            &observed.iter().map(|&i| noise[i]).collect::<Vec<_>>(),
        ),
    };
    let prevalence = outcome_truth(&cfg.prevalence, sd_p, &|i| truth[i].prevalence.unwrap(), &noise_p);
    let income = outcome_truth(&cfg.income, sd_i, &|i| truth[i].income.unwrap(), &noise_i);

    let truth_csv = out_dir.join(TRUTH_CSV);
    let mut csv_text = String::from("tract_id,z,outcome,noise_sd\n");
    for t in &truth {
        let outcome = t.prevalence.map(|v| v.to_string()).unwrap_or_default();
        csv_text.push_str(&format!("{},{},{},{}\n", t.tract_id, t.z, outcome, sd_p));
    }
    std::fs::write(&truth_csv, csv_text).map_err(io_err(&truth_csv))?;

    let world = SynthWorld {
        tracts: PathBuf::from(TRACTS_FILE),
        tile_cache: PathBuf::from(TILE_DIR),
        poi_fixture: PathBuf::from(POI_FILE),
        truth_csv: PathBuf::from(TRUTH_CSV),
        truth_json: PathBuf::from(TRUTH_JSON),
        categories: cfg.category_names(),
        n_tiles: entries.len(),
        n_poi_records: pois.len(),
        truth,
        prevalence,
        income,
    };
    let truth_json = out_dir.join(TRUTH_JSON);
    let doc = json!({"config": cfg, "world": world});
    std::fs::write(&truth_json, serde_json::to_string_pretty(&doc).expect("serialises"))
        .map_err(io_err(&truth_json))?;
    Ok(world)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acquisition::{decode_image, PoiFixture};
    use crate::geo::{parse_tract_collection, PropertyMap};

    fn small(seed: u64) -> SynthConfig {
        SynthConfig {
            seed,
            n_tracts: 24,
            ..SynthConfig::default()
        }
    }

    fn read_dir(dir: &Path) -> Vec<(String, Vec<u8>)> {
        let mut out = Vec::new();
        for entry in walk(dir) {
            out.push((
                entry.strip_prefix(dir).unwrap().display().to_string(),
                std::fs::read(&entry).unwrap(),
            ));
        }
        out.sort();
        out
    }

    fn walk(dir: &Path) -> Vec<PathBuf> {
        std::fs::read_dir(dir)
            .unwrap()
            .flat_map(|e| {
                let p = e.unwrap().path();
                if p.is_dir() {
                    walk(&p)
                } else {
                    vec![p]
                }
            })
            .collect()
    }

    #[test]
    fn same_seed_same_bytes() {
        let (a, b, c) = (
            tempfile::tempdir().unwrap(),
            tempfile::tempdir().unwrap(),
            tempfile::tempdir().unwrap(),
        );
        generate_world(&small(5), a.path()).unwrap();
        generate_world(&small(5), b.path()).unwrap();
        generate_world(&small(6), c.path()).unwrap();
        assert_eq!(read_dir(a.path()), read_dir(b.path()));
        assert_ne!(read_dir(a.path()), read_dir(c.path()));
    }

    #[test]
    fn artifacts_parse_and_tiles_match_plan() {
        let dir = tempfile::tempdir().unwrap();
        let world = generate_world(&small(1), dir.path()).unwrap();
        let text = std::fs::read_to_string(dir.path().join(&world.tracts)).unwrap();
        let tracts = parse_tract_collection(&text, &PropertyMap::default()).unwrap();
        assert_eq!(tracts.len(), 24);
        let regions: std::collections::BTreeSet<_> = tracts.iter().map(|t| t.region.as_str()).collect();
        assert_eq!(regions.len(), 4);

        let cache = TileCache::new(dir.path().join(&world.tile_cache));
        let manifest = cache.read_manifest().unwrap();
        assert_eq!(manifest.len(), world.n_tiles);
        for (t, truth) in tracts.iter().zip(&world.truth) {
            assert_eq!(t.id, truth.tract_id);
            let plan = plan_tiles(t, 18, 64, 64).unwrap();
            assert_eq!(plan.len(), truth.tiles);
            assert!((4..=16).contains(&plan.len()));
            for spec in &plan {
                let img = decode_image(&cache.read(&TileCache::key(spec)).unwrap().unwrap()).unwrap();
                assert_eq!((img.width, img.height), (64, 64));
            }
        }
        assert!(manifest.iter().all(|e| e.fetched_at == FETCHED_AT));

        let fixture = PoiFixture::load(&dir.path().join(&world.poi_fixture)).unwrap();
        assert_eq!(fixture.records.len(), world.n_poi_records);
        let unique: std::collections::HashSet<_> = fixture.records.iter().map(|r| &r.place_id).collect();
        assert!(
            unique.len() < fixture.records.len(),
            "fixture should contain duplicates"
        );

        let csv = std::fs::read_to_string(dir.path().join(&world.truth_csv)).unwrap();
        assert!(csv.starts_with("tract_id,z,outcome,noise_sd\n"));
        assert_eq!(csv.lines().count(), 25);
    }

    #[test]
    fn zero_noise_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = SynthConfig {
            noise_sd: Some(0.0),
            ..small(2)
        };
        let world = generate_world(&cfg, dir.path()).unwrap();
        assert_eq!(world.prevalence.achieved_r2, 1.0);
        assert_eq!(world.income.achieved_r2, 1.0);
        for t in &world.truth {
            assert!((t.prevalence.unwrap() - (30.0 - 15.0 * t.z)).abs() < 1e-12);
        }
    }

    #[test]
    fn noise_matches_target_r2() {
        let cfg = SynthConfig::default();
        let sd = cfg.noise_sd_for(&cfg.prevalence);
        // var(b z) = b²/12 for z ~ U(0,1)
        let signal = 15.0f64.powi(2) / 12.0;
        assert!((signal / (signal + sd * sd) - 0.8).abs() < 1e-12);
        assert!((cfg.noise_sd_for(&cfg.income) / sd - 40000.0 / 15.0).abs() < 1e-9);
    }

    #[test]
    fn green_level_tracks_latent() {
        let mut rng = seeded(3);
        let mean_green = |img: &RasterImage| img.data.chunks(3).map(|p| p[1] as f64).sum::<f64>() / 4096.0;
        let g0: f64 = (0..8)
            .map(|_| mean_green(&render_tile(0.0, 64, 60.0, 80.0, &mut rng)))
            .sum::<f64>()
            / 8.0;
        let g1: f64 = (0..8)
            .map(|_| mean_green(&render_tile(1.0, 64, 60.0, 80.0, &mut rng)))
            .sum::<f64>()
            / 8.0;
        assert!(((g1 - g0) - 80.0).abs() < 1.0, "gap {}", g1 - g0);
    }

    #[test]
    fn missing_outcomes() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = SynthConfig {
            missing_fraction: 0.3,
            ..small(4)
        };
        let world = generate_world(&cfg, dir.path()).unwrap();
        let missing = world.truth.iter().filter(|t| t.prevalence.is_none()).count();
        assert!(missing > 0 && missing < 24);
        assert!(world.truth.iter().all(|t| t.prevalence.is_none() == t.income.is_none()));
    }

    #[test]
    fn config_checks() {
        assert!(SynthConfig {
            n_tracts: 9,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(SynthConfig {
            noise_sd: Some(-1.0),
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(SynthConfig {
            tile_side: (3, 2),
            ..Default::default()
        }
        .validate()
        .is_err());
    }
}
