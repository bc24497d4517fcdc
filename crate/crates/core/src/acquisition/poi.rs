//! Nearby-search client with pagination, plus the NDJSON fixture used in
//! offline mode.

use std::collections::HashSet;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::geo::{LatLon, PoiProbe, EARTH_RADIUS_M};
use crate::par;

use super::transport::{get_with_retry, Transport};
use super::{io_err, AcquisitionError, EndpointConfig, Result};

/// A categorised place. Serialised flat as `place_id, category, lat, lon`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoiRecord {
    pub place_id: String,
    pub category: String,
    #[serde(flatten)]
    pub location: LatLon,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PoiFetch {
    pub records: Vec<PoiRecord>,
    /// Result entries skipped because they were malformed.
    pub warnings: usize,
}

/// Records loaded from an NDJSON fixture; queries return every record within
/// the probe radius, in file order.
#[derive(Clone, Debug, Default)]
pub struct PoiFixture {
    pub records: Vec<PoiRecord>,
}

impl PoiFixture {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Ok(PoiFixture {
            records: parse_poi_fixture(&text)?,
        })
    }

    fn query(&self, probe: &PoiProbe) -> Vec<PoiRecord> {
        self.records
            .iter()
            .filter(|r| haversine_m(probe.center, r.location) <= probe.radius_m)
            .cloned()
            .collect()
    }
}

pub enum PoiSource<'a> {
    Remote(&'a dyn Transport),
    Fixture(&'a PoiFixture),
}

pub fn parse_poi_fixture(text: &str) -> Result<Vec<PoiRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let rec: PoiRecord = serde_json::from_str(line).map_err(|e| AcquisitionError::Fixture {
                line: i + 1,
                message: e.to_string(),
            })?;
            if rec.place_id.is_empty() || rec.category.is_empty() {
                return Err(AcquisitionError::Fixture {
                    line: i + 1,
                    message: "empty place_id or category".into(),
                });
            }
            Ok(rec)
        })
        .collect()
}

pub fn write_poi_ndjson(path: &Path, records: &[PoiRecord]) -> Result<()> {
    let mut buf = Vec::new();
    for r in records {
        serde_json::to_writer(&mut buf, r).expect("PoiRecord serialises");
        buf.write_all(b"\n").expect("in-memory write");
    }
    super::cache::atomic_write(path, &buf)
}

fn haversine_m(a: LatLon, b: LatLon) -> f64 {
    let (p1, p2) = (a.lat.to_radians(), b.lat.to_radians());
    let dp = p2 - p1;
    let dl = (b.lon - a.lon).to_radians();
    let h = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin()
}

pub fn poi_request_url(probe: &PoiProbe, page_token: Option<&str>, cfg: &EndpointConfig) -> String {
    // Whole meters, rounded up so the disk never shrinks.
    let mut url = format!(
        "{}?location={:.6},{:.6}&radius={}",
        cfg.base_url,
        probe.center.lat,
        probe.center.lon,
        probe.radius_m.ceil() as u64
    );
    if let Some(t) = page_token {
        url.push_str("&pagetoken=");
        url.push_str(t);
    }
    if let Some(key) = &cfg.api_key {
        url.push_str("&key=");
        url.push_str(key);
    }
    url
}

/// Accepts both the flat fixture shape and the nested
/// `geometry.location.{lat,lng}` / `types[]` shape.
fn parse_result(v: &Value) -> Option<PoiRecord> {
    let place_id = v.get("place_id")?.as_str()?.to_string();
    let category = v
        .get("category")
        .and_then(Value::as_str)
        .or_else(|| v.get("types")?.as_array()?.first()?.as_str())?
        .to_string();
    let (lat, lon) = match v.get("geometry").and_then(|g| g.get("location")) {
        Some(loc) => (loc.get("lat")?.as_f64()?, loc.get("lng")?.as_f64()?),
        None => (v.get("lat")?.as_f64()?, v.get("lon")?.as_f64()?),
    };
    if place_id.is_empty() || category.is_empty() || !lat.is_finite() || !lon.is_finite() {
        return None;
    }
    Some(PoiRecord {
        place_id,
        category,
        location: LatLon { lat, lon },
    })
}

/// All places for one probe, following page tokens to exhaustion.
pub fn fetch_poi(probe: &PoiProbe, cfg: &EndpointConfig, source: &PoiSource<'_>) -> Result<PoiFetch> {
    let transport = match source {
        PoiSource::Fixture(fixture) => {
            return Ok(PoiFetch {
                records: fixture.query(probe),
                warnings: 0,
            })
        }
        PoiSource::Remote(_) if cfg.offline => return Err(AcquisitionError::Offline("no POI fixture supplied".into())),
        PoiSource::Remote(t) => *t,
    };

    let mut out = PoiFetch::default();
    let mut seen_tokens = HashSet::new();
    let mut token: Option<String> = None;
    loop {
        let body = get_with_retry(transport, &poi_request_url(probe, token.as_deref(), cfg), cfg)?;
        let page: Value = serde_json::from_slice(&body).map_err(|e| AcquisitionError::BadResponse(e.to_string()))?;
        if let Some(status) = page.get("status").and_then(Value::as_str) {
            if status != "OK" && status != "ZERO_RESULTS" {
                return Err(AcquisitionError::BadResponse(format!("status {status}")));
            }
        }
        let results = match page.get("results") {
            Some(Value::Array(a)) => a.as_slice(),
            None | Some(Value::Null) => &[],
            Some(_) => return Err(AcquisitionError::BadResponse("results is not an array".into())),
        };
        for r in results {
            match parse_result(r) {
                Some(rec) => out.records.push(rec),
                None => out.warnings += 1,
            }
        }
        match page.get("next_page_token").and_then(Value::as_str) {
            Some(t) if !t.is_empty() => {
                if !seen_tokens.insert(t.to_string()) {
                    return Err(AcquisitionError::PaginationLoop(t.to_string()));
                }
                token = Some(t.to_string());
            }
            _ => return Ok(out),
        }
    }
}

/// Runs every probe (at most `max_concurrent` at once) and concatenates the
/// results in probe order.
pub fn fetch_pois(probes: &[PoiProbe], cfg: &EndpointConfig, source: &PoiSource<'_>) -> Result<PoiFetch> {
    let pages = par::with_threads(cfg.max_concurrent, || {
        par::try_map(probes, |p| fetch_poi(p, cfg, source))
    })?;
    let mut out = PoiFetch::default();
    for page in pages {
        out.records.extend(page.records);
        out.warnings += page.warnings;
    }
    Ok(out)
}
