//! Tract boundaries and the planar/Web-Mercator geometry built on them.
//!
//! Coordinates are carried as [`LatLon`] in degrees. GeoJSON input is read
//! in its native `[lon, lat]` order and flipped on ingestion.

mod mercator;
mod plan;
mod polygon;

pub use mercator::{
    ground_resolution, latlon_to_world_pixel, world_pixel_to_latlon, world_size, MAX_LATITUDE, MAX_ZOOM,
};
pub use plan::{
    plan_poi_grid, plan_tiles, tile_plan_csv, PoiProbe, TileSpec, MAX_TILE_PX, MIN_TILE_PX, TILE_PLAN_HEADER,
};
pub use polygon::{
    bounding_box, point_in_polygon, polygon_area_km2, representative_point, LocalProjection, EARTH_RADIUS_M,
};

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeoError {
    #[error("invalid GeoJSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("expected a GeoJSON FeatureCollection")]
    NotFeatureCollection,
    #[error("feature {feature}: missing or null geometry")]
    MissingGeometry { feature: usize },
    #[error("feature {feature}: unsupported geometry type {kind:?}")]
    UnsupportedGeometry { feature: usize, kind: String },
    #[error("feature {feature}: malformed coordinates")]
    MalformedCoordinates { feature: usize },
    #[error("feature {feature}: open ring (first vertex differs from last)")]
    OpenRing { feature: usize },
    #[error("feature {feature}: ring has {len} vertices, need at least 4")]
    ShortRing { feature: usize, len: usize },
    #[error("feature {feature}: coordinate ({lat}, {lon}) out of range")]
    CoordinateOutOfRange { feature: usize, lat: f64, lon: f64 },
    #[error("feature {feature}: missing id property {property:?}")]
    MissingId { feature: usize, property: String },
    #[error("duplicate tract id {0:?}")]
    DuplicateId(String),
    #[error("tract {id}: property {property:?} is not a number: {value}")]
    BadNumber {
        id: String,
        property: String,
        value: String,
    },
    #[error("tract {id}: {property} {value} outside its valid range")]
    OutOfRangeValue { id: String, property: String, value: f64 },
    #[error("latitude {0} outside the Mercator range")]
    LatitudeOutOfRange(f64),
    #[error("zoom {0} outside 0..=22")]
    ZoomOutOfRange(u32),
    #[error("world pixel ({px}, {py}) outside the zoom {zoom} map")]
    PixelOutOfRange { px: f64, py: f64, zoom: u32 },
    #[error("tile size {width}x{height} outside 64..=1280")]
    TileSizeOutOfRange { width: u32, height: u32 },
    #[error("tract {0}: degenerate (zero-area) geometry")]
    DegenerateGeometry(String),
    #[error("probe radius must be positive, got {0}")]
    InvalidRadius(f64),
}

pub type Result<T> = std::result::Result<T, GeoError>;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatLon {
    pub lat: f64,
    pub lon: f64,
}

impl LatLon {
    pub fn new(lat: f64, lon: f64) -> Self {
        LatLon { lat, lon }
    }
}

/// One polygon: an exterior ring and zero or more holes. Rings are closed.
#[derive(Clone, Debug, PartialEq)]
pub struct Polygon {
    pub exterior: Vec<LatLon>,
    pub holes: Vec<Vec<LatLon>>,
}

impl Polygon {
    pub fn rings(&self) -> impl Iterator<Item = &Vec<LatLon>> {
        std::iter::once(&self.exterior).chain(self.holes.iter())
    }
}

/// A polygon-with-holes or a multipolygon.
#[derive(Clone, Debug, PartialEq)]
pub struct Geometry {
    pub polygons: Vec<Polygon>,
}

impl Geometry {
    pub fn polygon(exterior: Vec<LatLon>) -> Self {
        Geometry {
            polygons: vec![Polygon {
                exterior,
                holes: Vec::new(),
            }],
        }
    }

    pub fn vertices(&self) -> impl Iterator<Item = &LatLon> {
        self.polygons.iter().flat_map(|p| p.rings().flatten())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TractRecord {
    pub id: String,
    pub region: String,
    pub geometry: Geometry,
    pub prevalence: Option<f64>,
    pub income: Option<f64>,
    pub land_area_km2: Option<f64>,
}

/// Names of the feature properties that carry each tract attribute.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyMap {
    pub id: String,
    pub region: String,
    pub prevalence: String,
    pub income: String,
    pub area: String,
}

impl Default for PropertyMap {
    fn default() -> Self {
        PropertyMap {
            id: "GEOID".into(),
            region: "region".into(),
            prevalence: "prevalence".into(),
            income: "income".into(),
            area: "land_area_km2".into(),
        }
    }
}

/// Region label used when a feature has no region property.
pub const UNKNOWN_REGION: &str = "unknown";

/// Parses a GeoJSON FeatureCollection into tract records, one per feature.
///
/// Missing or null outcome properties become `None`; such tracts stay on the
/// map but are left out of modeling.
pub fn parse_tract_collection(text: &str, props: &PropertyMap) -> Result<Vec<TractRecord>> {
    let value: Value = serde_json::from_str(text)?;
    parse_tract_value(&value, props)
}

pub fn parse_tract_value(value: &Value, props: &PropertyMap) -> Result<Vec<TractRecord>> {
    if value.get("type").and_then(Value::as_str) != Some("FeatureCollection") {
        return Err(GeoError::NotFeatureCollection);
    }
    let features = value
        .get("features")
        .and_then(Value::as_array)
        .ok_or(GeoError::NotFeatureCollection)?;

    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(features.len());
    for (i, feature) in features.iter().enumerate() {
        let record = parse_feature(i, feature, props)?;
        if !seen.insert(record.id.clone()) {
            return Err(GeoError::DuplicateId(record.id));
        }
        out.push(record);
    }
    Ok(out)
}

/// Reads a feature's id property as a string (numbers are printed as-is).
pub fn feature_id(feature: &Value, property: &str) -> Option<String> {
    match feature.get("properties")?.get(property)? {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn parse_feature(index: usize, feature: &Value, props: &PropertyMap) -> Result<TractRecord> {
    let id = feature_id(feature, &props.id).ok_or_else(|| GeoError::MissingId {
        feature: index,
        property: props.id.clone(),
    })?;
    let geometry = parse_geometry(index, feature.get("geometry"))?;
    let properties = feature.get("properties");
    let region = properties
        .and_then(|p| p.get(&props.region))
        .and_then(|v| match v {
            Value::String(s) => Some(s.clone()),
            Value::Number(n) => Some(n.to_string()),
            _ => None,
        })
        .unwrap_or_else(|| UNKNOWN_REGION.to_string());

    let number = |name: &str| -> Result<Option<f64>> {
        match properties.and_then(|p| p.get(name)) {
            None | Some(Value::Null) => Ok(None),
            Some(Value::Number(n)) => Ok(n.as_f64()),
            Some(Value::String(s)) if s.trim().is_empty() => Ok(None),
            Some(Value::String(s)) => s
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(Some)
                .ok_or_else(|| GeoError::BadNumber {
                    id: id.clone(),
                    property: name.to_string(),
                    value: s.clone(),
                }),
            Some(other) => Err(GeoError::BadNumber {
                id: id.clone(),
                property: name.to_string(),
                value: other.to_string(),
            }),
        }
    };
    let prevalence = number(&props.prevalence)?;
    let income = number(&props.income)?;
    let land_area_km2 = number(&props.area)?;

    let check = |name: &str, v: Option<f64>, ok: &dyn Fn(f64) -> bool| -> Result<()> {
        match v {
            Some(x) if !ok(x) => Err(GeoError::OutOfRangeValue {
                id: id.clone(),
                property: name.to_string(),
                value: x,
            }),
            _ => Ok(()),
        }
    };
    check(&props.prevalence, prevalence, &|x| (0.0..=100.0).contains(&x))?;
    check(&props.income, income, &|x| x >= 0.0)?;
    check(&props.area, land_area_km2, &|x| x > 0.0)?;

    Ok(TractRecord {
        id,
        region,
        geometry,
        prevalence,
        income,
        land_area_km2,
    })
}

fn parse_geometry(index: usize, geometry: Option<&Value>) -> Result<Geometry> {
    let geometry = match geometry {
        Some(g) if !g.is_null() => g,
        _ => return Err(GeoError::MissingGeometry { feature: index }),
    };
    let kind = geometry.get("type").and_then(Value::as_str).unwrap_or("");
    let coords = geometry
        .get("coordinates")
        .ok_or(GeoError::MalformedCoordinates { feature: index })?;
    let polygons = match kind {
        "Polygon" => vec![parse_polygon(index, coords)?],
        "MultiPolygon" => coords
            .as_array()
            .ok_or(GeoError::MalformedCoordinates { feature: index })?
            .iter()
            .map(|p| parse_polygon(index, p))
            .collect::<Result<Vec<_>>>()?,
        other => {
            return Err(GeoError::UnsupportedGeometry {
                feature: index,
                kind: other.to_string(),
            })
        }
    };
    if polygons.is_empty() {
        return Err(GeoError::MalformedCoordinates { feature: index });
    }
    Ok(Geometry { polygons })
}

fn parse_polygon(index: usize, coords: &Value) -> Result<Polygon> {
    let rings = coords
        .as_array()
        .filter(|r| !r.is_empty())
        .ok_or(GeoError::MalformedCoordinates { feature: index })?;
    let mut parsed = rings.iter().map(|r| parse_ring(index, r)).collect::<Result<Vec<_>>>()?;
    let exterior = parsed.remove(0);
    Ok(Polygon {
        exterior,
        holes: parsed,
    })
}

fn parse_ring(index: usize, ring: &Value) -> Result<Vec<LatLon>> {
    let malformed = GeoError::MalformedCoordinates { feature: index };
    let positions = ring.as_array().ok_or(malformed)?;
    let mut out = Vec::with_capacity(positions.len());
    for pos in positions {
        let pair = pos
            .as_array()
            .filter(|p| p.len() >= 2)
            .ok_or(GeoError::MalformedCoordinates { feature: index })?;
        let lon = pair[0]
            .as_f64()
            .ok_or(GeoError::MalformedCoordinates { feature: index })?;
        let lat = pair[1]
            .as_f64()
            .ok_or(GeoError::MalformedCoordinates { feature: index })?;
        if !(lat.abs() <= 90.0 && (-180.0..180.0).contains(&lon)) {
            return Err(GeoError::CoordinateOutOfRange {
                feature: index,
                lat,
                lon,
            });
        }
        out.push(LatLon { lat, lon });
    }
    if out.len() < 4 {
        return Err(GeoError::ShortRing {
            feature: index,
            len: out.len(),
        });
    }
    if out.first() != out.last() {
        return Err(GeoError::OpenRing { feature: index });
    }
    Ok(out)
}
