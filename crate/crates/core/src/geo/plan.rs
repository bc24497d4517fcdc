//! Tile plans and POI probe grids for a tract.

use serde::{Deserialize, Serialize};

use super::mercator::{latlon_to_world_pixel, world_pixel_to_latlon, MAX_ZOOM};
use super::polygon::{
    bounding_box, planar_area, planar_contains, point_in_polygon, pt, rect_intersects, representative_point,
    LocalProjection,
};
use super::{GeoError, LatLon, Result, TractRecord};

pub const MIN_TILE_PX: u32 = 64;
pub const MAX_TILE_PX: u32 = 1280;

/// One planned image: centre, zoom and pixel size, plus its grid position.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TileSpec {
    pub tract_id: String,
    pub row: u32,
    pub col: u32,
    pub center: LatLon,
    pub zoom: u32,
    pub width_px: u32,
    pub height_px: u32,
}

/// A nearby-search query disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoiProbe {
    pub tract_id: String,
    pub row: u32,
    pub col: u32,
    pub center: LatLon,
    pub radius_m: f64,
}

fn check_degenerate(tract: &TractRecord) -> Result<()> {
    let proj = LocalProjection::about(&tract.geometry);
    let area = planar_area(&proj.project(&tract.geometry));
    if !(area > 0.0) {
        return Err(GeoError::DegenerateGeometry(tract.id.clone()));
    }
    Ok(())
}

/// Lays an edge-adjacent grid of `width_px x height_px` footprints over the
/// tract's world-pixel bounding box and keeps every footprint whose centre
/// falls inside the tract. Tracts too small to catch a centre get a single
/// tile at an interior point. Output is ordered by `(row, col)`.
pub fn plan_tiles(tract: &TractRecord, zoom: u32, width_px: u32, height_px: u32) -> Result<Vec<TileSpec>> {
    if zoom > MAX_ZOOM {
        return Err(GeoError::ZoomOutOfRange(zoom));
    }
    let size_ok = |v: u32| (MIN_TILE_PX..=MAX_TILE_PX).contains(&v);
    if !size_ok(width_px) || !size_ok(height_px) {
        return Err(GeoError::TileSizeOutOfRange {
            width: width_px,
            height: height_px,
        });
    }
    check_degenerate(tract)?;

    let (sw, ne) = bounding_box(&tract.geometry);
    let (min_x, max_y) = latlon_to_world_pixel(sw.lat, sw.lon, zoom)?;
    let (max_x, min_y) = latlon_to_world_pixel(ne.lat, ne.lon, zoom)?;
    let (w, h) = (width_px as f64, height_px as f64);
    let cols = ((max_x - min_x) / w).ceil().max(1.0) as u32;
    let rows = ((max_y - min_y) / h).ceil().max(1.0) as u32;

    let tile = |row, col, center| TileSpec {
        tract_id: tract.id.clone(),
        row,
        col,
        center,
        zoom,
        width_px,
        height_px,
    };

    let mut tiles = Vec::new();
    for row in 0..rows {
        let cy = min_y + h / 2.0 + row as f64 * h;
        for col in 0..cols {
            let cx = min_x + w / 2.0 + col as f64 * w;
            let center = world_pixel_to_latlon(cx, cy, zoom)?;
            if point_in_polygon(center, &tract.geometry) {
                tiles.push(tile(row, col, center));
            }
        }
    }
    if tiles.is_empty() {
        let center =
            representative_point(&tract.geometry).ok_or_else(|| GeoError::DegenerateGeometry(tract.id.clone()))?;
        tiles.push(tile(0, 0, center));
    }
    Ok(tiles)
}

/// Square grid of nearby-search probes. Cells have side `radius_m * sqrt(2)`
/// so each probe disk covers its cell; cells that touch the tract are kept.
pub fn plan_poi_grid(tract: &TractRecord, radius_m: f64) -> Result<Vec<PoiProbe>> {
    if !(radius_m > 0.0 && radius_m.is_finite()) {
        return Err(GeoError::InvalidRadius(radius_m));
    }
    check_degenerate(tract)?;

    let proj = LocalProjection::dominating(&tract.geometry);
    let polygons = proj.project(&tract.geometry);
    let (mut min, mut max) = (
        pt(f64::INFINITY, f64::INFINITY),
        pt(f64::NEG_INFINITY, f64::NEG_INFINITY),
    );
    for p in polygons.iter().flatten().flatten() {
        min = pt(min.x.min(p.x), min.y.min(p.y));
        max = pt(max.x.max(p.x), max.y.max(p.y));
    }
    let step = radius_m * std::f64::consts::SQRT_2;
    let cols = ((max.x - min.x) / step).ceil().max(1.0) as u32;
    let rows = ((max.y - min.y) / step).ceil().max(1.0) as u32;

    let probe = |row, col, cx, cy| PoiProbe {
        tract_id: tract.id.clone(),
        row,
        col,
        center: proj.to_latlon(cx, cy),
        radius_m,
    };

    let mut probes = Vec::new();
    // Rows run north to south to match the tile grid.
    for row in 0..rows {
        let y1 = max.y - row as f64 * step;
        let y0 = y1 - step;
        for col in 0..cols {
            let x0 = min.x + col as f64 * step;
            let x1 = x0 + step;
            let hit = polygons
                .iter()
                .any(|rings| rect_intersects(rings, pt(x0, y0), pt(x1, y1)));
            if hit {
                probes.push(probe(row, col, (x0 + x1) / 2.0, (y0 + y1) / 2.0));
            }
        }
    }
    if probes.is_empty() {
        // Unreachable for non-degenerate input; keep the >=1 guarantee anyway.
        let c = polygons
            .iter()
            .find_map(|rings| rings[0].first().copied().filter(|p| planar_contains(rings, *p)))
            .unwrap_or(pt((min.x + max.x) / 2.0, (min.y + max.y) / 2.0));
        probes.push(probe(0, 0, c.x, c.y));
    }
    Ok(probes)
}

pub const TILE_PLAN_HEADER: &str = "tract_id,row,col,center_lat,center_lon,zoom,width_px,height_px";

/// Tile plan as CSV text, coordinates with six decimals.
pub fn tile_plan_csv(specs: &[TileSpec]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let _ = w.write_record(TILE_PLAN_HEADER.split(','));
    for s in specs {
        let _ = w.write_record([
            s.tract_id.clone(),
            s.row.to_string(),
            s.col.to_string(),
            format!("{:.6}", s.center.lat),
            format!("{:.6}", s.center.lon),
            s.zoom.to_string(),
            s.width_px.to_string(),
            s.height_px.to_string(),
        ]);
    }
    String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default()
}
