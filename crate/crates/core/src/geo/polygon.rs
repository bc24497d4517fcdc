//! Planar polygon routines. Lat/lon rings are treated as straight-edged in
//! `(lon, lat)` space; metric work goes through a local equirectangular
//! projection, which is accurate to well under a percent at tract scale.

use super::{Geometry, LatLon};

/// Mean Earth radius (IUGG), meters.
pub const EARTH_RADIUS_M: f64 = 6_371_008.8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Pt {
    pub x: f64,
    pub y: f64,
}

pub(crate) fn pt(x: f64, y: f64) -> Pt {
    Pt { x, y }
}

/// A polygon as planar rings (exterior first).
pub(crate) type PlanarPolygon = Vec<Vec<Pt>>;

fn on_segment(a: Pt, b: Pt, p: Pt) -> bool {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let cross = dx * (p.y - a.y) - dy * (p.x - a.x);
    let scale = dx.abs().max(dy.abs()).max(1e-300);
    if cross.abs() > 1e-12 * scale * scale.max(1.0) {
        return false;
    }
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

fn edges(ring: &[Pt]) -> impl Iterator<Item = (Pt, Pt)> + '_ {
    ring.windows(2).map(|w| (w[0], w[1]))
}

/// Even-odd containment over all rings of one polygon; points on any ring
/// count as inside.
pub(crate) fn planar_contains(rings: &[Vec<Pt>], p: Pt) -> bool {
    let mut inside = false;
    for ring in rings {
        for (a, b) in edges(ring) {
            if on_segment(a, b, p) {
                return true;
            }
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
    }
    inside
}

fn ring_signed_area(ring: &[Pt]) -> f64 {
    edges(ring).map(|(a, b)| a.x * b.y - b.x * a.y).sum::<f64>() / 2.0
}

pub(crate) fn planar_area(polygons: &[PlanarPolygon]) -> f64 {
    polygons
        .iter()
        .map(|rings| {
            let outer = ring_signed_area(&rings[0]).abs();
            let holes: f64 = rings[1..].iter().map(|r| ring_signed_area(r).abs()).sum();
            outer - holes
        })
        .sum()
}

fn segments_intersect(a: Pt, b: Pt, c: Pt, d: Pt) -> bool {
    let orient = |p: Pt, q: Pt, r: Pt| (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
    let (d1, d2) = (orient(c, d, a), orient(c, d, b));
    let (d3, d4) = (orient(a, b, c), orient(a, b, d));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    on_segment(c, d, a) || on_segment(c, d, b) || on_segment(a, b, c) || on_segment(a, b, d)
}

/// Whether the closed axis-aligned rectangle `[min, max]` meets the polygon.
pub(crate) fn rect_intersects(rings: &[Vec<Pt>], min: Pt, max: Pt) -> bool {
    let corners = [min, pt(max.x, min.y), max, pt(min.x, max.y)];
    if corners.iter().any(|&c| planar_contains(rings, c)) {
        return true;
    }
    let in_rect = |p: &Pt| p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
    if rings.iter().flatten().any(in_rect) {
        return true;
    }
    let sides = [
        (corners[0], corners[1]),
        (corners[1], corners[2]),
        (corners[2], corners[3]),
        (corners[3], corners[0]),
    ];
    rings
        .iter()
        .any(|ring| edges(ring).any(|(a, b)| sides.iter().any(|&(c, d)| segments_intersect(a, b, c, d))))
}

pub(crate) fn lonlat_rings(geometry: &Geometry) -> Vec<PlanarPolygon> {
    geometry
        .polygons
        .iter()
        .map(|p| {
            p.rings()
                .map(|r| r.iter().map(|v| pt(v.lon, v.lat)).collect())
                .collect()
        })
        .collect()
}

/// Boundary-inclusive even-odd test; holes are excluded, and a multipolygon
/// contains the point if any member does.
pub fn point_in_polygon(point: LatLon, geometry: &Geometry) -> bool {
    let p = pt(point.lon, point.lat);
    geometry.polygons.iter().any(|poly| {
        let rings: PlanarPolygon = poly
            .rings()
            .map(|r| r.iter().map(|v| pt(v.lon, v.lat)).collect())
            .collect();
        planar_contains(&rings, p)
    })
}

/// `(south-west, north-east)` corners of the geometry.
pub fn bounding_box(geometry: &Geometry) -> (LatLon, LatLon) {
    let mut min = LatLon::new(f64::INFINITY, f64::INFINITY);
    let mut max = LatLon::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for v in geometry.vertices() {
        min.lat = min.lat.min(v.lat);
        min.lon = min.lon.min(v.lon);
        max.lat = max.lat.max(v.lat);
        max.lon = max.lon.max(v.lon);
    }
    (min, max)
}

/// Equirectangular projection to meters about a reference point.
#[derive(Clone, Copy, Debug)]
pub struct LocalProjection {
    origin: LatLon,
    cos_lat: f64,
}

impl LocalProjection {
    pub fn new(origin: LatLon) -> Self {
        LocalProjection {
            origin,
            cos_lat: origin.lat.to_radians().cos(),
        }
    }

    /// Centered on the middle of the geometry's bounding box.
    pub fn about(geometry: &Geometry) -> Self {
        let (min, max) = bounding_box(geometry);
        Self::new(LatLon::new((min.lat + max.lat) / 2.0, (min.lon + max.lon) / 2.0))
    }

    /// Like `about`, but the east-west scale is taken at the latitude nearest
    /// the equator, so planar distances never understate great-circle ones.
    pub fn dominating(geometry: &Geometry) -> Self {
        let (min, max) = bounding_box(geometry);
        let lat = if min.lat <= 0.0 && max.lat >= 0.0 {
            0.0
        } else {
            min.lat.abs().min(max.lat.abs())
        };
        LocalProjection {
            origin: LatLon::new((min.lat + max.lat) / 2.0, (min.lon + max.lon) / 2.0),
            cos_lat: lat.to_radians().cos(),
        }
    }

    pub fn to_xy(&self, p: LatLon) -> (f64, f64) {
        let x = EARTH_RADIUS_M * (p.lon - self.origin.lon).to_radians() * self.cos_lat;
        let y = EARTH_RADIUS_M * (p.lat - self.origin.lat).to_radians();
        (x, y)
    }

    pub fn to_latlon(&self, x: f64, y: f64) -> LatLon {
        LatLon {
            lat: self.origin.lat + (y / EARTH_RADIUS_M).to_degrees(),
            lon: self.origin.lon + (x / (EARTH_RADIUS_M * self.cos_lat)).to_degrees(),
        }
    }

    pub(crate) fn project(&self, geometry: &Geometry) -> Vec<PlanarPolygon> {
        geometry
            .polygons
            .iter()
            .map(|p| {
                p.rings()
                    .map(|r| {
                        r.iter()
                            .map(|&v| {
                                let (x, y) = self.to_xy(v);
                                pt(x, y)
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }
}

/// Area in km² (holes subtracted), via the local projection.
pub fn polygon_area_km2(geometry: &Geometry) -> f64 {
    let proj = LocalProjection::about(geometry);
    planar_area(&proj.project(geometry)) / 1e6
}

/// A point guaranteed to lie inside the geometry (on the largest member
/// polygon), or `None` for degenerate input.
pub fn representative_point(geometry: &Geometry) -> Option<LatLon> {
    let polys = lonlat_rings(geometry);
    let largest = polys
        .iter()
        .max_by(|a, b| planar_area(&[(*a).clone()]).total_cmp(&planar_area(&[(*b).clone()])))?;
    let p = planar_interior_point(largest)?;
    Some(LatLon::new(p.y, p.x))
}

pub(crate) fn planar_interior_point(rings: &[Vec<Pt>]) -> Option<Pt> {
    let ys = rings[0].iter().map(|p| p.y);
    let (lo, hi) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), y| (lo.min(y), hi.max(y)));
    if !(hi > lo) {
        return None;
    }
    // Scan lines at 1/2, 1/4, 3/4, 1/8, ... of the height.
    for depth in 1..=12u32 {
        let denom = 1u32 << depth;
        for k in (1..denom).step_by(2) {
            let y = lo + (hi - lo) * k as f64 / denom as f64;
            let mut xs: Vec<f64> = rings
                .iter()
                .flat_map(|r| edges(r))
                .filter(|(a, b)| (a.y > y) != (b.y > y))
                .map(|(a, b)| a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y))
                .collect();
            xs.sort_by(f64::total_cmp);
            let best = xs
                .chunks_exact(2)
                .max_by(|a, b| (a[1] - a[0]).total_cmp(&(b[1] - b[0])));
            if let Some(span) = best {
                if span[1] > span[0] {
                    let candidate = pt((span[0] + span[1]) / 2.0, y);
                    if planar_contains(rings, candidate) {
                        return Some(candidate);
                    }
                }
            }
        }
    }
    None
}
