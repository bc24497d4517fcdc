//! Spherical Web Mercator: the world at zoom `z` is a `256 * 2^z` pixel square
//! with the origin at the north-west corner.

use std::f64::consts::PI;

use super::{GeoError, LatLon, Result};

pub const MAX_LATITUDE: f64 = 85.05112878;
pub const MAX_ZOOM: u32 = 22;
const TILE: f64 = 256.0;
const EQUATOR_M_PER_PX_Z0: f64 = 156543.03392;

/// Side length of the world map in pixels at `zoom`.
pub fn world_size(zoom: u32) -> f64 {
    TILE * 2f64.powi(zoom as i32)
}

fn check_zoom(zoom: u32) -> Result<()> {
    if zoom > MAX_ZOOM {
        Err(GeoError::ZoomOutOfRange(zoom))
    } else {
        Ok(())
    }
}

pub fn latlon_to_world_pixel(lat: f64, lon: f64, zoom: u32) -> Result<(f64, f64)> {
    check_zoom(zoom)?;
    if !(lat.abs() <= MAX_LATITUDE) {
        return Err(GeoError::LatitudeOutOfRange(lat));
    }
    let size = world_size(zoom);
    let phi = lat.to_radians();
    let px = size * (lon + 180.0) / 360.0;
    let py = size * (1.0 - (phi.tan() + 1.0 / phi.cos()).ln() / PI) / 2.0;
    Ok((px, py))
}

pub fn world_pixel_to_latlon(px: f64, py: f64, zoom: u32) -> Result<LatLon> {
    check_zoom(zoom)?;
    let size = world_size(zoom);
    if !((0.0..=size).contains(&px) && (0.0..=size).contains(&py)) {
        return Err(GeoError::PixelOutOfRange { px, py, zoom });
    }
    let lon = px / size * 360.0 - 180.0;
    let lat = (PI * (1.0 - 2.0 * py / size)).sinh().atan().to_degrees();
    Ok(LatLon { lat, lon })
}

/// Ground distance covered by one pixel, in meters.
pub fn ground_resolution(lat: f64, zoom: u32) -> Result<f64> {
    check_zoom(zoom)?;
    if !(lat.abs() <= MAX_LATITUDE) {
        return Err(GeoError::LatitudeOutOfRange(lat));
    }
    Ok(EQUATOR_M_PER_PX_Z0 * lat.to_radians().cos() / 2f64.powi(zoom as i32))
}
