//! Static-map tile and nearby-search clients.
//!
//! Network access goes through the [`Transport`] trait so tests can count
//! requests against a fake endpoint. With `offline` set, nothing ever calls
//! the transport: tiles must already be in the cache and POIs come from an
//! NDJSON fixture.

mod cache;
mod poi;
mod raster;
mod tiles;
mod transport;

pub use cache::{CacheEntry, TileCache, CACHE_MANIFEST};
pub use poi::{
    fetch_poi, fetch_pois, parse_poi_fixture, poi_request_url, write_poi_ndjson, PoiFetch, PoiFixture, PoiRecord,
    PoiSource,
};
pub use raster::{decode_image, encode_png, RasterImage};
pub use tiles::{ensure_cached, fetch_tile, tile_request_url, FetchSummary};
pub use transport::{get_with_retry, HttpTransport, Transport, TransportError};

use std::fmt;
use std::path::PathBuf;
use std::time::Duration;

use thiserror::Error;

/// Environment variable consulted for the endpoint key.
pub const API_KEY_ENV: &str = "TRACTSCOPE_API_KEY";

#[derive(Debug, Error)]
pub enum AcquisitionError {
    #[error("tile {key} (tract {tract_id}): cache miss in offline mode")]
    CacheMiss { key: String, tract_id: String },
    #[error("tile {key} (tract {tract_id}): {source}")]
    Tile {
        key: String,
        tract_id: String,
        #[source]
        source: Box<AcquisitionError>,
    },
    #[error("request failed after {attempts} attempt(s): {message}")]
    Http { attempts: u32, message: String },
    #[error("undecodable image: {0}")]
    Decode(String),
    #[error("pagination loop: page token {0:?} returned twice")]
    PaginationLoop(String),
    #[error("malformed response: {0}")]
    BadResponse(String),
    #[error("offline mode: {0}")]
    Offline(String),
    #[error("fixture line {line}: {message}")]
    Fixture { line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, AcquisitionError>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> AcquisitionError {
    let path = path.into();
    move |source| AcquisitionError::Io { path, source }
}

#[derive(Clone)]
pub struct EndpointConfig {
    pub base_url: String,
    pub api_key: Option<String>,
    pub max_concurrent: usize,
    pub retry_limit: u32,
    pub offline: bool,
    /// First retry delay; doubles per attempt with jitter.
    pub backoff_base: Duration,
}

impl EndpointConfig {
    pub fn offline() -> Self {
        EndpointConfig {
            offline: true,
            ..Default::default()
        }
    }

    pub fn with_env_key(mut self) -> Self {
        if self.api_key.is_none() {
            self.api_key = std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty());
        }
        self
    }
}

impl Default for EndpointConfig {
    fn default() -> Self {
        EndpointConfig {
            base_url: String::new(),
            api_key: None,
            max_concurrent: 4,
            retry_limit: 3,
            offline: false,
            backoff_base: Duration::from_secs(1),
        }
    }
}

impl fmt::Debug for EndpointConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EndpointConfig")
            .field("base_url", &self.base_url)
            .field("api_key", &self.api_key.as_ref().map(|_| "<redacted>"))
            .field("max_concurrent", &self.max_concurrent)
            .field("retry_limit", &self.retry_limit)
            .field("offline", &self.offline)
            .field("backoff_base", &self.backoff_base)
            .finish()
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn debug_redacts_key() {
        let cfg = EndpointConfig {
            api_key: Some("secret-123".into()),
            ..Default::default()
        };
        let s = format!("{cfg:?}");
        assert!(!s.contains("secret-123"));
        assert!(s.contains("redacted"));
    }
}
