use std::time::Duration;

use rand::Rng;

use super::{AcquisitionError, EndpointConfig, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransportError {
    pub status: Option<u16>,
    pub message: String,
    pub retryable: bool,
}

impl TransportError {
    pub fn status(code: u16) -> Self {
        TransportError {
            status: Some(code),
            message: format!("HTTP {code}"),
            retryable: code == 429 || code >= 500,
        }
    }

    pub fn network(message: impl Into<String>) -> Self {
        TransportError {
            status: None,
            message: message.into(),
            retryable: true,
        }
    }
}

/// A blocking GET.
pub trait Transport: Send + Sync {
    fn get(&self, url: &str) -> std::result::Result<Vec<u8>, TransportError>;
}

/// `ureq`-backed transport.
pub struct HttpTransport {
    agent: ureq::Agent,
}

impl HttpTransport {
    pub fn new(timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        HttpTransport { agent }
    }
}

impl Default for HttpTransport {
    fn default() -> Self {
        Self::new(Duration::from_secs(60))
    }
}

impl Transport for HttpTransport {
    fn get(&self, url: &str) -> std::result::Result<Vec<u8>, TransportError> {
        let mut resp = self
            .agent
            .get(url)
            .call()
            .map_err(|e| TransportError::network(e.to_string()))?;
        let status = resp.status().as_u16();
        if !(200..300).contains(&status) {
            return Err(TransportError::status(status));
        }
        resp.body_mut()
            .with_config()
            .limit(64 * 1024 * 1024)
            .read_to_vec()
            .map_err(|e| TransportError::network(e.to_string()))
    }
}

/// GET with exponential backoff: `backoff_base * 2^attempt`, jittered by a
/// factor in `[0.5, 1.5)`, for up to `retry_limit` retries.
pub fn get_with_retry(transport: &dyn Transport, url: &str, cfg: &EndpointConfig) -> Result<Vec<u8>> {
    if cfg.offline {
        return Err(AcquisitionError::Offline("network access is disabled".into()));
    }
    let mut attempt = 0u32;
    loop {
        match transport.get(url) {
            Ok(body) => return Ok(body),
            Err(e) if e.retryable && attempt < cfg.retry_limit => {
                let jitter: f64 = rand::rng().random_range(0.5..1.5);
                let delay = cfg.backoff_base.mul_f64(2f64.powi(attempt as i32) * jitter);
                log::warn!(target: "acquisition", "{} (attempt {}), retrying in {:?}", e.message, attempt + 1, delay);
                std::thread::sleep(delay);
                attempt += 1;
            }
            Err(e) => {
                return Err(AcquisitionError::Http {
                    attempts: attempt + 1,
                    message: e.message,
                })
            }
        }
    }
}
