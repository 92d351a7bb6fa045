//! Translation providers.
//!
//! [`OfflineProvider`] echoes the reference translation, so degradation is
//! the only source of quality variation; it is what tests and offline runs
//! use. [`HttpProvider`] posts `{"src": ..., "lp": "xx-yy"}` to an endpoint
//! and expects `{"mt": ...}` back, with bounded timeout and retries.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::corpus::LanguagePair;
use crate::error::{Error, Result};

pub trait TranslationProvider {
    /// Translates one source sentence. `reference`, when the caller has one,
    /// lets offline providers stand in for a real engine.
    fn translate(
        &self,
        src: &str,
        lp: &LanguagePair,
        reference: Option<&str>,
    ) -> Result<String>;
}

/// Returns the reference verbatim. Errors when no reference is available.
#[derive(Debug, Default, Clone, Copy)]
pub struct OfflineProvider;

impl TranslationProvider for OfflineProvider {
    fn translate(&self, _src: &str, _lp: &LanguagePair, reference: Option<&str>) -> Result<String> {
        match reference {
            Some(r) => Ok(r.to_string()),
            None => Err(Error::Provider(
                "offline provider needs a reference translation".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HttpProviderConfig {
    pub endpoint: String,
    pub timeout_ms: u64,
    pub retries: u32,
}

impl Default for HttpProviderConfig {
    fn default() -> Self {
        HttpProviderConfig {
            endpoint: String::new(),
            timeout_ms: 5_000,
            retries: 2,
        }
    }
}

#[derive(Serialize)]
struct TranslateRequest<'a> {
    src: &'a str,
    lp: String,
}

#[derive(Deserialize)]
struct TranslateResponse {
    mt: String,
}

pub struct HttpProvider {
    config: HttpProviderConfig,
    client: reqwest::blocking::Client,
}

impl HttpProvider {
    pub fn new(config: HttpProviderConfig) -> Result<Self> {
        if config.endpoint.is_empty() {
            return Err(Error::Config("http provider needs an endpoint".into()));
        }
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_millis(config.timeout_ms))
            .build()
            .map_err(|e| Error::Provider(e.to_string()))?;
        Ok(HttpProvider { config, client })
    }

    fn attempt(&self, src: &str, lp: &LanguagePair) -> Result<String> {
        let request = TranslateRequest {
            src,
            lp: lp.to_string(),
        };
        let response = self
            .client
            .post(&self.config.endpoint)
            .json(&request)
            .send()
            .map_err(|e| Error::Provider(e.to_string()))?;
        if !response.status().is_success() {
            return Err(Error::Provider(format!(
                "endpoint returned status {}",
                response.status()
            )));
        }
        let body: TranslateResponse = response
            .json()
            .map_err(|e| Error::Provider(format!("bad response body: {e}")))?;
        Ok(body.mt)
    }
}

impl TranslationProvider for HttpProvider {
    fn translate(&self, src: &str, lp: &LanguagePair, _reference: Option<&str>) -> Result<String> {
        let mut last_err = None;
        for _ in 0..=self.config.retries {
            match self.attempt(src, lp) {
                Ok(mt) => return Ok(mt),
                Err(e) => last_err = Some(e),
            }
        }
        Err(last_err.expect("at least one attempt"))
    }
}
