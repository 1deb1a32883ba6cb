//! HTTP client for a neural alignment backend.
//!
//! Wire format: `POST {endpoint}/v1/align` with `{"pairs": [{"a", "b"}, ...]}`;
//! the backend answers `{"judgments": [{"p3", "pbin", "reg"}, ...]}` in request
//! order, or a non-200 status carrying `{"error": "..."}`.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{check_pairs, AlignmentJudgment, AlignmentScorer, ScorerError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WirePair {
    pub a: String,
    pub b: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignRequest {
    pub pairs: Vec<WirePair>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignResponse {
    pub judgments: Vec<AlignmentJudgment>,
}

#[derive(Debug, Deserialize)]
struct ErrorBody {
    error: String,
}

#[derive(Debug, Clone)]
pub struct RemoteConfig {
    /// Base address such as `http://127.0.0.1:8000`; `/v1/align` is appended
    /// unless already present.
    pub endpoint: String,
    pub timeout: Duration,
    pub batch_size: usize,
    pub max_in_flight: usize,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        Self {
            endpoint: "http://127.0.0.1:8000".to_string(),
            timeout: Duration::from_secs(30),
            batch_size: 32,
            max_in_flight: 4,
        }
    }
}

type BatchResult = Result<Vec<AlignmentJudgment>, ScorerError>;

/// Counting gate bounding concurrent requests across all callers.
struct InFlight {
    active: Mutex<usize>,
    freed: Condvar,
    limit: usize,
}

impl InFlight {
    fn acquire(&self) -> InFlightGuard<'_> {
        let mut active = self.active.lock().expect("in-flight counter poisoned");
        while *active >= self.limit {
            active = self.freed.wait(active).expect("in-flight counter poisoned");
        }
        *active += 1;
        InFlightGuard(self)
    }
}

struct InFlightGuard<'a>(&'a InFlight);

impl Drop for InFlightGuard<'_> {
    fn drop(&mut self) {
        *self.0.active.lock().expect("in-flight counter poisoned") -= 1;
        self.0.freed.notify_one();
    }
}

/// Client for the alignment wire protocol. At most `max_in_flight` requests
/// are outstanding at once, however many threads share the scorer.
pub struct RemoteScorer {
    url: String,
    config: RemoteConfig,
    client: reqwest::blocking::Client,
    in_flight: InFlight,
}

impl RemoteScorer {
    pub fn new(config: RemoteConfig) -> Result<Self, ScorerError> {
        if config.batch_size == 0 {
            return Err(ScorerError::Config("remote batch size must be >= 1".into()));
        }
        if config.max_in_flight == 0 {
            return Err(ScorerError::Config(
                "max in-flight requests must be >= 1".into(),
            ));
        }
        let base = config.endpoint.trim_end_matches('/');
        if !(base.starts_with("http://") || base.starts_with("https://")) {
            return Err(ScorerError::Config(format!(
                "endpoint must be an http(s) URL, got {:?}",
                config.endpoint
            )));
        }
        let url = if base.ends_with("/v1/align") {
            base.to_string()
        } else {
            format!("{base}/v1/align")
        };
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| ScorerError::Config(e.to_string()))?;
        Ok(Self {
            url,
            in_flight: InFlight {
                active: Mutex::new(0),
                freed: Condvar::new(),
                limit: config.max_in_flight,
            },
            config,
            client,
        })
    }

    pub fn url(&self) -> &str {
        &self.url
    }

    /// Sends one request; errors carry indices relative to `pairs`.
    fn post(&self, pairs: &[(&str, &str)]) -> Result<Vec<AlignmentJudgment>, ScorerError> {
        let request = AlignRequest {
            pairs: pairs
                .iter()
                .map(|(a, b)| WirePair {
                    a: a.to_string(),
                    b: b.to_string(),
                })
                .collect(),
        };
        let transport = |e: reqwest::Error| {
            if e.is_timeout() {
                ScorerError::Timeout { index: 0 }
            } else {
                ScorerError::Transport {
                    index: 0,
                    message: e.to_string(),
                }
            }
        };
        let _slot = self.in_flight.acquire();
        let response = self
            .client
            .post(&self.url)
            .json(&request)
            .send()
            .map_err(transport)?;
        let status = response.status();
        let body = response.text().map_err(transport)?;
        if !status.is_success() {
            let message = match serde_json::from_str::<ErrorBody>(&body) {
                Ok(err) => format!("HTTP {}: {}", status.as_u16(), err.error),
                Err(_) => format!("HTTP {} with malformed error body", status.as_u16()),
            };
            return Err(ScorerError::Protocol { index: 0, message });
        }
        let parsed: AlignResponse =
            serde_json::from_str(&body).map_err(|e| ScorerError::Protocol {
                index: 0,
                message: format!("malformed response: {e}"),
            })?;
        if parsed.judgments.len() != pairs.len() {
            return Err(ScorerError::Protocol {
                index: 0,
                message: format!(
                    "expected {} judgments, got {}",
                    pairs.len(),
                    parsed.judgments.len()
                ),
            });
        }
        for (index, judgment) in parsed.judgments.iter().enumerate() {
            judgment
                .validate()
                .map_err(|reason| ScorerError::InvalidJudgment { index, reason })?;
        }
        Ok(parsed.judgments)
    }
}

impl AlignmentScorer for RemoteScorer {
    fn score_batch(&self, pairs: &[(&str, &str)]) -> Result<Vec<AlignmentJudgment>, ScorerError> {
        check_pairs(pairs)?;
        if pairs.is_empty() {
            return Ok(Vec::new());
        }
        let batches: Vec<&[(&str, &str)]> = pairs.chunks(self.config.batch_size).collect();
        let results: Vec<Mutex<Option<BatchResult>>> =
            batches.iter().map(|_| Mutex::new(None)).collect();
        let next = AtomicUsize::new(0);
        let workers = self.config.max_in_flight.min(batches.len());
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    if i >= batches.len() {
                        break;
                    }
                    let outcome = self
                        .post(batches[i])
                        .map_err(|e| e.offset(i * self.config.batch_size));
                    *results[i].lock().expect("result slot poisoned") = Some(outcome);
                });
            }
        });
        let mut out = Vec::with_capacity(pairs.len());
        for slot in results {
            let outcome = slot
                .into_inner()
                .expect("result slot poisoned")
                .expect("every batch is processed");
            out.extend(outcome?);
        }
        Ok(out)
    }

    fn describe(&self) -> String {
        format!("remote({})", self.url)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoint_gets_route_appended() {
        let s = RemoteScorer::new(RemoteConfig {
            endpoint: "http://localhost:9/".into(),
            ..RemoteConfig::default()
        })
        .unwrap();
        assert_eq!(s.url(), "http://localhost:9/v1/align");
    }

    #[test]
    fn bad_config_rejected() {
        let bad_url = RemoteConfig {
            endpoint: "localhost:9".into(),
            ..RemoteConfig::default()
        };
        assert!(RemoteScorer::new(bad_url).is_err());
        let zero_batch = RemoteConfig {
            batch_size: 0,
            ..RemoteConfig::default()
        };
        assert!(RemoteScorer::new(zero_batch).is_err());
    }

    #[test]
    fn wire_request_shape() {
        let req = AlignRequest {
            pairs: vec![WirePair {
                a: "x".into(),
                b: "y".into(),
            }],
        };
        assert_eq!(
            serde_json::to_string(&req).unwrap(),
            r#"{"pairs":[{"a":"x","b":"y"}]}"#
        );
    }

    #[test]
    fn unreachable_backend_reports_transport_error() {
        // Port 9 (discard) is essentially never listening in CI sandboxes.
        let s = RemoteScorer::new(RemoteConfig {
            endpoint: "http://127.0.0.1:9".into(),
            timeout: Duration::from_millis(500),
            ..RemoteConfig::default()
        })
        .unwrap();
        let err = s.score_batch(&[("a", "b")]).unwrap_err();
        assert!(matches!(
            err,
            ScorerError::Transport { index: 0, .. } | ScorerError::Timeout { index: 0 }
        ));
    }
}
