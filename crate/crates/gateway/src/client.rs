//! Replay client: streams a recorded log to the gateway as 1-second
//! batches, retrying transient failures. Safe to retry because the gateway
//! deduplicates on sequence number.

use std::time::Duration;

use thiserror::Error;

use chairlab_core::sim::one_second_batches;
use chairlab_core::telemetry::{ImuSample, PlayerLog};

use crate::wire::{BatchAck, BatchRequest, CloseAck, CloseRequest, ErrorBody};

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("gateway unreachable after {attempts} attempts: {detail}")]
    GatewayUnreachable { attempts: usize, detail: String },
    #[error("gateway rejected request ({status}): {detail}")]
    Rejected { status: u16, detail: String },
    #[error("unexpected gateway response: {0}")]
    InvalidResponse(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ReplaySummary {
    pub batches_sent: usize,
    pub samples_sent: usize,
    pub retries: usize,
    /// Times the gateway acknowledged a different next sequence than the
    /// client expected (it noticed a gap).
    pub gaps: usize,
}

pub struct ReplayClient {
    base_url: String,
    http: reqwest::blocking::Client,
    max_attempts: usize,
    retry_pause: Duration,
}

impl ReplayClient {
    /// `base_url` like `http://127.0.0.1:8700`.
    pub fn new(base_url: impl Into<String>) -> Self {
        ReplayClient {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            http: reqwest::blocking::Client::builder()
                .timeout(Duration::from_secs(10))
                .build()
                .expect("http client"),
            max_attempts: 5,
            retry_pause: Duration::from_millis(100),
        }
    }

    pub fn with_retry(mut self, max_attempts: usize, pause: Duration) -> Self {
        self.max_attempts = max_attempts.max(1);
        self.retry_pause = pause;
        self
    }

    pub fn healthz(&self) -> Result<(), ClientError> {
        let url = format!("{}/v1/healthz", self.base_url);
        let resp = self
            .http
            .get(&url)
            .send()
            .map_err(|e| ClientError::GatewayUnreachable {
                attempts: 1,
                detail: e.to_string(),
            })?;
        if resp.status().is_success() {
            Ok(())
        } else {
            Err(ClientError::Rejected {
                status: resp.status().as_u16(),
                detail: "healthz".to_string(),
            })
        }
    }

    fn post_json<T: serde::de::DeserializeOwned>(
        &self,
        url: &str,
        body: &impl serde::Serialize,
        retries: &mut usize,
    ) -> Result<T, ClientError> {
        let mut last_detail = String::new();
        for attempt in 1..=self.max_attempts {
            if attempt > 1 {
                *retries += 1;
                std::thread::sleep(self.retry_pause);
            }
            match self.http.post(url).json(body).send() {
                Ok(resp) => {
                    let status = resp.status();
                    if status.is_success() {
                        return resp
                            .json::<T>()
                            .map_err(|e| ClientError::InvalidResponse(e.to_string()));
                    }
                    if status.is_server_error() {
                        last_detail = format!("status {status}");
                        continue;
                    }
                    let detail = resp
                        .json::<ErrorBody>()
                        .map(|e| format!("{}: {}", e.error, e.detail))
                        .unwrap_or_else(|e| e.to_string());
                    return Err(ClientError::Rejected {
                        status: status.as_u16(),
                        detail,
                    });
                }
                Err(e) => {
                    last_detail = e.to_string();
                }
            }
        }
        Err(ClientError::GatewayUnreachable {
            attempts: self.max_attempts,
            detail: last_detail,
        })
    }

    /// Posts one batch, retrying transport errors and 5xx responses.
    pub fn post_batch(
        &self,
        player_id: &str,
        session_id: &str,
        seq: u64,
        samples: &[ImuSample],
        retries: &mut usize,
    ) -> Result<BatchAck, ClientError> {
        let url = format!(
            "{}/v1/sessions/{player_id}/{session_id}/batches",
            self.base_url
        );
        let body = BatchRequest {
            seq,
            samples: samples.to_vec(),
        };
        self.post_json(&url, &body, retries)
    }

    pub fn close_session(
        &self,
        player_id: &str,
        session_id: &str,
        skill: u8,
    ) -> Result<CloseAck, ClientError> {
        let url = format!(
            "{}/v1/sessions/{player_id}/{session_id}/close",
            self.base_url
        );
        let mut retries = 0;
        self.post_json(&url, &CloseRequest { skill }, &mut retries)
    }

    /// Streams the whole log as consecutive 1-second batches. A speed
    /// multiplier of 0 posts as fast as possible; 1.0 paces at real time.
    pub fn replay(
        &self,
        log: &PlayerLog,
        session_id: &str,
        speed: f64,
    ) -> Result<ReplaySummary, ClientError> {
        let batches = one_second_batches(log);
        let mut summary = ReplaySummary::default();
        for (i, batch) in batches.iter().enumerate() {
            if speed > 0.0 && i > 0 {
                std::thread::sleep(Duration::from_secs_f64(1.0 / speed));
            }
            let ack =
                self.post_batch(&log.player_id, session_id, i as u64, batch, &mut summary.retries)?;
            summary.batches_sent += 1;
            summary.samples_sent += batch.len();
            if ack.next_expected_seq != i as u64 + 1 {
                summary.gaps += 1;
            }
        }
        Ok(summary)
    }
}
