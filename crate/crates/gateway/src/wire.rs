//! JSON bodies of the ingestion API.

use chairlab_core::telemetry::ImuSample;
use serde::{Deserialize, Serialize};

/// POST /v1/sessions/{player_id}/{session_id}/batches
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchRequest {
    /// 0-based batch sequence number, contiguous per session.
    pub seq: u64,
    pub samples: Vec<ImuSample>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchAck {
    pub accepted_count: usize,
    pub next_expected_seq: u64,
}

/// POST /v1/sessions/{player_id}/{session_id}/close
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CloseRequest {
    pub skill: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CloseAck {
    pub player_id: String,
    pub session_id: String,
    pub skill: u8,
    pub sample_count: usize,
    pub batch_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HealthBody {
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub detail: String,
}
