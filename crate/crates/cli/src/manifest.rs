//! Run manifest: per-instrument outcome of a batch extraction plus the
//! configuration snapshot that produced it.

use std::path::PathBuf;

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct ConfigSnapshot {
    pub images: PathBuf,
    pub metadata: Option<PathBuf>,
    pub out: PathBuf,
    pub n_resample: usize,
    pub sigma: f64,
    pub period_bounds: [i32; 4],
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct InstrumentStatus {
    pub id: String,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_kind: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl InstrumentStatus {
    pub fn ok(id: &str) -> Self {
        Self { id: id.to_string(), status: "ok", error_kind: None, message: None }
    }

    pub fn failed(id: &str, kind: &str, message: String) -> Self {
        Self {
            id: id.to_string(),
            status: "failed",
            error_kind: Some(kind.to_string()),
            message: Some(message),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool_version: &'static str,
    pub created: String,
    pub config: ConfigSnapshot,
    pub instruments: Vec<InstrumentStatus>,
}

impl RunManifest {
    pub fn new(config: ConfigSnapshot, instruments: Vec<InstrumentStatus>) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION"),
            created: timestamp(),
            config,
            instruments,
        }
    }

    pub fn failures(&self) -> usize {
        self.instruments.iter().filter(|s| s.status == "failed").count()
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        text
    }
}

/// RFC 3339 creation time. `SOURCE_DATE_EPOCH`, when set, pins the clock so
/// reruns produce byte-identical manifests.
fn timestamp() -> String {
    let secs = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.parse::<i64>().ok())
        .unwrap_or_else(|| chrono::Utc::now().timestamp());
    chrono::DateTime::<chrono::Utc>::from_timestamp(secs, 0)
        .unwrap_or_default()
        .to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}
