use conic::{BoundResult, Residuals, Status};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "sdp")]
    Sdp,
    #[serde(rename = "delsarte-lp")]
    DelsarteLp,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Sdp => "sdp",
            Method::DelsarteLp => "delsarte-lp",
        }
    }
}

/// One solve, as written to stdout by `bound`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub n: u32,
    pub d: u32,
    pub method: Method,
    /// Present for the SDP only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<String>,
    pub status: Status,
    pub objective: f64,
    pub dual_objective: f64,
    pub bound: i64,
    pub iterations: usize,
    pub residuals: Residuals,
    pub min_block_eigenvalues: Vec<f64>,
    pub wall_time_ms: u64,
    pub tool_version: String,
    pub config_hash: String,
    pub timestamp: String,
}

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

impl RunRecord {
    pub fn new(
        n: u32,
        d: u32,
        method: Method,
        coefficients: Option<String>,
        r: &BoundResult,
        config_hash: String,
    ) -> Self {
        Self {
            n,
            d,
            method,
            coefficients,
            status: r.status,
            objective: r.objective,
            dual_objective: r.dual_objective,
            bound: r.bound,
            iterations: r.iterations,
            residuals: r.residuals,
            // JSON has no NaN
            min_block_eigenvalues: r
                .min_block_eigenvalues
                .iter()
                .map(|&v| if v.is_finite() { v } else { f64::MIN })
                .collect(),
            wall_time_ms: r.wall_time_ms,
            tool_version: TOOL_VERSION.to_string(),
            config_hash,
            timestamp: timestamp(),
        }
    }
}
