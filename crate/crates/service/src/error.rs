use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde_json::json;

use geopulse_core::ingest::LoadError;
use geopulse_core::pipeline::{ConfigError, OptimizeError, RunError, SweepError};
use geopulse_core::trigger::TriggerError;

/// Error body: `{"error": {"code", "message"}}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
        }
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", message)
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    pub fn unprocessable(message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, "unprocessable", message)
    }

    pub fn conflict(message: impl Into<String>) -> Self {
        Self::new(StatusCode::CONFLICT, "conflict", message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({"error": {"code": self.code, "message": self.message}});
        (self.status, Json(body)).into_response()
    }
}

impl From<ConfigError> for ApiError {
    fn from(e: ConfigError) -> Self {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_config", e.to_string())
    }
}

impl From<RunError> for ApiError {
    fn from(e: RunError) -> Self {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "engine_error", e.to_string())
    }
}

impl From<LoadError> for ApiError {
    fn from(e: LoadError) -> Self {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "data_error", e.to_string())
    }
}

impl From<SweepError> for ApiError {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::Run(r) => r.into(),
            SweepError::Config { .. } => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_config", e.to_string())
            }
            SweepError::UnknownComponent(_) | SweepError::EmptyGrid => ApiError::unprocessable(e.to_string()),
        }
    }
}

impl From<OptimizeError> for ApiError {
    fn from(e: OptimizeError) -> Self {
        match e {
            OptimizeError::Config(c) => c.into(),
            OptimizeError::MissingCost(_) => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "missing_cost", e.to_string())
            }
            OptimizeError::Infeasible => ApiError::unprocessable(e.to_string()),
        }
    }
}

impl From<TriggerError> for ApiError {
    fn from(e: TriggerError) -> Self {
        ApiError::unprocessable(e.to_string())
    }
}
