use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use medkit_core::Error;
use serde_json::json;

/// Error reply: `{"error": {"code", "message"}}` with a matching status.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
        }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    pub fn not_found(what: &str, id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", format!("no {what} with id '{id}'"))
    }

    pub fn unsupported(message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNSUPPORTED_MEDIA_TYPE, "unsupported_format", message)
    }

    pub fn unprocessable(message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, "unprocessable", message)
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        match e {
            Error::UnsupportedType(_) => Self::unsupported(message),
            Error::GeometryMismatch(_)
            | Error::DegenerateMetric(_)
            | Error::InvalidStart
            | Error::DegenerateGrid(_) => Self::unprocessable(message),
            Error::Io { .. } => Self::new(StatusCode::BAD_REQUEST, "io", message),
            Error::Parse { .. }
            | Error::TruncatedData { .. }
            | Error::NotGipl(_)
            | Error::NotNifti(_)
            | Error::Decode(_)
            | Error::UnsupportedCell(_) => Self::new(StatusCode::BAD_REQUEST, "undecodable", message),
            _ => Self::bad_request(message),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "error": { "code": self.code, "message": self.message } });
        (self.status, Json(body)).into_response()
    }
}

pub type ApiResult<T> = Result<T, ApiError>;
