use axum::extract::rejection::JsonRejection;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use mhcd_core::protocol::ErrorBody;
use mhcd_core::Error;

/// Error returned by every endpoint, rendered as an [`ErrorBody`].
#[derive(Debug)]
pub enum ApiError {
    Core(Error),
    NotFound(String),
    BadRequest(String),
    Internal(String),
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError::Core(e)
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::BadRequest(e.body_text())
    }
}

pub fn kind(e: &Error) -> &'static str {
    match e {
        Error::Input(_) => "input",
        Error::Parse { .. } => "parse",
        Error::Domain(_) => "domain",
        Error::UnknownNode(_) => "unknown-node",
        Error::DeadCommunity(_) => "dead-community",
        Error::Contract(_) => "contract",
        Error::LevelOutOfRange { .. } => "level-out-of-range",
        Error::TooLarge { .. } => "too-large",
        Error::Stream { .. } => "stream",
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, kind, message) = match self {
            ApiError::Core(e @ Error::Contract(_)) => (StatusCode::INTERNAL_SERVER_ERROR, kind(&e), e.to_string()),
            ApiError::Core(e) => (StatusCode::BAD_REQUEST, kind(&e), e.to_string()),
            ApiError::NotFound(m) => (StatusCode::NOT_FOUND, "not-found", m),
            ApiError::BadRequest(m) => (StatusCode::BAD_REQUEST, "bad-request", m),
            ApiError::Internal(m) => (StatusCode::INTERNAL_SERVER_ERROR, "internal", m),
        };
        let body = ErrorBody {
            kind: kind.into(),
            message,
        };
        (status, Json(body)).into_response()
    }
}
