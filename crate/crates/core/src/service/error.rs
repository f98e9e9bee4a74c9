use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;

use crate::api::ProofNodeView;
use crate::parser::ParseError;
use crate::proof::ProofError;
use crate::solver::SolveError;
use crate::store::StoreError;

/// Error body of every failed request.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub position: Option<Position>,
    /// The unchanged proof tree, for rejected proof operations.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tree: Option<Box<ProofNodeView>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
            position: None,
            tree: None,
        }
    }

    pub fn with_tree(mut self, tree: ProofNodeView) -> Self {
        self.tree = Some(Box::new(tree));
        self
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    pub fn payload_too_large(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::PAYLOAD_TOO_LARGE, "payload_too_large", message)
    }

    pub fn proof_not_found(id: &str) -> Self {
        ApiError::new(
            StatusCode::NOT_FOUND,
            "proof_not_found",
            format!("proof session `{id}` not found"),
        )
    }

    pub fn no_route() -> Self {
        ApiError::new(StatusCode::NOT_FOUND, "no_route", "no such endpoint")
    }

    pub fn timeout() -> Self {
        ApiError::new(
            StatusCode::SERVICE_UNAVAILABLE,
            "timeout",
            "the request did not finish in time",
        )
    }

    pub fn internal(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl From<ParseError> for ApiError {
    fn from(e: ParseError) -> Self {
        let code = match e {
            ParseError::Unexpected { .. } => "parse_error",
            ParseError::BareVariableHead { .. } => "variable_head",
        };
        let pos = e.position();
        let mut err = ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, code, e.to_string());
        err.position = Some(Position {
            line: pos.line,
            column: pos.column,
        });
        err
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let (status, code) = match &e {
            StoreError::Parse(p) => return p.clone().into(),
            StoreError::InvalidId(_) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_id"),
            StoreError::AlreadyExists(_) => (StatusCode::CONFLICT, "already_exists"),
            StoreError::NotFound(_) => (StatusCode::NOT_FOUND, "not_found"),
            StoreError::BadIndex { .. } => (StatusCode::NOT_FOUND, "bad_index"),
            StoreError::Corrupt { .. } => (StatusCode::INTERNAL_SERVER_ERROR, "corrupt_workspace"),
            StoreError::Io(_) => (StatusCode::INTERNAL_SERVER_ERROR, "storage_error"),
        };
        ApiError::new(status, code, e.to_string())
    }
}

impl From<SolveError> for ApiError {
    fn from(e: SolveError) -> Self {
        let code = match e {
            SolveError::EmptyQuery => "empty_query",
            SolveError::InvalidOption(_) => "invalid_option",
        };
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, code, e.to_string())
    }
}

impl From<ProofError> for ApiError {
    fn from(e: ProofError) -> Self {
        let (status, code) = match e {
            ProofError::BadPath(_) => (StatusCode::NOT_FOUND, "bad_path"),
            ProofError::NodeNotOpen => (StatusCode::CONFLICT, "node_not_open"),
            ProofError::UnificationFailed => (StatusCode::CONFLICT, "unification_failed"),
            ProofError::EmptyHistory => (StatusCode::CONFLICT, "empty_history"),
            ProofError::ReplayMismatch { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "replay_mismatch"),
            ProofError::InvalidVariable(_) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_variable"),
            ProofError::Cyclic(_) => (StatusCode::CONFLICT, "budget_exhausted"),
        };
        ApiError::new(status, code, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(&self)).into_response()
    }
}
