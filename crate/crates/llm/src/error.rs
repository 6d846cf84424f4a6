use thiserror::Error;

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("transport failure: {0}")]
    Transport(String),

    #[error("endpoint returned status {status}: {body}")]
    Status { status: u16, body: String },

    #[error("malformed response body: {0}")]
    MalformedBody(String),

    #[error("replay script exhausted after {consumed} responses")]
    ReplayExhausted { consumed: usize },

    #[error("replay cursor {cursor} is past the end of a {len}-entry script")]
    InvalidCursor { cursor: usize, len: usize },

    #[error("all {attempts} attempts failed; last error: {last}")]
    AllAttemptsFailed {
        attempts: u32,
        last: Box<GatewayError>,
    },
}

impl GatewayError {
    /// Transport failures, rate limiting and server errors are worth retrying.
    pub fn is_retryable(&self) -> bool {
        match self {
            GatewayError::Transport(_) => true,
            GatewayError::Status { status, .. } => *status == 429 || *status >= 500,
            _ => false,
        }
    }
}
