//! Chat-completion access for the heuristic search engine.
//!
//! Two backends share the [`ChatBackend`] trait: [`HttpBackend`] speaks the
//! OpenAI-compatible `/chat/completions` protocol, and [`ReplayBackend`] returns
//! scripted responses so that whole runs can be reproduced bit for bit.
//! [`Gateway`] wraps a backend with retry handling and usage accounting.

mod error;
mod gateway;
mod http;
mod replay;
mod retry;
mod types;

pub use error::GatewayError;
pub use gateway::{Gateway, Usage};
pub use http::{HttpBackend, HttpConfig, ENV_API_BASE, ENV_API_KEY, ENV_MODEL};
pub use replay::{ReplayBackend, ReplayScript};
pub use retry::{with_retry, RetryPolicy};
pub use types::{ChatMessage, ChatRequest, ChatResponse, Role, TokenCounts, ENGINE_TEMPERATURE};

/// A source of chat completions.
pub trait ChatBackend: Send {
    fn complete(&mut self, request: &ChatRequest) -> Result<ChatResponse, GatewayError>;

    /// Position in a scripted response stream, for backends that have one.
    fn cursor(&self) -> Option<usize> {
        None
    }

    /// Moves a scripted backend to `cursor`. Live backends ignore this.
    fn seek(&mut self, _cursor: usize) -> Result<(), GatewayError> {
        Ok(())
    }
}
