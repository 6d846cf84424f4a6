use std::time::Duration;

use crate::{ChatBackend, ChatRequest, ChatResponse, GatewayError};

/// Exponential backoff schedule for transient failures.
#[derive(Debug, Clone, PartialEq)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub initial_backoff: Duration,
    pub multiplier: f64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_attempts: 3,
            initial_backoff: Duration::from_secs(1),
            multiplier: 2.0,
        }
    }
}

impl RetryPolicy {
    /// No waiting between attempts; used by tests and replay runs.
    pub fn immediate(max_attempts: u32) -> Self {
        Self {
            max_attempts,
            initial_backoff: Duration::ZERO,
            multiplier: 1.0,
        }
    }

    /// Delay before retry number `retry` (1-based).
    pub fn backoff(&self, retry: u32) -> Duration {
        let factor = self.multiplier.powi(retry.saturating_sub(1) as i32);
        self.initial_backoff.mul_f64(factor.max(0.0))
    }
}

/// Issues `request`, retrying retryable failures up to `policy.max_attempts` times.
///
/// Non-retryable errors are returned as-is on first occurrence. Content-level
/// problems (an unparseable answer) are not errors here at all.
pub fn with_retry(
    backend: &mut dyn ChatBackend,
    request: &ChatRequest,
    policy: &RetryPolicy,
) -> Result<ChatResponse, GatewayError> {
    let attempts = policy.max_attempts.max(1);
    let mut last = None;
    for attempt in 1..=attempts {
        if attempt > 1 {
            let delay = policy.backoff(attempt - 1);
            if !delay.is_zero() {
                std::thread::sleep(delay);
            }
        }
        match backend.complete(request) {
            Ok(response) => return Ok(response),
            Err(err) if err.is_retryable() => {
                log::warn!("chat attempt {attempt}/{attempts} failed: {err}");
                last = Some(err);
            }
            Err(err) => return Err(err),
        }
    }
    Err(GatewayError::AllAttemptsFailed {
        attempts,
        last: Box::new(last.expect("at least one attempt was made")),
    })
}
