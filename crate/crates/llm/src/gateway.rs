use crate::{with_retry, ChatBackend, ChatRequest, ChatResponse, GatewayError, RetryPolicy};

/// Running totals over the gateway's lifetime.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Usage {
    pub completions: u64,
    pub failures: u64,
    pub input_tokens: u64,
    pub output_tokens: u64,
}

/// Backend plus retry policy plus accounting. Prompts go out as a single user
/// message at the engine temperature, byte for byte.
pub struct Gateway {
    backend: Box<dyn ChatBackend>,
    model: String,
    retry: RetryPolicy,
    usage: Usage,
}

impl Gateway {
    pub fn new(backend: Box<dyn ChatBackend>, model: impl Into<String>, retry: RetryPolicy) -> Self {
        Self {
            backend,
            model: model.into(),
            retry,
            usage: Usage::default(),
        }
    }

    pub fn complete_prompt(&mut self, prompt: &str) -> Result<ChatResponse, GatewayError> {
        let request = ChatRequest::single_user(self.model.clone(), prompt);
        match with_retry(self.backend.as_mut(), &request, &self.retry) {
            Ok(response) => {
                self.usage.completions += 1;
                if let Some(tokens) = response.token_counts {
                    self.usage.input_tokens += tokens.input;
                    self.usage.output_tokens += tokens.output;
                }
                Ok(response)
            }
            Err(err) => {
                self.usage.failures += 1;
                Err(err)
            }
        }
    }

    pub fn usage(&self) -> Usage {
        self.usage
    }

    pub fn model(&self) -> &str {
        &self.model
    }

    pub fn cursor(&self) -> Option<usize> {
        self.backend.cursor()
    }

    pub fn seek(&mut self, cursor: usize) -> Result<(), GatewayError> {
        self.backend.seek(cursor)
    }
}

impl std::fmt::Debug for Gateway {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Gateway")
            .field("model", &self.model)
            .field("retry", &self.retry)
            .field("usage", &self.usage)
            .finish()
    }
}
