use std::path::Path;
use std::time::Instant;

use crate::{ChatBackend, ChatRequest, ChatResponse, GatewayError};

/// An ordered list of canned response texts.
///
/// On disk a script is one record per line. Inside a record `\n`, `\r`, `\t`
/// and `\\` stand for newline, carriage return, tab and a literal backslash.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReplayScript {
    pub responses: Vec<String>,
}

impl ReplayScript {
    pub fn new(responses: Vec<String>) -> Self {
        Self { responses }
    }

    pub fn parse(text: &str) -> Self {
        Self {
            responses: text.lines().map(unescape_record).collect(),
        }
    }

    pub fn load(path: &Path) -> std::io::Result<Self> {
        Ok(Self::parse(&std::fs::read_to_string(path)?))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for response in &self.responses {
            out.push_str(&escape_record(response));
            out.push('\n');
        }
        out
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }
}

pub(crate) fn escape_record(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            other => out.push(other),
        }
    }
    out
}

pub(crate) fn unescape_record(line: &str) -> String {
    let mut out = String::with_capacity(line.len());
    let mut chars = line.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some('t') => out.push('\t'),
            Some('\\') => out.push('\\'),
            // Unknown escapes are kept verbatim.
            Some(other) => {
                out.push('\\');
                out.push(other);
            }
            None => out.push('\\'),
        }
    }
    out
}

/// Deterministic backend returning scripted texts in order.
///
/// Every request is recorded so tests can compare request sequences across runs.
#[derive(Debug, Clone, Default)]
pub struct ReplayBackend {
    script: ReplayScript,
    cursor: usize,
    transcript: Vec<ChatRequest>,
}

impl ReplayBackend {
    pub fn new(script: ReplayScript) -> Self {
        Self {
            script,
            cursor: 0,
            transcript: Vec::new(),
        }
    }

    pub fn remaining(&self) -> usize {
        self.script.len() - self.cursor
    }

    pub fn transcript(&self) -> &[ChatRequest] {
        &self.transcript
    }
}

impl ChatBackend for ReplayBackend {
    fn complete(&mut self, request: &ChatRequest) -> Result<ChatResponse, GatewayError> {
        let started = Instant::now();
        let text = self
            .script
            .responses
            .get(self.cursor)
            .cloned()
            .ok_or(GatewayError::ReplayExhausted {
                consumed: self.cursor,
            })?;
        self.cursor += 1;
        self.transcript.push(request.clone());
        Ok(ChatResponse {
            text,
            token_counts: None,
            latency_ms: started.elapsed().as_millis() as u64,
        })
    }

    fn cursor(&self) -> Option<usize> {
        Some(self.cursor)
    }

    fn seek(&mut self, cursor: usize) -> Result<(), GatewayError> {
        if cursor > self.script.len() {
            return Err(GatewayError::InvalidCursor {
                cursor,
                len: self.script.len(),
            });
        }
        self.cursor = cursor;
        Ok(())
    }
}
