//! Chat-completion backend over HTTP.
//!
//! The wire format is the widely used chat schema: ordered role/content
//! messages plus model name, temperature and max_tokens, posted to
//! `{endpoint}/chat/completions` with an optional bearer token taken from
//! an environment variable. Any compatible vendor or local server works.

use super::{Agent, AgentError, ChatMessage, LlmParams};
use serde::Deserialize;
use serde_json::json;
use std::time::Duration;

pub struct LlmAgent {
    id: String,
    params: LlmParams,
    client: reqwest::blocking::Client,
}

#[derive(Deserialize)]
struct CompletionResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChoiceMessage,
}

#[derive(Deserialize)]
struct ChoiceMessage {
    content: String,
}

impl LlmAgent {
    pub fn new(id: String, params: LlmParams) -> Result<Self, AgentError> {
        params.validate()?;
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(params.timeout_secs))
            .build()
            .map_err(|e| AgentError::InvalidSpec(format!("http client: {e}")))?;
        Ok(LlmAgent { id, params, client })
    }

    fn completions_url(&self) -> String {
        format!(
            "{}/chat/completions",
            self.params.endpoint.trim_end_matches('/')
        )
    }

    fn api_key(&self) -> Result<Option<String>, AgentError> {
        match &self.params.api_key_env {
            None => Ok(None),
            Some(var) => match std::env::var(var) {
                Ok(value) => Ok(Some(value)),
                Err(_) => Err(AgentError::MissingCredentials(var.clone())),
            },
        }
    }

    fn attempt(&self, body: &serde_json::Value, key: &Option<String>) -> AttemptOutcome {
        let mut request = self.client.post(self.completions_url()).json(body);
        if let Some(key) = key {
            request = request.bearer_auth(key);
        }
        let response = match request.send() {
            Ok(r) => r,
            Err(e) => return AttemptOutcome::Retry(format!("transport: {e}")),
        };
        let status = response.status();
        if status.as_u16() == 429 || status.is_server_error() {
            return AttemptOutcome::Retry(format!("status {status}"));
        }
        if !status.is_success() {
            let body = response.text().unwrap_or_default();
            return AttemptOutcome::Reject(format!("status {status}: {}", truncate(&body, 300)));
        }
        match response.json::<CompletionResponse>() {
            Ok(parsed) => match parsed.choices.into_iter().next() {
                Some(choice) => AttemptOutcome::Done(choice.message.content),
                None => AttemptOutcome::Reject("response carried no choices".into()),
            },
            Err(e) => AttemptOutcome::Reject(format!("unreadable response body: {e}")),
        }
    }
}

enum AttemptOutcome {
    Done(String),
    Retry(String),
    Reject(String),
}

fn truncate(text: &str, limit: usize) -> String {
    if text.len() <= limit {
        text.to_string()
    } else {
        let mut end = limit;
        while !text.is_char_boundary(end) {
            end -= 1;
        }
        format!("{}…", &text[..end])
    }
}

impl Agent for LlmAgent {
    fn id(&self) -> &str {
        &self.id
    }

    fn next_message(&mut self, view: &[ChatMessage]) -> Result<String, AgentError> {
        let key = self.api_key()?;
        let body = json!({
            "model": self.params.model,
            "messages": view
                .iter()
                .map(|m| json!({ "role": m.role.as_str(), "content": m.content }))
                .collect::<Vec<_>>(),
            "temperature": self.params.temperature,
            "max_tokens": self.params.max_tokens,
        });

        let attempts = self.params.retry_budget.max(1);
        let mut last_error = String::new();
        for attempt in 0..attempts {
            if attempt > 0 {
                let backoff = self
                    .params
                    .backoff_base_ms
                    .saturating_mul(1 << (attempt - 1));
                std::thread::sleep(Duration::from_millis(backoff));
            }
            match self.attempt(&body, &key) {
                AttemptOutcome::Done(text) => return Ok(text),
                AttemptOutcome::Reject(reason) => return Err(AgentError::BackendRejection(reason)),
                AttemptOutcome::Retry(reason) => last_error = reason,
            }
        }
        Err(AgentError::BackendTimeout {
            attempts,
            last_error,
        })
    }
}
