use std::sync::{Condvar, Mutex};
use std::time::Instant;

use serde::Deserialize;
use serde_json::json;

use super::{BackendConfig, LlmBackend, LlmError, LlmRequest, LlmResponse, Usage};

/// Counting semaphore capping in-flight requests.
struct Gate {
    busy: Mutex<usize>,
    freed: Condvar,
    cap: usize,
}

impl Gate {
    fn enter(&self) -> GateGuard<'_> {
        let mut busy = self.busy.lock().expect("gate lock");
        while *busy >= self.cap {
            busy = self.freed.wait(busy).expect("gate lock");
        }
        *busy += 1;
        GateGuard(self)
    }
}

struct GateGuard<'a>(&'a Gate);

impl Drop for GateGuard<'_> {
    fn drop(&mut self) {
        *self.0.busy.lock().expect("gate lock") -= 1;
        self.0.freed.notify_one();
    }
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
    #[serde(default)]
    usage: Option<Usage>,
}

#[derive(Deserialize)]
struct Choice {
    message: Message,
}

#[derive(Deserialize)]
struct Message {
    #[serde(default)]
    content: Option<String>,
}

enum Outcome {
    Done(LlmResponse),
    Retry(String),
    Fatal(LlmError),
}

/// OpenAI-compatible `/chat/completions` client.
pub struct HttpBackend {
    config: BackendConfig,
    url: String,
    agent: ureq::Agent,
    gate: Gate,
}

impl HttpBackend {
    pub fn new(config: BackendConfig) -> Result<Self, LlmError> {
        config.validate()?;
        let base = config.endpoint.clone().unwrap_or_default();
        let url = format!("{}/chat/completions", base.trim_end_matches('/'));
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        let gate = Gate {
            busy: Mutex::new(0),
            freed: Condvar::new(),
            cap: config.max_in_flight,
        };
        Ok(HttpBackend {
            config,
            url,
            agent,
            gate,
        })
    }

    fn api_key(&self) -> Result<Option<String>, LlmError> {
        let var = &self.config.api_key_env;
        if var.is_empty() {
            return Ok(None);
        }
        match std::env::var(var) {
            Ok(k) if !k.is_empty() => Ok(Some(k)),
            _ => Err(LlmError::Auth(format!(
                "environment variable {var} is not set"
            ))),
        }
    }

    fn attempt(&self, body: &serde_json::Value, key: Option<&str>) -> Outcome {
        let start = Instant::now();
        let mut req = self.agent.post(&self.url);
        if let Some(k) = key {
            req = req.header("Authorization", format!("Bearer {k}"));
        }
        let mut resp = match req.send_json(body) {
            Ok(r) => r,
            Err(e) => return Outcome::Retry(e.to_string()),
        };
        let status = resp.status().as_u16();
        let text = match resp.body_mut().read_to_string() {
            Ok(t) => t,
            Err(e) => return Outcome::Retry(e.to_string()),
        };
        match status {
            401 | 403 => Outcome::Fatal(LlmError::Auth(format!("HTTP {status}"))),
            429 | 500..=599 => Outcome::Retry(format!("HTTP {status}")),
            200..=299 => match serde_json::from_str::<ChatResponse>(&text) {
                Ok(chat) => match chat
                    .choices
                    .into_iter()
                    .next()
                    .and_then(|c| c.message.content)
                {
                    Some(content) => Outcome::Done(LlmResponse {
                        text: content,
                        usage: chat.usage.unwrap_or_default(),
                        latency_ms: start.elapsed().as_millis() as u64,
                    }),
                    None => Outcome::Fatal(LlmError::Transport {
                        attempts: 1,
                        message: "response has no message content".into(),
                    }),
                },
                Err(e) => Outcome::Fatal(LlmError::Transport {
                    attempts: 1,
                    message: format!("malformed response: {e}"),
                }),
            },
            _ => Outcome::Fatal(LlmError::Transport {
                attempts: 1,
                message: format!(
                    "HTTP {status}: {}",
                    text.chars().take(200).collect::<String>()
                ),
            }),
        }
    }
}

impl LlmBackend for HttpBackend {
    fn complete(&self, request: &LlmRequest) -> Result<LlmResponse, LlmError> {
        let key = self.api_key()?;
        let body = json!({
            "model": request.model,
            "messages": [
                {"role": "system", "content": request.system_prompt},
                {"role": "user", "content": request.user_prompt},
            ],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        });
        let _slot = self.gate.enter();
        let delays = self.config.backoff_delays();
        let mut attempts = 0;
        loop {
            attempts += 1;
            match self.attempt(&body, key.as_deref()) {
                Outcome::Done(r) => return Ok(r),
                Outcome::Fatal(LlmError::Transport { message, .. }) => {
                    return Err(LlmError::Transport { attempts, message })
                }
                Outcome::Fatal(e) => return Err(e),
                Outcome::Retry(message) => match delays.get(attempts as usize - 1) {
                    Some(d) => {
                        log::warn!("LLM call failed ({message}); retrying in {d:?}");
                        std::thread::sleep(*d);
                    }
                    None => return Err(LlmError::Transport { attempts, message }),
                },
            }
        }
    }
}
