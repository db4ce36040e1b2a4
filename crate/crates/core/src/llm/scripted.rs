use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{LlmBackend, LlmError, LlmRequest, LlmResponse, Usage};

/// Which requests an entry may answer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScriptMatch {
    /// 1-based call number.
    Ordinal(usize),
    /// Substring of the system or user prompt.
    Substring(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptEntry {
    #[serde(rename = "match", default, skip_serializing_if = "Option::is_none")]
    pub matcher: Option<ScriptMatch>,
    pub response: String,
}

impl ScriptEntry {
    pub fn any(response: impl Into<String>) -> Self {
        ScriptEntry {
            matcher: None,
            response: response.into(),
        }
    }

    pub fn on(substring: impl Into<String>, response: impl Into<String>) -> Self {
        ScriptEntry {
            matcher: Some(ScriptMatch::Substring(substring.into())),
            response: response.into(),
        }
    }

    fn matches(&self, call: usize, req: &LlmRequest) -> bool {
        match &self.matcher {
            None => true,
            Some(ScriptMatch::Ordinal(n)) => *n == call,
            Some(ScriptMatch::Substring(s)) => {
                req.user_prompt.contains(s) || req.system_prompt.contains(s)
            }
        }
    }
}

pub type Script = Vec<ScriptEntry>;

struct State {
    used: Vec<bool>,
    calls: usize,
}

/// Answers each request with the first unused entry that matches it.
pub struct ScriptedBackend {
    entries: Script,
    state: Mutex<State>,
}

impl ScriptedBackend {
    pub fn new(entries: Script) -> Self {
        let used = vec![false; entries.len()];
        ScriptedBackend {
            entries,
            state: Mutex::new(State { used, calls: 0 }),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, LlmError> {
        serde_json::from_str(text)
            .map(Self::new)
            .map_err(|e| LlmError::InvalidConfig(format!("bad script: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Self, LlmError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LlmError::InvalidConfig(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn calls(&self) -> usize {
        self.state.lock().expect("script lock").calls
    }

    pub fn remaining(&self) -> usize {
        self.state
            .lock()
            .expect("script lock")
            .used
            .iter()
            .filter(|u| !**u)
            .count()
    }
}

impl LlmBackend for ScriptedBackend {
    fn complete(&self, request: &LlmRequest) -> Result<LlmResponse, LlmError> {
        let mut st = self.state.lock().expect("script lock");
        st.calls += 1;
        let call = st.calls;
        let hit = (0..self.entries.len())
            .find(|&i| !st.used[i] && self.entries[i].matches(call, request));
        match hit {
            Some(i) => {
                st.used[i] = true;
                Ok(LlmResponse {
                    text: self.entries[i].response.clone(),
                    usage: Usage::default(),
                    latency_ms: 0,
                })
            }
            None => Err(LlmError::ScriptExhausted { call }),
        }
    }
}
