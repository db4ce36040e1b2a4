use std::fmt;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::llm::{Script, ScriptEntry};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Actor,
    Critic,
    Translator,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Actor => "actor",
            Role::Critic => "critic",
            Role::Translator => "translator",
        })
    }
}

/// One LLM exchange. For the translator, `iteration` is the translation
/// attempt of the batch.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub role: Role,
    pub attempt: usize,
    pub iteration: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch: Option<usize>,
    pub system: String,
    pub prompt: String,
    pub response: String,
    pub timestamp: String,
}

/// Append-only log of LLM exchanges, safe to share between threads.
#[derive(Debug, Default)]
pub struct Transcript {
    records: Mutex<Vec<TranscriptRecord>>,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&self, record: TranscriptRecord) {
        self.records.lock().expect("transcript lock").push(record);
    }

    pub fn extend(&self, records: impl IntoIterator<Item = TranscriptRecord>) {
        self.records
            .lock()
            .expect("transcript lock")
            .extend(records);
    }

    pub fn len(&self) -> usize {
        self.records.lock().expect("transcript lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn records(&self) -> Vec<TranscriptRecord> {
        self.records.lock().expect("transcript lock").clone()
    }

    pub fn count(&self, role: Role) -> usize {
        self.records
            .lock()
            .expect("transcript lock")
            .iter()
            .filter(|r| r.role == role)
            .count()
    }
}

pub fn to_jsonl(records: &[TranscriptRecord]) -> String {
    records
        .iter()
        .map(|r| serde_json::to_string(r).expect("record serializes") + "\n")
        .collect()
}

pub fn from_jsonl(text: &str) -> Result<Vec<TranscriptRecord>, serde_json::Error> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}

/// A script that answers the same prompts with the same responses. Each
/// entry matches on its full user prompt, so replay does not depend on the
/// order in which concurrent batches reach the backend.
pub fn replay_script(records: &[TranscriptRecord]) -> Script {
    records
        .iter()
        .map(|r| ScriptEntry::on(r.prompt.clone(), r.response.clone()))
        .collect()
}
