//! Wire messages: one JSON object per line.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Message {
    Publish { user: String, terms: BTreeMap<String, f64> },
    Ack,
    Experts { terms: Vec<String> },
    Answer { per_term: BTreeMap<String, Vec<(String, f64)>> },
    Error { msg: String },
}

impl Message {
    pub fn to_line(&self) -> String {
        let mut s = serde_json::to_string(self).expect("messages always serialize");
        s.push('\n');
        s
    }

    pub fn from_line(line: &str) -> Result<Self> {
        serde_json::from_str(line.trim_end()).map_err(|e| Error::Protocol(e.to_string()))
    }
}
