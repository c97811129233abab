//! Scripted offline backend.
//!
//! A script is JSONL; each entry selects requests and describes the reply:
//!
//! ```json
//! {"fingerprint": "ab12...", "output_text": "...", "usage": {"prompt_tokens": 100, "reasoning_tokens": 400, "completion_tokens": 50}}
//! {"match": {"sample": "s3", "task": "refactor", "tag": "smell_tips"}, "usage": {...}, "seconds": 10.0}
//! {"order": 7, "fail_times": 2, "fail_status": 429, "usage": {...}}
//! {"default": true, "output_text": "{{input_code}}"}
//! ```
//!
//! Fingerprint entries are checked first, then the remaining entries in file
//! order; the first whose selectors all match wins. `{{input_code}}` in
//! `output_text` is replaced by the first fenced code block of the user
//! message. `fail_times` failures are served per distinct request before the
//! reply succeeds.

use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use super::{AttemptError, BackendConfig, ChatBackend, GatewayError, RawResponse, RequestMeta};
use crate::prompt::TaskKind;

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<TaskKind>,
    /// Must be one of the bundle's strategy tags.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag: Option<String>,
    /// Strategy row label.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
}

impl MatchSpec {
    fn matches(&self, meta: &RequestMeta) -> bool {
        self.sample.as_ref().is_none_or(|s| *s == meta.sample_id)
            && self.task.is_none_or(|t| Some(t) == meta.task)
            && self.tag.as_ref().is_none_or(|t| meta.tags.contains(t))
            && self.label.as_ref().is_none_or(|l| *l == meta.label)
            && self.variant.as_ref().is_none_or(|v| *v == meta.variant)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptUsage {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt_tokens: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reasoning_tokens: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub completion_tokens: Option<u64>,
}

fn default_fail_status() -> u16 {
    429
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fingerprint: Option<String>,
    #[serde(default, rename = "match", skip_serializing_if = "Option::is_none")]
    pub matcher: Option<MatchSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<u64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub default: bool,
    #[serde(default)]
    pub output_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub usage: Option<ScriptUsage>,
    #[serde(default)]
    pub fail_times: u32,
    #[serde(default = "default_fail_status")]
    pub fail_status: u16,
    /// Simulated latency reported as the trial's wall time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seconds: Option<f64>,
}

impl ScriptEntry {
    fn has_selector(&self) -> bool {
        self.fingerprint.is_some() || self.matcher.is_some() || self.order.is_some() || self.default
    }

    fn selects(&self, fingerprint: &str, meta: &RequestMeta) -> bool {
        self.fingerprint.as_ref().is_none_or(|f| f == fingerprint)
            && self.matcher.as_ref().is_none_or(|m| m.matches(meta))
            && self.order.is_none_or(|o| o == meta.ordinal)
    }
}

/// Latency used when an entry does not script one.
pub const DEFAULT_MOCK_SECONDS: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MockScript {
    pub entries: Vec<ScriptEntry>,
}

impl MockScript {
    pub fn parse(text: &str) -> Result<Self, GatewayError> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let entry: ScriptEntry = serde_json::from_str(line)
                .map_err(|e| GatewayError::Script(format!("line {}: {e}", i + 1)))?;
            if !entry.has_selector() {
                return Err(GatewayError::Script(format!(
                    "line {}: entry has no selector",
                    i + 1
                )));
            }
            if entry.seconds.is_some_and(|s| s.is_nan() || s <= 0.0) {
                return Err(GatewayError::Script(format!(
                    "line {}: seconds must be positive",
                    i + 1
                )));
            }
            entries.push(entry);
        }
        Ok(Self { entries })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, GatewayError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| GatewayError::Script(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_jsonl(&self) -> String {
        self.entries
            .iter()
            .map(|e| serde_json::to_string(e).expect("entry serializes") + "\n")
            .collect()
    }

    fn select(&self, fingerprint: &str, meta: &RequestMeta) -> Option<usize> {
        let pinned = self
            .entries
            .iter()
            .position(|e| e.fingerprint.is_some() && e.selects(fingerprint, meta));
        pinned.or_else(|| {
            self.entries
                .iter()
                .position(|e| e.fingerprint.is_none() && e.selects(fingerprint, meta))
        })
    }
}

#[derive(Debug, Default)]
pub struct MockBackend {
    script: MockScript,
    failures: Mutex<HashMap<(usize, String), u32>>,
    captured: Mutex<Vec<Value>>,
}

impl MockBackend {
    pub fn new(script: MockScript) -> Self {
        Self {
            script,
            ..Self::default()
        }
    }

    /// Every request body received, in arrival order.
    pub fn captured(&self) -> Vec<Value> {
        self.captured.lock().expect("capture lock").clone()
    }
}

/// First fenced code block in `text`: the lines between a line-opening
/// fence and the next closing fence.
pub fn first_code_block(text: &str) -> Option<&str> {
    let mut search = 0;
    while let Some(rel) = text[search..].find("```") {
        let open = search + rel;
        let line_start = open == 0 || text.as_bytes()[open - 1] == b'\n';
        let nl = text[open..].find('\n')?;
        let info = text[open + 3..open + nl].trim();
        if line_start && !info.contains(' ') {
            let body_start = open + nl + 1;
            let close = text[body_start..].find("\n```").map(|c| body_start + c)?;
            return Some(&text[body_start..close]);
        }
        search = open + 3;
    }
    None
}

fn insert_path(target: &mut Map<String, Value>, dotted: &str, value: Value) {
    let mut parts: Vec<&str> = dotted.split('.').collect();
    let last = parts.pop().expect("non-empty path");
    let mut cur = target;
    for p in parts {
        cur = cur
            .entry(p.to_string())
            .or_insert_with(|| Value::Object(Map::new()))
            .as_object_mut()
            .expect("usage path collides with a scalar");
    }
    cur.insert(last.to_string(), value);
}

impl ChatBackend for MockBackend {
    fn id(&self) -> String {
        "mock".into()
    }

    fn is_simulated(&self) -> bool {
        true
    }

    fn send(
        &self,
        body: &Value,
        config: &BackendConfig,
        meta: &RequestMeta,
    ) -> Result<RawResponse, AttemptError> {
        self.captured
            .lock()
            .expect("capture lock")
            .push(body.clone());
        let fingerprint = super::sent_fingerprint(body).unwrap_or_default();
        let idx = self.script.select(&fingerprint, meta).ok_or_else(|| {
            AttemptError::Fatal(GatewayError::Script(format!(
                "no entry for sample `{}` task {:?} tags {:?} (fingerprint {fingerprint})",
                meta.sample_id, meta.task, meta.tags
            )))
        })?;
        let entry = &self.script.entries[idx];

        if entry.fail_times > 0 {
            let mut failures = self.failures.lock().expect("failure lock");
            let served = failures.entry((idx, fingerprint.clone())).or_insert(0);
            if *served < entry.fail_times {
                *served += 1;
                return Err(match entry.fail_status {
                    401 | 403 => AttemptError::Auth(entry.fail_status),
                    s if s == 429 || s >= 500 => AttemptError::Transient(format!("HTTP {s}")),
                    s => AttemptError::Fatal(GatewayError::Rejected(format!("HTTP {s}"))),
                });
            }
        }

        let user = body["messages"]
            .as_array()
            .and_then(|m| m.iter().find(|m| m["role"] == "user"))
            .and_then(|m| m["content"].as_str())
            .unwrap_or("");
        let output = entry
            .output_text
            .replace("{{input_code}}", first_code_block(user).unwrap_or(""));

        let mut response = json!({
            "choices": [{"index": 0, "message": {"role": "assistant", "content": output}}],
        });
        if let Some(u) = entry.usage {
            let mut usage = Map::new();
            if let Some(p) = u.prompt_tokens {
                usage.insert("prompt_tokens".into(), json!(p));
            }
            let reasoning = u.reasoning_tokens.unwrap_or(0);
            if let Some(c) = u.completion_tokens {
                let reported = if config.completion_includes_reasoning {
                    c + reasoning
                } else {
                    c
                };
                usage.insert("completion_tokens".into(), json!(reported));
            }
            if let Some(r) = u.reasoning_tokens {
                insert_path(&mut usage, &config.reasoning_field, json!(r));
            }
            response["usage"] = Value::Object(usage);
        }
        Ok(RawResponse {
            body: response,
            simulated_seconds: Some(entry.seconds.unwrap_or(DEFAULT_MOCK_SECONDS)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn code_block_skips_inline_fence_mentions() {
        let text = "Return it in a single ```java code block.\n\n```java\nint x = 1;\n```\n";
        assert_eq!(first_code_block(text), Some("int x = 1;"));
        assert_eq!(first_code_block("no fences"), None);
    }

    #[test]
    fn selection_precedence() {
        let script = MockScript::parse(concat!(
            r#"{"default":true,"output_text":"d"}"#,
            "\n",
            r#"{"match":{"sample":"a"},"output_text":"m"}"#,
            "\n",
            r#"{"fingerprint":"f1","output_text":"f"}"#,
        ))
        .unwrap();
        let meta = |s: &str| RequestMeta {
            sample_id: s.into(),
            ..RequestMeta::default()
        };
        // file order among unpinned entries: the default line comes first
        assert_eq!(script.select("zz", &meta("a")), Some(0));
        assert_eq!(script.select("f1", &meta("b")), Some(2));
    }

    #[test]
    fn rejects_entries_without_selector() {
        assert!(MockScript::parse(r#"{"output_text":"x"}"#).is_err());
        assert!(MockScript::parse(r#"{"default":true,"bogus":1}"#).is_err());
    }
}
