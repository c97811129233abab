//! JSONL corpora of code samples.
//!
//! One JSON object per line:
//! `{"id": str, "code": str, "nl": str, "label": "smelly"|"clean", "smells": [str]?}`.
//! Two optional extension fields feed context-aware prompts: `path` (the
//! file the snippet came from) and `context` (surrounding source lines).

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::smells::SmellKind;
use crate::syntax::SourceText;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: cannot read corpus: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {reason}")]
    MalformedLine {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("{path}:{line}: duplicate id `{id}`")]
    DuplicateId {
        path: PathBuf,
        line: usize,
        id: String,
    },
    #[error("sample cap {cap} exceeds corpus size {size}")]
    CapTooLarge { cap: usize, size: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleLabel {
    Smelly,
    Clean,
    Refactored,
    Generated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceSample {
    pub id: String,
    pub code: SourceText,
    /// Natural-language description of what the code does.
    pub doc: String,
    pub label: SampleLabel,
    pub annotated_smells: Vec<SmellKind>,
    pub path: Option<String>,
    pub context: Option<String>,
}

impl SourceSample {
    pub fn new(
        id: impl Into<String>,
        code: impl Into<String>,
        doc: impl Into<String>,
        label: SampleLabel,
    ) -> Self {
        Self {
            id: id.into(),
            code: SourceText::java(code),
            doc: doc.into(),
            label,
            annotated_smells: Vec::new(),
            path: None,
            context: None,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CorpusLine {
    id: String,
    code: String,
    #[serde(default)]
    nl: String,
    label: SampleLabel,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    smells: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    context: Option<String>,
}

/// Parse a corpus from JSONL text. `origin` is only used in error messages.
pub fn parse_corpus(text: &str, origin: &Path) -> Result<Vec<SourceSample>, CorpusError> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let malformed = |reason: String| CorpusError::MalformedLine {
            path: origin.to_path_buf(),
            line,
            reason,
        };
        let entry: CorpusLine = serde_json::from_str(raw).map_err(|e| malformed(e.to_string()))?;
        if entry.code.trim().is_empty() && entry.label != SampleLabel::Generated {
            return Err(malformed(format!("sample `{}` has empty code", entry.id)));
        }
        let annotated_smells = entry
            .smells
            .iter()
            .map(|s| s.parse::<SmellKind>().map_err(|e| malformed(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        if !seen.insert(entry.id.clone()) {
            return Err(CorpusError::DuplicateId {
                path: origin.to_path_buf(),
                line,
                id: entry.id,
            });
        }
        out.push(SourceSample {
            id: entry.id,
            code: SourceText::java(entry.code),
            doc: entry.nl,
            label: entry.label,
            annotated_smells,
            path: entry.path,
            context: entry.context,
        });
    }
    Ok(out)
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<SourceSample>, CorpusError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_corpus(&text, path)
}

/// Serialize one sample back to a corpus line.
pub fn corpus_line(sample: &SourceSample) -> String {
    let line = CorpusLine {
        id: sample.id.clone(),
        code: sample.code.as_str().to_string(),
        nl: sample.doc.clone(),
        label: sample.label,
        smells: sample
            .annotated_smells
            .iter()
            .map(|k| k.as_str().to_string())
            .collect(),
        path: sample.path.clone(),
        context: sample.context.clone(),
    };
    serde_json::to_string(&line).expect("corpus line serializes")
}

/// Seeded uniform sample without replacement, returned in corpus order.
/// `None` keeps the whole corpus.
pub fn sample_corpus(
    samples: &[SourceSample],
    cap: Option<usize>,
    seed: u64,
) -> Result<Vec<SourceSample>, CorpusError> {
    let Some(cap) = cap else {
        return Ok(samples.to_vec());
    };
    if cap > samples.len() {
        return Err(CorpusError::CapTooLarge {
            cap,
            size: samples.len(),
        });
    }
    if cap == samples.len() {
        return Ok(samples.to_vec());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = index::sample(&mut rng, samples.len(), cap).into_vec();
    picked.sort_unstable();
    Ok(picked.into_iter().map(|i| samples[i].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO: &str = concat!(
        r#"{"id":"a","code":"int f(){return 1;}","nl":"returns one","label":"clean"}"#,
        "\n",
        r#"{"id":"b","code":"void loadAndGo(){}","nl":"loads","label":"smelly","smells":["binary_operator_in_name"]}"#,
        "\n"
    );

    #[test]
    fn parses_valid_lines() {
        let s = parse_corpus(TWO, Path::new("t.jsonl")).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[1].annotated_smells, [SmellKind::BinaryOperatorInName]);
        assert_eq!(s[0].label, SampleLabel::Clean);
    }

    #[test]
    fn bad_line_reports_number() {
        let text = format!("{TWO}{{\"id\": 3\n");
        match parse_corpus(&text, Path::new("t.jsonl")) {
            Err(CorpusError::MalformedLine { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_ids_rejected() {
        let line = r#"{"id":"a","code":"x();","nl":"","label":"clean"}"#;
        let text = format!("{line}\n{line}\n");
        assert!(matches!(
            parse_corpus(&text, Path::new("t.jsonl")),
            Err(CorpusError::DuplicateId { line: 2, .. })
        ));
    }

    #[test]
    fn unknown_smell_is_malformed() {
        let text = r#"{"id":"a","code":"x();","nl":"","label":"smelly","smells":["god_class"]}"#;
        assert!(matches!(
            parse_corpus(text, Path::new("t.jsonl")),
            Err(CorpusError::MalformedLine { line: 1, .. })
        ));
    }

    #[test]
    fn seeded_sampling_is_stable_and_ordered() {
        let all: Vec<_> = (0..50)
            .map(|i| SourceSample::new(format!("s{i:02}"), "x();", "", SampleLabel::Clean))
            .collect();
        let a = sample_corpus(&all, Some(10), 7).unwrap();
        let b = sample_corpus(&all, Some(10), 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 10);
        assert!(a.windows(2).all(|w| w[0].id < w[1].id));
        assert!(matches!(
            sample_corpus(&all, Some(51), 7),
            Err(CorpusError::CapTooLarge { .. })
        ));
    }

    #[test]
    fn line_round_trip() {
        let s = parse_corpus(TWO, Path::new("t.jsonl")).unwrap();
        let text: String = s.iter().map(|x| corpus_line(x) + "\n").collect();
        assert_eq!(parse_corpus(&text, Path::new("t.jsonl")).unwrap(), s);
    }
}
