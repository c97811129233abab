//! Code and description similarity.
//!
//! CodeBLEU here combines four components over Java token streams and
//! parse trees:
//! - `ngram`: 4-gram BLEU, unigram precision unsmoothed, higher orders
//!   add-one smoothed;
//! - `weighted_ngram`: the same with unigram matches weighted 5:1 in favour
//!   of Java keywords;
//! - `ast_match`: clipped overlap of depth-3 subtree shapes (leaves reduced to
//!   their kind, so identifier names do not matter);
//! - `dataflow_match`: clipped overlap of def-use edges between variables,
//!   with variables renamed by order of first appearance.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::{self, NodeId, SourceText, SyntaxError, SyntaxTree};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimilarityError {
    #[error("candidate is {candidate} but reference is {reference}")]
    LanguageMismatch {
        candidate: syntax::Language,
        reference: syntax::Language,
    },
    #[error("weights must be non-negative and sum to 1, got {0:?}")]
    InvalidWeights([f64; 4]),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
}

pub const JAVA_KEYWORDS: &[&str] = &[
    "abstract",
    "assert",
    "boolean",
    "break",
    "byte",
    "case",
    "catch",
    "char",
    "class",
    "const",
    "continue",
    "default",
    "do",
    "double",
    "else",
    "enum",
    "extends",
    "final",
    "finally",
    "float",
    "for",
    "goto",
    "if",
    "implements",
    "import",
    "instanceof",
    "int",
    "interface",
    "long",
    "native",
    "new",
    "package",
    "private",
    "protected",
    "public",
    "return",
    "short",
    "static",
    "strictfp",
    "super",
    "switch",
    "synchronized",
    "this",
    "throw",
    "throws",
    "transient",
    "try",
    "void",
    "volatile",
    "while",
    "true",
    "false",
    "null",
    "var",
    "record",
    "yield",
];

const KEYWORD_WEIGHT: f64 = 1.0;
const OTHER_WEIGHT: f64 = 0.2;
const MAX_ORDER: usize = 4;
const SUBTREE_DEPTH: usize = 3;

const STOP_WORDS: &[&str] = &[
    "a", "an", "the", "and", "or", "but", "if", "of", "to", "in", "on", "at", "by", "for", "with",
    "from", "as", "is", "are", "was", "were", "be", "been", "being", "it", "its", "this", "that",
    "these", "those", "into", "than", "then", "so", "such", "which", "who", "whom", "what", "will",
    "would", "can", "could", "should", "do", "does", "did", "has", "have", "had", "not", "no",
];

/// Component weights, in the order ngram, weighted ngram, AST, dataflow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodeBleuWeights {
    pub ngram: f64,
    pub weighted_ngram: f64,
    pub ast_match: f64,
    pub dataflow_match: f64,
}

impl Default for CodeBleuWeights {
    fn default() -> Self {
        Self {
            ngram: 0.25,
            weighted_ngram: 0.25,
            ast_match: 0.25,
            dataflow_match: 0.25,
        }
    }
}

impl CodeBleuWeights {
    pub fn as_array(&self) -> [f64; 4] {
        [
            self.ngram,
            self.weighted_ngram,
            self.ast_match,
            self.dataflow_match,
        ]
    }

    pub fn validate(&self) -> Result<(), SimilarityError> {
        let w = self.as_array();
        let ok = w.iter().all(|x| x.is_finite() && *x >= 0.0)
            && (w.iter().sum::<f64>() - 1.0).abs() < 1e-9;
        if ok {
            Ok(())
        } else {
            Err(SimilarityError::InvalidWeights(w))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodeBleuScore {
    pub ngram: f64,
    pub weighted_ngram: f64,
    pub ast_match: f64,
    pub dataflow_match: f64,
    pub combined: f64,
    pub weights: CodeBleuWeights,
    /// Both inputs had no tokens; every component is 1 by convention.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocSimMethod {
    /// Cosine of word-count vectors after lowercasing, punctuation stripping
    /// and stop-word removal.
    CountCosine,
    /// Cosine of Java lexical-token count vectors.
    CodeTokenCosine,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DocSimScore {
    pub value: f64,
    pub method: DocSimMethod,
    /// Both inputs were empty after preprocessing; value is 1 by convention.
    pub degenerate: bool,
}

pub fn codebleu(
    candidate: &SourceText,
    reference: &SourceText,
    weights: CodeBleuWeights,
) -> Result<CodeBleuScore, SimilarityError> {
    if candidate.language() != reference.language() {
        return Err(SimilarityError::LanguageMismatch {
            candidate: candidate.language(),
            reference: reference.language(),
        });
    }
    weights.validate()?;
    let cand_tree = syntax::parse(candidate)?;
    let ref_tree = syntax::parse(reference)?;
    let cand_tokens = token_texts(&cand_tree, candidate.as_str());
    let ref_tokens = token_texts(&ref_tree, reference.as_str());

    if cand_tokens.is_empty() && ref_tokens.is_empty() {
        return Ok(CodeBleuScore {
            ngram: 1.0,
            weighted_ngram: 1.0,
            ast_match: 1.0,
            dataflow_match: 1.0,
            combined: 1.0,
            weights,
            degenerate: true,
        });
    }

    let ngram = smoothed_bleu(&cand_tokens, &ref_tokens);
    let weighted_ngram = weighted_bleu(&cand_tokens, &ref_tokens);
    let ast_match = clipped_overlap(
        &subtree_signatures(&cand_tree, candidate.as_str()),
        &subtree_signatures(&ref_tree, reference.as_str()),
    );
    let dataflow_match = clipped_overlap(
        &dataflow_edges(&cand_tree, candidate.as_str()),
        &dataflow_edges(&ref_tree, reference.as_str()),
    );
    let w = weights.as_array();
    let combined =
        (w[0] * ngram + w[1] * weighted_ngram + w[2] * ast_match + w[3] * dataflow_match)
            .clamp(0.0, 1.0);
    Ok(CodeBleuScore {
        ngram,
        weighted_ngram,
        ast_match,
        dataflow_match,
        combined,
        weights,
        degenerate: false,
    })
}

fn token_texts<'a>(tree: &SyntaxTree, text: &'a str) -> Vec<&'a str> {
    tree.tokens()
        .into_iter()
        .map(|t| tree.text(t, text))
        .collect()
}

fn ngram_counts<'a>(tokens: &[&'a str], n: usize) -> HashMap<Vec<&'a str>, usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w.to_vec()).or_insert(0) += 1;
        }
    }
    counts
}

/// Clipped matches and candidate total for order `n`.
fn modified_precision(candidate: &[&str], reference: &[&str], n: usize) -> (usize, usize) {
    let cand = ngram_counts(candidate, n);
    let refc = ngram_counts(reference, n);
    let matched = cand
        .iter()
        .map(|(g, &c)| c.min(refc.get(g).copied().unwrap_or(0)))
        .sum();
    let total = candidate.len().saturating_sub(n - 1);
    (matched, total)
}

fn brevity_penalty(cand_len: usize, ref_len: usize) -> f64 {
    if cand_len == 0 {
        0.0
    } else if cand_len > ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / cand_len as f64).exp()
    }
}

fn combine_precisions(p1: f64, higher: &[f64], cand_len: usize, ref_len: usize) -> f64 {
    if p1 <= 0.0 {
        return 0.0;
    }
    let log_sum: f64 = std::iter::once(p1)
        .chain(higher.iter().copied())
        .map(f64::ln)
        .sum();
    let score = brevity_penalty(cand_len, ref_len) * (log_sum / MAX_ORDER as f64).exp();
    score.clamp(0.0, 1.0)
}

fn smoothed_higher_orders(candidate: &[&str], reference: &[&str]) -> Vec<f64> {
    (2..=MAX_ORDER)
        .map(|n| {
            let (m, c) = modified_precision(candidate, reference, n);
            (m as f64 + 1.0) / (c as f64 + 1.0)
        })
        .collect()
}

/// Sentence BLEU-4. Unigram precision is left unsmoothed so token-disjoint
/// inputs score 0; orders 2..4 use add-one smoothing.
pub fn smoothed_bleu(candidate: &[&str], reference: &[&str]) -> f64 {
    if candidate.is_empty() && reference.is_empty() {
        return 1.0;
    }
    let (m1, c1) = modified_precision(candidate, reference, 1);
    let p1 = if c1 == 0 { 0.0 } else { m1 as f64 / c1 as f64 };
    combine_precisions(
        p1,
        &smoothed_higher_orders(candidate, reference),
        candidate.len(),
        reference.len(),
    )
}

fn token_weight(token: &str) -> f64 {
    if JAVA_KEYWORDS.contains(&token) {
        KEYWORD_WEIGHT
    } else {
        OTHER_WEIGHT
    }
}

/// BLEU-4 with keyword-weighted unigram precision.
pub fn weighted_bleu(candidate: &[&str], reference: &[&str]) -> f64 {
    if candidate.is_empty() && reference.is_empty() {
        return 1.0;
    }
    let cand = ngram_counts(candidate, 1);
    let refc = ngram_counts(reference, 1);
    let mut num = 0.0;
    let mut den = 0.0;
    for (g, &c) in &cand {
        let w = token_weight(g[0]);
        num += w * c.min(refc.get(g).copied().unwrap_or(0)) as f64;
        den += w * c as f64;
    }
    let p1 = if den > 0.0 { num / den } else { 0.0 };
    combine_precisions(
        p1,
        &smoothed_higher_orders(candidate, reference),
        candidate.len(),
        reference.len(),
    )
}

/// Shape of the subtree rooted at `id`, cut at `depth` levels. Leaves and
/// cut points are rendered by kind only.
pub fn subtree_shape(tree: &SyntaxTree, id: NodeId, depth: usize) -> String {
    let node = tree.node(id);
    let kids: Vec<NodeId> = node
        .children
        .iter()
        .copied()
        .filter(|&c| !tree.is_comment(c) && !tree.span(c).is_empty())
        .collect();
    if depth <= 1 || kids.is_empty() || node.kind == "string_literal" {
        return node.kind.to_string();
    }
    let inner: Vec<String> = kids
        .iter()
        .map(|&c| subtree_shape(tree, c, depth - 1))
        .collect();
    format!("({} {})", node.kind, inner.join(" "))
}

/// Multiset of depth-bounded subtree shapes rooted at every internal node.
pub fn subtree_signatures(tree: &SyntaxTree, _text: &str) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for id in tree.descendants(tree.root()) {
        let node = tree.node(id);
        if tree.is_comment(id) || node.kind == "string_literal" {
            continue;
        }
        if node
            .children
            .iter()
            .any(|&c| !tree.is_comment(c) && !tree.span(c).is_empty())
        {
            *out.entry(subtree_shape(tree, id, SUBTREE_DEPTH))
                .or_insert(0) += 1;
        }
    }
    out
}

/// Fraction of `reference` items matched (with multiplicity) in
/// `candidate`. Two empty multisets match fully; an empty reference against
/// a non-empty candidate scores 0.
fn clipped_overlap<K: Ord>(candidate: &BTreeMap<K, usize>, reference: &BTreeMap<K, usize>) -> f64 {
    let total: usize = reference.values().sum();
    if total == 0 {
        return if candidate.values().sum::<usize>() == 0 {
            1.0
        } else {
            0.0
        };
    }
    let matched: usize = reference
        .iter()
        .map(|(k, &r)| r.min(candidate.get(k).copied().unwrap_or(0)))
        .sum();
    matched as f64 / total as f64
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DataflowEdge {
    pub target: usize,
    pub relation: &'static str,
    pub source: usize,
}

/// Def-use edges between variables declared in the text (parameters,
/// locals, loop and catch variables). `computedFrom` links an assigned
/// variable to variables read on the right-hand side; `comesFrom` links a
/// read to an earlier definition of the same variable.
pub fn dataflow_edges(tree: &SyntaxTree, text: &str) -> BTreeMap<DataflowEdge, usize> {
    let mut declared: HashSet<&str> = HashSet::new();
    for id in tree.descendants(tree.root()) {
        if let Some(name) = declared_name(tree, id, text) {
            declared.insert(name);
        }
    }

    let mut order: HashMap<&str, usize> = HashMap::new();
    let mut defined: HashSet<&str> = HashSet::new();
    let mut edges: BTreeMap<DataflowEdge, usize> = BTreeMap::new();
    for id in tree.descendants(tree.root()) {
        // definitions: the target identifier plus the identifiers read by
        // its value
        if let Some((target, value, reads_self)) = definition(tree, id, text) {
            if !declared.contains(target) {
                continue;
            }
            let t = number(target, &mut order);
            let mut sources: Vec<&str> = value
                .map(|v| variable_reads(tree, v, text))
                .unwrap_or_default()
                .into_iter()
                .filter(|n| declared.contains(n))
                .collect();
            if reads_self {
                sources.insert(0, target);
            }
            for s in sources {
                let s = number(s, &mut order);
                *edges
                    .entry(DataflowEdge {
                        target: t,
                        relation: "computedFrom",
                        source: s,
                    })
                    .or_insert(0) += 1;
            }
            defined.insert(target);
            continue;
        }
        if tree.kind(id) == "identifier" && is_variable_read(tree, id) {
            let name = tree.text(id, text);
            if declared.contains(name) && defined.contains(name) {
                let v = number(name, &mut order);
                *edges
                    .entry(DataflowEdge {
                        target: v,
                        relation: "comesFrom",
                        source: v,
                    })
                    .or_insert(0) += 1;
            }
        }
    }
    edges
}

/// Stable number for a variable: its rank by first appearance.
fn number<'a>(name: &'a str, order: &mut HashMap<&'a str, usize>) -> usize {
    let next = order.len();
    *order.entry(name).or_insert(next)
}

fn declared_name<'a>(tree: &SyntaxTree, id: NodeId, text: &'a str) -> Option<&'a str> {
    match tree.kind(id) {
        "formal_parameter" | "catch_formal_parameter" | "enhanced_for_statement" => {
            tree.child_by_field(id, "name").map(|n| tree.text(n, text))
        }
        "variable_declarator" => {
            // skip field declarations: only locals and parameters count
            let parent = tree.parent(id)?;
            if tree.kind(parent) == "field_declaration" {
                return None;
            }
            tree.child_by_field(id, "name").map(|n| tree.text(n, text))
        }
        _ => None,
    }
}

/// `(target, value, target_is_also_read)` for a defining node.
fn definition<'a>(
    tree: &SyntaxTree,
    id: NodeId,
    text: &'a str,
) -> Option<(&'a str, Option<NodeId>, bool)> {
    match tree.kind(id) {
        "formal_parameter" | "catch_formal_parameter" => {
            let name = tree.child_by_field(id, "name")?;
            Some((tree.text(name, text), None, false))
        }
        "variable_declarator" => {
            let name = tree.child_by_field(id, "name")?;
            Some((
                tree.text(name, text),
                tree.child_by_field(id, "value"),
                false,
            ))
        }
        "enhanced_for_statement" => {
            let name = tree.child_by_field(id, "name")?;
            Some((
                tree.text(name, text),
                tree.child_by_field(id, "value"),
                false,
            ))
        }
        "assignment_expression" => {
            let left = tree.child_by_field(id, "left")?;
            if tree.kind(left) != "identifier" {
                return None;
            }
            let compound = tree
                .child_by_field(id, "operator")
                .is_some_and(|op| tree.text(op, text) != "=");
            Some((
                tree.text(left, text),
                tree.child_by_field(id, "right"),
                compound,
            ))
        }
        "update_expression" => {
            let target = tree
                .children(id)
                .iter()
                .copied()
                .find(|&c| tree.kind(c) == "identifier")?;
            Some((tree.text(target, text), None, true))
        }
        _ => None,
    }
}

fn variable_reads<'a>(tree: &SyntaxTree, node: NodeId, text: &'a str) -> Vec<&'a str> {
    tree.descendants(node)
        .filter(|&id| tree.kind(id) == "identifier" && is_variable_read(tree, id))
        .map(|id| tree.text(id, text))
        .collect()
}

/// An identifier in value position: not a declaration name, not a method
/// name, not a field selector and not the target of an assignment.
fn is_variable_read(tree: &SyntaxTree, id: NodeId) -> bool {
    let Some(parent) = tree.parent(id) else {
        return false;
    };
    let field = tree.node(id).field;
    match tree.kind(parent) {
        "method_invocation" | "field_access" => field == Some("object"),
        "variable_declarator" | "enhanced_for_statement" => field == Some("value"),
        "assignment_expression" => field == Some("right"),
        "update_expression"
        | "formal_parameter"
        | "catch_formal_parameter"
        | "inferred_parameters"
        | "lambda_expression"
        | "method_declaration"
        | "constructor_declaration"
        | "class_declaration"
        | "interface_declaration"
        | "enum_declaration"
        | "record_declaration"
        | "labeled_statement"
        | "break_statement"
        | "continue_statement"
        | "scoped_identifier"
        | "marker_annotation"
        | "annotation"
        | "method_reference" => false,
        _ => true,
    }
}

fn preprocess_words(text: &str) -> BTreeMap<String, usize> {
    let lowered = text.to_lowercase();
    let cleaned: String = lowered
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect();
    let mut counts = BTreeMap::new();
    for word in cleaned.split_whitespace() {
        if !STOP_WORDS.contains(&word) {
            *counts.entry(word.to_string()).or_insert(0) += 1;
        }
    }
    counts
}

fn cosine(a: &BTreeMap<String, usize>, b: &BTreeMap<String, usize>) -> f64 {
    let dot: f64 = a
        .iter()
        .filter_map(|(k, &x)| b.get(k).map(|&y| x as f64 * y as f64))
        .sum();
    // integer-valued sums are exact, so identical vectors give exactly 1
    let na2: f64 = a.values().map(|&x| (x * x) as f64).sum();
    let nb2: f64 = b.values().map(|&x| (x * x) as f64).sum();
    (dot / (na2 * nb2).sqrt()).clamp(0.0, 1.0)
}

fn cosine_score(
    a: &BTreeMap<String, usize>,
    b: &BTreeMap<String, usize>,
    method: DocSimMethod,
) -> DocSimScore {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => DocSimScore {
            value: 1.0,
            method,
            degenerate: true,
        },
        (true, false) | (false, true) => DocSimScore {
            value: 0.0,
            method,
            degenerate: false,
        },
        _ => DocSimScore {
            value: cosine(a, b),
            method,
            degenerate: false,
        },
    }
}

/// Count-vector cosine between two natural-language descriptions.
pub fn docstring_similarity(a: &str, b: &str) -> DocSimScore {
    cosine_score(
        &preprocess_words(a),
        &preprocess_words(b),
        DocSimMethod::CountCosine,
    )
}

/// Count-vector cosine over Java lexical tokens. Used where a plain
/// code-to-code similarity is needed alongside CodeBLEU.
pub fn code_similarity(a: &SourceText, b: &SourceText) -> Result<DocSimScore, SimilarityError> {
    let counts = |s: &SourceText| -> Result<BTreeMap<String, usize>, SimilarityError> {
        let tree = syntax::parse(s)?;
        let mut m = BTreeMap::new();
        for t in token_texts(&tree, s.as_str()) {
            *m.entry(t.to_string()).or_insert(0) += 1;
        }
        Ok(m)
    };
    Ok(cosine_score(
        &counts(a)?,
        &counts(b)?,
        DocSimMethod::CodeTokenCosine,
    ))
}
