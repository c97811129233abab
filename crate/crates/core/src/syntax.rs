//! Java source parsing into an owned concrete syntax tree.
//!
//! The grammar backend (tree-sitter) is confined to this module. Everything
//! downstream works on [`SyntaxTree`], an immutable arena of nodes carrying
//! kind tags, byte spans and parent/child links.
//!
//! Corpus entries are frequently bare methods or statement fragments. The
//! Java grammar accepts top-level members, so the raw text is parsed first;
//! when that parse contains errors the text is re-parsed inside a synthetic
//! class shell and the shell result is kept if it has fewer error nodes.
//! Spans are always reported against the original text.

use std::cell::RefCell;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Kind tag of the synthetic root node.
pub const ROOT_KIND: &str = "program";

const SHELL_PREFIX: &str = "class __TokenscopeShell__ {\n";
const SHELL_SUFFIX: &str = "\n}\n";

/// Node kinds treated as a single lexical token even though the grammar
/// gives them internal structure.
const ATOMIC_KINDS: &[&str] = &["string_literal", "character_literal", "text_block"];

const COMMENT_KINDS: &[&str] = &["line_comment", "block_comment"];

const FUNCTION_KINDS: &[&str] = &[
    "method_declaration",
    "constructor_declaration",
    "compact_constructor_declaration",
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SyntaxError {
    #[error("unsupported language `{0}`")]
    UnsupportedLanguage(String),
    #[error("parser produced no tree")]
    CatastrophicParseFailure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    #[default]
    Java,
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Language::Java => f.write_str("java"),
        }
    }
}

impl FromStr for Language {
    type Err = SyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "java" => Ok(Language::Java),
            other => Err(SyntaxError::UnsupportedLanguage(other.to_string())),
        }
    }
}

/// Source code tagged with its language.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SourceText {
    content: String,
    language: Language,
}

impl SourceText {
    pub fn new(content: impl Into<String>, language: Language) -> Self {
        Self {
            content: content.into(),
            language,
        }
    }

    pub fn java(content: impl Into<String>) -> Self {
        Self::new(content, Language::Java)
    }

    pub fn as_str(&self) -> &str {
        &self.content
    }

    pub fn language(&self) -> Language {
        self.language
    }

    pub fn len(&self) -> usize {
        self.content.len()
    }

    pub fn is_empty(&self) -> bool {
        self.content.is_empty()
    }
}

/// Half-open byte range `[start, end)`. Serialized as a two-element array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn slice<'a>(&self, text: &'a str) -> &'a str {
        &text[self.start..self.end]
    }
}

impl Serialize for Span {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.start, self.end].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Span {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [start, end] = <[usize; 2]>::deserialize(d)?;
        if start > end {
            return Err(serde::de::Error::custom("span start exceeds end"));
        }
        Ok(Span { start, end })
    }
}

pub type NodeId = usize;

#[derive(Debug, Clone)]
pub struct Node {
    pub kind: &'static str,
    /// Named grammar node (identifier, expression, ...) as opposed to an
    /// anonymous token such as `(` or `return`.
    pub named: bool,
    /// Field name under which this node hangs off its parent, if any.
    pub field: Option<&'static str>,
    pub span: Span,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    pub is_error: bool,
    pub is_missing: bool,
}

/// Immutable parse tree over a [`SourceText`].
#[derive(Debug, Clone)]
pub struct SyntaxTree {
    nodes: Vec<Node>,
    has_errors: bool,
    wrapped: bool,
    source_len: usize,
}

impl SyntaxTree {
    pub fn root(&self) -> NodeId {
        0
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.len() <= 1 && self.nodes[0].children.is_empty()
    }

    pub fn has_errors(&self) -> bool {
        self.has_errors
    }

    /// True when the text was parsed inside the synthetic class shell.
    pub fn wrapped(&self) -> bool {
        self.wrapped
    }

    pub fn source_len(&self) -> usize {
        self.source_len
    }

    pub fn kind(&self, id: NodeId) -> &'static str {
        self.nodes[id].kind
    }

    pub fn span(&self, id: NodeId) -> Span {
        self.nodes[id].span
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id].children
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id].parent
    }

    pub fn text<'a>(&self, id: NodeId, source: &'a str) -> &'a str {
        self.nodes[id].span.slice(source)
    }

    pub fn child_by_field(&self, id: NodeId, field: &str) -> Option<NodeId> {
        self.nodes[id]
            .children
            .iter()
            .copied()
            .find(|&c| self.nodes[c].field == Some(field))
    }

    pub fn error_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| n.is_error || n.is_missing)
            .count()
    }

    /// Pre-order traversal of the subtree rooted at `id`, including `id`.
    pub fn descendants(&self, id: NodeId) -> Descendants<'_> {
        Descendants {
            tree: self,
            stack: vec![id],
        }
    }

    /// Whether `ancestor` is a proper ancestor of `id`.
    pub fn is_ancestor(&self, ancestor: NodeId, id: NodeId) -> bool {
        let mut cur = self.nodes[id].parent;
        while let Some(p) = cur {
            if p == ancestor {
                return true;
            }
            cur = self.nodes[p].parent;
        }
        false
    }

    pub fn is_comment(&self, id: NodeId) -> bool {
        COMMENT_KINDS.contains(&self.nodes[id].kind)
    }

    /// Leaf lexical tokens under `id` in source order. Comments and
    /// zero-width recovery nodes are skipped; string and character literals
    /// count as one token each.
    pub fn tokens_under(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            if COMMENT_KINDS.contains(&node.kind) {
                continue;
            }
            if node.children.is_empty() || ATOMIC_KINDS.contains(&node.kind) {
                if !node.span.is_empty() && n != self.root() {
                    out.push(n);
                }
                continue;
            }
            stack.extend(node.children.iter().rev().copied());
        }
        out
    }

    pub fn tokens(&self) -> Vec<NodeId> {
        self.tokens_under(self.root())
    }

    /// Spans of every comment node in the tree.
    pub fn comment_spans(&self) -> Vec<Span> {
        self.nodes
            .iter()
            .filter(|n| COMMENT_KINDS.contains(&n.kind))
            .map(|n| n.span)
            .collect()
    }
}

pub struct Descendants<'a> {
    tree: &'a SyntaxTree,
    stack: Vec<NodeId>,
}

impl Iterator for Descendants<'_> {
    type Item = NodeId;

    fn next(&mut self) -> Option<NodeId> {
        let id = self.stack.pop()?;
        self.stack
            .extend(self.tree.nodes[id].children.iter().rev().copied());
        Some(id)
    }
}

thread_local! {
    static JAVA_PARSER: RefCell<Option<tree_sitter::Parser>> = const { RefCell::new(None) };
}

fn raw_parse(text: &str) -> Result<tree_sitter::Tree, SyntaxError> {
    JAVA_PARSER.with(|cell| {
        let mut slot = cell.borrow_mut();
        if slot.is_none() {
            let mut parser = tree_sitter::Parser::new();
            parser
                .set_language(&tree_sitter_java::LANGUAGE.into())
                .map_err(|_| SyntaxError::CatastrophicParseFailure)?;
            *slot = Some(parser);
        }
        let parser = slot.as_mut().expect("parser initialised above");
        parser
            .parse(text, None)
            .ok_or(SyntaxError::CatastrophicParseFailure)
    })
}

/// Parse `source` into a [`SyntaxTree`].
///
/// Recoverable syntax errors produce `ERROR`/missing nodes and set
/// [`SyntaxTree::has_errors`]; only a parser that yields no tree at all is
/// reported as an error.
pub fn parse(source: &SourceText) -> Result<SyntaxTree, SyntaxError> {
    match source.language() {
        Language::Java => parse_java(source.as_str()),
    }
}

fn parse_java(text: &str) -> Result<SyntaxTree, SyntaxError> {
    let raw = raw_parse(text)?;
    let direct = convert(&raw, text.len(), 0, None);
    if !direct.has_errors || text.trim().is_empty() {
        return Ok(direct);
    }
    let shelled = format!("{SHELL_PREFIX}{text}{SHELL_SUFFIX}");
    let wrapped_raw = raw_parse(&shelled)?;
    match shell_body(&wrapped_raw) {
        Some(body) => {
            let wrapped = convert(&wrapped_raw, text.len(), SHELL_PREFIX.len(), Some(body));
            if wrapped.error_count() < direct.error_count() {
                Ok(wrapped)
            } else {
                Ok(direct)
            }
        }
        None => Ok(direct),
    }
}

fn shell_body(tree: &tree_sitter::Tree) -> Option<tree_sitter::Node<'_>> {
    let root = tree.root_node();
    let class = root.named_child(0)?;
    if class.kind() != "class_declaration" {
        return None;
    }
    class.child_by_field_name("body")
}

/// Convert a tree-sitter tree into the owned arena. With `shell` set, only
/// the children of the shell's class body are kept, shifted by `offset`
/// and clamped to the original text.
fn convert(
    tree: &tree_sitter::Tree,
    len: usize,
    offset: usize,
    shell: Option<tree_sitter::Node<'_>>,
) -> SyntaxTree {
    let mut nodes = vec![Node {
        kind: ROOT_KIND,
        named: true,
        field: None,
        span: Span::new(0, len),
        parent: None,
        children: Vec::new(),
        is_error: false,
        is_missing: false,
    }];

    let mut top: Vec<(tree_sitter::Node<'_>, Option<&'static str>)> = Vec::new();
    let mut root_error = false;
    match shell {
        None => {
            let root = tree.root_node();
            root_error = root.is_error();
            let mut cursor = root.walk();
            if cursor.goto_first_child() {
                loop {
                    top.push((cursor.node(), cursor.field_name()));
                    if !cursor.goto_next_sibling() {
                        break;
                    }
                }
            }
        }
        Some(body) => {
            let mut cursor = body.walk();
            if cursor.goto_first_child() {
                loop {
                    top.push((cursor.node(), cursor.field_name()));
                    if !cursor.goto_next_sibling() {
                        break;
                    }
                }
            }
        }
    }

    let clamp = |b: usize| -> usize { b.saturating_sub(offset).min(len) };
    let keep = |n: &tree_sitter::Node<'_>| -> bool {
        if offset == 0 {
            return true;
        }
        let (s, e) = (n.start_byte(), n.end_byte());
        // shell braces sit entirely outside the original text
        let inside_start = s >= offset && s <= offset + len;
        let overlaps = e > offset && s < offset + len;
        overlaps || (s == e && inside_start)
    };

    let mut stack: Vec<(tree_sitter::Node<'_>, Option<&'static str>, NodeId)> =
        top.into_iter().rev().map(|(n, f)| (n, f, 0)).collect();
    let mut has_errors = root_error;
    while let Some((ts, field, parent)) = stack.pop() {
        if !keep(&ts) {
            continue;
        }
        let id = nodes.len();
        let span = Span::new(clamp(ts.start_byte()), clamp(ts.end_byte()));
        let is_error = ts.is_error();
        let is_missing = ts.is_missing();
        has_errors |= is_error || is_missing;
        nodes.push(Node {
            kind: ts.kind(),
            named: ts.is_named(),
            field,
            span,
            parent: Some(parent),
            children: Vec::new(),
            is_error,
            is_missing,
        });
        nodes[parent].children.push(id);
        let mut cursor = ts.walk();
        let mut kids = Vec::new();
        if cursor.goto_first_child() {
            loop {
                kids.push((cursor.node(), cursor.field_name(), id));
                if !cursor.goto_next_sibling() {
                    break;
                }
            }
        }
        stack.extend(kids.into_iter().rev());
    }

    SyntaxTree {
        nodes,
        has_errors,
        wrapped: shell.is_some(),
        source_len: len,
    }
}

/// One formal parameter: name and declared type as written.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Parameter {
    pub name: String,
    pub type_name: String,
}

/// A method or constructor declaration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionUnit {
    pub name: String,
    pub parameters: Vec<Parameter>,
    /// Span of the whole declaration.
    pub span: Span,
    /// Span of the body block; zero-width at the end of the declaration when
    /// the method is abstract.
    pub body_span: Span,
    /// Declaration text.
    pub source: String,
    pub node: NodeId,
    pub body: Option<NodeId>,
    pub is_constructor: bool,
}

impl FunctionUnit {
    pub fn name_span(&self, tree: &SyntaxTree) -> Span {
        tree.child_by_field(self.node, "name")
            .map(|n| tree.span(n))
            .unwrap_or(self.span)
    }

    pub fn parameters_node(&self, tree: &SyntaxTree) -> Option<NodeId> {
        tree.child_by_field(self.node, "parameters")
    }
}

/// Every method/constructor declaration in source order. Declarations nested
/// inside another function's body (anonymous or local classes) are skipped.
pub fn extract_functions(tree: &SyntaxTree, source: &SourceText) -> Vec<FunctionUnit> {
    let text = source.as_str();
    let mut out: Vec<FunctionUnit> = Vec::new();
    for id in tree.descendants(tree.root()) {
        if !FUNCTION_KINDS.contains(&tree.kind(id)) {
            continue;
        }
        if out.iter().any(|f| tree.is_ancestor(f.node, id)) {
            continue;
        }
        let Some(name_node) = tree.child_by_field(id, "name") else {
            continue;
        };
        let span = tree.span(id);
        let body = tree.child_by_field(id, "body");
        let body_span = body
            .map(|b| tree.span(b))
            .unwrap_or(Span::new(span.end, span.end));
        let parameters = tree
            .child_by_field(id, "parameters")
            .map(|p| collect_parameters(tree, p, text))
            .unwrap_or_default();
        out.push(FunctionUnit {
            name: tree.text(name_node, text).to_string(),
            parameters,
            span,
            body_span,
            source: span.slice(text).to_string(),
            node: id,
            body,
            is_constructor: tree.kind(id) != "method_declaration",
        });
    }
    out
}

fn collect_parameters(tree: &SyntaxTree, params: NodeId, text: &str) -> Vec<Parameter> {
    let mut out = Vec::new();
    for &child in tree.children(params) {
        match tree.kind(child) {
            "formal_parameter" => {
                let ty = tree
                    .child_by_field(child, "type")
                    .map(|t| tree.text(t, text).to_string())
                    .unwrap_or_default();
                let dims: String = tree
                    .children(child)
                    .iter()
                    .filter(|&&c| tree.kind(c) == "dimensions")
                    .map(|&c| tree.text(c, text))
                    .collect();
                let name = tree
                    .child_by_field(child, "name")
                    .map(|n| tree.text(n, text).to_string())
                    .unwrap_or_default();
                out.push(Parameter {
                    name,
                    type_name: format!("{ty}{dims}"),
                });
            }
            "spread_parameter" => {
                let kids = tree.children(child);
                let ty = kids
                    .iter()
                    .find(|&&c| {
                        tree.node(c).named
                            && tree.kind(c) != "modifiers"
                            && tree.kind(c) != "variable_declarator"
                    })
                    .map(|&c| tree.text(c, text).to_string())
                    .unwrap_or_default();
                let name = kids
                    .iter()
                    .find(|&&c| tree.kind(c) == "variable_declarator")
                    .and_then(|&d| tree.child_by_field(d, "name"))
                    .map(|n| tree.text(n, text).to_string())
                    .unwrap_or_default();
                out.push(Parameter {
                    name,
                    type_name: format!("{ty}..."),
                });
            }
            _ => {}
        }
    }
    out
}

/// Number of leaf lexical tokens, excluding comments and whitespace.
pub fn count_lexical_tokens(source: &SourceText) -> Result<usize, SyntaxError> {
    Ok(parse(source)?.tokens().len())
}

/// Line-count breakdown. `code + blank + comment == total`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LocProfile {
    pub total: usize,
    pub code: usize,
    pub blank: usize,
    pub comment: usize,
}

pub fn count_lines(source: &SourceText) -> Result<LocProfile, SyntaxError> {
    let tree = parse(source)?;
    Ok(count_lines_in(
        &tree,
        source.as_str(),
        Span::new(0, source.len()),
    ))
}

/// Classify the lines overlapping `range`. A line is code if any
/// non-comment token touches it, comment if only comments do, blank
/// otherwise. A trailing newline does not start a new line.
pub fn count_lines_in(tree: &SyntaxTree, text: &str, range: Span) -> LocProfile {
    let region = range.slice(text);
    if region.is_empty() {
        return LocProfile::default();
    }
    let mut starts = vec![range.start];
    for (i, b) in region.bytes().enumerate() {
        if b == b'\n' && range.start + i + 1 < range.end {
            starts.push(range.start + i + 1);
        }
    }
    let total = starts.len();
    let line_of = |offset: usize| -> usize {
        match starts.binary_search(&offset) {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        }
    };
    let mut code = vec![false; total];
    let mut comment = vec![false; total];
    let mark = |span: Span, flags: &mut Vec<bool>| {
        let s = span.start.max(range.start);
        let e = span.end.min(range.end);
        if s >= e {
            return;
        }
        for flag in flags.iter_mut().take(line_of(e - 1) + 1).skip(line_of(s)) {
            *flag = true;
        }
    };
    for tok in tree.tokens() {
        mark(tree.span(tok), &mut code);
    }
    for span in tree.comment_spans() {
        mark(span, &mut comment);
    }
    let mut profile = LocProfile {
        total,
        ..LocProfile::default()
    };
    for i in 0..total {
        if code[i] {
            profile.code += 1;
        } else if comment[i] {
            profile.comment += 1;
        } else {
            profile.blank += 1;
        }
    }
    profile
}
