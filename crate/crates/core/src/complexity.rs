//! Halstead and McCabe metrics for Java code units.
//!
//! Classification rules:
//! - keywords, operator symbols, `;` `,` `.` `?` `:` `[` and the name of an
//!   invoked method are operators;
//! - identifiers, literals and whole type expressions (`int`, `List<String>`,
//!   `byte[]`) are operands;
//! - `(` `)` `{` `}` `]` are not counted.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::{
    self, FunctionUnit, LocProfile, NodeId, SourceText, Span, SyntaxError, SyntaxTree,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ComplexityError {
    #[error("complexity score is zero under mode {0:?}")]
    ZeroComplexity(ScoreMode),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
}

const TYPE_KINDS: &[&str] = &[
    "integral_type",
    "floating_point_type",
    "boolean_type",
    "void_type",
    "type_identifier",
    "scoped_type_identifier",
    "generic_type",
    "array_type",
    "annotated_type",
];

const ATOMIC_KINDS: &[&str] = &["string_literal", "character_literal", "text_block"];

const UNCOUNTED: &[&str] = &["(", ")", "{", "}", "]"];

const BRANCH_KINDS: &[&str] = &[
    "if_statement",
    "for_statement",
    "enhanced_for_statement",
    "while_statement",
    "do_statement",
    "catch_clause",
    "ternary_expression",
];

/// Distinct and total operator/operand counts plus the derived measures.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HalsteadProfile {
    pub n1: usize,
    pub n2: usize,
    #[serde(rename = "N1")]
    pub total_operators: usize,
    #[serde(rename = "N2")]
    pub total_operands: usize,
    pub vocabulary: usize,
    pub length: usize,
    pub volume: f64,
    pub difficulty: f64,
    pub effort: f64,
}

impl HalsteadProfile {
    /// Derive vocabulary, length, volume, difficulty and effort from the four
    /// counters. Difficulty is 0 when there are no operands; volume is 0 for
    /// an empty vocabulary.
    pub fn from_counts(
        n1: usize,
        n2: usize,
        total_operators: usize,
        total_operands: usize,
    ) -> Self {
        let vocabulary = n1 + n2;
        let length = total_operators + total_operands;
        let volume = if vocabulary == 0 {
            0.0
        } else {
            length as f64 * (vocabulary as f64).log2()
        };
        let difficulty = if n2 == 0 {
            0.0
        } else {
            (n1 as f64 / 2.0) * (total_operands as f64 / n2 as f64)
        };
        Self {
            n1,
            n2,
            total_operators,
            total_operands,
            vocabulary,
            length,
            volume,
            difficulty,
            effort: difficulty * volume,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.length == 0
    }
}

/// Operator/operand tallies keyed by token text. Mergeable across units.
#[derive(Debug, Clone, Default)]
pub struct HalsteadCounter {
    operators: BTreeMap<String, usize>,
    operands: BTreeMap<String, usize>,
}

impl HalsteadCounter {
    pub fn add_node(&mut self, tree: &SyntaxTree, node: NodeId, text: &str) {
        let mut stack = vec![node];
        while let Some(id) = stack.pop() {
            let n = tree.node(id);
            if tree.is_comment(id) || n.span.is_empty() {
                continue;
            }
            let token = n.span.slice(text);
            if TYPE_KINDS.contains(&n.kind) {
                let key: String = token.split_whitespace().collect();
                *self.operands.entry(key).or_default() += 1;
                continue;
            }
            if n.children.is_empty() || ATOMIC_KINDS.contains(&n.kind) {
                if n.named {
                    let is_call_name = n.kind == "identifier"
                        && n.field == Some("name")
                        && n.parent.is_some_and(|p| {
                            matches!(tree.kind(p), "method_invocation" | "method_reference")
                        });
                    let bucket = if is_call_name {
                        &mut self.operators
                    } else {
                        &mut self.operands
                    };
                    *bucket.entry(token.to_string()).or_default() += 1;
                } else if !UNCOUNTED.contains(&token) {
                    *self.operators.entry(token.to_string()).or_default() += 1;
                }
                continue;
            }
            stack.extend(n.children.iter().rev().copied());
        }
    }

    pub fn merge(&mut self, other: &HalsteadCounter) {
        for (k, v) in &other.operators {
            *self.operators.entry(k.clone()).or_default() += v;
        }
        for (k, v) in &other.operands {
            *self.operands.entry(k.clone()).or_default() += v;
        }
    }

    pub fn profile(&self) -> HalsteadProfile {
        HalsteadProfile::from_counts(
            self.operators.len(),
            self.operands.len(),
            self.operators.values().sum(),
            self.operands.values().sum(),
        )
    }

    pub fn operators(&self) -> &BTreeMap<String, usize> {
        &self.operators
    }

    pub fn operands(&self) -> &BTreeMap<String, usize> {
        &self.operands
    }
}

/// Halstead profile of a unit's body. Abstract methods and empty bodies give
/// the all-zero profile.
pub fn halstead(unit: &FunctionUnit, tree: &SyntaxTree, source: &SourceText) -> HalsteadProfile {
    unit_counter(unit, tree, source).profile()
}

fn unit_counter(unit: &FunctionUnit, tree: &SyntaxTree, source: &SourceText) -> HalsteadCounter {
    let mut counter = HalsteadCounter::default();
    if let Some(body) = unit.body {
        counter.add_node(tree, body, source.as_str());
    }
    counter
}

/// Number of decision points in the subtree at `node`.
pub fn decision_points(tree: &SyntaxTree, node: NodeId, text: &str) -> usize {
    tree.descendants(node)
        .filter(|&id| is_decision_point(tree, id, text))
        .count()
}

fn is_decision_point(tree: &SyntaxTree, id: NodeId, text: &str) -> bool {
    let kind = tree.kind(id);
    if BRANCH_KINDS.contains(&kind) {
        return true;
    }
    match kind {
        "switch_label" => tree
            .children(id)
            .first()
            .is_some_and(|&c| tree.text(c, text) == "case"),
        "binary_expression" => tree
            .child_by_field(id, "operator")
            .is_some_and(|op| matches!(tree.text(op, text), "&&" | "||")),
        _ => false,
    }
}

/// McCabe number: 1 + decision points in the body.
pub fn cyclomatic(unit: &FunctionUnit, tree: &SyntaxTree, source: &SourceText) -> usize {
    1 + unit
        .body
        .map(|b| decision_points(tree, b, source.as_str()))
        .unwrap_or(0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreMode {
    HalsteadVolume,
    #[default]
    HalsteadEffort,
    Cyclomatic,
    Composite,
}

impl ScoreMode {
    pub const ALL: [ScoreMode; 4] = [
        ScoreMode::HalsteadVolume,
        ScoreMode::HalsteadEffort,
        ScoreMode::Cyclomatic,
        ScoreMode::Composite,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ScoreMode::HalsteadVolume => "halstead_volume",
            ScoreMode::HalsteadEffort => "halstead_effort",
            ScoreMode::Cyclomatic => "cyclomatic",
            ScoreMode::Composite => "composite",
        }
    }
}

impl std::str::FromStr for ScoreMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ScoreMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown score mode `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexityProfile {
    pub halstead: HalsteadProfile,
    pub cyclomatic: usize,
    pub loc: LocProfile,
}

impl ComplexityProfile {
    pub fn score(&self, mode: ScoreMode) -> f64 {
        match mode {
            ScoreMode::HalsteadVolume => self.halstead.volume,
            ScoreMode::HalsteadEffort => self.halstead.effort,
            ScoreMode::Cyclomatic => self.cyclomatic as f64,
            ScoreMode::Composite => self.halstead.volume * self.cyclomatic as f64,
        }
    }

    /// [`score`](Self::score), rejecting zero for use as a divisor.
    pub fn denominator(&self, mode: ScoreMode) -> Result<f64, ComplexityError> {
        let s = self.score(mode);
        if s > 0.0 {
            Ok(s)
        } else {
            Err(ComplexityError::ZeroComplexity(mode))
        }
    }
}

pub fn complexity_score(profile: &ComplexityProfile, mode: ScoreMode) -> f64 {
    profile.score(mode)
}

/// Profile of a single unit; `loc` covers the whole declaration.
pub fn analyze_unit(
    unit: &FunctionUnit,
    tree: &SyntaxTree,
    source: &SourceText,
) -> ComplexityProfile {
    ComplexityProfile {
        halstead: halstead(unit, tree, source),
        cyclomatic: cyclomatic(unit, tree, source),
        loc: syntax::count_lines_in(tree, source.as_str(), unit.span),
    }
}

/// Profile of a whole sample. With functions present, Halstead counts are
/// pooled over all bodies and McCabe numbers are summed; otherwise the whole
/// text is treated as one straight-line unit.
pub fn analyze_source(source: &SourceText) -> Result<ComplexityProfile, ComplexityError> {
    let tree = syntax::parse(source)?;
    Ok(analyze_tree(&tree, source))
}

pub fn analyze_tree(tree: &SyntaxTree, source: &SourceText) -> ComplexityProfile {
    let text = source.as_str();
    let units = syntax::extract_functions(tree, source);
    let loc = syntax::count_lines_in(tree, text, Span::new(0, text.len()));
    if units.is_empty() {
        let mut counter = HalsteadCounter::default();
        counter.add_node(tree, tree.root(), text);
        return ComplexityProfile {
            halstead: counter.profile(),
            cyclomatic: 1 + decision_points(tree, tree.root(), text),
            loc,
        };
    }
    let mut counter = HalsteadCounter::default();
    let mut mccabe = 0;
    for unit in &units {
        counter.merge(&unit_counter(unit, tree, source));
        mccabe += cyclomatic(unit, tree, source);
    }
    ComplexityProfile {
        halstead: counter.profile(),
        cyclomatic: mccabe,
        loc,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{extract_functions, parse};

    fn first_unit(code: &str) -> (SourceText, SyntaxTree, FunctionUnit) {
        let src = SourceText::java(code);
        let tree = parse(&src).unwrap();
        let unit = extract_functions(&tree, &src).remove(0);
        (src, tree, unit)
    }

    #[test]
    fn return_x_plus_one() {
        let (src, tree, unit) = first_unit("int f(int x) { return x + 1; }");
        let h = halstead(&unit, &tree, &src);
        assert_eq!(
            (h.n1, h.total_operators, h.n2, h.total_operands),
            (3, 3, 2, 2)
        );
        assert_eq!((h.vocabulary, h.length), (5, 5));
        assert!((h.volume - 5.0 * 5f64.log2()).abs() < 1e-12);
        assert!((h.volume - 11.61).abs() < 0.01);
        assert!((h.difficulty - 1.5).abs() < 1e-12);
        assert!((h.effort - 17.41).abs() < 0.01);
    }

    #[test]
    fn empty_body_is_zero() {
        let (src, tree, unit) = first_unit("void f() {}");
        assert_eq!(halstead(&unit, &tree, &src), HalsteadProfile::default());
        assert_eq!(cyclomatic(&unit, &tree, &src), 1);
    }

    #[test]
    fn duplicated_statement_doubles_totals() {
        let (s1, t1, u1) = first_unit("void f() { x = 1; }");
        let (s2, t2, u2) = first_unit("void f() { x = 1; x = 1; }");
        let a = halstead(&u1, &t1, &s1);
        let b = halstead(&u2, &t2, &s2);
        assert_eq!((b.n1, b.n2), (a.n1, a.n2));
        assert_eq!(
            (b.total_operators, b.total_operands),
            (2 * a.total_operators, 2 * a.total_operands)
        );
    }

    #[test]
    fn call_names_are_operators_and_types_operands() {
        let (src, tree, unit) = first_unit("void f() { List<String> xs = load(path); }");
        let mut c = HalsteadCounter::default();
        c.add_node(&tree, unit.body.unwrap(), src.as_str());
        assert!(c.operators().contains_key("load"));
        assert!(c.operands().contains_key("List<String>"));
        assert!(c.operands().contains_key("path"));
        assert!(!c.operators().contains_key("("));
    }

    #[test]
    fn mccabe_counts() {
        let (s, t, u) = first_unit("void f() { a(); b(); }");
        assert_eq!(cyclomatic(&u, &t, &s), 1);
        let (s, t, u) = first_unit("void f() { if (a) b(); }");
        assert_eq!(cyclomatic(&u, &t, &s), 2);
        let (s, t, u) = first_unit("void f() { for (int i = 0; i < n; i++) { if (a && b) c(); } }");
        assert_eq!(cyclomatic(&u, &t, &s), 4);
        let (s, t, u) = first_unit(
            "int f(int k) { switch (k) { case 1: return 1; case 2: return 2; default: return k > 0 ? 1 : 0; } }",
        );
        assert_eq!(cyclomatic(&u, &t, &s), 4);
        let (s, t, u) =
            first_unit("void f() { try { a(); } catch (Exception e) { b(); } while (x || y) {} }");
        assert_eq!(cyclomatic(&u, &t, &s), 4);
    }

    #[test]
    fn scores_by_mode() {
        let profile = ComplexityProfile {
            halstead: HalsteadProfile {
                volume: 100.0,
                ..HalsteadProfile::default()
            },
            cyclomatic: 3,
            loc: LocProfile::default(),
        };
        assert_eq!(profile.score(ScoreMode::Composite), 300.0);
        assert_eq!(profile.score(ScoreMode::Cyclomatic), 3.0);
        assert_eq!(
            profile.denominator(ScoreMode::HalsteadEffort),
            Err(ComplexityError::ZeroComplexity(ScoreMode::HalsteadEffort))
        );

        let (src, tree, unit) = first_unit("void f() { a(); }");
        assert_eq!(
            analyze_unit(&unit, &tree, &src).score(ScoreMode::Cyclomatic),
            1.0
        );
    }

    #[test]
    fn source_profile_sums_mccabe() {
        let src =
            SourceText::java("class A { void f() { if (a) b(); } void g() { while (c) d(); } }");
        let p = analyze_source(&src).unwrap();
        assert_eq!(p.cyclomatic, 4);
        assert_eq!(p.loc.code, 1);
    }
}
