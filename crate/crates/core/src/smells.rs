//! Rule-based detection of ten method-level code smells.
//!
//! Every rule produces at most one finding per unit; when several sites
//! violate a rule (two long boolean expressions, say) the worst one is
//! reported. Constructors are exempt from the two naming rules since their
//! name is dictated by the enclosing class.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complexity;
use crate::syntax::{self, FunctionUnit, NodeId, SourceText, Span, SyntaxTree};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SmellError {
    #[error("unknown smell kind `{0}`")]
    UnknownKind(String),
    #[error("threshold `{0}` must be positive, got {1}")]
    NonPositiveThreshold(&'static str, f64),
    #[error("invalid detector config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmellKind {
    ComplicatedRegexExpression,
    TooLongParameterList,
    BinaryOperatorInName,
    ComplicatedBooleanExpression,
    CyclomaticComplexity,
    FuncName,
    Loops,
    MutationTooMuch,
    PrimitiveObsession,
    TooLong,
}

impl SmellKind {
    pub const ALL: [SmellKind; 10] = [
        SmellKind::ComplicatedRegexExpression,
        SmellKind::TooLongParameterList,
        SmellKind::BinaryOperatorInName,
        SmellKind::ComplicatedBooleanExpression,
        SmellKind::CyclomaticComplexity,
        SmellKind::FuncName,
        SmellKind::Loops,
        SmellKind::MutationTooMuch,
        SmellKind::PrimitiveObsession,
        SmellKind::TooLong,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SmellKind::ComplicatedRegexExpression => "complicated_regex_expression",
            SmellKind::TooLongParameterList => "too_long_parameter_list",
            SmellKind::BinaryOperatorInName => "binary_operator_in_name",
            SmellKind::ComplicatedBooleanExpression => "complicated_boolean_expression",
            SmellKind::CyclomaticComplexity => "cyclomatic_complexity",
            SmellKind::FuncName => "func_name",
            SmellKind::Loops => "loops",
            SmellKind::MutationTooMuch => "mutation_too_much",
            SmellKind::PrimitiveObsession => "primitive_obsession",
            SmellKind::TooLong => "too_long",
        }
    }
}

impl fmt::Display for SmellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SmellKind {
    type Err = SmellError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SmellKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| SmellError::UnknownKind(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SmellCategory {
    Naming,
    Expression,
    Structure,
    Design,
}

impl SmellCategory {
    pub const ALL: [SmellCategory; 4] = [
        SmellCategory::Naming,
        SmellCategory::Expression,
        SmellCategory::Structure,
        SmellCategory::Design,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SmellCategory::Naming => "Naming",
            SmellCategory::Expression => "Expression",
            SmellCategory::Structure => "Structure",
            SmellCategory::Design => "Design",
        }
    }
}

impl fmt::Display for SmellCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Default kind → category mapping.
pub fn categorize(kind: SmellKind) -> SmellCategory {
    use SmellKind::*;
    match kind {
        FuncName | BinaryOperatorInName => SmellCategory::Naming,
        ComplicatedBooleanExpression | ComplicatedRegexExpression => SmellCategory::Expression,
        TooLong | TooLongParameterList | Loops | CyclomaticComplexity => SmellCategory::Structure,
        MutationTooMuch | PrimitiveObsession => SmellCategory::Design,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmellFinding {
    pub kind: SmellKind,
    pub category: SmellCategory,
    pub span: Span,
    pub measured_value: f64,
    pub threshold: f64,
    pub evidence: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub max_parameters: usize,
    pub max_code_lines: usize,
    pub max_loop_depth: usize,
    pub max_loops: usize,
    pub max_cyclomatic: usize,
    pub max_logical_operators: usize,
    pub max_regex_metachars: usize,
    pub max_name_length: usize,
    pub max_mutations: usize,
    pub primitive_fraction: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            max_parameters: 5,
            max_code_lines: 50,
            max_loop_depth: 3,
            max_loops: 4,
            max_cyclomatic: 10,
            max_logical_operators: 3,
            max_regex_metachars: 8,
            max_name_length: 30,
            max_mutations: 10,
            primitive_fraction: 0.8,
        }
    }
}

/// Rule thresholds plus optional category overrides.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorConfig {
    pub thresholds: Thresholds,
    /// Remaps individual kinds; unlisted kinds keep [`categorize`].
    pub categories: BTreeMap<SmellKind, SmellCategory>,
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<(), SmellError> {
        let t = &self.thresholds;
        let ints = [
            ("max_parameters", t.max_parameters),
            ("max_code_lines", t.max_code_lines),
            ("max_loop_depth", t.max_loop_depth),
            ("max_loops", t.max_loops),
            ("max_cyclomatic", t.max_cyclomatic),
            ("max_logical_operators", t.max_logical_operators),
            ("max_regex_metachars", t.max_regex_metachars),
            ("max_name_length", t.max_name_length),
            ("max_mutations", t.max_mutations),
        ];
        for (name, v) in ints {
            if v == 0 {
                return Err(SmellError::NonPositiveThreshold(name, 0.0));
            }
        }
        if t.primitive_fraction.is_nan() || t.primitive_fraction <= 0.0 {
            return Err(SmellError::NonPositiveThreshold(
                "primitive_fraction",
                t.primitive_fraction,
            ));
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self, SmellError> {
        let cfg: DetectorConfig =
            toml::from_str(text).map_err(|e| SmellError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("detector config is always serializable")
    }

    pub fn category_of(&self, kind: SmellKind) -> SmellCategory {
        self.categories
            .get(&kind)
            .copied()
            .unwrap_or_else(|| categorize(kind))
    }
}

const LOOP_KINDS: &[&str] = &[
    "for_statement",
    "enhanced_for_statement",
    "while_statement",
    "do_statement",
];

const REGEX_APIS: &[&str] = &["matches", "compile", "replaceAll", "replaceFirst", "split"];

const REGEX_METACHARS: &[char] = &[
    '.', '^', '$', '*', '+', '?', '(', ')', '[', ']', '{', '}', '|', '\\',
];

const PRIMITIVES: &[&str] = &[
    "byte", "short", "int", "long", "float", "double", "boolean", "char",
];

const CONJUNCTIONS: &[&str] = &["and", "or", "not"];

/// Run all ten rules over one unit. Findings come back sorted by span start
/// and then kind.
pub fn detect(
    unit: &FunctionUnit,
    tree: &SyntaxTree,
    source: &SourceText,
    config: &DetectorConfig,
) -> Vec<SmellFinding> {
    let text = source.as_str();
    let t = &config.thresholds;
    let mut out = Vec::new();
    let mut push =
        |kind: SmellKind, span: Span, measured: f64, threshold: f64, evidence: String| {
            out.push(SmellFinding {
                kind,
                category: config.category_of(kind),
                span,
                measured_value: measured,
                threshold,
                evidence,
            });
        };

    let params_span = unit
        .parameters_node(tree)
        .map(|p| tree.span(p))
        .unwrap_or(unit.span);
    let body_nodes: Vec<NodeId> = unit
        .body
        .map(|b| tree.descendants(b).collect())
        .unwrap_or_default();

    // too_long_parameter_list
    let arity = unit.parameters.len();
    if arity > t.max_parameters {
        push(
            SmellKind::TooLongParameterList,
            params_span,
            arity as f64,
            t.max_parameters as f64,
            format!("{arity} parameters"),
        );
    }

    // too_long
    if let Some(body) = unit.body {
        let lines = syntax::count_lines_in(tree, text, tree.span(body)).code;
        if lines > t.max_code_lines {
            push(
                SmellKind::TooLong,
                unit.body_span,
                lines as f64,
                t.max_code_lines as f64,
                format!("{lines} code lines"),
            );
        }
    }

    // loops
    let loops: Vec<NodeId> = body_nodes
        .iter()
        .copied()
        .filter(|&n| LOOP_KINDS.contains(&tree.kind(n)))
        .collect();
    if !loops.is_empty() {
        let depth_of = |n: NodeId| 1 + loops.iter().filter(|&&o| tree.is_ancestor(o, n)).count();
        let (deepest, depth) = loops
            .iter()
            .map(|&n| (n, depth_of(n)))
            .fold((loops[0], 0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if depth >= t.max_loop_depth {
            push(
                SmellKind::Loops,
                tree.span(deepest),
                depth as f64,
                t.max_loop_depth as f64,
                format!("loop nesting depth {depth}"),
            );
        } else if loops.len() > t.max_loops {
            push(
                SmellKind::Loops,
                tree.span(loops[0]),
                loops.len() as f64,
                t.max_loops as f64,
                format!("{} loops", loops.len()),
            );
        }
    }

    // cyclomatic_complexity
    let mccabe = complexity::cyclomatic(unit, tree, source);
    if mccabe > t.max_cyclomatic {
        push(
            SmellKind::CyclomaticComplexity,
            unit.span,
            mccabe as f64,
            t.max_cyclomatic as f64,
            format!("cyclomatic complexity {mccabe}"),
        );
    }

    // complicated_boolean_expression
    if let Some((node, ops)) = body_nodes
        .iter()
        .copied()
        .filter(|&n| is_logical(tree, n, text) && !has_logical_parent(tree, n, text))
        .map(|n| (n, logical_operator_count(tree, n, text)))
        .filter(|&(_, ops)| ops > t.max_logical_operators)
        .fold(None, |best: Option<(NodeId, usize)>, x| match best {
            Some(b) if b.1 >= x.1 => Some(b),
            _ => Some(x),
        })
    {
        push(
            SmellKind::ComplicatedBooleanExpression,
            tree.span(node),
            ops as f64,
            t.max_logical_operators as f64,
            format!("{ops} logical operators"),
        );
    }

    // complicated_regex_expression
    if let Some((node, metas)) = body_nodes
        .iter()
        .copied()
        .filter(|&n| tree.kind(n) == "string_literal")
        .map(|n| {
            (
                n,
                regex_metachar_count(&unescape_literal(tree.text(n, text))),
            )
        })
        .filter(|&(n, metas)| is_regex_argument(tree, n, text) || metas >= t.max_regex_metachars)
        .filter(|&(_, metas)| metas > t.max_regex_metachars)
        .fold(None, |best: Option<(NodeId, usize)>, x| match best {
            Some(b) if b.1 >= x.1 => Some(b),
            _ => Some(x),
        })
    {
        push(
            SmellKind::ComplicatedRegexExpression,
            tree.span(node),
            metas as f64,
            t.max_regex_metachars as f64,
            tree.text(node, text).to_string(),
        );
    }

    if !unit.is_constructor {
        let name_span = unit.name_span(tree);
        // binary_operator_in_name
        if let Some(word) = split_identifier(&unit.name)
            .into_iter()
            .find(|w| CONJUNCTIONS.contains(&w.to_ascii_lowercase().as_str()))
        {
            push(
                SmellKind::BinaryOperatorInName,
                name_span,
                1.0,
                1.0,
                word.to_string(),
            );
        }

        // func_name
        let len = unit.name.chars().count();
        if len < 3 {
            push(
                SmellKind::FuncName,
                name_span,
                len as f64,
                3.0,
                format!("name `{}` shorter than 3", unit.name),
            );
        } else if len > t.max_name_length {
            push(
                SmellKind::FuncName,
                name_span,
                len as f64,
                t.max_name_length as f64,
                format!("name `{}` longer than {}", unit.name, t.max_name_length),
            );
        } else if !is_lower_camel_case(&unit.name) {
            push(
                SmellKind::FuncName,
                name_span,
                0.0,
                1.0,
                format!("name `{}` is not lowerCamelCase", unit.name),
            );
        }
    }

    // mutation_too_much
    let mutations = body_nodes
        .iter()
        .filter(|&&n| matches!(tree.kind(n), "assignment_expression" | "update_expression"))
        .count();
    if mutations > t.max_mutations {
        push(
            SmellKind::MutationTooMuch,
            unit.body_span,
            mutations as f64,
            t.max_mutations as f64,
            format!("{mutations} mutations"),
        );
    }

    // primitive_obsession
    if arity >= 3 {
        let primitives = unit
            .parameters
            .iter()
            .filter(|p| PRIMITIVES.contains(&p.type_name.as_str()))
            .count();
        let fraction = primitives as f64 / arity as f64;
        if fraction >= t.primitive_fraction {
            push(
                SmellKind::PrimitiveObsession,
                params_span,
                fraction,
                t.primitive_fraction,
                format!("{primitives} of {arity} parameters are primitive"),
            );
        }
    }

    out.sort_by_key(|f| (f.span.start, f.kind));
    out
}

/// Parse `source` and run [`detect`] over every unit, pairing each unit with
/// its findings.
pub fn detect_source(
    source: &SourceText,
    config: &DetectorConfig,
) -> Result<Vec<(FunctionUnit, Vec<SmellFinding>)>, syntax::SyntaxError> {
    let tree = syntax::parse(source)?;
    Ok(syntax::extract_functions(&tree, source)
        .into_iter()
        .map(|u| {
            let f = detect(&u, &tree, source, config);
            (u, f)
        })
        .collect())
}

fn operator_text<'a>(tree: &SyntaxTree, n: NodeId, text: &'a str) -> Option<&'a str> {
    tree.child_by_field(n, "operator")
        .map(|op| tree.text(op, text))
}

fn is_logical(tree: &SyntaxTree, n: NodeId, text: &str) -> bool {
    match tree.kind(n) {
        "binary_expression" => matches!(operator_text(tree, n, text), Some("&&" | "||")),
        "unary_expression" => operator_text(tree, n, text) == Some("!"),
        _ => false,
    }
}

fn has_logical_parent(tree: &SyntaxTree, n: NodeId, text: &str) -> bool {
    let mut cur = tree.parent(n);
    while let Some(p) = cur {
        if tree.kind(p) == "parenthesized_expression" {
            cur = tree.parent(p);
            continue;
        }
        return is_logical(tree, p, text);
    }
    false
}

/// Logical operators reachable from `n` through logical and parenthesized
/// nodes only.
fn logical_operator_count(tree: &SyntaxTree, n: NodeId, text: &str) -> usize {
    let mut count = 0;
    let mut stack = vec![n];
    while let Some(id) = stack.pop() {
        if is_logical(tree, id, text) {
            count += 1;
        } else if tree.kind(id) != "parenthesized_expression" {
            continue;
        }
        stack.extend(
            tree.children(id)
                .iter()
                .copied()
                .filter(|&c| tree.node(c).named),
        );
    }
    count
}

fn is_regex_argument(tree: &SyntaxTree, literal: NodeId, text: &str) -> bool {
    let Some(args) = tree.parent(literal) else {
        return false;
    };
    if tree.kind(args) != "argument_list" {
        return false;
    }
    let first_arg = tree
        .children(args)
        .iter()
        .copied()
        .find(|&c| tree.node(c).named);
    if first_arg != Some(literal) {
        return false;
    }
    tree.parent(args)
        .filter(|&call| tree.kind(call) == "method_invocation")
        .and_then(|call| tree.child_by_field(call, "name"))
        .is_some_and(|name| REGEX_APIS.contains(&tree.text(name, text)))
}

/// Content of a Java string literal with simple escapes resolved.
pub fn unescape_literal(literal: &str) -> String {
    let inner = literal
        .strip_prefix("\"\"\"")
        .and_then(|s| s.strip_suffix("\"\"\""))
        .or_else(|| literal.strip_prefix('"').and_then(|s| s.strip_suffix('"')))
        .unwrap_or(literal);
    let mut out = String::with_capacity(inner.len());
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('n') => out.push('\n'),
            Some('t') => out.push('\t'),
            Some('r') => out.push('\r'),
            Some(other) => out.push(other),
            None => out.push('\\'),
        }
    }
    out
}

pub fn regex_metachar_count(pattern: &str) -> usize {
    pattern
        .chars()
        .filter(|c| REGEX_METACHARS.contains(c))
        .count()
}

/// Split an identifier into camelCase / snake_case words. Runs of capitals
/// stay together (`parseHTTPResponse` → parse, HTTP, Response).
pub fn split_identifier(name: &str) -> Vec<&str> {
    let mut words = Vec::new();
    for part in name.split(['_', '$']).filter(|p| !p.is_empty()) {
        let chars: Vec<(usize, char)> = part.char_indices().collect();
        let mut start = 0;
        for i in 1..chars.len() {
            let (pos, c) = chars[i];
            let prev = chars[i - 1].1;
            let next_lower = chars.get(i + 1).is_some_and(|&(_, n)| n.is_lowercase());
            let boundary = (c.is_uppercase() && (prev.is_lowercase() || prev.is_ascii_digit()))
                || (c.is_uppercase() && prev.is_uppercase() && next_lower);
            if boundary {
                words.push(&part[start..pos]);
                start = pos;
            }
        }
        words.push(&part[start..]);
    }
    words
}

pub fn is_lower_camel_case(name: &str) -> bool {
    let mut chars = name.chars();
    chars.next().is_some_and(|c| c.is_ascii_lowercase()) && chars.all(|c| c.is_ascii_alphanumeric())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{extract_functions, parse};

    fn findings(code: &str) -> Vec<SmellFinding> {
        findings_with(code, &DetectorConfig::default())
    }

    fn findings_with(code: &str, cfg: &DetectorConfig) -> Vec<SmellFinding> {
        let src = SourceText::java(code);
        let tree = parse(&src).unwrap();
        let unit = extract_functions(&tree, &src).remove(0);
        detect(&unit, &tree, &src, cfg)
    }

    fn kinds(f: &[SmellFinding]) -> Vec<SmellKind> {
        f.iter().map(|x| x.kind).collect()
    }

    #[test]
    fn kind_strings_round_trip() {
        for k in SmellKind::ALL {
            assert_eq!(k.as_str().parse::<SmellKind>().unwrap(), k);
            assert_eq!(
                serde_json::to_string(&k).unwrap(),
                format!("\"{}\"", k.as_str())
            );
        }
        assert!("long_method".parse::<SmellKind>().is_err());
    }

    #[test]
    fn category_map_is_total() {
        assert_eq!(categorize(SmellKind::FuncName), SmellCategory::Naming);
        assert_eq!(
            categorize(SmellKind::ComplicatedBooleanExpression),
            SmellCategory::Expression
        );
        assert_eq!(categorize(SmellKind::TooLong), SmellCategory::Structure);
        for cat in SmellCategory::ALL {
            assert!(SmellKind::ALL.iter().any(|&k| categorize(k) == cat));
        }
    }

    #[test]
    fn six_int_parameters() {
        let f = findings("void process(int a,int b,int c,int d,int e,int f) {}");
        let long: Vec<_> = f
            .iter()
            .filter(|x| x.kind == SmellKind::TooLongParameterList)
            .collect();
        assert_eq!(long.len(), 1);
        assert_eq!(long[0].measured_value, 6.0);
        assert_eq!(long[0].threshold, 5.0);
        // all-int signatures also count as primitive obsession
        assert_eq!(
            kinds(&f),
            [
                SmellKind::TooLongParameterList,
                SmellKind::PrimitiveObsession
            ]
        );
    }

    #[test]
    fn conjunction_in_name() {
        let f = findings("void loadAndValidate(Path p) { read(p); }");
        assert_eq!(kinds(&f), [SmellKind::BinaryOperatorInName]);
        assert_eq!(f[0].evidence, "And");
    }

    #[test]
    fn straight_line_method_is_clean() {
        assert!(findings("int f(int x){return x+1;}")
            .iter()
            .all(|x| x.kind == SmellKind::FuncName));
        assert!(findings("int inc(int x){return x+1;}").is_empty());
    }

    #[test]
    fn boolean_expression_counts_through_parentheses() {
        let f = findings("boolean check(Item a) { return (a.x && a.y) || !a.z && a.w; }");
        assert_eq!(kinds(&f), [SmellKind::ComplicatedBooleanExpression]);
        assert_eq!(f[0].measured_value, 4.0);
        let f = findings("boolean check(Item a) { return a.x && a.y || valid(a.z && a.w); }");
        assert!(f.is_empty());
    }

    #[test]
    fn regex_literal_detection() {
        let f = findings(
            r#"boolean valid(String s) { return s.matches("^[a-z]+(\\.[a-z]+)*@[a-z]+$"); }"#,
        );
        assert_eq!(kinds(&f), [SmellKind::ComplicatedRegexExpression]);
        let f = findings(r#"String[] parts(String s) { return s.split("\\s*,\\s*"); }"#);
        assert!(f.is_empty());
    }

    #[test]
    fn nested_loops() {
        let f = findings(
            "int sum(Grid g) { int s = 0; for (Row r : g.rows) { for (Cell c : r.cells) { while (c.more()) { s += c.next(); } } } return s; }",
        );
        assert_eq!(kinds(&f), [SmellKind::Loops]);
        assert_eq!(f[0].measured_value, 3.0);
    }

    #[test]
    fn naming_rules() {
        assert_eq!(kinds(&findings("void go() {}")), [SmellKind::FuncName]);
        assert_eq!(
            kinds(&findings("void Process_data() {}")),
            [SmellKind::FuncName]
        );
        assert!(findings("class A { A(int x) {} }").is_empty());
        assert_eq!(
            split_identifier("parseHTTPResponse"),
            ["parse", "HTTP", "Response"]
        );
        assert_eq!(split_identifier("load_and_go"), ["load", "and", "go"]);
    }

    #[test]
    fn raising_thresholds_never_adds_findings() {
        let code =
            "void process(int a,int b,int c,int d,int e,int f) { for(;;){for(;;){for(;;){}}} }";
        let base = findings(code).len();
        let mut cfg = DetectorConfig::default();
        cfg.thresholds.max_parameters = 10;
        cfg.thresholds.max_loop_depth = 5;
        cfg.thresholds.primitive_fraction = 1.5;
        assert!(findings_with(code, &cfg).len() < base);
        assert!(findings_with(code, &cfg).is_empty());
    }

    #[test]
    fn config_round_trip_and_validation() {
        let mut cfg = DetectorConfig::default();
        cfg.categories
            .insert(SmellKind::TooLongParameterList, SmellCategory::Design);
        let text = cfg.to_toml();
        assert_eq!(DetectorConfig::from_toml(&text).unwrap(), cfg);
        assert_eq!(
            cfg.category_of(SmellKind::TooLongParameterList),
            SmellCategory::Design
        );
        let bad = "[thresholds]\nmax_parameters = 0\n";
        assert!(matches!(
            DetectorConfig::from_toml(bad),
            Err(SmellError::NonPositiveThreshold(..))
        ));
    }
}
