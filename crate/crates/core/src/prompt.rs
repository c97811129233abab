//! Prompt composition for the four task kinds under the baseline, smell-tip,
//! context, role and cost strategies.
//!
//! All wording lives in versioned template files (`templates/v1`). Templates
//! use `{{name}}` placeholders; substitution is single-pass, so a value that
//! itself contains `{{...}}` is inserted verbatim.
//!
//! Combinations apply their members in a fixed order: context, role, smell
//! tips, cost.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::SourceSample;
use crate::smells::{SmellFinding, SmellKind};
use crate::syntax::{self, Span};

pub const KNOWN_PLACEHOLDERS: &[&str] =
    &["code", "doc", "path", "tips", "budget", "names", "snippet"];

/// Lines of surrounding source kept on each side for code context.
pub const CONTEXT_LINES: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PromptError {
    #[error("sample `{0}` has no docstring for function context")]
    MissingDocstring(String),
    #[error("template `{template}` uses unknown placeholder `{{{{{name}}}}}`")]
    UnknownPlaceholder { template: String, name: String },
    #[error("template `{template}` has an unterminated placeholder")]
    UnterminatedPlaceholder { template: String },
    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),
    #[error("cannot read template `{path}`: {reason}")]
    TemplateIo { path: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Evaluate,
    Refactor,
    GenerateFromDoc,
    DescribeCode,
}

impl TaskKind {
    pub const ALL: [TaskKind; 4] = [
        TaskKind::Evaluate,
        TaskKind::Refactor,
        TaskKind::GenerateFromDoc,
        TaskKind::DescribeCode,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            TaskKind::Evaluate => "evaluate",
            TaskKind::Refactor => "refactor",
            TaskKind::GenerateFromDoc => "generate_from_doc",
            TaskKind::DescribeCode => "describe_code",
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for TaskKind {
    type Err = PromptError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TaskKind::ALL
            .into_iter()
            .find(|t| t.as_str() == s || t.as_str().replace('_', "-") == s)
            .ok_or_else(|| PromptError::InvalidStrategy(format!("unknown task `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    #[serde(alias = "se", alias = "software_engineer")]
    Seer,
    #[serde(alias = "qa", alias = "qa_engineer")]
    Qaer,
    #[serde(alias = "devops_engineer")]
    Devops,
}

impl Role {
    pub fn as_str(&self) -> &'static str {
        match self {
            Role::Seer => "seer",
            Role::Qaer => "qaer",
            Role::Devops => "devops",
        }
    }
}

/// File path, enclosing names and surrounding source for a code unit.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CodeContext {
    pub path: String,
    pub names: Vec<String>,
    pub snippet: String,
}

impl CodeContext {
    /// Context for the unit at `span` inside `file_text`: up to
    /// [`CONTEXT_LINES`] lines before and after it (the unit itself is left
    /// out), plus enclosing class and method names.
    pub fn from_file(path: impl Into<String>, file_text: &str, span: Span) -> Self {
        let before: Vec<&str> = file_text[..span.start].lines().collect();
        let after_text = &file_text[span.end..];
        let after: Vec<&str> = after_text.lines().skip(1).collect();
        let head = &before[before.len().saturating_sub(CONTEXT_LINES)..];
        let tail = &after[..after.len().min(CONTEXT_LINES)];
        let mut snippet = head.join("\n");
        if !tail.is_empty() {
            snippet.push_str("\n    // ...\n");
            snippet.push_str(&tail.join("\n"));
        }
        Self {
            path: path.into(),
            names: enclosing_names(file_text),
            snippet,
        }
    }

    /// Context derived from the sample alone: its recorded path (or a path
    /// made from the id), the type and method names it declares, and any
    /// recorded surrounding source.
    pub fn for_sample(sample: &SourceSample) -> Self {
        Self {
            path: sample
                .path
                .clone()
                .unwrap_or_else(|| format!("{}.java", sample.id)),
            names: enclosing_names(sample.code.as_str()),
            snippet: sample.context.clone().unwrap_or_default(),
        }
    }
}

fn enclosing_names(text: &str) -> Vec<String> {
    let source = syntax::SourceText::java(text);
    let Ok(tree) = syntax::parse(&source) else {
        return Vec::new();
    };
    let mut names = Vec::new();
    for id in tree.descendants(tree.root()) {
        if matches!(
            tree.kind(id),
            "class_declaration"
                | "interface_declaration"
                | "enum_declaration"
                | "record_declaration"
                | "method_declaration"
                | "constructor_declaration"
        ) {
            if let Some(n) = tree.child_by_field(id, "name") {
                let name = tree.text(n, text).to_string();
                if !names.contains(&name) {
                    names.push(name);
                }
            }
        }
    }
    names
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PromptStrategy {
    Baseline,
    /// Smell-tip sentences for every distinct kind among the supplied
    /// findings and the sample's annotated smells.
    SmellTips,
    ContextCode {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        context: Option<CodeContext>,
    },
    ContextFunc {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        purpose: Option<String>,
    },
    ContextAll {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        context: Option<CodeContext>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        purpose: Option<String>,
    },
    Role {
        role: Role,
    },
    CostAbsolute {
        max_tokens: u32,
    },
    CostRelative {
        fraction: f64,
    },
    Combination {
        members: Vec<PromptStrategy>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Stage {
    Context,
    Role,
    Tips,
    Cost,
}

impl PromptStrategy {
    pub fn context_code() -> Self {
        PromptStrategy::ContextCode { context: None }
    }

    pub fn context_func() -> Self {
        PromptStrategy::ContextFunc { purpose: None }
    }

    pub fn context_all() -> Self {
        PromptStrategy::ContextAll {
            context: None,
            purpose: None,
        }
    }

    pub fn role(role: Role) -> Self {
        PromptStrategy::Role { role }
    }

    pub fn combination(members: Vec<PromptStrategy>) -> Self {
        PromptStrategy::Combination { members }
    }

    /// Tag recorded in bundles for this (non-combination) variant.
    pub fn tag(&self) -> String {
        match self {
            PromptStrategy::Baseline => "baseline".into(),
            PromptStrategy::SmellTips => "smell_tips".into(),
            PromptStrategy::ContextCode { .. } => "context_code".into(),
            PromptStrategy::ContextFunc { .. } => "context_func".into(),
            PromptStrategy::ContextAll { .. } => "context_all".into(),
            PromptStrategy::Role { role } => format!("role_{}", role.as_str()),
            PromptStrategy::CostAbsolute { .. } => "cost_absolute".into(),
            PromptStrategy::CostRelative { .. } => "cost_relative".into(),
            PromptStrategy::Combination { .. } => "combination".into(),
        }
    }

    fn stage(&self) -> Option<Stage> {
        match self {
            PromptStrategy::Baseline | PromptStrategy::Combination { .. } => None,
            PromptStrategy::ContextCode { .. }
            | PromptStrategy::ContextFunc { .. }
            | PromptStrategy::ContextAll { .. } => Some(Stage::Context),
            PromptStrategy::Role { .. } => Some(Stage::Role),
            PromptStrategy::SmellTips => Some(Stage::Tips),
            PromptStrategy::CostAbsolute { .. } | PromptStrategy::CostRelative { .. } => {
                Some(Stage::Cost)
            }
        }
    }

    /// Check variant invariants. A combination must be non-empty, hold no
    /// baseline or nested combination, and contain at most one variant per
    /// stage (one context, one role, one tips, one cost).
    pub fn validate(&self) -> Result<(), PromptError> {
        match self {
            PromptStrategy::CostAbsolute { max_tokens } if *max_tokens == 0 => Err(
                PromptError::InvalidStrategy("max_tokens must be positive".into()),
            ),
            PromptStrategy::CostRelative { fraction } if !(*fraction > 0.0 && *fraction <= 4.0) => {
                Err(PromptError::InvalidStrategy(format!(
                    "relative budget fraction {fraction} outside (0, 4]"
                )))
            }
            PromptStrategy::Combination { members } => {
                if members.is_empty() {
                    return Err(PromptError::InvalidStrategy("empty combination".into()));
                }
                let mut stages = BTreeSet::new();
                for m in members {
                    let Some(stage) = m.stage() else {
                        return Err(PromptError::InvalidStrategy(format!(
                            "`{}` cannot be a combination member",
                            m.tag()
                        )));
                    };
                    if !stages.insert(stage) {
                        return Err(PromptError::InvalidStrategy(format!(
                            "combination repeats a {stage:?} variant (`{}`)",
                            m.tag()
                        )));
                    }
                    m.validate()?;
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Variants in application order.
    fn flatten(&self) -> Vec<&PromptStrategy> {
        match self {
            PromptStrategy::Combination { members } => {
                let mut v: Vec<&PromptStrategy> = members.iter().collect();
                v.sort_by_key(|m| m.stage());
                v
            }
            other => vec![other],
        }
    }

    pub fn has_cost(&self) -> bool {
        self.flatten()
            .iter()
            .any(|m| m.stage() == Some(Stage::Cost))
    }

    /// Parse the short CLI form: `baseline`, `tips`, `context-code`,
    /// `context-func`, `context-all`, `role:seer`, `cost-abs:64`,
    /// `cost-rel:0.5`.
    pub fn parse_short(s: &str) -> Result<Self, PromptError> {
        let bad = || PromptError::InvalidStrategy(format!("unknown strategy `{s}`"));
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let strategy = match (head.replace('_', "-").as_str(), arg) {
            ("baseline" | "base", None) => PromptStrategy::Baseline,
            ("tips" | "smell-tips", None) => PromptStrategy::SmellTips,
            ("context-code", None) => PromptStrategy::context_code(),
            ("context-func", None) => PromptStrategy::context_func(),
            ("context-all", None) => PromptStrategy::context_all(),
            ("role", Some(r)) => PromptStrategy::role(match r {
                "seer" | "se" => Role::Seer,
                "qaer" | "qa" => Role::Qaer,
                "devops" => Role::Devops,
                _ => return Err(bad()),
            }),
            ("cost-abs" | "cost-absolute", Some(n)) => PromptStrategy::CostAbsolute {
                max_tokens: n.parse().map_err(|_| bad())?,
            },
            ("cost-rel" | "cost-relative", Some(f)) => PromptStrategy::CostRelative {
                fraction: f.parse().map_err(|_| bad())?,
            },
            _ => return Err(bad()),
        };
        strategy.validate()?;
        Ok(strategy)
    }
}

/// Named strategy rows for prompt-strategy experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyRow {
    pub label: String,
    pub strategy: PromptStrategy,
}

impl StrategyRow {
    /// Tags the row's strategy produces, in application order.
    pub fn strategy_tags(&self) -> Vec<String> {
        self.strategy.flatten().iter().map(|m| m.tag()).collect()
    }
}

/// Default absolute budget for the `AbsCost` row.
pub const DEFAULT_ABSOLUTE_BUDGET: u32 = 2048;
/// Default budget fraction for the `RelCost` row and the combinations.
pub const DEFAULT_RELATIVE_FRACTION: f64 = 2.0;

/// The eleven strategy rows: Base, Context, Func, Total, DevOps, QAer, SEer,
/// AbsCost, RelCost, Comb1 (all context + SE role + relative cost) and
/// Comb2 (all context + smell tips + relative cost).
pub fn strategy_presets(abs_budget: u32, rel_fraction: f64) -> Vec<StrategyRow> {
    let row = |label: &str, strategy: PromptStrategy| StrategyRow {
        label: label.to_string(),
        strategy,
    };
    let rel = PromptStrategy::CostRelative {
        fraction: rel_fraction,
    };
    vec![
        row("Base", PromptStrategy::Baseline),
        row("Context", PromptStrategy::context_code()),
        row("Func", PromptStrategy::context_func()),
        row("Total", PromptStrategy::context_all()),
        row("DevOps", PromptStrategy::role(Role::Devops)),
        row("QAer", PromptStrategy::role(Role::Qaer)),
        row("SEer", PromptStrategy::role(Role::Seer)),
        row(
            "AbsCost",
            PromptStrategy::CostAbsolute {
                max_tokens: abs_budget,
            },
        ),
        row("RelCost", rel.clone()),
        row(
            "Comb1",
            PromptStrategy::combination(vec![
                PromptStrategy::context_all(),
                PromptStrategy::role(Role::Seer),
                rel.clone(),
            ]),
        ),
        row(
            "Comb2",
            PromptStrategy::combination(vec![
                PromptStrategy::context_all(),
                PromptStrategy::SmellTips,
                rel,
            ]),
        ),
    ]
}

/// Fully composed request text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub task: TaskKind,
    pub system_text: String,
    pub user_text: String,
    pub strategy_tags: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared_budget: Option<u32>,
    pub template_version: String,
}

impl PromptBundle {
    /// SHA-256 over the two message texts, hex encoded.
    pub fn fingerprint(&self) -> String {
        message_fingerprint(&self.system_text, &self.user_text)
    }
}

pub fn message_fingerprint(system: &str, user: &str) -> String {
    let mut h = Sha256::new();
    h.update(b"system\0");
    h.update(system.as_bytes());
    h.update(b"\0user\0");
    h.update(user.as_bytes());
    hex::encode(h.finalize())
}

#[derive(Debug, Clone)]
struct Template {
    name: String,
    text: String,
}

impl Template {
    fn new(name: &str, text: &str) -> Result<Self, PromptError> {
        lint_template(name, text)?;
        Ok(Self {
            name: name.to_string(),
            text: text.trim_end_matches('\n').to_string(),
        })
    }

    fn render(&self, values: &[(&str, &str)]) -> String {
        let mut out = String::with_capacity(self.text.len());
        let mut rest = self.text.as_str();
        while let Some(start) = rest.find("{{") {
            out.push_str(&rest[..start]);
            let after = &rest[start + 2..];
            let end = after.find("}}").expect("linted template");
            let name = &after[..end];
            let value = values
                .iter()
                .find(|(k, _)| *k == name)
                .map(|(_, v)| *v)
                .unwrap_or_else(|| {
                    panic!("template `{}` placeholder `{name}` has no value", self.name)
                });
            out.push_str(value);
            rest = &after[end + 2..];
        }
        out.push_str(rest);
        out
    }
}

/// Reject templates with unknown or unterminated placeholders.
pub fn lint_template(name: &str, text: &str) -> Result<(), PromptError> {
    let mut rest = text;
    while let Some(start) = rest.find("{{") {
        let after = &rest[start + 2..];
        let Some(end) = after.find("}}") else {
            return Err(PromptError::UnterminatedPlaceholder {
                template: name.to_string(),
            });
        };
        let key = &after[..end];
        if !KNOWN_PLACEHOLDERS.contains(&key) {
            return Err(PromptError::UnknownPlaceholder {
                template: name.to_string(),
                name: key.to_string(),
            });
        }
        rest = &after[end + 2..];
    }
    Ok(())
}

/// Relative paths of every template file in a set.
pub const TEMPLATE_FILES: &[&str] = &[
    "system.txt",
    "persona/software_engineer.txt",
    "persona/qa_engineer.txt",
    "persona/devops_engineer.txt",
    "task/evaluate.txt",
    "task/refactor.txt",
    "task/generate_from_doc.txt",
    "task/describe_code.txt",
    "strategy/context_code.txt",
    "strategy/context_func.txt",
    "strategy/tips.txt",
    "strategy/cost_absolute.txt",
    "strategy/cost_relative.txt",
];

const BUILTIN_V1: &[(&str, &str)] = &[
    ("system.txt", include_str!("../templates/v1/system.txt")),
    (
        "persona/software_engineer.txt",
        include_str!("../templates/v1/persona/software_engineer.txt"),
    ),
    (
        "persona/qa_engineer.txt",
        include_str!("../templates/v1/persona/qa_engineer.txt"),
    ),
    (
        "persona/devops_engineer.txt",
        include_str!("../templates/v1/persona/devops_engineer.txt"),
    ),
    (
        "task/evaluate.txt",
        include_str!("../templates/v1/task/evaluate.txt"),
    ),
    (
        "task/refactor.txt",
        include_str!("../templates/v1/task/refactor.txt"),
    ),
    (
        "task/generate_from_doc.txt",
        include_str!("../templates/v1/task/generate_from_doc.txt"),
    ),
    (
        "task/describe_code.txt",
        include_str!("../templates/v1/task/describe_code.txt"),
    ),
    (
        "strategy/context_code.txt",
        include_str!("../templates/v1/strategy/context_code.txt"),
    ),
    (
        "strategy/context_func.txt",
        include_str!("../templates/v1/strategy/context_func.txt"),
    ),
    (
        "strategy/tips.txt",
        include_str!("../templates/v1/strategy/tips.txt"),
    ),
    (
        "strategy/cost_absolute.txt",
        include_str!("../templates/v1/strategy/cost_absolute.txt"),
    ),
    (
        "strategy/cost_relative.txt",
        include_str!("../templates/v1/strategy/cost_relative.txt"),
    ),
];

/// A complete, linted set of templates.
#[derive(Debug, Clone)]
pub struct TemplateSet {
    version: String,
    templates: Vec<Template>,
}

impl TemplateSet {
    pub fn builtin() -> Self {
        Self::from_pairs("v1", BUILTIN_V1.iter().copied()).expect("shipped templates lint clean")
    }

    /// Load a template directory laid out like `templates/v1`.
    pub fn load(dir: impl AsRef<Path>, version: impl Into<String>) -> Result<Self, PromptError> {
        let dir = dir.as_ref();
        let mut pairs = Vec::new();
        for rel in TEMPLATE_FILES {
            let path = dir.join(rel);
            let text = fs::read_to_string(&path).map_err(|e| PromptError::TemplateIo {
                path: path.display().to_string(),
                reason: e.to_string(),
            })?;
            pairs.push((*rel, text));
        }
        Self::from_pairs(version, pairs.iter().map(|(k, v)| (*k, v.as_str())))
    }

    fn from_pairs<'a>(
        version: impl Into<String>,
        pairs: impl Iterator<Item = (&'a str, &'a str)>,
    ) -> Result<Self, PromptError> {
        let templates = pairs
            .map(|(name, text)| Template::new(name, text))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            version: version.into(),
            templates,
        })
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    fn get(&self, name: &str) -> &Template {
        self.templates
            .iter()
            .find(|t| t.name == name)
            .unwrap_or_else(|| panic!("template set is missing `{name}`"))
    }
}

/// Smell-tip sentence for one kind.
pub fn tip_sentence(kind: SmellKind) -> &'static str {
    match kind {
        SmellKind::ComplicatedRegexExpression => "the code contains complex regular expressions",
        SmellKind::TooLongParameterList => "the code has an excessively long parameter list",
        SmellKind::BinaryOperatorInName => {
            "the code has method names that join several operations with words such as And or Or"
        }
        SmellKind::ComplicatedBooleanExpression => {
            "the code contains complicated boolean expressions"
        }
        SmellKind::CyclomaticComplexity => {
            "the code has high cyclomatic complexity with many branches"
        }
        SmellKind::FuncName => "the code has poorly formed method names",
        SmellKind::Loops => "the code contains deeply nested or numerous loops",
        SmellKind::MutationTooMuch => "the code mutates variables excessively",
        SmellKind::PrimitiveObsession => "the code relies heavily on primitive-typed parameters",
        SmellKind::TooLong => "the code has an overly long method body",
    }
}

/// Output budget for a relative cost strategy: `ceil(fraction * tokens)`.
pub fn relative_budget(fraction: f64, lexical_tokens: usize) -> u32 {
    (fraction * lexical_tokens as f64).ceil() as u32
}

/// Compose the prompt for `sample` under `strategy`.
///
/// The subject text (the code, or the description for
/// [`TaskKind::GenerateFromDoc`]) is inserted verbatim exactly once.
/// Relative budgets are computed from the Java lexical token count of the
/// sample's code.
pub fn compose(
    sample: &SourceSample,
    task: TaskKind,
    strategy: &PromptStrategy,
    findings: &[SmellFinding],
    templates: &TemplateSet,
) -> Result<PromptBundle, PromptError> {
    strategy.validate()?;
    let members = strategy.flatten();

    let mut sections: Vec<String> = Vec::new();
    let mut system_text = templates.get("system.txt").render(&[]);
    let mut tags = Vec::new();
    let mut declared_budget = None;
    let mut task_placed = false;

    let purpose_of = |purpose: &Option<String>| -> Result<String, PromptError> {
        let text = purpose.clone().unwrap_or_else(|| sample.doc.clone());
        if text.trim().is_empty() {
            Err(PromptError::MissingDocstring(sample.id.clone()))
        } else {
            Ok(text)
        }
    };
    let code_context = |context: &Option<CodeContext>| -> String {
        let ctx = context
            .clone()
            .unwrap_or_else(|| CodeContext::for_sample(sample));
        let names = if ctx.names.is_empty() {
            "(none)".to_string()
        } else {
            ctx.names.join(", ")
        };
        let snippet = if ctx.snippet.trim().is_empty() {
            "(none)".to_string()
        } else {
            ctx.snippet.clone()
        };
        templates.get("strategy/context_code.txt").render(&[
            ("path", &ctx.path),
            ("names", &names),
            ("snippet", &snippet),
        ])
    };

    for member in members {
        if member.stage() >= Some(Stage::Tips) && !task_placed {
            sections.push(task_text(sample, task, templates));
            task_placed = true;
        }
        tags.push(member.tag());
        match member {
            PromptStrategy::Baseline | PromptStrategy::Combination { .. } => {}
            PromptStrategy::ContextCode { context } => sections.push(code_context(context)),
            PromptStrategy::ContextFunc { purpose } => {
                let doc = purpose_of(purpose)?;
                sections.push(
                    templates
                        .get("strategy/context_func.txt")
                        .render(&[("doc", &doc)]),
                );
            }
            PromptStrategy::ContextAll { context, purpose } => {
                let doc = purpose_of(purpose)?;
                sections.push(code_context(context));
                sections.push(
                    templates
                        .get("strategy/context_func.txt")
                        .render(&[("doc", &doc)]),
                );
            }
            PromptStrategy::Role { role } => {
                let persona = match role {
                    Role::Seer => "persona/software_engineer.txt",
                    Role::Qaer => "persona/qa_engineer.txt",
                    Role::Devops => "persona/devops_engineer.txt",
                };
                system_text = format!("{}\n{}", templates.get(persona).render(&[]), system_text);
            }
            PromptStrategy::SmellTips => {
                let kinds: BTreeSet<SmellKind> = findings
                    .iter()
                    .map(|f| f.kind)
                    .chain(sample.annotated_smells.iter().copied())
                    .collect();
                if !kinds.is_empty() {
                    let tips: Vec<String> = kinds
                        .iter()
                        .map(|k| format!("- {}.", tip_sentence(*k)))
                        .collect();
                    sections.push(
                        templates
                            .get("strategy/tips.txt")
                            .render(&[("tips", &tips.join("\n"))]),
                    );
                }
            }
            PromptStrategy::CostAbsolute { max_tokens } => {
                declared_budget = Some(*max_tokens);
                sections.push(
                    templates
                        .get("strategy/cost_absolute.txt")
                        .render(&[("budget", &max_tokens.to_string())]),
                );
            }
            PromptStrategy::CostRelative { fraction } => {
                let tokens = syntax::count_lexical_tokens(&sample.code).unwrap_or(0);
                let budget = relative_budget(*fraction, tokens);
                declared_budget = Some(budget);
                sections.push(
                    templates
                        .get("strategy/cost_relative.txt")
                        .render(&[("budget", &budget.to_string())]),
                );
            }
        }
    }
    if !task_placed {
        sections.push(task_text(sample, task, templates));
    }

    Ok(PromptBundle {
        task,
        system_text,
        user_text: sections.join("\n\n"),
        strategy_tags: tags,
        declared_budget,
        template_version: templates.version().to_string(),
    })
}

fn task_text(sample: &SourceSample, task: TaskKind, templates: &TemplateSet) -> String {
    let code = sample.code.as_str();
    match task {
        TaskKind::Evaluate => templates.get("task/evaluate.txt").render(&[("code", code)]),
        TaskKind::Refactor => templates.get("task/refactor.txt").render(&[("code", code)]),
        TaskKind::DescribeCode => templates
            .get("task/describe_code.txt")
            .render(&[("code", code)]),
        TaskKind::GenerateFromDoc => templates
            .get("task/generate_from_doc.txt")
            .render(&[("doc", sample.doc.as_str())]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::SampleLabel;
    use crate::smells::SmellCategory;

    fn sample() -> SourceSample {
        SourceSample::new(
            "s1",
            "boolean isEmail(String s) { return s.matches(\"^[\\\\w.]+@[\\\\w]+(\\\\.[a-z]{2,})+$\"); }",
            "Checks whether a string is an e-mail address.",
            SampleLabel::Smelly,
        )
    }

    fn finding(kind: SmellKind) -> SmellFinding {
        SmellFinding {
            kind,
            category: SmellCategory::Expression,
            span: Span::new(0, 1),
            measured_value: 12.0,
            threshold: 8.0,
            evidence: String::new(),
        }
    }

    fn t() -> TemplateSet {
        TemplateSet::builtin()
    }

    #[test]
    fn smell_tips_name_detected_kinds() {
        let b = compose(
            &sample(),
            TaskKind::Refactor,
            &PromptStrategy::SmellTips,
            &[finding(SmellKind::ComplicatedRegexExpression)],
            &t(),
        )
        .unwrap();
        assert!(b.user_text.contains("complex regular expressions"));
        assert_eq!(b.strategy_tags, ["smell_tips"]);
        assert_eq!(b.declared_budget, None);
    }

    #[test]
    fn evaluate_lists_six_dimensions() {
        let b = compose(
            &sample(),
            TaskKind::Evaluate,
            &PromptStrategy::Baseline,
            &[],
            &t(),
        )
        .unwrap();
        assert!(b.user_text.contains(
            "functional correctness, readability, robustness, maintainability, extensibility, and security"
        ));
    }

    #[test]
    fn relative_budget_is_ceiling() {
        assert_eq!(relative_budget(0.5, 200), 100);
        assert_eq!(relative_budget(0.5, 201), 101);
        // 200 lexical tokens: `x = 1 ;` is 4 tokens, 50 times
        let code = "x = 1 ;\n".repeat(50);
        let mut s = sample();
        s.code = syntax::SourceText::java(code);
        assert_eq!(syntax::count_lexical_tokens(&s.code).unwrap(), 200);
        let b = compose(
            &s,
            TaskKind::Refactor,
            &PromptStrategy::CostRelative { fraction: 0.5 },
            &[],
            &t(),
        )
        .unwrap();
        assert_eq!(b.declared_budget, Some(100));
        assert!(b.user_text.contains("within 100 tokens"));
    }

    #[test]
    fn role_changes_only_system_text() {
        let base = compose(
            &sample(),
            TaskKind::Refactor,
            &PromptStrategy::Baseline,
            &[],
            &t(),
        )
        .unwrap();
        let role = compose(
            &sample(),
            TaskKind::Refactor,
            &PromptStrategy::combination(vec![PromptStrategy::role(Role::Seer)]),
            &[],
            &t(),
        )
        .unwrap();
        assert_eq!(base.user_text, role.user_text);
        assert!(role.system_text.starts_with("You are a software engineer."));
        assert_eq!(
            role.system_text.lines().skip(1).collect::<Vec<_>>(),
            base.system_text.lines().collect::<Vec<_>>()
        );
    }

    #[test]
    fn combination_order_and_tags() {
        let strategy = PromptStrategy::combination(vec![
            PromptStrategy::CostAbsolute { max_tokens: 64 },
            PromptStrategy::SmellTips,
            PromptStrategy::role(Role::Qaer),
            PromptStrategy::context_all(),
        ]);
        let b = compose(
            &sample(),
            TaskKind::Refactor,
            &strategy,
            &[finding(SmellKind::Loops)],
            &t(),
        )
        .unwrap();
        assert_eq!(
            b.strategy_tags,
            ["context_all", "role_qaer", "smell_tips", "cost_absolute"]
        );
        assert_eq!(b.declared_budget, Some(64));
        let ctx = b.user_text.find("Context:").unwrap();
        let code = b.user_text.find("boolean isEmail").unwrap();
        let tips = b.user_text.find("Hints about").unwrap();
        let cost = b.user_text.find("within 64 tokens").unwrap();
        assert!(ctx < code && code < tips && tips < cost);
    }

    #[test]
    fn invalid_strategies() {
        let dup = PromptStrategy::combination(vec![
            PromptStrategy::role(Role::Qaer),
            PromptStrategy::role(Role::Seer),
        ]);
        assert!(dup.validate().is_err());
        assert!(PromptStrategy::combination(vec![]).validate().is_err());
        assert!(PromptStrategy::CostAbsolute { max_tokens: 0 }
            .validate()
            .is_err());
        assert!(PromptStrategy::CostRelative { fraction: 4.5 }
            .validate()
            .is_err());
        assert!(PromptStrategy::CostRelative { fraction: 4.0 }
            .validate()
            .is_ok());
        let nested = PromptStrategy::combination(vec![PromptStrategy::combination(vec![
            PromptStrategy::SmellTips,
        ])]);
        assert!(nested.validate().is_err());
    }

    #[test]
    fn missing_docstring() {
        let mut s = sample();
        s.doc.clear();
        assert_eq!(
            compose(
                &s,
                TaskKind::Refactor,
                &PromptStrategy::context_func(),
                &[],
                &t()
            ),
            Err(PromptError::MissingDocstring("s1".into()))
        );
    }

    #[test]
    fn placeholder_values_are_not_reexpanded() {
        let mut s = sample();
        s.code = syntax::SourceText::java("String t = \"{{doc}}\";");
        let b = compose(
            &s,
            TaskKind::Refactor,
            &PromptStrategy::context_func(),
            &[],
            &t(),
        )
        .unwrap();
        assert_eq!(b.user_text.matches("{{doc}}").count(), 1);
    }

    #[test]
    fn lint_rejects_unknown_placeholders() {
        assert!(lint_template("x", "hello {{code}}").is_ok());
        assert!(matches!(
            lint_template("x", "{{nope}}"),
            Err(PromptError::UnknownPlaceholder { .. })
        ));
        assert!(matches!(
            lint_template("x", "{{code"),
            Err(PromptError::UnterminatedPlaceholder { .. })
        ));
        let _ = t();
    }

    #[test]
    fn short_forms() {
        assert_eq!(
            PromptStrategy::parse_short("cost-abs:64").unwrap(),
            PromptStrategy::CostAbsolute { max_tokens: 64 }
        );
        assert_eq!(
            PromptStrategy::parse_short("role:devops").unwrap(),
            PromptStrategy::role(Role::Devops)
        );
        assert!(PromptStrategy::parse_short("cost-rel:9").is_err());
        assert!(PromptStrategy::parse_short("telepathy").is_err());
    }

    #[test]
    fn presets_are_valid() {
        let rows = strategy_presets(DEFAULT_ABSOLUTE_BUDGET, DEFAULT_RELATIVE_FRACTION);
        assert_eq!(rows.len(), 11);
        for r in &rows {
            r.strategy.validate().unwrap();
        }
    }

    #[test]
    fn code_context_from_file_excludes_unit() {
        let file =
            "package a;\nclass A {\n  int x;\n  void f() {\n    x++;\n  }\n  void g() {}\n}\n";
        let start = file.find("  void f()").unwrap();
        let end = file.find("  }\n").unwrap() + 3;
        let ctx = CodeContext::from_file("src/A.java", file, Span::new(start, end));
        assert!(!ctx.snippet.contains("x++"));
        assert!(ctx.snippet.contains("int x;"));
        assert!(ctx.snippet.contains("void g()"));
        assert_eq!(ctx.names, ["A", "f", "g"]);
    }
}
