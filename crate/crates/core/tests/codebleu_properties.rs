mod common;

use std::collections::HashMap;
use std::fs;

use proptest::prelude::*;
use tokenscope_core::corpus::load_corpus;
use tokenscope_core::similarity::{self, codebleu, docstring_similarity, CodeBleuWeights};
use tokenscope_core::syntax::{self, SourceText};

fn corpus_snippets() -> Vec<String> {
    let root = common::fixtures();
    let mut out: Vec<String> = ["corpus/smelly.jsonl", "corpus/clean.jsonl"]
        .iter()
        .flat_map(|f| load_corpus(root.join(f)).unwrap())
        .map(|s| s.code.as_str().to_string())
        .collect();
    let mut files: Vec<_> = fs::read_dir(root.join("smells"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "java"))
        .collect();
    files.sort();
    out.extend(files.iter().map(|p| fs::read_to_string(p).unwrap()));
    out
}

/// Rename every identifier consistently to `v0`, `v1`, ... in order of first
/// appearance.
fn rename_identifiers(code: &str) -> String {
    let src = SourceText::java(code);
    let tree = syntax::parse(&src).unwrap();
    let mut names: HashMap<String, String> = HashMap::new();
    let mut out = String::new();
    let mut pos = 0;
    for tok in tree.tokens() {
        if tree.kind(tok) != "identifier" {
            continue;
        }
        let span = tree.span(tok);
        let next = names.len();
        let new = names
            .entry(span.slice(code).to_string())
            .or_insert_with(|| format!("v{next}"))
            .clone();
        out.push_str(&code[pos..span.start]);
        out.push_str(&new);
        pos = span.end;
    }
    out.push_str(&code[pos..]);
    out
}

fn renamed_pairs() -> Vec<(String, String)> {
    let path = common::fixtures().join("similarity/renamed_pairs.json");
    let v: Vec<serde_json::Value> =
        serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    v.iter()
        .map(|p| {
            (
                p["original"].as_str().unwrap().to_string(),
                p["renamed"].as_str().unwrap().to_string(),
            )
        })
        .collect()
}

#[test]
fn self_similarity_is_one_on_corpus() {
    let snippets = corpus_snippets();
    assert!(snippets.len() >= 50, "only {} snippets", snippets.len());
    for code in snippets.iter().take(50) {
        let s = SourceText::java(code.as_str());
        let score = codebleu(&s, &s, CodeBleuWeights::default()).unwrap();
        assert_eq!(score.combined, 1.0, "{code}");
    }
}

#[test]
fn renamed_pairs_keep_ast_match() {
    for (a, b) in renamed_pairs() {
        let score = codebleu(
            &SourceText::java(b.as_str()),
            &SourceText::java(a.as_str()),
            CodeBleuWeights::default(),
        )
        .unwrap();
        assert_eq!(score.ast_match, 1.0, "{a} vs {b}");
        assert_eq!(score.dataflow_match, 1.0, "{a} vs {b}");
        assert!(score.ngram < 1.0);
    }
    for code in corpus_snippets() {
        let renamed = rename_identifiers(&code);
        let score = codebleu(
            &SourceText::java(renamed.as_str()),
            &SourceText::java(code.as_str()),
            CodeBleuWeights::default(),
        )
        .unwrap();
        assert_eq!(score.ast_match, 1.0, "{renamed}");
    }
}

#[test]
fn both_empty_is_flagged_one() {
    let e = SourceText::java("");
    let score = codebleu(&e, &e, CodeBleuWeights::default()).unwrap();
    assert!(score.degenerate);
    assert_eq!(score.combined, 1.0);
}

#[test]
fn bleu_grows_with_unigram_overlap() {
    // Reference tokens are distinct and shared tokens are placed at
    // non-adjacent positions, so higher-order matches stay at zero while
    // unigram overlap grows.
    let reference: Vec<String> = (0..12).map(|i| format!("r{i}")).collect();
    let reference: Vec<&str> = reference.iter().map(String::as_str).collect();
    let mut candidate: Vec<String> = (0..12).map(|i| format!("c{i}")).collect();
    let mut last = 0.0;
    for (step, pos) in (0..12).step_by(2).enumerate() {
        candidate[pos] = reference[step].to_string();
        let cand: Vec<&str> = candidate.iter().map(String::as_str).collect();
        let score = similarity::smoothed_bleu(&cand, &reference);
        assert!(score >= last, "step {step}: {score} < {last}");
        last = score;
    }
    assert!(last > 0.0);
}

const VOCAB: &[&str] = &[
    "int", "x", "y", "=", "+", ";", "(", ")", "{", "}", "return", "if", "for", "while", "foo",
    "bar", "1", "0", "\"s\"", "&&", "||", "!", "class", "void", "String", ".", ",", "new", "[",
    "]", "<", ">", "//c\n",
];

fn token_soup() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(VOCAB), 0..60).prop_map(|v| v.join(" "))
}

fn weights() -> impl Strategy<Value = CodeBleuWeights> {
    (0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0).prop_map(|(a, b, c, d)| {
        let s = a + b + c + d + 1e-9;
        let (a, b, c) = (a / s, b / s, c / s);
        CodeBleuWeights {
            ngram: a,
            weighted_ngram: b,
            ast_match: c,
            dataflow_match: 1.0 - a - b - c,
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn components_stay_in_unit_interval(a in token_soup(), b in token_soup()) {
        let s = codebleu(&SourceText::java(a), &SourceText::java(b), CodeBleuWeights::default()).unwrap();
        for v in [s.ngram, s.weighted_ngram, s.ast_match, s.dataflow_match, s.combined] {
            prop_assert!((0.0..=1.0).contains(&v), "{v}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn combined_is_weighted_sum(a in token_soup(), b in token_soup(), w in weights()) {
        prop_assume!(w.validate().is_ok());
        let s = codebleu(&SourceText::java(a), &SourceText::java(b), w).unwrap();
        let sum = w.ngram * s.ngram + w.weighted_ngram * s.weighted_ngram
            + w.ast_match * s.ast_match + w.dataflow_match * s.dataflow_match;
        prop_assert!((s.combined - sum.clamp(0.0, 1.0)).abs() < 1e-12);
    }

    #[test]
    fn self_similarity_on_soup(a in token_soup()) {
        let s = SourceText::java(a);
        prop_assert_eq!(codebleu(&s, &s, CodeBleuWeights::default()).unwrap().combined, 1.0);
    }

    #[test]
    fn docstring_similarity_is_symmetric(a in "[a-z ]{0,80}", b in "[a-z ]{0,80}") {
        let ab = docstring_similarity(&a, &b).value;
        let ba = docstring_similarity(&b, &a).value;
        prop_assert!((ab - ba).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&ab));
    }
}
