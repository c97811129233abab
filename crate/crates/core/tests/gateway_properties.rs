mod common;

use std::fs;
use std::sync::Arc;

use proptest::prelude::*;
use tokenscope_core::corpus::{load_corpus, SourceSample};
use tokenscope_core::gateway::{
    estimate_tokens, sent_fingerprint, BackendConfig, Gateway, MockBackend, MockScript,
    RequestMeta, ScriptUsage,
};
use tokenscope_core::prompt::{compose, PromptStrategy, TaskKind, TemplateSet};

#[test]
fn estimate_matches_independent_count() {
    let dir = common::fixtures().join("text");
    let expected: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("expected.json")).unwrap()).unwrap();
    let text = fs::read_to_string(dir.join("paragraph_500.txt")).unwrap();
    assert_eq!(text.split_whitespace().count(), 500);
    assert_eq!(
        estimate_tokens(&text),
        expected["paragraph_500.txt"]["tokens"].as_u64().unwrap()
    );
}

fn samples() -> Vec<SourceSample> {
    load_corpus(common::fixtures().join("corpus/smelly.jsonl")).unwrap()
}

fn script(usage: ScriptUsage) -> MockScript {
    let mut script =
        MockScript::parse(r#"{"default": true, "output_text": "```java\n{{input_code}}\n```"}"#)
            .unwrap();
    script.entries[0].usage = Some(usage);
    script
}

fn usage(p: u64, r: u64, c: u64) -> ScriptUsage {
    ScriptUsage {
        prompt_tokens: Some(p),
        reasoning_tokens: Some(r),
        completion_tokens: Some(c),
    }
}

fn mock_gateway(script: MockScript, config: BackendConfig) -> (Gateway, Arc<MockBackend>) {
    let backend = Arc::new(MockBackend::new(script));
    (Gateway::new(backend.clone(), config).unwrap(), backend)
}

#[test]
fn absolute_budget_caps_every_request() {
    let (gw, backend) = mock_gateway(script(usage(10, 20, 5)), BackendConfig::default());
    let templates = TemplateSet::builtin();
    let strategy = PromptStrategy::CostAbsolute { max_tokens: 64 };
    let mut sent = 0;
    for s in samples() {
        for task in [
            TaskKind::Evaluate,
            TaskKind::Refactor,
            TaskKind::DescribeCode,
            TaskKind::GenerateFromDoc,
        ] {
            let bundle = compose(&s, task, &strategy, &[], &templates).unwrap();
            gw.complete(&bundle, &RequestMeta::default()).unwrap();
            sent += 1;
        }
    }
    let captured = backend.captured();
    assert_eq!(captured.len(), sent);
    assert!(captured.iter().all(|b| b["max_tokens"] == 64));
}

#[test]
fn sent_payload_matches_bundle_and_replies_repeat() {
    let (gw, backend) = mock_gateway(script(usage(100, 400, 50)), BackendConfig::default());
    let templates = TemplateSet::builtin();
    for s in samples() {
        let bundle = compose(
            &s,
            TaskKind::Refactor,
            &PromptStrategy::SmellTips,
            &[],
            &templates,
        )
        .unwrap();
        let a = gw.complete(&bundle, &RequestMeta::default()).unwrap();
        let b = gw.complete(&bundle, &RequestMeta::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.total_tokens, 550);
        assert!(a.accounting_holds() && !a.estimated);
        assert!(a.output_text.contains(s.code.as_str()));
    }
    for (body, s) in backend.captured().iter().step_by(2).zip(samples()) {
        let bundle = compose(
            &s,
            TaskKind::Refactor,
            &PromptStrategy::SmellTips,
            &[],
            &templates,
        )
        .unwrap();
        assert_eq!(sent_fingerprint(body).unwrap(), bundle.fingerprint());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn accounting_identity_holds(p in 0u64..100_000, r in 0u64..100_000, c in 0u64..100_000, includes in any::<bool>()) {
        let config = BackendConfig { completion_includes_reasoning: includes, ..Default::default() };
        let (gw, _) = mock_gateway(script(usage(p, r, c)), config);
        let s = &samples()[0];
        let bundle = compose(s, TaskKind::Evaluate, &PromptStrategy::Baseline, &[], &TemplateSet::builtin()).unwrap();
        let rec = gw.complete(&bundle, &RequestMeta::default()).unwrap();
        prop_assert!(rec.accounting_holds());
        prop_assert_eq!((rec.prompt_tokens, rec.reasoning_tokens, rec.completion_tokens), (p, r, c));
        prop_assert!(rec.wall_seconds > 0.0);
    }

    #[test]
    fn estimate_is_additive_over_whitespace(a in "[a-z_0-9(){};.+ ]{0,40}", b in "[a-z_0-9(){};.+ ]{0,40}") {
        prop_assert_eq!(estimate_tokens(&format!("{a} {b}")), estimate_tokens(&a) + estimate_tokens(&b));
    }
}
