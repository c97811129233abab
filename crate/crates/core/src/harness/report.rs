//! Report tables computed from journaled records.
//!
//! [`build_reports`] is a pure function of the run parameters and the
//! latest record per trial, so `verify-report` can regenerate every file and
//! compare bytes.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use super::journal::{self, extract_code, DerivedMetrics, TrialQuality, TrialRecord};
use super::metrics::{self, AggregateStats};
use super::{ExperimentError, GrowthBaseline, RunParams};
use crate::prompt::TaskKind;
use crate::similarity::{self, CodeBleuWeights};
use crate::smells::{SmellCategory, SmellKind};
use crate::syntax::SourceText;

pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportFile {
    pub name: String,
    pub bytes: Vec<u8>,
}

/// Row labels of descriptive-statistics tables, in order.
pub const STAT_ROWS: [&str; 8] = [
    "Count",
    "Mean",
    "Std. Dev.",
    "Min",
    "25% Quartile",
    "Median (50%)",
    "75% Quartile",
    "Max",
];

fn num(v: f64) -> String {
    format!("{v:.6}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn csv_file(name: &str, header: &[&str], rows: &[Vec<String>]) -> ReportFile {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory csv");
    for r in rows {
        w.write_record(r).expect("in-memory csv");
    }
    ReportFile {
        name: name.to_string(),
        bytes: w.into_inner().expect("in-memory csv"),
    }
}

fn stat_cells(s: Option<&AggregateStats>) -> [String; 8] {
    match s {
        Some(s) => [
            s.count.to_string(),
            num(s.mean),
            num(s.std),
            num(s.min),
            num(s.q25),
            num(s.median),
            num(s.q75),
            num(s.max),
        ],
        None => [
            "0".to_string(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
        ],
    }
}

/// Descriptive-statistics table with one column per series.
fn stats_table(name: &str, columns: &[(&str, Option<&AggregateStats>)]) -> ReportFile {
    let mut header = vec!["Statistic"];
    header.extend(columns.iter().map(|(c, _)| *c));
    let cells: Vec<[String; 8]> = columns.iter().map(|(_, s)| stat_cells(*s)).collect();
    let rows: Vec<Vec<String>> = STAT_ROWS
        .iter()
        .enumerate()
        .map(|(i, label)| {
            let mut row = vec![label.to_string()];
            row.extend(cells.iter().map(|c| c[i].clone()));
            row
        })
        .collect();
    csv_file(name, &header, &rows)
}

/// OK records indexed by (corpus, sample, label, step).
struct Index<'a> {
    by_key: HashMap<(&'a str, &'a str, &'a str, String), &'a TrialRecord>,
    samples: BTreeMap<&'a str, Vec<&'a str>>,
}

impl<'a> Index<'a> {
    fn new(records: &'a [TrialRecord]) -> Self {
        let mut by_key = HashMap::new();
        let mut samples: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for r in records {
            let list = samples.entry(r.corpus.as_str()).or_default();
            if !list.contains(&r.sample_id.as_str()) {
                list.push(&r.sample_id);
            }
            if r.is_ok() {
                by_key.insert(
                    (
                        r.corpus.as_str(),
                        r.sample_id.as_str(),
                        r.label.as_str(),
                        r.step(),
                    ),
                    r,
                );
            }
        }
        Self { by_key, samples }
    }

    fn get(&self, corpus: &str, sample: &str, label: &str, step: &str) -> Option<&'a TrialRecord> {
        self.by_key
            .get(&(corpus, sample, label, step.to_string()))
            .copied()
    }

    fn samples(&self, corpus: &str) -> &[&'a str] {
        self.samples.get(corpus).map_or(&[], Vec::as_slice)
    }

    /// The refactoring of the original code, unless missing or gated out.
    fn headline(&self, corpus: &str, sample: &str, label: &str) -> Option<&'a TrialRecord> {
        self.get(corpus, sample, label, "refactor/orig")
            .filter(|r| !r.gated_out())
    }

    fn output(&self, corpus: &str, sample: &str, label: &str, step: &str) -> Option<&'a str> {
        self.get(corpus, sample, label, step)
            .and_then(TrialRecord::output_text)
    }
}

fn codebleu(candidate: &str, reference: &str) -> Option<f64> {
    similarity::codebleu(
        &SourceText::java(candidate),
        &SourceText::java(reference),
        CodeBleuWeights::default(),
    )
    .ok()
    .map(|s| s.combined)
}

fn code_sim(a: &str, b: &str) -> Option<f64> {
    similarity::code_similarity(&SourceText::java(a), &SourceText::java(b))
        .ok()
        .map(|s| s.value)
}

fn doc_sim(a: &str, b: &str) -> f64 {
    similarity::docstring_similarity(a.trim(), b.trim()).value
}

/// Mean of the defined values plus how many there were.
fn mean_of(values: impl IntoIterator<Item = Option<f64>>) -> (Option<f64>, usize) {
    let v: Vec<f64> = values.into_iter().flatten().collect();
    (metrics::mean(&v), v.len())
}

/// Quality of one refactoring measured through its description round trip.
#[derive(Debug, Clone, Copy, Default)]
struct ChainQuality {
    codebleu: Option<f64>,
    code_similarity: Option<f64>,
    docstring: Option<f64>,
}

fn chain_quality(ix: &Index, corpus: &str, sample: &str, label: &str) -> ChainQuality {
    let rf = ix
        .output(corpus, sample, label, "refactor/orig")
        .map(extract_code);
    let rf_gc = ix
        .output(corpus, sample, label, "generate_from_doc/rf")
        .map(extract_code);
    let doc_rf = ix.output(corpus, sample, label, "describe_code/rf");
    let doc_rf_gc = ix.output(corpus, sample, label, "describe_code/rf_gc");
    let (codebleu_v, code_sim_v) = match (&rf, &rf_gc) {
        (Some(rf), Some(gc)) => (codebleu(gc, rf), code_sim(gc, rf)),
        _ => (None, None),
    };
    ChainQuality {
        codebleu: codebleu_v,
        code_similarity: code_sim_v,
        docstring: doc_rf.zip(doc_rf_gc).map(|(a, b)| doc_sim(a, b)),
    }
}

fn stats_json(s: &Option<AggregateStats>) -> Value {
    serde_json::to_value(s).expect("stats serialize")
}

fn trial_counts(records: &[TrialRecord]) -> Value {
    json!({
        "total": records.len(),
        "ok": records.iter().filter(|r| r.is_ok()).count(),
        "error": records.iter().filter(|r| !r.is_ok()).count(),
        "gated_out": records.iter().filter(|r| r.gated_out()).count(),
        "estimated": records.iter().filter(|r| r.inference.as_ref().is_some_and(|i| i.estimated)).count(),
    })
}

fn summary_file(value: &Value) -> ReportFile {
    ReportFile {
        name: SUMMARY_FILE.into(),
        bytes: (serde_json::to_string_pretty(value).expect("summary serializes") + "\n")
            .into_bytes(),
    }
}

/// All report files for a run, in a fixed order, `summary.json` last.
pub fn build_reports(params: &RunParams, records: &[TrialRecord]) -> Vec<ReportFile> {
    let ix = Index::new(records);
    let (mut files, tables, headline) = match params.rq {
        1 => rq1(params, &ix),
        2 => rq2(params, &ix),
        3 => rq3(params, &ix),
        4 => rq4(params, &ix),
        _ => rq5(params, &ix),
    };
    files.push(summary_file(&json!({
        "rq": params.rq,
        "score_mode": params.score_mode,
        "gate": {"metric": params.gate_metric, "threshold": params.similarity_threshold},
        "trials": trial_counts(records),
        "tables": tables,
        "headline": headline,
    })));
    files
}

type Built = (Vec<ReportFile>, Value, Value);

fn rq1(params: &RunParams, ix: &Index) -> Built {
    let label = params.rows[0].label.as_str();
    let mut plot = Vec::new();
    let mut series = BTreeMap::new();
    for corpus in ["clean", "smelly"] {
        let mut values = Vec::new();
        for s in ix.samples(corpus) {
            if let Some(v) = ix
                .get(corpus, s, label, "evaluate/orig")
                .and_then(|r| r.derived)
                .map(|d| d.tokens_per_second)
            {
                values.push(v);
                plot.push(vec![corpus.to_string(), s.to_string(), num(v)]);
            }
        }
        series.insert(corpus, metrics::aggregate(&values).ok());
    }
    let table = stats_table(
        "table_time_scaled.csv",
        &[
            ("Clean Code", series["clean"].as_ref()),
            ("Smelly Code", series["smelly"].as_ref()),
        ],
    );
    let ratio = match (&series["smelly"], &series["clean"]) {
        (Some(s), Some(c)) if c.mean > 0.0 => Some(s.mean / c.mean),
        _ => None,
    };
    (
        vec![
            table,
            csv_file(
                "plot_time_scaled.csv",
                &["corpus", "sample_id", "time_scaled_tokens"],
                &plot,
            ),
        ],
        json!({"time_scaled": {"clean": stats_json(&series["clean"]), "smelly": stats_json(&series["smelly"])}}),
        json!({"smelly_to_clean_mean_ratio": ratio}),
    )
}

fn rq2(params: &RunParams, ix: &Index) -> Built {
    let label = params.rows[0].label.as_str();
    let c = "smelly";
    let (mut orig, mut refd, mut plot) = (Vec::new(), Vec::new(), Vec::new());
    let (mut orig_tokens, mut rf_tokens) = (Vec::new(), Vec::new());
    type PairFn<'x> = Box<dyn Fn(&str) -> Option<f64> + 'x>;
    let out = |s: &str, step: &str| ix.output(c, s, label, step).map(str::to_string);
    let code_of = |s: &str, step: &str| out(s, step).map(|o| extract_code(&o));
    let input_of = |s: &str| {
        ix.get(c, s, label, "refactor/orig")
            .map(|r| r.input_text.clone())
    };
    let pairs: Vec<(&str, &str, PairFn)> = vec![
        (
            "CodeBLEU",
            "code & rf code",
            Box::new(|s| codebleu(&code_of(s, "refactor/orig")?, &input_of(s)?)),
        ),
        (
            "CodeBLEU",
            "rf code & rf gc code",
            Box::new(|s| {
                codebleu(
                    &code_of(s, "generate_from_doc/rf")?,
                    &code_of(s, "refactor/orig")?,
                )
            }),
        ),
        (
            "CodeBLEU",
            "code & gc code",
            Box::new(|s| codebleu(&code_of(s, "generate_from_doc/orig")?, &input_of(s)?)),
        ),
        (
            "Docstring",
            "code & rf code",
            Box::new(|s| {
                Some(doc_sim(
                    &out(s, "describe_code/orig")?,
                    &out(s, "describe_code/rf")?,
                ))
            }),
        ),
        (
            "Docstring",
            "code & rf gc code",
            Box::new(|s| {
                Some(doc_sim(
                    &out(s, "describe_code/orig")?,
                    &out(s, "describe_code/rf_gc")?,
                ))
            }),
        ),
        (
            "Docstring",
            "rf code & rf gc code",
            Box::new(|s| {
                Some(doc_sim(
                    &out(s, "describe_code/rf")?,
                    &out(s, "describe_code/rf_gc")?,
                ))
            }),
        ),
        (
            "Docstring",
            "code & gc code",
            Box::new(|s| {
                Some(doc_sim(
                    &out(s, "describe_code/orig")?,
                    &out(s, "describe_code/gc")?,
                ))
            }),
        ),
        (
            "Code Similarity",
            "code & rf code",
            Box::new(|s| code_sim(&code_of(s, "refactor/orig")?, &input_of(s)?)),
        ),
        (
            "Code Similarity",
            "rf code & rf gc code",
            Box::new(|s| {
                code_sim(
                    &code_of(s, "generate_from_doc/rf")?,
                    &code_of(s, "refactor/orig")?,
                )
            }),
        ),
        (
            "Code Similarity",
            "code & gc code",
            Box::new(|s| code_sim(&code_of(s, "generate_from_doc/orig")?, &input_of(s)?)),
        ),
    ];
    let mut pair_values: Vec<Vec<Option<f64>>> = vec![Vec::new(); pairs.len()];
    for s in ix.samples(c) {
        let Some(o) = ix.headline(c, s, label) else {
            continue;
        };
        let Some(r) = ix.get(c, s, label, "refactor/rf") else {
            continue;
        };
        let po = o.derived.and_then(|d| d.tokens_per_complexity);
        let pr = r.derived.and_then(|d| d.tokens_per_complexity);
        if let (Some(po), Some(pr)) = (po, pr) {
            orig.push(po);
            refd.push(pr);
            plot.push(vec![s.to_string(), num(po), num(pr)]);
        }
        orig_tokens.push(o.total_tokens().unwrap_or(0) as f64);
        rf_tokens.push(r.total_tokens().unwrap_or(0) as f64);
        for (k, (_, _, f)) in pairs.iter().enumerate() {
            pair_values[k].push(f(s));
        }
    }
    let so = metrics::aggregate(&orig).ok();
    let sr = metrics::aggregate(&refd).ok();
    let mut sim_rows = Vec::new();
    let mut sim_json = Vec::new();
    for (k, (cat, metric, _)) in pairs.iter().enumerate() {
        let (m, n) = mean_of(pair_values[k].iter().copied());
        sim_rows.push(vec![
            cat.to_string(),
            metric.to_string(),
            opt(m),
            n.to_string(),
        ]);
        sim_json.push(json!({"category": cat, "metric": metric, "mean": m, "count": n}));
    }
    let reduction = match (metrics::mean(&orig_tokens), metrics::mean(&rf_tokens)) {
        (Some(a), Some(b)) if a > 0.0 => Some(1.0 - b / a),
        _ => None,
    };
    (
        vec![
            stats_table(
                "table_token_per_complexity.csv",
                &[
                    ("Original Code", so.as_ref()),
                    ("Refactored Code", sr.as_ref()),
                ],
            ),
            csv_file(
                "table_similarity.csv",
                &["Category", "Metric", "Mean", "Count"],
                &sim_rows,
            ),
            csv_file(
                "plot_token_per_complexity.csv",
                &["sample_id", "original", "refactored"],
                &plot,
            ),
        ],
        json!({
            "token_per_complexity": {"original": stats_json(&so), "refactored": stats_json(&sr)},
            "similarity": sim_json,
        }),
        json!({"refactor_token_reduction": reduction}),
    )
}

fn rq3(params: &RunParams, ix: &Index) -> Built {
    let label = params.rows[0].label.as_str();
    let c = "smelly";
    let clean_mean = metrics::mean(
        &ix.samples("clean")
            .iter()
            .filter_map(|s| {
                ix.headline("clean", s, label)
                    .and_then(TrialRecord::total_tokens)
            })
            .map(|t| t as f64)
            .collect::<Vec<_>>(),
    );
    let mut by_kind: BTreeMap<SmellKind, Vec<f64>> = BTreeMap::new();
    let mut by_cat: BTreeMap<SmellCategory, Vec<f64>> = BTreeMap::new();
    let mut plot = Vec::new();
    for s in ix.samples(c) {
        let Some(o) = ix.headline(c, s, label) else {
            continue;
        };
        let baseline = match params.growth_baseline {
            GrowthBaseline::Refactored => ix
                .get(c, s, label, "refactor/rf")
                .and_then(TrialRecord::total_tokens)
                .map(|t| t as f64),
            GrowthBaseline::CleanMean => clean_mean,
        };
        let Some(baseline) = baseline else { continue };
        let Ok(g) = metrics::growth_rate_tokens(o.total_tokens().unwrap_or(0) as f64, baseline)
        else {
            continue;
        };
        let mut cats = Vec::new();
        for k in &o.smell_kinds {
            by_kind.entry(*k).or_default().push(g);
            let cat = params.detector.category_of(*k);
            if !cats.contains(&cat) {
                cats.push(cat);
            }
        }
        for cat in cats {
            by_cat.entry(cat).or_default().push(g);
        }
        let kinds: Vec<&str> = o.smell_kinds.iter().map(SmellKind::as_str).collect();
        plot.push(vec![s.to_string(), num(g), kinds.join(";")]);
    }
    let kind_rows: Vec<Vec<String>> = SmellKind::ALL
        .iter()
        .map(|k| {
            let v = by_kind.get(k).map_or(&[][..], Vec::as_slice);
            vec![
                k.as_str().to_string(),
                opt(metrics::mean(v)),
                v.len().to_string(),
            ]
        })
        .collect();
    let cats = [
        SmellCategory::Naming,
        SmellCategory::Expression,
        SmellCategory::Structure,
        SmellCategory::Design,
    ];
    let cat_rows: Vec<Vec<String>> = cats
        .iter()
        .map(|c| {
            let v = by_cat.get(c).map_or(&[][..], Vec::as_slice);
            vec![format!("{c:?}"), opt(metrics::mean(v)), v.len().to_string()]
        })
        .collect();
    let kind_json: BTreeMap<&str, Option<f64>> = SmellKind::ALL
        .iter()
        .map(|k| (k.as_str(), by_kind.get(k).and_then(|v| metrics::mean(v))))
        .collect();
    let cat_json: BTreeMap<String, Option<f64>> = cats
        .iter()
        .map(|c| {
            (
                format!("{c:?}"),
                by_cat.get(c).and_then(|v| metrics::mean(v)),
            )
        })
        .collect();
    (
        vec![
            csv_file(
                "table_growth_by_smell.csv",
                &["Smell Type", "Avg. Growth Rate", "Samples"],
                &kind_rows,
            ),
            csv_file(
                "plot_growth_by_category.csv",
                &["Category", "Avg. Growth Rate", "Samples"],
                &cat_rows,
            ),
            csv_file(
                "plot_growth_by_sample.csv",
                &["sample_id", "growth_rate", "smell_kinds"],
                &plot,
            ),
        ],
        json!({"growth_by_smell": kind_json, "growth_by_category": cat_json}),
        json!({"baseline": params.growth_baseline, "clean_mean_tokens": clean_mean}),
    )
}

fn rq4(params: &RunParams, ix: &Index) -> Built {
    let c = "smelly";
    let control = params.rows[0].label.as_str();
    let treat = params.rows[1].label.as_str();
    let (mut vc, mut vt, mut plot) = (Vec::new(), Vec::new(), Vec::new());
    let (mut qc, mut qt) = (Vec::new(), Vec::new());
    for s in ix.samples(c) {
        let (Some(a), Some(b)) = (ix.headline(c, s, control), ix.headline(c, s, treat)) else {
            continue;
        };
        let (ta, tb) = (
            a.total_tokens().unwrap_or(0) as f64,
            b.total_tokens().unwrap_or(0) as f64,
        );
        vc.push(ta);
        vt.push(tb);
        plot.push(vec![s.to_string(), num(ta), num(tb)]);
        qc.push(chain_quality(ix, c, s, control));
        qt.push(chain_quality(ix, c, s, treat));
    }
    let sc = metrics::aggregate(&vc).ok();
    let st = metrics::aggregate(&vt).ok();
    let reduction = match (&sc, &st) {
        (Some(a), Some(b)) if a.mean > 0.0 => Some(1.0 - b.mean / a.mean),
        _ => None,
    };
    let quality_rows = |f: fn(&ChainQuality) -> Option<f64>| {
        (mean_of(qt.iter().map(f)).0, mean_of(qc.iter().map(f)).0)
    };
    type Pick = fn(&ChainQuality) -> Option<f64>;
    let metrics_list: [(&str, Pick); 3] = [
        ("CodeBLEU", |q| q.codebleu),
        ("Code Similarity", |q| q.code_similarity),
        ("Docstring Similarity", |q| q.docstring),
    ];
    let mut rows = Vec::new();
    let mut qjson = Vec::new();
    for (name, f) in metrics_list {
        let (t, c) = quality_rows(f);
        rows.push(vec![name.to_string(), opt(t), opt(c)]);
        qjson.push(json!({"metric": name, "treatment": t, "control": c}));
    }
    let mean_treat = format!("Mean ({treat})");
    let mean_control = format!("Mean ({control})");
    (
        vec![
            stats_table(
                "table_tips_tokens.csv",
                &[(control, sc.as_ref()), (treat, st.as_ref())],
            ),
            csv_file(
                "table_tips_quality.csv",
                &["Metric", &mean_treat, &mean_control],
                &rows,
            ),
            csv_file(
                "plot_tips_tokens.csv",
                &["sample_id", control, treat],
                &plot,
            ),
        ],
        json!({
            "total_tokens": {"control": stats_json(&sc), "treatment": stats_json(&st)},
            "quality": qjson,
        }),
        json!({"mean_reduction": reduction, "paired_samples": vc.len()}),
    )
}

fn rq5(params: &RunParams, ix: &Index) -> Built {
    let c = "smelly";
    let mut token_rows = Vec::new();
    let mut quality_rows = Vec::new();
    let mut rows_json = Vec::new();
    let mut base_mean = None;
    for (i, row) in params.rows.iter().enumerate() {
        let label = row.label.as_str();
        let heads: Vec<&TrialRecord> = ix
            .samples(c)
            .iter()
            .filter_map(|s| ix.headline(c, s, label))
            .collect();
        let d: Vec<DerivedMetrics> = heads.iter().filter_map(|r| r.derived).collect();
        let (cpc, _) = mean_of(d.iter().map(|d| d.completion_per_complexity));
        let (cpl, _) = mean_of(d.iter().map(|d| d.completion_per_line));
        let (tpc, _) = mean_of(d.iter().map(|d| d.tokens_per_complexity));
        let (tpl, _) = mean_of(d.iter().map(|d| d.tokens_per_line));
        let totals: Vec<f64> = heads
            .iter()
            .filter_map(|r| r.total_tokens())
            .map(|t| t as f64)
            .collect();
        let mean_total = metrics::mean(&totals);
        if i == 0 {
            base_mean = mean_total;
        }
        let change = match (mean_total, base_mean) {
            (Some(m), Some(b)) if b > 0.0 => Some(m / b - 1.0),
            _ => None,
        };
        token_rows.push(vec![
            label.to_string(),
            opt(cpc),
            opt(cpl),
            opt(tpc),
            opt(tpl),
            heads.len().to_string(),
        ]);
        let q: Vec<ChainQuality> = ix
            .samples(c)
            .iter()
            .filter(|s| ix.headline(c, s, label).is_some())
            .map(|s| chain_quality(ix, c, s, label))
            .collect();
        let (cb, _) = mean_of(q.iter().map(|q| q.codebleu));
        let (ds, _) = mean_of(q.iter().map(|q| q.docstring));
        let (cs, _) = mean_of(q.iter().map(|q| q.code_similarity));
        quality_rows.push(vec![label.to_string(), opt(cb), opt(ds), opt(cs)]);
        rows_json.push(json!({
            "label": label,
            "tags": row.strategy_tags(),
            "comp_norm_code": cpc, "line_scaled_code": cpl,
            "comp_norm_token": tpc, "line_scaled_token": tpl,
            "mean_total_tokens": mean_total, "change_vs_first_row": change,
            "codebleu": cb, "docstring_similarity": ds, "code_similarity": cs,
            "samples": heads.len(),
        }));
    }
    (
        vec![
            csv_file(
                "table_strategy_tokens.csv",
                &[
                    "Strategy",
                    "Comp-Norm Code",
                    "Line-Scaled Code",
                    "Comp-Norm Token",
                    "Line-Scaled Token",
                    "Samples",
                ],
                &token_rows,
            ),
            csv_file(
                "table_strategy_quality.csv",
                &[
                    "Strategy",
                    "Mean CodeBLEU",
                    "Mean Docstring Similarity",
                    "Mean Code Similarity",
                ],
                &quality_rows,
            ),
        ],
        json!({"strategies": rows_json}),
        json!({"rows": params.rows.len()}),
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct VerifyOutcome {
    pub records_checked: usize,
    pub files_checked: usize,
    pub mismatches: Vec<String>,
}

impl VerifyOutcome {
    pub fn is_clean(&self) -> bool {
        self.mismatches.is_empty()
    }
}

fn same<T: Serialize>(a: &T, b: &T) -> bool {
    serde_json::to_value(a).ok() == serde_json::to_value(b).ok()
}

/// Recompute every derived field from the journal and regenerate every
/// report file, listing anything that differs from what is on disk.
pub fn verify_reports(out_dir: &Path) -> Result<VerifyOutcome, ExperimentError> {
    let params = RunParams::load(out_dir)?;
    let all = journal::read_journal(out_dir.join(journal::JOURNAL_FILE))?;
    let latest = journal::latest_records(&all);
    let mut outcome = VerifyOutcome::default();

    for r in &latest {
        outcome.records_checked += 1;
        let mut bad = |what: &str| outcome.mismatches.push(format!("{}: {what}", r.trial_id));
        if !r.is_ok() {
            if r.derived.is_some() {
                bad("failed trial carries derived metrics");
            }
            continue;
        }
        let Some(inf) = &r.inference else {
            bad("ok trial has no inference record");
            continue;
        };
        if !inf.estimated && !inf.accounting_holds() {
            bad("total_tokens != prompt + reasoning + completion");
        }
        let complexity = journal::input_complexity(r.task, &r.input_text);
        if !same(&complexity, &r.complexity) {
            bad("complexity profile differs from recomputation");
        }
        match DerivedMetrics::compute(inf, complexity.as_ref(), params.score_mode) {
            Ok(d) if same(&Some(d), &r.derived) => {}
            _ => bad("derived metrics differ from recomputation"),
        }
        if r.task == TaskKind::Refactor {
            let q = TrialQuality::compute(
                &r.input_text,
                &extract_code(&inf.output_text),
                params.gate_metric,
                params.similarity_threshold,
            );
            if !same(&Some(q), &r.quality) {
                bad("quality scores differ from recomputation");
            }
        }
    }

    for file in build_reports(&params, &latest) {
        outcome.files_checked += 1;
        let path = out_dir.join(&file.name);
        match fs::read(&path) {
            Ok(bytes) if bytes == file.bytes => {}
            Ok(bytes) => outcome.mismatches.push(format!(
                "{}: {}",
                file.name,
                first_difference(&bytes, &file.bytes)
            )),
            Err(_) => outcome.mismatches.push(format!("{}: missing", file.name)),
        }
    }
    Ok(outcome)
}

fn first_difference(found: &[u8], expected: &[u8]) -> String {
    let found = String::from_utf8_lossy(found);
    let expected = String::from_utf8_lossy(expected);
    for (i, (f, e)) in found.lines().zip(expected.lines()).enumerate() {
        if f != e {
            return format!("line {}: found `{f}`, expected `{e}`", i + 1);
        }
    }
    format!(
        "length differs ({} vs {} lines)",
        found.lines().count(),
        expected.lines().count()
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_table_has_eight_rows() {
        let s = metrics::aggregate(&[1.0, 2.0, 3.0]).unwrap();
        let f = stats_table("t.csv", &[("A", Some(&s)), ("B", None)]);
        let text = String::from_utf8(f.bytes).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 9);
        assert_eq!(lines[0], "Statistic,A,B");
        assert_eq!(lines[1], "Count,3,0");
        assert_eq!(lines[2], "Mean,2.000000,");
        assert!(lines[8].starts_with("Max,"));
    }
}
