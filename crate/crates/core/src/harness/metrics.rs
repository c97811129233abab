//! Token metrics and descriptive statistics.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complexity::{ComplexityProfile, ScoreMode};
use crate::gateway::InferenceRecord;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("wall time is zero")]
    ZeroDuration,
    #[error("baseline token count is zero")]
    ZeroBaseline,
    #[error("complexity score is zero under {0:?}")]
    ZeroComplexity(ScoreMode),
    #[error("code has no non-blank, non-comment lines")]
    ZeroLines,
    #[error("no values to aggregate")]
    EmptyInput,
    #[error("non-finite value in input")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregateStats {
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation (n - 1); 0 when `count == 1`.
    pub std: f64,
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
    /// Set when `count == 1`, where `std` is 0 by convention.
    pub single_sample: bool,
}

/// Quantile of sorted data by linear interpolation between closest ranks
/// (Hyndman-Fan type 7).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    assert!(n > 0, "quantile of empty data");
    let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn aggregate(values: &[f64]) -> Result<AggregateStats, MetricError> {
    if values.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(MetricError::NonFinite);
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
        (ss / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(AggregateStats {
        count: n,
        mean,
        std,
        min: sorted[0],
        q25: quantile_sorted(&sorted, 0.25),
        median: quantile_sorted(&sorted, 0.5),
        q75: quantile_sorted(&sorted, 0.75),
        max: sorted[n - 1],
        single_sample: n == 1,
    })
}

pub fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// Tokens per second of wall time.
pub fn time_scaled_tokens(record: &InferenceRecord) -> Result<f64, MetricError> {
    if record.wall_seconds.is_nan() || record.wall_seconds <= 0.0 {
        return Err(MetricError::ZeroDuration);
    }
    Ok(record.total_tokens as f64 / record.wall_seconds)
}

/// Relative increase of `test` over `baseline`.
pub fn growth_rate_tokens(test: f64, baseline: f64) -> Result<f64, MetricError> {
    if baseline == 0.0 {
        return Err(MetricError::ZeroBaseline);
    }
    Ok((test - baseline) / baseline)
}

pub fn growth_rate(test: &InferenceRecord, baseline: &InferenceRecord) -> Result<f64, MetricError> {
    growth_rate_tokens(test.total_tokens as f64, baseline.total_tokens as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedTokens {
    pub per_complexity: f64,
    pub per_line: f64,
}

/// `count` divided by the complexity score and by the code line count.
pub fn normalize_count(
    count: u64,
    profile: &ComplexityProfile,
    mode: ScoreMode,
) -> Result<NormalizedTokens, MetricError> {
    let score = profile
        .denominator(mode)
        .map_err(|_| MetricError::ZeroComplexity(mode))?;
    if profile.loc.code == 0 {
        return Err(MetricError::ZeroLines);
    }
    Ok(NormalizedTokens {
        per_complexity: count as f64 / score,
        per_line: count as f64 / profile.loc.code as f64,
    })
}

pub fn normalized_tokens(
    record: &InferenceRecord,
    profile: &ComplexityProfile,
    mode: ScoreMode,
) -> Result<NormalizedTokens, MetricError> {
    normalize_count(record.total_tokens, profile, mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexity::HalsteadProfile;
    use crate::syntax::LocProfile;

    fn record(tokens: u64, seconds: f64) -> InferenceRecord {
        InferenceRecord {
            prompt_tokens: tokens,
            reasoning_tokens: 0,
            completion_tokens: 0,
            total_tokens: tokens,
            wall_seconds: seconds,
            output_text: String::new(),
            backend: "mock".into(),
            fingerprint: String::new(),
            estimated: false,
            attempts: 1,
        }
    }

    fn profile(cyclomatic: usize, code_lines: usize) -> ComplexityProfile {
        ComplexityProfile {
            halstead: HalsteadProfile::from_counts(0, 0, 0, 0),
            cyclomatic,
            loc: LocProfile {
                total: code_lines,
                code: code_lines,
                blank: 0,
                comment: 0,
            },
        }
    }

    #[test]
    fn aggregate_examples() {
        let s = aggregate(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!((s.mean, s.median, s.q25, s.q75), (3.0, 3.0, 2.0, 4.0));
        assert!((s.std - 2.5f64.sqrt()).abs() < 1e-12);
        let one = aggregate(&[5.0]).unwrap();
        assert_eq!(
            (one.mean, one.min, one.max, one.median, one.std),
            (5.0, 5.0, 5.0, 5.0, 0.0)
        );
        assert!(one.single_sample);
        assert_eq!(aggregate(&[]), Err(MetricError::EmptyInput));
    }

    #[test]
    fn quantile_interpolates() {
        assert_eq!(quantile_sorted(&[1.0, 2.0, 3.0, 4.0], 0.25), 1.75);
        assert_eq!(quantile_sorted(&[7.0], 0.75), 7.0);
    }

    #[test]
    fn time_scaled_examples() {
        assert_eq!(time_scaled_tokens(&record(1000, 40.0)), Ok(25.0));
        assert_eq!(time_scaled_tokens(&record(330, 10.0)), Ok(33.0));
        assert_eq!(
            time_scaled_tokens(&record(1, 0.0)),
            Err(MetricError::ZeroDuration)
        );
    }

    #[test]
    fn growth_examples() {
        assert!(
            (growth_rate(&record(1344, 1.0), &record(1000, 1.0)).unwrap() - 0.344).abs() < 1e-12
        );
        assert_eq!(growth_rate(&record(10, 1.0), &record(10, 1.0)), Ok(0.0));
        assert_eq!(
            growth_rate(&record(10, 1.0), &record(0, 1.0)),
            Err(MetricError::ZeroBaseline)
        );
    }

    #[test]
    fn normalization_examples() {
        let n = normalize_count(2778, &profile(3, 10), ScoreMode::Cyclomatic).unwrap();
        assert!((n.per_line - 277.8).abs() < 1e-9);
        let n = normalize_count(5000, &profile(50_000, 1), ScoreMode::Cyclomatic).unwrap();
        assert!((n.per_complexity - 0.1).abs() < 1e-12);
        let n = normalize_count(0, &profile(2, 4), ScoreMode::Cyclomatic).unwrap();
        assert_eq!((n.per_complexity, n.per_line), (0.0, 0.0));
        assert_eq!(
            normalize_count(1, &profile(2, 4), ScoreMode::HalsteadEffort),
            Err(MetricError::ZeroComplexity(ScoreMode::HalsteadEffort))
        );
        assert_eq!(
            normalize_count(1, &profile(2, 0), ScoreMode::Cyclomatic),
            Err(MetricError::ZeroLines)
        );
    }
}
