use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tokenscope_core::harness::aggregate;

/// Brute-force reference: sort, interpolate between neighbours, two-pass
/// sample variance.
fn oracle(values: &[f64]) -> [f64; 8] {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    let q = |p: f64| {
        let h = (n - 1) as f64 * p;
        let lo = h.floor() as usize;
        let hi = h.ceil() as usize;
        v[lo] + (h - lo as f64) * (v[hi] - v[lo])
    };
    let mean = v.iter().sum::<f64>() / n as f64;
    let var = if n > 1 {
        v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    [
        n as f64,
        mean,
        var.sqrt(),
        v[0],
        q(0.25),
        q(0.5),
        q(0.75),
        v[n - 1],
    ]
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * b.abs().max(1.0)
}

#[test]
fn seeded_random_values_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(300);
    let values: Vec<f64> = (0..300).map(|_| rng.gen_range(0.0..10_000.0)).collect();
    let s = aggregate(&values).unwrap();
    let got = [
        s.count as f64,
        s.mean,
        s.std,
        s.min,
        s.q25,
        s.median,
        s.q75,
        s.max,
    ];
    for (g, w) in got.iter().zip(oracle(&values)) {
        assert!(close(*g, w), "{g} vs {w}");
    }
}

#[test]
fn symmetric_list() {
    let s = aggregate(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
    assert_eq!((s.mean, s.median, s.q25, s.q75), (3.0, 3.0, 2.0, 4.0));
}

#[test]
fn single_value_is_flagged() {
    let s = aggregate(&[5.0]).unwrap();
    assert!(s.single_sample);
    assert_eq!(
        (s.mean, s.min, s.max, s.median, s.std),
        (5.0, 5.0, 5.0, 5.0, 0.0)
    );
}

#[test]
fn empty_input_is_an_error() {
    assert!(aggregate(&[]).is_err());
}

proptest! {
    #[test]
    fn order_statistics_are_monotone(values in prop::collection::vec(-1e6f64..1e6, 1..200)) {
        let s = aggregate(&values).unwrap();
        prop_assert_eq!(s.count, values.len());
        prop_assert!(s.min <= s.q25 && s.q25 <= s.median && s.median <= s.q75 && s.q75 <= s.max);
        prop_assert!(s.std >= 0.0);
        for (g, w) in [s.mean, s.std, s.q25, s.median, s.q75].iter().zip([1, 2, 4, 5, 6].map(|i| oracle(&values)[i])) {
            prop_assert!((g - w).abs() <= 1e-6 * w.abs().max(1.0));
        }
    }
}
