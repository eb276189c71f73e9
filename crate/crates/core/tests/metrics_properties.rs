use cepkit::metrics::{
    count_confusion, focal_loss, precision_recall_f1, ClassCounts, ClassMetrics, ConfusionCounts, FocalParams,
};
use cepkit::seed::rng_from_seed;
use cepkit::{CeClass, CeSet};
use proptest::prelude::*;
use rand::Rng;

fn label_set() -> impl Strategy<Value = CeSet> {
    // Mostly empty, like real label streams.
    prop_oneof![
        6 => Just(CeSet::EMPTY),
        1 => (0u8..8).prop_map(|bits| {
            CeClass::POSITIVE
                .into_iter()
                .enumerate()
                .filter(|(i, _)| bits & (1 << i) != 0)
                .map(|(_, c)| c)
                .collect()
        }),
    ]
}

fn paired(len: std::ops::Range<usize>) -> impl Strategy<Value = (Vec<CeSet>, Vec<CeSet>)> {
    len.prop_flat_map(|n| (prop::collection::vec(label_set(), n), prop::collection::vec(label_set(), n)))
}

proptest! {
    #[test]
    fn metric_bounds((pred, truth) in paired(0..200)) {
        let counts = count_confusion(&pred, &truth).unwrap();
        let report = precision_recall_f1(&counts);
        for c in CeClass::ALL {
            let m = report.class(c);
            for v in [m.precision, m.recall, m.f1] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            prop_assert!(m.f1 <= m.precision.max(m.recall) + 1e-15);
            prop_assert_eq!(m.f1 == 0.0, counts.get(c).tp == 0);
        }
        for (_, m) in report.rows() {
            prop_assert!((0.0..=1.0).contains(&m.f1));
        }
    }

    #[test]
    fn truth_support_is_tp_plus_fn((pred, truth) in paired(0..200)) {
        let counts = count_confusion(&pred, &truth).unwrap();
        for c in CeClass::ALL {
            let support = truth.iter().filter(|s| s.contains(c)).count() as u64;
            let ClassCounts { tp, fn_, .. } = counts.get(c);
            prop_assert_eq!(tp + fn_, support);
        }
    }

    #[test]
    fn counts_are_additive_over_shards((pred, truth) in paired(0..200), split in 0usize..200) {
        let k = split.min(pred.len());
        let whole = count_confusion(&pred, &truth).unwrap();
        let left = count_confusion(&pred[..k], &truth[..k]).unwrap();
        let right = count_confusion(&pred[k..], &truth[k..]).unwrap();
        prop_assert_eq!(whole, left + right);
        prop_assert_eq!(whole, [left, right].into_iter().sum::<ConfusionCounts>());
    }
}

/// Direct transcription of the summed focal loss, written without the
/// library's helpers.
fn focal_oracle(probs: &[Vec<[f64; 4]>], truth: &[Vec<CeSet>], gamma: f64, alpha: [f64; 4]) -> f64 {
    let mut loss = 0.0;
    for i in 0..probs.len() {
        for t in 0..probs[i].len() {
            let s = truth[i][t];
            let y = if s.contains(CeClass::E1) {
                1
            } else if s.contains(CeClass::E2) {
                2
            } else if s.contains(CeClass::E3) {
                3
            } else {
                0
            };
            let p = probs[i][t][y];
            loss += -(alpha[y] * (1.0 - p).powf(gamma) * p.ln());
        }
    }
    loss
}

fn random_problem(seed: u64) -> (Vec<Vec<[f64; 4]>>, Vec<Vec<CeSet>>) {
    let mut rng = rng_from_seed(seed);
    let n = rng.gen_range(1..6);
    let mut probs = Vec::new();
    let mut truth = Vec::new();
    for _ in 0..n {
        let len = rng.gen_range(1..80);
        let mut p_seq = Vec::new();
        let mut y_seq = Vec::new();
        for _ in 0..len {
            let raw: [f64; 4] = std::array::from_fn(|_| rng.gen_range(0.01..1.0));
            let sum: f64 = raw.iter().sum();
            p_seq.push(raw.map(|v| v / sum));
            let mut set = CeSet::EMPTY;
            for c in CeClass::POSITIVE {
                if rng.gen_bool(0.1) {
                    set.insert(c);
                }
            }
            y_seq.push(set);
        }
        probs.push(p_seq);
        truth.push(y_seq);
    }
    (probs, truth)
}

#[test]
fn focal_loss_matches_direct_summation() {
    for seed in 0..200 {
        let (probs, truth) = random_problem(seed);
        let params = FocalParams::default();
        let got = focal_loss(&probs, &truth, &params).unwrap();
        let want = focal_oracle(&probs, &truth, params.gamma, params.alpha);
        assert!((got - want).abs() <= 1e-9, "seed {seed}: {got} vs {want}");

        let odd = FocalParams {
            gamma: 0.5 + seed as f64 / 100.0,
            alpha: [0.1, 0.2, 0.3, 0.4],
        };
        let got = focal_loss(&probs, &truth, &odd).unwrap();
        let want = focal_oracle(&probs, &truth, odd.gamma, odd.alpha);
        assert!((got - want).abs() <= 1e-9);
    }
}

#[test]
fn focal_loss_without_focusing_is_cross_entropy() {
    for seed in 0..200 {
        let (probs, truth) = random_problem(1000 + seed);
        let params = FocalParams {
            gamma: 0.0,
            alpha: [1.0; 4],
        };
        let got = focal_loss(&probs, &truth, &params).unwrap();
        let ce: f64 = probs
            .iter()
            .zip(&truth)
            .flat_map(|(p, y)| p.iter().zip(y))
            .map(|(p, y)| -p[cepkit::metrics::single_class(*y).index()].ln())
            .sum();
        assert!((got - ce).abs() <= 1e-9, "{got} vs {ce}");
    }
}

#[test]
fn harmonic_mean_identity() {
    let m = ClassMetrics::from_counts(ClassCounts { tp: 3, fp: 1, fn_: 5 });
    let (p, r) = (0.75, 3.0 / 8.0);
    assert_eq!(m.precision, p);
    assert_eq!(m.recall, r);
    assert!((m.f1 - 2.0 * p * r / (p + r)).abs() < 1e-15);
}
