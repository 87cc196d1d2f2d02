use gaitlock::metrics::{evaluate, ConfusionMatrix, Measures};
use proptest::prelude::*;

fn label_pairs() -> impl Strategy<Value = (Vec<String>, Vec<String>)> {
    (1usize..6, 1usize..60).prop_flat_map(|(k, n)| {
        let label = (0..k).prop_map(|i| format!("k{i}"));
        (proptest::collection::vec(label.clone(), n), proptest::collection::vec(label, n))
    })
}

/// Recount straight from the label lists.
fn brute_force(truth: &[String], pred: &[String]) -> Measures<f64> {
    let mut classes: Vec<&String> = truth.iter().chain(pred).collect();
    classes.sort();
    classes.dedup();
    let n = truth.len() as f64;
    let correct = truth.iter().zip(pred).filter(|(t, p)| t == p).count() as f64;
    let (mut p_sum, mut r_sum) = (0.0, 0.0);
    for c in &classes {
        let tp = truth.iter().zip(pred).filter(|(t, p)| t == c && p == c).count() as f64;
        let predicted = pred.iter().filter(|p| p == c).count() as f64;
        let actual = truth.iter().filter(|t| t == c).count() as f64;
        p_sum += if predicted > 0.0 { tp / predicted } else { 0.0 };
        r_sum += if actual > 0.0 { tp / actual } else { 0.0 };
    }
    let k = classes.len() as f64;
    let (p, r) = (p_sum / k, r_sum / k);
    Measures { accuracy: correct / n, precision: p, recall: r, f_measure: if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 } }
}

fn close(a: &Measures<f64>, b: &Measures<f64>) -> bool {
    let eq = |x: f64, y: f64| (x - y).abs() <= 1e-12;
    eq(a.accuracy, b.accuracy) && eq(a.precision, b.precision) && eq(a.recall, b.recall) && eq(a.f_measure, b.f_measure)
}

fn permuted(cm: &ConfusionMatrix, order: &[usize]) -> ConfusionMatrix {
    ConfusionMatrix {
        classes: order.iter().map(|&i| cm.classes[i].clone()).collect(),
        counts: order.iter().map(|&i| order.iter().map(|&j| cm.counts[i][j]).collect()).collect(),
    }
}

proptest! {
    #[test]
    fn matches_recount((truth, pred) in label_pairs()) {
        let m = evaluate(&truth, &pred).unwrap().measures::<f64>().unwrap();
        let b = brute_force(&truth, &pred);
        prop_assert!(close(&m, &b), "{:?} vs {:?}", m, b);
    }

    #[test]
    fn bounds((truth, pred) in label_pairs()) {
        let m = evaluate(&truth, &pred).unwrap().measures::<f64>().unwrap();
        prop_assert!((0.0..=1.0).contains(&m.accuracy));
        if m.precision > 0.0 && m.recall > 0.0 {
            prop_assert!(m.f_measure >= m.precision.min(m.recall) - 1e-15);
            prop_assert!(m.f_measure <= m.precision.max(m.recall) + 1e-15);
        }
    }

    #[test]
    fn class_order_does_not_matter((truth, pred) in label_pairs(), seed in any::<u64>()) {
        let cm = evaluate(&truth, &pred).unwrap();
        let k = cm.classes.len();
        let mut order: Vec<usize> = (0..k).collect();
        // deterministic shuffle from the seed
        for i in (1..k).rev() {
            order.swap(i, (seed.rotate_left(i as u32) % (i as u64 + 1)) as usize);
        }
        let a = cm.measures::<f64>().unwrap();
        let b = permuted(&cm, &order).measures::<f64>().unwrap();
        prop_assert!(close(&a, &b));
    }
}

#[test]
fn binary_hand_case() {
    let mut truth = Vec::new();
    let mut pred = Vec::new();
    for (t, p, n) in [("pos", "pos", 8), ("neg", "pos", 2), ("pos", "neg", 1), ("neg", "neg", 9)] {
        truth.extend(std::iter::repeat_n(t, n));
        pred.extend(std::iter::repeat_n(p, n));
    }
    let cm = evaluate(&truth, &pred).unwrap();
    let k = cm.classes.iter().position(|c| c == "pos").unwrap();
    let p: f64 = cm.class_precision(k);
    let r: f64 = cm.class_recall(k);
    assert!((p - 0.8).abs() < 1e-4);
    assert!((r - 0.8889).abs() < 1e-4);
    assert!((gaitlock::metrics::f_measure(p, r) - 0.8421).abs() < 1e-4);
}

#[test]
fn everything_wrong() {
    let m = evaluate(&["a", "b"], &["b", "a"]).unwrap().measures::<f64>().unwrap();
    assert_eq!((m.accuracy, m.precision, m.recall, m.f_measure), (0.0, 0.0, 0.0, 0.0));
}
