//! Confusion matrix and accuracy / precision / recall / F-measure.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `counts[i][j]` = samples of true class `classes[i]` predicted as `classes[j]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub classes: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measures<T> {
    pub accuracy: T,
    /// Unweighted mean of per-class precision.
    pub precision: T,
    /// Unweighted mean of per-class recall.
    pub recall: T,
    /// Harmonic mean of the macro precision and macro recall.
    pub f_measure: T,
}

/// Tallies a confusion matrix over the sorted union of the labels seen.
pub fn evaluate<S: AsRef<str>>(truth: &[S], predicted: &[S]) -> Result<ConfusionMatrix> {
    if truth.len() != predicted.len() {
        return Err(Error::LengthMismatch(truth.len(), predicted.len()));
    }
    if truth.is_empty() {
        return Err(Error::Empty);
    }
    let classes: Vec<String> =
        truth.iter().chain(predicted).map(|s| s.as_ref().to_string()).collect::<BTreeSet<_>>().into_iter().collect();
    let idx = |s: &str| classes.binary_search_by(|c| c.as_str().cmp(s)).expect("label collected above");
    let mut counts = vec![vec![0u64; classes.len()]; classes.len()];
    for (t, p) in truth.iter().zip(predicted) {
        counts[idx(t.as_ref())][idx(p.as_ref())] += 1;
    }
    Ok(ConfusionMatrix { classes, counts })
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.classes.len()).map(|i| self.counts[i][i]).sum()
    }

    /// `(tp, fp, fn)` of class `k`.
    pub fn class_counts(&self, k: usize) -> (u64, u64, u64) {
        let tp = self.counts[k][k];
        let predicted: u64 = self.counts.iter().map(|row| row[k]).sum();
        let actual: u64 = self.counts[k].iter().sum();
        (tp, predicted - tp, actual - tp)
    }

    /// Per-class precision; 0 when the class was never predicted.
    pub fn class_precision<T: Scalar>(&self, k: usize) -> T {
        let (tp, fp, _) = self.class_counts(k);
        ratio(tp, tp + fp)
    }

    /// Per-class recall; 0 when the class never occurs.
    pub fn class_recall<T: Scalar>(&self, k: usize) -> T {
        let (tp, _, fneg) = self.class_counts(k);
        ratio(tp, tp + fneg)
    }

    pub fn measures<T: Scalar>(&self) -> Result<Measures<T>> {
        let total = self.total();
        if total == 0 {
            return Err(Error::Empty);
        }
        let k = self.classes.len();
        let kf = T::from_usize_lossy(k);
        let precision = (0..k).map(|c| self.class_precision::<T>(c)).sum::<T>() / kf;
        let recall = (0..k).map(|c| self.class_recall::<T>(c)).sum::<T>() / kf;
        Ok(Measures { accuracy: ratio(self.trace(), total), precision, recall, f_measure: f_measure(precision, recall) })
    }

    /// Comma-separated matrix with a header row of predicted labels.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("true\\predicted");
        for c in &self.classes {
            let _ = write!(s, ",{c}");
        }
        s.push('\n');
        for (c, row) in self.classes.iter().zip(&self.counts) {
            s.push_str(c);
            for v in row {
                let _ = write!(s, ",{v}");
            }
            s.push('\n');
        }
        s
    }

    /// Aligned text table.
    pub fn to_table(&self) -> String {
        let width = self.classes.iter().map(String::len).chain(self.counts.iter().flatten().map(|v| v.to_string().len())).max().unwrap_or(1).max(4);
        let mut s = format!("{:>width$}", "");
        for c in &self.classes {
            let _ = write!(s, " {c:>width$}");
        }
        s.push('\n');
        for (c, row) in self.classes.iter().zip(&self.counts) {
            let _ = write!(s, "{c:>width$}");
            for v in row {
                let _ = write!(s, " {v:>width$}");
            }
            s.push('\n');
        }
        s
    }
}

/// `2 p r / (p + r)`, 0 when both are 0.
pub fn f_measure<T: Scalar>(precision: T, recall: T) -> T {
    let sum = precision + recall;
    if sum > T::zero() {
        T::lit(2.0) * precision * recall / sum
    } else {
        T::zero()
    }
}

fn ratio<T: Scalar>(num: u64, den: u64) -> T {
    if den == 0 {
        T::zero()
    } else {
        T::from_u64(num).expect("count fits") / T::from_u64(den).expect("count fits")
    }
}
