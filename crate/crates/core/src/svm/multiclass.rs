use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::kernel::KernelSpec;
use super::smo::{fit_binary, kkt_violation, BinarySvm, SmoParams};

/// Per-dimension z-score statistics taken from the training data.
///
/// Dimensions with zero spread are centred but not scaled.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalizer<T> {
    pub means: Vec<T>,
    /// Population standard deviations.
    pub stds: Vec<T>,
}

impl<T: Scalar> Normalizer<T> {
    pub fn fit(xs: &[Vec<T>]) -> Result<Self> {
        let first = xs.first().ok_or(Error::Empty)?;
        let dim = first.len();
        let n = T::from_usize_lossy(xs.len());
        let mut means = vec![T::zero(); dim];
        for x in xs {
            for (m, &v) in means.iter_mut().zip(x) {
                *m = *m + v;
            }
        }
        means.iter_mut().for_each(|m| *m = *m / n);
        let mut stds = vec![T::zero(); dim];
        for x in xs {
            for ((s, &m), &v) in stds.iter_mut().zip(&means).zip(x) {
                *s = *s + (v - m) * (v - m);
            }
        }
        stds.iter_mut().for_each(|s| *s = (*s / n).sqrt());
        Ok(Self { means, stds })
    }

    pub fn dimension(&self) -> usize {
        self.means.len()
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        x.iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(&v, (&m, &s))| if s > T::zero() { (v - m) / s } else { v - m })
            .collect()
    }
}

/// Binary machine separating `classes[class_a]` (positive side) from `classes[class_b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseSvm<T> {
    pub class_a: usize,
    pub class_b: usize,
    pub svm: BinarySvm<T>,
}

/// One-vs-one multi-class classifier over normalized features.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel<T> {
    pub classes: Vec<String>,
    pub machines: Vec<PairwiseSvm<T>>,
    pub normalizer: Normalizer<T>,
}

/// Dual solution and KKT diagnostics of one pairwise machine.
#[derive(Debug, Clone)]
pub struct MachineReport<T> {
    pub class_a: usize,
    pub class_b: usize,
    /// Normalized training vectors of the pair, in training order.
    pub xs: Vec<Vec<T>>,
    pub ys: Vec<i8>,
    pub alphas: Vec<T>,
    pub converged: bool,
    pub iterations: usize,
    pub max_kkt_violation: T,
}

impl<T: Scalar> MachineReport<T> {
    /// `|sum_i alpha_i y_i|`.
    pub fn equality_residual(&self) -> T {
        self.alphas
            .iter()
            .zip(&self.ys)
            .map(|(&a, &y)| if y > 0 { a } else { -a })
            .sum::<T>()
            .abs()
    }
}

fn validate_label(label: &str) -> Result<()> {
    if label.is_empty() || label.chars().any(char::is_whitespace) {
        return Err(Error::InvalidParameter(format!("class label {label:?} must be non-empty and contain no whitespace")));
    }
    Ok(())
}

/// Trains one machine per class pair on z-scored features.
pub fn train_multiclass<T: Scalar>(
    xs: &[Vec<T>],
    labels: &[String],
    spec: &KernelSpec<T>,
    params: &SmoParams<T>,
) -> Result<SvmModel<T>> {
    train_multiclass_with_report(xs, labels, spec, params).map(|(model, _)| model)
}

pub fn train_multiclass_with_report<T: Scalar>(
    xs: &[Vec<T>],
    labels: &[String],
    spec: &KernelSpec<T>,
    params: &SmoParams<T>,
) -> Result<(SvmModel<T>, Vec<MachineReport<T>>)> {
    spec.validate()?;
    if xs.len() != labels.len() {
        return Err(Error::LengthMismatch(xs.len(), labels.len()));
    }
    if xs.is_empty() {
        return Err(Error::Empty);
    }
    let dim = xs[0].len();
    if let Some(bad) = xs.iter().find(|x| x.len() != dim) {
        return Err(Error::dims(dim, bad.len()));
    }
    if xs.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let classes: Vec<String> = labels.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    for c in &classes {
        validate_label(c)?;
    }
    if classes.len() < 2 {
        return Err(Error::TooFewClasses(classes.len()));
    }
    let normalizer = Normalizer::fit(xs)?;
    let normalized: Vec<Vec<T>> = xs.iter().map(|x| normalizer.apply(x)).collect();
    let class_of: Vec<usize> = labels.iter().map(|l| classes.binary_search(l).expect("label is in class list")).collect();

    let mut machines = Vec::new();
    let mut reports = Vec::new();
    for a in 0..classes.len() {
        for b in a + 1..classes.len() {
            let mut pair_xs = Vec::new();
            let mut pair_ys = Vec::new();
            for (x, &c) in normalized.iter().zip(&class_of) {
                if c == a || c == b {
                    pair_xs.push(x.clone());
                    pair_ys.push(if c == a { 1 } else { -1 });
                }
            }
            let fit = fit_binary(&pair_xs, &pair_ys, spec, params)?;
            let max_kkt_violation = kkt_violation(&fit.svm, &pair_xs, &pair_ys, &fit.alphas);
            reports.push(MachineReport {
                class_a: a,
                class_b: b,
                xs: pair_xs,
                ys: pair_ys,
                alphas: fit.alphas,
                converged: fit.converged,
                iterations: fit.iterations,
                max_kkt_violation,
            });
            machines.push(PairwiseSvm { class_a: a, class_b: b, svm: fit.svm });
        }
    }
    Ok((SvmModel { classes, machines, normalizer }, reports))
}

impl<T: Scalar> SvmModel<T> {
    pub fn dimension(&self) -> usize {
        self.normalizer.dimension()
    }

    /// Index into `classes` of the winning class, with per-class vote counts.
    ///
    /// Each machine votes for `class_a` when its decision value is positive, otherwise for
    /// `class_b`. Ties on votes go to the larger sum of `|decision|` over the machines that voted
    /// for the class, then to the earlier class.
    pub fn predict_index(&self, x: &[T]) -> Result<usize> {
        if x.len() != self.dimension() {
            return Err(Error::dims(self.dimension(), x.len()));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let z = self.normalizer.apply(x);
        let k = self.classes.len();
        let mut votes = vec![0usize; k];
        let mut strength = vec![T::zero(); k];
        for m in &self.machines {
            let f = m.svm.decision(&z);
            let winner = if f > T::zero() { m.class_a } else { m.class_b };
            votes[winner] += 1;
            strength[winner] = strength[winner] + f.abs();
        }
        let mut best = 0;
        for c in 1..k {
            if votes[c] > votes[best] || (votes[c] == votes[best] && strength[c] > strength[best]) {
                best = c;
            }
        }
        Ok(best)
    }

    pub fn predict(&self, x: &[T]) -> Result<&str> {
        self.predict_index(x).map(|i| self.classes[i].as_str())
    }
}
