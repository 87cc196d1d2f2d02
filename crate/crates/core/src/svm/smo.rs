//! Two-class soft-margin SVM trained by sequential minimal optimization.
//!
//! Training runs in two phases over a full kernel cache:
//!
//! 1. simplified SMO: sweep the points, pair every KKT violator with a random partner and apply
//!    the analytic two-variable update, until `max_passes` consecutive sweeps change nothing;
//! 2. maximal-violating-pair refinement: repeatedly update the pair with the largest KKT gap
//!    until the gap is at most `tol`. A random partner can stall on a violator, so this phase
//!    is what makes the final KKT tolerance hold.
//!
//! The bias is then placed in the middle of the feasible interval, so every training point
//! satisfies its KKT condition within `tol / 2` (in units of `y * f(x)`).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::kernel::KernelSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoParams<T> {
    /// KKT tolerance.
    pub tol: T,
    /// Consecutive unchanged sweeps that end the simplified phase.
    pub max_passes: usize,
    /// Cap on refinement updates, as a multiple of the training-set size.
    pub max_iter_factor: usize,
    /// Seed of the partner choice in the simplified phase.
    pub seed: u64,
}

impl<T: Scalar> Default for SmoParams<T> {
    fn default() -> Self {
        Self { tol: T::lit(1e-3), max_passes: 10, max_iter_factor: 10_000, seed: 0 }
    }
}

/// Trained two-class machine; `f(x) = sum_i coef_i K(sv_i, x) + bias`, positive side = label +1.
#[derive(Debug, Clone, PartialEq)]
pub struct BinarySvm<T> {
    pub support_vectors: Vec<Vec<T>>,
    /// Dual coefficients multiplied by labels (`alpha_i * y_i`).
    pub coefficients: Vec<T>,
    pub bias: T,
    pub kernel: KernelSpec<T>,
}

impl<T: Scalar> BinarySvm<T> {
    pub fn decision(&self, x: &[T]) -> T {
        self.support_vectors
            .iter()
            .zip(&self.coefficients)
            .map(|(sv, &a)| a * self.kernel.kernel.eval(sv, x))
            .sum::<T>()
            + self.bias
    }

    pub fn predict(&self, x: &[T]) -> i8 {
        if self.decision(x) > T::zero() {
            1
        } else {
            -1
        }
    }

    pub fn dimension(&self) -> Option<usize> {
        self.support_vectors.first().map(Vec::len)
    }
}

/// A trained machine together with the full dual solution.
#[derive(Debug, Clone)]
pub struct BinaryFit<T> {
    pub svm: BinarySvm<T>,
    /// `alpha_i` for every training point, in input order.
    pub alphas: Vec<T>,
    pub iterations: usize,
    /// Whether the refinement phase reached the KKT tolerance before its iteration cap.
    pub converged: bool,
}

/// Trains a binary machine on labels in {-1, +1}.
pub fn train_binary<T: Scalar>(xs: &[Vec<T>], ys: &[i8], spec: &KernelSpec<T>, params: &SmoParams<T>) -> Result<BinarySvm<T>> {
    fit_binary(xs, ys, spec, params).map(|fit| fit.svm)
}

pub fn fit_binary<T: Scalar>(xs: &[Vec<T>], ys: &[i8], spec: &KernelSpec<T>, params: &SmoParams<T>) -> Result<BinaryFit<T>> {
    spec.validate()?;
    if !(params.tol.is_finite() && params.tol > T::zero()) {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {}", params.tol)));
    }
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch(xs.len(), ys.len()));
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
    if let Some(&bad) = ys.iter().find(|&&y| y != 1 && y != -1) {
        return Err(Error::InvalidParameter(format!("binary labels must be -1 or +1, got {bad}")));
    }
    if !(ys.contains(&1) && ys.contains(&-1)) {
        return Err(Error::SingleClass);
    }

    let mut solver = Solver::new(xs, ys, spec);
    let mut iterations = solver.simplified_phase(params);
    let (refine_iters, converged) = solver.refine(params);
    iterations += refine_iters;
    let bias = solver.bias();

    let mut support_vectors = Vec::new();
    let mut coefficients = Vec::new();
    for (i, &a) in solver.alpha.iter().enumerate() {
        if a > T::zero() {
            support_vectors.push(xs[i].clone());
            coefficients.push(a * solver.y[i]);
        }
    }
    let svm = BinarySvm { support_vectors, coefficients, bias, kernel: *spec };
    Ok(BinaryFit { svm, alphas: solver.alpha, iterations, converged })
}

struct Solver<T> {
    n: usize,
    k: Vec<T>,
    y: Vec<T>,
    c: T,
    alpha: Vec<T>,
    /// `sum_k alpha_k y_k K(i, k) - y_i`: the bias-free prediction error.
    err: Vec<T>,
}

impl<T: Scalar> Solver<T> {
    fn new(xs: &[Vec<T>], ys: &[i8], spec: &KernelSpec<T>) -> Self {
        let n = xs.len();
        let mut k = vec![T::zero(); n * n];
        for i in 0..n {
            for j in i..n {
                let v = spec.kernel.eval(&xs[i], &xs[j]);
                k[i * n + j] = v;
                k[j * n + i] = v;
            }
        }
        let y: Vec<T> = ys.iter().map(|&l| if l > 0 { T::one() } else { -T::one() }).collect();
        let err = y.iter().map(|&v| -v).collect();
        Self { n, k, y, c: spec.c, alpha: vec![T::zero(); n], err }
    }

    #[inline]
    fn kij(&self, i: usize, j: usize) -> T {
        self.k[i * self.n + j]
    }

    /// Analytic update of the pair `(i, j)`; returns whether anything moved.
    fn update_pair(&mut self, i: usize, j: usize) -> bool {
        let (yi, yj) = (self.y[i], self.y[j]);
        let (ai, aj) = (self.alpha[i], self.alpha[j]);
        let c = self.c;
        let (lo, hi) = if yi != yj {
            (T::zero().max(aj - ai), c.min(c + aj - ai))
        } else {
            (T::zero().max(ai + aj - c), c.min(ai + aj))
        };
        if lo >= hi {
            return false;
        }
        let mut eta = self.kij(i, i) + self.kij(j, j) - T::lit(2.0) * self.kij(i, j);
        if eta <= T::zero() {
            // flat or non-convex direction: take a long step and let clipping decide
            eta = T::lit(1e-12);
        }
        let mut aj_new = aj + yj * (self.err[i] - self.err[j]) / eta;
        aj_new = aj_new.max(lo).min(hi);
        if (aj_new - aj).abs() <= T::epsilon() * (T::one() + aj.abs()) {
            return false;
        }
        let mut ai_new = ai + yi * yj * (aj - aj_new);
        let snap = T::lit(1e-12) * c;
        if ai_new < snap {
            ai_new = T::zero();
        } else if ai_new > c - snap {
            ai_new = c;
        }
        let (di, dj) = ((ai_new - ai) * yi, (aj_new - aj) * yj);
        for t in 0..self.n {
            self.err[t] = self.err[t] + di * self.kij(i, t) + dj * self.kij(j, t);
        }
        self.alpha[i] = ai_new;
        self.alpha[j] = aj_new;
        true
    }

    fn simplified_phase(&mut self, params: &SmoParams<T>) -> usize {
        if self.n < 2 {
            return 0;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let tol = params.tol;
        let mut passes = 0;
        let mut updates = 0;
        let mut sweeps = 0;
        let max_sweeps = params.max_iter_factor.max(1) * 10;
        let mut bias = T::zero();
        while passes < params.max_passes && sweeps < max_sweeps {
            sweeps += 1;
            let mut changed = 0;
            for i in 0..self.n {
                let e_i = self.err[i] + bias;
                let r = self.y[i] * e_i;
                let violates = (r < -tol && self.alpha[i] < self.c) || (r > tol && self.alpha[i] > T::zero());
                if !violates {
                    continue;
                }
                let mut j = rng.gen_range(0..self.n - 1);
                if j >= i {
                    j += 1;
                }
                let (ai, aj) = (self.alpha[i], self.alpha[j]);
                let e_j = self.err[j] + bias;
                if !self.update_pair(i, j) {
                    continue;
                }
                bias = self.platt_bias(i, j, ai, aj, e_i, e_j, bias);
                changed += 1;
                updates += 1;
            }
            if changed == 0 {
                passes += 1;
            } else {
                passes = 0;
            }
        }
        updates
    }

    /// Platt's bias update after a successful step on `(i, j)`.
    #[allow(clippy::too_many_arguments)]
    fn platt_bias(&self, i: usize, j: usize, ai_old: T, aj_old: T, e_i: T, e_j: T, bias: T) -> T {
        let (ai, aj) = (self.alpha[i], self.alpha[j]);
        let di = self.y[i] * (ai - ai_old);
        let dj = self.y[j] * (aj - aj_old);
        let b1 = bias - e_i - di * self.kij(i, i) - dj * self.kij(i, j);
        let b2 = bias - e_j - di * self.kij(i, j) - dj * self.kij(j, j);
        let zero = T::zero();
        if ai > zero && ai < self.c {
            b1
        } else if aj > zero && aj < self.c {
            b2
        } else {
            (b1 + b2) / T::lit(2.0)
        }
    }

    fn in_up(&self, t: usize) -> bool {
        (self.y[t] > T::zero() && self.alpha[t] < self.c) || (self.y[t] < T::zero() && self.alpha[t] > T::zero())
    }

    fn in_low(&self, t: usize) -> bool {
        (self.y[t] < T::zero() && self.alpha[t] < self.c) || (self.y[t] > T::zero() && self.alpha[t] > T::zero())
    }

    /// `(argmax over I_up, max, argmin over I_low, min)` of `-err`.
    fn extreme_pair(&self) -> (Option<(usize, T)>, Option<(usize, T)>) {
        let mut up: Option<(usize, T)> = None;
        let mut low: Option<(usize, T)> = None;
        for t in 0..self.n {
            let v = -self.err[t];
            if self.in_up(t) && up.is_none_or(|(_, m)| v > m) {
                up = Some((t, v));
            }
            if self.in_low(t) && low.is_none_or(|(_, m)| v < m) {
                low = Some((t, v));
            }
        }
        (up, low)
    }

    fn refine(&mut self, params: &SmoParams<T>) -> (usize, bool) {
        let cap = params.max_iter_factor.max(1) * self.n.max(1);
        for iter in 0..cap {
            let (Some((i, m)), Some((j, big_m))) = self.extreme_pair() else {
                return (iter, true);
            };
            if m - big_m <= params.tol {
                return (iter, true);
            }
            if !self.update_pair(i, j) {
                return (iter, false);
            }
        }
        let (up, low) = self.extreme_pair();
        let done = match (up, low) {
            (Some((_, m)), Some((_, big_m))) => m - big_m <= params.tol,
            _ => true,
        };
        (cap, done)
    }

    /// Middle of the interval of biases for which every point meets its KKT condition.
    fn bias(&self) -> T {
        match self.extreme_pair() {
            (Some((_, m)), Some((_, big_m))) => (m + big_m) / T::lit(2.0),
            (Some((_, m)), None) => m,
            (None, Some((_, big_m))) => big_m,
            (None, None) => T::zero(),
        }
    }
}

/// Largest KKT violation over the training set, in units of `y * f(x)`:
/// `alpha = 0` needs `y f >= 1`, `0 < alpha < c` needs `y f = 1`, `alpha = c` needs `y f <= 1`.
pub fn kkt_violation<T: Scalar>(svm: &BinarySvm<T>, xs: &[Vec<T>], ys: &[i8], alphas: &[T]) -> T {
    let c = svm.kernel.c;
    xs.iter()
        .zip(ys)
        .zip(alphas)
        .map(|((x, &y), &a)| {
            let margin = if y > 0 { svm.decision(x) } else { -svm.decision(x) };
            let gap = margin - T::one();
            if a <= T::zero() {
                (-gap).max(T::zero())
            } else if a >= c {
                gap.max(T::zero())
            } else {
                gap.abs()
            }
        })
        .fold(T::zero(), T::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> SmoParams<f64> {
        SmoParams::default()
    }

    #[test]
    fn two_point_max_margin() {
        let xs = vec![vec![0.0], vec![2.0]];
        let fit = fit_binary(&xs, &[-1, 1], &KernelSpec::linear(1e3), &params()).unwrap();
        let svm = &fit.svm;
        // f(x) = x - 1
        assert!(svm.decision(&[1.0]).abs() < 1e-6);
        assert!((svm.decision(&[0.0]) + 1.0).abs() < 1e-3);
        assert!((svm.decision(&[2.0]) - 1.0).abs() < 1e-3);
        assert!((fit.alphas[0] - 0.5).abs() < 1e-3);
        assert!(fit.converged);
    }

    #[test]
    fn separable_clusters() {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in 0..10 {
            let t = i as f64 * 0.1;
            xs.push(vec![1.0 + t, 2.0 - t]);
            ys.push(1);
            xs.push(vec![-1.0 - t, -2.0 + 0.5 * t]);
            ys.push(-1);
        }
        let fit = fit_binary(&xs, &ys, &KernelSpec::linear(10.0), &params()).unwrap();
        for (x, &y) in xs.iter().zip(&ys) {
            assert_eq!(fit.svm.predict(x), y);
        }
        assert!(kkt_violation(&fit.svm, &xs, &ys, &fit.alphas) <= 1e-3);
    }

    #[test]
    fn duplicate_point_with_both_labels() {
        let xs = vec![vec![1.0, 1.0], vec![1.0, 1.0], vec![3.0, 0.0], vec![-3.0, 0.0]];
        let ys = [1, -1, 1, -1];
        let c = 2.0;
        let fit = fit_binary(&xs, &ys, &KernelSpec::linear(c), &params()).unwrap();
        assert_eq!(fit.alphas[0], c);
        assert_eq!(fit.alphas[1], c);
        assert!(kkt_violation(&fit.svm, &xs, &ys, &fit.alphas) <= 1e-3);
    }

    #[test]
    fn rejects_bad_input() {
        let xs = vec![vec![0.0], vec![1.0]];
        assert!(matches!(fit_binary(&xs, &[1, 1], &KernelSpec::linear(1.0), &params()), Err(Error::SingleClass)));
        let xs_nan = vec![vec![f64::NAN], vec![1.0]];
        assert!(matches!(fit_binary(&xs_nan, &[1, -1], &KernelSpec::linear(1.0), &params()), Err(Error::NonFinite)));
        assert!(fit_binary(&xs, &[1, 0], &KernelSpec::linear(1.0), &params()).is_err());
        assert!(matches!(fit_binary(&xs, &[1], &KernelSpec::linear(1.0), &params()), Err(Error::LengthMismatch(2, 1))));
    }

    #[test]
    fn single_precision_training() {
        let xs = vec![vec![0.0f32, 0.0], vec![0.2, 0.1], vec![2.0, 2.0], vec![2.2, 1.9]];
        let ys = [-1, -1, 1, 1];
        let fit = fit_binary(&xs, &ys, &KernelSpec::rbf(1.0f32, 10.0), &SmoParams::default()).unwrap();
        for (x, &y) in xs.iter().zip(&ys) {
            assert_eq!(fit.svm.predict(x), y);
        }
    }
}
