use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel<T> {
    /// `x . y`
    Linear,
    /// `(x . y + 1)^degree`
    Polynomial { degree: u32 },
    /// `exp(-|x - y|^2 / (2 sigma^2))`
    Rbf { sigma: T },
}

impl<T: Scalar> Kernel<T> {
    pub fn kind(&self) -> KernelKind {
        match self {
            Kernel::Linear => KernelKind::Linear,
            Kernel::Polynomial { .. } => KernelKind::Polynomial,
            Kernel::Rbf { .. } => KernelKind::Rbf,
        }
    }

    /// Evaluates the kernel; callers guarantee equal lengths.
    #[inline]
    pub fn eval(&self, x: &[T], y: &[T]) -> T {
        debug_assert_eq!(x.len(), y.len());
        match *self {
            Kernel::Linear => dot(x, y),
            Kernel::Polynomial { degree } => (dot(x, y) + T::one()).powi(degree as i32),
            Kernel::Rbf { sigma } => {
                let d2: T = x.iter().zip(y).map(|(&a, &b)| (a - b) * (a - b)).sum();
                (-d2 / (T::lit(2.0) * sigma * sigma)).exp()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    Linear,
    Polynomial,
    Rbf,
}

impl KernelKind {
    pub const ALL: [KernelKind; 3] = [KernelKind::Linear, KernelKind::Polynomial, KernelKind::Rbf];
}

impl std::fmt::Display for KernelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            KernelKind::Linear => "linear",
            KernelKind::Polynomial => "poly",
            KernelKind::Rbf => "rbf",
        })
    }
}

impl std::str::FromStr for KernelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "linear" => Ok(KernelKind::Linear),
            "poly" | "polynomial" => Ok(KernelKind::Polynomial),
            "rbf" | "gaussian" => Ok(KernelKind::Rbf),
            _ => Err(format!("unknown kernel {s:?} (expected linear, poly or rbf)")),
        }
    }
}

/// Kernel plus the soft-margin penalty `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec<T> {
    pub kernel: Kernel<T>,
    pub c: T,
}

impl<T: Scalar> KernelSpec<T> {
    pub fn linear(c: T) -> Self {
        Self { kernel: Kernel::Linear, c }
    }

    pub fn polynomial(degree: u32, c: T) -> Self {
        Self { kernel: Kernel::Polynomial { degree }, c }
    }

    pub fn rbf(sigma: T, c: T) -> Self {
        Self { kernel: Kernel::Rbf { sigma }, c }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c.is_finite() && self.c > T::zero()) {
            return Err(Error::InvalidParameter(format!("c must be positive, got {}", self.c)));
        }
        match self.kernel {
            Kernel::Polynomial { degree } if degree < 1 => {
                Err(Error::InvalidParameter("polynomial degree must be at least 1".into()))
            }
            Kernel::Rbf { sigma } if !(sigma.is_finite() && sigma > T::zero()) => {
                Err(Error::InvalidParameter(format!("rbf sigma must be positive, got {sigma}")))
            }
            _ => Ok(()),
        }
    }
}

impl<T: Scalar> std::fmt::Display for KernelSpec<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.kernel {
            Kernel::Linear => write!(f, "linear(c={})", self.c),
            Kernel::Polynomial { degree } => write!(f, "poly(d={degree}, c={})", self.c),
            Kernel::Rbf { sigma } => write!(f, "rbf(sigma={sigma}, c={})", self.c),
        }
    }
}

/// Kernel value with a dimension check.
pub fn kernel_eval<T: Scalar>(spec: &KernelSpec<T>, x: &[T], y: &[T]) -> Result<T> {
    if x.len() != y.len() {
        return Err(Error::dims(x.len(), y.len()));
    }
    Ok(spec.kernel.eval(x, y))
}

#[inline]
fn dot<T: Scalar>(x: &[T], y: &[T]) -> T {
    x.iter().zip(y).map(|(&a, &b)| a * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_examples() {
        let lin = KernelSpec::linear(1.0f64);
        assert_eq!(kernel_eval(&lin, &[1.0, 2.0], &[3.0, 4.0]).unwrap(), 11.0);
        let poly = KernelSpec::polynomial(2, 1.0f64);
        assert_eq!(kernel_eval(&poly, &[1.0, 0.0], &[1.0, 0.0]).unwrap(), 4.0);
        let rbf = KernelSpec::rbf(0.7f64, 1.0);
        let x = [0.3, -2.0, 5.5];
        assert_eq!(kernel_eval(&rbf, &x, &x).unwrap(), 1.0);
        // |x - y|^2 = 2, sigma = 1: exp(-1)
        let r = kernel_eval(&KernelSpec::rbf(1.0f64, 1.0), &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!((r - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(kernel_eval(&KernelSpec::linear(1.0f64), &[1.0], &[1.0, 2.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn validation() {
        assert!(KernelSpec::linear(0.0f64).validate().is_err());
        assert!(KernelSpec::polynomial(0, 1.0f64).validate().is_err());
        assert!(KernelSpec::rbf(-1.0f64, 1.0).validate().is_err());
        assert!(KernelSpec::rbf(0.5f32, 10.0).validate().is_ok());
    }
}
