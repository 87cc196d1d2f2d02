//! Plain-text model files.
//!
//! ```text
//! GAITLOCK-SVM v1
//! scalar f64
//! dimension 14
//! classes 3
//! class alice
//! ...
//! norm <mean> <std>            (one line per dimension)
//! machines 3
//! machine <class_a> <class_b>
//! kernel rbf <sigma> | kernel poly <degree> | kernel linear
//! c <c>
//! bias <b>
//! support_vectors <n>
//! sv <coefficient> <x_1> ... <x_d>
//! ...
//! end
//! ```
//!
//! Reals are written in scientific notation with 17 significant digits, which reloads every
//! `f32` and `f64` bit-exactly.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::kernel::{Kernel, KernelSpec};
use super::multiclass::{Normalizer, PairwiseSvm, SvmModel};
use super::smo::BinarySvm;

pub const MAGIC: &str = "GAITLOCK-SVM";
pub const VERSION: &str = "v1";

fn real<T: Scalar>(v: T) -> String {
    format!("{v:.16e}")
}

pub fn model_to_string<T: Scalar>(model: &SvmModel<T>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{MAGIC} {VERSION}");
    let _ = writeln!(s, "scalar {}", T::NAME);
    let _ = writeln!(s, "dimension {}", model.dimension());
    let _ = writeln!(s, "classes {}", model.classes.len());
    for c in &model.classes {
        let _ = writeln!(s, "class {c}");
    }
    for (m, sd) in model.normalizer.means.iter().zip(&model.normalizer.stds) {
        let _ = writeln!(s, "norm {} {}", real(*m), real(*sd));
    }
    let _ = writeln!(s, "machines {}", model.machines.len());
    for m in &model.machines {
        let _ = writeln!(s, "machine {} {}", m.class_a, m.class_b);
        match m.svm.kernel.kernel {
            Kernel::Linear => s.push_str("kernel linear\n"),
            Kernel::Polynomial { degree } => {
                let _ = writeln!(s, "kernel poly {degree}");
            }
            Kernel::Rbf { sigma } => {
                let _ = writeln!(s, "kernel rbf {}", real(sigma));
            }
        }
        let _ = writeln!(s, "c {}", real(m.svm.kernel.c));
        let _ = writeln!(s, "bias {}", real(m.svm.bias));
        let _ = writeln!(s, "support_vectors {}", m.svm.support_vectors.len());
        for (sv, coef) in m.svm.support_vectors.iter().zip(&m.svm.coefficients) {
            s.push_str("sv ");
            s.push_str(&real(*coef));
            for v in sv {
                s.push(' ');
                s.push_str(&real(*v));
            }
            s.push('\n');
        }
    }
    s.push_str("end\n");
    s
}

pub fn save_model<T: Scalar>(model: &SvmModel<T>, path: &Path) -> Result<()> {
    std::fs::write(path, model_to_string(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model<T: Scalar>(path: &Path) -> Result<SvmModel<T>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_str(&text)
}

struct Lines<'a> {
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn err(&self, reason: impl Into<String>) -> Error {
        Error::FormatError { line: self.line, reason: reason.into() }
    }

    /// Next line, split into its keyword and remaining fields; the keyword must match.
    fn expect(&mut self, key: &str) -> Result<Vec<&'a str>> {
        let Some((idx, line)) = self.iter.next() else {
            self.line += 1;
            return Err(self.err(format!("unexpected end of file, expected {key:?}")));
        };
        self.line = idx + 1;
        let mut fields = line.split_whitespace();
        match fields.next() {
            Some(k) if k == key => Ok(fields.collect()),
            other => Err(self.err(format!("expected {key:?}, found {:?}", other.unwrap_or("")))),
        }
    }

    fn single<F: std::str::FromStr>(&mut self, key: &str) -> Result<F> {
        let fields = self.expect(key)?;
        match fields.as_slice() {
            [v] => self.parse(v),
            _ => Err(self.err(format!("{key} takes exactly one value"))),
        }
    }

    fn parse<F: std::str::FromStr>(&self, s: &str) -> Result<F> {
        s.parse().map_err(|_| self.err(format!("cannot parse {s:?}")))
    }
}

pub fn model_from_str<T: Scalar>(text: &str) -> Result<SvmModel<T>> {
    let mut lines = Lines { iter: text.lines().enumerate(), line: 0 };
    let header = lines.expect(MAGIC)?;
    match header.as_slice() {
        [v] if *v == VERSION => {}
        [v] => return Err(Error::VersionMismatch(v.to_string())),
        _ => return Err(lines.err("malformed header")),
    }
    let scalar: String = lines.single("scalar")?;
    if scalar != T::NAME {
        return Err(lines.err(format!("model stores {scalar} values, requested {}", T::NAME)));
    }
    let dim: usize = lines.single("dimension")?;
    let n_classes: usize = lines.single("classes")?;
    let mut classes = Vec::with_capacity(n_classes);
    for _ in 0..n_classes {
        classes.push(lines.single::<String>("class")?);
    }
    let mut means = Vec::with_capacity(dim);
    let mut stds = Vec::with_capacity(dim);
    for _ in 0..dim {
        let fields = lines.expect("norm")?;
        let [m, s] = fields.as_slice() else { return Err(lines.err("norm takes a mean and a standard deviation")) };
        means.push(lines.parse(m)?);
        stds.push(lines.parse(s)?);
    }
    let n_machines: usize = lines.single("machines")?;
    if n_classes < 2 || n_machines != n_classes * (n_classes - 1) / 2 {
        return Err(lines.err(format!("{n_machines} machines for {n_classes} classes")));
    }
    let mut machines = Vec::with_capacity(n_machines);
    for _ in 0..n_machines {
        let fields = lines.expect("machine")?;
        let [a, b] = fields.as_slice() else { return Err(lines.err("machine takes two class indices")) };
        let (class_a, class_b): (usize, usize) = (lines.parse(a)?, lines.parse(b)?);
        if class_a >= n_classes || class_b >= n_classes || class_a == class_b {
            return Err(lines.err("class index out of range"));
        }
        let fields = lines.expect("kernel")?;
        let kernel = match fields.as_slice() {
            ["linear"] => Kernel::Linear,
            ["poly", d] => Kernel::Polynomial { degree: lines.parse(d)? },
            ["rbf", s] => Kernel::Rbf { sigma: lines.parse(s)? },
            _ => return Err(lines.err("unknown kernel line")),
        };
        let c: T = lines.single("c")?;
        let spec = KernelSpec { kernel, c };
        spec.validate().map_err(|e| lines.err(e.to_string()))?;
        let bias: T = lines.single("bias")?;
        let n_sv: usize = lines.single("support_vectors")?;
        let mut support_vectors = Vec::with_capacity(n_sv);
        let mut coefficients = Vec::with_capacity(n_sv);
        for _ in 0..n_sv {
            let fields = lines.expect("sv")?;
            if fields.len() != dim + 1 {
                return Err(lines.err(format!("support vector has {} values, expected {}", fields.len(), dim + 1)));
            }
            coefficients.push(lines.parse(fields[0])?);
            support_vectors.push(fields[1..].iter().map(|f| lines.parse(f)).collect::<Result<Vec<T>>>()?);
        }
        machines.push(PairwiseSvm { class_a, class_b, svm: BinarySvm { support_vectors, coefficients, bias, kernel: spec } });
    }
    lines.expect("end")?;
    Ok(SvmModel { classes, machines, normalizer: Normalizer { means, stds } })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::svm::{train_multiclass, SmoParams};

    fn model() -> SvmModel<f64> {
        let xs: Vec<Vec<f64>> = (0..9).map(|i| vec![(i % 3) as f64 * 3.0 + 0.1 * i as f64, (i / 3) as f64]).collect();
        let ys: Vec<String> = (0..9).map(|i| format!("s{}", i % 3)).collect();
        train_multiclass(&xs, &ys, &KernelSpec::rbf(0.8, 10.0), &SmoParams::default()).unwrap()
    }

    #[test]
    fn round_trip() {
        let m = model();
        let text = model_to_string(&m);
        assert!(text.starts_with("GAITLOCK-SVM v1\n"));
        assert_eq!(model_from_str::<f64>(&text).unwrap(), m);
    }

    #[test]
    fn truncated_is_format_error() {
        let text = model_to_string(&model());
        let cut = &text[..text.len() / 2];
        assert!(matches!(model_from_str::<f64>(cut), Err(Error::FormatError { .. })));
        assert!(matches!(model_from_str::<f64>(""), Err(Error::FormatError { .. })));
    }

    #[test]
    fn unknown_version() {
        let text = model_to_string(&model()).replacen("v1", "v9", 1);
        assert!(matches!(model_from_str::<f64>(&text), Err(Error::VersionMismatch(v)) if v == "v9"));
    }

    #[test]
    fn precision_tag_is_checked() {
        let text = model_to_string(&model());
        assert!(matches!(model_from_str::<f32>(&text), Err(Error::FormatError { line: 2, .. })));
    }

    #[test]
    fn reals_carry_seventeen_digits() {
        assert_eq!(real(0.1f64), "1.0000000000000001e-1");
        let x = 0.1f32;
        assert_eq!(real(x).parse::<f32>().unwrap().to_bits(), x.to_bits());
    }
}
