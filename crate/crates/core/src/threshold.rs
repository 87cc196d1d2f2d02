//! Otsu's global threshold over 8-bit histograms.

/// How an intensity threshold is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Threshold {
    /// Otsu's method on the relevant difference histogram.
    #[default]
    Auto,
    Fixed(u8),
}

impl std::fmt::Display for Threshold {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Threshold::Auto => f.write_str("auto"),
            Threshold::Fixed(t) => write!(f, "{t}"),
        }
    }
}

impl std::str::FromStr for Threshold {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Threshold::Auto);
        }
        s.parse::<u8>()
            .map(Threshold::Fixed)
            .map_err(|_| format!("threshold must be 'auto' or an integer in 0..=255, got {s:?}"))
    }
}

pub fn histogram(values: impl IntoIterator<Item = u8>) -> [u64; 256] {
    let mut hist = [0u64; 256];
    for v in values {
        hist[v as usize] += 1;
    }
    hist
}

/// Otsu threshold `t`: values `<= t` form the low class, values `> t` the high class.
///
/// When several splits reach the same between-class variance (an empty gap between two modes),
/// the middle of that run of splits is returned. A histogram with a single occupied bin `v`
/// returns `v`, so nothing lies strictly above the threshold.
pub fn otsu(hist: &[u64; 256]) -> u8 {
    let total: u64 = hist.iter().sum();
    if total == 0 {
        return 0;
    }
    let total_f = total as f64;
    let sum_all: f64 = hist.iter().enumerate().map(|(i, &c)| i as f64 * c as f64).sum();

    let mut w0 = 0u64;
    let mut sum0 = 0.0;
    let mut best: Option<(f64, usize, usize)> = None;
    for t in 0..255 {
        w0 += hist[t];
        sum0 += t as f64 * hist[t] as f64;
        if w0 == 0 {
            continue;
        }
        let w1 = total - w0;
        if w1 == 0 {
            break;
        }
        let (w0f, w1f) = (w0 as f64, w1 as f64);
        let diff = sum0 / w0f - (sum_all - sum0) / w1f;
        let between = w0f * w1f * diff * diff / (total_f * total_f);
        match best {
            Some((v, first, _)) if between == v => best = Some((v, first, t)),
            Some((v, _, _)) if between <= v => {}
            _ => best = Some((between, t, t)),
        }
    }
    match best {
        Some((_, first, last)) => ((first + last) / 2) as u8,
        None => hist.iter().rposition(|&c| c > 0).unwrap_or(0) as u8,
    }
}
