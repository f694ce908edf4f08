//! Path statistics and distribution comparisons.

use serde::Serialize;
use tiltlab_airy::AirySpectrum;

use crate::ensemble::PathEnsemble;
use crate::error::{Error, Result};

/// `phi(t) = |t|^alpha` tabulated on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvedProfile {
    alpha: f64,
    values: Vec<f64>,
}

impl CurvedProfile {
    pub const DEFAULT_ALPHA: f64 = 0.25;

    pub fn new(alpha: f64, times: &[f64]) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 0.5) {
            return Err(Error::Config(format!("alpha must lie in (0, 1/2), got {alpha}")));
        }
        Ok(Self {
            alpha,
            values: times.iter().map(|t| t.abs().powf(alpha)).collect(),
        })
    }

    /// `phi = 0`, under which the curved maximum is the plain positive part
    /// of the maximum.
    pub fn flat(len: usize) -> Self {
        Self {
            alpha: 0.0,
            values: vec![0.0; len],
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// `max_k (path(t_k) - phi(t_k))^+`, the least lift `y >= 0` with
/// `y + phi >= path`. For piecewise-linear paths on a grid containing `t = 0`
/// this is exact: `phi` is concave on each side of the origin, so
/// `path - phi` is convex between grid points.
pub fn curved_max(path: &[f64], profile: &CurvedProfile) -> Result<f64> {
    if path.len() != profile.values.len() {
        return Err(Error::Dimension {
            expected: profile.values.len(),
            found: path.len(),
        });
    }
    Ok(path
        .iter()
        .zip(&profile.values)
        .map(|(x, p)| x - p)
        .fold(0.0, f64::max))
}

pub fn plain_max(path: &[f64]) -> f64 {
    path.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Sorted sample with mean and standard error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalSummary {
    #[serde(skip)]
    sorted: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation over `sqrt(count)`.
    pub stderr: f64,
    pub count: usize,
}

impl EmpiricalSummary {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("empty sample".into()));
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::Domain("NaN in sample".into()));
        }
        let count = values.len();
        let mean = values.iter().sum::<f64>() / count as f64;
        let stderr = if count > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64;
            (var / count as f64).sqrt()
        } else {
            0.0
        };
        values.sort_by(f64::total_cmp);
        Ok(Self {
            sorted: values,
            mean,
            stderr,
            count,
        })
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// Right-continuous empirical CDF.
    pub fn cdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.count as f64
    }

    /// Distinct sample values with the CDF just after each: the CDF knots.
    pub fn knots(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (j, &v) in self.sorted.iter().enumerate() {
            let f = (j + 1) as f64 / self.count as f64;
            match out.last_mut() {
                Some(last) if last.0 == v => last.1 = f,
                _ => out.push((v, f)),
            }
        }
        out
    }

    /// Smallest sample value with CDF at least `q`.
    pub fn quantile(&self, q: f64) -> f64 {
        let j = ((q * self.count as f64).ceil() as usize).clamp(1, self.count);
        self.sorted[j - 1]
    }

    pub fn median(&self) -> f64 {
        self.quantile(0.5)
    }
}

/// Summary of `X_1(0)` over a sample set.
pub fn top_marginal(samples: &[PathEnsemble]) -> Result<EmpiricalSummary> {
    if samples.len() < 2 {
        return Err(Error::Domain(format!("need at least 2 samples, got {}", samples.len())));
    }
    EmpiricalSummary::new(samples.iter().map(|s| s.at_zero(0)).collect())
}

/// Level-0.01 coefficient of the two-sided KS threshold, `sqrt(-ln(0.005)/2)`.
pub const KS_C_001: f64 = 1.627_6;
/// Level-0.01 coefficient of the one-sided threshold, `sqrt(-ln(0.01)/2)`.
pub const KS_C_001_ONE_SIDED: f64 = 1.517_4;

/// A KS statistic with its level-0.01 rejection threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub threshold: f64,
}

impl KsResult {
    pub fn rejects(&self) -> bool {
        self.statistic > self.threshold
    }
}

fn size_factor(m: usize, n: usize) -> f64 {
    ((m + n) as f64 / (m as f64 * n as f64)).sqrt()
}

/// Walks the merged knots of two samples, returning
/// `(sup |F_a - F_b|, sup (F_b - F_a))`.
fn ks_walk(a: &EmpiricalSummary, b: &EmpiricalSummary) -> (f64, f64) {
    let (xa, xb) = (a.sorted(), b.sorted());
    let (m, n) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0, 0);
    let (mut two, mut one) = (0.0f64, 0.0f64);
    while i < xa.len() || j < xb.len() {
        let x = match (xa.get(i), xb.get(j)) {
            (Some(&u), Some(&v)) => u.min(v),
            (Some(&u), None) => u,
            (None, Some(&v)) => v,
            (None, None) => unreachable!(),
        };
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        let d = j as f64 / n - i as f64 / m;
        two = two.max(d.abs());
        one = one.max(d);
    }
    (two, one)
}

/// Two-sample KS distance with its level-0.01 threshold.
pub fn ks_two_sample(a: &EmpiricalSummary, b: &EmpiricalSummary) -> KsResult {
    KsResult {
        statistic: ks_walk(a, b).0,
        threshold: KS_C_001 * size_factor(a.count, b.count),
    }
}

/// One-sided statistic for "`lower` is stochastically dominated by
/// `upper`": `sup_x (F_upper(x) - F_lower(x))`, with the one-sided
/// level-0.01 threshold.
pub fn ks_dominance(lower: &EmpiricalSummary, upper: &EmpiricalSummary) -> KsResult {
    KsResult {
        statistic: ks_walk(lower, upper).1.max(0.0),
        threshold: KS_C_001_ONE_SIDED * size_factor(lower.count, upper.count),
    }
}

/// One-sample KS distance against a continuous CDF evaluated at the sorted
/// distinct sample values by `cdf_sorted`.
pub fn ks_one_sample(
    a: &EmpiricalSummary,
    cdf_sorted: impl FnOnce(&[f64]) -> Result<Vec<f64>>,
) -> Result<KsResult> {
    let knots = a.knots();
    let xs: Vec<f64> = knots.iter().map(|k| k.0).collect();
    let fs = cdf_sorted(&xs)?;
    let mut d = 0.0f64;
    let mut before = 0.0;
    for ((_, after), f) in knots.iter().zip(fs) {
        d = d.max((after - f).abs()).max((f - before).abs());
        before = *after;
    }
    Ok(KsResult {
        statistic: d,
        threshold: KS_C_001 / (a.count as f64).sqrt(),
    })
}

/// Two-sample distance between any pair of summaries; a metric on
/// empirical CDFs.
pub fn ks_distance(a: &EmpiricalSummary, b: &EmpiricalSummary) -> f64 {
    ks_walk(a, b).0
}

/// Ground-state CDF `int_0^x kappa_0(u)^2 du` for tilt `a`, the stationary
/// single-path marginal.
#[derive(Debug, Clone)]
pub struct FsReference {
    spectrum: AirySpectrum,
}

impl FsReference {
    pub fn new(a: f64) -> Result<Self> {
        Ok(Self {
            spectrum: AirySpectrum::new(a, 1)?,
        })
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        Ok(self.spectrum.ground_state_cdf(x)?)
    }

    pub fn cdf_sorted(&self, xs: &[f64]) -> Result<Vec<f64>> {
        Ok(self.spectrum.ground_state_cdf_sorted(xs)?)
    }
}

pub fn fs_reference_cdf(a: f64, x: f64) -> Result<f64> {
    FsReference::new(a)?.cdf(x)
}

/// Exponential-tail fit of a sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailFit {
    /// Least-squares slope of `log(1 - F)` over the top decile.
    pub slope: f64,
    /// Slopes over the quantile windows `[0.90, 0.96]`, `[0.96, 0.99]`,
    /// `[0.99, 0.999]`.
    pub window_slopes: Vec<f64>,
    /// Set when the slope magnitude in the last window is below half of the
    /// first: decay slower than exponential.
    pub heavy_tail: bool,
}

pub const TAIL_WINDOWS: [(f64, f64); 3] = [(0.90, 0.96), (0.96, 0.99), (0.99, 0.999)];

fn survival_slope(sorted: &[f64], lo: f64, hi: f64) -> Option<f64> {
    let n = sorted.len();
    let (j0, j1) = ((lo * n as f64).floor() as usize, ((hi * n as f64).ceil() as usize).min(n - 1));
    if j1 <= j0 + 1 {
        return None;
    }
    // plotting position S_j = 1 - (j + 1) / (n + 1) keeps the log finite
    let pts: Vec<(f64, f64)> = (j0..j1)
        .map(|j| (sorted[j], (1.0 - (j + 1) as f64 / (n + 1) as f64).ln()))
        .collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn tail_slope(summary: &EmpiricalSummary) -> Result<TailFit> {
    if summary.count < 1000 {
        return Err(Error::Domain(format!(
            "tail fit needs at least 1000 samples, got {}",
            summary.count
        )));
    }
    let s = summary.sorted();
    let slope = survival_slope(s, 0.9, 1.0)
        .ok_or_else(|| Error::Domain("upper decile of the sample is constant".into()))?;
    let window_slopes: Vec<f64> = TAIL_WINDOWS
        .iter()
        .map(|&(lo, hi)| survival_slope(s, lo, hi).unwrap_or(f64::NAN))
        .collect();
    let (first, last) = (window_slopes[0], window_slopes[window_slopes.len() - 1]);
    let heavy_tail = first.is_finite() && (last.is_nan() || last.abs() < 0.5 * first.abs());
    Ok(TailFit {
        slope,
        window_slopes,
        heavy_tail,
    })
}

/// Standard error of the mean of a time series from `batch`-long batches.
pub fn batch_means_stderr(series: &[f64], batch: usize) -> Result<f64> {
    if batch == 0 {
        return Err(Error::Domain("batch length must be positive".into()));
    }
    let b = series.len() / batch;
    if b < 2 {
        return Err(Error::Domain(format!(
            "{} values make fewer than two batches of {batch}",
            series.len()
        )));
    }
    let means: Vec<f64> = series
        .chunks_exact(batch)
        .map(|c| c.iter().sum::<f64>() / batch as f64)
        .collect();
    let m = means.iter().sum::<f64>() / b as f64;
    let var = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (b - 1) as f64;
    Ok((var / b as f64).sqrt())
}

/// Standard error of the grand mean of several independent series (one per
/// replica), pooling the `batch`-long batch means of every series. Trailing
/// values that do not fill a batch are dropped.
pub fn pooled_batch_stderr(segments: &[&[f64]], batch: usize) -> Result<f64> {
    if batch == 0 {
        return Err(Error::Domain("batch length must be positive".into()));
    }
    let means: Vec<f64> = segments
        .iter()
        .flat_map(|s| s.chunks_exact(batch).map(|c| c.iter().sum::<f64>() / batch as f64))
        .collect();
    let b = means.len();
    if b < 2 {
        return Err(Error::Domain(format!("fewer than two batches of {batch}")));
    }
    let m = means.iter().sum::<f64>() / b as f64;
    let var = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (b - 1) as f64;
    Ok((var / b as f64).sqrt())
}

/// Nominal batch length in sweeps for autocorrelation-aware error bars.
pub const BATCH_SWEEPS: u64 = 50;

/// Batch length in samples for samples taken every `thin` sweeps.
pub fn batch_len(thin: u64) -> usize {
    BATCH_SWEEPS.div_ceil(thin).max(1) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curved_max_examples() {
        let times = [-1.0, 0.0, 1.0];
        let p = CurvedProfile::new(0.25, &times).unwrap();
        assert_eq!(curved_max(&[0.0, 0.0, 0.0], &p).unwrap(), 0.0);
        assert_eq!(curved_max(&[1.5, 1.5, 1.5], &p).unwrap(), 1.5);
        assert_eq!(curved_max(&[2.0, 0.5, 3.0], &p).unwrap(), 2.0);
        assert!(curved_max(&[1.0], &p).is_err());
        assert!(CurvedProfile::new(0.5, &times).is_err());
        assert!(CurvedProfile::new(0.0, &times).is_err());
        let flat = CurvedProfile::flat(3);
        assert_eq!(curved_max(&[2.0, 0.5, 3.0], &flat).unwrap(), plain_max(&[2.0, 0.5, 3.0]));
    }

    #[test]
    fn summary_basics() {
        let s = EmpiricalSummary::new(vec![3.0, 1.0]).unwrap();
        assert_eq!(s.mean, 2.0);
        assert_eq!(s.knots(), vec![(1.0, 0.5), (3.0, 1.0)]);
        assert_eq!(s.cdf(0.9), 0.0);
        assert_eq!(s.cdf(1.0), 0.5);
        let same = EmpiricalSummary::new(vec![4.0; 10]).unwrap();
        assert_eq!(same.stderr, 0.0);
        assert!(EmpiricalSummary::new(vec![]).is_err());
    }

    #[test]
    fn ks_extremes() {
        let a = EmpiricalSummary::new(vec![1.0, 2.0, 3.0]).unwrap();
        let b = EmpiricalSummary::new(vec![10.0, 20.0]).unwrap();
        assert_eq!(ks_two_sample(&a, &a).statistic, 0.0);
        assert_eq!(ks_two_sample(&a, &b).statistic, 1.0);
        // a lies below b: no evidence against "a dominated by b"
        assert_eq!(ks_dominance(&a, &b).statistic, 0.0);
        assert_eq!(ks_dominance(&b, &a).statistic, 1.0);
        let t = ks_two_sample(&a, &b).threshold;
        assert!((t - 1.6276 * (5.0f64 / 6.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn one_sample_uniform() {
        let s = EmpiricalSummary::new(vec![0.25, 0.75]).unwrap();
        let r = ks_one_sample(&s, |xs| Ok(xs.to_vec())).unwrap();
        assert!((r.statistic - 0.25).abs() < 1e-15);
    }

    #[test]
    fn batch_means() {
        let x: Vec<f64> = (0..100).map(|j| (j % 2) as f64).collect();
        // every batch of 10 has mean 1/2
        assert_eq!(batch_means_stderr(&x, 10).unwrap(), 0.0);
        assert!(batch_means_stderr(&x, 60).is_err());
        assert_eq!(batch_len(1), 50);
        assert_eq!(batch_len(20), 3);
        assert_eq!(batch_len(500), 1);
    }

    #[test]
    fn tail_fit_rejects_small_or_constant() {
        assert!(tail_slope(&EmpiricalSummary::new(vec![1.0; 10]).unwrap()).is_err());
        assert!(tail_slope(&EmpiricalSummary::new(vec![1.0; 2000]).unwrap()).is_err());
    }
}
