//! Weighted empirical-distribution machinery: one- and two-sample
//! Kolmogorov-Smirnov tests and moment z-tests.
//!
//! Importance-sampled batches carry weights, so the ECDF is weight-averaged
//! and the Kolmogorov asymptotics are applied with the effective sample size
//! `(sum w)^2 / sum w^2` in place of `n`. That substitution is a first-order
//! correction, not an exact theory; the calibration suite keeps its
//! false-positive rate honest by re-checking null behavior on every run.

use thiserror::Error;

use crate::parallel::pairwise_sum;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("sample is empty")]
    Empty,
    #[error("weights must be nonnegative with a positive total")]
    BadWeights,
    #[error("values and weights have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("sample contains non-finite values")]
    NonFinite,
    #[error("effective sample size {0:.1} is too small for this test")]
    TooSmall(f64),
    #[error("variance is degenerate")]
    DegenerateVariance,
}

/// Values with nonnegative weights (all-ones when unweighted).
#[derive(Debug, Clone)]
pub struct WeightedSample {
    values: Vec<f64>,
    weights: Vec<f64>,
}

impl WeightedSample {
    pub fn unweighted(values: Vec<f64>) -> Result<Self, StatsError> {
        let weights = vec![1.0; values.len()];
        Self::weighted(values, weights)
    }

    pub fn weighted(values: Vec<f64>, weights: Vec<f64>) -> Result<Self, StatsError> {
        if values.is_empty() {
            return Err(StatsError::Empty);
        }
        if values.len() != weights.len() {
            return Err(StatsError::LengthMismatch(values.len(), weights.len()));
        }
        if values.iter().any(|v| !v.is_finite()) || weights.iter().any(|w| !w.is_finite()) {
            return Err(StatsError::NonFinite);
        }
        if weights.iter().any(|&w| w < 0.0) || !(pairwise_sum(&weights) > 0.0) {
            return Err(StatsError::BadWeights);
        }
        Ok(WeightedSample { values, weights })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        pairwise_sum(&self.weights)
    }

    /// Effective sample size `(sum w)^2 / sum w^2`.
    pub fn ess(&self) -> f64 {
        let sw = pairwise_sum(&self.weights);
        let sw2 = pairwise_sum(&self.weights.iter().map(|w| w * w).collect::<Vec<_>>());
        sw * sw / sw2
    }

    /// Weighted mean.
    pub fn mean(&self) -> f64 {
        let sw = self.total_weight();
        let swx = pairwise_sum(&self.values.iter().zip(&self.weights).map(|(x, w)| x * w).collect::<Vec<_>>());
        swx / sw
    }

    /// Standard error of the weighted mean (ratio-estimator delta method):
    /// `sqrt(sum w_i^2 (x_i - mean)^2) / sum w`.
    pub fn std_error(&self) -> f64 {
        let mu = self.mean();
        let sw = self.total_weight();
        let s = pairwise_sum(
            &self
                .values
                .iter()
                .zip(&self.weights)
                .map(|(x, w)| {
                    let d = w * (x - mu);
                    d * d
                })
                .collect::<Vec<_>>(),
        );
        s.sqrt() / sw
    }

    /// Values sorted with their weights.
    fn sorted(&self) -> Vec<(f64, f64)> {
        let mut pairs: Vec<(f64, f64)> = self.values.iter().cloned().zip(self.weights.iter().cloned()).collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        pairs
    }
}

/// Kolmogorov survival function `Q(lambda) = 2 sum_k (-1)^{k-1} exp(-2 k^2 lambda^2)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let term = (-2.0 * (k as f64) * (k as f64) * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    /// Effective sample size used in the critical-value formula.
    pub ess: f64,
}

impl KsResult {
    pub fn passes_at(&self, alpha: f64) -> bool {
        self.p_value > alpha
    }
}

/// One-sample KS test of a weighted sample against a reference CDF.
pub fn ks_one_sample<F: Fn(f64) -> f64>(sample: &WeightedSample, cdf: F) -> Result<KsResult, StatsError> {
    let pairs = sample.sorted();
    let total = sample.total_weight();
    let mut acc = 0.0;
    let mut stat = 0.0f64;
    let mut i = 0;
    while i < pairs.len() {
        // advance through ties as one ECDF step
        let x = pairs[i].0;
        let before = acc / total;
        while i < pairs.len() && pairs[i].0 == x {
            acc += pairs[i].1;
            i += 1;
        }
        let after = acc / total;
        let f = cdf(x);
        stat = stat.max((before - f).abs()).max((after - f).abs());
    }
    let ess = sample.ess();
    let p_value = kolmogorov_sf(ess.sqrt() * stat);
    Ok(KsResult { statistic: stat, p_value, ess })
}

/// Two-sample KS test between weighted samples; the Kolmogorov asymptotics
/// use `n_eff = ess_a ess_b / (ess_a + ess_b)`.
pub fn ks_two_sample(a: &WeightedSample, b: &WeightedSample) -> Result<KsResult, StatsError> {
    let pa = a.sorted();
    let pb = b.sorted();
    let (ta, tb) = (a.total_weight(), b.total_weight());
    let (mut ia, mut ib) = (0usize, 0usize);
    let (mut ca, mut cb) = (0.0f64, 0.0f64);
    let mut stat = 0.0f64;
    while ia < pa.len() || ib < pb.len() {
        let xa = if ia < pa.len() { pa[ia].0 } else { f64::INFINITY };
        let xb = if ib < pb.len() { pb[ib].0 } else { f64::INFINITY };
        let x = xa.min(xb);
        while ia < pa.len() && pa[ia].0 == x {
            ca += pa[ia].1;
            ia += 1;
        }
        while ib < pb.len() && pb[ib].0 == x {
            cb += pb[ib].1;
            ib += 1;
        }
        stat = stat.max((ca / ta - cb / tb).abs());
    }
    let (ea, eb) = (a.ess(), b.ess());
    let n_eff = ea * eb / (ea + eb);
    let p_value = kolmogorov_sf(n_eff.sqrt() * stat);
    Ok(KsResult { statistic: stat, p_value, ess: n_eff })
}

#[derive(Debug, Clone, Copy)]
pub struct ZResult {
    pub z: f64,
    pub mean: f64,
    pub std_error: f64,
    pub pass: bool,
    /// Set when the sample variance collapsed; `z` is then 0 by convention
    /// if the mean hit the target exactly.
    pub variance_degenerate: bool,
}

/// z-test of the weighted mean against `target`; passes at the 3-sigma level.
pub fn z_test_mean(sample: &WeightedSample, target: f64) -> Result<ZResult, StatsError> {
    let ess = sample.ess();
    if ess < 30.0 {
        return Err(StatsError::TooSmall(ess));
    }
    let mean = sample.mean();
    let se = sample.std_error();
    if se == 0.0 {
        return Ok(ZResult { z: 0.0, mean, std_error: 0.0, pass: mean == target, variance_degenerate: true });
    }
    let z = (mean - target) / se;
    Ok(ZResult { z, mean, std_error: se, pass: z.abs() <= 3.0, variance_degenerate: false })
}
