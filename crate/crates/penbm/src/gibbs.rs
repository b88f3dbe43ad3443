//! Self-normalized importance-sampling estimators for the Gibbs measures
//! `Q_t^{nu,h}`.
//!
//! Paths are proposed under a piecewise-constant drift schedule, the
//! Girsanov correction converts the proposal density back to Wiener
//! measure, and the penalization weight `exp(nu S_t + h X_t)` rides on top.
//! The estimator is the ratio of weighted sums, so the partition function
//! cancels; all weight arithmetic is done in the log domain with a max
//! shift. The running maximum entering the weight uses the exact cell-maxima
//! draw from the schedule sampler, which removes the `O(sqrt(dt))` maximum
//! bias that a grid supremum would put directly into every weight.
//!
//! The critical-line proposal switches drift at a per-sample uniform time
//! (snapped to the grid so every cell has constant drift); its weight uses
//! the Girsanov density conditional on the drawn switch time, with the
//! switch treated as proposal-internal randomness. That conditional
//! weighting is unbiased for each fixed switch time, hence unbiased for the
//! mixture.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::parallel::{map_indexed, pairwise_sum};
use crate::partition::{PenaltyParams, PhaseRegion};
use crate::path::{running_max, Path, PathFunctional};
use crate::rng::RngStream;
use crate::samplers::{sample_grid_schedule, ScheduleSample};

#[derive(Debug, Error)]
pub enum GibbsError {
    #[error("proposal schedule is invalid: {0}")]
    BadProposal(String),
    #[error("girsanov correction of a random-switch proposal needs the realized schedule")]
    UnrealizedSwitch,
    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { min: usize, got: usize },
}

/// A piecewise-constant drift proposal on `[0, 1]` (fractions of the
/// horizon). With `random_switch` set, the boundary between the two
/// segments is redrawn uniformly for every sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Proposal {
    /// `(end_fraction, drift)` pairs; end fractions increase to 1.
    pub schedule: Vec<(f64, f64)>,
    pub random_switch: bool,
}

impl Proposal {
    pub fn zero_drift() -> Self {
        Proposal { schedule: vec![(1.0, 0.0)], random_switch: false }
    }

    pub fn constant(drift: f64) -> Self {
        Proposal { schedule: vec![(1.0, drift)], random_switch: false }
    }

    /// Drift `first` up to a uniform switch time, `second` afterwards.
    pub fn random_switch(first: f64, second: f64) -> Self {
        Proposal { schedule: vec![(0.5, first), (1.0, second)], random_switch: true }
    }

    pub fn validate(&self) -> Result<(), GibbsError> {
        if self.schedule.is_empty() {
            return Err(GibbsError::BadProposal("empty schedule".into()));
        }
        let mut prev = 0.0;
        for &(frac, drift) in &self.schedule {
            if !(frac > prev && frac <= 1.0) {
                return Err(GibbsError::BadProposal(format!("end fraction {frac} not increasing in (0, 1]")));
            }
            if !drift.is_finite() {
                return Err(GibbsError::BadProposal(format!("drift {drift} not finite")));
            }
            prev = frac;
        }
        if (prev - 1.0).abs() > 1e-12 {
            return Err(GibbsError::BadProposal("schedule must end at fraction 1".into()));
        }
        if self.random_switch && self.schedule.len() != 2 {
            return Err(GibbsError::BadProposal("random switch needs exactly two segments".into()));
        }
        Ok(())
    }

    /// Grid realization: `(end_cell, drift)` segments. A random switch is
    /// drawn here (snapped to an interior grid node so cells never straddle
    /// a drift change).
    fn realize<R: rand::Rng>(&self, rng: &mut R, m: usize) -> Vec<(usize, f64)> {
        if self.random_switch {
            let u: f64 = rng.gen();
            let k = ((u * m as f64) as usize).clamp(1, m - 1);
            return vec![(k, self.schedule[0].1), (m, self.schedule[1].1)];
        }
        let mut out = Vec::with_capacity(self.schedule.len());
        let mut prev = 0usize;
        for &(frac, drift) in &self.schedule {
            let mut k = (frac * m as f64).round() as usize;
            k = k.clamp(prev + 1, m);
            out.push((k, drift));
            prev = k;
        }
        out.last_mut().expect("nonempty").0 = m;
        out
    }
}

/// Penalization weight `nu S_t + h X_t` read off a path's grid values.
///
/// The estimator itself uses the exact cell-maxima supremum instead of the
/// grid supremum; this grid version is the public functional on bare paths.
pub fn gamma_log_weight(p: &Path, nu: f64, h: f64) -> f64 {
    let s_t = running_max(p).endpoint();
    nu * s_t + h * p.endpoint()
}

/// Log Radon-Nikodym correction `dP_0 / dP_proposal` along a path sampled
/// under the proposal: `-sum_k mu_k dX_k + (1/2) sum_k mu_k^2 ds` over grid
/// cells, with `mu_k` the schedule's average drift over cell `k`.
pub fn girsanov_log_correction(p: &Path, proposal: &Proposal) -> Result<f64, GibbsError> {
    if proposal.random_switch {
        return Err(GibbsError::UnrealizedSwitch);
    }
    proposal.validate()?;
    let m = p.grid_size();
    let dt = p.dt();
    let mut acc = 0.0;
    let values = p.values();
    for k in 0..m {
        let lo = k as f64 / m as f64;
        let hi = (k + 1) as f64 / m as f64;
        let mu = average_drift(&proposal.schedule, lo, hi);
        acc += -mu * (values[k + 1] - values[k]) + 0.5 * mu * mu * dt;
    }
    Ok(acc)
}

fn average_drift(schedule: &[(f64, f64)], lo: f64, hi: f64) -> f64 {
    let mut acc = 0.0;
    let mut prev = 0.0f64;
    for &(frac, drift) in schedule {
        let a = prev.max(lo);
        let b = frac.min(hi);
        if b > a {
            acc += drift * (b - a);
        }
        prev = frac;
    }
    acc / (hi - lo)
}

fn girsanov_from_grid_segments(values: &[f64], segments: &[(usize, f64)], dt: f64) -> f64 {
    let mut acc = 0.0;
    let mut start = 0usize;
    for &(end, mu) in segments {
        acc += -mu * (values[end] - values[start]) + 0.5 * mu * mu * dt * (end - start) as f64;
        start = end;
    }
    acc
}

/// Region-adapted proposal: zero drift on the diffusive side, the limit
/// slope's drift on the ballistic sectors, and a random-switch tent on the
/// critical line.
pub fn make_proposal(region: PhaseRegion, nu: f64, h: f64) -> Proposal {
    match region {
        PhaseRegion::L1 | PhaseRegion::R1 | PhaseRegion::L2 => Proposal::zero_drift(),
        PhaseRegion::R2 => Proposal::constant(nu + h),
        PhaseRegion::R3 => Proposal::constant(h),
        PhaseRegion::L3 => Proposal::random_switch(-h, h),
    }
}

/// Monte Carlo estimate of a Gibbs expectation.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
    /// Effective sample size `(sum w)^2 / sum w^2`.
    pub ess: f64,
    /// Horizon-cap or restart events surfaced by the samplers.
    pub truncation_flags: u64,
    /// Set when `ess < 0.01 n`.
    pub low_ess: bool,
}

/// Grid and weighting controls for the estimators.
#[derive(Debug, Clone, Copy)]
pub struct GibbsOpts {
    pub m: usize,
    /// Draw exact cell maxima for the weight's running supremum.
    pub exact_max: bool,
}

impl Default for GibbsOpts {
    fn default() -> Self {
        GibbsOpts { m: crate::samplers::DEFAULT_GRID, exact_max: true }
    }
}

/// One weighted draw: the per-sample summary plus its log weight.
pub struct WeightedBatch<T> {
    pub items: Vec<T>,
    pub log_weights: Vec<f64>,
}

/// Draw `n` proposal paths and reduce each to a summary, carrying the
/// penalization-plus-Girsanov log weight. One child stream per sample.
pub fn sample_weighted<T, F>(
    params: &PenaltyParams,
    proposal: &Proposal,
    n: usize,
    stream: RngStream,
    opts: &GibbsOpts,
    summary: F,
) -> Result<WeightedBatch<T>, GibbsError>
where
    T: Send,
    F: Fn(&ScheduleSample) -> T + Sync + Send,
{
    proposal.validate()?;
    let (nu, h, t) = (params.nu, params.h, params.t);
    let m = opts.m;
    let exact_max = opts.exact_max;
    let proposal = proposal.clone();
    let dt = t / m as f64;
    let pairs: Vec<(T, f64)> = map_indexed(n, move |i| {
        let mut rng = stream.child(i as u64).rng();
        let segments = proposal.realize(&mut rng, m);
        let s = sample_grid_schedule(&mut rng, t, &segments, m, exact_max);
        let log_w = nu * s.smax + h * s.path.endpoint() + girsanov_from_grid_segments(s.path.values(), &segments, dt);
        (summary(&s), log_w)
    });
    let mut items = Vec::with_capacity(n);
    let mut log_weights = Vec::with_capacity(n);
    for (item, lw) in pairs {
        items.push(item);
        log_weights.push(lw);
    }
    Ok(WeightedBatch { items, log_weights })
}

/// Normalized weights from log weights (max-shifted), plus the shift.
pub fn shifted_weights(log_weights: &[f64]) -> (Vec<f64>, f64) {
    let shift = log_weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (log_weights.iter().map(|lw| (lw - shift).exp()).collect(), shift)
}

/// Self-normalized estimate from values and log weights.
pub fn estimate_from(values: &[f64], log_weights: &[f64], truncation_flags: u64) -> Estimate {
    let n = values.len();
    let (w, _) = shifted_weights(log_weights);
    let sw = pairwise_sum(&w);
    let swx = pairwise_sum(&w.iter().zip(values).map(|(wi, xi)| wi * xi).collect::<Vec<_>>());
    let mean = swx / sw;
    let var_terms: Vec<f64> = w
        .iter()
        .zip(values)
        .map(|(wi, xi)| {
            let d = wi * (xi - mean);
            d * d
        })
        .collect();
    let std_error = pairwise_sum(&var_terms).sqrt() / sw;
    let sw2 = pairwise_sum(&w.iter().map(|wi| wi * wi).collect::<Vec<_>>());
    let ess = sw * sw / sw2;
    Estimate { mean, std_error, n, ess, truncation_flags, low_ess: ess < 0.01 * n as f64 }
}

/// Self-normalized importance-sampling estimate of `Q_t^{nu,h}[F]`.
pub fn estimate_penalized(
    f: &PathFunctional,
    params: &PenaltyParams,
    proposal: &Proposal,
    n: usize,
    stream: RngStream,
    opts: &GibbsOpts,
) -> Result<Estimate, GibbsError> {
    if n < 100 {
        return Err(GibbsError::TooFewSamples { min: 100, got: n });
    }
    let batch = sample_weighted(params, proposal, n, stream, opts, |s| f.eval(&s.path))?;
    Ok(estimate_from(&batch.items, &batch.log_weights, 0))
}

/// Unnormalized mean weight in the log domain, with its relative standard
/// error; comparable to the exact partition function.
#[derive(Debug, Clone, Copy)]
pub struct LogMeanWeight {
    pub log_mean: f64,
    pub rel_std_error: f64,
    pub n: usize,
}

pub fn log_mean_weight(log_weights: &[f64]) -> LogMeanWeight {
    let n = log_weights.len();
    let (w, shift) = shifted_weights(log_weights);
    let mean = pairwise_sum(&w) / n as f64;
    let var_terms: Vec<f64> = w.iter().map(|wi| (wi - mean) * (wi - mean)).collect();
    let sd = (pairwise_sum(&var_terms) / (n as f64 - 1.0)).sqrt();
    LogMeanWeight { log_mean: shift + mean.ln(), rel_std_error: sd / (n as f64).sqrt() / mean, n }
}
