//! Registry of verification experiments.
//!
//! Each experiment draws seeded samples, computes one statistic, compares it
//! to a fixed threshold, and emits a [`VerificationReport`]. Suites group
//! experiments; the `verify` CLI subcommand and the acceptance test target
//! both run them through [`run_suite`], so a passing CLI run and a passing
//! test suite are the same evidence.
//!
//! Ladder experiments additionally check a trend: the distributional
//! distance must be nonincreasing in the horizon, up to a noise allowance
//! that widens when the effective sample size shrinks (weighted Kolmogorov
//! statistics fluctuate at scale `1/sqrt(ess)`).

mod calibration;
mod densities_suite;
mod estimator;
mod identities;
mod partition_suite;
mod phase;
mod theorems;

use serde::{Deserialize, Serialize};
use std::time::Instant;

use crate::stats::{KsResult, ZResult};

/// Statistical levels and sizes shared by the registry.
#[derive(Debug, Clone, Copy)]
pub struct RunConfig {
    pub seed: u64,
    /// KS level; the registry default is 1%.
    pub ks_alpha: f64,
    /// z-test threshold in standard errors.
    pub z_threshold: f64,
    /// Scales every experiment's sample count (1.0 = registry defaults).
    /// Smoke runs use a small factor; thresholds widen accordingly only
    /// through the effective-sample-size dependence of the tests.
    pub n_scale: f64,
    /// Restrict theorem-suite runs to one region.
    pub region: Option<crate::partition::PhaseRegion>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { seed: 42, ks_alpha: 0.01, z_threshold: 3.0, n_scale: 1.0, region: None }
    }
}

impl RunConfig {
    pub fn scaled(&self, n: usize) -> usize {
        ((n as f64 * self.n_scale) as usize).max(200)
    }
}

/// Outcome of one experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub experiment: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub region: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    pub n: usize,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
    pub ess: f64,
    pub seed: u64,
    pub runtime_ms: u128,
}

impl VerificationReport {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:<44} stat {:>12.5e} thr {:>10.3e} ess {:>9.1} ({} ms)",
            if self.pass { "PASS" } else { "FAIL" },
            self.experiment,
            self.statistic,
            self.threshold,
            self.ess,
            self.runtime_ms
        )
    }
}

/// Builder tracking the wall clock and parameter context of one experiment.
pub(crate) struct Reporter {
    experiment: String,
    region: Option<String>,
    nu: Option<f64>,
    h: Option<f64>,
    t: Option<f64>,
    seed: u64,
    started: Instant,
}

impl Reporter {
    pub fn new(experiment: impl Into<String>, seed: u64) -> Self {
        Reporter { experiment: experiment.into(), region: None, nu: None, h: None, t: None, seed, started: Instant::now() }
    }

    pub fn with_params(mut self, nu: f64, h: f64) -> Self {
        self.nu = Some(nu);
        self.h = Some(h);
        if let Ok(r) = crate::partition::classify(nu, h) {
            self.region = Some(r.name().to_string());
        }
        self
    }

    pub fn with_t(mut self, t: f64) -> Self {
        self.t = Some(t);
        self
    }

    pub fn finish(self, n: usize, statistic: f64, threshold: f64, pass: bool, ess: f64) -> VerificationReport {
        VerificationReport {
            experiment: self.experiment,
            region: self.region,
            nu: self.nu,
            h: self.h,
            t: self.t,
            n,
            statistic,
            threshold,
            pass,
            ess,
            seed: self.seed,
            runtime_ms: self.started.elapsed().as_millis(),
        }
    }

    /// Report a KS outcome: the statistic against its ess-adjusted critical
    /// value at level `alpha`.
    pub fn finish_ks(self, n: usize, ks: &KsResult, alpha: f64) -> VerificationReport {
        let crit = ks_critical(alpha, ks.ess);
        self.finish(n, ks.statistic, crit, ks.p_value > alpha, ks.ess)
    }

    /// Report a z outcome against the configured threshold.
    pub fn finish_z(self, n: usize, z: &ZResult, threshold: f64, ess: f64) -> VerificationReport {
        self.finish(n, z.z.abs(), threshold, z.z.abs() <= threshold && !z.z.is_nan(), ess)
    }
}

/// Asymptotic KS critical value at level `alpha` for effective size `ess`.
pub fn ks_critical(alpha: f64, ess: f64) -> f64 {
    // invert the Kolmogorov survival function by bisection
    let (mut lo, mut hi) = (0.2, 3.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if crate::stats::kolmogorov_sf(mid) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi) / ess.sqrt()
}

/// Nonincreasing-trend check for a ladder of KS statistics: each step may
/// rise by at most `max(0.02, 1.5 / sqrt(min(ess)))`, the noise scale of
/// the weighted statistic.
pub(crate) fn ks_trend_excess(ladder: &[(f64, f64)]) -> f64 {
    let mut worst: f64 = 0.0;
    for w in ladder.windows(2) {
        let (d0, e0) = w[0];
        let (d1, e1) = w[1];
        let slack = (1.5 / e0.min(e1).sqrt()).max(0.02);
        worst = worst.max(d1 - d0 - slack);
    }
    worst
}

/// Nonincreasing-trend check for a ladder of means with standard errors.
pub(crate) fn mean_trend_excess(ladder: &[(f64, f64)]) -> f64 {
    let mut worst: f64 = 0.0;
    for w in ladder.windows(2) {
        let (m0, s0) = w[0];
        let (m1, s1) = w[1];
        let slack = (3.0 * (s0 + s1)).max(0.01);
        worst = worst.max(m1 - m0 - slack);
    }
    worst
}

/// The experiment suites exposed by the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Phase,
    Partition,
    Densities,
    Identities,
    Theorem11,
    Theorem12,
    Theorem13,
    Estimator,
    Calibration,
    Ballistic,
    All,
}

impl Suite {
    pub fn parse(name: &str) -> Option<Suite> {
        match name.to_ascii_lowercase().as_str() {
            "phase" => Some(Suite::Phase),
            "partition" => Some(Suite::Partition),
            "densities" => Some(Suite::Densities),
            "identities" => Some(Suite::Identities),
            "theorem-1.1" | "theorem-11" => Some(Suite::Theorem11),
            "theorem-1.2" | "theorem-12" => Some(Suite::Theorem12),
            "theorem-1.3" | "theorem-13" => Some(Suite::Theorem13),
            "estimator" => Some(Suite::Estimator),
            "calibration" => Some(Suite::Calibration),
            "ballistic" => Some(Suite::Ballistic),
            "all" => Some(Suite::All),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Phase => "phase",
            Suite::Partition => "partition",
            Suite::Densities => "densities",
            Suite::Identities => "identities",
            Suite::Theorem11 => "theorem-1.1",
            Suite::Theorem12 => "theorem-1.2",
            Suite::Theorem13 => "theorem-1.3",
            Suite::Estimator => "estimator",
            Suite::Calibration => "calibration",
            Suite::Ballistic => "ballistic",
            Suite::All => "all",
        }
    }

    pub fn all() -> &'static [Suite] {
        &[
            Suite::Phase,
            Suite::Partition,
            Suite::Densities,
            Suite::Identities,
            Suite::Theorem11,
            Suite::Theorem12,
            Suite::Theorem13,
            Suite::Estimator,
            Suite::Calibration,
            Suite::Ballistic,
        ]
    }
}

/// Run one suite and collect its reports.
pub fn run_suite(suite: Suite, cfg: &RunConfig) -> Vec<VerificationReport> {
    match suite {
        Suite::Phase => phase::run(cfg),
        Suite::Partition => partition_suite::run(cfg),
        Suite::Densities => densities_suite::run(cfg),
        Suite::Identities => identities::run(cfg),
        Suite::Theorem11 => theorems::run_theorem_11(cfg),
        Suite::Theorem12 => theorems::run_theorem_12(cfg),
        Suite::Theorem13 => theorems::run_theorem_13(cfg),
        Suite::Estimator => estimator::run(cfg),
        Suite::Calibration => calibration::run(cfg),
        Suite::Ballistic => theorems::run_ballistic(cfg),
        Suite::All => {
            let mut out = Vec::new();
            for s in Suite::all() {
                out.extend(run_suite(*s, cfg));
            }
            out
        }
    }
}

/// Names of every registered experiment, by suite.
pub fn list_experiments() -> Vec<(&'static str, Vec<&'static str>)> {
    vec![
        ("phase", phase::names()),
        ("partition", partition_suite::names()),
        ("densities", densities_suite::names()),
        ("identities", identities::names()),
        ("theorem-1.1", theorems::names_11()),
        ("theorem-1.2", theorems::names_12()),
        ("theorem-1.3", theorems::names_13()),
        ("estimator", estimator::names()),
        ("calibration", calibration::names()),
        ("ballistic", theorems::names_ballistic()),
    ]
}

/// The six canonical parameter points, one per phase.
pub const CANONICAL_POINTS: [(f64, f64); 6] =
    [(-1.0, 0.0), (-2.0, 1.0), (-1.0, 1.0), (1.0, 1.0), (2.0, -1.0), (-1.0, -1.0)];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::all() {
            assert_eq!(Suite::parse(s.name()), Some(*s));
        }
        assert_eq!(Suite::parse("ALL"), Some(Suite::All));
        assert_eq!(Suite::parse("bogus"), None);
    }

    #[test]
    fn ks_critical_matches_known_constants() {
        assert!((ks_critical(0.05, 1.0) - 1.3581).abs() < 1e-3);
        assert!((ks_critical(0.01, 10_000.0) - 1.6276 / 100.0).abs() < 1e-5);
    }

    #[test]
    fn trend_excess_flags_growth_within_noise() {
        // flat-with-noise ladders pass
        assert!(ks_trend_excess(&[(0.05, 1e4), (0.045, 1e4), (0.043, 1e4)]) <= 0.0);
        assert!(ks_trend_excess(&[(0.05, 100.0), (0.12, 100.0)]) <= 0.0); // low ess widens slack
        // a real blow-up fails
        assert!(ks_trend_excess(&[(0.05, 1e4), (0.40, 1e4)]) > 0.0);
        assert!(mean_trend_excess(&[(0.3, 0.001), (0.2, 0.001), (0.35, 0.001)]) > 0.0);
    }

    #[test]
    fn registry_lists_every_suite() {
        let listed = list_experiments();
        assert_eq!(listed.len(), Suite::all().len());
        assert!(listed.iter().all(|(_, names)| !names.is_empty()));
    }
}
