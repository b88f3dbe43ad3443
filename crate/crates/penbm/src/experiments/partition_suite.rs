//! Partition-function checks: quadrature against the leading asymptotics on
//! the canonical points, the Gaussian closed form, and finite-horizon
//! duality invariance.
//!
//! The convergence measure is the ratio of the log-domain values
//! `log_exact / log_asymptotic`, which is the natural dimensionless gauge
//! for quantities spanning `t^{-3/2}` to `exp(h^2 t / 2)`; it must approach
//! 1 monotonically over the horizon ladder and land within 5% at `t = 60`.

use super::{Reporter, RunConfig, VerificationReport, CANONICAL_POINTS};
use crate::parallel::map_indexed;
use crate::partition::{asymptotic_partition, classify, dual, exact_partition, QuadSpec};

pub fn names() -> Vec<&'static str> {
    vec!["partition-ratio-trend", "partition-gaussian-closed-form", "partition-duality-invariance"]
}

pub fn run(cfg: &RunConfig) -> Vec<VerificationReport> {
    let mut out = ratio_trend(cfg);
    out.push(gaussian_closed_form(cfg));
    out.push(duality_invariance(cfg));
    out
}

const LADDER: [f64; 3] = [20.0, 40.0, 60.0];

fn ratio_trend(cfg: &RunConfig) -> Vec<VerificationReport> {
    let spec = QuadSpec::default();
    CANONICAL_POINTS
        .iter()
        .map(|&(nu, h)| {
            let region = classify(nu, h).unwrap();
            let rep = Reporter::new(format!("partition-ratio-{}", region.name()), cfg.seed).with_params(nu, h).with_t(60.0);
            let gaps: Vec<f64> = map_indexed(LADDER.len(), |i| {
                let t = LADDER[i];
                let le = exact_partition(nu, h, t, &spec).expect("quadrature converges on the canonical points");
                let la = asymptotic_partition(nu, h, t).expect("canonical points are off the origin");
                (le / la - 1.0).abs()
            });
            // monotone approach to 1, with a small allowance for quadrature
            // noise once the gap is at the tolerance floor
            let monotone = gaps.windows(2).all(|w| w[1] <= w[0] + 1e-6);
            let last = *gaps.last().unwrap();
            rep.finish(LADDER.len(), last, 0.05, monotone && last <= 0.05, LADDER.len() as f64)
        })
        .collect()
}

fn gaussian_closed_form(cfg: &RunConfig) -> VerificationReport {
    let rep = Reporter::new("partition-gaussian-closed-form", cfg.seed).with_params(0.0, 1.0);
    let spec = QuadSpec::default();
    // nu = 0: E exp(h X_t) = exp(h^2 t / 2) exactly
    let worst = [4.0, 20.0]
        .iter()
        .map(|&t| (exact_partition(0.0, 1.0, t, &spec).unwrap() - 0.5 * t).abs())
        .fold(0.0f64, f64::max);
    rep.finish(2, worst, 1e-6, worst <= 1e-6, 2.0)
}

fn duality_invariance(cfg: &RunConfig) -> VerificationReport {
    let rep = Reporter::new("partition-duality-invariance", cfg.seed);
    let spec = QuadSpec::default();
    let points = [(-1.0, 0.0, 10.0), (1.0, 1.0, 6.0), (-2.0, 1.0, 10.0), (2.0, -1.0, 6.0)];
    let worst = points
        .iter()
        .map(|&(nu, h, t)| {
            let (dn, dh) = dual(nu, h);
            (exact_partition(nu, h, t, &spec).unwrap() - exact_partition(dn, dh, t, &spec).unwrap()).abs()
        })
        .fold(0.0f64, f64::max);
    rep.finish(points.len(), worst, 1e-6, worst <= 1e-6, points.len() as f64)
}
