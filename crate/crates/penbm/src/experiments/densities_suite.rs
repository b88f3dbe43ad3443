//! Density suite: normalization of every closed form by adaptive
//! quadrature, and one-sample KS of each sampler against its reference law.

use super::{Reporter, RunConfig, VerificationReport};
use crate::densities::{arcsine_pdf, bessel3_pdf, bessel3_pdf_from_origin, meander_endpoint_pdf, DensityFn};
use crate::parallel::map_indexed;
use crate::path::{argmax_time, running_max};
use crate::quad::simpson_adaptive;
use crate::rng::RngStream;
use crate::samplers::{sample_bessel3, sample_bm, sample_bridge, sample_meander, sample_williams_drift};
use crate::stats::{ks_one_sample, WeightedSample};

pub fn names() -> Vec<&'static str> {
    vec![
        "density-normalization",
        "density-ks-bessel3-origin",
        "density-ks-bessel3-from-1",
        "density-ks-meander-endpoint",
        "density-ks-argmax-arcsine",
        "density-ks-bridge-max",
        "density-ks-sinf-exponential",
        "density-ks-trivariate-u-marginal",
    ]
}

pub fn run(cfg: &RunConfig) -> Vec<VerificationReport> {
    vec![
        normalization(cfg),
        ks_bessel3_origin(cfg),
        ks_bessel3_from_one(cfg),
        ks_meander_endpoint(cfg),
        ks_argmax_arcsine(cfg),
        ks_bridge_max(cfg),
        ks_sinf_exponential(cfg),
        ks_trivariate_u_marginal(cfg),
    ]
}

/// All seven reference densities integrate to 1 within 1e-6 (adaptive
/// quadrature as the independent oracle; the trivariate law through its
/// analytically reduced argmax marginal with the `sin^2` substitution).
fn normalization(cfg: &RunConfig) -> VerificationReport {
    let rep = Reporter::new("density-normalization", cfg.seed);
    let mut worst: f64 = 0.0;
    let one_d: Vec<(Box<dyn Fn(f64) -> f64>, f64, f64)> = vec![
        (Box::new(|y| bessel3_pdf_from_origin(1.0, y).unwrap()), 0.0, 14.0),
        (Box::new(|y| bessel3_pdf(1.0, 1.0, y).unwrap()), 0.0, 16.0),
        (Box::new(meander_endpoint_pdf), 0.0, 14.0),
        (Box::new(|b| DensityFn::bridge_max(0.0, 1.0).unwrap().pdf(b)), 0.0, 14.0),
        (Box::new(|x| DensityFn::exponential(2.0).unwrap().pdf(x)), 0.0, 25.0),
    ];
    for (pdf, lo, hi) in one_d {
        let total = simpson_adaptive(&pdf, lo, hi, 1e-10).expect("normalization quadrature converges");
        worst = worst.max((total - 1.0).abs());
    }
    // arcsine and the trivariate u-marginal, integrated in theta with
    // u = sin^2(theta) to tame the endpoint singularities
    for marginal in [arcsine_in_theta as fn(f64) -> f64, trivariate_in_theta as fn(f64) -> f64] {
        let total = simpson_adaptive(&marginal, 0.0, std::f64::consts::FRAC_PI_2, 1e-9)
            .expect("u-marginal quadrature converges");
        worst = worst.max((total - 1.0).abs());
    }
    rep.finish(7, worst, 1e-6, worst <= 1e-6, 7.0)
}

/// Argmax marginal of the trivariate law with the `x` and `y` axes
/// integrated by quadrature.
fn trivariate_u_marginal(u: f64) -> f64 {
    let ix = simpson_adaptive(&|x: f64| x * (-x * x / (2.0 * u)).exp(), 0.0, 12.0, 1e-12).unwrap();
    let iy = simpson_adaptive(&|y: f64| y * (-y * y / (2.0 * (1.0 - u))).exp(), 0.0, 12.0, 1e-12).unwrap();
    ix * iy / (std::f64::consts::PI * (u * (1.0 - u)).powf(1.5))
}

/// Arcsine pdf times the `u = sin^2(theta)` Jacobian.
fn arcsine_in_theta(theta: f64) -> f64 {
    let u = theta.sin().powi(2);
    if u <= 0.0 || u >= 1.0 {
        // pdf * jacobian tends to the constant 2/pi at both endpoints
        return 2.0 / std::f64::consts::PI;
    }
    arcsine_pdf(u).unwrap() * 2.0 * theta.sin() * theta.cos()
}

/// Trivariate u-marginal times the Jacobian; finite on the closed interval.
fn trivariate_in_theta(theta: f64) -> f64 {
    let u = theta.sin().powi(2);
    if u <= 1e-14 || u >= 1.0 - 1e-14 {
        return 2.0 / std::f64::consts::PI;
    }
    trivariate_u_marginal(u) * 2.0 * theta.sin() * theta.cos()
}

fn ks_bessel3_origin(cfg: &RunConfig) -> VerificationReport {
    let rep = Reporter::new("density-ks-bessel3-origin", cfg.seed);
    let n = cfg.scaled(10_000);
    let ends = map_indexed(n, |i| sample_bessel3(&mut RngStream::new(cfg.seed).with_stream(0x10).child(i as u64).rng(), 0.0, 1.0, 64).endpoint());
    let d = DensityFn::bessel3_from_origin(1.0).unwrap();
    let ks = ks_one_sample(&WeightedSample::unweighted(ends).unwrap(), |y| d.cdf(y)).unwrap();
    rep.finish_ks(n, &ks, cfg.ks_alpha)
}

fn ks_bessel3_from_one(cfg: &RunConfig) -> VerificationReport {
    let rep = Reporter::new("density-ks-bessel3-from-1", cfg.seed);
    let n = cfg.scaled(10_000);
    let ends = map_indexed(n, |i| sample_bessel3(&mut RngStream::new(cfg.seed).with_stream(0x11).child(i as u64).rng(), 1.0, 1.0, 64).endpoint());
    let d = DensityFn::bessel3_from(1.0, 1.0).unwrap();
    let ks = ks_one_sample(&WeightedSample::unweighted(ends).unwrap(), |y| d.cdf(y)).unwrap();
    rep.finish_ks(n, &ks, cfg.ks_alpha)
}

fn ks_meander_endpoint(cfg: &RunConfig) -> VerificationReport {
    let rep = Reporter::new("density-ks-meander-endpoint", cfg.seed);
    let n = cfg.scaled(10_000);
    let ends = map_indexed(n, |i| sample_meander(&mut RngStream::new(cfg.seed).with_stream(0x12).child(i as u64).rng(), 64).endpoint());
    let d = DensityFn::meander_endpoint();
    let ks = ks_one_sample(&WeightedSample::unweighted(ends).unwrap(), |y| d.cdf(y)).unwrap();
    rep.finish_ks(n, &ks, cfg.ks_alpha)
}

fn ks_argmax_arcsine(cfg: &RunConfig) -> VerificationReport {
    let rep = Reporter::new("density-ks-argmax-arcsine", cfg.seed);
    let n = cfg.scaled(10_000);
    let m = 1 << 13;
    let thetas = map_indexed(n, |i| {
        let p = sample_bm(&mut RngStream::new(cfg.seed).with_stream(0x13).child(i as u64).rng(), 1.0, 0.0, m);
        argmax_time(&p)
    });
    let d = DensityFn::arcsine();
    let ks = ks_one_sample(&WeightedSample::unweighted(thetas).unwrap(), |u| d.cdf(u)).unwrap();
    rep.finish_ks(n, &ks, cfg.ks_alpha)
}

fn ks_bridge_max(cfg: &RunConfig) -> VerificationReport {
    let rep = Reporter::new("density-ks-bridge-max", cfg.seed);
    let n = cfg.scaled(10_000);
    let m = 1 << 13;
    let maxes = map_indexed(n, |i| {
        let p = sample_bridge(&mut RngStream::new(cfg.seed).with_stream(0x14).child(i as u64).rng(), 0.0, 0.0, 1.0, m);
        running_max(&p).endpoint()
    });
    let d = DensityFn::bridge_max(0.0, 1.0).unwrap();
    let ks = ks_one_sample(&WeightedSample::unweighted(maxes).unwrap(), |b| d.cdf(b)).unwrap();
    rep.finish_ks(n, &ks, cfg.ks_alpha)
}

fn ks_sinf_exponential(cfg: &RunConfig) -> VerificationReport {
    let h = -0.7;
    let rep = Reporter::new("density-ks-sinf-exponential", cfg.seed).with_params(0.0, h);
    let n = cfg.scaled(10_000);
    let sinfs = map_indexed(n, |i| {
        sample_williams_drift(&mut RngStream::new(cfg.seed).with_stream(0x15).child(i as u64).rng(), h, 2.0, 64).s_inf
    });
    let d = DensityFn::exponential(-2.0 * h).unwrap();
    let ks = ks_one_sample(&WeightedSample::unweighted(sinfs).unwrap(), |x| d.cdf(x)).unwrap();
    rep.finish_ks(n, &ks, cfg.ks_alpha)
}

/// Argmax samples against the u-marginal CDF built by quadrature from the
/// trivariate density (tabulated in the `sin^2` coordinate, where the
/// integrand is smooth, and monotonically interpolated), an independent
/// route to the same law as the arcsine test.
fn ks_trivariate_u_marginal(cfg: &RunConfig) -> VerificationReport {
    let rep = Reporter::new("density-ks-trivariate-u-marginal", cfg.seed);
    let n = cfg.scaled(10_000);
    let m = 1 << 13;
    const NODES: usize = 257;
    let mut us = Vec::with_capacity(NODES);
    let mut cum = Vec::with_capacity(NODES);
    let mut acc = 0.0;
    us.push(0.0);
    cum.push(0.0);
    for i in 1..NODES {
        let a = std::f64::consts::FRAC_PI_2 * (i - 1) as f64 / (NODES - 1) as f64;
        let b = std::f64::consts::FRAC_PI_2 * i as f64 / (NODES - 1) as f64;
        acc += simpson_adaptive(&trivariate_in_theta, a, b, 1e-11).expect("marginal quadrature converges");
        us.push(b.sin().powi(2));
        cum.push(acc.min(1.0));
    }
    let table = crate::quad::MonotoneCubic::new(us, cum);
    let thetas = map_indexed(n, |i| {
        let p = sample_bm(&mut RngStream::new(cfg.seed).with_stream(0x16).child(i as u64).rng(), 1.0, 0.0, m);
        argmax_time(&p)
    });
    let ks = ks_one_sample(&WeightedSample::unweighted(thetas).unwrap(), |u| table.eval(u)).unwrap();
    rep.finish_ks(n, &ks, cfg.ks_alpha)
}
