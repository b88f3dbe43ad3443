//! Phase-machinery property suite: classification against the literal
//! region definitions and the duality involution on a random parameter
//! cloud, with points planted on all three critical lines.

use rand::Rng;

use super::{Reporter, RunConfig, VerificationReport};
use crate::partition::{classify, dual, PhaseRegion};
use crate::rng::RngStream;

pub fn names() -> Vec<&'static str> {
    vec!["phase-classify-definitions", "phase-dual-involution"]
}

pub fn run(cfg: &RunConfig) -> Vec<VerificationReport> {
    let n = cfg.scaled(10_000);
    vec![classify_definitions(cfg, n), dual_involution(cfg, n)]
}

/// Draw a parameter point: 40% open box, 20% on each critical line.
fn draw_point<R: Rng>(rng: &mut R) -> (f64, f64) {
    let which: f64 = rng.gen();
    if which < 0.4 {
        loop {
            let nu = rng.gen_range(-3.0..3.0);
            let h = rng.gen_range(-3.0..3.0);
            if nu != 0.0 || h != 0.0 {
                return (nu, h);
            }
        }
    } else if which < 0.6 {
        (-rng.gen_range(1e-3..3.0), 0.0) // on the negative nu axis
    } else if which < 0.8 {
        let a = rng.gen_range(1e-3..3.0);
        (-a, a) // h = -nu, nu < 0
    } else {
        let a = rng.gen_range(1e-3..3.0);
        (a, -0.5 * a) // h = -nu/2, nu > 0
    }
}

/// Independent re-derivation of the region from the set definitions.
fn expected_region(nu: f64, h: f64) -> PhaseRegion {
    if nu < 0.0 && h == 0.0 {
        PhaseRegion::L1
    } else if h > 0.0 && h < -nu {
        PhaseRegion::R1
    } else if nu < 0.0 && h == -nu {
        PhaseRegion::L2
    } else if nu > 0.0 && h == -0.5 * nu {
        PhaseRegion::L3
    } else if h < 0.0 && h < -0.5 * nu {
        PhaseRegion::R3
    } else {
        PhaseRegion::R2
    }
}

fn classify_definitions(cfg: &RunConfig, n: usize) -> VerificationReport {
    let rep = Reporter::new("phase-classify-definitions", cfg.seed);
    let mut rng = RngStream::new(cfg.seed).with_stream(1).rng();
    let mut violations = 0usize;
    for _ in 0..n {
        let (nu, h) = draw_point(&mut rng);
        if classify(nu, h).unwrap() != expected_region(nu, h) {
            violations += 1;
        }
    }
    if classify(0.0, 0.0).is_ok() {
        violations += 1;
    }
    rep.finish(n, violations as f64, 0.0, violations == 0, n as f64)
}

fn dual_involution(cfg: &RunConfig, n: usize) -> VerificationReport {
    let rep = Reporter::new("phase-dual-involution", cfg.seed);
    let mut rng = RngStream::new(cfg.seed).with_stream(2).rng();
    let mut violations = 0usize;
    for _ in 0..n {
        let (nu, h) = draw_point(&mut rng);
        let (dn, dh) = dual(nu, h);
        if dual(dn, dh) != (nu, h) {
            violations += 1;
            continue;
        }
        let r = classify(nu, h).unwrap();
        let rd = classify(dn, dh).unwrap();
        let ok = match r {
            PhaseRegion::L1 => rd == PhaseRegion::L2,
            PhaseRegion::L2 => rd == PhaseRegion::L1,
            PhaseRegion::R2 => rd == PhaseRegion::R3,
            PhaseRegion::R3 => rd == PhaseRegion::R2,
            // the remaining phases are closed under duality: the open
            // sector maps into itself, the critical line is fixed pointwise
            PhaseRegion::R1 => rd == PhaseRegion::R1,
            PhaseRegion::L3 => rd == PhaseRegion::L3 && (dh - h).abs() <= 1e-12 * h.abs().max(1.0),
        };
        if !ok {
            violations += 1;
        }
    }
    rep.finish(n, violations as f64, 0.0, violations == 0, n as f64)
}
