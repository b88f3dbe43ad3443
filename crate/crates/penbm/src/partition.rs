//! Phase classification of the `(nu, h)` parameter plane, the duality map,
//! partition-function asymptotics and exact quadrature, and the generic
//! Watson/Laplace leading-term evaluators.
//!
//! The plane splits into six regions: the open sectors `R1`, `R2`, `R3` and
//! the rays `L1` (`nu < 0, h = 0`), `L2` (`h = -nu, nu < 0`) and `L3`
//! (`h = -nu/2, nu > 0`). The diffusive phases `L1, R1, L2` scale with
//! exponent 1/2; the ballistic phases `R2, L3, R3` with exponent 1. The map
//! `(nu, h) -> (nu, -(nu + h))` is an involution exchanging `L1 <-> L2` and
//! `R2 <-> R3`; partition values are invariant under it at every finite
//! horizon, which the quadrature tests exploit.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::densities::log_trivariate_pdf;
use crate::quad::{log_simpson_adaptive, QuadError};
use crate::special::{gamma, ln_gamma};

#[derive(Debug, Error)]
pub enum PartitionError {
    #[error("the origin (nu, h) = (0, 0) is excluded")]
    Origin,
    #[error("horizon must be positive, got {0}")]
    BadHorizon(f64),
    #[error("parameter {name} = {value} outside its domain {domain}")]
    Domain { name: &'static str, value: f64, domain: &'static str },
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

/// Relative tolerance used to detect the critical lines: a point is on a
/// line when the defining expression vanishes to `1e-12` relative to the
/// parameter scale. Callers probing near-line behavior must pass exact
/// line values; the phases are genuinely discontinuous across them.
pub const LINE_TOL: f64 = 1e-12;

/// The six phases of the parameter plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhaseRegion {
    L1,
    R1,
    L2,
    R2,
    L3,
    R3,
}

impl PhaseRegion {
    /// Scaling exponent of the phase: 1/2 on the diffusive side, 1 on the
    /// ballistic side.
    pub fn alpha(&self) -> f64 {
        match self {
            PhaseRegion::L1 | PhaseRegion::R1 | PhaseRegion::L2 => 0.5,
            PhaseRegion::R2 | PhaseRegion::L3 | PhaseRegion::R3 => 1.0,
        }
    }

    /// Whether the phase is one of the critical rays.
    pub fn is_critical_line(&self) -> bool {
        matches!(self, PhaseRegion::L1 | PhaseRegion::L2 | PhaseRegion::L3)
    }

    pub fn name(&self) -> &'static str {
        match self {
            PhaseRegion::L1 => "L1",
            PhaseRegion::R1 => "R1",
            PhaseRegion::L2 => "L2",
            PhaseRegion::R2 => "R2",
            PhaseRegion::L3 => "L3",
            PhaseRegion::R3 => "R3",
        }
    }

    pub fn parse(s: &str) -> Option<PhaseRegion> {
        match s.to_ascii_uppercase().as_str() {
            "L1" => Some(PhaseRegion::L1),
            "R1" => Some(PhaseRegion::R1),
            "L2" => Some(PhaseRegion::L2),
            "R2" => Some(PhaseRegion::R2),
            "L3" => Some(PhaseRegion::L3),
            "R3" => Some(PhaseRegion::R3),
        _ => None,
        }
    }
}

/// Penalization strength, drift, and horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyParams {
    pub nu: f64,
    pub h: f64,
    pub t: f64,
}

impl PenaltyParams {
    pub fn new(nu: f64, h: f64, t: f64) -> Result<Self, PartitionError> {
        if nu == 0.0 && h == 0.0 {
            return Err(PartitionError::Origin);
        }
        if !(t > 0.0) {
            return Err(PartitionError::BadHorizon(t));
        }
        Ok(PenaltyParams { nu, h, t })
    }

    pub fn region(&self) -> Result<PhaseRegion, PartitionError> {
        classify(self.nu, self.h)
    }
}

/// Classify `(nu, h)` into its phase. Fails on the origin.
pub fn classify(nu: f64, h: f64) -> Result<PhaseRegion, PartitionError> {
    if nu == 0.0 && h == 0.0 {
        return Err(PartitionError::Origin);
    }
    let scale = nu.abs().max(h.abs());
    let tol = LINE_TOL * scale;
    if h.abs() <= tol {
        // on the h = 0 axis: the ray nu < 0 is critical, nu > 0 is not
        return Ok(if nu < 0.0 { PhaseRegion::L1 } else { PhaseRegion::R2 });
    }
    if h > 0.0 {
        if (h + nu).abs() <= tol {
            return Ok(PhaseRegion::L2);
        }
        Ok(if h < -nu { PhaseRegion::R1 } else { PhaseRegion::R2 })
    } else {
        if (h + 0.5 * nu).abs() <= tol {
            return Ok(PhaseRegion::L3);
        }
        Ok(if nu < -2.0 * h { PhaseRegion::R3 } else { PhaseRegion::R2 })
    }
}

/// The duality map `(nu, h) -> (nu, -(nu + h))`, an involution exchanging
/// `L1 <-> L2` and `R2 <-> R3` and preserving the partition function.
pub fn dual(nu: f64, h: f64) -> (f64, f64) {
    (nu, -(nu + h))
}

/// Leading-order log of `E_0[exp(nu S_t + h X_t)]` as `t -> infinity`,
/// by phase:
///
/// * `L1, L2`: `-(1/nu) sqrt(2/(pi t))`
/// * `R1`: `-nu/(h^2 (nu+h)^2) sqrt(2/(pi t^3))`
/// * `R2`: `2(nu+h)/(nu+2h) exp((nu+h)^2 t / 2)`
/// * `L3`: `2 h^2 t exp(h^2 t / 2)`
/// * `R3`: `2h/(nu+2h) exp(h^2 t / 2)`
pub fn asymptotic_partition(nu: f64, h: f64, t: f64) -> Result<f64, PartitionError> {
    if !(t > 0.0) {
        return Err(PartitionError::BadHorizon(t));
    }
    let region = classify(nu, h)?;
    let log = match region {
        PhaseRegion::L1 | PhaseRegion::L2 => (-1.0 / nu).ln() + 0.5 * ((2.0 / std::f64::consts::PI).ln() - t.ln()),
        PhaseRegion::R1 => {
            (-nu).ln() - 2.0 * h.abs().ln() - 2.0 * (nu + h).abs().ln()
                + 0.5 * ((2.0 / std::f64::consts::PI).ln() - 3.0 * t.ln())
        }
        PhaseRegion::R2 => {
            let s = nu + h;
            (2.0 * s / (nu + 2.0 * h)).ln() + 0.5 * s * s * t
        }
        PhaseRegion::L3 => (2.0 * h * h * t).ln() + 0.5 * h * h * t,
        PhaseRegion::R3 => (2.0 * h / (nu + 2.0 * h)).ln() + 0.5 * h * h * t,
    };
    Ok(log)
}

/// Quadrature controls for [`exact_partition`].
#[derive(Debug, Clone, Copy)]
pub struct QuadSpec {
    /// Relative tolerance on the partition value (absolute on its log).
    pub log_tol: f64,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec { log_tol: 1e-8 }
    }
}

/// Log of `E_0[exp(nu S_t + h X_t)]` at finite `t` by quadrature against
/// the joint law of `(S_1, S_1 - X_1, Theta_1)`.
///
/// With `x = S_1`, `y = S_1 - X_1` the weight is
/// `exp(sqrt(t) ((nu + h) x - h y))`, so for each argmax coordinate `u` the
/// double integral factorizes into two half-line integrals; the outer `u`
/// axis is integrated after the substitution `u = sin^2(theta)`, which
/// removes the arcsine endpoint singularities. All accumulation is by
/// log-sum-exp: ballistic phases reach `exp(h^2 t / 2)` long before any
/// fixed-point overflow.
pub fn exact_partition(nu: f64, h: f64, t: f64, spec: &QuadSpec) -> Result<f64, PartitionError> {
    if !(t > 0.0) {
        return Err(PartitionError::BadHorizon(t));
    }
    let rt = t.sqrt();
    let a = (nu + h) * rt; // coefficient on x = S_1
    let b = -h * rt; // coefficient on y = S_1 - X_1
    let inner_tol = spec.log_tol * 0.05;

    let log_theta_integrand = move |theta: f64| -> f64 {
        let sin = theta.sin();
        let cos = theta.cos();
        let u = (sin * sin).clamp(1e-290, 1.0 - 1e-16);
        let jac = (2.0 * sin * cos).abs().max(1e-290).ln();
        let lx = match log_halfline_moment(a, u, inner_tol) {
            Ok(v) => v,
            Err(_) => return f64::NEG_INFINITY,
        };
        let ly = match log_halfline_moment(b, 1.0 - u, inner_tol) {
            Ok(v) => v,
            Err(_) => return f64::NEG_INFINITY,
        };
        // trivariate density without the x, y factors already integrated:
        // 1/(pi (u(1-u))^{3/2})
        lx + ly - std::f64::consts::PI.ln() - 1.5 * (u.ln() + (1.0 - u).ln()) + jac
    };

    let v = log_simpson_adaptive(&log_theta_integrand, 0.0, std::f64::consts::FRAC_PI_2, spec.log_tol)?;
    Ok(v)
}

/// `log of integral_0^inf z exp(c z - z^2 / (2 var)) dz` by adaptive Simpson
/// in the log domain.
fn log_halfline_moment(c: f64, var: f64, rel_tol: f64) -> Result<f64, QuadError> {
    let sigma = var.sqrt();
    let peak = (c * var).max(0.0);
    let hi = peak + 16.0 * sigma + 1e-12;
    let log_f = move |z: f64| {
        if z <= 0.0 {
            f64::NEG_INFINITY
        } else {
            z.ln() + c * z - z * z / (2.0 * var)
        }
    };
    log_simpson_adaptive(&log_f, 0.0, hi, rel_tol)
}

/// Leading Watson term for `integral_0^inf q(x) exp(-t x) dx` when
/// `q(x) ~ a0 x^{(lambda - mu)/mu}` as `x -> 0`:
/// `Gamma(lambda/mu) a0 / t^{lambda/mu}`.
pub fn watson_leading(a0: f64, lambda: f64, mu: f64, t: f64) -> Result<f64, PartitionError> {
    if !(lambda > 0.0) {
        return Err(PartitionError::Domain { name: "lambda", value: lambda, domain: "(0, inf)" });
    }
    if !(mu > 0.0) {
        return Err(PartitionError::Domain { name: "mu", value: mu, domain: "(0, inf)" });
    }
    if !(t > 0.0) {
        return Err(PartitionError::BadHorizon(t));
    }
    let r = lambda / mu;
    Ok(gamma(r) * a0 * (-r * t.ln()).exp())
}

/// Leading Laplace term for `integral f(x) exp(-t h(x)) dx` around an
/// interior minimum `x0`: `f(x0) sqrt(2 pi / (t h''(x0))) exp(-t h(x0))`.
pub fn laplace_leading(f_at_x0: f64, h_at_x0: f64, hpp_at_x0: f64, t: f64) -> Result<f64, PartitionError> {
    if !(hpp_at_x0 > 0.0) {
        return Err(PartitionError::Domain { name: "h''(x0)", value: hpp_at_x0, domain: "(0, inf)" });
    }
    if f_at_x0 == 0.0 {
        return Err(PartitionError::Domain { name: "f(x0)", value: f_at_x0, domain: "nonzero" });
    }
    if !(t > 0.0) {
        return Err(PartitionError::BadHorizon(t));
    }
    Ok(f_at_x0 * (2.0 * std::f64::consts::PI / (t * hpp_at_x0)).sqrt() * (-t * h_at_x0).exp())
}

/// Log-domain Laplace leading term, for ballistic cases where the value
/// itself overflows.
pub fn log_laplace_leading(f_at_x0: f64, h_at_x0: f64, hpp_at_x0: f64, t: f64) -> Result<f64, PartitionError> {
    if !(hpp_at_x0 > 0.0) {
        return Err(PartitionError::Domain { name: "h''(x0)", value: hpp_at_x0, domain: "(0, inf)" });
    }
    if !(f_at_x0 > 0.0) {
        return Err(PartitionError::Domain { name: "f(x0)", value: f_at_x0, domain: "(0, inf) for the log form" });
    }
    if !(t > 0.0) {
        return Err(PartitionError::BadHorizon(t));
    }
    Ok(f_at_x0.ln() + 0.5 * ((2.0 * std::f64::consts::PI).ln() - t.ln() - hpp_at_x0.ln()) - t * h_at_x0)
}

/// Convenience: `ln Gamma` re-export for asymptotics callers.
pub fn log_gamma(x: f64) -> f64 {
    ln_gamma(x)
}

/// Log of the full trivariate-weighted integrand, exposed for diagnostics.
pub fn log_weighted_trivariate(nu: f64, h: f64, t: f64, x: f64, y: f64, u: f64) -> f64 {
    let rt = t.sqrt();
    rt * ((nu + h) * x - h * y) + log_trivariate_pdf(x, y, u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::simpson_adaptive;
    use approx::assert_relative_eq;
    use rand::Rng;

    #[test]
    fn classify_named_points() {
        assert_eq!(classify(-1.0, 0.0).unwrap(), PhaseRegion::L1);
        assert_eq!(classify(-1.0, 1.0).unwrap(), PhaseRegion::L2);
        assert_eq!(classify(2.0, -1.0).unwrap(), PhaseRegion::L3);
        assert_eq!(classify(-2.0, 1.0).unwrap(), PhaseRegion::R1);
        assert_eq!(classify(1.0, 1.0).unwrap(), PhaseRegion::R2);
        assert_eq!(classify(-1.0, -1.0).unwrap(), PhaseRegion::R3);
        assert_eq!(classify(1.0, -2.0).unwrap(), PhaseRegion::R3);
        assert_eq!(classify(1.0, 0.0).unwrap(), PhaseRegion::R2);
        assert!(matches!(classify(0.0, 0.0), Err(PartitionError::Origin)));
    }

    #[test]
    fn alpha_by_phase() {
        assert_eq!(PhaseRegion::L1.alpha(), 0.5);
        assert_eq!(PhaseRegion::R1.alpha(), 0.5);
        assert_eq!(PhaseRegion::L2.alpha(), 0.5);
        assert_eq!(PhaseRegion::R2.alpha(), 1.0);
        assert_eq!(PhaseRegion::L3.alpha(), 1.0);
        assert_eq!(PhaseRegion::R3.alpha(), 1.0);
    }

    #[test]
    fn dual_maps_lines_and_sectors() {
        assert_eq!(dual(-1.0, 0.0), (-1.0, 1.0));
        assert_eq!(classify(-1.0, 1.0).unwrap(), PhaseRegion::L2);
        let (n2, h2) = dual(1.0, 1.0);
        assert_eq!((n2, h2), (1.0, -2.0));
        assert_eq!(classify(n2, h2).unwrap(), PhaseRegion::R3);
        let (n3, h3) = dual(n2, h2);
        assert_eq!((n3, h3), (1.0, 1.0));
    }

    #[test]
    fn dual_cloud_properties() {
        let mut rng = crate::rng::RngStream::new(99).rng();
        for _ in 0..2000 {
            let nu: f64 = rng.gen_range(-3.0..3.0);
            let h: f64 = rng.gen_range(-3.0..3.0);
            if nu == 0.0 && h == 0.0 {
                continue;
            }
            let (dn, dh) = dual(nu, h);
            assert_eq!(dual(dn, dh), (nu, h));
            let r = classify(nu, h).unwrap();
            let rd = classify(dn, dh).unwrap();
            match r {
                PhaseRegion::L1 => assert_eq!(rd, PhaseRegion::L2),
                PhaseRegion::L2 => assert_eq!(rd, PhaseRegion::L1),
                PhaseRegion::R2 => assert_eq!(rd, PhaseRegion::R3),
                PhaseRegion::R3 => assert_eq!(rd, PhaseRegion::R2),
                PhaseRegion::R1 => assert_eq!(rd, PhaseRegion::R1),
                PhaseRegion::L3 => {
                    assert_eq!(rd, PhaseRegion::L3);
                    assert_relative_eq!(dh, h, max_relative = 1e-12);
                }
            }
        }
    }

    #[test]
    fn asymptotics_match_the_quoted_forms() {
        let t = 7.0;
        assert_relative_eq!(
            asymptotic_partition(-1.0, 0.0, t).unwrap(),
            (2.0 / (std::f64::consts::PI * t)).sqrt().ln(),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            asymptotic_partition(-1.0, -1.0, t).unwrap(),
            0.5 * t + (2.0f64 / 3.0).ln(),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            asymptotic_partition(2.0, -1.0, t).unwrap(),
            0.5 * t + (2.0 * t).ln(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn exact_partition_trivial_and_gaussian_cases() {
        let spec = QuadSpec::default();
        // nu = h = 0: the weight is 1
        let zero = exact_partition(0.0, 0.0, 1.0, &spec).unwrap();
        assert!(zero.abs() < 1e-7, "log = {zero}");
        // nu = 0: plain Gaussian MGF, E exp(h X_t) = exp(h^2 t / 2)
        let v = exact_partition(0.0, 1.0, 4.0, &spec).unwrap();
        assert_relative_eq!(v, 2.0, epsilon = 1e-6);
    }

    #[test]
    fn exact_partition_is_duality_invariant() {
        let spec = QuadSpec::default();
        for &(nu, h, t) in &[(-1.0, 0.0, 5.0), (1.0, 1.0, 3.0), (-1.5, 0.7, 8.0)] {
            let (dn, dh) = dual(nu, h);
            let a = exact_partition(nu, h, t, &spec).unwrap();
            let b = exact_partition(dn, dh, t, &spec).unwrap();
            assert_relative_eq!(a, b, epsilon = 1e-6);
        }
    }

    #[test]
    fn exact_approaches_asymptotic_for_l1() {
        let spec = QuadSpec::default();
        let t = 40.0;
        let le = exact_partition(-1.0, 0.0, t, &spec).unwrap();
        let la = asymptotic_partition(-1.0, 0.0, t).unwrap();
        // value ratio 1 - 1/table at this horizon
        assert!((le - la).exp() > 0.95 && (le - la).exp() < 1.0, "ratio {}", (le - la).exp());
    }

    #[test]
    fn watson_examples() {
        // Gamma(1) = 1: a0 / t
        assert_relative_eq!(watson_leading(1.0, 1.0, 1.0, 10.0).unwrap(), 0.1, max_relative = 1e-12);
        // the diffusive-phase integrand: a0 = sqrt(2/pi), applied at -nu sqrt(t)
        let nu = -1.3f64;
        let t = 9.0f64;
        let w = watson_leading((2.0 / std::f64::consts::PI).sqrt(), 1.0, 1.0, -nu * t.sqrt()).unwrap();
        assert_relative_eq!(w, -(1.0 / nu) * (2.0 / (std::f64::consts::PI * t)).sqrt(), max_relative = 1e-12);
        // quadrature oracle: integral of exp(-t x) = 1/t
        let t = 1_000.0;
        let numeric = simpson_adaptive(&|x: f64| (-t * x).exp(), 0.0, 60.0 / t, 1e-13).unwrap();
        let ratio = numeric / watson_leading(1.0, 1.0, 1.0, t).unwrap();
        assert!((ratio - 1.0).abs() < 1e-3, "ratio {ratio}");
        assert!(watson_leading(1.0, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn laplace_examples() {
        // f = 1, h(x0) = 0, h'' = 1 -> sqrt(2 pi / t)
        let t = 5.0;
        assert_relative_eq!(
            laplace_leading(1.0, 0.0, 1.0, t).unwrap(),
            (2.0 * std::f64::consts::PI / t).sqrt(),
            max_relative = 1e-12
        );
        // ballistic-line integrand sqrt(2/pi) t^{3/2} int y^2 e^{-(h y + y^2/2) t} dy
        // with h = -1: minimum at y0 = 1, h(y0) = -1/2, h'' = 1, f(y0) = 1
        let t = 21.0;
        let log_lead = log_laplace_leading(1.0, -0.5, 1.0, t).unwrap();
        let log_total = 0.5 * (2.0 / std::f64::consts::PI).ln() + 1.5 * t.ln() + log_lead;
        assert_relative_eq!(log_total, (2.0 * t).ln() + 0.5 * t, max_relative = 1e-12);
        // quadrature oracle at large t: int exp(-t (x-1)^2) dx
        let t = 1_000.0;
        let numeric = simpson_adaptive(&|x: f64| (-t * (x - 1.0) * (x - 1.0)).exp(), 0.0, 2.0, 1e-13).unwrap();
        let ratio = numeric / laplace_leading(1.0, 0.0, 2.0, t).unwrap();
        assert!((ratio - 1.0).abs() < 1e-3, "ratio {ratio}");
        assert!(laplace_leading(1.0, 0.0, -1.0, 1.0).is_err());
        assert!(laplace_leading(0.0, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn penalty_params_guard_origin_and_horizon() {
        assert!(PenaltyParams::new(0.0, 0.0, 1.0).is_err());
        assert!(PenaltyParams::new(1.0, 0.0, 0.0).is_err());
        let p = PenaltyParams::new(-1.0, 0.0, 2.0).unwrap();
        assert_eq!(p.region().unwrap(), PhaseRegion::L1);
    }
}
