//! Closed-form densities and distribution functions used as test references.
//!
//! Everything the verification harness compares samples against lives here:
//! Bessel(3) transition densities (from the origin and from `x > 0`), the
//! meander endpoint (Rayleigh) and co-meander endpoint (half-normal) laws,
//! the arcsine law of the argmax, the joint density of
//! `(S_1, S_1 - X_1, Theta_1)`, the Brownian-bridge maximum law, and the
//! exponential law of the all-time maximum under negative drift.
//!
//! A [`DensityFn`] bundles a pdf with a CDF; when no closed form exists the
//! CDF is tabulated once by adaptive Simpson and interpolated monotonically.

use std::f64::consts::PI;

use thiserror::Error;

use crate::quad::{simpson_adaptive, MonotoneCubic};
use crate::special::normal_cdf;

#[derive(Debug, Error)]
pub enum DensityError {
    #[error("parameter {name} = {value} outside its domain {domain}")]
    Domain { name: &'static str, value: f64, domain: &'static str },
    #[error("tabulated cdf failed to normalize: reached {0}, expected 1 within 1e-8")]
    BadNormalization(f64),
}

/// Bessel(3) transition density from the origin at time `t`:
/// `sqrt(2/(pi t^3)) y^2 exp(-y^2/(2t))` for `y >= 0`.
pub fn bessel3_pdf_from_origin(t: f64, y: f64) -> Result<f64, DensityError> {
    if !(t > 0.0) {
        return Err(DensityError::Domain { name: "t", value: t, domain: "(0, inf)" });
    }
    if y < 0.0 {
        return Ok(0.0);
    }
    Ok((2.0 / (PI * t * t * t)).sqrt() * y * y * (-y * y / (2.0 * t)).exp())
}

/// Bessel(3) transition density from `x > 0` at time `t`:
/// `sqrt(2/(pi t)) (y/x) sinh(xy/t) exp(-(x^2+y^2)/(2t))` for `y >= 0`.
pub fn bessel3_pdf(x: f64, t: f64, y: f64) -> Result<f64, DensityError> {
    if !(x > 0.0) {
        return Err(DensityError::Domain { name: "x", value: x, domain: "(0, inf); use the origin form at x = 0" });
    }
    if !(t > 0.0) {
        return Err(DensityError::Domain { name: "t", value: t, domain: "(0, inf)" });
    }
    if y < 0.0 {
        return Ok(0.0);
    }
    // sinh written through exp differences keeps this stable for large xy/t.
    let a = (y - x) * (y - x) / (2.0 * t);
    let b = (y + x) * (y + x) / (2.0 * t);
    Ok((2.0 / (PI * t)).sqrt() * (y / x) * 0.5 * ((-a).exp() - (-b).exp()))
}

/// Meander endpoint density `y exp(-y^2/2)` (Rayleigh) for `y >= 0`.
pub fn meander_endpoint_pdf(y: f64) -> f64 {
    if y < 0.0 {
        0.0
    } else {
        y * (-0.5 * y * y).exp()
    }
}

/// Arcsine density `1/(pi sqrt(u(1-u)))` of the argmax time on `(0, 1)`.
pub fn arcsine_pdf(u: f64) -> Result<f64, DensityError> {
    if !(u > 0.0 && u < 1.0) {
        return Err(DensityError::Domain { name: "u", value: u, domain: "(0, 1)" });
    }
    Ok(1.0 / (PI * (u * (1.0 - u)).sqrt()))
}

/// Joint density of `(S_1, S_1 - X_1, Theta_1)` at `(x, y, u)`:
/// `xy / (pi sqrt(u^3 (1-u)^3)) exp(-x^2/(2u) - y^2/(2(1-u)))`.
pub fn trivariate_pdf(x: f64, y: f64, u: f64) -> Result<f64, DensityError> {
    if x < 0.0 {
        return Err(DensityError::Domain { name: "x", value: x, domain: "[0, inf)" });
    }
    if y < 0.0 {
        return Err(DensityError::Domain { name: "y", value: y, domain: "[0, inf)" });
    }
    if !(u > 0.0 && u < 1.0) {
        return Err(DensityError::Domain { name: "u", value: u, domain: "(0, 1)" });
    }
    Ok(log_trivariate_pdf(x, y, u).exp())
}

/// Log of [`trivariate_pdf`], without domain checks on `x, y` beyond sign.
pub fn log_trivariate_pdf(x: f64, y: f64, u: f64) -> f64 {
    if x <= 0.0 || y <= 0.0 {
        return f64::NEG_INFINITY;
    }
    x.ln() + y.ln() - PI.ln() - 1.5 * (u.ln() + (1.0 - u).ln()) - x * x / (2.0 * u) - y * y / (2.0 * (1.0 - u))
}

/// Tail probability of the maximum of a Brownian bridge of length `T` from
/// `0` to `a`: `P(max >= b) = exp(-2b(b-a)/T)` for `b >= max(0, a)`.
pub fn bridge_max_ccdf(b: f64, a: f64, t: f64) -> Result<f64, DensityError> {
    if !(t > 0.0) {
        return Err(DensityError::Domain { name: "T", value: t, domain: "(0, inf)" });
    }
    if b < a.max(0.0) {
        return Err(DensityError::Domain { name: "b", value: b, domain: "[max(0, a), inf)" });
    }
    Ok((-2.0 * b * (b - a) / t).exp())
}

/// CDF of the all-time maximum of Brownian motion with drift `h < 0`:
/// Exponential with rate `-2h`, i.e. `1 - exp(2hx)`.
pub fn s_infty_cdf(h: f64, x: f64) -> Result<f64, DensityError> {
    if !(h < 0.0) {
        return Err(DensityError::Domain { name: "h", value: h, domain: "(-inf, 0); the maximum is infinite otherwise" });
    }
    if x < 0.0 {
        return Ok(0.0);
    }
    Ok(-(2.0 * h * x).exp_m1())
}

enum Cdf {
    Closed(Box<dyn Fn(f64) -> f64 + Send + Sync>),
    Table(MonotoneCubic),
}

/// A probability density with an evaluatable CDF on a support interval.
pub struct DensityFn {
    pdf: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    cdf: Cdf,
    support: (f64, f64),
}

impl DensityFn {
    fn closed(
        pdf: impl Fn(f64) -> f64 + Send + Sync + 'static,
        cdf: impl Fn(f64) -> f64 + Send + Sync + 'static,
        support: (f64, f64),
    ) -> Self {
        DensityFn { pdf: Box::new(pdf), cdf: Cdf::Closed(Box::new(cdf)), support }
    }

    /// Build a density with a CDF tabulated by adaptive Simpson on
    /// `[support.0, support.1]` (finite bounds chosen by the caller so the
    /// truncated mass is below the tabulation tolerance).
    pub fn from_pdf(pdf: impl Fn(f64) -> f64 + Send + Sync + 'static, support: (f64, f64)) -> Result<Self, DensityError> {
        const NODES: usize = 1025;
        let (lo, hi) = support;
        let mut xs = Vec::with_capacity(NODES);
        let mut ys = Vec::with_capacity(NODES);
        let mut acc = 0.0;
        xs.push(lo);
        ys.push(0.0);
        for i in 1..NODES {
            let a = lo + (hi - lo) * (i - 1) as f64 / (NODES - 1) as f64;
            let b = lo + (hi - lo) * i as f64 / (NODES - 1) as f64;
            acc += simpson_adaptive(&pdf, a, b, 1e-12).map_err(|_| DensityError::BadNormalization(acc))?;
            xs.push(b);
            ys.push(acc.min(1.0));
        }
        if (acc - 1.0).abs() > 1e-8 {
            return Err(DensityError::BadNormalization(acc));
        }
        Ok(DensityFn { pdf: Box::new(pdf), cdf: Cdf::Table(MonotoneCubic::new(xs, ys)), support })
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x < self.support.0 || x > self.support.1 {
            0.0
        } else {
            (self.pdf)(x)
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.support.0 {
            return 0.0;
        }
        if x >= self.support.1 {
            return 1.0;
        }
        match &self.cdf {
            Cdf::Closed(f) => f(x),
            Cdf::Table(t) => t.eval(x),
        }
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    /// The law of `-Y` when this is the law of a continuous `Y`.
    pub fn negated(self) -> DensityFn {
        let (lo, hi) = self.support;
        let pdf = self.pdf;
        let cdf_inner = self.cdf;
        let cdf = move |x: f64| {
            1.0 - match &cdf_inner {
                Cdf::Closed(f) => f(-x),
                Cdf::Table(t) => t.eval(-x),
            }
        };
        DensityFn { pdf: Box::new(move |x| pdf(-x)), cdf: Cdf::Closed(Box::new(cdf)), support: (-hi, -lo) }
    }

    /// Bessel(3) endpoint law started from the origin, horizon `t`.
    pub fn bessel3_from_origin(t: f64) -> Result<Self, DensityError> {
        if !(t > 0.0) {
            return Err(DensityError::Domain { name: "t", value: t, domain: "(0, inf)" });
        }
        let rt = t.sqrt();
        Ok(Self::closed(
            move |y| bessel3_pdf_from_origin(t, y).unwrap_or(0.0),
            move |y| 2.0 * normal_cdf(y / rt) - 1.0 - (2.0 / (PI * t)).sqrt() * y * (-y * y / (2.0 * t)).exp(),
            (0.0, f64::INFINITY),
        ))
    }

    /// Bessel(3) endpoint law started from `x > 0`, horizon `t`.
    pub fn bessel3_from(x: f64, t: f64) -> Result<Self, DensityError> {
        if !(x > 0.0) {
            return Err(DensityError::Domain { name: "x", value: x, domain: "(0, inf)" });
        }
        if !(t > 0.0) {
            return Err(DensityError::Domain { name: "t", value: t, domain: "(0, inf)" });
        }
        let rt = t.sqrt();
        let phi_t = move |u: f64| (-u * u / (2.0 * t)).exp() / (2.0 * PI * t).sqrt();
        Ok(Self::closed(
            move |y| bessel3_pdf(x, t, y).unwrap_or(0.0),
            move |y| normal_cdf((y - x) / rt) + normal_cdf((y + x) / rt) - 1.0 + t / x * (phi_t(y + x) - phi_t(y - x)),
            (0.0, f64::INFINITY),
        ))
    }

    /// Rayleigh law of the meander endpoint.
    pub fn meander_endpoint() -> Self {
        Self::closed(meander_endpoint_pdf, |y| -(-0.5 * y * y).exp_m1(), (0.0, f64::INFINITY))
    }

    /// Half-normal law of the co-meander endpoint.
    pub fn co_meander_endpoint() -> Self {
        Self::closed(
            |y| if y < 0.0 { 0.0 } else { (2.0 / PI).sqrt() * (-0.5 * y * y).exp() },
            |y| crate::special::erf(y / std::f64::consts::SQRT_2),
            (0.0, f64::INFINITY),
        )
    }

    /// Arcsine law of the argmax time.
    pub fn arcsine() -> Self {
        Self::closed(
            |u| arcsine_pdf(u).unwrap_or(0.0),
            |u| 2.0 / PI * u.sqrt().asin(),
            (0.0, 1.0),
        )
    }

    /// Exponential law with the given rate.
    pub fn exponential(rate: f64) -> Result<Self, DensityError> {
        if !(rate > 0.0) {
            return Err(DensityError::Domain { name: "rate", value: rate, domain: "(0, inf)" });
        }
        Ok(Self::closed(
            move |x| if x < 0.0 { 0.0 } else { rate * (-rate * x).exp() },
            move |x| -(-rate * x).exp_m1(),
            (0.0, f64::INFINITY),
        ))
    }

    /// Law of the maximum of a Brownian bridge of length `T` from 0 to `a`.
    pub fn bridge_max(a: f64, t: f64) -> Result<Self, DensityError> {
        if !(t > 0.0) {
            return Err(DensityError::Domain { name: "T", value: t, domain: "(0, inf)" });
        }
        let lo = a.max(0.0);
        Ok(Self::closed(
            move |b| {
                if b < lo {
                    0.0
                } else {
                    (2.0 * (2.0 * b - a) / t) * (-2.0 * b * (b - a) / t).exp()
                }
            },
            move |b| 1.0 - (-2.0 * b * (b - a) / t).exp(),
            (lo, f64::INFINITY),
        ))
    }

    /// Standard normal law.
    pub fn std_normal() -> Self {
        Self::closed(crate::special::normal_pdf, normal_cdf, (f64::NEG_INFINITY, f64::INFINITY))
    }

    /// Uniform law on `[a, b]`.
    pub fn uniform(a: f64, b: f64) -> Result<Self, DensityError> {
        if !(b > a) {
            return Err(DensityError::Domain { name: "b", value: b, domain: "(a, inf)" });
        }
        let w = b - a;
        Ok(Self::closed(move |x| if x < a || x > b { 0.0 } else { 1.0 / w }, move |x| (x - a) / w, (a, b)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::simpson_adaptive;
    use approx::assert_relative_eq;

    #[test]
    fn bessel3_origin_plugin_values() {
        assert_eq!(bessel3_pdf_from_origin(1.0, 0.0).unwrap(), 0.0);
        assert_relative_eq!(
            bessel3_pdf_from_origin(1.0, 1.0).unwrap(),
            (2.0 / PI).sqrt() * (-0.5f64).exp(),
            max_relative = 1e-12
        );
        // quoted plug-in value
        assert_relative_eq!(bessel3_pdf_from_origin(1.0, 1.0).unwrap(), 0.48394, max_relative = 1e-4);
        assert!(bessel3_pdf_from_origin(0.0, 1.0).is_err());
    }

    #[test]
    fn bessel3_from_x_plugin_and_origin_limit() {
        assert_relative_eq!(
            bessel3_pdf(1.0, 1.0, 1.0).unwrap(),
            (2.0 / PI).sqrt() * 1.0f64.sinh() * (-1.0f64).exp(),
            max_relative = 1e-12
        );
        assert_relative_eq!(bessel3_pdf(1.0, 1.0, 1.0).unwrap(), 0.34500, max_relative = 1e-4);
        // sinh(z) ~ z: the x -> 0 limit recovers the origin form
        let x = 1e-4;
        for y in [0.3, 1.0, 2.5] {
            assert_relative_eq!(
                bessel3_pdf(x, 1.0, y).unwrap(),
                bessel3_pdf_from_origin(1.0, y).unwrap(),
                max_relative = 1e-6
            );
        }
        assert!(bessel3_pdf(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn meander_endpoint_plugin() {
        assert_relative_eq!(meander_endpoint_pdf(1.0), (-0.5f64).exp(), max_relative = 1e-12);
        assert_relative_eq!(meander_endpoint_pdf(1.0), 0.60653, max_relative = 1e-4);
        assert_eq!(meander_endpoint_pdf(0.0), 0.0);
        // closed-form integral: 1 - exp(-B^2/2) -> 1
        assert_relative_eq!(DensityFn::meander_endpoint().cdf(40.0), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn arcsine_plugin_symmetry() {
        assert_relative_eq!(arcsine_pdf(0.5).unwrap(), 2.0 / PI, max_relative = 1e-12);
        assert_relative_eq!(arcsine_pdf(0.5).unwrap(), 0.63662, max_relative = 1e-4);
        for u in [0.1, 0.25, 0.4] {
            assert_relative_eq!(arcsine_pdf(u).unwrap(), arcsine_pdf(1.0 - u).unwrap(), max_relative = 1e-12);
        }
        assert!(arcsine_pdf(0.0).is_err());
    }

    #[test]
    fn trivariate_boundaries() {
        assert_eq!(trivariate_pdf(0.0, 1.0, 0.5).unwrap(), 0.0);
        assert_eq!(trivariate_pdf(1.0, 0.0, 0.5).unwrap(), 0.0);
        assert!(trivariate_pdf(1.0, 1.0, 0.0).is_err());
        assert!(trivariate_pdf(-1.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn bridge_max_plugin_and_monotonicity() {
        assert_relative_eq!(bridge_max_ccdf(1.0, 0.0, 1.0).unwrap(), (-2.0f64).exp(), max_relative = 1e-12);
        assert_relative_eq!(bridge_max_ccdf(1.0, 0.0, 1.0).unwrap(), 0.13534, max_relative = 1e-4);
        assert_relative_eq!(bridge_max_ccdf(0.0, -0.5, 1.0).unwrap(), 1.0, epsilon = 1e-15);
        let mut prev = f64::INFINITY;
        for i in 0..50 {
            let b = i as f64 * 0.1;
            let v = bridge_max_ccdf(b, 0.0, 1.0).unwrap();
            assert!(v <= prev);
            prev = v;
        }
        assert!(bridge_max_ccdf(-0.1, 0.0, 1.0).is_err());
    }

    #[test]
    fn s_infty_cdf_values() {
        assert_eq!(s_infty_cdf(-1.0, 0.0).unwrap(), 0.0);
        assert_relative_eq!(s_infty_cdf(-1.0, 0.5 * 2.0f64.ln()).unwrap(), 0.5, max_relative = 1e-12);
        assert!(s_infty_cdf(0.0, 1.0).is_err());
        assert!(s_infty_cdf(0.5, 1.0).is_err());
    }

    #[test]
    fn closed_form_cdfs_match_quadrature_of_pdfs() {
        let cases: Vec<(DensityFn, f64)> = vec![
            (DensityFn::bessel3_from_origin(1.0).unwrap(), 1.3),
            (DensityFn::bessel3_from(1.0, 1.0).unwrap(), 2.0),
            (DensityFn::meander_endpoint(), 0.9),
            (DensityFn::co_meander_endpoint(), 0.7),
            (DensityFn::exponential(2.0).unwrap(), 0.4),
            (DensityFn::bridge_max(0.5, 1.0).unwrap(), 1.1),
            (DensityFn::std_normal(), 0.3),
        ];
        for (d, x) in cases {
            let lo = d.support().0.max(-20.0);
            let numeric = simpson_adaptive(&|u| d.pdf(u), lo, x, 1e-11).unwrap();
            assert_relative_eq!(d.cdf(x), numeric, epsilon = 1e-8);
        }
        let arc = DensityFn::arcsine();
        let numeric = simpson_adaptive(&|u| arc.pdf(u), 1e-12, 0.7, 1e-10).unwrap();
        assert_relative_eq!(arc.cdf(0.7), numeric, epsilon = 1e-5);
    }

    #[test]
    fn all_reference_densities_normalize_to_one() {
        // adaptive quadrature as the independent normalization oracle
        let one_d: Vec<(Box<dyn Fn(f64) -> f64>, f64, f64)> = vec![
            (Box::new(|y| bessel3_pdf_from_origin(1.0, y).unwrap()), 0.0, 12.0),
            (Box::new(|y| bessel3_pdf(1.0, 1.0, y).unwrap()), 0.0, 14.0),
            (Box::new(meander_endpoint_pdf), 0.0, 12.0),
            (Box::new(|u| arcsine_pdf(u).unwrap()), 1e-9, 1.0 - 1e-9),
            (Box::new(|b| DensityFn::bridge_max(-0.3, 1.0).unwrap().pdf(b)), 0.0, 12.0),
            (Box::new(|x| 2.0 * (-2.0 * x).exp()), 0.0, 20.0),
        ];
        for (pdf, lo, hi) in one_d {
            let total = simpson_adaptive(&pdf, lo, hi, 1e-10).unwrap();
            assert_relative_eq!(total, 1.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn trivariate_normalizes_and_marginalizes_to_arcsine() {
        // integrate x and y: inner integrals are Gaussian-tail pieces done by quadrature
        let marginal = |u: f64| {
            let inner_x = simpson_adaptive(&|x: f64| x * (-x * x / (2.0 * u)).exp(), 0.0, 10.0, 1e-12).unwrap();
            let inner_y = simpson_adaptive(&|y: f64| y * (-y * y / (2.0 * (1.0 - u))).exp(), 0.0, 10.0, 1e-12).unwrap();
            inner_x * inner_y / (PI * (u * (1.0 - u)).powf(1.5))
        };
        for u in [0.2, 0.5, 0.8] {
            assert_relative_eq!(marginal(u), arcsine_pdf(u).unwrap(), epsilon = 1e-6);
        }
        // 3d normalization via the arcsine marginal, endpoint singularity
        // handled by the u = sin^2(theta) substitution
        let total = simpson_adaptive(
            &|theta: f64| {
                let u = theta.sin().powi(2);
                let jac = 2.0 * theta.sin() * theta.cos();
                if u <= 0.0 || u >= 1.0 {
                    0.0
                } else {
                    marginal(u) * jac
                }
            },
            0.0,
            PI / 2.0,
            1e-9,
        )
        .unwrap();
        assert_relative_eq!(total, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn tabulated_cdf_matches_closed_form() {
        let table = DensityFn::from_pdf(meander_endpoint_pdf, (0.0, 12.0)).unwrap();
        let exact = DensityFn::meander_endpoint();
        for y in [0.1, 0.5, 1.0, 1.7, 3.0] {
            assert_relative_eq!(table.cdf(y), exact.cdf(y), epsilon = 1e-7);
        }
    }

    #[test]
    fn negated_law_flips_cdf() {
        let neg = DensityFn::meander_endpoint().negated();
        assert_relative_eq!(neg.cdf(-1.0), (-0.5f64).exp(), max_relative = 1e-12);
        assert_eq!(neg.cdf(0.1), 1.0);
        assert_relative_eq!(neg.pdf(-1.0), meander_endpoint_pdf(1.0), max_relative = 1e-12);
    }
}
