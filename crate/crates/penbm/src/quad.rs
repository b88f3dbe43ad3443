//! Adaptive quadrature and interpolation utilities.
//!
//! Two adaptive Simpson integrators: a plain one for density normalization
//! and CDF tabulation, and a log-domain one (integrand supplied as its log,
//! cells combined with log-sum-exp) for partition functions that grow like
//! `exp(c t)`. Both use the classic Richardson error estimate with a
//! 15-factor acceptance rule. Also holds the monotone cubic (Fritsch–
//! Carlson) interpolant backing tabulated CDFs.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum QuadError {
    #[error("quadrature did not converge: achieved tolerance {achieved:e}, requested {requested:e}")]
    NonConvergence { achieved: f64, requested: f64 },
    #[error("invalid integration bounds [{0}, {1}]")]
    BadBounds(f64, f64),
}

/// log(exp(a) + exp(b)) without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// log(sum_i exp(x_i)) without overflow.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = xs.iter().map(|x| (x - hi).exp()).sum();
    hi + sum.ln()
}

const MAX_DEPTH: u32 = 40;

/// Adaptive Simpson integral of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn simpson_adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64, QuadError> {
    if !(a < b) {
        if a == b {
            return Ok(0.0);
        }
        return Err(QuadError::BadBounds(a, b));
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut worst = 0.0f64;
    let v = simpson_step(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH, &mut worst);
    if worst > tol {
        return Err(QuadError::NonConvergence { achieved: worst, requested: tol });
    }
    Ok(v)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    worst: &mut f64,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let err = left + right - whole;
    if err.abs() <= 15.0 * tol || depth == 0 {
        if depth == 0 {
            *worst = worst.max(err.abs() / 15.0);
        }
        return left + right + err / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, worst)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, worst)
}

/// Adaptive Simpson for a nonnegative integrand given as its log.
///
/// Returns the log of the integral. `rel_tol` is a relative tolerance on the
/// integral value, which for a nonnegative integrand bounds the relative
/// error of the total without any tolerance splitting across cells.
pub fn log_simpson_adaptive<F: Fn(f64) -> f64>(log_f: &F, a: f64, b: f64, rel_tol: f64) -> Result<f64, QuadError> {
    if !(a < b) {
        if a == b {
            return Ok(f64::NEG_INFINITY);
        }
        return Err(QuadError::BadBounds(a, b));
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (log_f(a), log_f(m), log_f(b));
    let whole = log_simpson_cell(a, b, fa, fm, fb);
    let mut worst = 0.0f64;
    let v = log_simpson_step(log_f, a, b, fa, fm, fb, whole, rel_tol, MAX_DEPTH, &mut worst);
    if worst > rel_tol {
        return Err(QuadError::NonConvergence { achieved: worst, requested: rel_tol });
    }
    Ok(v)
}

/// log of the Simpson estimate over one cell, from log integrand values.
fn log_simpson_cell(a: f64, b: f64, lfa: f64, lfm: f64, lfb: f64) -> f64 {
    ((b - a) / 6.0).ln() + log_sum_exp(&[lfa, lfm + 4.0f64.ln(), lfb])
}

#[allow(clippy::too_many_arguments)]
fn log_simpson_step<F: Fn(f64) -> f64>(
    log_f: &F,
    a: f64,
    b: f64,
    lfa: f64,
    lfm: f64,
    lfb: f64,
    log_whole: f64,
    rel_tol: f64,
    depth: u32,
    worst: &mut f64,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (log_f(lm), log_f(rm));
    let left = log_simpson_cell(a, m, lfa, flm, lfm);
    let right = log_simpson_cell(m, b, lfm, frm, lfb);
    let refined = log_add_exp(left, right);
    // Relative discrepancy between the refined and coarse estimates.
    let rel_err = if refined == f64::NEG_INFINITY && log_whole == f64::NEG_INFINITY {
        0.0
    } else {
        ((log_whole - refined).exp() - 1.0).abs()
    };
    if rel_err <= 15.0 * rel_tol || depth == 0 {
        if depth == 0 {
            *worst = worst.max(rel_err / 15.0);
        }
        return refined;
    }
    let l = log_simpson_step(log_f, a, m, lfa, flm, lfm, left, rel_tol, depth - 1, worst);
    let r = log_simpson_step(log_f, m, b, lfm, frm, lfb, right, rel_tol, depth - 1, worst);
    log_add_exp(l, r)
}

/// Monotone piecewise-cubic interpolant (Fritsch–Carlson), used for
/// tabulated CDFs where no closed form exists.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    /// Build from strictly increasing nodes and nondecreasing values.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        assert!(xs.len() == ys.len() && xs.len() >= 2, "need at least two nodes");
        let n = xs.len();
        let mut d = vec![0.0; n - 1];
        for i in 0..n - 1 {
            let h = xs[i + 1] - xs[i];
            assert!(h > 0.0, "nodes must be strictly increasing");
            d[i] = (ys[i + 1] - ys[i]) / h;
        }
        let mut slopes = vec![0.0; n];
        slopes[0] = d[0];
        slopes[n - 1] = d[n - 2];
        for i in 1..n - 1 {
            slopes[i] = if d[i - 1] * d[i] <= 0.0 { 0.0 } else { 0.5 * (d[i - 1] + d[i]) };
        }
        // Fritsch–Carlson limiter keeps the interpolant monotone.
        for i in 0..n - 1 {
            if d[i] == 0.0 {
                slopes[i] = 0.0;
                slopes[i + 1] = 0.0;
            } else {
                let alpha = slopes[i] / d[i];
                let beta = slopes[i + 1] / d[i];
                let s = alpha * alpha + beta * beta;
                if s > 9.0 {
                    let tau = 3.0 / s.sqrt();
                    slopes[i] = tau * alpha * d[i];
                    slopes[i + 1] = tau * beta * d[i];
                }
            }
        }
        MonotoneCubic { xs, ys, slopes }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let i = match self.xs.partition_point(|&v| v <= x) {
            0 => 0,
            k => k - 1,
        };
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * m1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn simpson_integrates_polynomials_exactly() {
        let f = |x: f64| 3.0 * x * x;
        assert_relative_eq!(simpson_adaptive(&f, 0.0, 2.0, 1e-12).unwrap(), 8.0, epsilon = 1e-10);
    }

    #[test]
    fn simpson_handles_oscillation() {
        let f = |x: f64| (10.0 * x).sin();
        let exact = (1.0 - (10.0f64).cos()) / 10.0;
        assert_relative_eq!(simpson_adaptive(&f, 0.0, 1.0, 1e-12).unwrap(), exact, epsilon = 1e-10);
    }

    #[test]
    fn log_simpson_matches_plain_on_gaussian() {
        let log_f = |x: f64| -0.5 * x * x;
        let v = log_simpson_adaptive(&log_f, -12.0, 12.0, 1e-10).unwrap();
        assert_relative_eq!(v, 0.5 * (2.0 * std::f64::consts::PI).ln(), epsilon = 1e-9);
    }

    #[test]
    fn log_simpson_is_overflow_proof() {
        // integral of exp(200 + x) over [0,1] = exp(200) (e - 1)
        let log_f = |x: f64| 200.0 + x;
        let v = log_simpson_adaptive(&log_f, 0.0, 1.0, 1e-10).unwrap();
        assert_relative_eq!(v, 200.0 + (std::f64::consts::E - 1.0).ln(), epsilon = 1e-9);
    }

    #[test]
    fn log_sum_exp_basics() {
        assert_relative_eq!(log_sum_exp(&[0.0, 0.0]), 2.0f64.ln(), epsilon = 1e-14);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY]), f64::NEG_INFINITY);
        assert_relative_eq!(log_add_exp(1000.0, 1000.0), 1000.0 + 2.0f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn monotone_cubic_preserves_monotonicity() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64 / 19.0).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| x * x * (3.0 - 2.0 * x)).collect();
        let interp = MonotoneCubic::new(xs, ys);
        let mut prev = -1.0;
        for i in 0..=1000 {
            let v = interp.eval(i as f64 / 1000.0);
            assert!(v >= prev - 1e-12);
            prev = v;
        }
        assert_relative_eq!(interp.eval(0.5), 0.5, epsilon = 1e-3);
    }
}
