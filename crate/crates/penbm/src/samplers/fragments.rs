//! Exact (up to grid resolution) samplers for the Brownian path fragments:
//! Brownian motion with drift, bridges, Bessel(3) processes and bridges,
//! meander, co-meander, excursion, the three ascent constructions and the
//! up-down process.
//!
//! Meander and co-meander are sampled as Bessel(3) bridges mixed over their
//! endpoint laws (Rayleigh and half-normal), which is rejection-free and
//! independent of the argmax-rescaling construction used for cross-checks.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::path::{self, Path};

use super::first_passage::{sample_co_ascent, FirstPassageOpts};
use super::AscentMethod;

#[inline]
pub(crate) fn normal<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Rayleigh draw by inverse CDF: density `y exp(-y^2/2)`.
pub(crate) fn rayleigh<R: Rng>(rng: &mut R) -> f64 {
    let u: f64 = rng.gen();
    (-2.0 * (1.0 - u).ln()).sqrt()
}

/// Exponential draw with the given rate.
pub(crate) fn exponential<R: Rng>(rng: &mut R, rate: f64) -> f64 {
    let u: f64 = rng.gen();
    -(1.0 - u).ln() / rate
}

/// Brownian motion with drift `h` over `[0, t]` on `m` grid cells.
pub fn sample_bm<R: Rng>(rng: &mut R, t: f64, h: f64, m: usize) -> Path {
    let dt = t / m as f64;
    let sd = dt.sqrt();
    let mut values = Vec::with_capacity(m + 1);
    let mut x = 0.0;
    values.push(x);
    for _ in 0..m {
        x += h * dt + sd * normal(rng);
        values.push(x);
    }
    Path::new(t, values).expect("grid construction is valid")
}

/// A drifted Brownian path together with the exact cell maxima.
///
/// Each grid cell's maximum is drawn from the Brownian-bridge maximum law
/// given the cell endpoints (inverse CDF, one extra uniform per cell), so
/// `smax` and the running maximum at grid times carry no discretization
/// bias. Importance weights built from the running maximum use these.
#[derive(Debug, Clone)]
pub struct ScheduleSample {
    pub path: Path,
    /// Exact maximum of the path over each grid cell.
    pub cell_max: Vec<f64>,
    /// Exact running maximum at grid times (index 0 is the start value).
    pub running_max: Vec<f64>,
    /// Exact all-horizon maximum (last entry of `running_max`).
    pub smax: f64,
    /// Midpoint of the earliest cell attaining the maximum.
    pub argmax_time: f64,
}

/// Max of a Brownian bridge over a cell of width `dt` with endpoints `a, b`,
/// drawn by inverse CDF from `P(M >= y) = exp(-2(y-a)(y-b)/dt)`.
#[inline]
fn cell_max_draw<R: Rng>(rng: &mut R, a: f64, b: f64, dt: f64) -> f64 {
    let u: f64 = 1.0 - rng.gen::<f64>(); // in (0, 1]
    0.5 * (a + b + ((b - a) * (b - a) - 2.0 * dt * u.ln()).sqrt())
}

/// Brownian motion under a piecewise-constant drift schedule given in grid
/// units: `segments` lists `(end_cell, drift)` with increasing end cells,
/// the last equal to `m`.
pub fn sample_grid_schedule<R: Rng>(rng: &mut R, t: f64, segments: &[(usize, f64)], m: usize, exact_max: bool) -> ScheduleSample {
    assert!(segments.last().map(|s| s.0) == Some(m), "schedule must end at the last cell");
    let dt = t / m as f64;
    let sd = dt.sqrt();
    let mut values = Vec::with_capacity(m + 1);
    let mut cell_max = Vec::with_capacity(if exact_max { m } else { 0 });
    let mut running_max = Vec::with_capacity(m + 1);
    let mut x = 0.0;
    values.push(x);
    running_max.push(x);
    let mut smax = x;
    let mut best_cell = 0usize;
    let mut seg = 0usize;
    for k in 0..m {
        while k >= segments[seg].0 {
            seg += 1;
        }
        let drift = segments[seg].1;
        let prev = x;
        x += drift * dt + sd * normal(rng);
        values.push(x);
        if exact_max {
            let mx = cell_max_draw(rng, prev, x, dt);
            if mx > smax {
                smax = mx;
                best_cell = k;
            }
            cell_max.push(mx);
        } else if x > smax {
            smax = x;
            best_cell = k;
        }
        running_max.push(smax);
    }
    let argmax_time = if exact_max {
        dt * (best_cell as f64 + 0.5)
    } else {
        dt * (best_cell + 1) as f64
    };
    ScheduleSample {
        path: Path::new(t, values).expect("grid construction is valid"),
        cell_max,
        running_max,
        smax,
        argmax_time,
    }
}

/// Brownian bridge from `a` to `b` over `[0, T]`; endpoints are pinned
/// exactly.
pub fn sample_bridge<R: Rng>(rng: &mut R, a: f64, b: f64, t: f64, m: usize) -> Path {
    let w = sample_bm(rng, t, 0.0, m);
    let wt = w.endpoint();
    let values = w
        .values()
        .iter()
        .enumerate()
        .map(|(k, &ws)| {
            let frac = k as f64 / m as f64;
            a + ws - frac * wt + frac * (b - a)
        })
        .collect();
    Path::new(t, values).expect("grid construction is valid")
}

/// Bessel(3) process started at `x >= 0`: the norm of a 3-dimensional
/// Brownian motion started at `(x, 0, 0)`.
pub fn sample_bessel3<R: Rng>(rng: &mut R, x: f64, t: f64, m: usize) -> Path {
    assert!(x >= 0.0, "bessel3 start must be nonnegative");
    let dt = t / m as f64;
    let sd = dt.sqrt();
    let (mut b1, mut b2, mut b3) = (x, 0.0, 0.0);
    let mut values = Vec::with_capacity(m + 1);
    values.push(x);
    for _ in 0..m {
        b1 += sd * normal(rng);
        b2 += sd * normal(rng);
        b3 += sd * normal(rng);
        values.push((b1 * b1 + b2 * b2 + b3 * b3).sqrt());
    }
    Path::new(t, values).expect("grid construction is valid")
}

/// Bessel(3) bridge from `x` to `y` over `[0, T]`, built from three
/// independent 0-to-0 Brownian bridges around the straight line `x -> y`.
pub fn sample_bessel3_bridge<R: Rng>(rng: &mut R, x: f64, y: f64, t: f64, m: usize) -> Path {
    assert!(x >= 0.0 && y >= 0.0, "bessel3 bridge endpoints must be nonnegative");
    let b1 = sample_bridge(rng, 0.0, 0.0, t, m);
    let b2 = sample_bridge(rng, 0.0, 0.0, t, m);
    let b3 = sample_bridge(rng, 0.0, 0.0, t, m);
    let values = (0..=m)
        .map(|k| {
            let frac = k as f64 / m as f64;
            let line = x + (y - x) * frac;
            let v1 = line + b1.values()[k];
            ((v1 * v1) + b2.values()[k] * b2.values()[k] + b3.values()[k] * b3.values()[k]).sqrt()
        })
        .collect();
    Path::new(t, values).expect("grid construction is valid")
}

/// Brownian meander: Bessel(3) bridge from 0 to a Rayleigh endpoint.
pub fn sample_meander<R: Rng>(rng: &mut R, m: usize) -> Path {
    let rho = rayleigh(rng);
    sample_bessel3_bridge(rng, 0.0, rho, 1.0, m)
}

/// Brownian co-meander: Bessel(3) bridge from 0 to a half-normal endpoint.
pub fn sample_co_meander<R: Rng>(rng: &mut R, m: usize) -> Path {
    let rho = normal(rng).abs();
    sample_bessel3_bridge(rng, 0.0, rho, 1.0, m)
}

/// Normalized Brownian excursion: Bessel(3) bridge from 0 to 0 of length 1.
pub fn sample_excursion<R: Rng>(rng: &mut R, m: usize) -> Path {
    sample_bessel3_bridge(rng, 0.0, 0.0, 1.0, m)
}

/// The up-down process `slope * u^U` with a uniform switch time.
#[derive(Debug, Clone)]
pub struct UpDownSample {
    pub path: Path,
    pub switch_time: f64,
}

pub fn sample_updown<R: Rng>(rng: &mut R, slope: f64, m: usize) -> UpDownSample {
    let u: f64 = rng.gen();
    let tent = path::updown_path(u, m).expect("u is in [0, 1]");
    let values = tent.values().iter().map(|v| slope * v).collect();
    UpDownSample { path: Path::new(1.0, values).expect("grid construction is valid"), switch_time: u }
}

/// One ascent draw; `weight` is 1 except for the reweighted co-ascent
/// construction, whose importance weight is `sqrt(pi/2) / sqrt(tau_1)`.
#[derive(Debug, Clone)]
pub struct AscentSample {
    pub path: Path,
    pub weight: f64,
    pub restarts: u64,
}

/// A path of duration 1 conditioned to end at its maximum, by one of three
/// constructions: the reversed-increment transform of the meander, the
/// rescaled pre-argmax segment of a Brownian path, or a first-passage path
/// with an importance weight.
pub fn sample_ascent<R: Rng>(rng: &mut R, method: AscentMethod, m: usize, fp: &FirstPassageOpts) -> AscentSample {
    match method {
        AscentMethod::FromMeander => {
            let me = sample_meander(rng, m);
            let mv = me.values();
            let last = mv[m];
            let values = (0..=m).map(|k| last - mv[m - k]).collect();
            AscentSample { path: Path::new(1.0, values).expect("grid construction is valid"), weight: 1.0, restarts: 0 }
        }
        AscentMethod::Denisov => {
            // A grid argmax at index 0 leaves no pre-maximum segment to
            // rescale; redraw (the rescaled segment is independent of the
            // argmax, so this does not tilt the law).
            let mut restarts = 0;
            loop {
                let w = sample_bm(rng, 1.0, 0.0, m);
                let theta = path::argmax_time(&w);
                if theta == 0.0 {
                    restarts += 1;
                    continue;
                }
                let scale = theta.sqrt();
                let values = (0..=m).map(|k| w.value_at(k as f64 / m as f64 * theta) / scale).collect();
                return AscentSample { path: Path::new(1.0, values).expect("grid construction is valid"), weight: 1.0, restarts };
            }
        }
        AscentMethod::CoAscentReweight => {
            let co = sample_co_ascent(rng, m, fp);
            let weight = (std::f64::consts::PI / 2.0).sqrt() / co.tau1.sqrt();
            AscentSample { path: co.path, weight, restarts: co.restarts }
        }
    }
}
