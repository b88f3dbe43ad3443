//! First-passage and path-decomposition samplers: the co-ascent
//! (first-passage rescaling of Brownian motion), the drifted-path
//! decomposition split at the all-time maximum, the penalized-measure path
//! construction, and the experimental pseudo-Brownian bridge.
//!
//! First-passage times are heavy-tailed, so the stepper grows its stride
//! with elapsed time (keeping resolution uniform relative to the eventual
//! rescaled grid) and guards every coarse step with the Brownian-bridge
//! barrier-crossing probability: steps that could cross are subdivided down
//! to `dt_sim`, where plain value-crossing with linear interpolation takes
//! over. Runs that exceed the horizon cap are restarted and counted.

use rand::Rng;

use crate::path::Path;

use super::fragments::{exponential, normal, sample_bm};

/// Tuning for first-passage simulation.
#[derive(Debug, Clone, Copy)]
pub struct FirstPassageOpts {
    /// Finest simulation step; crossings are localized to this resolution
    /// and interpolated linearly inside it.
    pub dt_sim: f64,
    /// Restart the draw if the target time exceeds this horizon.
    pub horizon_cap: f64,
    /// Strides grow as elapsed-time / this target, so storage resolution
    /// stays uniform relative to the rescaled path.
    pub resolution_target: usize,
}

impl Default for FirstPassageOpts {
    fn default() -> Self {
        FirstPassageOpts { dt_sim: 1e-4, horizon_cap: 1e4, resolution_target: 16_384 }
    }
}

/// Storage for one first-passage trajectory, thinned geometrically so the
/// buffer stays bounded while keeping enough nodes to rebuild the rescaled
/// path.
struct Trajectory {
    times: Vec<f64>,
    values: Vec<f64>,
    cap: usize,
}

impl Trajectory {
    fn new(cap: usize) -> Self {
        let mut t = Trajectory { times: Vec::with_capacity(cap), values: Vec::with_capacity(cap), cap };
        t.times.push(0.0);
        t.values.push(0.0);
        t
    }

    fn reset(&mut self) {
        self.times.clear();
        self.values.clear();
        self.times.push(0.0);
        self.values.push(0.0);
    }

    fn push(&mut self, t: f64, x: f64) {
        if self.times.len() == self.cap {
            // drop every other node; local density halves uniformly
            let mut keep = 0;
            for i in (0..self.times.len()).step_by(2) {
                self.times[keep] = self.times[i];
                self.values[keep] = self.values[i];
                keep += 1;
            }
            self.times.truncate(keep);
            self.values.truncate(keep);
        }
        self.times.push(t);
        self.values.push(x);
    }

    /// Linear interpolation; `t` must lie within the recorded range.
    fn value_at(&self, t: f64) -> f64 {
        let i = self.times.partition_point(|&v| v <= t);
        if i == 0 {
            return self.values[0];
        }
        if i >= self.times.len() {
            return *self.values.last().unwrap();
        }
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        let (x0, x1) = (self.values[i - 1], self.values[i]);
        x0 + (x1 - x0) * (t - t0) / (t1 - t0)
    }

    /// Rescale onto a uniform grid over `[0, tau]`, pinning the final node.
    fn rescaled(&self, tau: f64, final_value: f64, scale: f64, m: usize) -> Path {
        let values = (0..=m)
            .map(|k| {
                if k == m {
                    final_value / scale
                } else {
                    self.value_at(tau * k as f64 / m as f64) / scale
                }
            })
            .collect();
        Path::new(1.0, values).expect("grid construction is valid")
    }
}

/// Recursive step over `[t, t + dt]` with known endpoints, subdividing while
/// the bridge could touch `barrier`. Returns the crossing time if one is
/// found. Interior nodes are recorded.
fn segment_first_hit<R: Rng>(
    rng: &mut R,
    traj: &mut Trajectory,
    t: f64,
    x: f64,
    y: f64,
    dt: f64,
    barrier: f64,
    dt_floor: f64,
) -> Option<f64> {
    if dt <= dt_floor {
        if y >= barrier {
            let frac = (barrier - x) / (y - x);
            return Some(t + dt * frac);
        }
        traj.push(t + dt, y);
        return None;
    }
    let crossing_possible = if y >= barrier || x >= barrier {
        true
    } else {
        // Brownian-bridge barrier-touch probability over the step.
        (-2.0 * (barrier - x) * (barrier - y) / dt).exp() >= 1e-9
    };
    if !crossing_possible {
        traj.push(t + dt, y);
        return None;
    }
    let half = 0.5 * dt;
    let mid = 0.5 * (x + y) + (0.25 * dt).sqrt() * normal(rng);
    if let Some(tau) = segment_first_hit(rng, traj, t, x, mid, half, barrier, dt_floor) {
        return Some(tau);
    }
    segment_first_hit(rng, traj, t + half, mid, y, half, barrier, dt_floor)
}

/// Simulate driftless Brownian motion from 0 until it first hits `barrier`,
/// recording the trajectory. Returns the hitting time, or `None` when the
/// horizon cap was exceeded.
fn simulate_to_barrier<R: Rng>(rng: &mut R, traj: &mut Trajectory, barrier: f64, opts: &FirstPassageOpts) -> Option<f64> {
    let mut t = 0.0;
    let mut x = 0.0;
    while t < opts.horizon_cap {
        let stride = opts.dt_sim.max(t / opts.resolution_target as f64);
        let y = x + stride.sqrt() * normal(rng);
        if let Some(tau) = segment_first_hit(rng, traj, t, x, y, stride, barrier, opts.dt_sim) {
            return Some(tau);
        }
        t += stride;
        x = y;
    }
    None
}

/// One co-ascent draw: Brownian motion run to its first hit of 1 and
/// rescaled to duration 1. The endpoint `1/sqrt(tau_1)` is the path's
/// maximum.
#[derive(Debug, Clone)]
pub struct CoAscentSample {
    pub path: Path,
    pub tau1: f64,
    /// Horizon-cap restarts consumed by this draw.
    pub restarts: u64,
}

pub fn sample_co_ascent<R: Rng>(rng: &mut R, m: usize, opts: &FirstPassageOpts) -> CoAscentSample {
    let mut traj = Trajectory::new(32_768.max(4 * m));
    let mut restarts = 0u64;
    loop {
        if let Some(tau) = simulate_to_barrier(rng, &mut traj, 1.0, opts) {
            let scale = tau.sqrt();
            let path = traj.rescaled(tau, 1.0, scale, m);
            return CoAscentSample { path, tau1: tau, restarts };
        }
        restarts += 1;
        traj.reset();
    }
}

/// Drifted Brownian motion assembled from its decomposition at the all-time
/// maximum: an exponential level, an up-drifted first-passage piece, and a
/// conditioned-negative tail.
#[derive(Debug, Clone)]
pub struct WilliamsSample {
    pub path: Path,
    /// The all-time maximum (the exponential level).
    pub s_inf: f64,
    /// Time at which the maximum is attained (may exceed the window).
    pub theta_inf: f64,
    /// Rejection attempts consumed by the conditioned tail.
    pub tail_attempts: u64,
}

/// Sample Brownian motion with drift `h < 0` over `[0, t]` via the
/// decomposition at the maximum: `S_inf ~ Exp(-2h)`, drift `-h` up to the
/// first hit of that level, then a drift-`h` tail conditioned to stay below
/// it (rejection sampling, with the exact terminal acceptance factor
/// `1 - exp(2h |tail end|)` accounting for the time beyond the window).
pub fn sample_williams_drift<R: Rng>(rng: &mut R, h: f64, t: f64, m: usize) -> WilliamsSample {
    assert!(h < 0.0, "williams decomposition requires h < 0");
    let mu = -h;
    let level = exponential(rng, 2.0 * mu);
    let dt = t / m as f64;
    let sd = dt.sqrt();

    let mut values = Vec::with_capacity(m + 1);
    let mut x = 0.0;
    values.push(x);
    let mut crossed_at = None;
    for k in 0..m {
        x += mu * dt + sd * normal(rng);
        if x >= level {
            let prev = values[k];
            let frac = (level - prev) / (x - prev);
            crossed_at = Some(dt * (k as f64 + frac));
            break;
        }
        values.push(x);
    }

    match crossed_at {
        None => {
            // The maximum lies beyond the window; keep stepping (without
            // storing) to report its time.
            let path = Path::new(t, values).expect("grid construction is valid");
            let mut tt = t;
            loop {
                let prev = x;
                x += mu * dt + sd * normal(rng);
                tt += dt;
                if x >= level {
                    let frac = (level - prev) / (x - prev);
                    return WilliamsSample { path, s_inf: level, theta_inf: tt - dt * (1.0 - frac), tail_attempts: 0 };
                }
            }
        }
        Some(tau) => {
            let tail_cells = m - values.len() + 1;
            let tail_len = t - tau;
            let (tail, attempts) = conditioned_negative_tail(rng, mu, tail_len, tail_cells.max(1), dt);
            // Grid nodes after the crossing read the tail at their offsets.
            let start_k = values.len();
            for k in start_k..=m {
                let offset = dt * k as f64 - tau;
                values.push(level + tail_value(&tail, dt, offset));
            }
            let path = Path::new(t, values).expect("grid construction is valid");
            WilliamsSample { path, s_inf: level, theta_inf: tau, tail_attempts: attempts }
        }
    }
}

/// Tail of the decomposition: drift `-mu` Brownian motion from 0 conditioned
/// to stay nonpositive forever. Rejection over the window plus the exact
/// terminal factor for the unseen future.
fn conditioned_negative_tail<R: Rng>(rng: &mut R, mu: f64, len: f64, cells: usize, dt: f64) -> (Vec<f64>, u64) {
    let n = cells.max((len / dt).ceil() as usize).max(1);
    let sd = dt.sqrt();
    let mut attempts = 0u64;
    'attempt: loop {
        attempts += 1;
        let mut tail = Vec::with_capacity(n + 1);
        let mut x = 0.0;
        tail.push(x);
        for _ in 0..n {
            x += -mu * dt + sd * normal(rng);
            if x > 0.0 {
                continue 'attempt;
            }
            tail.push(x);
        }
        // Probability of staying below 0 forever after the window.
        let accept = 1.0 - (2.0 * mu * x).exp();
        if rng.gen::<f64>() < accept {
            return (tail, attempts);
        }
    }
}

fn tail_value(tail: &[f64], dt: f64, offset: f64) -> f64 {
    if offset <= 0.0 {
        return tail[0];
    }
    let pos = offset / dt;
    let i = (pos.floor() as usize).min(tail.len() - 1);
    if i + 1 >= tail.len() {
        return tail[tail.len() - 1];
    }
    let frac = pos - i as f64;
    tail[i] + frac * (tail[i + 1] - tail[i])
}

/// A draw from the penalized-measure path construction: an exponential
/// all-time maximum, Brownian motion run to its first hit, then the level
/// minus an independent Bessel(3) process.
#[derive(Debug, Clone)]
pub struct QnuSample {
    pub path: Path,
    pub s_inf: f64,
    /// Time the maximum is reached, when inside the window.
    pub hit_time: Option<f64>,
}

pub fn sample_qnu_path<R: Rng>(rng: &mut R, nu: f64, t: f64, m: usize) -> QnuSample {
    assert!(nu < 0.0, "penalized path construction requires nu < 0");
    let s_inf = exponential(rng, -nu);
    let dt = t / m as f64;
    let sd = dt.sqrt();

    let mut values = Vec::with_capacity(m + 1);
    let mut x = 0.0;
    values.push(x);
    let mut crossed_at = None;
    for k in 0..m {
        x += sd * normal(rng);
        if x >= s_inf {
            let prev = values[k];
            let frac = (s_inf - prev) / (x - prev);
            crossed_at = Some(dt * (k as f64 + frac));
            break;
        }
        values.push(x);
    }

    match crossed_at {
        None => QnuSample { path: Path::new(t, values).expect("grid construction is valid"), s_inf, hit_time: None },
        Some(tau) => {
            // Descend from the level as an independent Bessel(3) from 0,
            // stepped exactly at the grid offsets.
            let (mut b1, mut b2, mut b3) = (0.0f64, 0.0f64, 0.0f64);
            let mut prev_offset = 0.0;
            let start_k = values.len();
            for k in start_k..=m {
                let offset = dt * k as f64 - tau;
                let gap = offset - prev_offset;
                let g = gap.sqrt();
                b1 += g * normal(rng);
                b2 += g * normal(rng);
                b3 += g * normal(rng);
                values.push(s_inf - (b1 * b1 + b2 * b2 + b3 * b3).sqrt());
                prev_offset = offset;
            }
            QnuSample { path: Path::new(t, values).expect("grid construction is valid"), s_inf, hit_time: Some(tau) }
        }
    }
}

/// Tuning for the experimental pseudo-Brownian bridge sampler.
#[derive(Debug, Clone, Copy)]
pub struct PseudoBridgeOpts {
    /// Half-width of the occupation band approximating local time at 0.
    pub eps: f64,
    pub dt_sim: f64,
    pub horizon_cap: f64,
}

impl Default for PseudoBridgeOpts {
    fn default() -> Self {
        PseudoBridgeOpts { eps: 0.05, dt_sim: 1e-3, horizon_cap: 1e4 }
    }
}

#[derive(Debug, Clone)]
pub struct PseudoBridgeSample {
    pub path: Path,
    /// Estimated inverse local time at level 1.
    pub ell1: f64,
    pub restarts: u64,
}

/// Experimental: Brownian motion run until its local time at 0 (estimated by
/// the occupation of `[-eps, eps]` over `2 eps`) exceeds 1, rescaled to
/// duration 1. Exposed for exploration, not acceptance: the occupation
/// estimator carries an `O(eps)` bias that the self-convergence test tracks.
pub fn sample_pseudo_bridge<R: Rng>(rng: &mut R, m: usize, opts: &PseudoBridgeOpts) -> PseudoBridgeSample {
    let dt = opts.dt_sim;
    let sd = dt.sqrt();
    let mut restarts = 0u64;
    loop {
        let mut traj = Trajectory::new(32_768.max(4 * m));
        let mut x = 0.0;
        let mut t = 0.0;
        let mut occupation = 0.0;
        let target = 2.0 * opts.eps;
        while t < opts.horizon_cap {
            x += sd * normal(rng);
            t += dt;
            traj.push(t, x);
            if x.abs() <= opts.eps {
                occupation += dt;
                if occupation >= target {
                    let scale = t.sqrt();
                    let path = traj.rescaled(t, x, scale, m);
                    return PseudoBridgeSample { path, ell1: t, restarts };
                }
            }
        }
        restarts += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parallel::map_indexed;
    use crate::rng::RngStream;
    use crate::stats::{ks_one_sample, WeightedSample};
    use approx::assert_relative_eq;

    fn quick_fp() -> FirstPassageOpts {
        FirstPassageOpts { dt_sim: 1e-3, horizon_cap: 1e3, resolution_target: 4096 }
    }

    #[test]
    fn co_ascent_ends_at_its_maximum() {
        let mut rng = RngStream::new(40).rng();
        let opts = quick_fp();
        for _ in 0..10 {
            let s = sample_co_ascent(&mut rng, 256, &opts);
            let end = s.path.endpoint();
            assert_relative_eq!(end, 1.0 / s.tau1.sqrt(), epsilon = 1e-12);
            let max = s.path.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert!(end >= max - 1e-12);
        }
    }

    #[test]
    fn co_ascent_hitting_time_law() {
        // tau_1 has the reflection-principle law P(tau <= s) = 2(1 - Phi(1/sqrt(s)));
        // test it truncated to the cap.
        let n = 2_000;
        let opts = quick_fp();
        let taus = map_indexed(n, |i| sample_co_ascent(&mut RngStream::new(41).child(i as u64).rng(), 64, &opts).tau1);
        let cap_mass = 2.0 * (1.0 - crate::special::normal_cdf(1.0 / opts.horizon_cap.sqrt()));
        let cdf = |s: f64| 2.0 * (1.0 - crate::special::normal_cdf(1.0 / s.max(1e-12).sqrt())) / cap_mass;
        let s = WeightedSample::unweighted(taus).unwrap();
        let r = ks_one_sample(&s, cdf).unwrap();
        assert!(r.passes_at(0.01), "D = {}, p = {}", r.statistic, r.p_value);
    }

    #[test]
    fn williams_reports_the_level_as_maximum() {
        let mut rng = RngStream::new(42).rng();
        for _ in 0..10 {
            let s = sample_williams_drift(&mut rng, -1.0, 4.0, 512);
            let grid_max = s.path.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert!(grid_max <= s.s_inf + 1e-12, "grid max {grid_max} exceeds level {}", s.s_inf);
            if s.theta_inf < 4.0 {
                // level is approached at grid resolution
                assert!(s.s_inf - grid_max < 0.4, "gap {}", s.s_inf - grid_max);
            }
        }
    }

    #[test]
    fn qnu_max_is_the_drawn_level_and_unique() {
        let mut rng = RngStream::new(43).rng();
        let mut seen_hit = false;
        for _ in 0..20 {
            let s = sample_qnu_path(&mut rng, -1.0, 4.0, 4096);
            let grid_max = s.path.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert!(grid_max <= s.s_inf);
            if s.hit_time.is_some() {
                seen_hit = true;
                assert!(s.s_inf - grid_max < 0.35, "gap {}", s.s_inf - grid_max);
                let near: usize = s.path.values().iter().filter(|&&v| (grid_max - v).abs() < 1e-9).count();
                assert_eq!(near, 1, "grid max should be attained once");
            }
        }
        assert!(seen_hit);
    }

    #[test]
    fn pseudo_bridge_ends_near_zero() {
        let mut rng = RngStream::new(44).rng();
        let opts = PseudoBridgeOpts { eps: 0.05, dt_sim: 1e-3, horizon_cap: 1e3 };
        for _ in 0..5 {
            let s = sample_pseudo_bridge(&mut rng, 256, &opts);
            assert!(s.path.endpoint().abs() <= (opts.eps + 3.0 * opts.dt_sim.sqrt()) / s.ell1.sqrt() + 1e-9);
            let max_abs = s.path.values().iter().fold(0.0f64, |a, v| a.max(v.abs()));
            assert!(max_abs > 0.0 && max_abs.is_finite());
        }
    }

    #[test]
    fn trajectory_thinning_keeps_interpolation_sane() {
        let mut traj = Trajectory::new(64);
        for i in 1..=1000 {
            traj.push(i as f64, 2.0 * i as f64);
        }
        // the stored trajectory is a subsample of the line x = 2t
        assert_relative_eq!(traj.value_at(500.0), 1000.0, epsilon = 1e-9);
        assert!(traj.times.len() <= 64);
    }
}
