//! Grid-discretized paths and the deterministic transforms on them.
//!
//! A [`Path`] is a continuous path observed on a uniform grid: `m + 1`
//! values at times `k * duration / m`. Between grid points the path is read
//! by linear interpolation, and hitting times are resolved by interpolating
//! the crossing within a grid cell, which removes the leading-order
//! discretization bias. Ties in the argmax are broken by the earliest grid
//! index, matching the infimum convention used throughout.

use std::io::{BufRead, Write};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PathError {
    #[error("path needs at least 3 grid values (m >= 2), got {0}")]
    TooFewValues(usize),
    #[error("duration must be positive, got {0}")]
    BadDuration(f64),
    #[error("path values must be finite")]
    NonFiniteValue,
    #[error("parameter {name} = {value} outside its domain {domain}")]
    Domain { name: &'static str, value: f64, domain: &'static str },
    #[error("paths live on different grids ({0} vs {1} values)")]
    GridMismatch(usize, usize),
    #[error("operation requires the path to start at 0, starts at {0}")]
    NonzeroStart(f64),
    #[error("csv format error: {0}")]
    Csv(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A path on a uniform grid over `[0, duration]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    duration: f64,
    values: Vec<f64>,
}

impl Path {
    /// Build a path from its grid values; `values.len() = m + 1` with `m >= 2`.
    pub fn new(duration: f64, values: Vec<f64>) -> Result<Self, PathError> {
        if values.len() < 3 {
            return Err(PathError::TooFewValues(values.len()));
        }
        if !(duration > 0.0) || !duration.is_finite() {
            return Err(PathError::BadDuration(duration));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(PathError::NonFiniteValue);
        }
        Ok(Path { duration, values })
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// Number of grid cells `m`.
    pub fn grid_size(&self) -> usize {
        self.values.len() - 1
    }

    pub fn dt(&self) -> f64 {
        self.duration / self.grid_size() as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Grid time of index `k`.
    pub fn time(&self, k: usize) -> f64 {
        self.duration * k as f64 / self.grid_size() as f64
    }

    /// Linear interpolation at `s` in `[0, duration]` (clamped).
    pub fn value_at(&self, s: f64) -> f64 {
        let m = self.grid_size() as f64;
        let pos = (s / self.duration * m).clamp(0.0, m);
        let k = pos.floor() as usize;
        if k >= self.grid_size() {
            return *self.values.last().unwrap();
        }
        let frac = pos - k as f64;
        self.values[k] + frac * (self.values[k + 1] - self.values[k])
    }

    pub fn start(&self) -> f64 {
        self.values[0]
    }

    pub fn endpoint(&self) -> f64 {
        *self.values.last().unwrap()
    }
}

/// Pointwise running maximum, on the same grid.
pub fn running_max(p: &Path) -> Path {
    let mut acc = f64::NEG_INFINITY;
    let values = p.values().iter().map(|&v| {
        acc = acc.max(v);
        acc
    }).collect();
    Path { duration: p.duration, values }
}

/// Pointwise running minimum, on the same grid.
pub fn running_min(p: &Path) -> Path {
    let mut acc = f64::INFINITY;
    let values = p.values().iter().map(|&v| {
        acc = acc.min(v);
        acc
    }).collect();
    Path { duration: p.duration, values }
}

/// First grid time attaining the maximum (earliest index on ties).
pub fn argmax_time(p: &Path) -> f64 {
    let mut best = 0usize;
    for (k, &v) in p.values().iter().enumerate() {
        if v > p.values[best] {
            best = k;
        }
    }
    p.time(best)
}

/// First grid time attaining the minimum (earliest index on ties).
pub fn argmin_time(p: &Path) -> f64 {
    let mut best = 0usize;
    for (k, &v) in p.values().iter().enumerate() {
        if v < p.values[best] {
            best = k;
        }
    }
    p.time(best)
}

/// First time the interpolated path crosses `level`, or `None` if it never
/// does. The crossing within a cell is placed by linear interpolation.
pub fn first_hitting_time(p: &Path, level: f64) -> Option<f64> {
    let vals = p.values();
    if vals[0] == level {
        return Some(0.0);
    }
    let dt = p.dt();
    for k in 1..vals.len() {
        let (a, b) = (vals[k - 1], vals[k]);
        if (a < level && b >= level) || (a > level && b <= level) {
            let frac = (level - a) / (b - a);
            return Some(dt * ((k - 1) as f64 + frac));
        }
    }
    None
}

/// Time reversal recentered at the start: `s -> p(1-s) - (p(1) - p(0))`.
///
/// An involution on paths of any duration; the duality arguments use it on
/// normalized (duration-1) fragments.
pub fn phi_transform(p: &Path) -> Path {
    let m = p.grid_size();
    let shift = p.endpoint() - p.start();
    let values = (0..=m).map(|k| p.values[m - k] - shift).collect();
    Path { duration: p.duration, values }
}

/// Replace the initial `[0, delta]` segment by the straight line from
/// `(0, 0)` to `(delta, p(delta))`; unchanged on `[delta, 1]`.
pub fn straighten_initial(p: &Path, delta: f64) -> Result<Path, PathError> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(PathError::Domain { name: "delta", value: delta, domain: "(0, 1]" });
    }
    let p_delta = p.value_at(delta * p.duration);
    let m = p.grid_size() as f64;
    let values = p
        .values()
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let s = k as f64 / m;
            if s < delta {
                p_delta * s / delta
            } else {
                v
            }
        })
        .collect();
    Ok(Path { duration: p.duration, values })
}

/// Diffusive/ballistic rescaling: a path of duration `t` becomes the
/// duration-1 path `s -> p(s t) / t^alpha`.
pub fn scale_path(p: &Path, alpha: f64) -> Path {
    let scale = p.duration.powf(alpha);
    let values = p.values().iter().map(|&v| v / scale).collect();
    Path { duration: 1.0, values }
}

/// The deterministic up-down path `s -> theta - |s - theta|` on `[0, 1]`.
pub fn updown_path(theta: f64, m: usize) -> Result<Path, PathError> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(PathError::Domain { name: "theta", value: theta, domain: "[0, 1]" });
    }
    let values = (0..=m).map(|k| {
        let s = k as f64 / m as f64;
        theta - (s - theta).abs()
    }).collect();
    Path::new(1.0, values)
}

/// Piecewise-linear path through `(0, 0)`, `(u, x)` and `(1, x - y)`.
pub fn omega_path(x: f64, y: f64, u: f64, m: usize) -> Result<Path, PathError> {
    if !(x > 0.0) {
        return Err(PathError::Domain { name: "x", value: x, domain: "(0, inf)" });
    }
    if !(y > 0.0) {
        return Err(PathError::Domain { name: "y", value: y, domain: "(0, inf)" });
    }
    if !(u > 0.0 && u < 1.0) {
        return Err(PathError::Domain { name: "u", value: u, domain: "(0, 1)" });
    }
    let values = (0..=m).map(|k| {
        let s = k as f64 / m as f64;
        if s <= u {
            x * s / u
        } else {
            x - y * (s - u) / (1.0 - u)
        }
    }).collect();
    Path::new(1.0, values)
}

/// Pitman's transform `2S - X`; requires the path to start at 0.
pub fn pitman_transform(p: &Path) -> Result<Path, PathError> {
    if p.start() != 0.0 {
        return Err(PathError::NonzeroStart(p.start()));
    }
    let mut smax = f64::NEG_INFINITY;
    let values = p.values().iter().map(|&v| {
        smax = smax.max(v);
        2.0 * smax - v
    }).collect();
    Ok(Path { duration: p.duration, values })
}

/// Supremum norm of the path values.
pub fn sup_norm(p: &Path) -> f64 {
    p.values().iter().fold(0.0f64, |acc, &v| acc.max(v.abs()))
}

/// Supremum distance between two paths on the same grid.
pub fn sup_distance(a: &Path, b: &Path) -> Result<f64, PathError> {
    if a.values.len() != b.values.len() {
        return Err(PathError::GridMismatch(a.values.len(), b.values.len()));
    }
    Ok(a.values().iter().zip(b.values()).fold(0.0f64, |acc, (&x, &y)| acc.max((x - y).abs())))
}

/// Trapezoid-rule integral of the path over its duration.
pub fn integral(p: &Path) -> f64 {
    let v = p.values();
    let inner: f64 = v[1..v.len() - 1].iter().sum();
    p.dt() * (0.5 * (v[0] + v[v.len() - 1]) + inner)
}

/// An evaluatable path functional with optional declared bound and
/// Lipschitz constant. Evaluation asserts the bound.
pub struct PathFunctional {
    f: Box<dyn Fn(&Path) -> f64 + Send + Sync>,
    bound: Option<f64>,
    lipschitz: Option<f64>,
}

impl PathFunctional {
    pub fn new(f: impl Fn(&Path) -> f64 + Send + Sync + 'static) -> Self {
        PathFunctional { f: Box::new(f), bound: None, lipschitz: None }
    }

    pub fn bounded(f: impl Fn(&Path) -> f64 + Send + Sync + 'static, bound: f64) -> Self {
        assert!(bound.is_finite() && bound >= 0.0);
        PathFunctional { f: Box::new(f), bound: Some(bound), lipschitz: None }
    }

    pub fn with_lipschitz(mut self, constant: f64) -> Self {
        assert!(constant >= 0.0);
        self.lipschitz = Some(constant);
        self
    }

    pub fn bound(&self) -> Option<f64> {
        self.bound
    }

    pub fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }

    pub fn eval(&self, p: &Path) -> f64 {
        let v = (self.f)(p);
        if let Some(b) = self.bound {
            assert!(v.abs() <= b + 1e-12, "functional declared bound {b} but returned {v}");
        }
        v
    }
}

/// Write paths as CSV: header `s_0,...,s_m`, one row per path, 17
/// significant digits so the round trip is lossless.
pub fn write_csv<W: Write>(out: &mut W, paths: &[Path]) -> Result<(), PathError> {
    let m = match paths.first() {
        Some(p) => p.grid_size(),
        None => return Err(PathError::Csv("no paths to write".into())),
    };
    let header: Vec<String> = (0..=m).map(|k| format!("s_{k}")).collect();
    writeln!(out, "{}", header.join(","))?;
    for p in paths {
        if p.grid_size() != m {
            return Err(PathError::GridMismatch(p.values.len(), m + 1));
        }
        let row: Vec<String> = p.values().iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Read paths written by [`write_csv`]; `duration` is carried by the caller
/// (the sidecar manifest in batch dumps).
pub fn read_csv<R: BufRead>(input: R, duration: f64) -> Result<Vec<Path>, PathError> {
    let mut lines = input.lines();
    let header = lines.next().ok_or_else(|| PathError::Csv("empty file".into()))??;
    let cols = header.split(',').count();
    if cols < 3 || !header.starts_with("s_0") {
        return Err(PathError::Csv(format!("unexpected header: {header}")));
    }
    let mut paths = Vec::new();
    for line in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let values: Result<Vec<f64>, _> = line.split(',').map(|tok| tok.parse::<f64>()).collect();
        let values = values.map_err(|e| PathError::Csv(format!("bad float: {e}")))?;
        if values.len() != cols {
            return Err(PathError::Csv(format!("row has {} fields, header has {cols}", values.len())));
        }
        paths.push(Path::new(duration, values)?);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn path(duration: f64, values: &[f64]) -> Path {
        Path::new(duration, values.to_vec()).unwrap()
    }

    #[test]
    fn constructor_enforces_invariants() {
        assert!(Path::new(1.0, vec![0.0, 1.0]).is_err());
        assert!(Path::new(0.0, vec![0.0, 1.0, 2.0]).is_err());
        assert!(Path::new(-1.0, vec![0.0, 1.0, 2.0]).is_err());
        assert!(Path::new(1.0, vec![0.0, f64::NAN, 2.0]).is_err());
        assert!(Path::new(1.0, vec![0.0, 1.0, 2.0]).is_ok());
    }

    #[test]
    fn running_max_direct_example() {
        let p = path(1.0, &[0.0, 1.0, 0.0, 2.0]);
        assert_eq!(running_max(&p).values(), &[0.0, 1.0, 1.0, 2.0]);
    }

    #[test]
    fn running_max_is_identity_on_increasing_paths() {
        let p = path(1.0, &[0.0, 0.5, 1.5, 3.0]);
        assert_eq!(running_max(&p).values(), p.values());
    }

    #[test]
    fn running_max_sign_boundary() {
        let p = path(1.0, &[0.5, 1.0, 0.25, 2.0]);
        let neg_max = Path::new(1.0, running_max(&p).values().iter().map(|v| -v).collect()).unwrap();
        assert_eq!(running_max(&neg_max).values()[0], -p.values()[0]);
    }

    #[test]
    fn argmax_earliest_wins() {
        let p = path(1.0, &[0.0, 1.0, 1.0, 0.0]);
        assert_relative_eq!(argmax_time(&p), 1.0 / 3.0);
        let c = path(1.0, &[2.0, 2.0, 2.0]);
        assert_eq!(argmax_time(&c), 0.0);
    }

    #[test]
    fn first_hit_interpolates_linearly() {
        let p = path(1.0, &[0.0, 1.0, 2.0]);
        assert_relative_eq!(first_hitting_time(&p, 1.0).unwrap(), 0.5);
        assert_relative_eq!(first_hitting_time(&p, 0.5).unwrap(), 0.25);
        let below = path(1.0, &[0.0, -1.0, -0.5]);
        assert!(first_hitting_time(&below, 1.0).is_none());
        assert_relative_eq!(first_hitting_time(&below, -0.75).unwrap(), 0.5 + 0.25 * 0.5 / 0.5 * 0.5);
    }

    #[test]
    fn phi_flips_linear_slope() {
        let m = 8;
        let p = Path::new(1.0, (0..=m).map(|k| 3.0 * k as f64 / m as f64).collect()).unwrap();
        let q = phi_transform(&p);
        for k in 0..=m {
            assert_relative_eq!(q.values()[k], 3.0 - 3.0 * k as f64 / m as f64 - 3.0 + 0.0, epsilon = 1e-12);
        }
        assert_relative_eq!(q.values()[0], p.values()[0], epsilon = 1e-12);
    }

    #[test]
    fn straighten_full_is_a_line() {
        let p = path(1.0, &[0.0, 5.0, -2.0, 1.0, 4.0]);
        let q = straighten_initial(&p, 1.0).unwrap();
        for (k, &v) in q.values().iter().enumerate() {
            assert_relative_eq!(v, 4.0 * k as f64 / 4.0, epsilon = 1e-12);
        }
        assert!(straighten_initial(&p, 0.0).is_err());
        assert!(straighten_initial(&p, 1.5).is_err());
    }

    #[test]
    fn straighten_fixed_point_on_already_linear_head() {
        let m = 8;
        let p = Path::new(1.0, (0..=m).map(|k| k as f64 / m as f64 * 2.0).collect()).unwrap();
        let q = straighten_initial(&p, 0.5).unwrap();
        for (a, b) in p.values().iter().zip(q.values()) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn straighten_error_bounded_by_twice_the_bound() {
        let b = 0.7;
        let f = PathFunctional::bounded(move |p: &Path| p.endpoint().clamp(-0.7, 0.7), b);
        let p = path(1.0, &[0.0, 3.0, -1.0, 0.4]);
        let q = straighten_initial(&p, 0.5).unwrap();
        assert!((f.eval(&q) - f.eval(&p)).abs() <= 2.0 * b + 1e-12);
    }

    #[test]
    fn scale_identity_and_linear() {
        let p = path(1.0, &[0.0, 0.5, 1.0]);
        assert_eq!(scale_path(&p, 0.0).values(), p.values());
        // slope h over [0, t], alpha = 1 -> h * s on [0, 1]
        let t = 4.0;
        let h = 2.5;
        let m = 8;
        let q = Path::new(t, (0..=m).map(|k| h * t * k as f64 / m as f64).collect()).unwrap();
        let scaled = scale_path(&q, 1.0);
        assert_relative_eq!(scaled.duration(), 1.0);
        for (k, &v) in scaled.values().iter().enumerate() {
            assert_relative_eq!(v, h * k as f64 / m as f64, epsilon = 1e-12);
        }
    }

    #[test]
    fn updown_endpoints_and_peak() {
        let u = updown_path(1.0, 8).unwrap();
        for (k, &v) in u.values().iter().enumerate() {
            assert_relative_eq!(v, k as f64 / 8.0, epsilon = 1e-15);
        }
        let half = updown_path(0.5, 8).unwrap();
        assert_relative_eq!(half.endpoint(), 0.0, epsilon = 1e-15);
        assert_relative_eq!(half.value_at(0.5), 0.5, epsilon = 1e-15);
        let down = updown_path(0.0, 8).unwrap();
        for (k, &v) in down.values().iter().enumerate() {
            assert_relative_eq!(v, -(k as f64) / 8.0, epsilon = 1e-15);
        }
        assert!(updown_path(1.1, 8).is_err());
    }

    #[test]
    fn omega_tent_and_value_at_switch() {
        let m = 100;
        let tent = omega_path(1.0, 1.0, 0.5, m).unwrap();
        assert_relative_eq!(tent.endpoint(), 0.0, epsilon = 1e-12);
        assert_relative_eq!(tent.value_at(0.5), 1.0, epsilon = 1e-12);
        let w = omega_path(0.3, 0.8, 0.25, m).unwrap();
        assert_relative_eq!(w.value_at(0.25), 0.3, epsilon = 1e-12);
        assert!(omega_path(-1.0, 1.0, 0.5, m).is_err());
        assert!(omega_path(1.0, 1.0, 1.0, m).is_err());
    }

    #[test]
    fn omega_matches_negated_updown() {
        // omega_{-hu, -h(1-u)}(u) = -h * updown(u) for h < 0
        let h = -1.7;
        let u = 0.3;
        let m = 64;
        let omega = omega_path(-h * u, -h * (1.0 - u), u, m).unwrap();
        let tent = updown_path(u, m).unwrap();
        for (a, &b) in omega.values().iter().zip(tent.values()) {
            assert_relative_eq!(*a, -h * b, epsilon = 1e-12);
        }
    }

    #[test]
    fn pitman_basics() {
        let p = path(1.0, &[0.0, -1.0, -2.0, -3.0]);
        let q = pitman_transform(&p).unwrap();
        for (a, b) in q.values().iter().zip(p.values()) {
            assert_relative_eq!(*a, b.abs(), epsilon = 1e-15);
        }
        let started_high = path(1.0, &[1.0, 0.0, 2.0]);
        assert!(pitman_transform(&started_high).is_err());
    }

    #[test]
    fn integral_trapezoid() {
        let m = 1000;
        let p = Path::new(1.0, (0..=m).map(|k| k as f64 / m as f64).collect()).unwrap();
        assert_relative_eq!(integral(&p), 0.5, epsilon = 1e-9);
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let paths = vec![
            path(2.0, &[0.0, 1.0 / 3.0, -7.123456789012345e-13, 2.0]),
            path(2.0, &[1e300, -1e-300, std::f64::consts::PI, -0.0]),
        ];
        let mut buf = Vec::new();
        write_csv(&mut buf, &paths).unwrap();
        let parsed = read_csv(std::io::BufReader::new(&buf[..]), 2.0).unwrap();
        assert_eq!(parsed.len(), 2);
        for (a, b) in parsed.iter().zip(&paths) {
            assert_eq!(a.values(), b.values());
        }
    }

    proptest! {
        #[test]
        fn phi_is_an_involution(values in proptest::collection::vec(-1e6f64..1e6, 3..64)) {
            let p = Path::new(1.0, values).unwrap();
            let q = phi_transform(&phi_transform(&p));
            for (a, b) in p.values().iter().zip(q.values()) {
                let tol = 1e-12 * a.abs().max(1.0);
                prop_assert!((a - b).abs() <= tol);
            }
        }

        #[test]
        fn running_max_dominates_and_is_monotone(values in proptest::collection::vec(-1e6f64..1e6, 3..64)) {
            let p = Path::new(1.0, values).unwrap();
            let s = running_max(&p);
            let mut prev = f64::NEG_INFINITY;
            for (&sv, &pv) in s.values().iter().zip(p.values()) {
                prop_assert!(sv >= pv);
                prop_assert!(sv >= prev);
                prev = sv;
            }
        }

        #[test]
        fn pitman_symmetry_about_running_max(mut values in proptest::collection::vec(-1e3f64..1e3, 3..64)) {
            values[0] = 0.0;
            let p = Path::new(1.0, values).unwrap();
            let s = running_max(&p);
            let q = pitman_transform(&p).unwrap();
            for ((qa, sa), pa) in q.values().iter().zip(s.values()).zip(p.values()) {
                prop_assert!(((qa - sa) - (sa - pa)).abs() <= 1e-9);
            }
        }

        #[test]
        fn updown_is_one_lipschitz_with_peak_at_theta(theta in 0.0f64..=1.0) {
            let m = 64;
            let u = updown_path(theta, m).unwrap();
            let dt = 1.0 / m as f64;
            for w in u.values().windows(2) {
                prop_assert!((w[1] - w[0]).abs() <= dt + 1e-12);
            }
            let maxv = u.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!((maxv - u.value_at(theta)).abs() <= dt);
        }

        #[test]
        fn scale_round_trip(values in proptest::collection::vec(-1e3f64..1e3, 3..64), t in 0.1f64..50.0, alpha in 0.0f64..1.5) {
            let p = Path::new(t, values).unwrap();
            let scaled = scale_path(&p, alpha);
            let stretched = Path::new(t, scaled.values().iter().map(|v| v * t.powf(alpha)).collect()).unwrap();
            for (a, b) in stretched.values().iter().zip(p.values()) {
                prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
            }
        }
    }
}
