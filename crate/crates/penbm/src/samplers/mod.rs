//! Samplers for every process in the model, plus the batch driver.
//!
//! Each sampler is a pure function of an [`RngStream`](crate::rng::RngStream)
//! and its parameters: batches assign one child stream per sample, so
//! generation parallelizes with bit-stable results for any worker count.

mod first_passage;
mod fragments;

pub use first_passage::{
    sample_co_ascent, sample_pseudo_bridge, sample_qnu_path, sample_williams_drift, CoAscentSample, FirstPassageOpts,
    PseudoBridgeOpts, PseudoBridgeSample, QnuSample, WilliamsSample,
};
pub use fragments::{
    sample_ascent, sample_bessel3, sample_bessel3_bridge, sample_bm, sample_bridge, sample_co_meander, sample_excursion,
    sample_grid_schedule, sample_meander, sample_updown, AscentSample, ScheduleSample, UpDownSample,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::parallel::map_indexed;
use crate::path::Path;
use crate::rng::RngStream;

/// Default grid for normalized fragments.
pub const DEFAULT_GRID: usize = 1 << 12;

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error("{kind} requires {requirement}, got {value}")]
    Domain { kind: &'static str, requirement: &'static str, value: f64 },
    #[error("grid size must be at least 2, got {0}")]
    BadGrid(usize),
}

/// Construction used for the ascent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AscentMethod {
    /// Reversed-increment transform of the meander.
    FromMeander,
    /// Rescaled pre-argmax segment of a Brownian path.
    Denisov,
    /// First-passage path weighted by `sqrt(pi/2)/sqrt(tau_1)`.
    CoAscentReweight,
}

/// Every process the batch driver and CLI can draw from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FragmentKind {
    Bm { t: f64 },
    BmDrift { h: f64, t: f64 },
    Bridge { a: f64, b: f64, t: f64 },
    Bessel3 { x: f64, t: f64 },
    Bessel3Bridge { x: f64, y: f64, t: f64 },
    Meander,
    CoMeander,
    Excursion,
    Ascent { method: AscentMethod },
    CoAscent,
    PseudoBridge,
    UpDown { slope: f64 },
    QnuPath { nu: f64, t: f64 },
    WilliamsDrift { h: f64, t: f64 },
}

impl FragmentKind {
    /// Check parameter domains before any sampling starts.
    pub fn validate(&self) -> Result<(), SamplerError> {
        match *self {
            FragmentKind::Bm { t } | FragmentKind::BmDrift { t, .. } | FragmentKind::Bridge { t, .. } => {
                if !(t > 0.0) {
                    return Err(SamplerError::Domain { kind: self.name(), requirement: "t > 0", value: t });
                }
            }
            FragmentKind::Bessel3 { x, t } => {
                if !(t > 0.0) {
                    return Err(SamplerError::Domain { kind: self.name(), requirement: "t > 0", value: t });
                }
                if x < 0.0 {
                    return Err(SamplerError::Domain { kind: self.name(), requirement: "x >= 0", value: x });
                }
            }
            FragmentKind::Bessel3Bridge { x, y, t } => {
                if !(t > 0.0) {
                    return Err(SamplerError::Domain { kind: self.name(), requirement: "t > 0", value: t });
                }
                if x < 0.0 || y < 0.0 {
                    return Err(SamplerError::Domain { kind: self.name(), requirement: "x, y >= 0", value: x.min(y) });
                }
            }
            FragmentKind::QnuPath { nu, t } => {
                if !(nu < 0.0) {
                    return Err(SamplerError::Domain { kind: self.name(), requirement: "nu < 0", value: nu });
                }
                if !(t > 0.0) {
                    return Err(SamplerError::Domain { kind: self.name(), requirement: "t > 0", value: t });
                }
            }
            FragmentKind::WilliamsDrift { h, t } => {
                if !(h < 0.0) {
                    return Err(SamplerError::Domain { kind: self.name(), requirement: "h < 0", value: h });
                }
                if !(t > 0.0) {
                    return Err(SamplerError::Domain { kind: self.name(), requirement: "t > 0", value: t });
                }
            }
            FragmentKind::Meander
            | FragmentKind::CoMeander
            | FragmentKind::Excursion
            | FragmentKind::Ascent { .. }
            | FragmentKind::CoAscent
            | FragmentKind::PseudoBridge
            | FragmentKind::UpDown { .. } => {}
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            FragmentKind::Bm { .. } => "bm",
            FragmentKind::BmDrift { .. } => "bm-drift",
            FragmentKind::Bridge { .. } => "bridge",
            FragmentKind::Bessel3 { .. } => "bessel3",
            FragmentKind::Bessel3Bridge { .. } => "bessel3-bridge",
            FragmentKind::Meander => "meander",
            FragmentKind::CoMeander => "co-meander",
            FragmentKind::Excursion => "excursion",
            FragmentKind::Ascent { .. } => "ascent",
            FragmentKind::CoAscent => "co-ascent",
            FragmentKind::PseudoBridge => "pseudo-bridge",
            FragmentKind::UpDown { .. } => "up-down",
            FragmentKind::QnuPath { .. } => "qnu-path",
            FragmentKind::WilliamsDrift { .. } => "williams-drift",
        }
    }

    /// Duration of the paths this kind produces.
    pub fn duration(&self) -> f64 {
        match *self {
            FragmentKind::Bm { t }
            | FragmentKind::BmDrift { t, .. }
            | FragmentKind::Bridge { t, .. }
            | FragmentKind::Bessel3 { t, .. }
            | FragmentKind::Bessel3Bridge { t, .. }
            | FragmentKind::QnuPath { t, .. }
            | FragmentKind::WilliamsDrift { t, .. } => t,
            _ => 1.0,
        }
    }
}

/// Result of a batch draw.
#[derive(Debug)]
pub struct Batch {
    pub paths: Vec<Path>,
    /// Importance weights, present only for weighted kinds.
    pub weights: Option<Vec<f64>>,
    /// Total horizon-cap restarts across the batch.
    pub restarts: u64,
}

/// Sidecar metadata written next to CSV path dumps.
#[derive(Debug, Serialize, Deserialize)]
pub struct BatchManifest {
    #[serde(flatten)]
    pub kind: FragmentKind,
    pub seed: u64,
    pub stream_id: u64,
    pub m: usize,
    pub n: usize,
    pub duration: f64,
    pub restarts: u64,
}

/// Draw `n` paths of the given kind, one child stream per sample.
pub fn sample_batch(kind: &FragmentKind, n: usize, m: usize, stream: RngStream, fp: &FirstPassageOpts) -> Result<Batch, SamplerError> {
    kind.validate()?;
    if m < 2 {
        return Err(SamplerError::BadGrid(m));
    }
    let kind = kind.clone();
    let fp = *fp;
    let draws: Vec<(Path, f64, u64)> = map_indexed(n, move |i| {
        let mut rng = stream.child(i as u64).rng();
        match kind {
            FragmentKind::Bm { t } => (sample_bm(&mut rng, t, 0.0, m), 1.0, 0),
            FragmentKind::BmDrift { h, t } => (sample_bm(&mut rng, t, h, m), 1.0, 0),
            FragmentKind::Bridge { a, b, t } => (sample_bridge(&mut rng, a, b, t, m), 1.0, 0),
            FragmentKind::Bessel3 { x, t } => (sample_bessel3(&mut rng, x, t, m), 1.0, 0),
            FragmentKind::Bessel3Bridge { x, y, t } => (sample_bessel3_bridge(&mut rng, x, y, t, m), 1.0, 0),
            FragmentKind::Meander => (sample_meander(&mut rng, m), 1.0, 0),
            FragmentKind::CoMeander => (sample_co_meander(&mut rng, m), 1.0, 0),
            FragmentKind::Excursion => (sample_excursion(&mut rng, m), 1.0, 0),
            FragmentKind::Ascent { method } => {
                let s = sample_ascent(&mut rng, method, m, &fp);
                (s.path, s.weight, s.restarts)
            }
            FragmentKind::CoAscent => {
                let s = sample_co_ascent(&mut rng, m, &fp);
                (s.path, 1.0, s.restarts)
            }
            FragmentKind::PseudoBridge => {
                let s = sample_pseudo_bridge(&mut rng, m, &PseudoBridgeOpts::default());
                (s.path, 1.0, s.restarts)
            }
            FragmentKind::UpDown { slope } => (sample_updown(&mut rng, slope, m).path, 1.0, 0),
            FragmentKind::QnuPath { nu, t } => (sample_qnu_path(&mut rng, nu, t, m).path, 1.0, 0),
            FragmentKind::WilliamsDrift { h, t } => {
                let s = sample_williams_drift(&mut rng, h, t, m);
                (s.path, 1.0, 0)
            }
        }
    });
    let weighted = matches!(kind_of(&draws), Weighting::Weighted);
    let restarts = draws.iter().map(|d| d.2).sum();
    let mut paths = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(if weighted { n } else { 0 });
    for (p, w, _) in draws {
        if weighted {
            weights.push(w);
        }
        paths.push(p);
    }
    Ok(Batch { paths, weights: if weighted { Some(weights) } else { None }, restarts })
}

enum Weighting {
    Weighted,
    Unweighted,
}

fn kind_of(draws: &[(Path, f64, u64)]) -> Weighting {
    if draws.iter().any(|d| d.1 != 1.0) {
        Weighting::Weighted
    } else {
        Weighting::Unweighted
    }
}
