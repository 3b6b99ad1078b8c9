//! Coincidence interferograms `C(τ)/Γ0` and their bookkeeping.

mod analytic;
mod labels;
mod noise;
mod numeric;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use analytic::{
    artifact_tuning_curve, closed_form_single_layer, closed_form_trace, pair_delay, pulsed_limit_trace,
    single_layer_coefficients, tuning_marks, visibilities, ArtifactRecord, TuningMarks,
    Visibilities,
};
pub use labels::{label_trace, Contribution, ContributionKind, FeatureGroup};
pub use noise::add_shot_noise;
pub use numeric::{coincidence_trace_numeric, NumericEngine, QuadratureSettings};

use crate::error::{QoctError, Result};
use crate::spectral::SpectralModel;
use crate::um_to_seconds;

/// Default delay step, µm of optical path.
pub const DEFAULT_STEP_UM: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EngineKind {
    NumericCw,
    Numeric2d,
    ClosedForm,
    Pulsed,
}

impl std::fmt::Display for EngineKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::NumericCw => "numeric-cw",
            Self::Numeric2d => "numeric-2d",
            Self::ClosedForm => "closed-form",
            Self::Pulsed => "pulsed",
        })
    }
}

impl std::str::FromStr for EngineKind {
    type Err = QoctError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "numeric-cw" => Ok(Self::NumericCw),
            "numeric-2d" => Ok(Self::Numeric2d),
            "closed-form" => Ok(Self::ClosedForm),
            "pulsed" => Ok(Self::Pulsed),
            other => Err(QoctError::Domain(format!("unknown engine '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureReport {
    pub fft_len: usize,
    pub antidiagonal_nodes: usize,
    pub diagonal_nodes: usize,
    pub oversample: usize,
    pub alias_period_um: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseMeta {
    pub mean_counts: f64,
    pub seed: u64,
}

/// Provenance of a trace.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TraceMeta {
    pub engine: Option<EngineKind>,
    pub sample_hash: Option<String>,
    pub spectral: Option<SpectralModel>,
    pub quadrature: Option<QuadratureReport>,
    pub noise: Option<NoiseMeta>,
    /// Free-form key/values carried through file I/O.
    pub extra: BTreeMap<String, String>,
}

/// A sampled, normalised coincidence trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interferogram {
    /// Delay grid as optical path `c·τ`, µm. Strictly increasing, uniform.
    pub delays_um: Vec<f64>,
    /// `C(τ)/Γ0`.
    pub counts: Vec<f64>,
    /// Background level `Γ0/N0`.
    pub gamma0: f64,
    pub meta: TraceMeta,
}

impl Interferogram {
    pub fn delays_seconds(&self) -> Vec<f64> {
        self.delays_um.iter().map(|&d| um_to_seconds(d)).collect()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Mean absolute difference of the normalised counts.
    pub fn mae(&self, other: &[f64]) -> f64 {
        mean_absolute_error(&self.counts, other)
    }

    /// Value at the grid point nearest `delay_um`.
    pub fn value_near(&self, delay_um: f64) -> Option<f64> {
        let idx = self
            .delays_um
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - delay_um).abs().total_cmp(&(b.1 - delay_um).abs()))?
            .0;
        Some(self.counts[idx])
    }
}

pub fn mean_absolute_error(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    if a.is_empty() {
        return 0.0;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64
}

/// `n` points from `start_um` in steps of `step_um`.
pub fn uniform_grid(start_um: f64, step_um: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| start_um + k as f64 * step_um).collect()
}

/// Start and step (µm) of a uniform, strictly increasing grid.
pub fn grid_spacing(delays_um: &[f64]) -> Result<(f64, f64)> {
    let Some(&start) = delays_um.first() else {
        return Err(QoctError::InvalidGrid("empty delay grid".into()));
    };
    if delays_um.iter().any(|d| !d.is_finite()) {
        return Err(QoctError::InvalidGrid("non-finite delay".into()));
    }
    if delays_um.len() == 1 {
        return Ok((start, DEFAULT_STEP_UM));
    }
    let n = delays_um.len();
    let step = (delays_um[n - 1] - start) / (n - 1) as f64;
    if step <= 0.0 {
        return Err(QoctError::InvalidGrid("delays must be strictly increasing".into()));
    }
    let tol = 1e-6 * step;
    for (k, w) in delays_um.windows(2).enumerate() {
        let d = w[1] - w[0];
        if d <= 0.0 {
            return Err(QoctError::InvalidGrid(format!(
                "delays must be strictly increasing (row {})",
                k + 1
            )));
        }
        if (d - step).abs() > tol {
            return Err(QoctError::InvalidGrid(format!(
                "non-uniform step {d} um at row {} (expected {step} um)",
                k + 1
            )));
        }
    }
    Ok((start, step))
}
