//! Closed-form traces from a list of reflection paths.
//!
//! With `H(ω) = Σ_k r̃_k e^{-iω d_k}` the double integral separates into
//! dips at `d_k`, cross terms at `(d_k + d_l)/2`, and a background
//! `Γ0/N0 = ½Σ r̃_k² + Σ_{k<l} r̃_k r̃_l·coh(Δ)·damp(Δ)·cos(ω0Δ)`, with
//! `Δ = d_l - d_k`, `coh` the antidiagonal overlap at `Δ/2` and `damp` the
//! pump-bandwidth factor.

use serde::{Deserialize, Serialize};

use super::{EngineKind, Interferogram, TraceMeta};
use crate::error::{QoctError, Result};
use crate::spectral::{omega0_for_pump, AntidiagonalProfile, SpectralModel};
use crate::stack::{enumerate_merged_paths, FeatureList, Sample, DEFAULT_AMPLITUDE_FLOOR, DEFAULT_MAX_ORDER};
use crate::{seconds_to_um, um_to_seconds, SPEED_OF_LIGHT};

/// Cross-interference term between two paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArtifactRecord {
    /// Feature indices `(k, l)` with `k < l`.
    pub source_pair: (usize, usize),
    /// Midpoint delay, seconds.
    pub position: f64,
    /// Signed `V_kl`; positive values are dips.
    pub visibility: f64,
    /// Pump-bandwidth factor `exp[-½(Δ/τ_d)²]`.
    pub damping: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Visibilities {
    /// `V_k`, one per feature.
    pub dips: Vec<f64>,
    pub artifacts: Vec<ArtifactRecord>,
    /// `Γ0/N0`.
    pub gamma0: f64,
}

impl Visibilities {
    pub fn max_dip(&self) -> f64 {
        self.dips.iter().copied().fold(0.0, f64::max)
    }

    pub fn artifact(&self, k: usize, l: usize) -> Option<&ArtifactRecord> {
        let key = (k.min(l), k.max(l));
        self.artifacts.iter().find(|a| a.source_pair == key)
    }
}

/// Dip and artifact visibilities of `features` under `model`.
pub fn visibilities(features: &FeatureList, model: &SpectralModel) -> Visibilities {
    let f = features.features();
    let mut gamma0: f64 = 0.5 * f.iter().map(|p| p.amplitude * p.amplitude).sum::<f64>();
    let mut raw = Vec::with_capacity(f.len() * f.len().saturating_sub(1) / 2);
    for k in 0..f.len() {
        for l in (k + 1)..f.len() {
            let delta = f[l].delay - f[k].delay;
            let damping = model.diagonal_damping(delta);
            let product = f[k].amplitude * f[l].amplitude * damping * (model.omega0 * delta).cos();
            gamma0 += product * model.antidiagonal_coherence(delta);
            raw.push(((k, l), 0.5 * (f[k].delay + f[l].delay), product, damping));
        }
    }
    if gamma0 <= 0.0 {
        return Visibilities {
            dips: vec![0.0; f.len()],
            artifacts: Vec::new(),
            gamma0: 0.0,
        };
    }
    let dips = f
        .iter()
        .map(|p| 0.5 * p.amplitude * p.amplitude / gamma0)
        .collect();
    let artifacts = raw
        .into_iter()
        .map(|(source_pair, position, product, damping)| ArtifactRecord {
            source_pair,
            position,
            visibility: product / gamma0,
            damping,
        })
        .collect();
    Visibilities {
        dips,
        artifacts,
        gamma0,
    }
}

fn evaluate(
    features: &FeatureList,
    vis: &Visibilities,
    model: &SpectralModel,
    delays_um: &[f64],
) -> Vec<f64> {
    delays_um
        .iter()
        .map(|&d| {
            let tau = um_to_seconds(d);
            let mut c = 1.0;
            for (p, v) in features.iter().zip(&vis.dips) {
                c -= v * model.dip_shape(tau - p.delay);
            }
            for a in &vis.artifacts {
                c -= a.visibility * model.dip_shape(tau - a.position);
            }
            c
        })
        .collect()
}

fn check_grid(delays_um: &[f64]) -> Result<()> {
    super::grid_spacing(delays_um).map(|_| ())
}

fn closed_meta(engine: EngineKind, model: &SpectralModel) -> TraceMeta {
    TraceMeta {
        engine: Some(engine),
        spectral: Some(*model),
        ..TraceMeta::default()
    }
}

/// Closed-form trace for an arbitrary path list; exact when `features`
/// holds the full series.
pub fn closed_form_trace(
    features: &FeatureList,
    model: &SpectralModel,
    delays_um: &[f64],
) -> Result<Interferogram> {
    if features.is_empty() {
        return Err(QoctError::EmptyFeatures);
    }
    check_grid(delays_um)?;
    let vis = visibilities(features, model);
    if vis.gamma0 == 0.0 {
        return Ok(Interferogram {
            delays_um: delays_um.to_vec(),
            counts: vec![1.0; delays_um.len()],
            gamma0: 0.0,
            meta: closed_meta(EngineKind::ClosedForm, model),
        });
    }
    Ok(Interferogram {
        delays_um: delays_um.to_vec(),
        counts: evaluate(features, &vis, model, delays_um),
        gamma0: vis.gamma0,
        meta: closed_meta(EngineKind::ClosedForm, model),
    })
}

/// Single-layer closed form with `r̃_k` at delays `k·round_trip`
/// (seconds), truncated after `n_terms` coefficients.
pub fn closed_form_single_layer(
    r_tilde: &[f64],
    round_trip: f64,
    model: &SpectralModel,
    delays_um: &[f64],
    n_terms: usize,
) -> Result<Interferogram> {
    if model.profile != AntidiagonalProfile::Gaussian {
        return Err(QoctError::UnsupportedProfile(
            "the closed form assumes a Gaussian joint spectrum; use the numeric engine".into(),
        ));
    }
    if n_terms == 0 {
        return Err(QoctError::Domain("n_terms must be >= 1".into()));
    }
    if !(round_trip.is_finite() && round_trip > 0.0) {
        return Err(QoctError::Domain(format!(
            "round-trip delay must be > 0, got {round_trip:e}"
        )));
    }
    let pairs: Vec<(f64, f64)> = r_tilde
        .iter()
        .take(n_terms)
        .enumerate()
        .map(|(k, &r)| (k as f64 * round_trip, r))
        .collect();
    closed_form_trace(&FeatureList::from_pairs(&pairs), model, delays_um)
}

/// Pulsed-pump limit: dips only, `V_k = r̃_k²/Σ r̃_j²`.
pub fn pulsed_limit_trace(
    features: &FeatureList,
    model: &SpectralModel,
    delays_um: &[f64],
) -> Result<Interferogram> {
    if features.is_empty() {
        return Err(QoctError::EmptyFeatures);
    }
    check_grid(delays_um)?;
    let total: f64 = features.iter().map(|p| p.amplitude * p.amplitude).sum();
    let counts = if total == 0.0 {
        vec![1.0; delays_um.len()]
    } else {
        delays_um
            .iter()
            .map(|&d| {
                let tau = um_to_seconds(d);
                1.0 - features
                    .iter()
                    .map(|p| p.amplitude * p.amplitude / total * model.dip_shape(tau - p.delay))
                    .sum::<f64>()
            })
            .collect()
    };
    Ok(Interferogram {
        delays_um: delays_um.to_vec(),
        counts,
        gamma0: 0.5 * total,
        meta: closed_meta(EngineKind::Pulsed, model),
    })
}

/// `r̃_0 = r01`, `r̃_k = (-r01)^{k-1}·r12^k·(1 - r01²)` for `k < n`.
pub fn single_layer_coefficients(r01: f64, r12: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    out.push(r01);
    let mut c = r12 * (1.0 - r01 * r01);
    for _ in 1..n {
        out.push(c);
        c *= -r01 * r12;
    }
    out
}

/// `cos(ω0(λp)·ΔT)` over pump wavelengths for the features at `pair`
/// (indices into the merged path enumeration of `sample`).
pub fn artifact_tuning_curve(
    sample: &Sample,
    pair: (usize, usize),
    pump_nm: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let features = enumerate_merged_paths(sample, DEFAULT_MAX_ORDER, DEFAULT_AMPLITUDE_FLOOR);
    let delta = pair_delay(&features, pair)?;
    pump_nm
        .iter()
        .map(|&nm| {
            if !(nm.is_finite() && nm > 0.0) {
                return Err(QoctError::Domain(format!("pump wavelength must be > 0, got {nm}")));
            }
            Ok((nm, (omega0_for_pump(nm) * delta).cos()))
        })
        .collect()
}

/// Delay difference `d_l - d_k` (seconds) of two features.
pub fn pair_delay(features: &FeatureList, (k, l): (usize, usize)) -> Result<f64> {
    let n = features.len();
    let (Some(a), Some(b)) = (features.get(k), features.get(l)) else {
        return Err(QoctError::Domain(format!(
            "feature pair ({k}, {l}) out of range for {n} features"
        )));
    };
    let delta = b.delay - a.delay;
    if k == l || delta == 0.0 {
        return Err(QoctError::DegeneratePair(k, l));
    }
    Ok(delta)
}

/// Special pump wavelengths of a tuning curve, nm, ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningMarks {
    /// `cos = 0`: artifact suppressed.
    pub zeros: Vec<f64>,
    /// `cos = -1`: maximal peak artifact.
    pub minima: Vec<f64>,
    /// `cos = +1`: maximal dip artifact.
    pub maxima: Vec<f64>,
    /// Local period `2λ²/(c|ΔT|)` at the range centre, nm.
    pub period_nm: f64,
}

/// Exact suppression and extremum wavelengths in `[lo_nm, hi_nm]` for a
/// delay difference `delta` (seconds). `cos(πcΔ/λ)` crosses `m·π/2` at
/// `λ = 2c|Δ|/m`.
pub fn tuning_marks(delta: f64, lo_nm: f64, hi_nm: f64) -> Result<TuningMarks> {
    if delta == 0.0 || !delta.is_finite() {
        return Err(QoctError::DegeneratePair(0, 0));
    }
    if !(lo_nm > 0.0 && hi_nm > lo_nm) {
        return Err(QoctError::Domain(format!(
            "pump range must satisfy 0 < lo < hi, got {lo_nm}..{hi_nm}"
        )));
    }
    let path_nm = 2.0 * SPEED_OF_LIGHT * delta.abs() * 1e9;
    let m_lo = (path_nm / hi_nm).ceil() as u64;
    let m_hi = (path_nm / lo_nm).floor() as u64;
    let (mut zeros, mut minima, mut maxima) = (Vec::new(), Vec::new(), Vec::new());
    for m in (m_lo..=m_hi).rev() {
        let nm = path_nm / m as f64;
        match m % 4 {
            1 | 3 => zeros.push(nm),
            2 => minima.push(nm),
            _ => maxima.push(nm),
        }
    }
    let centre = 0.5 * (lo_nm + hi_nm);
    Ok(TuningMarks {
        zeros,
        minima,
        maxima,
        period_nm: 2.0 * centre * centre / (seconds_to_um(delta.abs()) * 1e3),
    })
}
