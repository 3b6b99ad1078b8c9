//! Numeric coincidence rate by quadrature over the joint spectrum.
//!
//! Nodes sit on a uniform antidiagonal lattice `x_m = (m - L/2)·Δx`, so the
//! transfer function is needed only on `ω0 + j·Δx/2` and is evaluated once
//! per frequency. With `Δx·Δτ_fft = 2π/L` the trapezoid sums for every delay
//! of the grid collapse into a single length-`L` FFT. The lattice spacing
//! sets the alias period `L·Δτ_fft` of the trapezoid rule; it is chosen to
//! exceed the delay grid plus the reach of the sample's echoes.
//!
//! In the CW limit the diagonal integral is exact (`ω1 + ω2 = 2ω0`). For a
//! finite pump bandwidth a diagonal trapezoid on a multiple of the same
//! lattice is added.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::{grid_spacing, EngineKind, Interferogram, QuadratureReport, TraceMeta};
use crate::error::{QoctError, Result};
use crate::spectral::SpectralModel;
use crate::stack::{transfer_on_lattice, Sample};
use crate::{seconds_to_um, um_to_seconds};

/// Traces switch to the exact CW reduction once `τ_d` exceeds the scan
/// span by this factor.
pub const CW_SPAN_FACTOR: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSettings {
    /// Minimum antidiagonal nodes inside the spectral support.
    pub antidiagonal_nodes: usize,
    /// Minimum diagonal nodes (finite pump bandwidth only).
    pub diagonal_nodes: usize,
    /// Gaussian support half-width in bandwidths.
    pub span_bandwidths: f64,
    /// Echo amplitude below which paths may alias.
    pub alias_tolerance: f64,
    pub max_fft_len: usize,
    /// Cap on diagonal × antidiagonal products for the 2-D rule.
    pub max_products: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            antidiagonal_nodes: 2048,
            diagonal_nodes: 64,
            span_bandwidths: 4.0,
            alias_tolerance: 1e-5,
            max_fft_len: 1 << 21,
            max_products: 400_000_000,
        }
    }
}

#[derive(Debug, Clone)]
enum Diagonal {
    Cw,
    Finite {
        /// Diagonal node spacing in lattice steps of `Δx`.
        stride: usize,
        /// Weights `h_s·d(s_i)` for `i = -half..=half`.
        weights: Vec<f64>,
    },
}

/// Reusable quadrature plan for one spectral model and delay grid.
#[derive(Clone)]
pub struct NumericEngine {
    model: SpectralModel,
    delays_um: Vec<f64>,
    n_points: usize,
    oversample: usize,
    fft_len: usize,
    dx: f64,
    /// Half-count `J` of active antidiagonal nodes around `m = L/2`.
    half_nodes: usize,
    /// `Δx·a(x_m)` for `m = L/2 - J ..= L/2 + J`.
    weights: Vec<f64>,
    /// `e^{-i x_m τ_start}` on the same nodes.
    pre_phase: Vec<Complex64>,
    fft: Arc<dyn Fft<f64>>,
    diagonal: Diagonal,
}

impl std::fmt::Debug for NumericEngine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NumericEngine")
            .field("n_points", &self.n_points)
            .field("fft_len", &self.fft_len)
            .field("oversample", &self.oversample)
            .field("half_nodes", &self.half_nodes)
            .finish()
    }
}

struct GridGeometry {
    tau_start: f64,
    tau_end: f64,
    tau_fft: f64,
    oversample: usize,
    n_points: usize,
    half_width: f64,
}

fn geometry(model: &SpectralModel, delays_um: &[f64], settings: &QuadratureSettings) -> Result<GridGeometry> {
    let (start_um, step_um) = grid_spacing(delays_um)?;
    let n_points = delays_um.len();
    let tau_start = um_to_seconds(start_um);
    let tau_step = um_to_seconds(step_um);
    let tau_end = tau_start + (n_points - 1) as f64 * tau_step;
    let half_width = model.antidiagonal_half_width(settings.span_bandwidths);
    // The support must fit inside one lattice period 2π/Δτ_fft.
    let oversample = (tau_step * 2.0 * half_width * 1.05 / (2.0 * PI)).floor() as usize + 1;
    Ok(GridGeometry {
        tau_start,
        tau_end,
        tau_fft: tau_step / oversample as f64,
        oversample,
        n_points,
        half_width,
    })
}

/// Smallest even 2^a·3^b·5^c ≥ n.
fn smooth_len(n: usize) -> usize {
    let mut m = n.max(2);
    loop {
        if m % 2 == 0 {
            let mut r = m;
            for p in [2, 3, 5] {
                while r % p == 0 {
                    r /= p;
                }
            }
            if r == 1 {
                return m;
            }
        }
        m += 1;
    }
}

impl NumericEngine {
    /// Plans a grid whose alias period clears the delay grid and every echo
    /// up to delay `reach` (seconds).
    pub fn for_reach(
        model: &SpectralModel,
        delays_um: &[f64],
        settings: &QuadratureSettings,
        reach: f64,
    ) -> Result<Self> {
        if !reach.is_finite() {
            return Err(QoctError::QuadratureResolution(
                "echoes never decay (lossless loop of unit gain)".into(),
            ));
        }
        let geo = geometry(model, delays_um, settings)?;
        let margin = 4.0 * model.tau_a();
        let period = (geo.tau_end + margin).max(reach + margin - geo.tau_start) + margin;
        let from_period = (period / geo.tau_fft).ceil();
        let from_nodes = (2.0 * PI * settings.antidiagonal_nodes as f64
            / (2.0 * geo.half_width * geo.tau_fft))
            .ceil();
        let from_grid = ((geo.n_points - 1) * geo.oversample + 1) as f64;
        let needed = from_period.max(from_nodes).max(from_grid);
        if needed > settings.max_fft_len as f64 {
            return Err(QoctError::QuadratureResolution(format!(
                "needs an FFT of {needed:.0} points (limit {}); alias period {:.1} um, \
                 lattice oversampling {}",
                settings.max_fft_len,
                seconds_to_um(period),
                geo.oversample
            )));
        }
        let fft_len = smooth_len(needed as usize);
        Self::build(model, delays_um, settings, geo, fft_len)
    }

    /// Plans with an explicit FFT length, e.g. to reproduce a recorded trace.
    pub fn with_fft_len(
        model: &SpectralModel,
        delays_um: &[f64],
        settings: &QuadratureSettings,
        fft_len: usize,
    ) -> Result<Self> {
        let geo = geometry(model, delays_um, settings)?;
        let min_len = (geo.n_points - 1) * geo.oversample + 1;
        if fft_len % 2 != 0 || fft_len < min_len || fft_len > settings.max_fft_len {
            return Err(QoctError::QuadratureResolution(format!(
                "FFT length {fft_len} cannot cover {} grid points at oversampling {}",
                geo.n_points, geo.oversample
            )));
        }
        Self::build(model, delays_um, settings, geo, fft_len)
    }

    fn build(
        model: &SpectralModel,
        delays_um: &[f64],
        settings: &QuadratureSettings,
        geo: GridGeometry,
        fft_len: usize,
    ) -> Result<Self> {
        let dx = 2.0 * PI / (fft_len as f64 * geo.tau_fft);
        let half_nodes = ((geo.half_width + 0.5 * dx) / dx).floor() as usize;
        if 2 * half_nodes + 1 >= fft_len {
            return Err(QoctError::QuadratureResolution(
                "spectral support does not fit the lattice".into(),
            ));
        }
        let weights: Vec<f64> = (-(half_nodes as i64)..=half_nodes as i64)
            .map(|j| node_weight(model, j as f64 * dx, dx, geo.half_width))
            .collect();
        let pre_phase = (-(half_nodes as i64)..=half_nodes as i64)
            .map(|j| Complex64::from_polar(1.0, -(j as f64 * dx) * geo.tau_start))
            .collect();

        let span = geo.tau_end - geo.tau_start;
        let diagonal = if model.tau_d() > CW_SPAN_FACTOR * span {
            Diagonal::Cw
        } else {
            let s_half = settings.span_bandwidths * model.omega_d;
            // The diagonal lattice must not alias within one FFT period.
            let period = fft_len as f64 * geo.tau_fft;
            let alias_step = 4.0 * PI / (period + 6.0 * model.tau_d());
            let resolution_step = 2.0 * s_half / settings.diagonal_nodes.max(2) as f64;
            let step = alias_step.min(resolution_step);
            let stride = ((step / dx).floor() as usize).max(1);
            let hs = stride as f64 * dx;
            let half = (s_half / hs).ceil() as usize;
            let products = (2 * half + 1) as f64 * (2 * half_nodes + 1) as f64;
            if products > settings.max_products as f64 {
                return Err(QoctError::QuadratureResolution(format!(
                    "finite pump bandwidth needs {products:.2e} node products (limit {:.2e})",
                    settings.max_products as f64
                )));
            }
            let weights = (-(half as i64)..=half as i64)
                .map(|i| hs * model.diagonal_density(i as f64 * hs))
                .collect();
            Diagonal::Finite { stride, weights }
        };

        let fft = FftPlanner::new().plan_fft_forward(fft_len);
        Ok(Self {
            model: *model,
            delays_um: delays_um.to_vec(),
            n_points: geo.n_points,
            oversample: geo.oversample,
            fft_len,
            dx,
            half_nodes,
            weights,
            pre_phase,
            fft,
            diagonal,
        })
    }

    /// Plans for fitting `target`: reuses its recorded FFT length when it
    /// still fits, otherwise assumes echoes up to four scan spans.
    pub fn for_target(
        model: &SpectralModel,
        target: &Interferogram,
        settings: &QuadratureSettings,
    ) -> Result<Self> {
        if let Some(q) = target.meta.quadrature {
            if let Ok(engine) = Self::with_fft_len(model, &target.delays_um, settings, q.fft_len) {
                return Ok(engine);
            }
        }
        let (start, step) = grid_spacing(&target.delays_um)?;
        let span = step * target.delays_um.len() as f64;
        Self::for_reach(model, &target.delays_um, settings, um_to_seconds(start + 4.0 * span))
    }

    pub fn model(&self) -> &SpectralModel {
        &self.model
    }

    pub fn fft_len(&self) -> usize {
        self.fft_len
    }

    pub fn is_cw(&self) -> bool {
        matches!(self.diagonal, Diagonal::Cw)
    }

    pub fn report(&self) -> QuadratureReport {
        let tau_fft = 2.0 * PI / (self.fft_len as f64 * self.dx);
        QuadratureReport {
            fft_len: self.fft_len,
            antidiagonal_nodes: 2 * self.half_nodes + 1,
            diagonal_nodes: match &self.diagonal {
                Diagonal::Cw => 1,
                Diagonal::Finite { weights, .. } => weights.len(),
            },
            oversample: self.oversample,
            alias_period_um: seconds_to_um(self.fft_len as f64 * tau_fft),
        }
    }

    /// Normalised counts `C(τ)/Γ0` on the grid, plus `Γ0/N0`.
    pub fn trace(&self, sample: &Sample) -> Result<(Vec<f64>, f64)> {
        let j_half = self.half_nodes;
        let mut buf = vec![Complex64::new(0.0, 0.0); self.fft_len];
        let mut gamma0 = 0.0;
        let centre = self.fft_len / 2;
        let omega0 = self.model.omega0;
        let half_step = 0.5 * self.dx;

        match &self.diagonal {
            Diagonal::Cw => {
                let h = transfer_on_lattice(
                    sample,
                    omega0 - j_half as f64 * half_step,
                    half_step,
                    2 * j_half + 1,
                )?;
                for (idx, (&w, &phase)) in self.weights.iter().zip(&self.pre_phase).enumerate() {
                    if w == 0.0 {
                        continue;
                    }
                    // Node x = (idx - J)·Δx: ω1 = ω0 + x/2 at h[idx], ω2 = ω0 - x/2.
                    let h1 = h[idx];
                    let h2 = h[2 * j_half - idx];
                    gamma0 += w * (h1.norm_sqr() + h2.norm_sqr());
                    buf[centre - j_half + idx] = h2 * h1.conj() * (w * phase);
                }
            }
            Diagonal::Finite { stride, weights: dweights } => {
                let s_half = (dweights.len() - 1) / 2;
                let offset = s_half * stride + j_half;
                let h = transfer_on_lattice(
                    sample,
                    omega0 - offset as f64 * half_step,
                    half_step,
                    2 * offset + 1,
                )?;
                for (idx, (&w, &phase)) in self.weights.iter().zip(&self.pre_phase).enumerate() {
                    if w == 0.0 {
                        continue;
                    }
                    let j = idx as i64 - j_half as i64;
                    let mut acc = Complex64::new(0.0, 0.0);
                    let mut g0 = 0.0;
                    for (i, &v) in dweights.iter().enumerate() {
                        let base = (i as i64 - s_half as i64) * *stride as i64 + offset as i64;
                        let h1 = h[(base + j) as usize];
                        let h2 = h[(base - j) as usize];
                        acc += h2 * h1.conj() * v;
                        g0 += v * (h1.norm_sqr() + h2.norm_sqr());
                    }
                    gamma0 += w * g0;
                    buf[centre - j_half + idx] = acc * (w * phase);
                }
            }
        }

        if gamma0 <= 0.0 || !gamma0.is_finite() {
            // Nothing reflects: no coincidences to normalise, flat trace.
            return Ok((vec![1.0; self.n_points], 0.0));
        }
        self.fft.process(&mut buf);
        let counts = (0..self.n_points)
            .map(|k| {
                let q = k * self.oversample;
                let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
                (1.0 - 2.0 * sign * buf[q].re / gamma0).max(0.0)
            })
            .collect();
        // Both sums carry the N0/4 prefactor; Γ0/N0 = gamma0/4.
        Ok((counts, 0.25 * gamma0))
    }

    pub fn interferogram(&self, sample: &Sample) -> Result<Interferogram> {
        let (counts, gamma0) = self.trace(sample)?;
        Ok(Interferogram {
            delays_um: self.delays_um.clone(),
            counts,
            gamma0,
            meta: TraceMeta {
                engine: Some(if self.is_cw() {
                    EngineKind::NumericCw
                } else {
                    EngineKind::Numeric2d
                }),
                sample_hash: Some(sample.content_hash()),
                spectral: Some(self.model),
                quadrature: Some(self.report()),
                ..TraceMeta::default()
            },
        })
    }
}

/// Trapezoid weight of the antidiagonal node at `x`. Top-hat edges get the
/// fraction of the cell that lies inside the support.
fn node_weight(model: &SpectralModel, x: f64, dx: f64, half_width: f64) -> f64 {
    use crate::spectral::AntidiagonalProfile::*;
    match model.profile {
        Gaussian => {
            if x.abs() <= half_width {
                dx * model.antidiagonal_density(x)
            } else {
                0.0
            }
        }
        Rectangular => {
            let lo = (x - 0.5 * dx).max(-half_width);
            let hi = (x + 0.5 * dx).min(half_width);
            if hi > lo {
                (hi - lo) / model.omega_a
            } else {
                0.0
            }
        }
    }
}

/// `C(τ)/Γ0` for `sample` by full spectral quadrature.
pub fn coincidence_trace_numeric(
    sample: &Sample,
    model: &SpectralModel,
    delays_um: &[f64],
    settings: &QuadratureSettings,
) -> Result<Interferogram> {
    let reach = sample.echo_reach(settings.alias_tolerance);
    NumericEngine::for_reach(model, delays_um, settings, reach)?.interferogram(sample)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::uniform_grid;
    use crate::spectral::AntidiagonalProfile;

    fn cw_model() -> SpectralModel {
        SpectralModel::from_wavelengths(404.5, 800.0, 40.0, 2e5, AntidiagonalProfile::Gaussian)
            .unwrap()
    }

    #[test]
    fn smooth_lengths() {
        assert_eq!(smooth_len(1), 2);
        assert_eq!(smooth_len(7), 8);
        assert_eq!(smooth_len(2049), 2160);
        assert_eq!(smooth_len(3000), 3000);
    }

    #[test]
    fn mirror_gives_full_visibility_dip() {
        let model = cw_model();
        let grid = uniform_grid(-30.0, 1.0, 61);
        let trace = coincidence_trace_numeric(
            &Sample::single_interface(0.6).unwrap(),
            &model,
            &grid,
            &QuadratureSettings::default(),
        )
        .unwrap();
        assert!(trace.value_near(0.0).unwrap() < 1e-10);
        for (&d, &c) in trace.delays_um.iter().zip(&trace.counts) {
            let expected = 1.0 - model.dip_shape(um_to_seconds(d));
            assert!((c - expected).abs() < 1e-9, "{d}: {c} vs {expected}");
        }
        assert!((trace.gamma0 - 0.18).abs() < 1e-9);
        assert_eq!(trace.meta.engine, Some(EngineKind::NumericCw));
    }

    #[test]
    fn transparent_sample_is_flat() {
        let sample = Sample::single_layer(0.0, 0.0, 50.0).unwrap();
        let grid = uniform_grid(0.0, 1.0, 20);
        let t = coincidence_trace_numeric(&sample, &cw_model(), &grid, &QuadratureSettings::default())
            .unwrap();
        assert!(t.counts.iter().all(|&c| c == 1.0));
        assert_eq!(t.gamma0, 0.0);
    }

    #[test]
    fn oversizes_are_rejected() {
        let sample = Sample::single_layer(0.6, 0.95f64.sqrt(), 100.0).unwrap();
        let grid = uniform_grid(0.0, 1.0, 500);
        let tiny = QuadratureSettings {
            max_fft_len: 1024,
            ..QuadratureSettings::default()
        };
        assert!(matches!(
            coincidence_trace_numeric(&sample, &cw_model(), &grid, &tiny),
            Err(QoctError::QuadratureResolution(_))
        ));
    }

    #[test]
    fn coarse_grid_is_oversampled() {
        let model = cw_model();
        let grid = uniform_grid(-40.0, 4.0, 21);
        let engine = NumericEngine::for_reach(&model, &grid, &QuadratureSettings::default(), 0.0)
            .unwrap();
        assert!(engine.oversample > 1);
        let t = engine.interferogram(&Sample::single_interface(0.3).unwrap()).unwrap();
        for (&d, &c) in t.delays_um.iter().zip(&t.counts) {
            assert!((c - (1.0 - model.dip_shape(um_to_seconds(d)))).abs() < 1e-9);
        }
    }

    #[test]
    fn explicit_fft_len_reproduces_plan() {
        let model = cw_model();
        let grid = uniform_grid(-20.0, 1.0, 300);
        let sample = Sample::single_layer(0.5, 0.7, 80.0).unwrap();
        let planned = coincidence_trace_numeric(&sample, &model, &grid, &QuadratureSettings::default())
            .unwrap();
        let len = planned.meta.quadrature.unwrap().fft_len;
        let again = NumericEngine::with_fft_len(&model, &grid, &QuadratureSettings::default(), len)
            .unwrap()
            .interferogram(&sample)
            .unwrap();
        assert_eq!(planned.counts, again.counts);
        assert!(NumericEngine::with_fft_len(&model, &grid, &QuadratureSettings::default(), 100).is_err());
    }
}
