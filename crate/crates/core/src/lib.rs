//! Quantum optical coherence tomography (QOCT) of lossy multilayer samples.
//!
//! The crate is organised bottom-up:
//!
//! - [`stack`]: wave-transfer matrices, the sample transfer function `H(ω)` and
//!   the reflection-path (interface/echo) expansion.
//! - [`spectral`]: the biphoton joint spectral intensity.
//! - [`engine`]: coincidence interferograms (numeric quadrature, closed form,
//!   pulsed limit), visibilities, artifact bookkeeping and shot noise.
//! - [`ga`]: the genetic-algorithm inverse solver and layer-count selection.
//!
//! Internally delays are seconds and frequencies rad/s. Everything that faces a
//! user (files, CLI) speaks optical path `c·τ` in µm, wavelengths in nm and
//! intensity reflectances `R`.

pub mod engine;
pub mod error;
pub mod ga;
pub mod spectral;
pub mod stack;

pub use engine::{
    add_shot_noise, artifact_tuning_curve, closed_form_single_layer, closed_form_trace,
    coincidence_trace_numeric, label_trace, pair_delay, pulsed_limit_trace,
    single_layer_coefficients, tuning_marks, visibilities, ArtifactRecord, EngineKind,
    FeatureGroup, Interferogram, NumericEngine, QuadratureSettings, TraceMeta, TuningMarks,
    Visibilities,
};
pub use error::{QoctError, Result};
pub use ga::{
    evolve, fitness, model_select, Chromosome, GaConfig, ModelSelectConfig, ParamKind,
    RetrievalResult, SearchSpace,
};
pub use spectral::{AntidiagonalProfile, SpectralModel};
pub use stack::{
    count_effective_parameters, enumerate_merged_paths, enumerate_paths, transfer_function, ComplexMatrix2, FeatureKind,
    FeatureList, Interface, PathFeature, Sample, Segment, DEFAULT_AMPLITUDE_FLOOR,
    DEFAULT_MAX_ORDER,
};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Optical path in µm to a delay in seconds.
#[inline]
pub fn um_to_seconds(um: f64) -> f64 {
    um * 1e-6 / SPEED_OF_LIGHT
}

/// Delay in seconds to optical path in µm.
#[inline]
pub fn seconds_to_um(seconds: f64) -> f64 {
    seconds * SPEED_OF_LIGHT * 1e6
}
