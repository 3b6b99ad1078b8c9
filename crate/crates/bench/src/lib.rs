//! Fixtures shared by the benchmarks.

use qoct_core::engine::uniform_grid;
use qoct_core::spectral::{AntidiagonalProfile, SpectralModel};
use qoct_core::{Interferogram, Sample};

pub fn cw_model() -> SpectralModel {
    SpectralModel::from_wavelengths(404.5, 800.0, 40.0, 1e6, AntidiagonalProfile::Gaussian)
        .expect("valid bandwidths")
}

/// Lossless layer, optical path 281.5 µm, fronted by an air/glass interface.
pub fn glass_layer() -> Sample {
    Sample::single_layer(-(0.31f64.sqrt()), 0.907f64.sqrt(), 281.5114).expect("valid layer")
}

pub fn five_interface() -> Sample {
    use qoct_core::{Interface, Segment};
    let interfaces = [0.1, 0.1, 0.1, 0.5, 0.9]
        .iter()
        .map(|&r| Interface::from_reflectance(r, 1.0, 0.0).expect("valid reflectance"))
        .collect();
    let segments = [90.0, 110.0, 150.0, 250.0]
        .iter()
        .map(|&d| Segment::from_optical_path_um(d, 0.0).expect("valid path"))
        .collect();
    Sample::new(interfaces, segments).expect("valid stack")
}

/// 1 µm grid from -50 µm covering every echo of `sample` to second order.
pub fn grid_for(sample: &Sample) -> Vec<f64> {
    let total: f64 = sample.segments().iter().map(|s| s.optical_path_um()).sum();
    uniform_grid(-50.0, 1.0, (2.0 * total + 150.0) as usize)
}

pub fn target(sample: &Sample) -> Interferogram {
    qoct_core::coincidence_trace_numeric(
        sample,
        &cw_model(),
        &grid_for(sample),
        &Default::default(),
    )
    .expect("trace fits default quadrature")
}
