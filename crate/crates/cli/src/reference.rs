//! Sample specs bundled with the binary, addressed as `builtin:<name>`.

use std::path::Path;

use qoct_core::Sample;

use crate::error::{CliError, CliResult};
use crate::spec::{load_sample, SampleSpecFile};

pub const BUILTIN_PREFIX: &str = "builtin:";

pub const REFERENCE_SPECS: &[(&str, &str)] = &[
    ("mirror", include_str!("../reference/mirror.toml")),
    ("layer", include_str!("../reference/layer.toml")),
    ("glass-layer", include_str!("../reference/glass-layer.toml")),
    ("glass-layer-nominal", include_str!("../reference/glass-layer-nominal.toml")),
    ("coated-stack", include_str!("../reference/coated-stack.toml")),
    ("five-interface", include_str!("../reference/five-interface.toml")),
];

pub fn builtin(name: &str) -> CliResult<SampleSpecFile> {
    let (_, text) = REFERENCE_SPECS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| {
            let known: Vec<&str> = REFERENCE_SPECS.iter().map(|(n, _)| *n).collect();
            CliError::Validation(format!(
                "unknown builtin sample '{name}' (available: {})",
                known.join(", ")
            ))
        })?;
    SampleSpecFile::parse(text)
}

/// Resolves `builtin:<name>` or a file path.
pub fn resolve_sample(arg: &str) -> CliResult<(SampleSpecFile, Sample)> {
    if let Some(name) = arg.strip_prefix(BUILTIN_PREFIX) {
        let spec = builtin(name)?;
        let sample = spec.to_sample()?;
        Ok((spec, sample))
    } else {
        load_sample(Path::new(arg))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_reference_spec_parses() {
        for (name, _) in REFERENCE_SPECS {
            let spec = builtin(name).unwrap();
            assert_eq!(spec.name.as_deref(), Some(*name));
        }
    }

    #[test]
    fn five_interface_spec_has_nominal_distances() {
        let s = builtin("five-interface").unwrap().to_sample().unwrap();
        assert_eq!(s.n_interfaces(), 5);
        let d: Vec<f64> = s.segments().iter().map(|g| g.optical_path_um()).collect();
        for (got, want) in d.iter().zip([90.0, 110.0, 150.0, 250.0]) {
            assert!((got - want).abs() < 1e-9);
        }
        let r: Vec<f64> = s.interfaces().iter().map(|i| i.reflectance()).collect();
        for (got, want) in r.iter().zip([0.1, 0.1, 0.1, 0.5, 0.9]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn glass_layer_front_reflectivity() {
        let s = builtin("glass-layer").unwrap().to_sample().unwrap();
        assert!((s.interfaces()[0].reflectance() - 0.31).abs() < 1e-12);
        assert!((s.segments()[0].optical_path_um() - 1.52 * 185.0).abs() < 1.0);
    }
}
