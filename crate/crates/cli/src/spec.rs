//! Human-editable sample description files.

use std::path::Path;

use qoct_core::{Interface, Sample, Segment};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterfaceSpec {
    /// Intensity reflectivity in `[0, 1)`.
    #[serde(rename = "R")]
    pub reflectance: f64,
    #[serde(default = "plus_one")]
    pub sign: f64,
    #[serde(default)]
    pub film_kappa: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSpec {
    /// One-way optical path `c·τ'`, µm.
    pub optical_path_um: f64,
    #[serde(default)]
    pub bulk_kappa: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSpecFile {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub interfaces: Vec<InterfaceSpec>,
    #[serde(default)]
    pub segments: Vec<SegmentSpec>,
}

fn plus_one() -> f64 {
    1.0
}

impl SampleSpecFile {
    pub fn parse(text: &str) -> CliResult<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        if spec.schema_version != SCHEMA_VERSION {
            return Err(CliError::Validation(format!(
                "unsupported schema_version {} (this build reads {SCHEMA_VERSION})",
                spec.schema_version
            )));
        }
        spec.to_sample()?;
        Ok(spec)
    }

    /// Canonical text: the same spec always serialises to the same bytes.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec fields are always representable")
    }

    pub fn to_sample(&self) -> CliResult<Sample> {
        if self.interfaces.is_empty() {
            return Err(CliError::Validation("sample has no interfaces".into()));
        }
        let interfaces = self
            .interfaces
            .iter()
            .enumerate()
            .map(|(i, s)| {
                if s.sign != 1.0 && s.sign != -1.0 {
                    return Err(CliError::Validation(format!(
                        "interface {i}: sign must be +1 or -1, got {}",
                        s.sign
                    )));
                }
                Interface::from_reflectance(s.reflectance, s.sign, s.film_kappa)
                    .map_err(|e| CliError::Validation(format!("interface {i}: {e}")))
            })
            .collect::<CliResult<Vec<_>>>()?;
        let segments = self
            .segments
            .iter()
            .enumerate()
            .map(|(j, s)| {
                Segment::from_optical_path_um(s.optical_path_um, s.bulk_kappa)
                    .map_err(|e| CliError::Validation(format!("segment {j}: {e}")))
            })
            .collect::<CliResult<Vec<_>>>()?;
        Ok(Sample::new(interfaces, segments)?)
    }

    /// Spec for an existing sample; labels are left empty.
    pub fn from_sample(sample: &Sample, name: Option<String>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            name,
            interfaces: sample
                .interfaces()
                .iter()
                .map(|i| InterfaceSpec {
                    reflectance: i.reflectance(),
                    sign: if i.r_fwd() < 0.0 { -1.0 } else { 1.0 },
                    film_kappa: i.film_kappa(),
                    label: None,
                })
                .collect(),
            segments: sample
                .segments()
                .iter()
                .map(|s| SegmentSpec {
                    optical_path_um: s.optical_path_um(),
                    bulk_kappa: s.bulk_kappa(),
                    label: None,
                })
                .collect(),
        }
    }
}

pub fn load_sample(path: &Path) -> CliResult<(SampleSpecFile, Sample)> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let spec = SampleSpecFile::parse(&text)
        .map_err(|e| e.context(&format!("{}", path.display())))?;
    let sample = spec.to_sample()?;
    Ok((spec, sample))
}

pub fn save_sample(spec: &SampleSpecFile, path: &Path) -> CliResult<()> {
    std::fs::write(path, spec.to_toml()).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const LAYER: &str = "schema_version = 1\n\n[[interfaces]]\nR = 0.36\n\n[[interfaces]]\nR = 0.95\nsign = -1.0\n\n[[segments]]\noptical_path_um = 100.0\n";

    #[test]
    fn defaults_fill_sign_and_losses() {
        let spec = SampleSpecFile::parse(LAYER).unwrap();
        let s = spec.to_sample().unwrap();
        assert_eq!(s.interfaces()[0].r_fwd(), 0.6);
        assert!((s.interfaces()[1].r_fwd() + 0.95f64.sqrt()).abs() < 1e-15);
        assert_eq!(s.segments()[0].bulk_kappa(), 0.0);
    }

    #[test]
    fn canonical_text_is_a_fixed_point() {
        let once = SampleSpecFile::parse(LAYER).unwrap().to_toml();
        let twice = SampleSpecFile::parse(&once).unwrap().to_toml();
        assert_eq!(once, twice);
    }

    #[test]
    fn unknown_keys_report_their_line() {
        let err = SampleSpecFile::parse("schema_version = 1\n\n[[interfaces]]\nR = 0.3\nreflect = 2\n")
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("reflect"), "{msg}");
        assert!(msg.contains("line 5"), "{msg}");
    }

    #[test]
    fn invalid_specs_are_rejected() {
        for text in [
            "schema_version = 1\ninterfaces = []\n",
            "schema_version = 2\n[[interfaces]]\nR = 0.3\n",
            "schema_version = 1\n[[interfaces]]\nR = 1.0\n",
            "schema_version = 1\n[[interfaces]]\nR = 0.3\nfilm_kappa = -0.1\n",
            "schema_version = 1\n[[interfaces]]\nR = 0.3\nsign = 0.5\n",
            "schema_version = 1\n[[interfaces]]\nR = 0.3\n[[segments]]\noptical_path_um = 5.0\n",
        ] {
            assert!(SampleSpecFile::parse(text).is_err(), "{text}");
        }
    }
}
