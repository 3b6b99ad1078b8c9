//! Parameter space and binary chromosomes.

use serde::{Deserialize, Serialize};

use crate::error::{QoctError, Result};
use crate::stack::{count_effective_parameters, Interface, Sample, Segment};

pub const DEFAULT_BITS: u32 = 16;
pub const DEFAULT_DISTANCE_UM: (f64, f64) = (5.0, 400.0);
pub const DEFAULT_REFLECTANCE: (f64, f64) = (0.0, 0.99);
pub const DEFAULT_KAPPA: (f64, f64) = (0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "index")]
pub enum ParamKind {
    /// One-way optical path of a segment, µm.
    Distance(usize),
    /// Intensity reflectance of an interface.
    Reflectance(usize),
    BulkKappa(usize),
    FilmKappa(usize),
}

impl ParamKind {
    /// `d1`, `R3`, `kb2`, `kf1`: 1-based names.
    pub fn name(&self) -> String {
        match *self {
            Self::Distance(i) => format!("d{}", i + 1),
            Self::Reflectance(i) => format!("R{}", i + 1),
            Self::BulkKappa(i) => format!("kb{}", i + 1),
            Self::FilmKappa(i) => format!("kf{}", i + 1),
        }
    }

    pub fn unit(&self) -> &'static str {
        match self {
            Self::Distance(_) => "um",
            _ => "",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub kind: ParamKind,
    pub lower: f64,
    pub upper: f64,
    /// Pinned value; `None` means searched.
    pub fixed: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    n_interfaces: usize,
    params: Vec<ParamSpec>,
    /// Sign of each amplitude reflectivity.
    signs: Vec<f64>,
    bits_per_parameter: u32,
}

/// Bit string, Gray-coded per parameter, in declared parameter order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Chromosome {
    pub bits: Vec<bool>,
}

impl Chromosome {
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

fn to_gray(k: u64) -> u64 {
    k ^ (k >> 1)
}

fn from_gray(mut g: u64) -> u64 {
    let mut shift = 1;
    while shift < 64 {
        g ^= g >> shift;
        shift <<= 1;
    }
    g
}

impl SearchSpace {
    /// Distances and reflectances free within default bounds; losses pinned
    /// at zero; all signs positive.
    pub fn new(n_interfaces: usize) -> Result<Self> {
        if n_interfaces == 0 {
            return Err(QoctError::InvalidSearchSpace("need at least one interface".into()));
        }
        let n = n_interfaces;
        let mut params = Vec::with_capacity(4 * n);
        for i in 0..n - 1 {
            params.push(ParamSpec {
                kind: ParamKind::Distance(i),
                lower: DEFAULT_DISTANCE_UM.0,
                upper: DEFAULT_DISTANCE_UM.1,
                fixed: None,
            });
        }
        for i in 0..n {
            params.push(ParamSpec {
                kind: ParamKind::Reflectance(i),
                lower: DEFAULT_REFLECTANCE.0,
                upper: DEFAULT_REFLECTANCE.1,
                fixed: None,
            });
        }
        for i in 0..n - 1 {
            params.push(ParamSpec {
                kind: ParamKind::BulkKappa(i),
                lower: DEFAULT_KAPPA.0,
                upper: DEFAULT_KAPPA.1,
                fixed: Some(0.0),
            });
        }
        for i in 0..n {
            params.push(ParamSpec {
                kind: ParamKind::FilmKappa(i),
                lower: DEFAULT_KAPPA.0,
                upper: DEFAULT_KAPPA.1,
                fixed: Some(0.0),
            });
        }
        Ok(Self {
            n_interfaces,
            params,
            signs: vec![1.0; n],
            bits_per_parameter: DEFAULT_BITS,
        })
    }

    /// Pins the first `fixed_reflectances.len()` reflectances (at most
    /// `N - 1`), leaving the rest of the stack free.
    pub fn leading_fixed(n_interfaces: usize, fixed_reflectances: &[f64]) -> Result<Self> {
        if fixed_reflectances.len() >= n_interfaces {
            return Err(QoctError::InvalidSearchSpace(format!(
                "{} fixed reflectances leave nothing free on {n_interfaces} interfaces",
                fixed_reflectances.len()
            )));
        }
        let mut space = Self::new(n_interfaces)?;
        for (i, &r) in fixed_reflectances.iter().enumerate() {
            space = space.fix(&format!("R{}", i + 1), r)?;
        }
        Ok(space)
    }

    fn index_of(&self, name: &str) -> Result<usize> {
        self.params
            .iter()
            .position(|p| p.kind.name() == name)
            .ok_or_else(|| {
                QoctError::InvalidSearchSpace(format!(
                    "unknown parameter '{name}' for {} interfaces",
                    self.n_interfaces
                ))
            })
    }

    /// Pins `name` to `value`, widening its bounds if needed.
    pub fn fix(mut self, name: &str, value: f64) -> Result<Self> {
        let i = self.index_of(name)?;
        if !value.is_finite() {
            return Err(QoctError::InvalidSearchSpace(format!("{name} = {value} is not finite")));
        }
        let p = &mut self.params[i];
        p.lower = p.lower.min(value);
        p.upper = p.upper.max(value);
        p.fixed = Some(value);
        Ok(self)
    }

    /// Sets bounds and frees `name`.
    pub fn bounds(mut self, name: &str, lower: f64, upper: f64) -> Result<Self> {
        let i = self.index_of(name)?;
        if !(lower.is_finite() && upper.is_finite() && lower < upper) {
            return Err(QoctError::InvalidSearchSpace(format!(
                "bounds for {name} must satisfy lower < upper, got {lower}:{upper}"
            )));
        }
        let p = &mut self.params[i];
        p.lower = lower;
        p.upper = upper;
        p.fixed = None;
        Ok(self)
    }

    /// Frees `name` within its current bounds.
    pub fn free(mut self, name: &str) -> Result<Self> {
        let i = self.index_of(name)?;
        self.params[i].fixed = None;
        Ok(self)
    }

    pub fn with_signs(mut self, signs: &[f64]) -> Result<Self> {
        if signs.len() != self.n_interfaces || signs.iter().any(|s| s.abs() != 1.0) {
            return Err(QoctError::InvalidSearchSpace(format!(
                "need {} signs of +1 or -1",
                self.n_interfaces
            )));
        }
        self.signs = signs.to_vec();
        Ok(self)
    }

    pub fn with_bits(mut self, bits: u32) -> Result<Self> {
        if !(1..=52).contains(&bits) {
            return Err(QoctError::InvalidSearchSpace(format!(
                "bits per parameter must be in 1..=52, got {bits}"
            )));
        }
        self.bits_per_parameter = bits;
        Ok(self)
    }

    pub fn n_interfaces(&self) -> usize {
        self.n_interfaces
    }

    pub fn bits_per_parameter(&self) -> u32 {
        self.bits_per_parameter
    }

    pub fn params(&self) -> &[ParamSpec] {
        &self.params
    }

    pub fn signs(&self) -> &[f64] {
        &self.signs
    }

    pub fn names(&self) -> Vec<String> {
        self.params.iter().map(|p| p.kind.name()).collect()
    }

    pub fn free_params(&self) -> impl Iterator<Item = &ParamSpec> {
        self.params.iter().filter(|p| p.fixed.is_none())
    }

    pub fn n_free(&self) -> usize {
        self.free_params().count()
    }

    pub fn chromosome_len(&self) -> usize {
        self.n_free() * self.bits_per_parameter as usize
    }

    fn levels(&self) -> u64 {
        (1u64 << self.bits_per_parameter) - 1
    }

    /// Quantisation step of each free parameter.
    pub fn steps(&self) -> Vec<f64> {
        let levels = self.levels() as f64;
        self.free_params().map(|p| (p.upper - p.lower) / levels).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let limit = count_effective_parameters(self.n_interfaces as i64)? as usize;
        if self.n_free() > limit {
            return Err(QoctError::InvalidSearchSpace(format!(
                "{} free parameters exceed the {limit} identifiable ones of {} interfaces",
                self.n_free(),
                self.n_interfaces
            )));
        }
        if self.n_free() == 0 {
            return Err(QoctError::InvalidSearchSpace("no free parameters".into()));
        }
        for p in &self.params {
            let name = p.kind.name();
            if !(p.lower < p.upper) {
                return Err(QoctError::InvalidSearchSpace(format!(
                    "bounds for {name} must satisfy lower < upper"
                )));
            }
            if let Some(v) = p.fixed {
                if v < p.lower || v > p.upper {
                    return Err(QoctError::OutOfBounds {
                        name,
                        value: v,
                        lower: p.lower,
                        upper: p.upper,
                    });
                }
            }
        }
        Ok(())
    }

    /// Full parameter vector (declared order) from the free values.
    pub fn expand(&self, free: &[f64]) -> Vec<f64> {
        let mut it = free.iter();
        self.params
            .iter()
            .map(|p| p.fixed.unwrap_or_else(|| *it.next().expect("free value count")))
            .collect()
    }

    /// Builds the stack from a full parameter vector.
    pub fn build_sample(&self, full: &[f64]) -> Result<Sample> {
        let n = self.n_interfaces;
        let mut distance = vec![0.0; n - 1];
        let mut refl = vec![0.0; n];
        let mut kb = vec![0.0; n - 1];
        let mut kf = vec![0.0; n];
        for (p, &v) in self.params.iter().zip(full) {
            match p.kind {
                ParamKind::Distance(i) => distance[i] = v,
                ParamKind::Reflectance(i) => refl[i] = v,
                ParamKind::BulkKappa(i) => kb[i] = v,
                ParamKind::FilmKappa(i) => kf[i] = v,
            }
        }
        let interfaces = (0..n)
            .map(|i| Interface::from_reflectance(refl[i], self.signs[i], kf[i]))
            .collect::<Result<Vec<_>>>()?;
        let segments = (0..n - 1)
            .map(|i| Segment::from_optical_path_um(distance[i], kb[i]))
            .collect::<Result<Vec<_>>>()?;
        Sample::new(interfaces, segments)
    }

    /// Full parameter vector describing `sample` (fixed entries included).
    pub fn parameters_of(&self, sample: &Sample) -> Result<Vec<f64>> {
        if sample.n_interfaces() != self.n_interfaces {
            return Err(QoctError::InvalidSearchSpace(format!(
                "sample has {} interfaces, space expects {}",
                sample.n_interfaces(),
                self.n_interfaces
            )));
        }
        Ok(self
            .params
            .iter()
            .map(|p| match p.kind {
                ParamKind::Distance(i) => sample.segments()[i].optical_path_um(),
                ParamKind::Reflectance(i) => sample.interfaces()[i].reflectance(),
                ParamKind::BulkKappa(i) => sample.segments()[i].bulk_kappa(),
                ParamKind::FilmKappa(i) => sample.interfaces()[i].film_kappa(),
            })
            .collect())
    }

    /// Quantises free values onto the Gray-coded bit string.
    pub fn encode(&self, free: &[f64]) -> Result<Chromosome> {
        if free.len() != self.n_free() {
            return Err(QoctError::InvalidSearchSpace(format!(
                "expected {} free values, got {}",
                self.n_free(),
                free.len()
            )));
        }
        let b = self.bits_per_parameter;
        let levels = self.levels();
        let mut bits = Vec::with_capacity(self.chromosome_len());
        for (p, &x) in self.free_params().zip(free) {
            if !(x >= p.lower && x <= p.upper) {
                return Err(QoctError::OutOfBounds {
                    name: p.kind.name(),
                    value: x,
                    lower: p.lower,
                    upper: p.upper,
                });
            }
            let k = ((x - p.lower) / (p.upper - p.lower) * levels as f64).round() as u64;
            let g = to_gray(k.min(levels));
            bits.extend((0..b).rev().map(|s| (g >> s) & 1 == 1));
        }
        Ok(Chromosome { bits })
    }

    /// Free values encoded by `c`.
    pub fn decode(&self, c: &Chromosome) -> Vec<f64> {
        let b = self.bits_per_parameter as usize;
        let levels = self.levels() as f64;
        self.free_params()
            .zip(c.bits.chunks(b))
            .map(|(p, field)| {
                let g = field.iter().fold(0u64, |acc, &bit| (acc << 1) | bit as u64);
                p.lower + from_gray(g) as f64 / levels * (p.upper - p.lower)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gray_round_trip() {
        for k in 0..5000u64 {
            assert_eq!(from_gray(to_gray(k)), k);
            assert_eq!((to_gray(k) ^ to_gray(k + 1)).count_ones(), 1);
        }
    }

    #[test]
    fn bounds_map_to_extreme_codes() {
        let space = SearchSpace::leading_fixed(2, &[0.31]).unwrap();
        assert_eq!(space.names()[..3], ["d1", "R1", "R2"]);
        assert_eq!(space.n_free(), 2);
        let lo = space.encode(&[5.0, 0.0]).unwrap();
        assert!(lo.bits.iter().all(|&b| !b));
        let hi = space.encode(&[400.0, 0.99]).unwrap();
        let g = to_gray(0xffff);
        let field: u64 = hi.bits[..16].iter().fold(0, |a, &b| (a << 1) | b as u64);
        assert_eq!(field, g);
        assert_eq!(space.decode(&hi), vec![400.0, 0.99]);
    }

    #[test]
    fn out_of_bounds_is_rejected() {
        let space = SearchSpace::new(2).unwrap();
        assert!(matches!(
            space.encode(&[401.0, 0.1, 0.1]),
            Err(QoctError::OutOfBounds { .. })
        ));
    }

    #[test]
    fn free_count_is_capped() {
        let mut space = SearchSpace::new(1).unwrap();
        assert!(space.validate().is_ok());
        space = space.free("kf1").unwrap();
        assert!(space.validate().is_err());
        assert!(SearchSpace::new(2).unwrap().bounds("kb1", 0.0, 0.5).unwrap().validate().is_ok());
    }

    #[test]
    fn sample_round_trip() {
        let space = SearchSpace::new(3).unwrap();
        let sample = space.build_sample(&space.expand(&[100.0, 2.0, 0.1, 0.2, 0.9])).unwrap();
        let back = space.parameters_of(&sample).unwrap();
        let expected = space.expand(&[100.0, 2.0, 0.1, 0.2, 0.9]);
        for (a, b) in back.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(space.build_sample(&space.expand(&[100.0, 0.0, 0.1, 0.2, 0.9])).is_err());
    }

    #[test]
    fn unknown_names_fail() {
        assert!(SearchSpace::new(2).unwrap().fix("d2", 1.0).is_err());
        assert!(SearchSpace::new(2).unwrap().bounds("R1", 0.5, 0.4).is_err());
    }
}
