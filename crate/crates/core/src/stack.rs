//! Multilayer samples as chains of 2×2 wave-transfer matrices.
//!
//! Interfaces use the real Stokes convention: `r_bwd = -r_fwd` and
//! `t_fwd = t_bwd = sqrt(1 - r²)`. Loss lives in separate diagonal matrices so
//! that metallic films and absorbing bulk can be interleaved freely. The film
//! of interface `j` is folded into the loss matrix of the segment right below
//! it; the film of the last interface never reaches the reflected signal.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{QoctError, Result};
use crate::{seconds_to_um, um_to_seconds};

/// `|D|` below this is treated as a singular stack.
pub const SINGULAR_THRESHOLD: f64 = 1e-300;

/// Default truncation for [`enumerate_paths`].
pub const DEFAULT_MAX_ORDER: usize = 6;
pub const DEFAULT_AMPLITUDE_FLOOR: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexMatrix2 {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl ComplexMatrix2 {
    pub const fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Self { a, b, c, d }
    }

    pub fn identity() -> Self {
        Self::diag(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0))
    }

    pub fn diag(a: Complex64, d: Complex64) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Self::new(a, zero, zero, d)
    }

    pub fn from_real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self::new(a.into(), b.into(), c.into(), d.into())
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn is_finite(&self) -> bool {
        [self.a, self.b, self.c, self.d].iter().all(|z| z.is_finite())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        [
            self.a - other.a,
            self.b - other.b,
            self.c - other.c,
            self.d - other.d,
        ]
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
    }
}

impl Mul for ComplexMatrix2 {
    type Output = ComplexMatrix2;

    fn mul(self, rhs: Self) -> Self {
        Self {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
    }
}

/// A lossless dielectric boundary, optionally carrying a lossy metallic film.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interface {
    r_fwd: f64,
    film_kappa: f64,
}

impl Interface {
    pub fn new(r_fwd: f64, film_kappa: f64) -> Result<Self> {
        if !r_fwd.is_finite() || r_fwd.abs() >= 1.0 {
            return Err(QoctError::InvalidInterface { r: r_fwd });
        }
        check_kappa(film_kappa)?;
        Ok(Self { r_fwd, film_kappa })
    }

    /// Lossless interface with amplitude reflectivity `r_fwd`.
    pub fn lossless(r_fwd: f64) -> Result<Self> {
        Self::new(r_fwd, 0.0)
    }

    /// From an intensity reflectance `R ∈ [0, 1)` and a sign.
    pub fn from_reflectance(reflectance: f64, sign: f64, film_kappa: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&reflectance) {
            return Err(QoctError::InvalidInterface {
                r: reflectance.abs().sqrt().copysign(sign),
            });
        }
        Self::new(sign.signum() * reflectance.sqrt(), film_kappa)
    }

    pub fn r_fwd(&self) -> f64 {
        self.r_fwd
    }

    pub fn r_bwd(&self) -> f64 {
        -self.r_fwd
    }

    /// `t_fwd = t_bwd`.
    pub fn t(&self) -> f64 {
        (1.0 - self.r_fwd * self.r_fwd).sqrt()
    }

    pub fn reflectance(&self) -> f64 {
        self.r_fwd * self.r_fwd
    }

    pub fn film_kappa(&self) -> f64 {
        self.film_kappa
    }
}

/// A transmissive segment between two interfaces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segment {
    optical_delay: f64,
    bulk_kappa: f64,
}

impl Segment {
    /// `optical_delay` is the one-way optical thickness `τ′` in seconds.
    pub fn new(optical_delay: f64, bulk_kappa: f64) -> Result<Self> {
        if !optical_delay.is_finite() || optical_delay <= 0.0 {
            return Err(QoctError::InvalidSegment(format!(
                "optical delay must be > 0, got {optical_delay:e} s"
            )));
        }
        check_kappa(bulk_kappa)?;
        Ok(Self {
            optical_delay,
            bulk_kappa,
        })
    }

    /// From the one-way optical path `c·τ′` in µm.
    pub fn from_optical_path_um(path_um: f64, bulk_kappa: f64) -> Result<Self> {
        if !path_um.is_finite() || path_um <= 0.0 {
            return Err(QoctError::InvalidSegment(format!(
                "optical path must be > 0, got {path_um} um"
            )));
        }
        Self::new(um_to_seconds(path_um), bulk_kappa)
    }

    pub fn optical_delay(&self) -> f64 {
        self.optical_delay
    }

    pub fn optical_path_um(&self) -> f64 {
        seconds_to_um(self.optical_delay)
    }

    pub fn bulk_kappa(&self) -> f64 {
        self.bulk_kappa
    }
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !kappa.is_finite() || kappa < 0.0 {
        return Err(QoctError::GainNotSupported { kappa });
    }
    Ok(())
}

/// An ordered stack of `N` interfaces separated by `N - 1` segments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample {
    interfaces: Vec<Interface>,
    segments: Vec<Segment>,
}

impl Sample {
    pub fn new(interfaces: Vec<Interface>, segments: Vec<Segment>) -> Result<Self> {
        if interfaces.is_empty() {
            return Err(QoctError::InvalidSample(
                "a sample needs at least one interface".into(),
            ));
        }
        if segments.len() + 1 != interfaces.len() {
            return Err(QoctError::InvalidSample(format!(
                "{} interfaces need {} segments, got {}",
                interfaces.len(),
                interfaces.len() - 1,
                segments.len()
            )));
        }
        Ok(Self {
            interfaces,
            segments,
        })
    }

    /// A bare mirror.
    pub fn single_interface(r_fwd: f64) -> Result<Self> {
        Self::new(vec![Interface::lossless(r_fwd)?], Vec::new())
    }

    /// Lossless single layer of one-way optical path `path_um`.
    pub fn single_layer(r01: f64, r12: f64, path_um: f64) -> Result<Self> {
        Self::new(
            vec![Interface::lossless(r01)?, Interface::lossless(r12)?],
            vec![Segment::from_optical_path_um(path_um, 0.0)?],
        )
    }

    pub fn interfaces(&self) -> &[Interface] {
        &self.interfaces
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn n_interfaces(&self) -> usize {
        self.interfaces.len()
    }

    /// Loss exponent of one traversal of segment `j`: bulk plus the film of
    /// the interface above it.
    pub fn segment_kappa(&self, j: usize) -> f64 {
        self.segments[j].bulk_kappa + self.interfaces[j].film_kappa
    }

    /// Round-trip delay from the front to the back interface.
    pub fn total_round_trip(&self) -> f64 {
        2.0 * self.segments.iter().map(|s| s.optical_delay).sum::<f64>()
    }

    /// Round-trip delay of the single-reflection path off interface `i`.
    pub fn interface_delay(&self, i: usize) -> f64 {
        2.0 * self.segments[..i]
            .iter()
            .map(|s| s.optical_delay)
            .sum::<f64>()
    }

    /// The same stack seen from the back. Films stay attached to the
    /// segment they attenuate.
    pub fn reversed(&self) -> Self {
        let n = self.interfaces.len();
        let interfaces = (0..n)
            .rev()
            .map(|i| {
                let film = if i >= 1 {
                    self.interfaces[i - 1].film_kappa
                } else {
                    0.0
                };
                Interface {
                    r_fwd: -self.interfaces[i].r_fwd,
                    film_kappa: film,
                }
            })
            .collect();
        let segments = self
            .segments
            .iter()
            .rev()
            .map(|s| Segment {
                optical_delay: s.optical_delay,
                bulk_kappa: s.bulk_kappa,
            })
            .collect();
        Self {
            interfaces,
            segments,
        }
    }

    /// Stable content hash (hex SHA-256 prefix) of every parameter bit.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        for iface in &self.interfaces {
            hasher.update(iface.r_fwd.to_bits().to_le_bytes());
            hasher.update(iface.film_kappa.to_bits().to_le_bytes());
        }
        for seg in &self.segments {
            hasher.update(seg.optical_delay.to_bits().to_le_bytes());
            hasher.update(seg.bulk_kappa.to_bits().to_le_bytes());
        }
        hasher
            .finalize()
            .iter()
            .take(8)
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    /// Decay rate (per second of delay) of the slowest-decaying internal
    /// loop, or `None` when no pair of interfaces can trap light.
    pub fn echo_decay_rate(&self) -> Option<f64> {
        let n = self.interfaces.len();
        let mut slowest: Option<f64> = None;
        for i in 0..n {
            for j in (i + 1)..n {
                let gain = self.interfaces[i].r_fwd.abs() * self.interfaces[j].r_fwd.abs();
                if gain == 0.0 {
                    continue;
                }
                let kappa: f64 = (i..j).map(|s| self.segment_kappa(s)).sum();
                let delay: f64 = 2.0
                    * self.segments[i..j]
                        .iter()
                        .map(|s| s.optical_delay)
                        .sum::<f64>();
                let rate = (-gain.ln() + 2.0 * kappa) / delay;
                slowest = Some(slowest.map_or(rate, |r: f64| r.min(rate)));
            }
        }
        slowest
    }

    /// Delay beyond which every reflection path is weaker than `tolerance`.
    pub fn echo_reach(&self, tolerance: f64) -> f64 {
        let base = self.total_round_trip();
        match self.echo_decay_rate() {
            Some(rate) if rate > 0.0 => base + (1.0 / tolerance).ln() / rate,
            Some(_) => f64::INFINITY,
            None => base,
        }
    }
}

/// Boundary matrix `(1/t)·[[1, -r], [-r, 1]]`; unit determinant.
pub fn boundary_matrix(iface: &Interface) -> ComplexMatrix2 {
    let (r_fwd, r_bwd, t) = (iface.r_fwd(), iface.r_bwd(), iface.t());
    let inv_t = 1.0 / t;
    ComplexMatrix2::from_real(
        (t * t - r_fwd * r_bwd) * inv_t,
        r_bwd * inv_t,
        -r_fwd * inv_t,
        inv_t,
    )
}

/// `diag(e^{-iφ}, e^{+iφ})`.
pub fn propagation_matrix(phase: f64) -> ComplexMatrix2 {
    let z = Complex64::from_polar(1.0, -phase);
    ComplexMatrix2::diag(z, z.conj())
}

/// `diag(e^{-κ}, e^{+κ})`.
pub fn loss_matrix(kappa: f64) -> Result<ComplexMatrix2> {
    check_kappa(kappa)?;
    Ok(ComplexMatrix2::diag(
        Complex64::new((-kappa).exp(), 0.0),
        Complex64::new(kappa.exp(), 0.0),
    ))
}

/// Overall wave-transfer matrix at angular frequency `omega`. Interface 0
/// acts first (rightmost factor).
pub fn sample_matrix(sample: &Sample, omega: f64) -> ComplexMatrix2 {
    let mut m = boundary_matrix(&sample.interfaces[0]);
    for (j, seg) in sample.segments.iter().enumerate() {
        let kappa = sample.segment_kappa(j);
        // kappa is non-negative by construction.
        let loss = ComplexMatrix2::diag(
            Complex64::new((-kappa).exp(), 0.0),
            Complex64::new(kappa.exp(), 0.0),
        );
        m = boundary_matrix(&sample.interfaces[j + 1])
            * (propagation_matrix(omega * seg.optical_delay) * loss)
            * m;
    }
    m
}

/// Sample reflection transfer function `H(ω) = -C/D`.
pub fn transfer_function(sample: &Sample, omega: f64) -> Result<Complex64> {
    let m = sample_matrix(sample, omega);
    reflection_from_matrix(&m, omega)
}

/// Overall transmission `t_sample = (AD - BC)/D`.
pub fn transmission(sample: &Sample, omega: f64) -> Result<Complex64> {
    let m = sample_matrix(sample, omega);
    check_d(&m, omega)?;
    Ok(m.det() / m.d)
}

fn check_d(m: &ComplexMatrix2, omega: f64) -> Result<()> {
    let magnitude = m.d.norm();
    if !(magnitude >= SINGULAR_THRESHOLD) || !magnitude.is_finite() {
        return Err(QoctError::SingularStack { omega, magnitude });
    }
    Ok(())
}

fn reflection_from_matrix(m: &ComplexMatrix2, omega: f64) -> Result<Complex64> {
    check_d(m, omega)?;
    Ok(-m.c / m.d)
}

/// Evaluates `H` on the uniform lattice `omega_start + k·step`, `k ∈ 0..count`.
///
/// Only the bottom row of the transfer matrix is propagated and the segment
/// phasors advance by recurrence, so each node costs a handful of complex
/// multiplies per interface.
pub fn transfer_on_lattice(
    sample: &Sample,
    omega_start: f64,
    step: f64,
    count: usize,
) -> Result<Vec<Complex64>> {
    const RESYNC: usize = 512;
    let n = sample.interfaces.len();
    let ifaces: Vec<(f64, f64)> = sample
        .interfaces
        .iter()
        .map(|i| (i.r_fwd, 1.0 / i.t()))
        .collect();
    let losses: Vec<(f64, f64)> = (0..n - 1)
        .map(|j| {
            let k = sample.segment_kappa(j);
            ((-k).exp(), k.exp())
        })
        .collect();
    let delays: Vec<f64> = sample.segments.iter().map(|s| s.optical_delay).collect();
    let steps: Vec<Complex64> = delays
        .iter()
        .map(|&d| Complex64::from_polar(1.0, -step * d))
        .collect();
    let mut phasors: Vec<Complex64> = vec![Complex64::new(1.0, 0.0); n.saturating_sub(1)];

    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let omega = omega_start + k as f64 * step;
        if k % RESYNC == 0 {
            for (z, &d) in phasors.iter_mut().zip(&delays) {
                *z = Complex64::from_polar(1.0, -omega * d);
            }
        }
        // Row vector (0, 1) times the chain, last interface first.
        let (r, inv_t) = ifaces[n - 1];
        let mut u = Complex64::new(-r * inv_t, 0.0);
        let mut v = Complex64::new(inv_t, 0.0);
        for j in (0..n - 1).rev() {
            let z = phasors[j];
            let (lf, lb) = losses[j];
            u *= z * lf;
            v *= z.conj() * lb;
            let (r, inv_t) = ifaces[j];
            let nu = (u - v * r) * inv_t;
            let nv = (v - u * r) * inv_t;
            u = nu;
            v = nv;
        }
        let mag2 = v.norm_sqr();
        let scale = v.re.abs().max(v.im.abs());
        if !(scale >= SINGULAR_THRESHOLD) || !mag2.is_finite() || mag2 == 0.0 {
            return Err(QoctError::SingularStack {
                omega,
                magnitude: v.norm(),
            });
        }
        out.push(-u * v.conj() / mag2);
        for (z, s) in phasors.iter_mut().zip(&steps) {
            *z *= s;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Interface,
    Echo,
}

/// One reflection event along a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Reflection {
    pub interface: usize,
    /// Reflected off the underside (`r_bwd`).
    pub from_below: bool,
}

/// A reflection path through the stack.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathFeature {
    /// Round-trip delay, seconds.
    pub delay: f64,
    /// Signed effective reflectivity `r̃`.
    pub amplitude: f64,
    pub kind: FeatureKind,
    /// Number of internal (underside) reflections.
    pub order: usize,
    pub reflections: Vec<Reflection>,
}

impl PathFeature {
    pub fn delay_um(&self) -> f64 {
        seconds_to_um(self.delay)
    }

    /// Interface index for single-reflection paths.
    pub fn interface(&self) -> Option<usize> {
        match self.kind {
            FeatureKind::Interface => self.reflections.first().map(|r| r.interface),
            FeatureKind::Echo => None,
        }
    }
}

/// Enumerated reflection paths, sorted by delay.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureList {
    features: Vec<PathFeature>,
    labels: Vec<String>,
}

impl FeatureList {
    pub fn new(mut features: Vec<PathFeature>) -> Self {
        features.sort_by(|a, b| a.delay.total_cmp(&b.delay));
        let mut echo = 0;
        let labels = features
            .iter()
            .map(|f| match f.kind {
                FeatureKind::Interface => format!("I{}", f.reflections[0].interface),
                FeatureKind::Echo => {
                    echo += 1;
                    format!("e{echo}")
                }
            })
            .collect();
        Self { features, labels }
    }

    /// Builds a list from bare `(delay, amplitude)` pairs, first entry tagged
    /// as interface 0 and the rest as echoes of increasing order.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Self {
        let features = pairs
            .iter()
            .enumerate()
            .map(|(k, &(delay, amplitude))| PathFeature {
                delay,
                amplitude,
                kind: if k == 0 {
                    FeatureKind::Interface
                } else {
                    FeatureKind::Echo
                },
                order: k.saturating_sub(1),
                reflections: vec![Reflection {
                    interface: k.min(1),
                    from_below: false,
                }],
            })
            .collect();
        Self::new(features)
    }

    pub fn features(&self) -> &[PathFeature] {
        &self.features
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&PathFeature> {
        self.features.get(index)
    }

    /// `I{j}` for interfaces, `e{n}` for echoes numbered by delay.
    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn position_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// `Σ amplitude·e^{-iω·delay}` over all paths.
    pub fn coherent_sum(&self, omega: f64) -> Complex64 {
        self.features
            .iter()
            .map(|f| Complex64::from_polar(f.amplitude, -omega * f.delay))
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = &PathFeature> {
        self.features.iter()
    }
}

#[derive(Clone, Copy)]
enum Heading {
    /// Arriving at the interface from above.
    Down,
    /// Arriving at the interface from below.
    Up,
}

struct PathWalker<'a> {
    sample: &'a Sample,
    max_order: usize,
    floor: f64,
    out: Vec<PathFeature>,
    trail: Vec<Reflection>,
    /// Quantised delay → index into `out`, when merging coincident paths.
    merge: Option<(f64, HashMap<i64, usize>)>,
}

impl PathWalker<'_> {
    fn walk(&mut self, at: usize, heading: Heading, amp: f64, delay: f64, order: usize) {
        if amp.abs() < self.floor || amp == 0.0 {
            return;
        }
        let iface = self.sample.interfaces[at];
        let last = self.sample.interfaces.len() - 1;
        match heading {
            Heading::Down => {
                // Reflect back up.
                self.trail.push(Reflection {
                    interface: at,
                    from_below: false,
                });
                let reflected = amp * iface.r_fwd();
                if at == 0 {
                    self.emit(reflected, delay, order);
                } else {
                    let (a, d) = self.cross(at - 1, reflected, delay);
                    self.walk(at - 1, Heading::Up, a, d, order);
                }
                self.trail.pop();
                // Transmit deeper.
                if at < last {
                    let (a, d) = self.cross(at, amp * iface.t(), delay);
                    self.walk(at + 1, Heading::Down, a, d, order);
                }
            }
            Heading::Up => {
                let transmitted = amp * iface.t();
                if at == 0 {
                    self.emit(transmitted, delay, order);
                } else {
                    let (a, d) = self.cross(at - 1, transmitted, delay);
                    self.walk(at - 1, Heading::Up, a, d, order);
                }
                if order < self.max_order {
                    self.trail.push(Reflection {
                        interface: at,
                        from_below: true,
                    });
                    let (a, d) = self.cross(at, amp * iface.r_bwd(), delay);
                    self.walk(at + 1, Heading::Down, a, d, order + 1);
                    self.trail.pop();
                }
            }
        }
    }

    fn cross(&self, segment: usize, amp: f64, delay: f64) -> (f64, f64) {
        let seg = self.sample.segments[segment];
        (
            amp * (-self.sample.segment_kappa(segment)).exp(),
            delay + seg.optical_delay,
        )
    }

    fn emit(&mut self, amplitude: f64, delay: f64, order: usize) {
        if amplitude.abs() < self.floor || amplitude == 0.0 {
            return;
        }
        let kind = if order == 0 {
            FeatureKind::Interface
        } else {
            FeatureKind::Echo
        };
        if let Some((quantum, slots)) = &mut self.merge {
            let key = (delay / *quantum).round() as i64;
            let hit = [key, key - 1, key + 1].into_iter().find_map(|k| {
                slots
                    .get(&k)
                    .copied()
                    .filter(|&i| (self.out[i].delay - delay).abs() <= *quantum)
            });
            if let Some(i) = hit {
                let f = &mut self.out[i];
                f.amplitude += amplitude;
                if order < f.order {
                    f.order = order;
                    f.kind = kind;
                    f.reflections = self.trail.clone();
                }
                return;
            }
            slots.insert(key, self.out.len());
        }
        self.out.push(PathFeature {
            delay,
            amplitude,
            kind,
            order,
            reflections: self.trail.clone(),
        });
    }
}

/// Enumerates every reflection path with at most `max_order` internal
/// reflections and `|amplitude| ≥ amplitude_floor`. Paths sharing a delay
/// are kept as separate records.
pub fn enumerate_paths(sample: &Sample, max_order: usize, amplitude_floor: f64) -> FeatureList {
    let mut walker = PathWalker {
        sample,
        max_order,
        floor: amplitude_floor.max(0.0),
        out: Vec::new(),
        trail: Vec::new(),
        merge: None,
    };
    walker.walk(0, Heading::Down, 1.0, 0.0, 0);
    FeatureList::new(walker.out)
}

/// Paths closer in delay than this are one feature after merging, µm.
pub const COINCIDENCE_UM: f64 = 1e-6;

/// Like [`enumerate_paths`], but paths arriving within [`COINCIDENCE_UM`]
/// of each other are summed into one feature that keeps the lowest-order
/// path's history. Coincident paths interfere fully, so every trace built
/// from the merged list is unchanged while the list stays small for
/// commensurate stacks.
pub fn enumerate_merged_paths(sample: &Sample, max_order: usize, amplitude_floor: f64) -> FeatureList {
    let mut walker = PathWalker {
        sample,
        max_order,
        floor: amplitude_floor.max(0.0),
        out: Vec::new(),
        trail: Vec::new(),
        merge: Some((um_to_seconds(COINCIDENCE_UM), HashMap::new())),
    };
    walker.walk(0, Heading::Down, 1.0, 0.0, 0);
    let floor = amplitude_floor.max(0.0);
    walker.out.retain(|f| f.amplitude != 0.0 && f.amplitude.abs() >= floor);
    FeatureList::new(walker.out)
}

/// Real degrees of freedom of an `n`-interface lossy stack seen in reflection.
pub fn count_effective_parameters(n_interfaces: i64) -> Result<i64> {
    if n_interfaces < 1 {
        return Err(QoctError::Domain(format!(
            "interface count must be >= 1, got {n_interfaces}"
        )));
    }
    Ok(6 * n_interfaces - 5)
}

impl fmt::Display for Sample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, iface) in self.interfaces.iter().enumerate() {
            write!(f, "R{}={:.4}", i + 1, iface.reflectance())?;
            if let Some(seg) = self.segments.get(i) {
                write!(f, " | {:.3}um | ", seg.optical_path_um())?;
            }
        }
        Ok(())
    }
}

/// Round-trip phase `ω0·ΔT` for a pump wavelength `pump_nm`.
pub fn pump_phase(pump_nm: f64, delta_t: f64) -> f64 {
    PI * crate::SPEED_OF_LIGHT / (pump_nm * 1e-9) * delta_t
}
