//! Plot-ready CSV for normalised traces.
//!
//! ```text
//! # qoct-trace v1
//! # key = value
//! tau_um,c_norm
//! -50.0,0.9999
//! ```
//!
//! Floats are written in shortest round-trip form, so write → read → write
//! is byte-identical. Header keys not listed in [`RESERVED`] are carried in
//! `meta.extra`.

use std::collections::BTreeMap;
use std::path::Path;

use qoct_core::engine::{NoiseMeta, QuadratureReport};
use qoct_core::{AntidiagonalProfile, EngineKind, Interferogram, SpectralModel, TraceMeta};

use crate::error::{CliError, CliResult};

pub const MAGIC: &str = "# qoct-trace v1";
pub const COLUMNS: &str = "tau_um,c_norm";

/// Header keys owned by the format itself.
pub const RESERVED: &[&str] = &[
    "normalization",
    "gamma0",
    "points",
    "step_um",
    "engine",
    "sample_hash",
    "pump_nm",
    "omega0_rad_s",
    "omega_a_rad_s",
    "omega_d_rad_s",
    "filter_shape",
    "quadrature",
    "noise_mean_counts",
    "noise_seed",
];

fn num(x: f64) -> String {
    format!("{x:?}")
}

fn parse_num(key: &str, v: &str) -> CliResult<f64> {
    v.parse()
        .map_err(|_| CliError::Parse(format!("header '{key}': '{v}' is not a number")))
}

pub fn render(trace: &Interferogram) -> String {
    let mut out = String::with_capacity(32 * (trace.len() + 16));
    let mut kv = |k: &str, v: String| {
        out.push_str(&format!("# {k} = {v}\n"));
    };
    let m = &trace.meta;
    kv("normalization", "C/Gamma0".into());
    kv("gamma0", num(trace.gamma0));
    kv("points", trace.len().to_string());
    if trace.len() >= 2 {
        kv("step_um", num(trace.delays_um[1] - trace.delays_um[0]));
    }
    if let Some(e) = m.engine {
        kv("engine", e.to_string());
    }
    if let Some(h) = &m.sample_hash {
        kv("sample_hash", h.clone());
    }
    if let Some(s) = &m.spectral {
        kv("pump_nm", num(s.pump_nm()));
        kv("omega0_rad_s", num(s.omega0));
        kv("omega_a_rad_s", num(s.omega_a));
        kv("omega_d_rad_s", num(s.omega_d));
        kv("filter_shape", s.profile.to_string());
    }
    if let Some(q) = &m.quadrature {
        kv("quadrature", serde_json::to_string(q).expect("plain struct"));
    }
    if let Some(n) = &m.noise {
        kv("noise_mean_counts", num(n.mean_counts));
        kv("noise_seed", n.seed.to_string());
    }
    for (k, v) in &m.extra {
        if !RESERVED.contains(&k.as_str()) {
            kv(k, v.replace('\n', " "));
        }
    }
    let mut text = format!("{MAGIC}\n{out}{COLUMNS}\n");
    for (d, c) in trace.delays_um.iter().zip(&trace.counts) {
        text.push_str(&num(*d));
        text.push(',');
        text.push_str(&num(*c));
        text.push('\n');
    }
    text
}

pub fn parse(text: &str) -> CliResult<Interferogram> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim_end() == MAGIC => {}
        _ => return Err(CliError::Parse(format!("line 1: expected '{MAGIC}'"))),
    }
    let mut header: BTreeMap<String, String> = BTreeMap::new();
    let mut saw_columns = false;
    let (mut delays, mut counts) = (Vec::new(), Vec::new());
    for (i, line) in lines {
        let n = i + 1;
        if !saw_columns {
            if let Some(rest) = line.strip_prefix('#') {
                let (k, v) = rest.split_once('=').ok_or_else(|| {
                    CliError::Parse(format!("line {n}: expected '# key = value'"))
                })?;
                header.insert(k.trim().to_string(), v.trim().to_string());
                continue;
            }
            if line.trim() != COLUMNS {
                return Err(CliError::Parse(format!("line {n}: expected column header '{COLUMNS}'")));
            }
            saw_columns = true;
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let (d, c) = line
            .split_once(',')
            .ok_or_else(|| CliError::Parse(format!("line {n}: expected two columns")))?;
        let d: f64 = d.trim().parse().map_err(|_| CliError::Parse(format!("line {n}: bad delay '{d}'")))?;
        let c: f64 = c.trim().parse().map_err(|_| CliError::Parse(format!("line {n}: bad value '{c}'")))?;
        if !d.is_finite() || !c.is_finite() {
            return Err(CliError::Validation(format!("line {n}: non-finite value")));
        }
        if delays.last().is_some_and(|&last| d <= last) {
            return Err(CliError::Validation(format!("line {n}: delays must increase strictly")));
        }
        delays.push(d);
        counts.push(c);
    }
    if !saw_columns {
        return Err(CliError::Parse(format!("missing column header '{COLUMNS}'")));
    }
    if delays.is_empty() {
        return Err(CliError::Validation("trace has no rows".into()));
    }
    match header.get("normalization").map(String::as_str) {
        Some("C/Gamma0") => {}
        other => {
            return Err(CliError::Validation(format!(
                "trace must be normalised to C/Gamma0, header says {other:?}"
            )))
        }
    }
    let gamma0 = header.get("gamma0").map(|v| parse_num("gamma0", v)).transpose()?.unwrap_or(0.0);
    let mut meta = TraceMeta {
        engine: header.get("engine").map(|v| v.parse::<EngineKind>()).transpose()?,
        sample_hash: header.get("sample_hash").cloned(),
        ..TraceMeta::default()
    };
    if let (Some(o0), Some(oa), Some(od)) = (
        header.get("omega0_rad_s"),
        header.get("omega_a_rad_s"),
        header.get("omega_d_rad_s"),
    ) {
        let profile: AntidiagonalProfile = header
            .get("filter_shape")
            .map(|v| v.parse())
            .transpose()?
            .unwrap_or_default();
        meta.spectral = Some(SpectralModel::new(
            parse_num("omega0_rad_s", o0)?,
            parse_num("omega_a_rad_s", oa)?,
            parse_num("omega_d_rad_s", od)?,
            profile,
        )?);
    }
    if let Some(q) = header.get("quadrature") {
        let q: QuadratureReport = serde_json::from_str(q)
            .map_err(|e| CliError::Parse(format!("header 'quadrature': {e}")))?;
        meta.quadrature = Some(q);
    }
    if let (Some(m), Some(s)) = (header.get("noise_mean_counts"), header.get("noise_seed")) {
        meta.noise = Some(NoiseMeta {
            mean_counts: parse_num("noise_mean_counts", m)?,
            seed: s
                .parse()
                .map_err(|_| CliError::Parse(format!("header 'noise_seed': '{s}'")))?,
        });
    }
    meta.extra = header
        .into_iter()
        .filter(|(k, _)| !RESERVED.contains(&k.as_str()))
        .collect();
    Ok(Interferogram {
        delays_um: delays,
        counts,
        gamma0,
        meta,
    })
}

pub fn read_trace(path: &Path) -> CliResult<Interferogram> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse(&text).map_err(|e| e.context(&path.display().to_string()))
}

pub fn write_trace(trace: &Interferogram, path: &Path) -> CliResult<()> {
    std::fs::write(path, render(trace)).map_err(|e| CliError::io(path, e))
}
