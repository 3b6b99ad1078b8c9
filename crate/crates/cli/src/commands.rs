use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use qoct_core::engine::{uniform_grid, FeatureGroup};
use qoct_core::ga::NamedParameter;
use qoct_core::{
    add_shot_noise, closed_form_trace, coincidence_trace_numeric, count_effective_parameters,
    enumerate_merged_paths, enumerate_paths, label_trace, model_select, pair_delay, pulsed_limit_trace, tuning_marks,
    AntidiagonalProfile, FeatureKind, FeatureList, GaConfig, Interferogram, ModelSelectConfig,
    QuadratureSettings, Sample, SearchSpace, SpectralModel, DEFAULT_AMPLITUDE_FLOOR,
    DEFAULT_MAX_ORDER,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::reference::resolve_sample;
use crate::spec::SampleSpecFile;
use crate::trace::{read_trace, render};

/// Header key holding the full simulate configuration as JSON.
pub const CONFIG_KEY: &str = "config";

#[derive(Debug, Parser)]
#[command(name = "qoct", version, about = "Quantum OCT interferogram simulation and morphology retrieval")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a normalised coincidence trace for a sample.
    Simulate(SimulateArgs),
    /// Retrieve sample parameters from a trace with the genetic algorithm.
    Fit(FitArgs),
    /// Attribute every dip and artifact of a sample to its source paths.
    Label(LabelArgs),
    /// Tabulate how a cross-interference term changes with pump wavelength.
    ArtifactMap(ArtifactMapArgs),
    /// Print the number of effective real parameters for N interfaces.
    CountParams(CountParamsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterShape {
    Gaussian,
    Rectangular,
}

impl From<FilterShape> for AntidiagonalProfile {
    fn from(s: FilterShape) -> Self {
        match s {
            FilterShape::Gaussian => Self::Gaussian,
            FilterShape::Rectangular => Self::Rectangular,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct SpectralArgs {
    /// Pump wavelength, nm [default: 404.5]
    #[arg(long)]
    pub pump_nm: Option<f64>,
    /// Filter centre wavelength, nm [default: twice the pump]
    #[arg(long)]
    pub center_nm: Option<f64>,
    /// Filter FWHM, nm [default: 40]
    #[arg(long)]
    pub filter_nm: Option<f64>,
    #[arg(long, value_enum)]
    pub filter_shape: Option<FilterShape>,
    /// Pump linewidth FWHM, Hz [default: 1e6]
    #[arg(long)]
    pub pump_linewidth_hz: Option<f64>,
}

impl SpectralArgs {
    fn any(&self) -> bool {
        self.pump_nm.is_some()
            || self.center_nm.is_some()
            || self.filter_nm.is_some()
            || self.filter_shape.is_some()
            || self.pump_linewidth_hz.is_some()
    }

    fn resolve(&self) -> SpectralSettings {
        let pump_nm = self.pump_nm.unwrap_or(404.5);
        SpectralSettings {
            pump_nm,
            center_nm: self.center_nm.unwrap_or(2.0 * pump_nm),
            filter_nm: self.filter_nm.unwrap_or(40.0),
            filter_shape: self.filter_shape.unwrap_or(FilterShape::Gaussian),
            pump_linewidth_hz: self.pump_linewidth_hz.unwrap_or(1e6),
        }
    }
}

/// Laboratory-facing spectral settings, fully resolved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralSettings {
    pub pump_nm: f64,
    pub center_nm: f64,
    pub filter_nm: f64,
    pub filter_shape: FilterShape,
    pub pump_linewidth_hz: f64,
}

impl SpectralSettings {
    pub fn model(&self) -> CliResult<SpectralModel> {
        Ok(SpectralModel::from_wavelengths(
            self.pump_nm,
            self.center_nm,
            self.filter_nm,
            self.pump_linewidth_hz,
            self.filter_shape.into(),
        )?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EngineArg {
    /// Spectral quadrature, exact for any stack.
    Numeric,
    /// Closed-form path sum; single surfaces and single layers only.
    ClosedForm,
    /// Pulsed-pump limit: dips only.
    Pulsed,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Sample spec file, or builtin:<name>
    #[arg(long, required_unless_present = "rerun")]
    pub sample: Option<String>,
    #[command(flatten)]
    pub spectral: SpectralArgs,
    /// First delay of the grid, µm of optical path
    #[arg(long, default_value_t = -50.0, allow_hyphen_values = true)]
    pub tau_start_um: f64,
    #[arg(long, default_value_t = 1.0)]
    pub tau_step_um: f64,
    /// Grid length, µm [default: twice the sample's optical thickness plus 100]
    #[arg(long)]
    pub tau_span_um: Option<f64>,
    #[arg(long, value_enum, default_value = "numeric")]
    pub engine: EngineArg,
    /// Mean background counts per point for Poisson noise
    #[arg(long)]
    pub noise_counts: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Highest echo order listed in the label sidecar and the pulsed engine
    #[arg(long, default_value_t = DEFAULT_MAX_ORDER)]
    pub max_order: usize,
    /// Reproduce the run recorded in an existing trace file
    #[arg(long, conflicts_with = "sample")]
    pub rerun: Option<PathBuf>,
    /// Output CSV; a `.labels.json` sidecar is written next to it
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Everything needed to reproduce a simulated trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateRecord {
    pub sample: SampleSpecFile,
    pub spectral: SpectralSettings,
    pub tau_start_um: f64,
    pub tau_step_um: f64,
    pub points: usize,
    pub engine: EngineArg,
    pub noise_counts: Option<f64>,
    pub seed: u64,
    pub max_order: usize,
}

impl SimulateRecord {
    fn from_args(args: &SimulateArgs) -> CliResult<Self> {
        if let Some(path) = &args.rerun {
            let trace = read_trace(path)?;
            let json = trace.meta.extra.get(CONFIG_KEY).ok_or_else(|| {
                CliError::Validation(format!("{}: no recorded configuration", path.display()))
            })?;
            return serde_json::from_str(json)
                .map_err(|e| CliError::Parse(format!("{}: recorded configuration: {e}", path.display())));
        }
        let (spec, sample) = resolve_sample(args.sample.as_deref().expect("clap enforces --sample"))?;
        if !(args.tau_step_um.is_finite() && args.tau_step_um > 0.0) {
            return Err(CliError::Validation("--tau-step-um must be > 0".into()));
        }
        let span = args.tau_span_um.unwrap_or_else(|| {
            2.0 * sample.segments().iter().map(|s| s.optical_path_um()).sum::<f64>() + 100.0
        });
        if !(span.is_finite() && span > 0.0) {
            return Err(CliError::Validation("--tau-span-um must be > 0".into()));
        }
        Ok(Self {
            sample: spec,
            spectral: args.spectral.resolve(),
            tau_start_um: args.tau_start_um,
            tau_step_um: args.tau_step_um,
            points: (span / args.tau_step_um + 1e-9).floor() as usize + 1,
            engine: args.engine,
            noise_counts: args.noise_counts,
            seed: args.seed,
            max_order: args.max_order,
        })
    }
}

#[derive(Debug, Serialize)]
pub struct FeatureEntry {
    pub label: String,
    pub delay_um: f64,
    pub amplitude: f64,
    pub kind: FeatureKind,
    pub order: usize,
}

#[derive(Debug, Serialize)]
pub struct LabelReport {
    pub sample: Option<String>,
    pub pump_nm: f64,
    pub features: Vec<FeatureEntry>,
    pub groups: Vec<FeatureGroup>,
}

fn label_report(name: Option<String>, sample: &Sample, model: &SpectralModel, max_order: usize) -> LabelReport {
    let (features, groups) = label_trace(sample, model, max_order);
    LabelReport {
        sample: name,
        pump_nm: model.pump_nm(),
        features: feature_entries(&features),
        groups,
    }
}

fn feature_entries(features: &FeatureList) -> Vec<FeatureEntry> {
    features
        .iter()
        .enumerate()
        .map(|(k, f)| FeatureEntry {
            label: features.label(k).to_string(),
            delay_um: f.delay_um(),
            amplitude: f.amplitude,
            kind: f.kind,
            order: f.order,
        })
        .collect()
}

/// Series terms for a closed form whose tail is below `1e-12`.
fn series_order(sample: &Sample) -> usize {
    let ifs = sample.interfaces();
    if ifs.len() < 2 {
        return 0;
    }
    let q = (ifs[0].r_bwd() * ifs[1].r_fwd()).abs();
    if q < 1e-12 {
        1
    } else {
        ((1e-12f64.ln() / q.ln()).ceil() as usize + 1).min(100_000)
    }
}

/// Runs one recorded simulation.
pub fn simulate(record: &SimulateRecord) -> CliResult<(Interferogram, LabelReport)> {
    let sample = record.sample.to_sample()?;
    let model = record.spectral.model()?;
    if record.points < 2 {
        return Err(CliError::Validation("the delay grid needs at least two points".into()));
    }
    let grid = uniform_grid(record.tau_start_um, record.tau_step_um, record.points);
    let mut trace = match record.engine {
        EngineArg::Numeric => {
            coincidence_trace_numeric(&sample, &model, &grid, &QuadratureSettings::default())?
        }
        EngineArg::ClosedForm => {
            if sample.n_interfaces() > 2 {
                return Err(CliError::Validation(format!(
                    "the closed-form engine handles one or two interfaces, this sample has {}; \
                     use --engine numeric",
                    sample.n_interfaces()
                )));
            }
            let features = enumerate_paths(&sample, series_order(&sample), 0.0);
            closed_form_trace(&features, &model, &grid)?
        }
        EngineArg::Pulsed => {
            let features = enumerate_merged_paths(&sample, record.max_order, DEFAULT_AMPLITUDE_FLOOR);
            pulsed_limit_trace(&features, &model, &grid)?
        }
    };
    if let Some(mean) = record.noise_counts {
        trace = add_shot_noise(&trace, mean, record.seed)?;
    }
    trace.meta.sample_hash = Some(sample.content_hash());
    trace.meta.extra.insert(
        CONFIG_KEY.into(),
        serde_json::to_string(record).expect("record is plain data"),
    );
    let labels = label_report(record.sample.name.clone(), &sample, &model, record.max_order);
    Ok((trace, labels))
}

fn cmd_simulate(args: &SimulateArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let record = SimulateRecord::from_args(args)?;
    let (trace, labels) = simulate(&record)?;
    let text = render(&trace);
    match &args.out {
        Some(path) => {
            write_file(path, &text)?;
            let sidecar = path.with_extension("labels.json");
            write_file(&sidecar, &to_json(&labels))?;
        }
        None => emit(stdout, &text)?,
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Trace CSV written by `qoct simulate` or by an instrument export
    pub trace: PathBuf,
    /// Overrides the spectral settings recorded in the trace
    #[command(flatten)]
    pub spectral: SpectralArgs,
    /// Interface counts to try: `N` or `LO:HI`
    #[arg(long, default_value = "2")]
    pub n_range: String,
    /// Pin a parameter, e.g. `--fix R1=0.31` (repeatable)
    #[arg(long = "fix", value_name = "NAME=VALUE")]
    pub fix: Vec<String>,
    /// Search range, e.g. `--bounds d1=250:320` (repeatable)
    #[arg(long = "bounds", value_name = "NAME=LO:HI")]
    pub bounds: Vec<String>,
    #[arg(long, default_value_t = 300)]
    pub pop: usize,
    #[arg(long, default_value_t = 50)]
    pub gens: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Gray-code bits per parameter
    #[arg(long, default_value_t = 16)]
    pub bits: u32,
    /// Field signs of the interfaces, front first, e.g. `-1,1`; missing
    /// entries are +1
    #[arg(long, allow_hyphen_values = true)]
    pub signs: Option<String>,
    /// Report JSON; the reconstruction is written as `.reconstruction.csv` next to it
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NFitness {
    pub n: usize,
    pub fitness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaSettings {
    pub population_size: usize,
    pub max_generations: usize,
    pub bits_per_parameter: u32,
    pub crossover_rate: f64,
    pub elitism: usize,
    pub tournament_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub trace: String,
    pub seed: u64,
    pub n_range: [usize; 2],
    pub n_selected: usize,
    pub best_fitness: f64,
    pub parameters: Vec<NamedParameter>,
    pub fitness_history: Vec<f64>,
    pub fitness_vs_n: Vec<NFitness>,
    pub generations: usize,
    pub evaluations: usize,
    pub ga: GaSettings,
    pub spectral: SpectralModel,
    pub fixed: BTreeMap<String, f64>,
    pub bounds: BTreeMap<String, [f64; 2]>,
    pub signs: Vec<f64>,
    pub reconstruction: Option<String>,
    pub flags: Vec<String>,
}

/// Flag set when the trace carries no interference features.
pub const NO_FEATURES: &str = "no features detected";

pub fn parse_n_range(text: &str) -> CliResult<(usize, usize)> {
    let bad = || CliError::Validation(format!("--n-range '{text}': expected N or LO:HI"));
    let (lo, hi) = match text.split_once(':') {
        Some((a, b)) => (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
        None => {
            let n = text.trim().parse().map_err(|_| bad())?;
            (n, n)
        }
    };
    if lo == 0 || hi < lo {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn parse_assignment(text: &str, flag: &str) -> CliResult<(String, String)> {
    text.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .filter(|(k, v)| !k.is_empty() && !v.is_empty())
        .ok_or_else(|| CliError::Validation(format!("--{flag} '{text}': expected NAME=VALUE")))
}

pub fn parse_fixes(items: &[String]) -> CliResult<BTreeMap<String, f64>> {
    items
        .iter()
        .map(|item| {
            let (k, v) = parse_assignment(item, "fix")?;
            let v: f64 = v
                .parse()
                .map_err(|_| CliError::Validation(format!("--fix '{item}': '{v}' is not a number")))?;
            Ok((k, v))
        })
        .collect()
}

pub fn parse_bounds(items: &[String]) -> CliResult<BTreeMap<String, [f64; 2]>> {
    items
        .iter()
        .map(|item| {
            let (k, v) = parse_assignment(item, "bounds")?;
            let bad = || CliError::Validation(format!("--bounds '{item}': expected NAME=LO:HI"));
            let (lo, hi) = v.split_once(':').ok_or_else(bad)?;
            let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
            let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
            if !(lo < hi) {
                return Err(bad());
            }
            Ok((k, [lo, hi]))
        })
        .collect()
}

pub fn parse_signs(text: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(|t| match t.trim() {
            "1" | "+1" | "1.0" | "+" => Ok(1.0),
            "-1" | "-1.0" | "-" => Ok(-1.0),
            other => Err(CliError::Validation(format!("--signs: '{other}' is not +1 or -1"))),
        })
        .collect()
}

/// Search space for `n` interfaces with user bounds then fixes applied.
/// Names beyond this `n` (e.g. `d5` for three interfaces) are skipped.
pub fn build_space(
    n: usize,
    bits: u32,
    signs: &[f64],
    fixed: &BTreeMap<String, f64>,
    bounds: &BTreeMap<String, [f64; 2]>,
) -> qoct_core::Result<SearchSpace> {
    let full: Vec<f64> = (0..n).map(|i| signs.get(i).copied().unwrap_or(1.0)).collect();
    let mut space = SearchSpace::new(n)?.with_bits(bits)?.with_signs(&full)?;
    let names = space.names();
    for (name, [lo, hi]) in bounds {
        if names.contains(name) {
            space = space.bounds(name, *lo, *hi)?;
        }
    }
    for (name, v) in fixed {
        if names.contains(name) {
            space = space.fix(name, *v)?;
        }
    }
    Ok(space)
}

fn check_names(
    n_max: usize,
    fixed: &BTreeMap<String, f64>,
    bounds: &BTreeMap<String, [f64; 2]>,
) -> CliResult<()> {
    let names = SearchSpace::new(n_max)?.names();
    for name in fixed.keys().chain(bounds.keys()) {
        if !names.contains(name) {
            return Err(CliError::Validation(format!(
                "unknown parameter '{name}' for up to {n_max} interfaces"
            )));
        }
    }
    Ok(())
}

pub fn fit(args: &FitArgs) -> CliResult<(FitReport, Interferogram)> {
    let target = read_trace(&args.trace)?;
    let model = if args.spectral.any() || target.meta.spectral.is_none() {
        args.spectral.resolve().model()?
    } else {
        target.meta.spectral.expect("checked above")
    };
    let (lo, hi) = parse_n_range(&args.n_range)?;
    let fixed = parse_fixes(&args.fix)?;
    let bounds = parse_bounds(&args.bounds)?;
    check_names(hi, &fixed, &bounds)?;
    let signs = args.signs.as_deref().map(parse_signs).transpose()?.unwrap_or_default();
    let config = GaConfig {
        population_size: args.pop,
        max_generations: args.gens,
        seed: args.seed,
        ..GaConfig::default()
    };
    config.validate()?;
    let ga = GaSettings {
        population_size: config.population_size,
        max_generations: config.max_generations,
        bits_per_parameter: args.bits,
        crossover_rate: config.crossover_rate,
        elitism: config.elitism,
        tournament_size: config.tournament_size,
    };
    let mut report = FitReport {
        trace: args.trace.display().to_string(),
        seed: args.seed,
        n_range: [lo, hi],
        n_selected: lo,
        best_fitness: 0.0,
        parameters: Vec::new(),
        fitness_history: Vec::new(),
        fitness_vs_n: Vec::new(),
        generations: 0,
        evaluations: 0,
        ga,
        spectral: model,
        fixed: fixed.clone(),
        bounds: bounds.clone(),
        signs: signs.clone(),
        reconstruction: None,
        flags: Vec::new(),
    };

    if target.counts.iter().all(|c| (c - 1.0).abs() <= 1e-12) {
        let space = build_space(lo, args.bits, &signs, &fixed, &bounds)?;
        let free: Vec<f64> = space.free_params().map(|p| p.lower).collect();
        let full = space.expand(&free);
        report.parameters = space
            .params()
            .iter()
            .zip(full)
            .map(|(p, value)| {
                let reflectance = matches!(p.kind, qoct_core::ParamKind::Reflectance(_));
                NamedParameter {
                    name: p.kind.name(),
                    value: if reflectance { 0.0 } else { value },
                    unit: p.kind.unit().to_string(),
                    fixed: p.fixed.is_some(),
                }
            })
            .collect();
        report.best_fitness = target.mae(&vec![1.0; target.len()]);
        report.fitness_history = vec![report.best_fitness];
        report.fitness_vs_n = vec![NFitness { n: lo, fitness: report.best_fitness }];
        report.flags.push(NO_FEATURES.into());
        let mut reconstruction = target.clone();
        reconstruction.counts = vec![1.0; target.len()];
        reconstruction.gamma0 = 0.0;
        return Ok((report, reconstruction));
    }

    let result = model_select(
        &target,
        lo..=hi,
        |n| build_space(n, args.bits, &signs, &fixed, &bounds),
        &config,
        &ModelSelectConfig::default(),
        &model,
    )?;
    report.n_selected = result.n_interfaces_selected;
    report.best_fitness = result.best_fitness;
    report.parameters = result.parameters.clone();
    report.fitness_history = result.fitness_history.clone();
    report.fitness_vs_n = result
        .fitness_vs_n
        .iter()
        .map(|&(n, fitness)| NFitness { n, fitness })
        .collect();
    report.generations = result.generations;
    report.evaluations = result.evaluations;
    let mut reconstruction = result.reconstruction;
    reconstruction.meta.extra.insert(
        "fit".into(),
        format!("seed={} n={} fitness={:?}", args.seed, report.n_selected, report.best_fitness),
    );
    Ok((report, reconstruction))
}

fn cmd_fit(args: &FitArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let (mut report, reconstruction) = fit(args)?;
    match &args.out {
        Some(path) => {
            let recon_path = path.with_extension("reconstruction.csv");
            write_file(&recon_path, &render(&reconstruction))?;
            report.reconstruction = Some(recon_path.display().to_string());
            write_file(path, &to_json(&report))
        }
        None => emit(stdout, &to_json(&report)),
    }
}

#[derive(Debug, Args)]
pub struct LabelArgs {
    /// Sample spec file, or builtin:<name>
    #[arg(long)]
    pub sample: String,
    #[command(flatten)]
    pub spectral: SpectralArgs,
    #[arg(long, default_value_t = DEFAULT_MAX_ORDER)]
    pub max_order: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn cmd_label(args: &LabelArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let (spec, sample) = resolve_sample(&args.sample)?;
    let model = args.spectral.resolve().model()?;
    let report = label_report(spec.name, &sample, &model, args.max_order);
    write_or_emit(args.out.as_deref(), &to_json(&report), stdout)
}

#[derive(Debug, Args)]
pub struct ArtifactMapArgs {
    /// Sample spec file, or builtin:<name>
    #[arg(long)]
    pub sample: String,
    /// Feature pair as labels or indices, e.g. `I0,I1`
    #[arg(long, default_value = "I0,I1")]
    pub pair: String,
    /// Pump wavelength range `LO:HI`, nm
    #[arg(long, default_value = "404.0:404.5")]
    pub pump_range: String,
    #[arg(long, default_value_t = 501)]
    pub pump_points: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArtifactMap {
    pub pair: (String, String),
    pub delta_um: f64,
    pub curve: Vec<(f64, f64)>,
    pub marks: qoct_core::TuningMarks,
}

fn resolve_feature(features: &FeatureList, token: &str) -> CliResult<usize> {
    let token = token.trim();
    if let Ok(i) = token.parse::<usize>() {
        if i < features.len() {
            return Ok(i);
        }
    }
    features.position_of(token).ok_or_else(|| {
        CliError::Validation(format!("no feature '{token}' in this sample"))
    })
}

pub fn artifact_map(args: &ArtifactMapArgs) -> CliResult<ArtifactMap> {
    let (_, sample) = resolve_sample(&args.sample)?;
    let features = enumerate_merged_paths(&sample, DEFAULT_MAX_ORDER, DEFAULT_AMPLITUDE_FLOOR);
    let (a, b) = args
        .pair
        .split_once(',')
        .ok_or_else(|| CliError::Validation(format!("--pair '{}': expected A,B", args.pair)))?;
    let (k, l) = (resolve_feature(&features, a)?, resolve_feature(&features, b)?);
    let delta = pair_delay(&features, (k, l))?;
    let (lo, hi) = args
        .pump_range
        .split_once(':')
        .and_then(|(a, b)| Some((a.trim().parse::<f64>().ok()?, b.trim().parse::<f64>().ok()?)))
        .ok_or_else(|| CliError::Validation(format!("--pump-range '{}': expected LO:HI", args.pump_range)))?;
    if args.pump_points < 2 {
        return Err(CliError::Validation("--pump-points must be at least 2".into()));
    }
    let marks = tuning_marks(delta, lo, hi)?;
    let step = (hi - lo) / (args.pump_points - 1) as f64;
    let omega_delta = |nm: f64| qoct_core::spectral::omega0_for_pump(nm) * delta;
    let curve = (0..args.pump_points)
        .map(|i| {
            let nm = lo + step * i as f64;
            (nm, omega_delta(nm).cos())
        })
        .collect();
    Ok(ArtifactMap {
        pair: (features.label(k).to_string(), features.label(l).to_string()),
        delta_um: qoct_core::seconds_to_um(delta),
        curve,
        marks,
    })
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(";")
}

fn render_map(map: &ArtifactMap) -> String {
    let mut s = String::from("# qoct-tuning v1\n");
    s.push_str(&format!("# pair = {},{}\n", map.pair.0, map.pair.1));
    s.push_str(&format!("# delta_um = {:?}\n", map.delta_um));
    s.push_str(&format!("# period_nm = {:?}\n", map.marks.period_nm));
    s.push_str(&format!("# zeros_nm = {}\n", join(&map.marks.zeros)));
    s.push_str(&format!("# minima_nm = {}\n", join(&map.marks.minima)));
    s.push_str(&format!("# maxima_nm = {}\n", join(&map.marks.maxima)));
    s.push_str("pump_nm,cos\n");
    for (nm, c) in &map.curve {
        s.push_str(&format!("{nm:?},{c:?}\n"));
    }
    s
}

fn cmd_artifact_map(args: &ArtifactMapArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let map = artifact_map(args)?;
    write_or_emit(args.out.as_deref(), &render_map(&map), stdout)
}

#[derive(Debug, Args)]
pub struct CountParamsArgs {
    /// Number of interfaces
    pub n: i64,
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports are plain data");
    s.push('\n');
    s
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn emit(stdout: &mut dyn Write, text: &str) -> CliResult<()> {
    stdout
        .write_all(text.as_bytes())
        .map_err(|e| CliError::io(Path::new("<stdout>"), e))
}

fn write_or_emit(path: Option<&Path>, text: &str, stdout: &mut dyn Write) -> CliResult<()> {
    match path {
        Some(p) => write_file(p, text),
        None => emit(stdout, text),
    }
}

pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> CliResult<()> {
    match &cli.command {
        Command::Simulate(a) => cmd_simulate(a, stdout),
        Command::Fit(a) => cmd_fit(a, stdout),
        Command::Label(a) => cmd_label(a, stdout),
        Command::ArtifactMap(a) => cmd_artifact_map(a, stdout),
        Command::CountParams(a) => {
            let n = count_effective_parameters(a.n)?;
            emit(stdout, &format!("{n}\n"))
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match execute(&cli, &mut lock) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
