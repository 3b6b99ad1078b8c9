//! Generational loop and layer-count selection.

use std::collections::HashMap;
use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::search::{Chromosome, SearchSpace};
use crate::engine::{mean_absolute_error, Interferogram, NumericEngine, QuadratureSettings};
use crate::error::{QoctError, Result};
use crate::spectral::SpectralModel;

/// Fitness of candidates that do not decode to a valid stack.
pub const WORST_FITNESS: f64 = f64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub population_size: usize,
    pub max_generations: usize,
    pub crossover_rate: f64,
    /// Per-bit flip probability; `None` uses `1/len`.
    pub mutation_rate: Option<f64>,
    pub elitism: usize,
    pub tournament_size: usize,
    /// Stop once the best fitness is at or below this.
    pub fitness_threshold: f64,
    pub seed: u64,
    /// Evaluate fitness on the rayon pool. Does not affect results.
    pub parallel: bool,
    pub quadrature: QuadratureSettings,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 300,
            max_generations: 50,
            crossover_rate: 0.9,
            mutation_rate: None,
            elitism: 2,
            tournament_size: 3,
            fitness_threshold: 0.0,
            seed: 0,
            parallel: true,
            quadrature: QuadratureSettings::default(),
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(QoctError::InvalidConfig(msg));
        if self.population_size < 2 {
            return bad(format!("population must be >= 2, got {}", self.population_size));
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            return bad(format!("crossover rate {} outside [0, 1]", self.crossover_rate));
        }
        if let Some(m) = self.mutation_rate {
            if !(0.0..=1.0).contains(&m) {
                return bad(format!("mutation rate {m} outside [0, 1]"));
            }
        }
        if self.elitism >= self.population_size {
            return bad("elitism must be smaller than the population".into());
        }
        if self.tournament_size == 0 {
            return bad("tournament size must be >= 1".into());
        }
        if self.fitness_threshold.is_nan() {
            return bad("fitness threshold is NaN".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedParameter {
    pub name: String,
    pub value: f64,
    pub unit: String,
    pub fixed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalResult {
    pub parameters: Vec<NamedParameter>,
    pub best_fitness: f64,
    /// Best fitness after each generation, initial population first.
    pub fitness_history: Vec<f64>,
    pub n_interfaces_selected: usize,
    /// `(N, best fitness)` for every interface count tried.
    pub fitness_vs_n: Vec<(usize, f64)>,
    pub generations: usize,
    pub evaluations: usize,
    pub best_chromosome: Chromosome,
    pub space: SearchSpace,
    pub reconstruction: Interferogram,
}

impl RetrievalResult {
    pub fn parameter(&self, name: &str) -> Option<f64> {
        self.parameters.iter().find(|p| p.name == name).map(|p| p.value)
    }

    pub fn full_parameters(&self) -> Vec<f64> {
        self.parameters.iter().map(|p| p.value).collect()
    }

    pub fn sample(&self) -> Result<crate::stack::Sample> {
        self.space.build_sample(&self.full_parameters())
    }
}

/// Shared fitness machinery: one quadrature plan for the target grid.
struct Evaluator<'a> {
    engine: NumericEngine,
    target: &'a [f64],
    space: &'a SearchSpace,
}

impl Evaluator<'_> {
    fn evaluate(&self, c: &Chromosome) -> f64 {
        let full = self.space.expand(&self.space.decode(c));
        let Ok(sample) = self.space.build_sample(&full) else {
            return WORST_FITNESS;
        };
        match self.engine.trace(&sample) {
            Ok((counts, _)) => {
                let f = mean_absolute_error(&counts, self.target);
                if f.is_finite() {
                    f
                } else {
                    WORST_FITNESS
                }
            }
            Err(_) => WORST_FITNESS,
        }
    }
}

/// Mean absolute error between `target` and the trace of the decoded
/// candidate, or [`WORST_FITNESS`] when the candidate is not a valid stack.
pub fn fitness(
    candidate: &Chromosome,
    target: &Interferogram,
    space: &SearchSpace,
    model: &SpectralModel,
) -> Result<f64> {
    let engine = NumericEngine::for_target(model, target, &QuadratureSettings::default())?;
    Ok(Evaluator {
        engine,
        target: &target.counts,
        space,
    }
    .evaluate(candidate))
}

fn tournament(rng: &mut ChaCha8Rng, fit: &[f64], size: usize) -> usize {
    let mut best = rng.random_range(0..fit.len());
    for _ in 1..size {
        let c = rng.random_range(0..fit.len());
        if fit[c] < fit[best] {
            best = c;
        }
    }
    best
}

fn mutate(rng: &mut ChaCha8Rng, c: &mut Chromosome, rate: f64) {
    for bit in c.bits.iter_mut() {
        if rng.random::<f64>() < rate {
            *bit = !*bit;
        }
    }
}

fn evaluate_all(
    eval: &Evaluator<'_>,
    cache: &mut HashMap<Chromosome, f64>,
    pop: &[Chromosome],
    parallel: bool,
) -> Vec<f64> {
    let mut seen = std::collections::HashSet::new();
    let missing: Vec<&Chromosome> = pop
        .iter()
        .filter(|c| !cache.contains_key(*c) && seen.insert(*c))
        .collect();
    let fresh: Vec<f64> = if parallel {
        missing.par_iter().map(|c| eval.evaluate(c)).collect()
    } else {
        missing.iter().map(|c| eval.evaluate(c)).collect()
    };
    for (c, f) in missing.into_iter().zip(fresh) {
        cache.insert(c.clone(), f);
    }
    pop.iter().map(|c| cache[c]).collect()
}

/// Runs the genetic algorithm for one search space.
pub fn evolve(
    target: &Interferogram,
    space: &SearchSpace,
    config: &GaConfig,
    model: &SpectralModel,
) -> Result<RetrievalResult> {
    config.validate()?;
    space.validate()?;
    let engine = NumericEngine::for_target(model, target, &config.quadrature)?;
    evolve_with(engine, target, space, config)
}

fn evolve_with(
    engine: NumericEngine,
    target: &Interferogram,
    space: &SearchSpace,
    config: &GaConfig,
) -> Result<RetrievalResult> {
    let eval = Evaluator {
        engine,
        target: &target.counts,
        space,
    };
    let len = space.chromosome_len();
    let rate = config.mutation_rate.unwrap_or(1.0 / len as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut cache: HashMap<Chromosome, f64> = HashMap::new();

    let mut pop: Vec<Chromosome> = (0..config.population_size)
        .map(|_| Chromosome {
            bits: (0..len).map(|_| rng.random::<bool>()).collect(),
        })
        .collect();
    let mut fit = evaluate_all(&eval, &mut cache, &pop, config.parallel);
    let best_of = |fit: &[f64]| fit.iter().copied().fold(f64::INFINITY, f64::min);
    let mut history = vec![best_of(&fit)];
    let mut generations = 0;

    while generations < config.max_generations && history[generations] > config.fitness_threshold {
        let mut order: Vec<usize> = (0..pop.len()).collect();
        order.sort_by(|&a, &b| fit[a].total_cmp(&fit[b]).then(a.cmp(&b)));
        let mut next: Vec<Chromosome> = order[..config.elitism].iter().map(|&i| pop[i].clone()).collect();
        while next.len() < config.population_size {
            let a = tournament(&mut rng, &fit, config.tournament_size);
            let b = tournament(&mut rng, &fit, config.tournament_size);
            let (mut c1, mut c2) = (pop[a].clone(), pop[b].clone());
            if len > 1 && rng.random::<f64>() < config.crossover_rate {
                let cut = rng.random_range(1..len);
                c1.bits[cut..].copy_from_slice(&pop[b].bits[cut..]);
                c2.bits[cut..].copy_from_slice(&pop[a].bits[cut..]);
            }
            mutate(&mut rng, &mut c1, rate);
            mutate(&mut rng, &mut c2, rate);
            next.push(c1);
            if next.len() < config.population_size {
                next.push(c2);
            }
        }
        pop = next;
        fit = evaluate_all(&eval, &mut cache, &pop, config.parallel);
        history.push(best_of(&fit));
        generations += 1;
    }

    let best = (0..pop.len())
        .min_by(|&a, &b| fit[a].total_cmp(&fit[b]).then(a.cmp(&b)))
        .expect("non-empty population");
    let chromosome = pop[best].clone();
    let full = space.expand(&space.decode(&chromosome));
    let sample = space.build_sample(&full)?;
    let mut reconstruction = eval.engine.interferogram(&sample)?;
    reconstruction.meta.extra = target.meta.extra.clone();
    let best_fitness = reconstruction.mae(&target.counts);
    let parameters = space
        .params()
        .iter()
        .zip(&full)
        .map(|(p, &value)| NamedParameter {
            name: p.kind.name(),
            value,
            unit: p.kind.unit().to_string(),
            fixed: p.fixed.is_some(),
        })
        .collect();
    Ok(RetrievalResult {
        parameters,
        best_fitness,
        fitness_history: history,
        n_interfaces_selected: space.n_interfaces(),
        fitness_vs_n: vec![(space.n_interfaces(), best_fitness)],
        generations,
        evaluations: cache.len(),
        best_chromosome: chromosome,
        space: space.clone(),
        reconstruction,
    })
}

/// Tie-break for layer-count selection: the smallest `N` whose fitness is
/// within `relative·min + absolute` of the minimum wins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSelectConfig {
    pub relative_tolerance: f64,
    pub absolute_tolerance: f64,
}

impl Default for ModelSelectConfig {
    fn default() -> Self {
        Self {
            relative_tolerance: 0.05,
            absolute_tolerance: 0.0,
        }
    }
}

/// Evolves every interface count in `n_range` with the same seed and keeps
/// the smallest adequate one.
pub fn model_select<F>(
    target: &Interferogram,
    n_range: RangeInclusive<usize>,
    space_builder: F,
    config: &GaConfig,
    selection: &ModelSelectConfig,
    model: &SpectralModel,
) -> Result<RetrievalResult>
where
    F: Fn(usize) -> Result<SearchSpace>,
{
    config.validate()?;
    if n_range.is_empty() {
        return Err(QoctError::InvalidConfig("empty interface-count range".into()));
    }
    let engine = NumericEngine::for_target(model, target, &config.quadrature)?;
    let mut results = Vec::new();
    for n in n_range {
        let space = space_builder(n)?;
        space.validate()?;
        results.push(evolve_with(engine.clone(), target, &space, config)?);
    }
    let curve: Vec<(usize, f64)> = results
        .iter()
        .map(|r| (r.n_interfaces_selected, r.best_fitness))
        .collect();
    let min = curve.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    let cutoff = min * (1.0 + selection.relative_tolerance) + selection.absolute_tolerance;
    let pick = curve
        .iter()
        .position(|c| c.1 <= cutoff)
        .expect("minimum is always within tolerance");
    let mut chosen = results.swap_remove(pick);
    chosen.fitness_vs_n = curve;
    Ok(chosen)
}
