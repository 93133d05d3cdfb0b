use std::collections::HashMap;

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pca::{pca_fit, pca_project};
use crate::bayes;
use crate::error::{Error, Result};
use crate::rng;

/// Number of generations averaged by the plateau detector.
const PLATEAU_WINDOW: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaConfig {
    pub population: usize,
    /// Per-gene flip probability.
    pub mutation_rate: f64,
    pub elitism: usize,
    /// Absolute change of the smoothed mean fitness that counts as a plateau.
    pub plateau_tol: f64,
    pub max_generations: usize,
    pub tournament: usize,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 50,
            mutation_rate: 0.01,
            elitism: 2,
            plateau_tol: 1e-5,
            max_generations: 200,
            tournament: 3,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 || self.population % 2 != 0 {
            return Err(Error::Parameter(format!(
                "ga.population must be even and >= 2, got {}",
                self.population
            )));
        }
        if !(self.mutation_rate > 0.0 && self.mutation_rate < 1.0) {
            return Err(Error::Parameter(format!(
                "ga.mutation_rate must be in (0, 1), got {}",
                self.mutation_rate
            )));
        }
        if self.elitism > self.population {
            return Err(Error::Parameter(format!(
                "ga.elitism {} exceeds population {}",
                self.elitism, self.population
            )));
        }
        if !(self.plateau_tol > 0.0) {
            return Err(Error::Parameter(format!(
                "ga.plateau_tol must be positive, got {}",
                self.plateau_tol
            )));
        }
        if self.max_generations == 0 {
            return Err(Error::Parameter("ga.max_generations must be >= 1".into()));
        }
        if self.tournament == 0 {
            return Err(Error::Parameter("tournament size must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mask(pub Vec<bool>);

impl Mask {
    pub fn all(n: usize) -> Self {
        Mask(vec![true; n])
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Sets one random bit if no bit is set.
    fn repair(&mut self, rng: &mut impl Rng) {
        if !self.0.iter().any(|&b| b) {
            let i = rng.gen_range(0..self.0.len());
            self.0[i] = true;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chromosome {
    pub mask: Mask,
    pub fitness: Option<f64>,
}

impl Chromosome {
    fn new(mask: Mask) -> Self {
        Self {
            mask,
            fitness: None,
        }
    }

    fn score(&self) -> f64 {
        self.fitness.unwrap_or(f64::NEG_INFINITY)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
    pub best_ever: f64,
    /// Features set in the best-ever mask.
    pub best_ever_features: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaOutcome {
    pub best: Chromosome,
    pub history: Vec<GenerationStats>,
    /// Stopped on the plateau criterion rather than the generation cap.
    pub converged: bool,
}

/// Evolves feature masks over `n_features` genes, maximizing `fitness`.
///
/// Generation 0 holds the all-ones mask plus random masks at 50% density.
/// Each later generation keeps the `elitism` best masks and fills the rest
/// pairwise: two tournament-selected parents, single-point crossover,
/// per-gene mutation, and repair of empty masks. Randomness for the initial
/// masks and for each child pair is drawn from a stream seeded by
/// `(seed, generation, index)`, and fitness values are evaluated in parallel,
/// so results do not depend on thread scheduling.
///
/// Stops when the 3-generation moving average of the mean population fitness
/// changes by less than `plateau_tol`, or after `max_generations`.
pub fn ga_select<F>(n_features: usize, fitness: F, config: &GaConfig) -> Result<GaOutcome>
where
    F: Fn(&Mask) -> Result<f64> + Sync,
{
    config.validate()?;
    if n_features < 2 {
        return Err(Error::Parameter(format!(
            "GA needs at least 2 features, got {n_features}"
        )));
    }
    let mut population: Vec<Chromosome> = (0..config.population)
        .map(|i| {
            if i == 0 {
                return Chromosome::new(Mask::all(n_features));
            }
            let mut r = rng::seeded(rng::derive_seed(config.seed, &[0, i as u64]));
            let mut m = Mask((0..n_features).map(|_| r.gen_bool(0.5)).collect());
            m.repair(&mut r);
            Chromosome::new(m)
        })
        .collect();

    let mut cache: HashMap<Mask, f64> = HashMap::new();
    let mut history: Vec<GenerationStats> = Vec::new();
    let mut best: Option<Chromosome> = None;
    let mut smoothed: Vec<f64> = Vec::new();
    let mut converged = false;

    for generation in 0..config.max_generations {
        evaluate(&mut population, &mut cache, &fitness).map_err(|e| Error::Generation {
            generation,
            source: Box::new(e),
        })?;

        let scores: Vec<f64> = population.iter().map(Chromosome::score).collect();
        let top = argmax(&scores);
        if best.as_ref().is_none_or(|b| scores[top] > b.score()) {
            best = Some(population[top].clone());
        }
        let best_ref = best.as_ref().expect("set above");
        let mean = scores.iter().sum::<f64>() / scores.len() as f64;
        history.push(GenerationStats {
            generation,
            best: scores[top],
            mean,
            best_ever: best_ref.score(),
            best_ever_features: best_ref.mask.count(),
        });

        if history.len() >= PLATEAU_WINDOW {
            let window = &history[history.len() - PLATEAU_WINDOW..];
            smoothed.push(window.iter().map(|h| h.mean).sum::<f64>() / PLATEAU_WINDOW as f64);
            if let [.., prev, last] = smoothed[..] {
                if (last - prev).abs() < config.plateau_tol {
                    converged = true;
                    break;
                }
            }
        }
        if generation + 1 == config.max_generations {
            break;
        }
        population = next_generation(&population, &scores, generation + 1, config);
    }

    Ok(GaOutcome {
        best: best.expect("at least one generation"),
        history,
        converged,
    })
}

fn evaluate<F>(
    population: &mut [Chromosome],
    cache: &mut HashMap<Mask, f64>,
    fitness: &F,
) -> Result<()>
where
    F: Fn(&Mask) -> Result<f64> + Sync,
{
    for c in population.iter_mut().filter(|c| c.fitness.is_none()) {
        c.fitness = cache.get(&c.mask).copied();
    }
    let pending: Vec<usize> = population
        .iter()
        .enumerate()
        .filter(|(_, c)| c.fitness.is_none())
        .map(|(i, _)| i)
        .collect();
    let values: Vec<f64> = pending
        .par_iter()
        .map(|&i| fitness(&population[i].mask))
        .collect::<Result<_>>()?;
    for (&i, v) in pending.iter().zip(values) {
        if !v.is_finite() {
            return Err(Error::Data(format!("non-finite fitness {v}")));
        }
        population[i].fitness = Some(v);
        cache.insert(population[i].mask.clone(), v);
    }
    Ok(())
}

/// First index of the maximum.
fn argmax(v: &[f64]) -> usize {
    (1..v.len()).fold(0, |b, i| if v[i] > v[b] { i } else { b })
}

fn tournament(scores: &[f64], size: usize, r: &mut impl Rng) -> usize {
    let mut winner = r.gen_range(0..scores.len());
    for _ in 1..size {
        let c = r.gen_range(0..scores.len());
        if scores[c] > scores[winner] || (scores[c] == scores[winner] && c < winner) {
            winner = c;
        }
    }
    winner
}

fn next_generation(
    population: &[Chromosome],
    scores: &[f64],
    generation: usize,
    config: &GaConfig,
) -> Vec<Chromosome> {
    let n = population[0].mask.len();
    let mut ranked: Vec<usize> = (0..population.len()).collect();
    ranked.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut next: Vec<Chromosome> = ranked[..config.elitism]
        .iter()
        .map(|&i| population[i].clone())
        .collect();
    let mut pair = 0u64;
    while next.len() < config.population {
        let mut r = rng::seeded(rng::derive_seed(config.seed, &[generation as u64, pair]));
        pair += 1;
        let a = &population[tournament(scores, config.tournament, &mut r)]
            .mask
            .0;
        let b = &population[tournament(scores, config.tournament, &mut r)]
            .mask
            .0;
        let cut = r.gen_range(1..n);
        let mut c1: Vec<bool> = a[..cut].iter().chain(&b[cut..]).copied().collect();
        let mut c2: Vec<bool> = b[..cut].iter().chain(&a[cut..]).copied().collect();
        for child in [&mut c1, &mut c2] {
            for g in child.iter_mut() {
                if r.gen_bool(config.mutation_rate) {
                    *g = !*g;
                }
            }
        }
        for child in [c1, c2] {
            if next.len() < config.population {
                let mut m = Mask(child);
                m.repair(&mut r);
                next.push(Chromosome::new(m));
            }
        }
    }
    next
}

/// Success ratio of PCA + naive Bayes on the masked columns: PCA is fitted on
/// the masked training rows, both sets are projected, the classifier is fitted
/// on the projected training rows and scored on the projected evaluation rows.
pub fn ga_fitness<S: AsRef<str>>(
    mask: &Mask,
    train: &DMatrix<f64>,
    train_labels: &[S],
    eval: &DMatrix<f64>,
    eval_labels: &[S],
    pca_threshold: f64,
) -> Result<f64> {
    if mask.len() != train.ncols() || eval.ncols() != train.ncols() {
        return Err(Error::Dimension {
            expected: train.ncols(),
            got: mask.len(),
        });
    }
    let cols = mask.indices();
    if cols.is_empty() {
        return Err(Error::Parameter("empty feature mask".into()));
    }
    let tr = train.select_columns(&cols);
    let ev = eval.select_columns(&cols);
    let pca = pca_fit(&tr, pca_threshold)?;
    let model = bayes::fit(&pca_project(&pca, &tr)?, train_labels)?;
    let (success, _) = bayes::evaluate(&model, &pca_project(&pca, &ev)?, eval_labels)?;
    Ok(success)
}
