//! Self-adaptive differential evolution: two concurrent mutation strategies
//! (DE/rand/1 and DE/current-to-best/1) whose selection probability adapts
//! to observed success rates, with self-adapted F and CR.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::search::local::{bfgs, coordinate_descent};
use crate::search::{
    best_index, evaluate_batch, mean_finite, Candidate, EvalBudget, LocalSearchMode,
    SearchOutcome, SearchSpace, SearchTrace, TraceRow,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SadeOptions {
    /// Population size NP (>= 5).
    pub population: usize,
    pub max_generations: usize,
    /// Hard cap on fitness evaluations.
    pub budget: usize,
    pub seed: u64,
    /// Learning period N_f: strategy probability update interval.
    pub learning_period: usize,
    /// CRm refresh interval in generations.
    pub crm_refresh: usize,
    /// Generations each individual's CR stays fixed before resampling.
    pub cr_hold: usize,
    /// Local search mode applied to the incumbent every `local_period`
    /// generations.
    pub local_search: LocalSearchMode,
    pub local_period: usize,
}

impl Default for SadeOptions {
    fn default() -> Self {
        Self {
            population: 20,
            max_generations: 100,
            budget: 2_000,
            seed: 0,
            learning_period: 50,
            crm_refresh: 25,
            cr_hold: 5,
            local_search: LocalSearchMode::None,
            local_period: 20,
        }
    }
}

const P1_FLOOR: f64 = 0.05;
const P1_CEIL: f64 = 0.95;

/// Samples F ~ Normal(0.5, 0.3), redrawn until it lands in (0, 2].
pub(crate) fn sample_mutation_factor<R: Rng>(rng: &mut R) -> f64 {
    let normal = Normal::new(0.5, 0.3).expect("valid normal");
    loop {
        let f = normal.sample(rng);
        if f > 0.0 && f <= 2.0 {
            return f;
        }
    }
}

/// p1 ← ns1(ns2+nf2) / (ns2(ns1+nf1) + ns1(ns2+nf2)), clamped to
/// [0.05, 0.95]; the 0/0 case leaves p1 unchanged.
pub(crate) fn update_strategy_probability(
    p1: f64,
    ns1: usize,
    nf1: usize,
    ns2: usize,
    nf2: usize,
) -> f64 {
    let (ns1, nf1, ns2, nf2) = (ns1 as f64, nf1 as f64, ns2 as f64, nf2 as f64);
    let numerator = ns1 * (ns2 + nf2);
    let denominator = ns2 * (ns1 + nf1) + numerator;
    if denominator == 0.0 {
        return p1;
    }
    (numerator / denominator).clamp(P1_FLOOR, P1_CEIL)
}

fn distinct_indices<R: Rng>(rng: &mut R, n: usize, exclude: usize, count: usize) -> Vec<usize> {
    let mut picked = Vec::with_capacity(count);
    while picked.len() < count {
        let idx = rng.random_range(0..n);
        if idx != exclude && !picked.contains(&idx) {
            picked.push(idx);
        }
    }
    picked
}

/// Binomial crossover with one forced gene.
fn crossover<R: Rng>(target: &[f64], mutant: &[f64], cr: f64, rng: &mut R) -> Vec<f64> {
    let dim = target.len();
    let j_rand = rng.random_range(0..dim);
    (0..dim)
        .map(|j| {
            if j == j_rand || rng.random::<f64>() < cr {
                mutant[j]
            } else {
                target[j]
            }
        })
        .collect()
}

pub fn sade_optimize<F>(
    space: &SearchSpace,
    fitness: &F,
    options: &SadeOptions,
) -> Result<SearchOutcome>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let np = options.population;
    if np < 5 {
        return Err(Error::InvalidParameter(format!(
            "SaDE population must be >= 5, got {np}"
        )));
    }
    if options.budget < np {
        return Err(Error::InvalidParameter(format!(
            "budget {} smaller than the initial population {np}",
            options.budget
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut budget = EvalBudget::new(options.budget);

    let init_genomes: Vec<Vec<f64>> = (0..budget.take(np)).map(|_| space.sample(&mut rng)).collect();
    let mut population = evaluate_batch(init_genomes, space, fitness);
    if population.iter().all(Candidate::failed) {
        return Err(Error::AllCandidatesFailed);
    }
    let mut best = population[best_index(&population)].clone();

    let mut p1 = 0.5;
    let mut crm = 0.5;
    let mut cr_values: Vec<f64> = Vec::new();
    let cr_dist = Normal::new(0.0, 0.1).expect("valid normal");
    let resample_crs = |crm: f64, rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..np)
            .map(|_| (crm + cr_dist.sample(rng)).clamp(0.0, 1.0))
            .collect()
    };
    let (mut ns1, mut nf1, mut ns2, mut nf2) = (0usize, 0usize, 0usize, 0usize);
    let mut successful_crs: Vec<f64> = Vec::new();
    let mut trace = SearchTrace::default();

    for gen in 1..=options.max_generations {
        if budget.exhausted() {
            break;
        }
        // CR values held fixed for `cr_hold` consecutive generations.
        if (gen - 1) % options.cr_hold == 0 || cr_values.is_empty() {
            cr_values = resample_crs(crm, &mut rng);
        }

        let pop_best = best_index(&population);
        let allowed = budget.take(np);
        let mut trials: Vec<Vec<f64>> = Vec::with_capacity(allowed);
        let mut used_strategy: Vec<bool> = Vec::with_capacity(allowed); // true = rand/1
        for i in 0..allowed {
            let rand1 = rng.random::<f64>() < p1;
            let factor = sample_mutation_factor(&mut rng);
            let dim = space.dim();
            let mutant: Vec<f64> = if rand1 {
                let r = distinct_indices(&mut rng, np, i, 3);
                (0..dim)
                    .map(|j| {
                        population[r[0]].genome[j]
                            + factor * (population[r[1]].genome[j] - population[r[2]].genome[j])
                    })
                    .collect()
            } else {
                let r = distinct_indices(&mut rng, np, i, 2);
                (0..dim)
                    .map(|j| {
                        let xi = population[i].genome[j];
                        xi + factor * (population[pop_best].genome[j] - xi)
                            + factor * (population[r[0]].genome[j] - population[r[1]].genome[j])
                    })
                    .collect()
            };
            let mut trial = crossover(&population[i].genome, &mutant, cr_values[i], &mut rng);
            space.reflect(&mut trial);
            trials.push(trial);
            used_strategy.push(rand1);
        }

        let offspring = evaluate_batch(trials, space, fitness);
        for (i, child) in offspring.into_iter().enumerate() {
            let improved = child.fitness < population[i].fitness;
            match (used_strategy[i], improved) {
                (true, true) => ns1 += 1,
                (true, false) => nf1 += 1,
                (false, true) => ns2 += 1,
                (false, false) => nf2 += 1,
            }
            if improved {
                successful_crs.push(cr_values[i]);
                population[i] = child;
            }
        }

        let pop_best = best_index(&population);
        if population[pop_best].fitness < best.fitness {
            best = population[pop_best].clone();
        }

        // Optional local refinement of the incumbent.
        if options.local_search != LocalSearchMode::None
            && gen % options.local_period == 0
            && !budget.exhausted()
        {
            let shrink = 0.5f64.powi((gen / options.local_period) as i32 - 1);
            let refined = match options.local_search {
                LocalSearchMode::Coordinate => {
                    coordinate_descent(space, fitness, &best, 0.05 * shrink, &mut budget)
                }
                LocalSearchMode::Bfgs => bfgs(space, fitness, &best, &mut budget),
                LocalSearchMode::None => unreachable!(),
            };
            if refined.fitness < best.fitness {
                population[pop_best] = refined.clone();
                best = refined;
            }
        }

        trace.rows.push(TraceRow {
            generation: gen,
            best: best.fitness,
            mean: mean_finite(&population),
            p1: Some(p1),
            crm: Some(crm),
            evals: budget.used(),
        });

        let last_generation = gen == options.max_generations || budget.exhausted();
        // Adaptation guides future sampling; nothing to guide after the
        // final generation.
        if !last_generation {
            if gen % options.learning_period == 0 {
                p1 = update_strategy_probability(p1, ns1, nf1, ns2, nf2);
                (ns1, nf1, ns2, nf2) = (0, 0, 0, 0);
                trace.p1_update_gens.push(gen);
            }
            if gen % options.crm_refresh == 0 {
                if !successful_crs.is_empty() {
                    crm = successful_crs.iter().sum::<f64>() / successful_crs.len() as f64;
                    successful_crs.clear();
                }
                trace.crm_refresh_gens.push(gen);
            }
        }
    }

    trace.evaluations = budget.used();
    Ok(SearchOutcome { best, trace })
}
