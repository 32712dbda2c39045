//! Canonical differential evolution, DE/rand/1/bin with fixed F and CR.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::search::{
    best_index, evaluate_batch, mean_finite, Candidate, EvalBudget, SearchOutcome, SearchSpace,
    SearchTrace, TraceRow,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeOptions {
    /// Population size NP (>= 4 so r1, r2, r3, i stay distinct).
    pub population: usize,
    pub mutation_factor: f64,
    pub crossover_rate: f64,
    pub max_generations: usize,
    pub budget: usize,
    pub seed: u64,
}

impl Default for DeOptions {
    fn default() -> Self {
        Self {
            population: 20,
            mutation_factor: 0.5,
            crossover_rate: 0.9,
            max_generations: 100,
            budget: 2_000,
            seed: 0,
        }
    }
}

pub fn de_optimize<F>(space: &SearchSpace, fitness: &F, options: &DeOptions) -> Result<SearchOutcome>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let np = options.population;
    if np < 4 {
        return Err(Error::InvalidParameter(format!(
            "DE population must be >= 4, got {np}"
        )));
    }
    if options.budget < np {
        return Err(Error::InvalidParameter(format!(
            "budget {} smaller than the initial population {np}",
            options.budget
        )));
    }
    if !(0.0..=1.0).contains(&options.crossover_rate) || options.mutation_factor < 0.0 {
        return Err(Error::InvalidParameter("F must be >= 0 and CR in [0, 1]".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut budget = EvalBudget::new(options.budget);

    let init: Vec<Vec<f64>> = (0..budget.take(np)).map(|_| space.sample(&mut rng)).collect();
    let mut population = evaluate_batch(init, space, fitness);
    if population.iter().all(Candidate::failed) {
        return Err(Error::AllCandidatesFailed);
    }
    let mut best = population[best_index(&population)].clone();
    let mut trace = SearchTrace::default();
    let dim = space.dim();

    for gen in 1..=options.max_generations {
        if budget.exhausted() {
            break;
        }
        let allowed = budget.take(np);
        let mut trials = Vec::with_capacity(allowed);
        for i in 0..allowed {
            // Three distinct donors, all different from the target.
            let mut r = [0usize; 3];
            let mut picked = 0;
            while picked < 3 {
                let idx = rng.random_range(0..np);
                if idx != i && !r[..picked].contains(&idx) {
                    r[picked] = idx;
                    picked += 1;
                }
            }
            let mutant: Vec<f64> = (0..dim)
                .map(|j| {
                    population[r[0]].genome[j]
                        + options.mutation_factor
                            * (population[r[1]].genome[j] - population[r[2]].genome[j])
                })
                .collect();
            let j_rand = rng.random_range(0..dim);
            let mut trial: Vec<f64> = (0..dim)
                .map(|j| {
                    if j == j_rand || rng.random::<f64>() < options.crossover_rate {
                        mutant[j]
                    } else {
                        population[i].genome[j]
                    }
                })
                .collect();
            space.reflect(&mut trial);
            trials.push(trial);
        }

        let offspring = evaluate_batch(trials, space, fitness);
        for (i, child) in offspring.into_iter().enumerate() {
            if child.fitness < population[i].fitness {
                population[i] = child;
            }
        }
        let pop_best = best_index(&population);
        if population[pop_best].fitness < best.fitness {
            best = population[pop_best].clone();
        }
        trace.rows.push(TraceRow {
            generation: gen,
            best: best.fitness,
            mean: mean_finite(&population),
            p1: None,
            crm: None,
            evals: budget.used(),
        });
    }

    trace.evaluations = budget.used();
    Ok(SearchOutcome { best, trace })
}
