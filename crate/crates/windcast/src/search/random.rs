//! Uniform random search: the budget-matched baseline.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::search::{
    best_index, evaluate_batch, mean_finite, Candidate, EvalBudget, SearchOutcome, SearchSpace,
    SearchTrace, TraceRow,
};

const CHUNK: usize = 20;

pub fn random_search<F>(
    space: &SearchSpace,
    fitness: &F,
    budget: usize,
    seed: u64,
) -> Result<SearchOutcome>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if budget == 0 {
        return Err(Error::InvalidParameter("random search needs a budget >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut remaining = EvalBudget::new(budget);
    let mut best: Option<Candidate> = None;
    let mut trace = SearchTrace::default();
    let mut generation = 0usize;

    while !remaining.exhausted() {
        let batch_size = remaining.take(CHUNK);
        let genomes: Vec<Vec<f64>> = (0..batch_size).map(|_| space.sample(&mut rng)).collect();
        let batch = evaluate_batch(genomes, space, fitness);
        let batch_best = batch[best_index(&batch)].clone();
        match &best {
            Some(b) if b.fitness <= batch_best.fitness => {}
            _ => best = Some(batch_best),
        }
        generation += 1;
        trace.rows.push(TraceRow {
            generation,
            best: best.as_ref().map_or(f64::INFINITY, |b| b.fitness),
            mean: mean_finite(&batch),
            p1: None,
            crm: None,
            evals: remaining.used(),
        });
    }

    let best = best.filter(|b| !b.failed()).ok_or(Error::AllCandidatesFailed)?;
    trace.evaluations = remaining.used();
    Ok(SearchOutcome { best, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::bench::sphere;

    #[test]
    fn budget_is_exact() {
        let space = SearchSpace::continuous_box(3, -1.0, 1.0).unwrap();
        let outcome = random_search(&space, &sphere, 137, 0).unwrap();
        assert_eq!(outcome.trace.evaluations, 137);
        assert_eq!(outcome.trace.rows.last().unwrap().evals, 137);
    }

    #[test]
    fn deterministic_in_seed() {
        let space = SearchSpace::continuous_box(3, -1.0, 1.0).unwrap();
        assert_eq!(
            random_search(&space, &sphere, 100, 4).unwrap(),
            random_search(&space, &sphere, 100, 4).unwrap()
        );
    }
}
