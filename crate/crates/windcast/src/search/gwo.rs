//! Grey wolf optimizer: the pack moves toward the three best solutions
//! (alpha, beta, delta) with the attraction coefficient decaying 2 → 0.

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
pub struct GwoOptions {
    /// Pack size (>= 3: alpha, beta, delta leaders).
    pub pack_size: usize,
    pub max_iterations: usize,
    pub budget: usize,
    pub seed: u64,
}

impl Default for GwoOptions {
    fn default() -> Self {
        Self {
            pack_size: 20,
            max_iterations: 100,
            budget: 2_000,
            seed: 0,
        }
    }
}

/// One wolf's next position given the three leaders and coefficient `a`.
/// With a = 0 this is exactly the centroid of the leaders.
pub(crate) fn position_update<R: Rng>(
    wolf: &[f64],
    leaders: [&[f64]; 3],
    a: f64,
    rng: &mut R,
) -> Vec<f64> {
    let dim = wolf.len();
    let mut next = vec![0.0; dim];
    for leader in leaders {
        for d in 0..dim {
            let big_a = 2.0 * a * rng.random::<f64>() - a;
            let big_c = 2.0 * rng.random::<f64>();
            let distance = (big_c * leader[d] - wolf[d]).abs();
            next[d] += (leader[d] - big_a * distance) / 3.0;
        }
    }
    next
}

pub fn gwo_optimize<F>(space: &SearchSpace, fitness: &F, options: &GwoOptions) -> Result<SearchOutcome>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let pack = options.pack_size;
    if pack < 3 {
        return Err(Error::InvalidParameter(format!(
            "GWO pack must be >= 3, got {pack}"
        )));
    }
    if options.budget < pack {
        return Err(Error::InvalidParameter(format!(
            "budget {} smaller than the pack {pack}",
            options.budget
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut budget = EvalBudget::new(options.budget);

    let init: Vec<Vec<f64>> = (0..budget.take(pack)).map(|_| space.sample(&mut rng)).collect();
    let mut wolves = evaluate_batch(init, space, fitness);
    if wolves.iter().all(Candidate::failed) {
        return Err(Error::AllCandidatesFailed);
    }
    let mut best = wolves[best_index(&wolves)].clone();
    let mut trace = SearchTrace::default();

    let denom = options.max_iterations.saturating_sub(1).max(1) as f64;
    for iter in 0..options.max_iterations {
        if budget.exhausted() {
            break;
        }
        // Attraction coefficient decays linearly 2 -> 0; exactly 0 on the
        // final iteration.
        let a = 2.0 * (1.0 - iter as f64 / denom);

        // Leaders: the three best wolves of the current pack.
        let mut order: Vec<usize> = (0..wolves.len()).collect();
        order.sort_by(|&x, &y| wolves[x].fitness.partial_cmp(&wolves[y].fitness).expect("no NaN"));
        let (alpha, beta, delta) = (
            wolves[order[0]].genome.clone(),
            wolves[order[1]].genome.clone(),
            wolves[order[2]].genome.clone(),
        );

        let allowed = budget.take(pack);
        let mut moved = Vec::with_capacity(allowed);
        for wolf in wolves.iter().take(allowed) {
            let mut next = position_update(
                &wolf.genome,
                [alpha.as_slice(), beta.as_slice(), delta.as_slice()],
                a,
                &mut rng,
            );
            space.reflect(&mut next);
            moved.push(next);
        }
        let rescored = evaluate_batch(moved, space, fitness);
        for (i, wolf) in rescored.into_iter().enumerate() {
            wolves[i] = wolf;
        }

        let pack_best = best_index(&wolves);
        if wolves[pack_best].fitness < best.fitness {
            best = wolves[pack_best].clone();
        }
        trace.rows.push(TraceRow {
            generation: iter + 1,
            best: best.fitness,
            mean: mean_finite(&wolves),
            p1: None,
            crm: None,
            evals: budget.used(),
        });
    }

    trace.evaluations = budget.used();
    Ok(SearchOutcome { best, trace })
}
