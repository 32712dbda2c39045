//! Local refinement of the incumbent: budgeted coordinate perturbation for
//! noisy objectives, finite-difference BFGS for smooth benchmarks.

use serde::{Deserialize, Serialize};

use crate::search::{Candidate, EvalBudget, ParamKind, SearchSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LocalSearchMode {
    /// No local refinement.
    #[default]
    None,
    /// Coordinate perturbation, 3 probes per continuous dimension.
    Coordinate,
    /// Finite-difference BFGS with backtracking line search.
    Bfgs,
}

/// Probes each continuous dimension at ±delta and, when one side improves,
/// once more at 2·delta in that direction. Greedy accept.
pub(crate) fn coordinate_descent<F>(
    space: &SearchSpace,
    fitness: &F,
    start: &Candidate,
    delta_frac: f64,
    budget: &mut EvalBudget,
) -> Candidate
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let mut best = start.clone();
    for (d, spec) in space.dims.iter().enumerate() {
        if spec.kind != ParamKind::Continuous {
            continue;
        }
        let (lo, hi) = spec.genome_bounds();
        let delta = delta_frac * (hi - lo);
        let try_point = |genome: Vec<f64>, budget: &mut EvalBudget| -> Option<Candidate> {
            if budget.take(1) == 0 {
                return None;
            }
            let decoded = space.decode(&genome);
            let raw = fitness(&decoded);
            Some(Candidate {
                genome,
                decoded,
                fitness: if raw.is_nan() { f64::INFINITY } else { raw },
            })
        };

        let mut improved_dir = 0.0;
        for sign in [1.0, -1.0] {
            let mut genome = best.genome.clone();
            genome[d] += sign * delta;
            space.reflect(&mut genome);
            match try_point(genome, budget) {
                Some(c) if c.fitness < best.fitness => {
                    improved_dir = sign;
                    best = c;
                }
                Some(_) => {}
                None => return best,
            }
        }
        if improved_dir != 0.0 {
            let mut genome = best.genome.clone();
            genome[d] += improved_dir * 2.0 * delta;
            space.reflect(&mut genome);
            match try_point(genome, budget) {
                Some(c) if c.fitness < best.fitness => best = c,
                Some(_) => {}
                None => return best,
            }
        }
    }
    best
}

/// Finite-difference BFGS for smooth objectives. Gradients use central
/// differences; steps are clamped into the genome box.
pub(crate) fn bfgs<F>(
    space: &SearchSpace,
    fitness: &F,
    start: &Candidate,
    budget: &mut EvalBudget,
) -> Candidate
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let n = space.dim();
    let eval = |genome: &[f64], budget: &mut EvalBudget| -> Option<f64> {
        if budget.take(1) == 0 {
            return None;
        }
        let raw = fitness(&space.decode(genome));
        Some(if raw.is_nan() { f64::INFINITY } else { raw })
    };
    let grad = |x: &[f64], budget: &mut EvalBudget| -> Option<Vec<f64>> {
        let mut g = vec![0.0; n];
        for d in 0..n {
            let (lo, hi) = space.dims[d].genome_bounds();
            let h = 1e-6 * (hi - lo).max(1.0);
            let mut xp = x.to_vec();
            xp[d] = (x[d] + h).min(hi);
            let mut xm = x.to_vec();
            xm[d] = (x[d] - h).max(lo);
            let fp = eval(&xp, budget)?;
            let fm = eval(&xm, budget)?;
            let span = xp[d] - xm[d];
            if span == 0.0 {
                return None;
            }
            g[d] = (fp - fm) / span;
        }
        Some(g)
    };

    let clamp = |x: &mut [f64]| {
        for (v, spec) in x.iter_mut().zip(&space.dims) {
            let (lo, hi) = spec.genome_bounds();
            *v = v.clamp(lo, hi);
        }
    };

    let mut x = start.genome.clone();
    clamp(&mut x);
    let mut fx = start.fitness;
    let mut h_inv: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let Some(mut g) = grad(&x, budget) else {
        return start.clone();
    };

    for _ in 0..50 {
        // p = -H⁻¹ g
        let mut p = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                p[i] -= h_inv[i][j] * g[j];
            }
        }
        let gp: f64 = g.iter().zip(&p).map(|(a, b)| a * b).sum();
        if gp >= 0.0 || gp.abs() < 1e-14 {
            break;
        }
        // Backtracking Armijo line search.
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..12 {
            let mut xn: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a + alpha * b).collect();
            clamp(&mut xn);
            match eval(&xn, budget) {
                Some(fxn) if fxn <= fx + 1e-4 * alpha * gp => {
                    accepted = Some((xn, fxn));
                    break;
                }
                Some(_) => alpha *= 0.5,
                None => break,
            }
        }
        let Some((xn, fxn)) = accepted else { break };
        let Some(gn) = grad(&xn, budget) else { break };

        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        if sy > 1e-12 {
            // BFGS inverse update: H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ.
            let rho = 1.0 / sy;
            let mut hy = vec![0.0; n];
            for i in 0..n {
                for j in 0..n {
                    hy[i] += h_inv[i][j] * y[j];
                }
            }
            let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
            for i in 0..n {
                for j in 0..n {
                    h_inv[i][j] += (sy + yhy) * rho * rho * s[i] * s[j]
                        - rho * (hy[i] * s[j] + s[i] * hy[j]);
                }
            }
        }
        x = xn;
        fx = fxn;
        g = gn;
        if budget.exhausted() {
            break;
        }
    }

    if fx < start.fitness {
        let decoded = space.decode(&x);
        Candidate {
            genome: x,
            decoded,
            fitness: fx,
        }
    } else {
        start.clone()
    }
}
