//! Black-box hyperparameter optimization over a mixed search space:
//! self-adaptive differential evolution, canonical DE, grey wolf, grid and
//! random search, plus Friedman ranking for model comparison.

pub mod bench;
mod de;
mod friedman;
mod grid;
mod gwo;
mod local;
mod random;
mod sade;

pub use de::{de_optimize, DeOptions};
pub use friedman::{friedman_ranks, FriedmanResult};
pub use grid::{grid_search, GridResult};
pub use gwo::{gwo_optimize, GwoOptions};
pub use local::LocalSearchMode;
pub use random::random_search;
pub use sade::{sade_optimize, SadeOptions};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamKind {
    Continuous,
    Integer,
    Categorical,
}

/// One dimension of the search space. Log-scale dimensions store log10
/// values in the genome and exponentiate on decode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    pub kind: ParamKind,
    pub lower: f64,
    pub upper: f64,
    pub log_scale: bool,
}

impl ParamSpec {
    pub fn continuous(name: &str, lower: f64, upper: f64) -> Self {
        Self {
            name: name.into(),
            kind: ParamKind::Continuous,
            lower,
            upper,
            log_scale: false,
        }
    }

    pub fn log_continuous(name: &str, lower: f64, upper: f64) -> Self {
        Self {
            name: name.into(),
            kind: ParamKind::Continuous,
            lower,
            upper,
            log_scale: true,
        }
    }

    pub fn integer(name: &str, lower: usize, upper: usize) -> Self {
        Self {
            name: name.into(),
            kind: ParamKind::Integer,
            lower: lower as f64,
            upper: upper as f64,
            log_scale: false,
        }
    }

    pub fn categorical(name: &str, lower: usize, upper: usize) -> Self {
        Self {
            name: name.into(),
            kind: ParamKind::Categorical,
            lower: lower as f64,
            upper: upper as f64,
            log_scale: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.lower < self.upper) {
            return Err(Error::InvalidParameter(format!(
                "dimension `{}`: lower {} must be < upper {}",
                self.name, self.lower, self.upper
            )));
        }
        if self.log_scale && self.lower <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "dimension `{}`: log scale needs a strictly positive range",
                self.name
            )));
        }
        Ok(())
    }

    /// Bounds in genome space (log10 for log-scale dimensions).
    pub fn genome_bounds(&self) -> (f64, f64) {
        if self.log_scale {
            (self.lower.log10(), self.upper.log10())
        } else {
            (self.lower, self.upper)
        }
    }

    /// Decodes an in-bounds gene to its raw value.
    fn decode_gene(&self, gene: f64) -> f64 {
        let raw = if self.log_scale { 10f64.powf(gene) } else { gene };
        match self.kind {
            ParamKind::Continuous => raw,
            ParamKind::Integer | ParamKind::Categorical => {
                raw.round().clamp(self.lower, self.upper)
            }
        }
    }
}

/// The mixed hyperparameter (or benchmark) search space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub dims: Vec<ParamSpec>,
}

impl SearchSpace {
    pub fn new(dims: Vec<ParamSpec>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidParameter("empty search space".into()));
        }
        for d in &dims {
            d.validate()?;
        }
        Ok(Self { dims })
    }

    /// A box of identical continuous dimensions (benchmark functions).
    pub fn continuous_box(dim: usize, lower: f64, upper: f64) -> Result<Self> {
        Self::new(
            (0..dim)
                .map(|i| ParamSpec::continuous(&format!("x{i}"), lower, upper))
                .collect(),
        )
    }

    /// The LSTM tuning space: layer count, layer widths, batch size,
    /// log-scale learning rate, optimizer choice.
    pub fn lstm_default() -> Self {
        Self::new(vec![
            ParamSpec::integer("num_layers", 1, 2),
            ParamSpec::integer("hidden1", 10, 256),
            ParamSpec::integer("hidden2", 10, 256),
            ParamSpec::integer("batch_size", 128, 2048),
            ParamSpec::log_continuous("learning_rate", 1e-5, 1e-1),
            ParamSpec::categorical("optimizer", 1, 3),
        ])
        .expect("valid default space")
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    /// Reflects every gene back into its genome-space bounds. Far-out
    /// values fold in O(1) via the period-2·range triangle wave.
    pub fn reflect(&self, genome: &mut [f64]) {
        for (gene, spec) in genome.iter_mut().zip(&self.dims) {
            let (lo, hi) = spec.genome_bounds();
            let range = hi - lo;
            if *gene < lo || *gene > hi {
                let mut t = (*gene - lo).rem_euclid(2.0 * range);
                if t > range {
                    t = 2.0 * range - t;
                }
                *gene = lo + t;
            }
        }
    }

    /// Reflects (a copy of) the genome into bounds and decodes each gene.
    /// Total: every real vector of the right length decodes to a valid
    /// point.
    pub fn decode(&self, genome: &[f64]) -> Vec<f64> {
        debug_assert_eq!(genome.len(), self.dim());
        let mut g = genome.to_vec();
        self.reflect(&mut g);
        g.iter()
            .zip(&self.dims)
            .map(|(&gene, spec)| spec.decode_gene(gene))
            .collect()
    }

    /// Uniform sample in genome space.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        self.dims
            .iter()
            .map(|d| {
                let (lo, hi) = d.genome_bounds();
                rng.random_range(lo..=hi)
            })
            .collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.dims.iter().position(|d| d.name == name)
    }
}

/// One evaluated point: genome, decoded values, fitness (validation RMSE
/// or benchmark objective; `f64::INFINITY` marks a failed evaluation).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub genome: Vec<f64>,
    pub decoded: Vec<f64>,
    pub fitness: f64,
}

impl Candidate {
    pub fn failed(&self) -> bool {
        !self.fitness.is_finite()
    }
}

/// Per-generation record of an optimizer run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub generation: usize,
    /// Best fitness found so far (non-increasing).
    pub best: f64,
    /// Mean finite fitness of the current population.
    pub mean: f64,
    pub p1: Option<f64>,
    pub crm: Option<f64>,
    /// Cumulative fitness evaluations.
    pub evals: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct SearchTrace {
    pub rows: Vec<TraceRow>,
    pub evaluations: usize,
    /// Generations at which CRm was refreshed (SaDE only).
    pub crm_refresh_gens: Vec<usize>,
    /// Generations at which the strategy probability was updated (SaDE only).
    pub p1_update_gens: Vec<usize>,
}

impl SearchTrace {
    /// Tidy CSV: generation,best,mean,p1,crm,evals.
    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        use std::io::Write;
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "generation,best,mean,p1,crm,evals")?;
        for r in &self.rows {
            let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x}"));
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.generation,
                r.best,
                r.mean,
                opt(r.p1),
                opt(r.crm),
                r.evals
            )?;
        }
        Ok(())
    }
}

/// Optimizer result: the best candidate and the full trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub best: Candidate,
    pub trace: SearchTrace,
}

/// Remaining-evaluation bookkeeping shared by the optimizers.
#[derive(Debug, Clone, Copy)]
pub(crate) struct EvalBudget {
    limit: usize,
    used: usize,
}

impl EvalBudget {
    pub(crate) fn new(limit: usize) -> Self {
        Self { limit, used: 0 }
    }

    pub(crate) fn remaining(&self) -> usize {
        self.limit - self.used
    }

    /// Grants up to `want` evaluations.
    pub(crate) fn take(&mut self, want: usize) -> usize {
        let granted = want.min(self.remaining());
        self.used += granted;
        granted
    }

    pub(crate) fn used(&self) -> usize {
        self.used
    }

    pub(crate) fn exhausted(&self) -> bool {
        self.remaining() == 0
    }
}

/// Decodes and scores a batch of genomes. Evaluations run in parallel;
/// results keep the input order, and a NaN fitness marks the candidate
/// failed without stopping the run.
pub(crate) fn evaluate_batch<F>(genomes: Vec<Vec<f64>>, space: &SearchSpace, fitness: &F) -> Vec<Candidate>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    genomes
        .into_par_iter()
        .map(|genome| {
            let decoded = space.decode(&genome);
            let raw = fitness(&decoded);
            let fitness = if raw.is_nan() { f64::INFINITY } else { raw };
            Candidate {
                genome,
                decoded,
                fitness,
            }
        })
        .collect()
}

pub(crate) fn mean_finite(candidates: &[Candidate]) -> f64 {
    let finite: Vec<f64> = candidates
        .iter()
        .filter(|c| c.fitness.is_finite())
        .map(|c| c.fitness)
        .collect();
    if finite.is_empty() {
        f64::INFINITY
    } else {
        finite.iter().sum::<f64>() / finite.len() as f64
    }
}

pub(crate) fn best_index(candidates: &[Candidate]) -> usize {
    candidates
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| a.fitness.partial_cmp(&b.fitness).expect("no NaN fitness"))
        .map(|(i, _)| i)
        .expect("non-empty population")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn decode_passes_bound_endpoints_through() {
        let space = SearchSpace::lstm_default();
        let genome = vec![1.0, 10.0, 256.0, 128.0, -5.0, 1.0];
        let decoded = space.decode(&genome);
        assert_eq!(decoded[0], 1.0);
        assert_eq!(decoded[1], 10.0);
        assert_eq!(decoded[2], 256.0);
        assert_eq!(decoded[3], 128.0);
        assert!((decoded[4] - 1e-5).abs() < 1e-18);
        assert_eq!(decoded[5], 1.0);
    }

    #[test]
    fn log_midpoint_decodes_to_1e_minus_3() {
        let space = SearchSpace::lstm_default();
        let lr_idx = space.index_of("learning_rate").unwrap();
        let (lo, hi) = space.dims[lr_idx].genome_bounds();
        assert_eq!((lo, hi), (-5.0, -1.0));
        let mut genome = vec![1.0, 64.0, 64.0, 256.0, 0.0, 2.0];
        genome[lr_idx] = (lo + hi) / 2.0;
        let decoded = space.decode(&genome);
        assert!((decoded[lr_idx] - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn optimizer_gene_rounds_to_nearest_category() {
        let space = SearchSpace::lstm_default();
        let genome = vec![1.0, 64.0, 64.0, 256.0, -3.0, 2.4];
        assert_eq!(space.decode(&genome)[5], 2.0);
        let genome = vec![1.0, 64.0, 64.0, 256.0, -3.0, 2.6];
        assert_eq!(space.decode(&genome)[5], 3.0);
    }

    #[test]
    fn reflection_folds_far_out_genes() {
        let space = SearchSpace::continuous_box(1, 0.0, 1.0).unwrap();
        let mut g = vec![1.25];
        space.reflect(&mut g);
        assert!((g[0] - 0.75).abs() < 1e-12);
        let mut g = vec![-0.25];
        space.reflect(&mut g);
        assert!((g[0] - 0.25).abs() < 1e-12);
        let mut g = vec![7.3e9];
        space.reflect(&mut g);
        assert!((0.0..=1.0).contains(&g[0]));
    }

    proptest! {
        #[test]
        fn adversarial_genomes_always_decode_within_bounds(
            genes in prop::collection::vec(-1e12..1e12f64, 6)
        ) {
            let space = SearchSpace::lstm_default();
            let decoded = space.decode(&genes);
            for (v, d) in decoded.iter().zip(&space.dims) {
                prop_assert!(
                    *v >= d.lower - 1e-9 && *v <= d.upper + 1e-9,
                    "{} = {} outside [{}, {}]", d.name, v, d.lower, d.upper
                );
            }
        }
    }
}
