//! Generational GA over bit strings with an optional change of basis.
//!
//! With a basis `T` the population lives in transformed coordinates `T v`;
//! offspring are evaluated after mapping back through `T^-1`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVector};
use crate::problems::FitnessProblem;

const OPTIMUM_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub tournament_size: usize,
    pub crossover_prob: f64,
    pub per_gene_flip_prob: f64,
    pub mutation_prob: f64,
    pub early_stop_on_optimum: bool,
}

impl GaConfig {
    /// Defaults for genotypes of length `n`: population `4n`, 10,000
    /// generations, early stop on a known optimum.
    pub fn for_length(n: usize) -> Self {
        Self {
            population_size: (4 * n).max(2),
            generations: 10_000,
            tournament_size: 3,
            crossover_prob: 0.5,
            per_gene_flip_prob: 0.05,
            mutation_prob: 0.2,
            early_stop_on_optimum: true,
        }
    }

    pub fn with_generations(mut self, generations: usize) -> Self {
        self.generations = generations;
        self
    }

    pub fn with_population(mut self, population_size: usize) -> Self {
        self.population_size = population_size;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 || self.population_size % 2 != 0 {
            return Err(Error::InvalidConfig(format!(
                "population size must be even and at least 2, got {}",
                self.population_size
            )));
        }
        if self.tournament_size == 0 {
            return Err(Error::InvalidConfig("tournament size must be positive".into()));
        }
        for (name, p) in [
            ("crossover_prob", self.crossover_prob),
            ("per_gene_flip_prob", self.per_gene_flip_prob),
            ("mutation_prob", self.mutation_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidConfig(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub best_fitness: f64,
    /// In standard coordinates.
    pub best_genotype: BitVector,
    pub generations_executed: usize,
    /// Best fitness of the final population.
    pub final_best_fitness: f64,
    /// Best fitness of each population, starting with the initial one.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub best_per_generation: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Runs the GA. The initial population is drawn uniformly in the working
/// coordinates, so a run with basis `T` on `f` matches a plain run on
/// `w -> f(T^-1 w)` draw for draw.
pub fn run_ga<P, R>(
    problem: &P,
    basis: Option<&BitMatrix>,
    config: &GaConfig,
    rng: &mut R,
) -> Result<RunRecord>
where
    P: FitnessProblem + ?Sized,
    R: Rng + ?Sized,
{
    config.validate()?;
    let n = problem.len();
    let inverse = match basis {
        Some(t) if t.n() != n => {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: t.n(),
            })
        }
        Some(t) => Some(t.inverse()?),
        None => None,
    };
    let to_standard = |w: &BitVector| match &inverse {
        Some(inv) => inv.mul_vec_unchecked(w),
        None => w.clone(),
    };
    let evaluate = |pop: &[BitVector]| -> Vec<f64> {
        pop.iter()
            .map(|w| match &inverse {
                Some(inv) => problem.evaluate(&inv.mul_vec_unchecked(w)),
                None => problem.evaluate(w),
            })
            .collect()
    };
    let target = if config.early_stop_on_optimum {
        problem.optimum()
    } else {
        None
    };

    let mut pop: Vec<BitVector> = (0..config.population_size)
        .map(|_| BitVector::random(n, rng))
        .collect();
    let mut fit = evaluate(&pop);
    let mut trace = Vec::with_capacity(config.generations.min(100_000) + 1);

    let (i0, f0) = argmax(&fit);
    let mut best_fitness = f0;
    let mut best = pop[i0].clone();
    trace.push(f0);
    let mut generations_executed = 0;

    while generations_executed < config.generations {
        if target.is_some_and(|t| best_fitness >= t - OPTIMUM_EPS) {
            break;
        }
        pop = next_generation(&pop, &fit, config, rng);
        fit = evaluate(&pop);
        generations_executed += 1;
        let (i, f) = argmax(&fit);
        trace.push(f);
        if f > best_fitness {
            best_fitness = f;
            best = pop[i].clone();
        }
    }

    Ok(RunRecord {
        best_fitness,
        best_genotype: to_standard(&best),
        generations_executed,
        final_best_fitness: *trace.last().unwrap_or(&best_fitness),
        best_per_generation: trace,
        seed: None,
    })
}

/// Index and value of the first maximum.
fn argmax(values: &[f64]) -> (usize, f64) {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    (best, values[best])
}

/// Best of `size` uniform draws with replacement; ties keep the earlier draw.
pub fn tournament_select<R: Rng + ?Sized>(fitness: &[f64], size: usize, rng: &mut R) -> usize {
    assert!(!fitness.is_empty(), "tournament over an empty population");
    let mut best = rng.random_range(0..fitness.len());
    for _ in 1..size {
        let c = rng.random_range(0..fitness.len());
        if fitness[c] > fitness[best] {
            best = c;
        }
    }
    best
}

/// Swaps the suffixes starting at `cut`.
pub fn one_point_crossover_at(
    a: &BitVector,
    b: &BitVector,
    cut: usize,
) -> Result<(BitVector, BitVector)> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    if a.len() < 2 || cut == 0 || cut >= a.len() {
        return Err(Error::InvalidParameter(format!(
            "cut {cut} outside 1..{} ",
            a.len()
        )));
    }
    let mut c1 = a.clone();
    let mut c2 = b.clone();
    c1.splice_suffix(b, cut);
    c2.splice_suffix(a, cut);
    Ok((c1, c2))
}

/// One-point crossover with the cut uniform in `1..n`.
pub fn one_point_crossover<R: Rng + ?Sized>(
    a: &BitVector,
    b: &BitVector,
    rng: &mut R,
) -> Result<(BitVector, BitVector)> {
    if a.len() < 2 {
        return Err(Error::InvalidParameter("crossover needs length at least 2".into()));
    }
    let cut = rng.random_range(1..a.len());
    one_point_crossover_at(a, b, cut)
}

/// Flips each gene independently with probability `p`.
pub fn flip_mutation<R: Rng + ?Sized>(v: &mut BitVector, p: f64, rng: &mut R) {
    for i in 0..v.len() {
        if rng.random_bool(p) {
            v.flip(i);
        }
    }
}

/// One generational step: tournament selection of a full parent pool,
/// consecutive pairing, crossover, mutation and full replacement.
pub fn next_generation<R: Rng + ?Sized>(
    pop: &[BitVector],
    fitness: &[f64],
    config: &GaConfig,
    rng: &mut R,
) -> Vec<BitVector> {
    let parents: Vec<usize> = (0..pop.len())
        .map(|_| tournament_select(fitness, config.tournament_size, rng))
        .collect();
    let mut next = Vec::with_capacity(pop.len());
    for pair in parents.chunks(2) {
        let a = &pop[pair[0]];
        let Some(&second) = pair.get(1) else {
            next.push(a.clone());
            break;
        };
        let b = &pop[second];
        if a.len() >= 2 && rng.random_bool(config.crossover_prob) {
            let (c1, c2) = one_point_crossover(a, b, rng).expect("equal lengths");
            next.push(c1);
            next.push(c2);
        } else {
            next.push(a.clone());
            next.push(b.clone());
        }
    }
    for child in &mut next {
        if rng.random_bool(config.mutation_prob) {
            flip_mutation(child, config.per_gene_flip_prob, rng);
        }
    }
    next
}
