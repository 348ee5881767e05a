//! Davidor's epistasis measure and the two basis evaluators built on it.
//!
//! For a sample of `(genotype, fitness)` pairs the measure fits the additive
//! "genic" model `G(x) = mu + sum_i E[i][x_i]`, where `E[i][a]` is the mean
//! fitness of individuals carrying allele `a` at locus `i` minus the overall
//! mean `mu`, and reports the mean squared residual `sum (f(x) - G(x))^2 / s`.
//! Affine fitness functions score exactly zero.

use std::borrow::Borrow;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ga::{run_ga, GaConfig};
use crate::gf2::{BitMatrix, BitVector};
use crate::problems::FitnessProblem;

/// Largest dimension accepted for full enumeration of the cube.
pub const MAX_ENUMERATION_N: usize = 24;

/// A population of genotypes paired with their fitness values.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    n: usize,
    genotypes: Vec<BitVector>,
    fitness: Vec<f64>,
}

impl Sample {
    pub fn new(n: usize, genotypes: Vec<BitVector>, fitness: Vec<f64>) -> Result<Self> {
        if genotypes.is_empty() {
            return Err(Error::EmptySample);
        }
        if genotypes.len() != fitness.len() {
            return Err(Error::DimensionMismatch {
                expected: genotypes.len(),
                found: fitness.len(),
            });
        }
        if let Some(g) = genotypes.iter().find(|g| g.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: g.len(),
            });
        }
        if fitness.iter().any(|f| !f.is_finite()) {
            return Err(Error::InvalidParameter("fitness values must be finite".into()));
        }
        Ok(Self {
            n,
            genotypes,
            fitness,
        })
    }

    /// `size` genotypes drawn i.i.d. uniform over the cube (duplicates
    /// allowed), each paired with its fitness.
    pub fn random<P, R>(problem: &P, size: usize, rng: &mut R) -> Result<Self>
    where
        P: FitnessProblem + ?Sized,
        R: Rng + ?Sized,
    {
        if size < 2 {
            return Err(Error::InvalidParameter("sample size must be at least 2".into()));
        }
        let n = problem.len();
        let genotypes: Vec<_> = (0..size).map(|_| BitVector::random(n, rng)).collect();
        let fitness = genotypes.iter().map(|g| problem.evaluate(g)).collect();
        Self::new(n, genotypes, fitness)
    }

    /// Every point of the cube, in index order.
    pub fn enumerate<P: FitnessProblem + ?Sized>(problem: &P) -> Result<Self> {
        let n = problem.len();
        if n > MAX_ENUMERATION_N {
            return Err(Error::InvalidParameter(format!(
                "full enumeration supports n <= {MAX_ENUMERATION_N}, got {n}"
            )));
        }
        let genotypes: Vec<_> = (0..1u64 << n).map(|i| BitVector::from_index(n, i)).collect();
        let fitness = genotypes.iter().map(|g| problem.evaluate(g)).collect();
        Self::new(n, genotypes, fitness)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.genotypes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genotypes.is_empty()
    }

    pub fn genotypes(&self) -> &[BitVector] {
        &self.genotypes
    }

    pub fn fitness(&self) -> &[f64] {
        &self.fitness
    }

    /// The sample with every genotype replaced by `T v`; fitness values are
    /// carried over unchanged.
    pub fn transformed(&self, t: &BitMatrix) -> Result<Sample> {
        if t.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: t.n(),
            });
        }
        Ok(Sample {
            n: self.n,
            genotypes: self.genotypes.iter().map(|g| t.mul_vec_unchecked(g)).collect(),
            fitness: self.fitness.clone(),
        })
    }
}

/// Sample size policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleSize {
    /// `n^2` random genotypes.
    Square,
    /// `n^3` random genotypes.
    Cubic,
    Fixed(usize),
    /// The whole cube.
    Enumerate,
}

impl SampleSize {
    /// Number of random draws, or `None` for full enumeration.
    pub fn resolve(&self, n: usize) -> Option<usize> {
        match *self {
            SampleSize::Square => Some(n * n),
            SampleSize::Cubic => Some(n * n * n),
            SampleSize::Fixed(s) => Some(s),
            SampleSize::Enumerate => None,
        }
    }

    pub fn draw<P, R>(&self, problem: &P, rng: &mut R) -> Result<Sample>
    where
        P: FitnessProblem + ?Sized,
        R: Rng + ?Sized,
    {
        match self.resolve(problem.len()) {
            Some(size) => Sample::random(problem, size, rng),
            None => Sample::enumerate(problem),
        }
    }
}

impl FromStr for SampleSize {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "square" => Ok(SampleSize::Square),
            "cubic" => Ok(SampleSize::Cubic),
            "enumerate" => Ok(SampleSize::Enumerate),
            other => other
                .parse()
                .map(SampleSize::Fixed)
                .map_err(|_| Error::Parse(format!("bad sample size {other:?}"))),
        }
    }
}

impl fmt::Display for SampleSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SampleSize::Square => f.write_str("square"),
            SampleSize::Cubic => f.write_str("cubic"),
            SampleSize::Enumerate => f.write_str("enumerate"),
            SampleSize::Fixed(s) => write!(f, "{s}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpistasisReport {
    pub value: f64,
    pub mu: f64,
    pub sample_size: usize,
}

/// Davidor's epistasis of a sample, normalized by the sample size.
///
/// An allele never observed at a locus gets a zero excess.
pub fn davidor_epistasis(sample: &Sample) -> Result<EpistasisReport> {
    two_pass(sample.n, || sample.genotypes.iter().zip(sample.fitness.iter().copied()))
}

/// Epistasis over the whole cube, optionally after `v -> T v`, without
/// materializing the sample. Matches `davidor_epistasis` on
/// `Sample::enumerate` up to summation order.
pub fn enumerated_epistasis<P: FitnessProblem + ?Sized>(
    problem: &P,
    t: Option<&BitMatrix>,
) -> Result<EpistasisReport> {
    let n = problem.len();
    if n > MAX_ENUMERATION_N {
        return Err(Error::InvalidParameter(format!(
            "full enumeration supports n <= {MAX_ENUMERATION_N}, got {n}"
        )));
    }
    if let Some(t) = t {
        if t.n() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: t.n(),
            });
        }
    }
    two_pass(n, || {
        (0..1u64 << n).map(move |i| {
            let v = BitVector::from_index(n, i);
            let f = problem.evaluate(&v);
            match t {
                Some(t) => (t.mul_vec_unchecked(&v), f),
                None => (v, f),
            }
        })
    })
}

/// Two passes over `(genotype, fitness)` pairs: per-locus allele means,
/// then residuals of the additive model.
fn two_pass<B, I, F>(n: usize, items: F) -> Result<EpistasisReport>
where
    B: Borrow<BitVector>,
    I: Iterator<Item = (B, f64)>,
    F: Fn() -> I,
{
    let mut s = 0usize;
    let mut total = 0.0f64;
    let mut sum_one = vec![0.0f64; n];
    let mut count_one = vec![0usize; n];
    for (g, f) in items() {
        s += 1;
        total += f;
        for i in g.borrow().ones_iter() {
            sum_one[i] += f;
            count_one[i] += 1;
        }
    }
    if s == 0 {
        return Err(Error::EmptySample);
    }
    let mu = total / s as f64;

    // excess[i] = (E[i][0], E[i][1])
    let excess: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let c1 = count_one[i];
            let c0 = s - c1;
            let e1 = if c1 > 0 { sum_one[i] / c1 as f64 - mu } else { 0.0 };
            let e0 = if c0 > 0 {
                (total - sum_one[i]) / c0 as f64 - mu
            } else {
                0.0
            };
            (e0, e1)
        })
        .collect();
    let base: f64 = excess.iter().map(|e| e.0).sum();

    let residual: f64 = items()
        .map(|(g, f)| {
            let genic = mu
                + base
                + g.borrow()
                    .ones_iter()
                    .map(|i| excess[i].1 - excess[i].0)
                    .sum::<f64>();
            (f - genic).powi(2)
        })
        .sum();

    Ok(EpistasisReport {
        value: residual / s as f64,
        mu,
        sample_size: s,
    })
}

/// Epistasis of the sample after the change of basis `v -> T v`.
pub fn evaluate_basis_epistasis(t: &BitMatrix, sample: &Sample) -> Result<f64> {
    if t.n() != sample.n {
        return Err(Error::DimensionMismatch {
            expected: sample.n,
            found: t.n(),
        });
    }
    let transformed: Vec<BitVector> = sample
        .genotypes
        .iter()
        .map(|g| t.mul_vec_unchecked(g))
        .collect();
    Ok(two_pass(sample.n, || transformed.iter().zip(sample.fitness.iter().copied()))?.value)
}

/// Runs the change-of-basis GA `k` times for `g` generations each and
/// returns the best fitness of each final population, in run order.
///
/// Each run gets its own seed, drawn from `rng` up front, so the result does
/// not depend on scheduling.
pub fn evaluate_basis_meta<P, R>(
    t: &BitMatrix,
    problem: &P,
    ga: &GaConfig,
    k: usize,
    g: usize,
    rng: &mut R,
) -> Result<Vec<f64>>
where
    P: FitnessProblem + ?Sized,
    R: Rng + ?Sized,
{
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if t.n() != problem.len() {
        return Err(Error::DimensionMismatch {
            expected: problem.len(),
            found: t.n(),
        });
    }
    let config = GaConfig {
        generations: g,
        ..ga.clone()
    };
    config.validate()?;
    let seeds: Vec<u64> = (0..k).map(|_| rng.random()).collect();
    crate::par_map(k, |run| {
        let mut run_rng = crate::seeded_rng(seeds[run]);
        run_ga(problem, Some(t), &config, &mut run_rng).map(|r| r.final_best_fitness)
    })
    .into_iter()
    .collect()
}
