//! A GA over basis words that looks for a change of basis making a problem
//! easier.
//!
//! Scores are minimized internally. The epistasis evaluator scores a basis by
//! the epistasis of a fixed sample in the new coordinates; the meta evaluator
//! runs short GAs in the new coordinates and its aggregate best fitness is
//! negated.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::elemword::{crossover, simplify, BasisWord};
use crate::epistasis::{evaluate_basis_epistasis, evaluate_basis_meta, Sample, SampleSize};
use crate::error::{Error, Result};
use crate::ga::{tournament_select, GaConfig};
use crate::gf2::BitMatrix;
use crate::problems::FitnessProblem;

/// How the meta evaluator folds the `k` best fitnesses into one value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregate {
    #[default]
    Mean,
    Min,
    Median,
}

impl Aggregate {
    pub fn apply(&self, values: &[f64]) -> f64 {
        match self {
            Aggregate::Mean => values.iter().sum::<f64>() / values.len() as f64,
            Aggregate::Min => values.iter().cloned().fold(f64::INFINITY, f64::min),
            Aggregate::Median => {
                let mut v = values.to_vec();
                v.sort_by(f64::total_cmp);
                let m = v.len() / 2;
                if v.len() % 2 == 1 {
                    v[m]
                } else {
                    (v[m - 1] + v[m]) / 2.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Evaluator {
    Epistasis {
        sample: SampleSize,
    },
    Meta {
        k: usize,
        /// Inner GA generations; `None` means `n`.
        #[serde(default)]
        generations: Option<usize>,
        #[serde(default)]
        aggregate: Aggregate,
    },
}

impl Evaluator {
    pub fn epistasis(sample: SampleSize) -> Self {
        Evaluator::Epistasis { sample }
    }

    pub fn meta(k: usize) -> Self {
        Evaluator::Meta {
            k,
            generations: None,
            aggregate: Aggregate::Mean,
        }
    }

    /// Converts an internal score back to the evaluator's own scale.
    pub fn natural(&self, score: f64) -> f64 {
        match self {
            Evaluator::Epistasis { .. } => score,
            Evaluator::Meta { .. } => -score,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisSearchConfig {
    pub population_size: usize,
    pub generations: usize,
    pub evaluator: Evaluator,
    /// Initial word length mean, as a multiple of `n`.
    pub init_mean_factor: f64,
    /// Initial word length standard deviation, as a multiple of `n`.
    pub init_std_factor: f64,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    pub per_symbol_prob: f64,
    pub tournament_size: usize,
    /// Greedily shorten offspring with the rewrite rules.
    pub rewrite_pass: bool,
}

impl BasisSearchConfig {
    /// Population `4n`, `n` generations.
    pub fn for_length(n: usize, evaluator: Evaluator) -> Self {
        Self {
            population_size: (4 * n).max(2),
            generations: n,
            evaluator,
            init_mean_factor: 3.0,
            init_std_factor: 1.0,
            crossover_prob: 0.5,
            mutation_prob: 0.2,
            per_symbol_prob: 0.05,
            tournament_size: 3,
            rewrite_pass: false,
        }
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
            ("mutation_prob", self.mutation_prob),
            ("per_symbol_prob", self.per_symbol_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidConfig(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        if !(self.init_mean_factor.is_finite() && self.init_std_factor >= 0.0) {
            return Err(Error::InvalidConfig("bad initial length distribution".into()));
        }
        if let Evaluator::Meta { k: 0, .. } = self.evaluator {
            return Err(Error::InvalidConfig("meta evaluator needs k >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasisCandidate {
    pub word: BasisWord,
    pub matrix: BitMatrix,
    /// Internal, minimized score.
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub best: BasisCandidate,
    /// Score of the identity basis.
    pub identity_score: f64,
    /// Best score seen so far, after each generation.
    pub history: Vec<f64>,
    pub evaluations: usize,
}

impl SearchOutcome {
    /// `100 * (before - after) / before` on the evaluator's own scale, or
    /// zero when the identity already scores zero.
    pub fn decrease_rate(&self, evaluator: &Evaluator) -> f64 {
        let before = evaluator.natural(self.identity_score);
        let after = evaluator.natural(self.best.score);
        if before == 0.0 {
            0.0
        } else {
            100.0 * (before - after) / before
        }
    }
}

/// Everything needed to score a basis for one problem. The epistasis sample
/// is drawn once on construction and reused.
pub struct Scorer<'a, P: FitnessProblem + ?Sized> {
    problem: &'a P,
    kind: ScorerKind,
}

enum ScorerKind {
    Epistasis(Sample),
    Meta {
        k: usize,
        generations: usize,
        aggregate: Aggregate,
        ga: GaConfig,
    },
}

impl<'a, P: FitnessProblem + ?Sized> Scorer<'a, P> {
    pub fn new<R: Rng + ?Sized>(problem: &'a P, evaluator: &Evaluator, rng: &mut R) -> Result<Self> {
        let n = problem.len();
        let kind = match *evaluator {
            Evaluator::Epistasis { sample } => ScorerKind::Epistasis(sample.draw(problem, rng)?),
            Evaluator::Meta {
                k,
                generations,
                aggregate,
            } => ScorerKind::Meta {
                k,
                generations: generations.unwrap_or(n),
                aggregate,
                ga: GaConfig::for_length(n),
            },
        };
        Ok(Self { problem, kind })
    }

    /// A scorer over a caller-supplied sample.
    pub fn with_sample(problem: &'a P, sample: Sample) -> Result<Self> {
        if sample.n() != problem.len() {
            return Err(Error::DimensionMismatch {
                expected: problem.len(),
                found: sample.n(),
            });
        }
        Ok(Self {
            problem,
            kind: ScorerKind::Epistasis(sample),
        })
    }

    pub fn sample(&self) -> Option<&Sample> {
        match &self.kind {
            ScorerKind::Epistasis(s) => Some(s),
            ScorerKind::Meta { .. } => None,
        }
    }

    /// Internal score of `t`. `seed` only matters for the meta evaluator.
    pub fn score(&self, t: &BitMatrix, seed: u64) -> Result<f64> {
        match &self.kind {
            ScorerKind::Epistasis(sample) => evaluate_basis_epistasis(t, sample),
            ScorerKind::Meta {
                k,
                generations,
                aggregate,
                ga,
            } => {
                let mut rng = crate::seeded_rng(seed);
                let fits = evaluate_basis_meta(t, self.problem, ga, *k, *generations, &mut rng)?;
                Ok(-aggregate.apply(&fits))
            }
        }
    }
}

/// Scores a word, caching its matrix.
pub fn score_candidate<P: FitnessProblem + ?Sized>(
    word: BasisWord,
    scorer: &Scorer<'_, P>,
    seed: u64,
) -> Result<BasisCandidate> {
    let matrix = word.to_matrix();
    let score = scorer.score(&matrix, seed)?;
    Ok(BasisCandidate {
        word,
        matrix,
        score,
    })
}

/// Runs the basis-search GA. Generation 0 holds the empty word plus random
/// words; the best candidate ever evaluated is returned, so the result never
/// scores worse than the identity.
pub fn search_basis<P, R>(problem: &P, config: &BasisSearchConfig, rng: &mut R) -> Result<SearchOutcome>
where
    P: FitnessProblem + ?Sized,
    R: Rng + ?Sized,
{
    config.validate()?;
    let scorer = Scorer::new(problem, &config.evaluator, rng)?;
    search_with_scorer(&scorer, config, rng)
}

pub fn search_with_scorer<P, R>(
    scorer: &Scorer<'_, P>,
    config: &BasisSearchConfig,
    rng: &mut R,
) -> Result<SearchOutcome>
where
    P: FitnessProblem + ?Sized,
    R: Rng + ?Sized,
{
    config.validate()?;
    let n = scorer.problem.len();
    let (mean, std) = (
        config.init_mean_factor * n as f64,
        config.init_std_factor * n as f64,
    );
    let mut words = Vec::with_capacity(config.population_size);
    words.push(BasisWord::identity(n));
    while words.len() < config.population_size {
        words.push(BasisWord::random(n, mean, std, rng));
    }

    let mut evaluations = 0;
    let mut best: Option<BasisCandidate> = None;
    let mut identity_score = f64::NAN;
    let mut history = Vec::with_capacity(config.generations + 1);

    for generation in 0..=config.generations {
        let seeds: Vec<u64> = (0..words.len()).map(|_| rng.random()).collect();
        let scored: Vec<BasisCandidate> = crate::par_map(words.len(), |i| {
            score_candidate(words[i].clone(), scorer, seeds[i])
        })
        .into_iter()
        .collect::<Result<_>>()?;
        evaluations += scored.len();
        if generation == 0 {
            identity_score = scored[0].score;
        }
        for c in &scored {
            if best.as_ref().is_none_or(|b| c.score < b.score) {
                best = Some(c.clone());
            }
        }
        history.push(best.as_ref().map_or(f64::NAN, |b| b.score));
        if generation == config.generations {
            break;
        }
        let fitness: Vec<f64> = scored.iter().map(|c| -c.score).collect();
        words = breed(&scored, &fitness, config, rng)?;
    }

    Ok(SearchOutcome {
        best: best.expect("population is nonempty"),
        identity_score,
        history,
        evaluations,
    })
}

fn breed<R: Rng + ?Sized>(
    scored: &[BasisCandidate],
    fitness: &[f64],
    config: &BasisSearchConfig,
    rng: &mut R,
) -> Result<Vec<BasisWord>> {
    let parents: Vec<usize> = (0..scored.len())
        .map(|_| tournament_select(fitness, config.tournament_size, rng))
        .collect();
    let mut next = Vec::with_capacity(scored.len());
    for pair in parents.chunks(2) {
        let a = &scored[pair[0]].word;
        let b = &scored[pair[1]].word;
        if rng.random_bool(config.crossover_prob) {
            let (c1, c2) = crossover(a, b, rng)?;
            next.push(c1);
            next.push(c2);
        } else {
            next.push(a.clone());
            next.push(b.clone());
        }
    }
    for word in &mut next {
        if rng.random_bool(config.mutation_prob) {
            *word = word.mutate(config.per_symbol_prob, rng);
        }
        if config.rewrite_pass {
            *word = simplify(word, 2 * word.len());
        }
    }
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::epistasis::davidor_epistasis;
    use crate::problems::{OneMax, VariantOneMax};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn identity_scores_plain_epistasis() {
        let p = VariantOneMax::generate(8, &mut rng(1)).unwrap();
        let scorer = Scorer::new(&p, &Evaluator::epistasis(SampleSize::Square), &mut rng(2)).unwrap();
        let c = score_candidate(BasisWord::identity(8), &scorer, 0).unwrap();
        let direct = davidor_epistasis(scorer.sample().unwrap()).unwrap().value;
        assert_eq!(c.score.to_bits(), direct.to_bits());
        let again = score_candidate(BasisWord::identity(8), &scorer, 99).unwrap();
        assert_eq!(c.score.to_bits(), again.score.to_bits());
    }

    #[test]
    fn hidden_word_scores_zero_on_enumeration() {
        let p = VariantOneMax::generate(8, &mut rng(3)).unwrap();
        let scorer =
            Scorer::new(&p, &Evaluator::epistasis(SampleSize::Enumerate), &mut rng(4)).unwrap();
        let c = score_candidate(p.word().clone(), &scorer, 0).unwrap();
        assert!(c.score.abs() < 1e-9);
    }

    #[test]
    fn search_is_monotone_deterministic_and_never_worse() {
        let p = VariantOneMax::generate(10, &mut rng(5)).unwrap();
        let config = BasisSearchConfig::for_length(10, Evaluator::epistasis(SampleSize::Square));
        let out = search_basis(&p, &config, &mut rng(6)).unwrap();
        assert!(out.best.score <= out.identity_score);
        assert!(out.history.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(out.history.len(), config.generations + 1);
        assert_eq!(out.evaluations, config.population_size * (config.generations + 1));
        assert_eq!(out.best.matrix, out.best.word.to_matrix());
        assert!(out.best.matrix.is_nonsingular());
        assert!(out.decrease_rate(&config.evaluator) >= 0.0);
        let again = search_basis(&p, &config, &mut rng(6)).unwrap();
        assert_eq!(out.best.word, again.best.word);
        assert_eq!(out.history, again.history);
    }

    #[test]
    fn rewrite_pass_keeps_search_sound() {
        let p = VariantOneMax::generate(6, &mut rng(7)).unwrap();
        let config = BasisSearchConfig {
            rewrite_pass: true,
            ..BasisSearchConfig::for_length(6, Evaluator::epistasis(SampleSize::Cubic))
        };
        let out = search_basis(&p, &config, &mut rng(8)).unwrap();
        assert!(out.best.score <= out.identity_score);
    }

    #[test]
    fn meta_search_runs() {
        let p = VariantOneMax::generate(6, &mut rng(9)).unwrap();
        let config = BasisSearchConfig {
            population_size: 8,
            generations: 2,
            ..BasisSearchConfig::for_length(6, Evaluator::meta(5))
        };
        let out = search_basis(&p, &config, &mut rng(10)).unwrap();
        let natural = config.evaluator.natural(out.best.score);
        assert!((0.0..=6.0).contains(&natural));
        assert!(out.best.score <= out.identity_score);
        let again = search_basis(&p, &config, &mut rng(10)).unwrap();
        assert_eq!(out.best.word, again.best.word);
    }

    #[test]
    fn meta_score_is_mean_of_k() {
        let p = OneMax { n: 6 };
        let scorer = Scorer::new(&p, &Evaluator::meta(5), &mut rng(0)).unwrap();
        let t = BitMatrix::identity(6);
        let score = scorer.score(&t, 17).unwrap();
        let fits = evaluate_basis_meta(&t, &p, &GaConfig::for_length(6), 5, 6, &mut crate::seeded_rng(17))
            .unwrap();
        assert_eq!(fits.len(), 5);
        assert_eq!(-score, fits.iter().sum::<f64>() / 5.0);
    }

    #[test]
    fn aggregates() {
        let v = [3.0, 1.0, 2.0, 10.0];
        assert_eq!(Aggregate::Mean.apply(&v), 4.0);
        assert_eq!(Aggregate::Min.apply(&v), 1.0);
        assert_eq!(Aggregate::Median.apply(&v), 2.5);
        assert_eq!(Aggregate::Median.apply(&v[..3]), 2.0);
    }

    #[test]
    fn config_validation() {
        let mut c = BasisSearchConfig::for_length(5, Evaluator::meta(5));
        assert!(c.validate().is_ok());
        c.population_size = 7;
        assert!(c.validate().is_err());
        let c = BasisSearchConfig::for_length(5, Evaluator::meta(0));
        assert!(c.validate().is_err());
    }
}
