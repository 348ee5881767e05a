use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::seeds;
use super::stats::{summarize, Summary};
use crate::elemword::BasisWord;
use crate::epistasis::{evaluate_basis_epistasis, Sample, SampleSize};
use crate::error::{Error, Result};
use crate::ga::{run_ga, GaConfig};
use crate::gf2::{BitMatrix, BitVector};
use crate::problems::{FitnessProblem, Instance};
use crate::search::{search_basis, BasisSearchConfig, Evaluator};

/// Budget presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scale {
    /// 20 repetitions; 2,000 generations, or 10,000 for NK.
    #[default]
    Desk,
    /// 100 repetitions; 10,000 generations, or 300,000 for NK.
    Paper,
}

impl Scale {
    pub fn repetitions(&self) -> usize {
        match self {
            Scale::Desk => 20,
            Scale::Paper => 100,
        }
    }

    pub fn generations(&self, instance: &Instance) -> usize {
        match (self, instance) {
            (Scale::Desk, Instance::Nk(_)) => 10_000,
            (Scale::Desk, _) => 2_000,
            (Scale::Paper, Instance::Nk(_)) => 300_000,
            (Scale::Paper, _) => 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InstanceSource {
    Inline(Instance),
    /// Relative paths resolve against the spec file's directory.
    Path(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BasisSource {
    #[default]
    None,
    Searched {
        evaluator: Evaluator,
        #[serde(default)]
        population: Option<usize>,
        #[serde(default)]
        generations: Option<usize>,
        #[serde(default)]
        rewrite_pass: bool,
    },
    /// A word file (`n=<dim>` header) or a matrix JSON file.
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmSpec {
    pub label: String,
    #[serde(default)]
    pub basis: BasisSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub instance: InstanceSource,
    pub arms: Vec<ArmSpec>,
    #[serde(default)]
    pub repetitions: Option<usize>,
    #[serde(default)]
    pub generations: Option<usize>,
    #[serde(default)]
    pub population: Option<usize>,
    #[serde(default)]
    pub master_seed: u64,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.arms.is_empty() {
            return Err(Error::InvalidConfig("experiment has no arms".into()));
        }
        if self.repetitions == Some(0) {
            return Err(Error::InvalidConfig("repetitions must be at least 1".into()));
        }
        let mut seen = HashSet::new();
        for arm in &self.arms {
            if arm.label.is_empty() {
                return Err(Error::InvalidConfig("arm labels must be nonempty".into()));
            }
            if !seen.insert(arm.label.as_str()) {
                return Err(Error::InvalidConfig(format!("duplicate arm label {:?}", arm.label)));
            }
        }
        Ok(())
    }

    pub fn resolve_instance(&self, base_dir: &Path) -> Result<Instance> {
        match &self.instance {
            InstanceSource::Inline(inst) => Ok(inst.clone()),
            InstanceSource::Path(p) => super::load_instance(&base_dir.join(p)),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentOptions {
    pub scale: Scale,
    /// Directory that relative paths in the spec are resolved against.
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub seed: u64,
    pub best_fitness: f64,
    pub generations_executed: usize,
    pub best_genotype: BitVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSummary {
    pub evaluator: Evaluator,
    /// On the evaluator's own scale.
    pub score_before: f64,
    pub score_after: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisInfo {
    pub word: Option<String>,
    pub rows: Vec<String>,
    pub sample_size: usize,
    pub epistasis_before: f64,
    pub epistasis_after: f64,
    pub decrease_rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmReport {
    pub label: String,
    pub basis: Option<BasisInfo>,
    /// Over normalized best fitnesses when the optimum is known.
    pub summary: Summary,
    pub runs: Vec<RunSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub instance_kind: String,
    pub n: usize,
    pub optimum: Option<f64>,
    pub repetitions: usize,
    pub generations: usize,
    pub population: usize,
    pub master_seed: u64,
    pub arms: Vec<ArmReport>,
}

impl ExperimentReport {
    /// Best fitness divided by the optimum when it is known and positive.
    pub fn normalize(&self, fitness: f64) -> f64 {
        match self.optimum {
            Some(o) if o > 0.0 => fitness / o,
            _ => fitness,
        }
    }

    pub fn arm(&self, label: &str) -> Option<&ArmReport> {
        self.arms.iter().find(|a| a.label == label)
    }

    /// Recomputes an arm's summary from its persisted runs.
    pub fn recompute_summary(&self, arm: &ArmReport) -> Result<Summary> {
        let values: Vec<f64> = arm.runs.iter().map(|r| self.normalize(r.best_fitness)).collect();
        summarize(&values, self.optimum.map(|o| self.normalize(o)))
    }
}

/// The report plus per-arm wall-clock seconds, kept apart so reports stay
/// byte-reproducible.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub report: ExperimentReport,
    pub wall_seconds: Vec<f64>,
}

pub fn decrease_rate(before: f64, after: f64) -> f64 {
    if before == 0.0 {
        0.0
    } else {
        100.0 * (before - after) / before
    }
}

pub fn load_basis_file(path: &Path, n: usize) -> Result<(Option<BasisWord>, BitMatrix)> {
    let text = std::fs::read_to_string(path)?;
    let (word, matrix) = if text.trim_start().starts_with('{') {
        let m: BitMatrix = serde_json::from_str(&text)?;
        if !m.is_nonsingular() {
            return Err(Error::Singular);
        }
        (None, m)
    } else {
        let w = BasisWord::parse_text(&text)?;
        let m = w.to_matrix();
        (Some(w), m)
    };
    if matrix.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: matrix.n(),
        });
    }
    Ok((word, matrix))
}

pub fn run_experiment(
    spec: &ExperimentSpec,
    instance: &Instance,
    options: &ExperimentOptions,
) -> Result<ExperimentOutput> {
    spec.validate()?;
    let n = instance.len();
    let repetitions = spec.repetitions.unwrap_or(options.scale.repetitions());
    let generations = spec.generations.unwrap_or(options.scale.generations(instance));
    let mut ga = GaConfig::for_length(n).with_generations(generations);
    if let Some(p) = spec.population {
        ga.population_size = p;
    }
    ga.validate()?;

    let mut report = ExperimentReport {
        instance_kind: instance.kind().to_string(),
        n,
        optimum: instance.optimum(),
        repetitions,
        generations,
        population: ga.population_size,
        master_seed: spec.master_seed,
        arms: Vec::with_capacity(spec.arms.len()),
    };
    let mut wall_seconds = Vec::with_capacity(spec.arms.len());

    for arm in &spec.arms {
        let started = Instant::now();
        let arm_seed = seeds::arm_seed(spec.master_seed, &arm.label);
        let (matrix, basis) = resolve_basis(arm, instance, arm_seed, &options.base_dir)?;

        let seeds: Vec<u64> = (0..repetitions).map(|i| seeds::run_seed(arm_seed, i)).collect();
        let runs: Vec<RunSummary> = crate::par_map(repetitions, |i| {
            let mut rng = crate::seeded_rng(seeds[i]);
            run_ga(instance, matrix.as_ref(), &ga, &mut rng).map(|r| RunSummary {
                seed: seeds[i],
                best_fitness: r.best_fitness,
                generations_executed: r.generations_executed,
                best_genotype: r.best_genotype,
            })
        })
        .into_iter()
        .collect::<Result<_>>()?;

        let mut arm_report = ArmReport {
            label: arm.label.clone(),
            basis,
            summary: summarize(&[0.0], None)?,
            runs,
        };
        arm_report.summary = report.recompute_summary(&arm_report)?;
        report.arms.push(arm_report);
        wall_seconds.push(started.elapsed().as_secs_f64());
    }
    Ok(ExperimentOutput {
        report,
        wall_seconds,
    })
}

fn resolve_basis(
    arm: &ArmSpec,
    instance: &Instance,
    arm_seed: u64,
    base_dir: &Path,
) -> Result<(Option<BitMatrix>, Option<BasisInfo>)> {
    let n = instance.len();
    match &arm.basis {
        BasisSource::None => Ok((None, None)),
        BasisSource::Searched {
            evaluator,
            population,
            generations,
            rewrite_pass,
        } => {
            let mut config = BasisSearchConfig::for_length(n, evaluator.clone());
            if let Some(p) = population {
                config.population_size = *p;
            }
            if let Some(g) = generations {
                config.generations = *g;
            }
            config.rewrite_pass = *rewrite_pass;
            let mut rng = crate::seeded_rng(seeds::search_seed(arm_seed));
            let outcome = search_basis(instance, &config, &mut rng)?;
            let search = SearchSummary {
                evaluator: evaluator.clone(),
                score_before: evaluator.natural(outcome.identity_score),
                score_after: evaluator.natural(outcome.best.score),
                evaluations: outcome.evaluations,
            };
            let info = match evaluator {
                Evaluator::Epistasis { sample } => BasisInfo {
                    word: Some(outcome.best.word.token_string()),
                    rows: outcome.best.matrix.row_strings(),
                    sample_size: sample.resolve(n).unwrap_or(1 << n),
                    epistasis_before: outcome.identity_score,
                    epistasis_after: outcome.best.score,
                    decrease_rate: decrease_rate(outcome.identity_score, outcome.best.score),
                    search: Some(search),
                },
                Evaluator::Meta { .. } => BasisInfo {
                    search: Some(search),
                    ..fixed_basis_info(
                        Some(&outcome.best.word),
                        &outcome.best.matrix,
                        instance,
                        arm_seed,
                    )?
                },
            };
            Ok((Some(outcome.best.matrix), Some(info)))
        }
        BasisSource::File { path } => {
            let (word, matrix) = load_basis_file(&base_dir.join(path), n)?;
            let info = fixed_basis_info(word.as_ref(), &matrix, instance, arm_seed)?;
            Ok((Some(matrix), Some(info)))
        }
    }
}

/// Epistasis before and after `t` on a fresh `n^2` sample.
fn fixed_basis_info(
    word: Option<&BasisWord>,
    t: &BitMatrix,
    instance: &Instance,
    arm_seed: u64,
) -> Result<BasisInfo> {
    let n = instance.len();
    let mut rng = crate::seeded_rng(seeds::sample_seed(arm_seed));
    let sample: Sample = SampleSize::Square.draw(instance, &mut rng)?;
    let before = evaluate_basis_epistasis(&BitMatrix::identity(n), &sample)?;
    let after = evaluate_basis_epistasis(t, &sample)?;
    Ok(BasisInfo {
        word: word.map(BasisWord::token_string),
        rows: t.row_strings(),
        sample_size: sample.len(),
        epistasis_before: before,
        epistasis_after: after,
        decrease_rate: decrease_rate(before, after),
        search: None,
    })
}

/// `label,optima_count,best,mean,sd,q1,q2,q3,wall_seconds`; the last column
/// is left empty unless timings are supplied.
pub fn rows_csv(report: &ExperimentReport, wall_seconds: Option<&[f64]>) -> String {
    let mut out = String::from("label,optima_count,best,mean,sd,q1,q2,q3,wall_seconds\n");
    for (i, arm) in report.arms.iter().enumerate() {
        let s = &arm.summary;
        let wall = wall_seconds
            .and_then(|w| w.get(i))
            .map(|w| format!("{w:.3}"))
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            csv_field(&arm.label),
            s.optima_count,
            s.best,
            s.mean,
            s.sd,
            s.q1,
            s.q2,
            s.q3,
            wall
        ));
    }
    out
}

/// One line per run: `label,run,normalized_fitness`.
pub fn boxplot_csv(report: &ExperimentReport) -> String {
    let mut out = String::from("label,run,normalized_fitness\n");
    for arm in &report.arms {
        for (i, r) in arm.runs.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{}\n",
                csv_field(&arm.label),
                i,
                report.normalize(r.best_fitness)
            ));
        }
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
