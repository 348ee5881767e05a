use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use zbasis::epistasis::{davidor_epistasis, enumerated_epistasis, SampleSize};
use zbasis::ga::{run_ga, GaConfig};
use zbasis::gf2::BitMatrix;
use zbasis::harness::{self, ExperimentOptions, ExperimentReport, ExperimentSpec, Scale};
use zbasis::problems::{FitnessProblem, Instance, NkLandscape, OneMax, ParityF, VariantOneMax};
use zbasis::search::{search_basis, Aggregate, BasisSearchConfig, Evaluator};
use zbasis::{seeded_rng, Error};

#[derive(Parser)]
#[command(name = "zbasis", version, about = "Change-of-basis genetic algorithms over Z2^n")]
struct Cli {
    /// Master seed
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Directory that relative output paths are written to
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,

    /// Use the full-size budgets (100 runs, 10,000 / 300,000 generations)
    #[arg(long, global = true)]
    paper_scale: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Onemax,
    Parity,
    VariantOnemax,
    Nk,
}

#[derive(Clone, Copy, ValueEnum)]
enum EvaluatorKind {
    Epistasis,
    Meta,
}

#[derive(Clone, Copy, ValueEnum)]
enum AggregateArg {
    Mean,
    Min,
    Median,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a benchmark instance and print its SHA-256 digest
    GenInstance {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        n: usize,
        /// Neighbours per gene (nk only)
        #[arg(long, default_value_t = 0)]
        k: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Search for a basis; writes a word file and `<out>.json` with scores
    SearchBasis {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "epistasis")]
        evaluator: EvaluatorKind,
        /// square, cubic, enumerate or a sample size
        #[arg(long, default_value = "square")]
        sample: SampleSize,
        #[arg(long)]
        pop: Option<usize>,
        #[arg(long)]
        gens: Option<usize>,
        /// Inner runs per meta evaluation
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, value_enum, default_value = "mean")]
        aggregate: AggregateArg,
        /// Shorten offspring words with the rewrite rules
        #[arg(long)]
        rewrite: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the GA once, optionally in a changed basis
    Run {
        #[arg(long)]
        instance: PathBuf,
        /// Word or matrix file, or `none`
        #[arg(long, default_value = "none")]
        basis: String,
        #[arg(long)]
        pop: Option<usize>,
        #[arg(long)]
        gens: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        /// Leave out the per-generation trace
        #[arg(long)]
        no_trace: bool,
    },
    /// Run an experiment spec; writes report.json, rows.csv, boxplot.csv, meta.json
    Experiment {
        #[arg(long)]
        spec: PathBuf,
        /// Fill the wall_seconds column of rows.csv
        #[arg(long)]
        timing: bool,
    },
    /// Davidor epistasis of an instance, optionally in a changed basis
    Epistasis {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value = "none")]
        basis: String,
        /// Use the whole cube (n <= 24)
        #[arg(long)]
        enumerate: bool,
        #[arg(long, default_value = "square")]
        sample: SampleSize,
    },
    /// Epistasis of the parity function before and after its onemax basis
    EpistasisTable {
        #[arg(long, default_value_t = 16)]
        max_n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render experiment reports as markdown tables
    Report {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Data(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(_) | Error::InvalidParameter(_) => Failure::Usage(e.to_string()),
            other => Failure::Data(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(w) = cli.workers {
        if w == 0 {
            eprintln!("error: --workers must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Data(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> CmdResult {
    let seed = cli.seed.unwrap_or(0);
    let scale = if cli.paper_scale { Scale::Paper } else { Scale::Desk };
    let out_dir = cli.out_dir.clone();
    let resolve = |p: &Path| out_dir.join(p);

    match cli.command {
        Command::GenInstance { kind, n, k, out } => {
            let mut rng = seeded_rng(seed);
            let instance = match kind {
                Kind::Onemax => Instance::Onemax(OneMax { n }),
                Kind::Parity => Instance::Parity(ParityF { n }),
                Kind::VariantOnemax => Instance::VariantOnemax(VariantOneMax::generate(n, &mut rng)?),
                Kind::Nk => Instance::Nk(NkLandscape::generate(n, k, &mut rng)?),
            };
            let text = harness::to_json(&instance)?;
            let path = resolve(&out);
            write(&path, &text)?;
            let digest = Sha256::digest(text.as_bytes());
            let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
            println!("sha256:{hex}  {}", path.display());
        }
        Command::SearchBasis {
            instance,
            evaluator,
            sample,
            pop,
            gens,
            k,
            aggregate,
            rewrite,
            out,
        } => {
            let inst = harness::load_instance(&instance)?;
            let n = inst.len();
            let evaluator = match evaluator {
                EvaluatorKind::Epistasis => Evaluator::epistasis(sample),
                EvaluatorKind::Meta => Evaluator::Meta {
                    k,
                    generations: None,
                    aggregate: match aggregate {
                        AggregateArg::Mean => Aggregate::Mean,
                        AggregateArg::Min => Aggregate::Min,
                        AggregateArg::Median => Aggregate::Median,
                    },
                },
            };
            let mut config = BasisSearchConfig::for_length(n, evaluator.clone());
            config.population_size = pop.unwrap_or(config.population_size);
            config.generations = gens.unwrap_or(config.generations);
            config.rewrite_pass = rewrite;
            let outcome = search_basis(&inst, &config, &mut seeded_rng(seed))?;
            let path = resolve(&out);
            write(&path, &outcome.best.word.to_text())?;

            #[derive(Serialize)]
            struct Sidecar {
                evaluator: Evaluator,
                seed: u64,
                word_length: usize,
                score_before: f64,
                score_after: f64,
                decrease_rate: f64,
            }
            let sidecar = Sidecar {
                word_length: outcome.best.word.len(),
                score_before: evaluator.natural(outcome.identity_score),
                score_after: evaluator.natural(outcome.best.score),
                decrease_rate: outcome.decrease_rate(&evaluator),
                evaluator,
                seed,
            };
            let side_path = PathBuf::from(format!("{}.json", path.display()));
            write(&side_path, &harness::to_json(&sidecar)?)?;
            println!(
                "{}: before {} after {} (decrease {:.1}%)",
                path.display(),
                sidecar.score_before,
                sidecar.score_after,
                sidecar.decrease_rate
            );
        }
        Command::Run {
            instance,
            basis,
            pop,
            gens,
            out,
            no_trace,
        } => {
            let inst = harness::load_instance(&instance)?;
            let n = inst.len();
            let matrix = load_basis(&basis, n)?;
            let mut config = GaConfig::for_length(n).with_generations(scale.generations(&inst));
            config.population_size = pop.unwrap_or(config.population_size);
            config.generations = gens.unwrap_or(config.generations);
            let mut record = run_ga(&inst, matrix.as_ref(), &config, &mut seeded_rng(seed))?;
            record.seed = Some(seed);
            if no_trace {
                record.best_per_generation.clear();
            }
            let path = resolve(&out);
            write(&path, &harness::to_json(&record)?)?;
            println!(
                "best {} after {} generations -> {}",
                record.best_fitness,
                record.generations_executed,
                path.display()
            );
        }
        Command::Experiment { spec, timing } => {
            let text = fs::read_to_string(&spec)?;
            let mut parsed: ExperimentSpec = serde_json::from_str(&text)?;
            if let Some(s) = cli.seed {
                parsed.master_seed = s;
            }
            let base_dir = spec.parent().map(Path::to_path_buf).unwrap_or_default();
            let inst = parsed.resolve_instance(&base_dir)?;
            let started = unix_seconds();
            let output = harness::run_experiment(
                &parsed,
                &inst,
                &ExperimentOptions { scale, base_dir },
            )?;
            let finished = unix_seconds();
            fs::create_dir_all(&out_dir)?;
            let report = &output.report;
            write(&out_dir.join("report.json"), &harness::to_json(report)?)?;
            let walls = timing.then_some(output.wall_seconds.as_slice());
            write(&out_dir.join("rows.csv"), &harness::rows_csv(report, walls))?;
            write(&out_dir.join("boxplot.csv"), &harness::boxplot_csv(report))?;

            #[derive(Serialize)]
            struct Meta<'a> {
                started_unix: f64,
                finished_unix: f64,
                wall_seconds: Vec<(&'a str, f64)>,
            }
            let meta = Meta {
                started_unix: started,
                finished_unix: finished,
                wall_seconds: report
                    .arms
                    .iter()
                    .map(|a| a.label.as_str())
                    .zip(output.wall_seconds.iter().copied())
                    .collect(),
            };
            write(&out_dir.join("meta.json"), &harness::to_json(&meta)?)?;
            print!("{}", harness::rows_csv(report, walls));
        }
        Command::Epistasis {
            instance,
            basis,
            enumerate,
            sample,
        } => {
            let inst = harness::load_instance(&instance)?;
            let n = inst.len();
            let matrix = load_basis(&basis, n)?;
            let report = if enumerate || sample == SampleSize::Enumerate {
                enumerated_epistasis(&inst, matrix.as_ref())?
            } else {
                let s = sample.draw(&inst, &mut seeded_rng(seed))?;
                match &matrix {
                    Some(t) => davidor_epistasis(&s.transformed(t)?)?,
                    None => davidor_epistasis(&s)?,
                }
            };
            print!("{}", harness::to_json(&report)?);
        }
        Command::EpistasisTable { max_n, out } => {
            let rows = harness::epistasis_table(max_n)?;
            let csv = harness::epistasis_table_csv(&rows);
            if let Some(out) = out {
                write(&resolve(&out), &csv)?;
            }
            print!("{csv}");
        }
        Command::Report { reports, out } => {
            let parsed = reports
                .iter()
                .map(|p| {
                    let text = fs::read_to_string(p)?;
                    serde_json::from_str::<ExperimentReport>(&text).map_err(|e| {
                        Failure::Data(format!("{}: not an experiment report: {e}", p.display()))
                    })
                })
                .collect::<Result<Vec<_>, Failure>>()?;
            let md = harness::render_markdown(&parsed)?;
            if let Some(out) = out {
                write(&resolve(&out), &md)?;
            }
            print!("{md}");
        }
    }
    Ok(())
}

fn load_basis(arg: &str, n: usize) -> Result<Option<BitMatrix>, Failure> {
    if arg == "none" {
        return Ok(None);
    }
    let (_, matrix) = harness::load_basis_file(Path::new(arg), n)?;
    Ok(Some(matrix))
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, contents)?;
    Ok(())
}

fn unix_seconds() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}
