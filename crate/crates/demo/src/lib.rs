//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export returns a JSON string; errors surface as JS exceptions.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use zbasis::epistasis::{enumerated_epistasis, SampleSize};
use zbasis::ga::{run_ga, GaConfig};
use zbasis::gf2::{BitMatrix, BitVector};
use zbasis::harness::{epistasis_table, seeds};
use zbasis::problems::{onemax, FitnessProblem, OneMax, VariantOneMax};
use zbasis::search::{search_basis, BasisSearchConfig, Evaluator};

const MAX_TABLE_N: usize = 8;
const MAX_GA_N: usize = 40;

#[derive(Serialize)]
struct TableRow {
    v: String,
    mapped: String,
    fitness: f64,
}

#[derive(Serialize)]
struct BasisTable {
    n: usize,
    inverse: Vec<String>,
    rows: Vec<TableRow>,
    epistasis_before: f64,
    epistasis_after: f64,
}

/// Maps every vector of the cube through the matrix given as lines of 0/1,
/// alongside its onemax fitness.
pub fn basis_table(rows: &str) -> Result<String, String> {
    let lines: Vec<&str> = rows.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
    let t = BitMatrix::from_rows(&lines).map_err(|e| e.to_string())?;
    let n = t.n();
    if n == 0 || n > MAX_TABLE_N {
        return Err(format!("matrix size must be between 1 and {MAX_TABLE_N}"));
    }
    let inverse = t.inverse().map_err(|e| e.to_string())?;
    let mut table: Vec<TableRow> = (0..1u64 << n)
        .map(|i| {
            let v = BitVector::from_index(n, i);
            TableRow {
                mapped: t.mul_vec(&v).expect("same size").to_string(),
                fitness: onemax(&v),
                v: v.to_string(),
            }
        })
        .collect();
    table.sort_by(|a, b| b.fitness.total_cmp(&a.fitness).then_with(|| b.v.cmp(&a.v)));
    // The problem seen in the new coordinates is onemax composed with T^-1.
    let seen = VariantOneMax::from_matrix(inverse.clone()).map_err(|e| e.to_string())?;
    let report = BasisTable {
        n,
        inverse: inverse.row_strings(),
        rows: table,
        epistasis_before: enumerated_epistasis(&OneMax { n }, None).map_err(|e| e.to_string())?.value,
        epistasis_after: enumerated_epistasis(&seen, None).map_err(|e| e.to_string())?.value,
    };
    serde_json::to_string(&report).map_err(|e| e.to_string())
}

/// Parity epistasis before and after its onemax basis for even `n` up to
/// `max_n`.
pub fn parity_curve(max_n: usize) -> Result<String, String> {
    if max_n > 16 {
        return Err("max n is 16 in the browser".into());
    }
    let rows = epistasis_table(max_n).map_err(|e| e.to_string())?;
    serde_json::to_string(&rows).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Comparison {
    n: usize,
    generations: usize,
    decrease_rate: f64,
    original: Vec<f64>,
    searched: Vec<f64>,
    hidden: Vec<f64>,
}

/// Best-fitness traces on a random variant-onemax instance: no change of
/// basis, a basis found by epistasis search, and the hidden basis.
pub fn compare_runs(n: usize, seed: u64, generations: usize) -> Result<String, String> {
    if !(2..=MAX_GA_N).contains(&n) {
        return Err(format!("n must be between 2 and {MAX_GA_N}"));
    }
    let err = |e: zbasis::Error| e.to_string();
    let mut rng = zbasis::seeded_rng(seed);
    let problem = VariantOneMax::generate(n, &mut rng).map_err(err)?;
    let config = BasisSearchConfig::for_length(n, Evaluator::epistasis(SampleSize::Square));
    let outcome = search_basis(&problem, &config, &mut rng).map_err(err)?;
    let ga = GaConfig {
        early_stop_on_optimum: false,
        ..GaConfig::for_length(n).with_generations(generations)
    };
    let run_seed = seeds::derive(seed, 1);
    let trace = |basis: Option<&BitMatrix>| -> Result<Vec<f64>, String> {
        let rec = run_ga(&problem, basis, &ga, &mut zbasis::seeded_rng(run_seed)).map_err(err)?;
        Ok(rec.best_per_generation.iter().map(|f| f / problem.len() as f64).collect())
    };
    let out = Comparison {
        n,
        generations,
        decrease_rate: outcome.decrease_rate(&config.evaluator),
        original: trace(None)?,
        searched: trace(Some(&outcome.best.matrix))?,
        hidden: trace(Some(problem.matrix()))?,
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn change_basis_table(rows: &str) -> Result<String, JsValue> {
    basis_table(rows).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn epistasis_curve(max_n: usize) -> Result<String, JsValue> {
    parity_curve(max_n).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn ga_compare(n: usize, seed: u32, generations: usize) -> Result<String, JsValue> {
    compare_runs(n, u64::from(seed), generations).map_err(|e| JsValue::from_str(&e))
}
