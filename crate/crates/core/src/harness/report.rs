use std::fmt::Write;

use super::experiment::ExperimentReport;
use crate::error::{Error, Result};

/// Markdown comparison tables for one or more experiment reports: a results
/// table per report, and a table of epistasis before and after for the arms
/// that change the basis.
pub fn render_markdown(reports: &[ExperimentReport]) -> Result<String> {
    if reports.is_empty() {
        return Err(Error::InvalidParameter("no reports to render".into()));
    }
    let mut out = String::new();
    for r in reports {
        let scale = if r.optimum.is_some() { ", fitness normalized by the optimum" } else { "" };
        writeln!(
            out,
            "## {} (n = {})\n\n{} runs per arm, {} generations, population {}, master seed {}{}.\n",
            r.instance_kind, r.n, r.repetitions, r.generations, r.population, r.master_seed, scale
        )
        .unwrap();
        out.push_str("| Type | # of optima | Best | Average | SD | Q1 | Q2 | Q3 |\n");
        out.push_str("|---|---:|---:|---:|---:|---:|---:|---:|\n");
        for arm in &r.arms {
            let s = &arm.summary;
            writeln!(
                out,
                "| {} | {} | {:.3} | {:.3} | {:.4} | {:.3} | {:.3} | {:.3} |",
                arm.label, s.optima_count, s.best, s.mean, s.sd, s.q1, s.q2, s.q3
            )
            .unwrap();
        }
        let with_basis: Vec<_> = r
            .arms
            .iter()
            .filter_map(|a| a.basis.as_ref().map(|b| (a, b)))
            .collect();
        if !with_basis.is_empty() {
            out.push_str("\n| Type | Sample size | Before | After | Decrease rate (%) |\n");
            out.push_str("|---|---:|---:|---:|---:|\n");
            for (arm, b) in with_basis {
                writeln!(
                    out,
                    "| {} | {} | {:.4} | {:.4} | {:.1} |",
                    arm.label, b.sample_size, b.epistasis_before, b.epistasis_after, b.decrease_rate
                )
                .unwrap();
            }
        }
        out.push('\n');
    }
    Ok(out)
}
