//! CSV rendering of experiment results.
//!
//! One row per trial in a fixed column order, followed by `# key=value`
//! trailer lines. `wall_time_secs` is always the last trailer line so that
//! reproducibility checks can drop it.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{BenchError, Result};
use crate::experiment::ExperimentReport;

pub const COLUMNS: [&str; 19] = [
    "trial_id",
    "samples",
    "beta",
    "sc1_value",
    "sc1_holds",
    "sc2_value",
    "sc2_holds",
    "accuracy_ratio",
    "eps_accurate",
    "solution_err_sq",
    "solution_bound_limit",
    "residual_bound_holds",
    "solution_bound_holds",
    "gamma_bound_limit",
    "gamma_bound_holds",
    "status",
    "rng_algorithm",
    "rng_seed",
    "rng_stream",
];

fn quote(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

pub fn render_csv(report: &ExperimentReport) -> String {
    let mut out = COLUMNS.join(",");
    out.push('\n');
    let algo = report.summary.rng_algorithm;
    for t in &report.trials {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            t.trial_id,
            t.samples,
            t.beta,
            t.sc1_value,
            t.sc1_holds,
            t.sc2_value,
            t.sc2_holds,
            t.accuracy_ratio,
            t.eps_accurate,
            t.solution_err_sq,
            t.solution_bound_limit,
            t.residual_bound_holds,
            t.solution_bound_holds,
            t.gamma_bound_limit,
            t.gamma_bound_holds,
            quote(&t.status.label()),
            algo,
            t.rng_seed,
            t.rng_stream,
        );
    }
    let s = &report.summary;
    let a = &report.aggregate;
    let trailer: [(&str, String); 28] = [
        ("problem_kind", s.problem_kind.clone()),
        ("n_rows", s.n_rows.to_string()),
        ("n_cols", s.n_cols.to_string()),
        ("rhs_cols", s.rhs_cols.to_string()),
        ("problem_seed", s.problem_seed.to_string()),
        ("distribution", s.distribution.clone()),
        ("sample_rule", s.sample_rule.clone()),
        ("samples", s.samples.to_string()),
        ("beta", s.beta.to_string()),
        ("coherence", s.coherence.to_string()),
        ("kappa", s.kappa.to_string()),
        ("gamma", s.gamma.to_string()),
        ("residual_sq", s.residual_sq.to_string()),
        ("epsilon", s.epsilon.to_string()),
        ("delta", s.delta.to_string()),
        ("master_seed", s.master_seed.to_string()),
        ("rng_algorithm", s.rng_algorithm.to_string()),
        ("n_trials", a.n_trials.to_string()),
        ("successes", a.successes.to_string()),
        ("success_rate", a.success_rate.to_string()),
        ("sc1_count", a.sc1_count.to_string()),
        ("sc1_rate", a.sc1_rate.to_string()),
        ("sc2_count", a.sc2_count.to_string()),
        ("sc2_rate", a.sc2_rate.to_string()),
        ("both_count", a.both_count.to_string()),
        (
            "implication_violations",
            a.implication_violations.to_string(),
        ),
        ("failed_trials", a.failed_trials.to_string()),
        ("wall_time_secs", a.wall_time_secs.to_string()),
    ];
    for (k, v) in trailer {
        let _ = writeln!(out, "# {k}={v}");
    }
    out
}

pub fn write_report(report: &ExperimentReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, render_csv(report)).map_err(|e| BenchError::io(path, e))
}

/// Drops the wall-clock trailer so two renderings of the same run compare equal.
pub fn strip_timing(csv: &str) -> String {
    csv.lines()
        .filter(|l| !l.starts_with("# wall_time_secs="))
        .map(|l| format!("{l}\n"))
        .collect()
}
