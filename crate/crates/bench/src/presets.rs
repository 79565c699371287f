//! Built-in experiments run by `rowsketch validate`.

use rowsketch::AccuracyTarget;

use crate::config::{DistributionChoice, SampleRule, TrialConfig};
use crate::error::Result;
use crate::experiment::{run_experiment, ExperimentReport};
use crate::problem::{ProblemKind, ProblemSpec};

#[derive(Debug, Clone, PartialEq)]
pub enum Expectation {
    /// Every trial is ε-accurate with ratio exactly 1.
    ExactRecovery,
    SuccessRateAtLeast(f64),
    /// SC2 rate of at least `1 − δ − 3·√(δ(1−δ)/n)`.
    Sc2RateWithinMarkov,
    /// Only the zero-violation requirement that every preset carries.
    NoViolations,
    /// First run uses leverage sampling, second uniform; leverage must not lose.
    LeverageAtLeastUniform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub runs: Vec<TrialConfig>,
    pub expectation: Expectation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PresetOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub reports: Vec<ExperimentReport>,
}

fn target(eps: f64, delta: f64) -> AccuracyTarget {
    AccuracyTarget::new(eps, delta).expect("preset accuracy targets are valid")
}

pub fn consistent_zero_residual() -> Preset {
    Preset {
        name: "consistent-zero-residual",
        runs: vec![TrialConfig {
            problem: ProblemSpec::gaussian(500, 4, 2, 1.0, 101).with_kind(ProblemKind::Consistent),
            distribution: DistributionChoice::Leverage,
            sample_rule: SampleRule::Explicit(5000),
            sample_cap: None,
            target: target(0.1, 0.2),
            n_trials: 50,
            master_seed: 1,
        }],
        expectation: Expectation::ExactRecovery,
    }
}

/// Nine problem/distribution combinations, 1080 trials in total.
pub fn implication_sweep() -> Preset {
    let kinds = [
        ProblemKind::GaussianIncoherent,
        ProblemKind::SpikedCoherent,
        ProblemKind::Consistent,
    ];
    let dists = [
        DistributionChoice::Leverage,
        DistributionChoice::Uniform,
        DistributionChoice::Blended(0.5),
    ];
    let mut runs = Vec::new();
    for (k, kind) in kinds.iter().enumerate() {
        for (d, dist) in dists.iter().enumerate() {
            runs.push(TrialConfig {
                problem: ProblemSpec::gaussian(2000, 5, 2, 1.0, 200 + k as u64)
                    .with_kind(kind.clone())
                    .with_coherence(0.95),
                distribution: *dist,
                sample_rule: SampleRule::MultipleOfRank(100),
                sample_cap: None,
                target: target(0.1, 0.2),
                n_trials: 120,
                master_seed: (10 * k + d) as u64,
            });
        }
    }
    Preset {
        name: "implication-sweep",
        runs,
        expectation: Expectation::NoViolations,
    }
}

/// `s = ⌈2r/(βδε)⌉ = 128` at `r = 8`, `δ = 0.25`, `ε = 0.5`.
pub fn sc2_markov() -> Preset {
    Preset {
        name: "sc2-markov",
        runs: vec![TrialConfig {
            problem: ProblemSpec::gaussian(20000, 8, 1, 1.0, 300),
            distribution: DistributionChoice::Leverage,
            sample_rule: SampleRule::Explicit(128),
            sample_cap: None,
            target: target(0.5, 0.25),
            n_trials: 400,
            master_seed: 3,
        }],
        expectation: Expectation::Sc2RateWithinMarkov,
    }
}

pub fn main_theorem_desk() -> Preset {
    Preset {
        name: "main-theorem-desk",
        runs: vec![TrialConfig {
            problem: ProblemSpec::gaussian(50000, 5, 2, 1.0, 400),
            distribution: DistributionChoice::Leverage,
            sample_rule: SampleRule::TheoremFormula,
            sample_cap: None,
            target: target(0.1, 0.2),
            n_trials: 200,
            master_seed: 4,
        }],
        expectation: Expectation::SuccessRateAtLeast(0.8),
    }
}

pub fn leverage_vs_uniform() -> Preset {
    let base = TrialConfig {
        problem: ProblemSpec::gaussian(2000, 5, 1, 1.0, 500)
            .with_kind(ProblemKind::SpikedCoherent)
            .with_coherence(0.99),
        distribution: DistributionChoice::Leverage,
        sample_rule: SampleRule::Explicit(200),
        sample_cap: None,
        target: target(0.1, 0.2),
        n_trials: 200,
        master_seed: 5,
    };
    let uniform = TrialConfig {
        distribution: DistributionChoice::Uniform,
        ..base.clone()
    };
    Preset {
        name: "leverage-vs-uniform",
        runs: vec![base, uniform],
        expectation: Expectation::LeverageAtLeastUniform,
    }
}

pub fn all_presets() -> Vec<Preset> {
    vec![
        consistent_zero_residual(),
        implication_sweep(),
        sc2_markov(),
        main_theorem_desk(),
        leverage_vs_uniform(),
    ]
}

pub fn find_preset(name: &str) -> Option<Preset> {
    all_presets().into_iter().find(|p| p.name == name)
}

pub fn evaluate(preset: &Preset, threads: usize) -> Result<PresetOutcome> {
    let reports = preset
        .runs
        .iter()
        .map(|cfg| run_experiment(cfg, threads))
        .collect::<Result<Vec<_>>>()?;
    let violations: usize = reports
        .iter()
        .map(|r| r.aggregate.implication_violations)
        .sum();
    let trials: usize = reports.iter().map(|r| r.aggregate.n_trials).sum();
    let first = &reports[0].aggregate;

    let (ok, detail) = match preset.expectation {
        Expectation::ExactRecovery => {
            let exact = reports
                .iter()
                .flat_map(|r| &r.trials)
                .all(|t| t.eps_accurate && t.accuracy_ratio == 1.0);
            (exact, format!("success_rate={}", first.success_rate))
        }
        Expectation::SuccessRateAtLeast(min) => (
            first.success_rate >= min,
            format!(
                "s={} success_rate={} (need >= {min})",
                reports[0].summary.samples, first.success_rate
            ),
        ),
        Expectation::Sc2RateWithinMarkov => {
            let delta = reports[0].summary.delta;
            let n = first.n_trials as f64;
            let min = 1.0 - delta - 3.0 * (delta * (1.0 - delta) / n).sqrt();
            (
                first.sc2_rate >= min,
                format!("sc2_rate={} (need >= {min:.4})", first.sc2_rate),
            )
        }
        Expectation::NoViolations => (true, format!("{trials} trials")),
        Expectation::LeverageAtLeastUniform => {
            let lev = first.success_rate;
            let uni = reports[1].aggregate.success_rate;
            (
                lev >= uni,
                format!(
                    "leverage={lev} uniform={uni} uniform_beta={}",
                    reports[1].summary.beta
                ),
            )
        }
    };
    Ok(PresetOutcome {
        name: preset.name,
        passed: ok && violations == 0,
        detail: format!("{detail} implication_violations={violations}"),
        reports,
    })
}
