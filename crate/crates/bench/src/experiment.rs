//! Monte Carlo trials of the sketched solver against its exact counterpart.

use std::time::Instant;

use rayon::prelude::*;
use rowsketch::{
    accuracy_ratio, blended_distribution, build_sketch, check_bounds_in, check_structural_in,
    exact_lstsq, leverage_distribution, leverage_scores, misestimation_beta, orthonormal_basis,
    required_samples, solve_with_plan, BoundContext, DenseMatrix, Error, GammaBoundForm,
    LstsqSolution, OrthonormalBasis, RngStream, SamplingDistribution, RNG_ALGORITHM,
};

use crate::config::{DistributionChoice, SampleRule, TrialConfig};
use crate::error::{BenchError, Result};
use crate::problem::{generate_problem, Problem};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TrialStatus {
    Ok,
    /// `S A` lost rank; counted as an accuracy failure.
    SketchRankDeficient,
    Failed(String),
}

impl TrialStatus {
    pub fn label(&self) -> String {
        match self {
            Self::Ok => "ok".into(),
            Self::SketchRankDeficient => "sketch-rank-deficient".into(),
            Self::Failed(msg) => format!("failed: {msg}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial_id: usize,
    pub samples: usize,
    pub beta: f64,
    pub sc1_value: f64,
    pub sc1_holds: bool,
    pub sc2_value: f64,
    pub sc2_holds: bool,
    pub accuracy_ratio: f64,
    pub eps_accurate: bool,
    pub solution_err_sq: f64,
    pub solution_bound_limit: f64,
    pub residual_bound_holds: bool,
    pub solution_bound_holds: bool,
    pub gamma_bound_limit: f64,
    pub gamma_bound_holds: bool,
    /// Both structural conditions held but a guaranteed bound failed.
    pub implication_violated: bool,
    pub status: TrialStatus,
    pub rng_seed: u64,
    pub rng_stream: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub n_trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub sc1_count: usize,
    pub sc1_rate: f64,
    pub sc2_count: usize,
    pub sc2_rate: f64,
    pub both_count: usize,
    pub implication_violations: usize,
    pub failed_trials: usize,
    pub wall_time_secs: f64,
}

/// Problem-level facts shared by all trials of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub problem_kind: String,
    pub n_rows: usize,
    pub n_cols: usize,
    pub rhs_cols: usize,
    pub problem_seed: u64,
    pub distribution: String,
    pub sample_rule: String,
    pub samples: usize,
    pub beta: f64,
    pub coherence: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub residual_sq: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub master_seed: u64,
    pub rng_algorithm: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub summary: RunSummary,
    pub trials: Vec<TrialRecord>,
    pub aggregate: Aggregate,
}

struct Prepared {
    problem: Problem,
    exact: LstsqSolution,
    basis: OrthonormalBasis,
    ctx: BoundContext,
    dist: SamplingDistribution,
    beta: f64,
    samples: usize,
    coherence: f64,
}

fn choose_distribution(
    choice: DistributionChoice,
    lev: &SamplingDistribution,
) -> Result<SamplingDistribution> {
    Ok(match choice {
        DistributionChoice::Leverage => lev.clone(),
        DistributionChoice::Uniform => SamplingDistribution::uniform(lev.len())?,
        DistributionChoice::Blended(alpha) => blended_distribution(lev, alpha)?,
    })
}

fn prepare(cfg: &TrialConfig, problem: Problem) -> Result<Prepared> {
    let (a, b) = (&problem.a, &problem.b);
    let exact = exact_lstsq(a, b)?;
    let basis = orthonormal_basis(a)?;
    let profile = leverage_scores(a)?;
    let ctx = BoundContext::new(a, b, &exact)?;
    let lev = leverage_distribution(&profile);
    let dist = choose_distribution(cfg.distribution, &lev)?;
    let beta = misestimation_beta(&dist, &profile)?;
    let r = a.cols();
    let samples = match cfg.sample_rule {
        SampleRule::TheoremFormula => required_samples(r, beta, &cfg.target)?,
        SampleRule::Explicit(s) => s,
        SampleRule::MultipleOfRank(c) => c * r,
    };
    let samples = cfg.sample_cap.map_or(samples, |cap| samples.min(cap));
    let dist = dist.with_beta(beta);
    Ok(Prepared {
        coherence: profile.coherence(),
        problem,
        exact,
        basis,
        ctx,
        dist,
        beta,
        samples,
    })
}

fn run_trial(cfg: &TrialConfig, prep: &Prepared, trial_id: usize) -> TrialRecord {
    let eps = cfg.target.epsilon();
    let mut rng = RngStream::new(cfg.master_seed, trial_id as u64);
    let mut rec = TrialRecord {
        trial_id,
        samples: prep.samples,
        beta: prep.beta,
        sc1_value: f64::NAN,
        sc1_holds: false,
        sc2_value: f64::NAN,
        sc2_holds: false,
        accuracy_ratio: f64::INFINITY,
        eps_accurate: false,
        solution_err_sq: f64::NAN,
        solution_bound_limit: f64::NAN,
        residual_bound_holds: false,
        solution_bound_holds: false,
        gamma_bound_limit: f64::NAN,
        gamma_bound_holds: false,
        implication_violated: false,
        status: TrialStatus::Ok,
        rng_seed: rng.seed(),
        rng_stream: rng.stream_index(),
    };
    let (a, b) = (&prep.problem.a, &prep.problem.b);

    let outcome = (|| -> std::result::Result<(), Error> {
        let plan = build_sketch(&prep.dist, prep.samples, &mut rng)?;
        let structural = check_structural_in(
            &prep.ctx,
            &plan,
            &prep.basis,
            &prep.exact.b_perp,
            eps,
            prep.exact.residual_sq,
        )?;
        rec.sc1_value = structural.sc1_value;
        rec.sc1_holds = structural.sc1_holds;
        rec.sc2_value = structural.sc2_value;
        rec.sc2_holds = structural.sc2_holds;

        let sol = solve_with_plan(a, b, plan)?;
        let ratio = accuracy_ratio(a, b, &sol.x_tilde, &prep.exact)?;
        rec.accuracy_ratio = ratio;
        rec.eps_accurate = ratio <= 1.0 + eps;

        let bounds = check_bounds_in(
            &prep.ctx,
            a,
            b,
            &prep.exact,
            &sol,
            eps,
            GammaBoundForm::Linear,
        )?;
        rec.solution_err_sq = bounds.solution_bound_value;
        rec.solution_bound_limit = bounds.solution_bound_limit;
        rec.residual_bound_holds = bounds.residual_bound_holds;
        rec.solution_bound_holds = bounds.solution_bound_holds;
        rec.gamma_bound_limit = bounds.gamma_bound_limit;
        rec.gamma_bound_holds = bounds.gamma_bound_holds;
        rec.implication_violated = structural.both_hold() && !bounds.guaranteed_bounds_hold();
        Ok(())
    })();

    match outcome {
        Ok(()) => {}
        Err(Error::SketchRankDeficient { .. }) => rec.status = TrialStatus::SketchRankDeficient,
        Err(e) => rec.status = TrialStatus::Failed(e.to_string()),
    }
    // A structurally certified sketch that cannot be solved also contradicts the guarantee.
    if rec.status != TrialStatus::Ok && rec.sc1_holds && rec.sc2_holds {
        rec.implication_violated = true;
    }
    rec
}

fn aggregate(trials: &[TrialRecord], wall_time_secs: f64) -> Aggregate {
    let n = trials.len();
    let count = |f: fn(&TrialRecord) -> bool| trials.iter().filter(|t| f(t)).count();
    let successes = count(|t| t.eps_accurate);
    let sc1_count = count(|t| t.sc1_holds);
    let sc2_count = count(|t| t.sc2_holds);
    let rate = |k: usize| k as f64 / n as f64;
    Aggregate {
        n_trials: n,
        successes,
        success_rate: rate(successes),
        sc1_count,
        sc1_rate: rate(sc1_count),
        sc2_count,
        sc2_rate: rate(sc2_count),
        both_count: count(|t| t.sc1_holds && t.sc2_holds),
        implication_violations: count(|t| t.implication_violated),
        failed_trials: count(|t| t.status != TrialStatus::Ok),
        wall_time_secs,
    }
}

/// Runs every trial of `cfg` on a pool of `threads` workers. Trial `t` draws
/// from stream `(master_seed, t)`, so results do not depend on `threads`.
pub fn run_experiment(cfg: &TrialConfig, threads: usize) -> Result<ExperimentReport> {
    cfg.validate()?;
    let start = Instant::now();
    let problem = generate_problem(&cfg.problem)?;
    run_on_problem(cfg, problem, threads, start)
}

/// Like [`run_experiment`] but on an already generated or loaded problem.
pub fn run_experiment_on(
    cfg: &TrialConfig,
    problem: Problem,
    threads: usize,
) -> Result<ExperimentReport> {
    cfg.validate()?;
    run_on_problem(cfg, problem, threads, Instant::now())
}

fn run_on_problem(
    cfg: &TrialConfig,
    problem: Problem,
    threads: usize,
    start: Instant,
) -> Result<ExperimentReport> {
    let prep = prepare(cfg, problem)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| BenchError::Config(format!("thread pool: {e}")))?;
    let trials: Vec<TrialRecord> = pool.install(|| {
        (0..cfg.n_trials)
            .into_par_iter()
            .map(|t| run_trial(cfg, &prep, t))
            .collect()
    });
    let a: &DenseMatrix = &prep.problem.a;
    let summary = RunSummary {
        problem_kind: prep.problem.meta.kind.to_string(),
        n_rows: a.rows(),
        n_cols: a.cols(),
        rhs_cols: prep.problem.b.cols(),
        problem_seed: cfg.problem.seed,
        distribution: cfg.distribution.to_string(),
        sample_rule: cfg.sample_rule.to_string(),
        samples: prep.samples,
        beta: prep.beta,
        coherence: prep.coherence,
        kappa: prep.ctx.spectral.kappa,
        gamma: prep.ctx.gamma,
        residual_sq: prep.exact.residual_sq,
        epsilon: cfg.target.epsilon(),
        delta: cfg.target.delta(),
        master_seed: cfg.master_seed,
        rng_algorithm: RNG_ALGORITHM,
    };
    let aggregate = aggregate(&trials, start.elapsed().as_secs_f64());
    Ok(ExperimentReport {
        summary,
        trials,
        aggregate,
    })
}
