use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rowsketch::{
    accuracy_ratio, blended_distribution, build_sketch, check_bounds, check_structural_in,
    exact_lstsq, leverage_distribution, leverage_scores, misestimation_beta, orthonormal_basis,
    required_samples, solve_with_plan, BoundContext, RngStream, SamplingDistribution,
};
use rowsketch_bench::{
    all_presets, evaluate, find_preset, read_matrix, render_csv, write_matrix, write_report,
    BenchError, DistributionChoice, Result, SampleRule, TrialConfig,
};

/// Leverage-score row sampling for overdetermined least squares.
#[derive(Debug, Parser)]
#[command(name = "rowsketch", version)]
struct Cli {
    /// Key-value experiment file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    #[arg(long, global = true)]
    delta: Option<f64>,
    /// leverage | uniform | blended:ALPHA
    #[arg(long, global = true)]
    dist: Option<DistributionChoice>,
    /// auto | INT | xR:INT
    #[arg(long, global = true)]
    samples: Option<SampleRule>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sketch-and-solve A X = B from Matrix Market files.
    Solve {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// Print the leverage scores and coherence of A.
    Leverage {
        #[arg(long)]
        a: PathBuf,
    },
    /// Run a Monte Carlo experiment and emit a CSV report.
    Bench,
    /// Run the built-in presets; exits with status 3 if any fails.
    Validate {
        /// Run only the named preset.
        #[arg(long)]
        preset: Option<String>,
    },
}

impl Cli {
    fn trial_config(&self) -> Result<TrialConfig> {
        let mut cfg = match &self.config {
            Some(path) => TrialConfig::from_file(path)?,
            None => TrialConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.master_seed = seed;
        }
        if let Some(trials) = self.trials {
            cfg.n_trials = trials;
        }
        if let Some(dist) = self.dist {
            cfg.distribution = dist;
        }
        if let Some(rule) = self.samples {
            cfg.sample_rule = rule;
        }
        cfg.set_accuracy(self.epsilon, self.delta)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn solve(cli: &Cli, a_path: &PathBuf, b_path: &PathBuf) -> Result<()> {
    let cfg = cli.trial_config()?;
    let a = read_matrix(a_path)?;
    let b = read_matrix(b_path)?;
    let exact = exact_lstsq(&a, &b)?;
    let basis = orthonormal_basis(&a)?;
    let profile = leverage_scores(&a)?;
    let lev = leverage_distribution(&profile);
    let dist = match cfg.distribution {
        DistributionChoice::Leverage => lev,
        DistributionChoice::Uniform => SamplingDistribution::uniform(a.rows())?,
        DistributionChoice::Blended(alpha) => blended_distribution(&lev, alpha)?,
    };
    let beta = misestimation_beta(&dist, &profile)?;
    let s = match cfg.sample_rule {
        SampleRule::TheoremFormula => required_samples(a.cols(), beta, &cfg.target)?,
        SampleRule::Explicit(s) => s,
        SampleRule::MultipleOfRank(c) => c * a.cols(),
    };
    let s = cfg.sample_cap.map_or(s, |cap| s.min(cap));
    let eps = cfg.target.epsilon();

    let mut rng = RngStream::new(cfg.master_seed, 0);
    let plan = build_sketch(&dist, s, &mut rng)?;
    let ctx = BoundContext::new(&a, &b, &exact)?;
    let structural =
        check_structural_in(&ctx, &plan, &basis, &exact.b_perp, eps, exact.residual_sq)?;
    let sol = solve_with_plan(&a, &b, plan)?;
    let ratio = accuracy_ratio(&a, &b, &sol.x_tilde, &exact)?;
    let bounds = check_bounds(&a, &b, &exact, &sol, eps)?;

    let diagnostics = format!(
        "samples={s}\nbeta={beta}\nsc1_value={}\nsc1_holds={}\nsc2_value={}\nsc2_holds={}\n\
         accuracy_ratio={ratio}\neps_accurate={}\nresidual_bound_holds={}\nsolution_bound_holds={}\n",
        structural.sc1_value,
        structural.sc1_holds,
        structural.sc2_value,
        structural.sc2_holds,
        ratio <= 1.0 + eps,
        bounds.residual_bound_holds,
        bounds.solution_bound_holds,
    );
    match &cli.out {
        Some(path) => {
            write_matrix(path, &sol.x_tilde)?;
            print!("{diagnostics}");
        }
        None => {
            print!("{}", rowsketch_bench::format_matrix(&sol.x_tilde));
            eprint!("{diagnostics}");
        }
    }
    Ok(())
}

fn leverage(cli: &Cli, a_path: &PathBuf) -> Result<()> {
    let a = read_matrix(a_path)?;
    let profile = leverage_scores(&a)?;
    let mut text = format!(
        "# rows={}\n# rank={}\n# coherence={}\n",
        profile.n_rows(),
        profile.rank(),
        profile.coherence()
    );
    for score in profile.scores() {
        text.push_str(&format!("{score}\n"));
    }
    emit(cli, &text)
}

fn emit(cli: &Cli, text: &str) -> Result<()> {
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| BenchError::Io {
            path: path.clone(),
            source: e,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(text.as_bytes());
            Ok(())
        }
    }
}

fn bench(cli: &Cli) -> Result<()> {
    let cfg = cli.trial_config()?;
    let report = rowsketch_bench::run_experiment(&cfg, cli.threads)?;
    match &cli.out {
        Some(path) => write_report(&report, path)?,
        None => emit(cli, &render_csv(&report))?,
    }
    let agg = &report.aggregate;
    eprintln!(
        "{} trials, s={}, success_rate={}, sc1_rate={}, sc2_rate={}, implication_violations={}",
        agg.n_trials,
        report.summary.samples,
        agg.success_rate,
        agg.sc1_rate,
        agg.sc2_rate,
        agg.implication_violations
    );
    Ok(())
}

fn validate(cli: &Cli, only: Option<&str>) -> Result<bool> {
    let presets = match only {
        Some(name) => vec![find_preset(name)
            .ok_or_else(|| BenchError::Config(format!("unknown preset {name:?}")))?],
        None => all_presets(),
    };
    let mut all_passed = true;
    for preset in &presets {
        let outcome = evaluate(preset, cli.threads)?;
        let tag = if outcome.passed { "PASS" } else { "FAIL" };
        println!("[{tag}] {}: {}", outcome.name, outcome.detail);
        all_passed &= outcome.passed;
    }
    Ok(all_passed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Solve { a, b } => solve(&cli, a, b).map(|_| true),
        Command::Leverage { a } => leverage(&cli, a).map(|_| true),
        Command::Bench => bench(&cli).map(|_| true),
        Command::Validate { preset } => validate(&cli, preset.as_deref()),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
