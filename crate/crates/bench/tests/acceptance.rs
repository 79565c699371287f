//! End-to-end acceptance checks. Runs without the libtest harness so that the
//! one-line verdict for each criterion is always printed.

#![allow(clippy::needless_range_loop, clippy::type_complexity)]

use std::process::{Command, ExitCode};
use std::time::Instant;

use rand_distr::{Distribution, StandardNormal};
use rowsketch::{
    apply_sketch, approx_matmul, blended_distribution, build_sketch, check_structural, exact_lstsq,
    leverage_scores, orthonormal_basis, required_samples, row_norm_distribution,
    sc2_required_samples, sketched_norm_sq, sketched_product, AccuracyTarget, DenseMatrix,
    RngStream, SamplingDistribution, SketchPlan, SAMPLE_CONSTANT,
};
use rowsketch_bench::{evaluate, find_preset, strip_timing, Preset};

type Verdict = Result<String, String>;

fn gaussian(rows: usize, cols: usize, rng: &mut RngStream) -> DenseMatrix {
    let data = (0..rows * cols)
        .map(|_| StandardNormal.sample(rng))
        .collect();
    DenseMatrix::new(rows, cols, data).unwrap()
}

fn uniform_int(rng: &mut RngStream, lo: usize, hi: usize) -> usize {
    lo + ((hi - lo + 1) as f64 * rng.next_unit()) as usize
}

fn positive_distribution(n: usize, rng: &mut RngStream) -> SamplingDistribution {
    let w: Vec<f64> = (0..n).map(|_| 0.05 + rng.next_unit()).collect();
    SamplingDistribution::from_weights(&w).unwrap()
}

/// Gaussian elimination with partial pivoting on `[M | Y]`.
fn solve_square(m: &DenseMatrix, y: &DenseMatrix) -> DenseMatrix {
    let (n, k) = (m.rows(), y.cols());
    let mut aug: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row = m.row(i);
            row.extend(y.row(i));
            row
        })
        .collect();
    for c in 0..n {
        let piv = (c..n)
            .max_by(|&a, &b| aug[a][c].abs().total_cmp(&aug[b][c].abs()))
            .unwrap();
        aug.swap(c, piv);
        for r in c + 1..n {
            let f = aug[r][c] / aug[c][c];
            for j in c..n + k {
                aug[r][j] -= f * aug[c][j];
            }
        }
    }
    let mut x = vec![vec![0.0; k]; n];
    for i in (0..n).rev() {
        for j in 0..k {
            let mut acc = aug[i][n + j];
            for l in i + 1..n {
                acc -= aug[i][l] * x[l][j];
            }
            x[i][j] = acc / aug[i][i];
        }
    }
    DenseMatrix::from_rows(&x).unwrap()
}

/// Smallest eigenvalue of a symmetric matrix by cyclic Jacobi rotations.
fn min_eigenvalue(m: &DenseMatrix) -> f64 {
    let n = m.rows();
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| m.row(i)).collect();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).fold(f64::INFINITY, f64::min)
}

fn mean_and_se(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn criterion_1() -> Verdict {
    let mut rng = RngStream::new(1001, 0);
    let mut worst_sum = 0.0f64;
    for inst in 0..50 {
        let r = uniform_int(&mut rng, 1, 20);
        let n = uniform_int(&mut rng, r + 1, 2000);
        let a = gaussian(n, r, &mut rng);
        let prof = leverage_scores(&a).map_err(|e| format!("instance {inst}: {e}"))?;
        let sum: f64 = prof.scores().iter().sum();
        worst_sum = worst_sum.max((sum - r as f64).abs());
        if (sum - r as f64).abs() > 1e-8 {
            return Err(format!("instance {inst}: sum {sum} vs rank {r}"));
        }
        if let Some(bad) = prof
            .scores()
            .iter()
            .find(|&&l| !(0.0..=1.0 + 1e-12).contains(&l))
        {
            return Err(format!("instance {inst}: score {bad}"));
        }
        let mu = prof.coherence();
        if mu < r as f64 / n as f64 - 1e-12 || mu > 1.0 + 1e-12 {
            return Err(format!("instance {inst}: coherence {mu} for {n}x{r}"));
        }
    }
    Ok(format!("50 instances, max |sum - r| = {worst_sum:.2e}"))
}

fn criterion_2() -> Verdict {
    let mut rng = RngStream::new(1002, 0);
    let mut worst = 0.0f64;
    for pair in 0..10 {
        let n = uniform_int(&mut rng, 2, 30);
        let x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let p = positive_distribution(n, &mut rng);
        let s = uniform_int(&mut rng, 1, 20);
        let truth: f64 = x.iter().map(|v| v * v).sum();
        let mut trial_rng = RngStream::new(1002, pair + 1);
        let samples: Vec<f64> = (0..100_000)
            .map(|_| {
                let plan = build_sketch(&p, s, &mut trial_rng).unwrap();
                sketched_norm_sq(&plan, &x).unwrap()
            })
            .collect();
        let (mean, se) = mean_and_se(&samples);
        let z = (mean - truth).abs() / se;
        worst = worst.max(z);
        if z > 5.0 {
            return Err(format!("pair {pair}: mean {mean} vs {truth} ({z:.2} SE)"));
        }
    }
    Ok(format!(
        "10 pairs x 1e5 plans, worst deviation {worst:.2} SE"
    ))
}

fn criterion_3() -> Verdict {
    let mut rng = RngStream::new(1003, 0);
    let mut worst = 0.0f64;
    for pair in 0..5 {
        let n = uniform_int(&mut rng, 10, 60);
        let a = gaussian(n, uniform_int(&mut rng, 1, 4), &mut rng);
        let b = gaussian(n, uniform_int(&mut rng, 1, 4), &mut rng);
        let exact = a.tr_matmul(&b).unwrap();
        let reference = row_norm_distribution(&a).unwrap();
        let scale = a.frobenius_norm_sq() * b.frobenius_norm_sq();
        for (bi, beta) in [1.0, 0.5, 0.1].into_iter().enumerate() {
            // (1−α)·p_ref + α/N ≥ (1−α)·p_ref, so β = 1 − α analytically.
            let p = blended_distribution(&reference, 1.0 - beta).unwrap();
            for s in [10usize, 100] {
                let mut trial_rng = RngStream::new(1003, (100 * pair + 10 * bi + s) as u64);
                let mean = (0..10_000)
                    .map(|_| {
                        approx_matmul(&a, &b, &p, s, &mut trial_rng)
                            .unwrap()
                            .sub(&exact)
                            .unwrap()
                            .frobenius_norm_sq()
                    })
                    .sum::<f64>()
                    / 10_000.0;
                let bound = scale / (beta * s as f64);
                worst = worst.max(mean / bound);
                if mean > 1.1 * bound {
                    return Err(format!(
                        "pair {pair} beta {beta} s {s}: {mean} > 1.1 x {bound}"
                    ));
                }
            }
        }
    }

    // a = [1, 1]ᵀ, b = [1, −1]ᵀ, uniform p, one draw: each outcome estimates ±2.
    let a = DenseMatrix::from_rows(&[[1.0], [1.0]]).unwrap();
    let b = DenseMatrix::from_rows(&[[1.0], [-1.0]]).unwrap();
    let p = SamplingDistribution::uniform(2).unwrap();
    let err_sq: f64 = (0..2)
        .map(|k| {
            let plan = SketchPlan::from_draws(&p, vec![k]).unwrap();
            let est = sketched_product(&plan, &a, &b).unwrap()[(0, 0)];
            0.5 * est * est
        })
        .sum();
    if err_sq != 4.0 {
        return Err(format!("2x1 enumeration gives {err_sq}, expected 4"));
    }
    Ok(format!(
        "30 settings x 1e4 trials, worst mean/bound {worst:.3}; 2x1 error^2 = 4"
    ))
}

fn preset_verdict(
    preset: &Preset,
    extra: impl Fn(&rowsketch_bench::PresetOutcome) -> Verdict,
) -> Verdict {
    let start = Instant::now();
    let out = evaluate(preset, 4).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    if !out.passed {
        return Err(out.detail);
    }
    extra(&out).map(|msg| format!("{msg}; {} ({secs:.1}s)", out.detail))
}

fn criterion_4() -> Verdict {
    let preset = find_preset("implication-sweep").unwrap();
    preset_verdict(&preset, |out| {
        let trials: usize = out.reports.iter().map(|r| r.aggregate.n_trials).sum();
        let both: usize = out.reports.iter().map(|r| r.aggregate.both_count).sum();
        let kinds: std::collections::BTreeSet<_> = out
            .reports
            .iter()
            .map(|r| r.summary.problem_kind.clone())
            .collect();
        let dists: std::collections::BTreeSet<_> = out
            .reports
            .iter()
            .map(|r| r.summary.distribution.clone())
            .collect();
        if trials < 1000 || kinds.len() < 3 || dists.len() < 3 {
            return Err(format!(
                "sweep too small: {trials} trials, {kinds:?}, {dists:?}"
            ));
        }
        if both == 0 {
            return Err("no trial satisfied both conditions".into());
        }
        Ok(format!("{trials} trials, {both} with SC1 and SC2"))
    })
}

fn criterion_5() -> Verdict {
    let target = AccuracyTarget::new(0.5, 0.25).unwrap();
    let s = sc2_required_samples(8, 1.0, &target).map_err(|e| e.to_string())?;
    if s != 128 {
        return Err(format!("sample count {s}, expected 128"));
    }
    let preset = find_preset("sc2-markov").unwrap();
    preset_verdict(&preset, |out| {
        let rep = &out.reports[0];
        let sum = &rep.summary;
        if (sum.n_rows, sum.n_cols, sum.samples, rep.aggregate.n_trials) != (20000, 8, 128, 400)
            || sum.distribution != "leverage"
            || sum.beta != 1.0
        {
            return Err(format!("preset drifted from the required setting: {sum:?}"));
        }
        Ok(format!("s = {s}"))
    })
}

fn criterion_6() -> Verdict {
    let preset = find_preset("main-theorem-desk").unwrap();
    preset_verdict(&preset, |out| {
        let rep = &out.reports[0];
        let sum = &rep.summary;
        if (sum.n_rows, sum.n_cols, sum.rhs_cols, rep.aggregate.n_trials) != (50000, 5, 2, 200)
            || (sum.epsilon, sum.delta, sum.beta) != (0.1, 0.2, 1.0)
            || sum.samples > sum.n_rows
        {
            return Err(format!("preset drifted from the required setting: {sum:?}"));
        }
        if rep.aggregate.success_rate < 0.8 {
            return Err(format!("success rate {}", rep.aggregate.success_rate));
        }
        Ok(format!("s = {}", sum.samples))
    })
}

fn criterion_7() -> Verdict {
    // (1 − 1/√2)² = 3/2 − √2, so C = 144/(3/2 − √2) = 864 + 576√2.
    let c = 864.0 + 576.0 * 2f64.sqrt();
    if !close(SAMPLE_CONSTANT, c, 1e-14) || (c - 1678.6).abs() > 0.05 {
        return Err(format!("C = {SAMPLE_CONSTANT}, closed form {c}"));
    }
    let req = |eps, delta| required_samples(10, 1.0, &AccuracyTarget::new(eps, delta).unwrap());
    // Second branch: 1/(δε) = 1e7 beats C·ln(100) ≈ 7730.
    let second = req(1e-6, 0.1).map_err(|e| e.to_string())?;
    // First branch: 10·C·ln(100) = 77301.79…, so the ceiling is 77302.
    let first = req(0.01, 0.1).map_err(|e| e.to_string())?;
    let first_real = 10.0 * c * 100f64.ln();
    if second != 100_000_000 {
        return Err(format!("second branch gives {second}"));
    }
    if first != 77_302 || first as f64 != first_real.ceil() || 1e3 > c * 100f64.ln() {
        return Err(format!("first branch gives {first}, oracle {first_real}"));
    }
    Ok(format!("C = {c:.4}, s = {second} and {first}"))
}

fn criterion_8() -> Verdict {
    let mut rng = RngStream::new(1008, 0);
    let mut worst = 0.0f64;
    for inst in 0..50 {
        let n = uniform_int(&mut rng, 2, 16);
        let r = uniform_int(&mut rng, 1, (n - 1).min(5));
        let k = uniform_int(&mut rng, 1, 3);
        let a = gaussian(n, r, &mut rng);
        let b = gaussian(n, k, &mut rng);
        let p = positive_distribution(n, &mut rng);
        let s = uniform_int(&mut rng, r, 3 * n);
        let plan = build_sketch(&p, s, &mut rng).unwrap();
        let dense = plan.to_dense();

        let sa = apply_sketch(&plan, &a).unwrap();
        let dense_sa = dense.matmul(&a).unwrap();
        let d1 = sa.sub(&dense_sa).unwrap().max_abs() / dense_sa.max_abs();

        let x = b.column(0);
        let xm = DenseMatrix::column_vector(x).unwrap();
        let dense_norm = dense.matmul(&xm).unwrap().frobenius_norm_sq();
        let norm = sketched_norm_sq(&plan, x).unwrap();

        let exact = exact_lstsq(&a, &b).unwrap();
        let q = orthonormal_basis(&a).unwrap();
        let eps = 0.3;
        let rep = check_structural(&plan, &q, &exact.b_perp, eps, exact.residual_sq).unwrap();
        let sq = dense.matmul(&q.q).unwrap();
        let dense_sc1 = if s < r {
            0.0
        } else {
            min_eigenvalue(&sq.tr_matmul(&sq).unwrap())
        };
        let dense_sc2 = sq
            .tr_matmul(&dense.matmul(&exact.b_perp).unwrap())
            .unwrap()
            .frobenius_norm_sq();

        for (what, got, want) in [
            ("norm", norm, dense_norm),
            ("sc1", rep.sc1_value, dense_sc1),
            ("sc2", rep.sc2_value, dense_sc2),
        ] {
            if !close(got, want, 1e-12) {
                return Err(format!(
                    "instance {inst} ({n}x{r}, s={s}): {what} {got} vs {want}"
                ));
            }
            worst = worst.max((got - want).abs() / want.abs().max(1.0));
        }
        if d1 > 1e-12 {
            return Err(format!("instance {inst}: apply_sketch differs by {d1:.2e}"));
        }
        worst = worst.max(d1);

        // Normal equations on a taller, independent instance.
        let big_n = uniform_int(&mut rng, 20, 400);
        let big_r = uniform_int(&mut rng, 1, 10);
        let ta = gaussian(big_n, big_r, &mut rng);
        let tb = gaussian(big_n, k, &mut rng);
        let x_opt = exact_lstsq(&ta, &tb).unwrap().x_opt;
        let oracle = solve_square(&ta.tr_matmul(&ta).unwrap(), &ta.tr_matmul(&tb).unwrap());
        let rel = x_opt.sub(&oracle).unwrap().frobenius_norm() / oracle.frobenius_norm();
        if rel > 1e-8 {
            return Err(format!(
                "instance {inst}: lstsq vs normal equations {rel:.2e}"
            ));
        }
    }
    Ok(format!("50 instances, worst dense discrepancy {worst:.2e}"))
}

fn run_cli(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_rowsketch"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

fn criterion_9() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "kind = spiked-coherent\nrows = 3000\ncols = 6\nrhs_cols = 2\ncoherence = 0.9\n\
         problem_seed = 17\nsamples = xR:40\ntrials = 64\n",
    )
    .map_err(|e| e.to_string())?;
    let cfg = cfg.to_str().unwrap();
    for dist in ["leverage", "uniform", "blended:0.3"] {
        let mut outputs = Vec::new();
        for threads in ["1", "3", "4"] {
            let csv = run_cli(&[
                "bench",
                "--config",
                cfg,
                "--seed",
                "2024",
                "--dist",
                dist,
                "--threads",
                threads,
            ])?;
            outputs.push(strip_timing(&csv));
        }
        let out_file = dir.path().join("report.csv");
        run_cli(&[
            "bench",
            "--config",
            cfg,
            "--seed",
            "2024",
            "--dist",
            dist,
            "--threads",
            "2",
            "--out",
            out_file.to_str().unwrap(),
        ])?;
        outputs.push(strip_timing(
            &std::fs::read_to_string(&out_file).map_err(|e| e.to_string())?,
        ));
        if outputs.iter().any(|o| o != &outputs[0]) {
            return Err(format!("{dist}: CSV differs across thread counts"));
        }
        if outputs[0].lines().filter(|l| !l.starts_with('#')).count() != 65 {
            return Err(format!("{dist}: unexpected row count"));
        }
    }
    Ok("3 distributions x threads {1, 2, 3, 4}: identical CSV".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 9] = [
        ("leverage axioms", criterion_1),
        ("unbiased sketched norm", criterion_2),
        ("matmul variance bound", criterion_3),
        ("deterministic implication", criterion_4),
        ("SC2 sample-count rate", criterion_5),
        ("end-to-end success rate", criterion_6),
        ("sample-size arithmetic", criterion_7),
        ("dense oracle equivalence", criterion_8),
        ("CLI reproducibility", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = check();
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Ok(msg) => println!("[PASS] criterion {}: {name}: {msg} [{secs:.1}s]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("[FAIL] criterion {}: {name}: {msg} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
