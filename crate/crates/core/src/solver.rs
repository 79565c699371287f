//! Sketch-and-solve least squares and the sample-size rule that makes the
//! sketched solution `(1+ε)`-accurate with probability at least `1 − δ`.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::dense::{exact_lstsq, DenseMatrix, LstsqSolution};
use crate::error::{Error, Result};
use crate::leverage::SamplingDistribution;
use crate::sketch::{apply_sketch, build_sketch, RngStream, SketchPlan};

/// `C = 144 / (1 − 1/√2)²`.
pub const SAMPLE_CONSTANT: f64 = 144.0 / ((1.0 - FRAC_1_SQRT_2) * (1.0 - FRAC_1_SQRT_2));

/// Squared residuals at or below this fraction of `‖B‖²_F` count as zero.
pub const ZERO_RESIDUAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccuracyTarget {
    epsilon: f64,
    delta: f64,
}

impl AccuracyTarget {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        for (name, v) in [("epsilon", epsilon), ("delta", delta)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} = {v} must lie strictly inside (0, 1)"
                )));
            }
        }
        Ok(Self { epsilon, delta })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

fn check_rank_beta(r: usize, beta: f64) -> Result<()> {
    if r == 0 {
        return Err(Error::InvalidParameter("rank must be at least 1".into()));
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "beta = {beta} must lie in (0, 1]"
        )));
    }
    Ok(())
}

/// Ceiling that ignores float noise within 1e-12 relative of an integer.
fn snapped_ceil(x: f64) -> f64 {
    let nearest = x.round();
    if (x - nearest).abs() <= 1e-12 * x.abs() {
        nearest
    } else {
        x.ceil()
    }
}

fn to_count(x: f64) -> Result<usize> {
    let c = snapped_ceil(x);
    if !c.is_finite() || c > usize::MAX as f64 {
        return Err(Error::InvalidParameter(format!(
            "sample count {x:e} is not representable"
        )));
    }
    Ok(c.max(1.0) as usize)
}

/// `s = ⌈(r/β)·max{C·ln(r/δ), 1/(δε)}⌉`.
pub fn required_samples(r: usize, beta: f64, target: &AccuracyTarget) -> Result<usize> {
    check_rank_beta(r, beta)?;
    let (eps, delta) = (target.epsilon, target.delta);
    let r_f = r as f64;
    let branch = (SAMPLE_CONSTANT * (r_f / delta).ln()).max(1.0 / (delta * eps));
    to_count(r_f / beta * branch)
}

/// Samples after which the sketched basis keeps `σ²_min ≥ 1/√2` with
/// probability `1 − δ`: `C·r·ln(2r/δ)/β` (real valued; the condition is strict).
pub fn sc1_sample_bound(r: usize, beta: f64, delta: f64) -> Result<f64> {
    check_rank_beta(r, beta)?;
    Ok(SAMPLE_CONSTANT * r as f64 * (2.0 * r as f64 / delta).ln() / beta)
}

/// `⌈2r/(βδε)⌉`, the count after which the sampled cross term stays below
/// `ε R²/2` with probability `1 − δ`.
pub fn sc2_required_samples(r: usize, beta: f64, target: &AccuracyTarget) -> Result<usize> {
    check_rank_beta(r, beta)?;
    to_count(2.0 * r as f64 / (beta * target.delta * target.epsilon))
}

/// Minimizer of the sketched objective `‖S A X − S B‖²_F`.
#[derive(Debug, Clone, PartialEq)]
pub struct SketchSolution {
    pub x_tilde: DenseMatrix,
    pub plan: SketchPlan,
    pub sketched_residual_sq: f64,
}

fn check_problem(a: &DenseMatrix, b: &DenseMatrix) -> Result<()> {
    if a.rows() != b.rows() {
        return Err(Error::DimensionError(format!(
            "A has {} rows but B has {}",
            a.rows(),
            b.rows()
        )));
    }
    if a.rows() < a.cols() {
        return Err(Error::DimensionError(format!(
            "design matrix must have rows >= cols, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    Ok(())
}

/// Solves the sketched problem for an already realized plan. Rank loss in
/// `S A` is reported, never retried.
pub fn solve_with_plan(
    a: &DenseMatrix,
    b: &DenseMatrix,
    plan: SketchPlan,
) -> Result<SketchSolution> {
    check_problem(a, b)?;
    if plan.n_samples() < a.cols() {
        return Err(Error::SketchRankDeficient {
            sigma_min: 0.0,
            sigma_max: f64::NAN,
        });
    }
    let sa = apply_sketch(&plan, a)?;
    let sb = apply_sketch(&plan, b)?;
    let sol = exact_lstsq(&sa, &sb).map_err(|e| match e {
        Error::RankDeficient {
            sigma_min,
            sigma_max,
        } => Error::SketchRankDeficient {
            sigma_min,
            sigma_max,
        },
        other => other,
    })?;
    Ok(SketchSolution {
        x_tilde: sol.x_opt,
        plan,
        sketched_residual_sq: sol.residual_sq,
    })
}

/// Draws `s` rows from `p` and solves the reduced least squares problem.
pub fn sketched_lstsq(
    a: &DenseMatrix,
    b: &DenseMatrix,
    p: &SamplingDistribution,
    s: usize,
    rng: &mut RngStream,
) -> Result<SketchSolution> {
    check_problem(a, b)?;
    if p.len() != a.rows() {
        return Err(Error::DimensionError(format!(
            "distribution over {} rows for a {}-row problem",
            p.len(),
            a.rows()
        )));
    }
    let plan = build_sketch(p, s, rng)?;
    solve_with_plan(a, b, plan)
}

/// `‖A X̃ − B‖²_F / R²`. A solution is ε-accurate iff this is at most `1 + ε`.
///
/// When `R²` is numerically zero (consistent system) the ratio is 1 if the
/// candidate also fits exactly and infinite otherwise.
pub fn accuracy_ratio(
    a: &DenseMatrix,
    b: &DenseMatrix,
    x_tilde: &DenseMatrix,
    exact: &LstsqSolution,
) -> Result<f64> {
    let residual = a.matmul(x_tilde)?.sub(b)?.frobenius_norm_sq();
    let floor = ZERO_RESIDUAL_TOL * b.frobenius_norm_sq();
    if exact.residual_sq <= floor {
        return Ok(if residual <= floor {
            1.0
        } else {
            f64::INFINITY
        });
    }
    Ok(residual / exact.residual_sq)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_matches_closed_form() {
        let c = 144.0 / (1.0 - 1.0 / 2f64.sqrt()).powi(2);
        assert!((SAMPLE_CONSTANT - c).abs() < 1e-9);
        assert!((SAMPLE_CONSTANT - 1678.587).abs() < 1e-3);
    }

    #[test]
    fn sample_formula_branches() {
        let tiny = AccuracyTarget::new(1e-6, 0.1).unwrap();
        assert_eq!(required_samples(10, 1.0, &tiny).unwrap(), 100_000_000);
        let t = AccuracyTarget::new(0.01, 0.1).unwrap();
        // 10·C·ln(100) = 77301.79
        assert_eq!(required_samples(10, 1.0, &t).unwrap(), 77_302);
        // beta scales linearly before the ceiling
        assert_eq!(required_samples(10, 0.5, &t).unwrap(), 154_604);
    }

    #[test]
    fn sample_formula_rejects_bad_parameters() {
        let t = AccuracyTarget::new(0.1, 0.1).unwrap();
        assert!(required_samples(0, 1.0, &t).is_err());
        assert!(required_samples(3, 0.0, &t).is_err());
        assert!(required_samples(3, 1.5, &t).is_err());
        assert!(AccuracyTarget::new(0.0, 0.5).is_err());
        assert!(AccuracyTarget::new(0.5, 1.0).is_err());
        assert!(AccuracyTarget::new(f64::NAN, 0.5).is_err());
    }

    #[test]
    fn sc2_count() {
        let t = AccuracyTarget::new(0.5, 0.25).unwrap();
        assert_eq!(sc2_required_samples(8, 1.0, &t).unwrap(), 128);
    }

    #[test]
    fn single_row_system_is_solved_exactly() {
        let a = DenseMatrix::from_rows(&[[2.0]]).unwrap();
        let b = DenseMatrix::from_rows(&[[6.0]]).unwrap();
        let p = SamplingDistribution::uniform(1).unwrap();
        let sol = sketched_lstsq(&a, &b, &p, 4, &mut RngStream::new(0, 0)).unwrap();
        assert!((sol.x_tilde[(0, 0)] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn zero_leverage_row_is_irrelevant() {
        let a = DenseMatrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]).unwrap();
        let b = DenseMatrix::from_rows(&[[1.0], [2.0], [3.0]]).unwrap();
        let p = SamplingDistribution::new(vec![0.5, 0.5, 0.0]).unwrap();
        let exact = exact_lstsq(&a, &b).unwrap();
        for seed in 0..20 {
            match sketched_lstsq(&a, &b, &p, 64, &mut RngStream::new(seed, 0)) {
                Ok(sol) => {
                    assert!((sol.x_tilde[(0, 0)] - 1.0).abs() < 1e-14);
                    assert!((sol.x_tilde[(1, 0)] - 2.0).abs() < 1e-14);
                    let ratio = accuracy_ratio(&a, &b, &sol.x_tilde, &exact).unwrap();
                    assert!((ratio - 1.0).abs() < 1e-12);
                }
                Err(e) => panic!("seed {seed}: {e}"),
            }
        }
    }

    #[test]
    fn rank_loss_is_an_error() {
        let a = DenseMatrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]).unwrap();
        let b = DenseMatrix::from_rows(&[[1.0], [2.0], [3.0]]).unwrap();
        let p = SamplingDistribution::new(vec![0.5, 0.5, 0.0]).unwrap();
        let only_first = SketchPlan::from_draws(&p, vec![0, 0, 0]).unwrap();
        assert!(matches!(
            solve_with_plan(&a, &b, only_first),
            Err(Error::SketchRankDeficient { .. })
        ));
        let too_few = SketchPlan::from_draws(&p, vec![0]).unwrap();
        assert!(matches!(
            solve_with_plan(&a, &b, too_few),
            Err(Error::SketchRankDeficient { .. })
        ));
    }

    #[test]
    fn ratio_examples() {
        let a = DenseMatrix::from_rows(&[[1.0], [1.0]]).unwrap();
        let b = DenseMatrix::from_rows(&[[0.0], [2.0]]).unwrap();
        let exact = exact_lstsq(&a, &b).unwrap();
        assert!((accuracy_ratio(&a, &b, &exact.x_opt, &exact).unwrap() - 1.0).abs() < 1e-15);
        let zero = DenseMatrix::zeros(1, 1);
        assert!((accuracy_ratio(&a, &b, &zero, &exact).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn ratio_on_consistent_system() {
        let a = DenseMatrix::from_rows(&[[1.0], [2.0]]).unwrap();
        let b = DenseMatrix::from_rows(&[[3.0], [6.0]]).unwrap();
        let exact = exact_lstsq(&a, &b).unwrap();
        assert_eq!(accuracy_ratio(&a, &b, &exact.x_opt, &exact).unwrap(), 1.0);
        let off = DenseMatrix::from_rows(&[[2.5]]).unwrap();
        assert!(accuracy_ratio(&a, &b, &off, &exact).unwrap().is_infinite());
    }

    #[test]
    fn dimension_errors() {
        let a = DenseMatrix::identity(3);
        let b = DenseMatrix::zeros(2, 1);
        let p = SamplingDistribution::uniform(3).unwrap();
        let mut rng = RngStream::new(0, 0);
        assert!(matches!(
            sketched_lstsq(&a, &b, &p, 3, &mut rng),
            Err(Error::DimensionError(_))
        ));
        let b = DenseMatrix::zeros(3, 1);
        let p2 = SamplingDistribution::uniform(2).unwrap();
        assert!(matches!(
            sketched_lstsq(&a, &b, &p2, 3, &mut rng),
            Err(Error::DimensionError(_))
        ));
    }
}
