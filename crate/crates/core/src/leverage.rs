//! Leverage scores, coherence and the row-sampling distributions built from them.

use crate::dense::{orthonormal_basis, DenseMatrix};
use crate::error::{Error, Result};

const SCORE_SLACK: f64 = 1e-12;
const SUM_TOL: f64 = 1e-12;

/// Per-row leverage scores of a full-rank design matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LeverageProfile {
    scores: Vec<f64>,
    coherence: f64,
    rank: usize,
}

impl LeverageProfile {
    /// Validates `scores` against the leverage axioms: each in `[0, 1]`,
    /// summing to `rank` within 1e-8.
    pub fn from_scores(scores: Vec<f64>, rank: usize) -> Result<Self> {
        let n = scores.len();
        if rank == 0 || n < rank {
            return Err(Error::DimensionError(format!(
                "rank {rank} invalid for {n} rows"
            )));
        }
        if let Some(i) = scores
            .iter()
            .position(|&l| !(0.0..=1.0 + SCORE_SLACK).contains(&l))
        {
            return Err(Error::InvalidParameter(format!(
                "leverage score {} of row {i} outside [0, 1]",
                scores[i]
            )));
        }
        let total = compensated_sum(&scores);
        if (total - rank as f64).abs() > 1e-8 {
            return Err(Error::InvalidParameter(format!(
                "leverage scores sum to {total}, expected {rank}"
            )));
        }
        let coherence = scores.iter().copied().fold(0.0, f64::max);
        Ok(Self {
            scores,
            coherence,
            rank,
        })
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    /// Largest leverage score, `μ(A) ∈ [r/N, 1]`.
    pub fn coherence(&self) -> f64 {
        self.coherence
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn n_rows(&self) -> usize {
        self.scores.len()
    }
}

/// Probability vector over the rows of a matrix, optionally annotated with its
/// misestimation factor against some reference leverage profile.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingDistribution {
    probs: Vec<f64>,
    beta: Option<f64>,
}

impl SamplingDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty distribution".into()));
        }
        if let Some(i) = probs.iter().position(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "probability {} at row {i}",
                probs[i]
            )));
        }
        let total = compensated_sum(&probs);
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(Self { probs, beta: None })
    }

    /// Rescales nonnegative `weights` to sum to one.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let total = compensated_sum(weights);
        if total.is_nan() || total <= 0.0 || !total.is_finite() {
            return Err(Error::InvalidDistribution(format!(
                "weights sum to {total}"
            )));
        }
        Self::new(weights.iter().map(|w| w / total).collect())
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDistribution("empty distribution".into()));
        }
        Self::new(vec![1.0 / n as f64; n])
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = Some(beta);
        self
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn beta(&self) -> Option<f64> {
        self.beta
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// Neumaier-compensated summation.
pub(crate) fn compensated_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `ℓᵢ(A) = ‖Q(i,:)‖²` for the thin orthogonal factor `Q` of `a`.
pub fn leverage_scores(a: &DenseMatrix) -> Result<LeverageProfile> {
    let basis = orthonormal_basis(a)?;
    LeverageProfile::from_scores(basis.row_norms_sq(), basis.source_rank)
}

/// `pᵢ = ℓᵢ / r`. Normalized by the computed score total so the result sums to
/// one at machine precision.
pub fn leverage_distribution(profile: &LeverageProfile) -> SamplingDistribution {
    let total = compensated_sum(profile.scores());
    let probs = profile.scores().iter().map(|l| l / total).collect();
    SamplingDistribution::new(probs)
        .expect("validated leverage scores normalize to a distribution")
        .with_beta(1.0)
}

/// Row-norm distribution `pₖ = ‖a(k,:)‖² / ‖a‖²_F`, the reference for
/// approximate matrix products.
pub fn row_norm_distribution(a: &DenseMatrix) -> Result<SamplingDistribution> {
    let weights: Vec<f64> = (0..a.rows()).map(|i| a.row_norm_sq(i)).collect();
    SamplingDistribution::from_weights(&weights)
}

const BETA_SNAP: f64 = 1e-12;

/// Largest `β ≤ 1` with `pᵢ ≥ β ℓᵢ / r` on every row of positive leverage.
pub fn misestimation_beta(
    candidate: &SamplingDistribution,
    profile: &LeverageProfile,
) -> Result<f64> {
    if candidate.len() != profile.n_rows() {
        return Err(Error::DimensionError(format!(
            "distribution over {} rows, profile over {}",
            candidate.len(),
            profile.n_rows()
        )));
    }
    let r = profile.rank() as f64;
    let mut beta = 1.0_f64;
    for (i, (&p, &l)) in candidate.probs().iter().zip(profile.scores()).enumerate() {
        if l > 0.0 {
            if p == 0.0 {
                return Err(Error::UnsupportedRow { row: i });
            }
            beta = beta.min(p * r / l);
        }
    }
    // Exact leverage sampling lands a few ulps under 1.
    if beta >= 1.0 - BETA_SNAP {
        beta = 1.0;
    }
    Ok(beta)
}

/// `(1 − α)·p + α·uniform`. Every entry is at least `α/N`, and the
/// misestimation factor drops by at most a factor `1 − α`.
pub fn blended_distribution(
    base: &SamplingDistribution,
    alpha: f64,
) -> Result<SamplingDistribution> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!(
            "blend weight {alpha} outside [0, 1]"
        )));
    }
    let floor = alpha / base.len() as f64;
    let probs = base
        .probs()
        .iter()
        .map(|p| (1.0 - alpha) * p + floor)
        .collect();
    let mut out = SamplingDistribution::new(probs)?;
    if let Some(beta) = base.beta() {
        out = out.with_beta((1.0 - alpha) * beta);
    }
    Ok(out)
}
