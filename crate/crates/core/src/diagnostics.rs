//! Per-sketch verification of the two structural conditions and of the error
//! bounds they imply.
//!
//! SC1: `σ²_min(S U_A) ≥ 1/√2`. SC2: `‖U_Aᵀ Sᵀ S B⊥‖²_F ≤ ε R²/2`. Whenever both
//! hold, the sketched solution satisfies `‖A X̃ − B‖²_F ≤ (1+ε) R²` and
//! `‖X_opt − X̃‖²_F ≤ ε R² / σ²_min(A)` deterministically.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::dense::{
    singular_extremes, spectral_extremes, DenseMatrix, LstsqSolution, OrthonormalBasis,
    SpectralSummary,
};
use crate::error::{Error, Result};
use crate::sketch::{apply_sketch, SketchPlan};
use crate::solver::{SketchSolution, ZERO_RESIDUAL_TOL};

/// Lower bound on `σ²_min(S U_A)`.
pub const SC1_THRESHOLD: f64 = FRAC_1_SQRT_2;

const CONDITION_SLACK: f64 = 1e-12;
const BOUND_SLACK: f64 = 1e-10;
/// Absolute floor, as a fraction of the relevant squared scale, under which
/// bound comparisons are decided by rounding noise alone.
const NOISE_FLOOR: f64 = 1e-20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructuralReport {
    pub sc1_value: f64,
    pub sc1_holds: bool,
    pub sc2_value: f64,
    pub sc2_holds: bool,
    pub epsilon: f64,
    pub residual_sq: f64,
}

impl StructuralReport {
    pub fn both_hold(&self) -> bool {
        self.sc1_holds && self.sc2_holds
    }
}

/// Which power of `ε` scales the γ-conditioned solution bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GammaBoundForm {
    /// `ε·κ²·(γ⁻²−1)·‖X_opt‖²_F`, what the residual argument actually yields.
    #[default]
    Linear,
    /// `ε²·κ²·(γ⁻²−1)·‖X_opt‖²_F`, a stricter variant.
    Squared,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    /// `‖A X̃ − B‖²_F`.
    pub residual_sq: f64,
    /// `(1+ε) R²`.
    pub residual_bound_limit: f64,
    pub residual_bound_holds: bool,
    /// `‖X_opt − X̃‖²_F`.
    pub solution_bound_value: f64,
    /// `ε R² / σ²_min(A)`.
    pub solution_bound_limit: f64,
    pub solution_bound_holds: bool,
    /// `‖U_A U_Aᵀ B‖_F / ‖B‖_F`.
    pub gamma: f64,
    pub kappa: f64,
    pub gamma_bound_form: GammaBoundForm,
    pub gamma_bound_limit: f64,
    pub gamma_bound_holds: bool,
}

impl BoundReport {
    /// Both bounds that the structural conditions guarantee.
    pub fn guaranteed_bounds_hold(&self) -> bool {
        self.residual_bound_holds && self.solution_bound_holds
    }
}

pub fn check_structural(
    plan: &SketchPlan,
    q: &OrthonormalBasis,
    b_perp: &DenseMatrix,
    epsilon: f64,
    residual_sq: f64,
) -> Result<StructuralReport> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon = {epsilon} must lie strictly inside (0, 1)"
        )));
    }
    if q.q.rows() != b_perp.rows() {
        return Err(Error::DimensionError(format!(
            "basis has {} rows but B⊥ has {}",
            q.q.rows(),
            b_perp.rows()
        )));
    }
    let sq = apply_sketch(plan, &q.q)?;
    let sb = apply_sketch(plan, b_perp)?;
    let sc1_value = if sq.rows() < sq.cols() {
        0.0
    } else {
        singular_extremes(&sq).0.powi(2)
    };
    let sc2_value = sq.tr_matmul(&sb)?.frobenius_norm_sq();
    Ok(StructuralReport {
        sc1_value,
        sc1_holds: sc1_value >= SC1_THRESHOLD - CONDITION_SLACK,
        sc2_value,
        sc2_holds: sc2_value <= epsilon * residual_sq / 2.0 + CONDITION_SLACK * residual_sq,
        epsilon,
        residual_sq,
    })
}

/// Like [`check_structural`], but a problem whose optimal residual is at the
/// rounding level of `‖B‖²_F` has `B⊥ = 0` in exact arithmetic, so SC2 holds
/// whatever the computed `B⊥` is.
pub fn check_structural_in(
    ctx: &BoundContext,
    plan: &SketchPlan,
    q: &OrthonormalBasis,
    b_perp: &DenseMatrix,
    epsilon: f64,
    residual_sq: f64,
) -> Result<StructuralReport> {
    let mut report = check_structural(plan, q, b_perp, epsilon, residual_sq)?;
    if residual_sq <= ZERO_RESIDUAL_TOL * ctx.b_norm_sq {
        report.sc2_holds = true;
    }
    Ok(report)
}

/// Problem-level quantities shared by every sketch of the same `(A, B)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundContext {
    pub spectral: SpectralSummary,
    pub gamma: f64,
    pub b_norm_sq: f64,
    pub x_opt_norm_sq: f64,
}

impl BoundContext {
    pub fn new(a: &DenseMatrix, b: &DenseMatrix, exact: &LstsqSolution) -> Result<Self> {
        let spectral = spectral_extremes(a)?;
        let b_norm_sq = b.frobenius_norm_sq();
        let gamma = if b_norm_sq == 0.0 {
            1.0
        } else {
            (a.matmul(&exact.x_opt)?.frobenius_norm_sq() / b_norm_sq).sqrt()
        };
        Ok(Self {
            spectral,
            gamma,
            b_norm_sq,
            x_opt_norm_sq: exact.x_opt.frobenius_norm_sq(),
        })
    }
}

pub fn check_bounds(
    a: &DenseMatrix,
    b: &DenseMatrix,
    exact: &LstsqSolution,
    sol: &SketchSolution,
    epsilon: f64,
) -> Result<BoundReport> {
    let ctx = BoundContext::new(a, b, exact)?;
    check_bounds_in(&ctx, a, b, exact, sol, epsilon, GammaBoundForm::Linear)
}

/// [`check_bounds`] with precomputed problem quantities and a choice of
/// γ-bound form.
pub fn check_bounds_in(
    ctx: &BoundContext,
    a: &DenseMatrix,
    b: &DenseMatrix,
    exact: &LstsqSolution,
    sol: &SketchSolution,
    epsilon: f64,
    form: GammaBoundForm,
) -> Result<BoundReport> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon = {epsilon} must lie strictly inside (0, 1)"
        )));
    }
    if sol.x_tilde.shape() != exact.x_opt.shape() {
        return Err(Error::DimensionError(format!(
            "sketched solution {:?} vs exact {:?}",
            sol.x_tilde.shape(),
            exact.x_opt.shape()
        )));
    }
    let r2 = exact.residual_sq;
    let residual_sq = a.matmul(&sol.x_tilde)?.sub(b)?.frobenius_norm_sq();
    let residual_bound_limit = (1.0 + epsilon) * r2;
    let residual_bound_holds =
        residual_sq <= residual_bound_limit + BOUND_SLACK * r2 + NOISE_FLOOR * ctx.b_norm_sq;

    let solution_bound_value = exact.x_opt.sub(&sol.x_tilde)?.frobenius_norm_sq();
    let solution_bound_limit = epsilon * r2 / ctx.spectral.sigma_min.powi(2);
    let x_floor = NOISE_FLOOR * ctx.x_opt_norm_sq;
    let solution_bound_holds =
        solution_bound_value <= solution_bound_limit * (1.0 + BOUND_SLACK) + x_floor;

    let eps_factor = match form {
        GammaBoundForm::Linear => epsilon,
        GammaBoundForm::Squared => epsilon * epsilon,
    };
    let gamma_bound_limit = if ctx.gamma == 0.0 {
        f64::INFINITY
    } else {
        let excess = (ctx.gamma.powi(-2) - 1.0).max(0.0);
        eps_factor * ctx.spectral.kappa.powi(2) * excess * ctx.x_opt_norm_sq
    };
    let gamma_bound_holds =
        solution_bound_value <= gamma_bound_limit * (1.0 + BOUND_SLACK) + x_floor;

    Ok(BoundReport {
        residual_sq,
        residual_bound_limit,
        residual_bound_holds,
        solution_bound_value,
        solution_bound_limit,
        solution_bound_holds,
        gamma: ctx.gamma,
        kappa: ctx.spectral.kappa,
        gamma_bound_form: form,
        gamma_bound_limit,
        gamma_bound_holds,
    })
}
