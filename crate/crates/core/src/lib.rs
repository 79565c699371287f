//! Leverage-score row sampling for overdetermined least squares
//! `min ‖A X − B‖²_F` with `A` tall and full column rank.
//!
//! The sketch draws `s` rows of `[A B]` with replacement from a distribution
//! `p`, rescales each by `1/√(s·pᵢ)`, and solves the reduced problem. The
//! [`diagnostics`] module checks, sketch by sketch, the two structural
//! conditions under which the reduced solution is provably `(1+ε)`-accurate.

pub mod dense;
pub mod diagnostics;
pub mod error;
pub mod leverage;
pub mod sketch;
pub mod solver;

pub use dense::{
    b_perp, exact_lstsq, orthonormal_basis, spectral_extremes, DenseMatrix, LstsqSolution,
    OrthonormalBasis, SpectralSummary, RANK_TOL,
};
pub use diagnostics::{
    check_bounds, check_bounds_in, check_structural, check_structural_in, BoundContext,
    BoundReport, GammaBoundForm, StructuralReport, SC1_THRESHOLD,
};
pub use error::{Error, Result};
pub use leverage::{
    blended_distribution, leverage_distribution, leverage_scores, misestimation_beta,
    row_norm_distribution, LeverageProfile, SamplingDistribution,
};
pub use sketch::{
    apply_sketch, approx_matmul, build_sketch, multinomial_draws, sketched_norm_sq,
    sketched_product, MultinomialSampler, RngStream, SketchPlan, RNG_ALGORITHM,
};
pub use solver::{
    accuracy_ratio, required_samples, sc1_sample_bound, sc2_required_samples, sketched_lstsq,
    solve_with_plan, AccuracyTarget, SketchSolution, SAMPLE_CONSTANT, ZERO_RESIDUAL_TOL,
};
