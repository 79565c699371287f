use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionError(String),

    #[error("non-finite entry at ({row}, {col})")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("matrix is numerically rank deficient (sigma_min = {sigma_min:e}, sigma_max = {sigma_max:e})")]
    RankDeficient { sigma_min: f64, sigma_max: f64 },

    /// The sketched design matrix `SA` lost column rank for the realized draws.
    #[error(
        "sketched system is rank deficient (sigma_min = {sigma_min:e}, sigma_max = {sigma_max:e})"
    )]
    SketchRankDeficient { sigma_min: f64, sigma_max: f64 },

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    /// Row `row` carries mass (leverage or a nonzero entry) but has zero sampling probability.
    #[error("row {row} has zero sampling probability but nonzero weight")]
    UnsupportedRow { row: usize },

    #[error("sample count must be at least 1")]
    InvalidSampleCount,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
