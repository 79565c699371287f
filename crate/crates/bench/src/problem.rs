//! Synthetic least squares instances.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand_distr::{Distribution, StandardNormal};
use rowsketch::{leverage_scores, orthonormal_basis, DenseMatrix, Error, RngStream};

use crate::error::{BenchError, Result};
use crate::mtx::read_matrix;

/// Stream reserved for problem generation; trials use streams `0..n_trials`.
pub const PROBLEM_STREAM: u64 = u64::MAX;

const MAX_ATTEMPTS: usize = 8;

/// Closest a planted row's leverage is pushed towards 1.
const MAX_PLANTED_LEVERAGE: f64 = 1.0 - 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemKind {
    /// i.i.d. standard normal design, coherence near `r/N`.
    GaussianIncoherent,
    /// Gaussian design with row 0 rescaled to carry a prescribed leverage.
    SpikedCoherent,
    /// `B = A X*` exactly.
    Consistent,
    CustomFile {
        a_path: PathBuf,
        b_path: PathBuf,
    },
}

impl ProblemKind {
    pub fn label(&self) -> &'static str {
        match self {
            Self::GaussianIncoherent => "gaussian-incoherent",
            Self::SpikedCoherent => "spiked-coherent",
            Self::Consistent => "consistent",
            Self::CustomFile { .. } => "custom-file",
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Parses the synthetic kinds; `custom-file` needs paths and is built directly.
impl FromStr for ProblemKind {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian-incoherent" => Ok(Self::GaussianIncoherent),
            "spiked-coherent" => Ok(Self::SpikedCoherent),
            "consistent" => Ok(Self::Consistent),
            "custom-file" => Ok(Self::CustomFile {
                a_path: PathBuf::new(),
                b_path: PathBuf::new(),
            }),
            other => Err(BenchError::Config(format!(
                "unknown problem kind {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub n_rows: usize,
    pub n_cols: usize,
    pub rhs_cols: usize,
    pub noise_scale: f64,
    pub coherence_target: f64,
    pub seed: u64,
}

impl ProblemSpec {
    pub fn gaussian(
        n_rows: usize,
        n_cols: usize,
        rhs_cols: usize,
        noise_scale: f64,
        seed: u64,
    ) -> Self {
        Self {
            kind: ProblemKind::GaussianIncoherent,
            n_rows,
            n_cols,
            rhs_cols,
            noise_scale,
            coherence_target: 0.0,
            seed,
        }
    }

    pub fn with_kind(mut self, kind: ProblemKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn with_coherence(mut self, target: f64) -> Self {
        self.coherence_target = target;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if let ProblemKind::CustomFile { a_path, b_path } = &self.kind {
            if a_path.as_os_str().is_empty() || b_path.as_os_str().is_empty() {
                return Err(BenchError::Config(
                    "custom-file problems need a_path and b_path".into(),
                ));
            }
            return Ok(());
        }
        if self.n_cols == 0 || self.n_rows <= self.n_cols || self.rhs_cols == 0 {
            return Err(BenchError::Config(format!(
                "need rows > cols >= 1 and rhs_cols >= 1, got {}x{} with {} right-hand sides",
                self.n_rows, self.n_cols, self.rhs_cols
            )));
        }
        if !(self.noise_scale >= 0.0 && self.noise_scale.is_finite()) {
            return Err(BenchError::Config(format!(
                "noise scale {} must be finite and nonnegative",
                self.noise_scale
            )));
        }
        if self.kind == ProblemKind::SpikedCoherent {
            let floor = self.n_cols as f64 / self.n_rows as f64;
            if !(self.coherence_target >= floor && self.coherence_target <= 1.0) {
                return Err(BenchError::Config(format!(
                    "coherence target {} outside [{floor}, 1]",
                    self.coherence_target
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemMeta {
    pub kind: &'static str,
    /// Planted coefficients for synthetic kinds.
    pub x_star: Option<DenseMatrix>,
    /// Number of design draws needed to reach full column rank.
    pub attempts: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub a: DenseMatrix,
    pub b: DenseMatrix,
    pub meta: ProblemMeta,
}

fn gaussian(rows: usize, cols: usize, rng: &mut RngStream) -> DenseMatrix {
    let data: Vec<f64> = (0..rows * cols)
        .map(|_| StandardNormal.sample(rng))
        .collect();
    DenseMatrix::new(rows, cols, data).expect("normal samples are finite")
}

/// Rescales row 0 so its leverage becomes `target`. For a row of leverage `ℓ`,
/// scaling by `c` gives leverage `c²ℓ / (1 − ℓ + c²ℓ)`.
fn plant_spike(a: &DenseMatrix, target: f64) -> Result<DenseMatrix> {
    let ell = leverage_scores(a)?.scores()[0];
    let target = (target + (1.0 - target) / 10.0).min(MAX_PLANTED_LEVERAGE);
    let c = (target * (1.0 - ell) / (ell * (1.0 - target))).sqrt();
    Ok(DenseMatrix::from_fn(a.rows(), a.cols(), |i, j| {
        if i == 0 {
            c * a[(i, j)]
        } else {
            a[(i, j)]
        }
    }))
}

pub fn generate_problem(spec: &ProblemSpec) -> Result<Problem> {
    spec.validate()?;
    if let ProblemKind::CustomFile { a_path, b_path } = &spec.kind {
        let a = read_matrix(a_path)?;
        let b = read_matrix(b_path)?;
        if a.rows() != b.rows() {
            return Err(BenchError::Config(format!(
                "A has {} rows but B has {}",
                a.rows(),
                b.rows()
            )));
        }
        return Ok(Problem {
            a,
            b,
            meta: ProblemMeta {
                kind: spec.kind.label(),
                x_star: None,
                attempts: 0,
            },
        });
    }

    let mut rng = RngStream::new(spec.seed, PROBLEM_STREAM);
    let (n, r) = (spec.n_rows, spec.n_cols);
    let mut design = None;
    for attempt in 1..=MAX_ATTEMPTS {
        let mut a = gaussian(n, r, &mut rng);
        if spec.kind == ProblemKind::SpikedCoherent {
            a = match plant_spike(&a, spec.coherence_target) {
                Ok(a) => a,
                Err(BenchError::Core(Error::RankDeficient { .. })) => continue,
                Err(e) => return Err(e),
            };
        }
        match orthonormal_basis(&a) {
            Ok(_) => {
                design = Some((a, attempt));
                break;
            }
            Err(Error::RankDeficient { .. }) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    let (a, attempts) = design.ok_or_else(|| {
        BenchError::GenerationFailed(format!(
            "no full-rank {n}x{r} design after {MAX_ATTEMPTS} draws"
        ))
    })?;

    let x_star = gaussian(r, spec.rhs_cols, &mut rng);
    let mut b = a.matmul(&x_star)?;
    if spec.kind != ProblemKind::Consistent && spec.noise_scale > 0.0 {
        b = b.add(&gaussian(n, spec.rhs_cols, &mut rng).scale(spec.noise_scale))?;
    }
    Ok(Problem {
        a,
        b,
        meta: ProblemMeta {
            kind: spec.kind.label(),
            x_star: Some(x_star),
            attempts,
        },
    })
}
