//! Row sampling with replacement.
//!
//! A sketch `S ∈ R^{s×N}` has exactly one nonzero per row: row `t` picks source
//! row `ξ⁽ᵗ⁾ ~ Multi(p)` and scales it by `1/√(s·p_ξ)`. [`SketchPlan`] keeps
//! only the draws and weights; `S` is never materialized except by
//! [`SketchPlan::to_dense`] for small cross-checks.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::leverage::SamplingDistribution;

/// Name recorded in reports for the generator behind [`RngStream`].
pub const RNG_ALGORITHM: &str = "chacha20";

/// Reproducible random stream: ChaCha20 keyed from `seed`, with
/// `stream_index` selecting one of 2^64 independent streams for that key.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_index: u64,
    rng: ChaCha20Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_index: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream_index);
        Self {
            seed,
            stream_index,
            rng,
        }
    }

    pub fn algorithm_id(&self) -> &'static str {
        RNG_ALGORITHM
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// Uniform draw from `[0, 1)` with 53 random bits.
    pub fn next_unit(&mut self) -> f64 {
        self.rng.random::<f64>()
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Inverse-CDF sampler over a fixed distribution, `O(log N)` per draw.
#[derive(Debug, Clone)]
pub struct MultinomialSampler {
    cdf: Vec<f64>,
    last_supported: usize,
}

impl MultinomialSampler {
    pub fn new(p: &SamplingDistribution) -> Self {
        let mut acc = 0.0;
        let cdf = p
            .probs()
            .iter()
            .map(|&pi| {
                acc += pi;
                acc
            })
            .collect();
        let last_supported = p
            .probs()
            .iter()
            .rposition(|&pi| pi > 0.0)
            .expect("a distribution has positive mass somewhere");
        Self {
            cdf,
            last_supported,
        }
    }

    /// First index whose cumulative mass exceeds `u·total`; zero-probability
    /// rows can never satisfy that strict inequality.
    pub fn draw(&self, rng: &mut RngStream) -> usize {
        let total = self.cdf[self.cdf.len() - 1];
        let target = rng.next_unit() * total;
        let k = self.cdf.partition_point(|&c| c <= target);
        k.min(self.last_supported)
    }
}

pub fn multinomial_draws(
    p: &SamplingDistribution,
    s: usize,
    rng: &mut RngStream,
) -> Result<Vec<usize>> {
    if s == 0 {
        return Err(Error::InvalidSampleCount);
    }
    let sampler = MultinomialSampler::new(p);
    Ok((0..s).map(|_| sampler.draw(rng)).collect())
}

/// Realized sampling matrix `S` as draws plus row weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SketchPlan {
    n_source_rows: usize,
    draws: Vec<usize>,
    weights: Vec<f64>,
    drawn_probs: Vec<f64>,
    source_probs_digest: String,
}

impl SketchPlan {
    /// Plan for explicitly chosen draws (0-based source rows).
    pub fn from_draws(p: &SamplingDistribution, draws: Vec<usize>) -> Result<Self> {
        if draws.is_empty() {
            return Err(Error::InvalidSampleCount);
        }
        let n = p.len();
        let s = draws.len() as f64;
        let mut weights = Vec::with_capacity(draws.len());
        let mut drawn_probs = Vec::with_capacity(draws.len());
        for &k in &draws {
            if k >= n {
                return Err(Error::DimensionError(format!(
                    "draw {k} outside {n} source rows"
                )));
            }
            let pk = p.probs()[k];
            if pk == 0.0 {
                return Err(Error::UnsupportedRow { row: k });
            }
            weights.push(1.0 / (s * pk).sqrt());
            drawn_probs.push(pk);
        }
        Ok(Self {
            n_source_rows: n,
            draws,
            weights,
            drawn_probs,
            source_probs_digest: distribution_digest(p),
        })
    }

    pub fn n_source_rows(&self) -> usize {
        self.n_source_rows
    }

    pub fn n_samples(&self) -> usize {
        self.draws.len()
    }

    pub fn draws(&self) -> &[usize] {
        &self.draws
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `p_{ξ⁽ᵗ⁾}` for every draw.
    pub fn drawn_probs(&self) -> &[f64] {
        &self.drawn_probs
    }

    pub fn source_probs_digest(&self) -> &str {
        &self.source_probs_digest
    }

    /// Checks that `p` is the distribution this plan was drawn from and that
    /// it gives positive mass to every nonzero coordinate of `x`.
    pub fn verify_support(&self, p: &SamplingDistribution, x: &[f64]) -> Result<()> {
        if distribution_digest(p) != self.source_probs_digest {
            return Err(Error::InvalidDistribution(
                "plan was drawn from a different distribution".into(),
            ));
        }
        if x.len() != self.n_source_rows {
            return Err(Error::DimensionError(format!(
                "vector of length {} for {} source rows",
                x.len(),
                self.n_source_rows
            )));
        }
        match x
            .iter()
            .zip(p.probs())
            .position(|(&xi, &pi)| xi != 0.0 && pi == 0.0)
        {
            Some(row) => Err(Error::UnsupportedRow { row }),
            None => Ok(()),
        }
    }

    /// Dense `s×N` sampling matrix. Only meant for small oracle checks.
    pub fn to_dense(&self) -> DenseMatrix {
        let s = self.n_samples();
        let mut data = vec![0.0; s * self.n_source_rows];
        for (t, (&k, &w)) in self.draws.iter().zip(&self.weights).enumerate() {
            data[k * s + t] = w;
        }
        DenseMatrix::from_raw(s, self.n_source_rows, data)
    }
}

/// Hex SHA-256 prefix of the little-endian probability bytes.
pub fn distribution_digest(p: &SamplingDistribution) -> String {
    let mut h = Sha256::new();
    for pi in p.probs() {
        h.update(pi.to_le_bytes());
    }
    h.finalize()[..8]
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Draws `s` rows from `p` and records the weights `1/√(s·p_ξ)`.
pub fn build_sketch(p: &SamplingDistribution, s: usize, rng: &mut RngStream) -> Result<SketchPlan> {
    let draws = multinomial_draws(p, s, rng)?;
    SketchPlan::from_draws(p, draws)
}

/// `S·m`, gathering and scaling the drawn rows.
pub fn apply_sketch(plan: &SketchPlan, m: &DenseMatrix) -> Result<DenseMatrix> {
    if m.rows() != plan.n_source_rows {
        return Err(Error::DimensionError(format!(
            "sketch over {} rows applied to {}x{} matrix",
            plan.n_source_rows,
            m.rows(),
            m.cols()
        )));
    }
    let s = plan.n_samples();
    let mut out = Vec::with_capacity(s * m.cols());
    for j in 0..m.cols() {
        let col = m.column(j);
        out.extend(
            plan.draws
                .iter()
                .zip(&plan.weights)
                .map(|(&k, &w)| w * col[k]),
        );
    }
    Ok(DenseMatrix::from_raw(s, m.cols(), out))
}

/// `‖S x‖²₂ = Σₜ wₜ² x[ξ⁽ᵗ⁾]²`.
pub fn sketched_norm_sq(plan: &SketchPlan, x: &[f64]) -> Result<f64> {
    if x.len() != plan.n_source_rows {
        return Err(Error::DimensionError(format!(
            "vector of length {} for {} source rows",
            x.len(),
            plan.n_source_rows
        )));
    }
    Ok(plan
        .draws
        .iter()
        .zip(&plan.weights)
        .map(|(&k, &w)| (w * x[k]).powi(2))
        .sum())
}

/// Sampled estimate of `aᵀb`: `(1/s) Σₜ a(ξ⁽ᵗ⁾,:)ᵀ b(ξ⁽ᵗ⁾,:) / p_ξ`.
pub fn approx_matmul(
    a: &DenseMatrix,
    b: &DenseMatrix,
    p: &SamplingDistribution,
    s: usize,
    rng: &mut RngStream,
) -> Result<DenseMatrix> {
    if a.rows() != b.rows() || a.rows() != p.len() {
        return Err(Error::DimensionError(format!(
            "approximate product needs matching rows: a {}, b {}, p {}",
            a.rows(),
            b.rows(),
            p.len()
        )));
    }
    let plan = build_sketch(p, s, rng)?;
    sketched_product(&plan, a, b)
}

/// `(S a)ᵀ (S b)` for a realized plan, accumulated as
/// `Σₜ a(ξ,:)ᵀ b(ξ,:) / (s·p_ξ)` so no square roots enter.
pub fn sketched_product(
    plan: &SketchPlan,
    a: &DenseMatrix,
    b: &DenseMatrix,
) -> Result<DenseMatrix> {
    if a.rows() != plan.n_source_rows || b.rows() != plan.n_source_rows {
        return Err(Error::DimensionError(format!(
            "sketch over {} rows applied to {}-row and {}-row factors",
            plan.n_source_rows,
            a.rows(),
            b.rows()
        )));
    }
    let (m, n) = (a.cols(), b.cols());
    let s = plan.n_samples() as f64;
    let mut out = vec![0.0; m * n];
    for (&k, &pk) in plan.draws.iter().zip(&plan.drawn_probs) {
        let scale = 1.0 / (s * pk);
        for j in 0..n {
            let bkj = scale * b[(k, j)];
            for i in 0..m {
                out[j * m + i] += a[(k, i)] * bkj;
            }
        }
    }
    Ok(DenseMatrix::from_raw(m, n, out))
}
