//! Experiment configuration and its flat `key = value` file format.
//!
//! ```text
//! # problem
//! kind = spiked-coherent      # gaussian-incoherent | spiked-coherent | consistent | custom-file
//! rows = 2000
//! cols = 5
//! rhs_cols = 2
//! noise = 1.0
//! coherence = 0.99            # spiked-coherent only
//! problem_seed = 7
//! a_path = A.mtx              # custom-file only
//! b_path = B.mtx
//! # sampling
//! dist = leverage             # leverage | uniform | blended:ALPHA
//! samples = auto              # auto | INT | xR:INT
//! cap = 100000                # optional ceiling on the sample count
//! epsilon = 0.1
//! delta = 0.2
//! trials = 200
//! seed = 42
//! ```

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rowsketch::AccuracyTarget;

use crate::error::{BenchError, Result};
use crate::problem::{ProblemKind, ProblemSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistributionChoice {
    Leverage,
    Uniform,
    /// `(1 − α)·leverage + α·uniform`.
    Blended(f64),
}

impl fmt::Display for DistributionChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Leverage => f.write_str("leverage"),
            Self::Uniform => f.write_str("uniform"),
            Self::Blended(alpha) => write!(f, "blended:{alpha}"),
        }
    }
}

impl FromStr for DistributionChoice {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "leverage" => Ok(Self::Leverage),
            "uniform" => Ok(Self::Uniform),
            _ => {
                let alpha = s
                    .strip_prefix("blended:")
                    .and_then(|a| a.parse::<f64>().ok())
                    .ok_or_else(|| BenchError::Config(format!("unknown distribution {s:?}")))?;
                if !(0.0..=1.0).contains(&alpha) {
                    return Err(BenchError::Config(format!(
                        "blend weight {alpha} outside [0, 1]"
                    )));
                }
                Ok(Self::Blended(alpha))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleRule {
    /// `⌈(r/β)·max{C·ln(r/δ), 1/(δε)}⌉` with the realized β.
    TheoremFormula,
    Explicit(usize),
    MultipleOfRank(usize),
}

impl fmt::Display for SampleRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::TheoremFormula => f.write_str("auto"),
            Self::Explicit(s) => write!(f, "{s}"),
            Self::MultipleOfRank(c) => write!(f, "xR:{c}"),
        }
    }
}

impl FromStr for SampleRule {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || BenchError::Config(format!("invalid sample rule {s:?}"));
        let rule = if s == "auto" {
            Self::TheoremFormula
        } else if let Some(c) = s.strip_prefix("xR:") {
            Self::MultipleOfRank(c.parse().map_err(|_| bad())?)
        } else {
            Self::Explicit(s.parse().map_err(|_| bad())?)
        };
        if matches!(rule, Self::Explicit(0) | Self::MultipleOfRank(0)) {
            return Err(bad());
        }
        Ok(rule)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialConfig {
    pub problem: ProblemSpec,
    pub distribution: DistributionChoice,
    pub sample_rule: SampleRule,
    /// Optional upper limit applied after the sample rule.
    pub sample_cap: Option<usize>,
    pub target: AccuracyTarget,
    pub n_trials: usize,
    pub master_seed: u64,
}

impl Default for TrialConfig {
    fn default() -> Self {
        Self {
            problem: ProblemSpec::gaussian(2000, 5, 2, 1.0, 0),
            distribution: DistributionChoice::Leverage,
            sample_rule: SampleRule::TheoremFormula,
            sample_cap: None,
            target: AccuracyTarget::new(0.1, 0.2).expect("valid defaults"),
            n_trials: 100,
            master_seed: 0,
        }
    }
}

impl TrialConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trials == 0 {
            return Err(BenchError::Config("trials must be at least 1".into()));
        }
        if self.sample_cap == Some(0) {
            return Err(BenchError::Config("sample cap must be at least 1".into()));
        }
        self.problem.validate()
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        let mut cfg = Self::default();
        cfg.apply_text(&text, &path.display().to_string())?;
        Ok(cfg)
    }

    /// Applies every `key = value` line of `text` on top of `self`.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<()> {
        let mut epsilon = self.target.epsilon();
        let mut delta = self.target.delta();
        let mut a_path: Option<PathBuf> = None;
        let mut b_path: Option<PathBuf> = None;
        let mut kind: Option<ProblemKind> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| BenchError::Parse {
                path: origin.to_string(),
                line: idx + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| parse_err(format!("expected key = value, got {line:?}")))?;
            let num = |v: &str| -> Result<f64> {
                v.parse::<f64>()
                    .map_err(|_| parse_err(format!("{key}: invalid number {v:?}")))
            };
            let int = |v: &str| -> Result<u64> {
                v.parse::<u64>()
                    .map_err(|_| parse_err(format!("{key}: invalid integer {v:?}")))
            };
            match key {
                "kind" => kind = Some(value.parse()?),
                "rows" => self.problem.n_rows = int(value)? as usize,
                "cols" => self.problem.n_cols = int(value)? as usize,
                "rhs_cols" => self.problem.rhs_cols = int(value)? as usize,
                "noise" => self.problem.noise_scale = num(value)?,
                "coherence" => self.problem.coherence_target = num(value)?,
                "problem_seed" => self.problem.seed = int(value)?,
                "a_path" => a_path = Some(PathBuf::from(value)),
                "b_path" => b_path = Some(PathBuf::from(value)),
                "dist" => self.distribution = value.parse()?,
                "samples" => self.sample_rule = value.parse()?,
                "cap" => self.sample_cap = Some(int(value)? as usize),
                "epsilon" => epsilon = num(value)?,
                "delta" => delta = num(value)?,
                "trials" => self.n_trials = int(value)? as usize,
                "seed" => self.master_seed = int(value)?,
                other => return Err(parse_err(format!("unknown key {other:?}"))),
            }
        }
        if let Some(k) = kind {
            self.problem.kind = k;
        }
        if let ProblemKind::CustomFile {
            a_path: a,
            b_path: b,
        } = &mut self.problem.kind
        {
            if let Some(p) = a_path {
                *a = p;
            }
            if let Some(p) = b_path {
                *b = p;
            }
        }
        self.target =
            AccuracyTarget::new(epsilon, delta).map_err(|e| BenchError::Config(e.to_string()))?;
        Ok(())
    }

    pub fn set_accuracy(&mut self, epsilon: Option<f64>, delta: Option<f64>) -> Result<()> {
        let epsilon = epsilon.unwrap_or(self.target.epsilon());
        let delta = delta.unwrap_or(self.target.delta());
        self.target =
            AccuracyTarget::new(epsilon, delta).map_err(|e| BenchError::Config(e.to_string()))?;
        Ok(())
    }
}
