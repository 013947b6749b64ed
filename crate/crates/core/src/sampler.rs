//! Monte Carlo simulation of the boosting circuit with classical bits.
//!
//! Each `D_0` draw samples `n` fair bits and evaluates the formula. A perfect
//! clone is realized as an independent fresh draw of the same subcircuit, so
//! one `D_N` draw consumes up to `2^N` `D_0` draws. That exponential cost is
//! exactly what a cloning oracle would remove.
//!
//! Approximate clones are modeled at the distribution level: the engine
//! tracks the exact law `d_v` of each stage (from [`boost_approx`]) and
//! draws the clone as an independent bit with `P(0) = clamp(d_v + eps_v)`.
//!
//! Every trial uses its own ChaCha8 stream `(seed, trial index)`, so results
//! do not depend on thread scheduling.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approx::{boost_approx, NoiseModel};
use crate::cnf::{CnfError, CnfFormula, ModelCounter};
use crate::error::BoundError;
use crate::exact::{boost_exact, initial_d0, ProbTrace};
use crate::ext_prob::ExtProb;

/// Default ceiling on `2^N * trials` `D_0` evaluations.
pub const DEFAULT_WORK_BUDGET: u128 = 1 << 26;
/// Levels above this need an explicit override.
pub const MAX_LEVEL_WITHOUT_OVERRIDE: u32 = 20;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SamplerError {
    #[error("at least one trial is required")]
    NoTrials,
    #[error(
        "{trials} trials at level {level} cost 2^{level} x {trials} = {cost} D_0 evaluations, \
         over the work budget of {budget}"
    )]
    BudgetExceeded {
        level: u32,
        trials: u64,
        cost: u128,
        budget: u128,
    },
    #[error("level {0} exceeds {MAX_LEVEL_WITHOUT_OVERRIDE} and needs an explicit override")]
    LevelNeedsOverride(u32),
    #[error("flat sampling only models exact cloning")]
    FlatNeedsExact,
    #[error("sampling supports at most 64 variables, got {0}")]
    TooManyVars(u32),
    #[error(transparent)]
    Cnf(#[from] CnfError),
    #[error(transparent)]
    Bound(#[from] BoundError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    /// `D_N` as the OR of `2^N` independent `D_0` draws.
    Flat,
    /// The recursive stage structure `D_v = D_{v-1} OR clone(D_{v-1})`.
    Tree,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub seed: u64,
    pub trials: u64,
    pub level: u32,
    pub noise: NoiseModel,
    pub mode: SamplingMode,
    pub work_budget: u128,
    pub allow_high_level: bool,
}

impl SamplerConfig {
    pub fn new(seed: u64, trials: u64, level: u32) -> Self {
        SamplerConfig {
            seed,
            trials,
            level,
            noise: NoiseModel::Exact,
            mode: SamplingMode::Tree,
            work_budget: DEFAULT_WORK_BUDGET,
            allow_high_level: false,
        }
    }

    pub fn with_noise(mut self, noise: NoiseModel) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_mode(mut self, mode: SamplingMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_budget(mut self, budget: u128) -> Self {
        self.work_budget = budget;
        self
    }

    pub fn allow_high_level(mut self, allow: bool) -> Self {
        self.allow_high_level = allow;
        self
    }

    /// Nominal `2^N * trials` cost.
    pub fn cost(&self) -> u128 {
        (1u128 << self.level.min(100)).saturating_mul(u128::from(self.trials))
    }

    pub fn validate(&self) -> Result<(), SamplerError> {
        if self.trials == 0 {
            return Err(SamplerError::NoTrials);
        }
        if self.level > MAX_LEVEL_WITHOUT_OVERRIDE && !self.allow_high_level {
            return Err(SamplerError::LevelNeedsOverride(self.level));
        }
        if self.cost() > self.work_budget {
            return Err(SamplerError::BudgetExceeded {
                level: self.level,
                trials: self.trials,
                cost: self.cost(),
                budget: self.work_budget,
            });
        }
        if self.mode == SamplingMode::Flat && self.noise != NoiseModel::Exact {
            return Err(SamplerError::FlatNeedsExact);
        }
        self.noise.validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalResult {
    pub ones: u64,
    pub trials: u64,
    pub freq: f64,
    /// Half-width of the normal-approximation 95% interval around `freq`.
    pub ci95: f64,
    /// `1 - d_N` from the exact or approximate engine.
    pub predicted: f64,
    /// `(freq - predicted) / sigma` with the binomial sigma at `predicted`.
    pub z_score: f64,
}

impl EmpiricalResult {
    fn new(ones: u64, trials: u64, predicted: f64) -> Self {
        let t = trials as f64;
        let freq = ones as f64 / t;
        let ci95 = 1.96 * (freq * (1.0 - freq) / t).sqrt();
        let sigma = binomial_sigma(predicted, trials);
        let diff = freq - predicted;
        let z_score = if sigma > 0.0 {
            diff / sigma
        } else if diff == 0.0 {
            0.0
        } else {
            diff.signum() * f64::INFINITY
        };
        EmpiricalResult {
            ones,
            trials,
            freq,
            ci95,
            predicted,
            z_score,
        }
    }

    pub fn within_sigmas(&self, k: f64) -> bool {
        self.z_score.abs() <= k
    }
}

pub fn binomial_sigma(p: f64, trials: u64) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// Formula compiled to per-clause bit masks for fast evaluation.
#[derive(Debug, Clone)]
pub struct CompiledFormula {
    n: u32,
    var_mask: u64,
    masks: Vec<(u64, u64)>,
}

impl CompiledFormula {
    pub fn new(f: &CnfFormula) -> Result<Self, SamplerError> {
        let n = f.num_vars();
        let masks = f.clause_masks().ok_or(SamplerError::TooManyVars(n))?;
        let var_mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        Ok(CompiledFormula { n, var_mask, masks })
    }

    pub fn num_vars(&self) -> u32 {
        self.n
    }

    /// Formula value with bit `i` of `bits` as `x_i`.
    #[inline]
    pub fn eval_bits(&self, bits: u64) -> bool {
        self.masks
            .iter()
            .all(|&(pos, neg)| (bits & pos) | (!bits & neg) != 0)
    }

    /// One `D_0` draw: `n` independent fair bits, then the formula.
    #[inline]
    pub fn sample_d0<R: RngCore + ?Sized>(&self, rng: &mut R) -> bool {
        let bits = if self.n == 0 { 0 } else { rng.next_u64() & self.var_mask };
        self.eval_bits(bits)
    }

    fn sample_tree<R: RngCore + ?Sized>(&self, level: u32, rng: &mut R) -> bool {
        if level == 0 {
            return self.sample_d0(rng);
        }
        // OR short-circuits: once one branch is 1 the clone cannot change D_v
        self.sample_tree(level - 1, rng) || self.sample_tree(level - 1, rng)
    }

    fn sample_flat<R: RngCore + ?Sized>(&self, level: u32, rng: &mut R) -> bool {
        (0..1u64 << level).any(|_| self.sample_d0(rng))
    }

    /// Spine of real `D_0` draws with clones drawn from the perturbed law.
    fn sample_noisy<R: Rng + ?Sized>(&self, clone_zero: &[f64], rng: &mut R) -> bool {
        let mut value = self.sample_d0(rng);
        for &p0 in clone_zero {
            if value {
                break;
            }
            value = rng.random::<f64>() >= p0;
        }
        value
    }
}

/// One `D_0` draw for `f`.
pub fn sample_d0<R: RngCore + ?Sized>(f: &CnfFormula, rng: &mut R) -> Result<bool, SamplerError> {
    Ok(CompiledFormula::new(f)?.sample_d0(rng))
}

/// Exact or approximate trace `d_0 .. d_N` for `f` under `noise`.
pub fn predicted_trace(
    f: &CnfFormula,
    level: u32,
    noise: &NoiseModel,
) -> Result<ProbTrace, SamplerError> {
    let k_s = ModelCounter::default().count(f)?;
    let d0 = initial_d0(k_s, f.num_vars())?;
    Ok(match noise {
        NoiseModel::Exact => boost_exact(d0, level),
        other => boost_approx(d0, level, other)?,
    })
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Per-trial `D_N` values in trial order.
pub fn sample_dn_bits(f: &CnfFormula, cfg: &SamplerConfig) -> Result<Vec<bool>, SamplerError> {
    cfg.validate()?;
    let compiled = CompiledFormula::new(f)?;
    let clone_zero: Vec<f64> = match cfg.noise {
        NoiseModel::Exact => Vec::new(),
        noise => {
            let trace = predicted_trace(f, cfg.level, &noise)?;
            trace
                .d
                .iter()
                .zip(&trace.eps)
                .map(|(d, &e)| d.add_signed_clamped(e).to_f64())
                .collect()
        }
    };
    let run = |trial: u64| {
        let mut rng = trial_rng(cfg.seed, trial);
        match (cfg.mode, cfg.noise) {
            (SamplingMode::Flat, _) => compiled.sample_flat(cfg.level, &mut rng),
            (SamplingMode::Tree, NoiseModel::Exact) => compiled.sample_tree(cfg.level, &mut rng),
            (SamplingMode::Tree, _) => compiled.sample_noisy(&clone_zero, &mut rng),
        }
    };
    Ok((0..cfg.trials).into_par_iter().map(run).collect())
}

/// Empirical `P(D_N = 1)` over `cfg.trials` independent runs, compared
/// with the engine's prediction `1 - d_N`.
pub fn sample_dn(f: &CnfFormula, cfg: &SamplerConfig) -> Result<EmpiricalResult, SamplerError> {
    let bits = sample_dn_bits(f, cfg)?;
    let ones = bits.iter().filter(|&&b| b).count() as u64;
    let predicted = predicted_trace(f, cfg.level, &cfg.noise)?.last().complement().to_f64();
    Ok(EmpiricalResult::new(ones, cfg.trials, predicted))
}

/// Classical cost of one `D_N` draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostEstimate {
    pub level: u32,
    /// `2^N`.
    pub d0_evaluations: u128,
    /// Bit draws plus literal evaluations for one `D_0`.
    pub work_per_d0: u64,
    pub total_work: f64,
    /// `floor(log10(total_work))`.
    pub order_of_magnitude: i32,
}

/// `2^N` `D_0` draws, each costing `n` bit draws plus one evaluation per
/// literal occurrence.
pub fn cost_report(n: u32, level: u32, literal_count: u64) -> CostEstimate {
    let d0_evaluations = 1u128 << level.min(127);
    let work_per_d0 = u64::from(n) + literal_count;
    let total_work = d0_evaluations as f64 * work_per_d0.max(1) as f64;
    CostEstimate {
        level,
        d0_evaluations,
        work_per_d0,
        total_work,
        order_of_magnitude: total_work.log10().floor() as i32,
    }
}

/// `P(D_N = 1)` predicted by the exact engine.
pub fn predicted_one_probability(f: &CnfFormula, level: u32) -> Result<ExtProb, SamplerError> {
    Ok(predicted_trace(f, level, &NoiseModel::Exact)?.last().complement())
}
