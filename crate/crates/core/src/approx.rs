//! Boosting with an approximate cloning oracle.
//!
//! An approximate clone of `D_k` has zero-probability within `eps` of
//! `d_k`, so each stage gives `d_{k+1} = d_k (d_k + eps_k)` with
//! `|eps_k| <= eps`. This module propagates that recurrence under several
//! noise models and evaluates the satisfiable-side bound
//! `2^(-7(k-n)+34)`, the unsatisfiable-side bound `1 - (2^k - 1) eps`, their
//! combination, and the precision of optimal unitary cloners.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::BoundError;
use crate::exact::ProbTrace;
use crate::ext_prob::ExtProb;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    /// Push `d_N` up: every clone errs by `+eps`.
    Maximize,
    /// Push `d_N` down: every clone errs by `-eps`.
    Minimize,
}

/// How the clone error `eps_k` is chosen at each stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseModel {
    Exact,
    FixedPlus { eps: f64 },
    FixedMinus { eps: f64 },
    /// `eps_k` uniform on `[-eps, eps]`, drawn from stream `k` of a ChaCha8
    /// generator seeded with `seed`.
    UniformRandom { eps: f64, seed: u64 },
    /// `d_{k+1}` is increasing in `eps_k`, so the constant extreme choice is
    /// the global worst case; no search is needed.
    Adversarial { eps: f64, target: Target },
}

impl NoiseModel {
    /// The approximation degree `eps`.
    pub fn eps(&self) -> f64 {
        match *self {
            NoiseModel::Exact => 0.0,
            NoiseModel::FixedPlus { eps }
            | NoiseModel::FixedMinus { eps }
            | NoiseModel::UniformRandom { eps, .. }
            | NoiseModel::Adversarial { eps, .. } => eps,
        }
    }

    pub fn validate(&self) -> Result<(), BoundError> {
        let eps = self.eps();
        if eps.is_finite() && eps >= 0.0 {
            Ok(())
        } else {
            Err(BoundError::InvalidEps(eps))
        }
    }

    /// The clone error used at stage `k`.
    pub fn realized(&self, k: u32) -> f64 {
        match *self {
            NoiseModel::Exact => 0.0,
            NoiseModel::FixedPlus { eps }
            | NoiseModel::Adversarial {
                eps,
                target: Target::Maximize,
            } => eps,
            NoiseModel::FixedMinus { eps }
            | NoiseModel::Adversarial {
                eps,
                target: Target::Minimize,
            } => -eps,
            NoiseModel::UniformRandom { eps, seed } => {
                if eps == 0.0 {
                    return 0.0;
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(u64::from(k));
                rng.random_range(-eps..=eps)
            }
        }
    }
}

impl fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            NoiseModel::Exact => write!(f, "exact"),
            NoiseModel::FixedPlus { eps } => write!(f, "plus:{eps:e}"),
            NoiseModel::FixedMinus { eps } => write!(f, "minus:{eps:e}"),
            NoiseModel::UniformRandom { eps, seed } => write!(f, "uniform:{eps:e}:{seed}"),
            NoiseModel::Adversarial {
                eps,
                target: Target::Maximize,
            } => write!(f, "worst-max:{eps:e}"),
            NoiseModel::Adversarial {
                eps,
                target: Target::Minimize,
            } => write!(f, "worst-min:{eps:e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unrecognized noise model {0:?}; expected exact, plus:EPS, minus:EPS, uniform:EPS:SEED, worst-max:EPS or worst-min:EPS")]
pub struct ParseNoiseError(String);

impl FromStr for NoiseModel {
    type Err = ParseNoiseError;

    /// Parses the forms produced by `Display`. `EPS` may also be written
    /// `2^-K`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseNoiseError(s.to_string());
        let parts: Vec<&str> = s.trim().split(':').collect();
        let eps = |t: &str| parse_eps(t).ok_or_else(err);
        let model = match parts.as_slice() {
            ["exact"] => NoiseModel::Exact,
            ["plus", e] => NoiseModel::FixedPlus { eps: eps(e)? },
            ["minus", e] => NoiseModel::FixedMinus { eps: eps(e)? },
            ["uniform", e, seed] => NoiseModel::UniformRandom {
                eps: eps(e)?,
                seed: seed.parse().map_err(|_| err())?,
            },
            ["worst-max", e] => NoiseModel::Adversarial {
                eps: eps(e)?,
                target: Target::Maximize,
            },
            ["worst-min", e] => NoiseModel::Adversarial {
                eps: eps(e)?,
                target: Target::Minimize,
            },
            _ => return Err(err()),
        };
        model.validate().map_err(|_| err())?;
        Ok(model)
    }
}

/// A decimal number or `2^-K` / `2^K`.
pub fn parse_eps(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Some(exp) = s.strip_prefix("2^") {
        let e: i32 = exp.parse().ok()?;
        return Some(2f64.powi(e));
    }
    s.parse().ok()
}

/// Propagates `d_{k+1} = d_k * clamp(d_k + eps_k, 0, 1)` for `level`
/// stages.
pub fn boost_approx(d0: ExtProb, level: u32, noise: &NoiseModel) -> Result<ProbTrace, BoundError> {
    noise.validate()?;
    if !d0.is_probability() {
        return Err(BoundError::NotAProbability(d0.to_f64()));
    }
    let mut d = Vec::with_capacity(level as usize + 1);
    let mut eps = Vec::with_capacity(level as usize);
    d.push(d0);
    for k in 0..level {
        let e = noise.realized(k);
        let prev = d[k as usize];
        d.push(prev.mul(prev.add_signed_clamped(e)));
        eps.push(e);
    }
    Ok(ProbTrace { d, eps })
}

/// Checks `d_k (d_k - eps) <= d_{k+1} <= d_k (d_k + eps)` at every stage,
/// with both sides clamped the same way as the recurrence. Returns the
/// first failing stage.
pub fn sandwich_violation(trace: &ProbTrace, eps: f64) -> Option<u32> {
    trace.d.windows(2).enumerate().find_map(|(k, w)| {
        let lo = w[0].mul(w[0].add_signed_clamped(-eps));
        let hi = w[0].mul(w[0].add_signed_clamped(eps));
        (w[1] < lo || w[1] > hi).then_some(k as u32)
    })
}

fn check_lemma1_hypothesis(n: u32, eps: f64) -> Result<(), BoundError> {
    if n < 7 {
        return Err(BoundError::TooFewVars(n));
    }
    if !eps.is_finite() || eps < 0.0 {
        return Err(BoundError::InvalidEps(eps));
    }
    if eps > 2f64.powi(-(n as i32) - 1) {
        return Err(BoundError::EpsTooLarge { eps, n });
    }
    Ok(())
}

/// `2^(-7(k-n)+34)`, the bound on `d_k` when `d_0 <= 1 - 2^-n`,
/// `eps <= 2^-(n+1)` and `n >= 7`. Values above 1 (k < n + 5) are vacuous.
pub fn lemma1_bound(k: u32, n: u32) -> Result<ExtProb, BoundError> {
    if n < 7 {
        return Err(BoundError::TooFewVars(n));
    }
    if k < n {
        return Err(BoundError::LevelBelowVars { level: k, n });
    }
    Ok(ExtProb::pow2(34 - 7 * i64::from(k - n)))
}

/// Intermediate bounds on the worst-case trace at `k = n + offset`:
/// `2/3`, `1/2 - 4 eps`, `1/4 - 3 eps`, `1/16 - eps` and `1/256` for
/// offsets 2 through 6.
pub fn lemma1_milestone(offset: u32, eps: f64) -> Option<ExtProb> {
    let (base, eps_mult) = match offset {
        2 => (2.0 / 3.0, 0.0),
        3 => (0.5, 4.0),
        4 => (0.25, 3.0),
        5 => (1.0 / 16.0, 1.0),
        6 => (1.0 / 256.0, 0.0),
        _ => return None,
    };
    let base = ExtProb::from_f64(base).ok()?;
    let shift = ExtProb::from_f64(eps_mult * eps).ok()?;
    Some(base.saturating_sub(shift))
}

/// `1 - (2^k - 1) eps` as a real number; may be negative.
pub fn lemma2_bound(k: u32, eps: f64) -> f64 {
    1.0 - (2f64.powi(k as i32) - 1.0) * eps
}

/// `1 - (2^k - 1) eps` in extended precision, or `None` when it is not
/// positive (the bound is then vacuous).
pub fn lemma2_bound_ext(k: u32, eps: f64) -> Option<ExtProb> {
    let eps = ExtProb::from_f64(eps).ok()?;
    let steps = ExtProb::from_u128((1u128 << k.min(127)) - 1);
    let loss = steps.mul(eps);
    ExtProb::ONE.checked_sub(loss).filter(|v| !v.is_zero())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dominant {
    Satisfiable,
    Unsatisfiable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Milestone {
    pub step: u32,
    pub bound: ExtProb,
    pub holds: bool,
}

/// Both sides of the approximate-cloning error bound at one `(n, N, eps)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlbBoundReport {
    pub n: u32,
    pub level: u32,
    pub eps: f64,
    /// `2^(-7(N-n)+34)`.
    pub term_sat: ExtProb,
    /// `(2^N - 1) eps`.
    pub term_unsat: ExtProb,
    pub bound: ExtProb,
    pub dominant: Dominant,
    /// The bound exceeds 1 and says nothing.
    pub vacuous: bool,
    /// `d_N` from `d_0 = 1 - 2^-n` with every clone erring by `+eps`.
    pub worst_sat_error: ExtProb,
    /// `1 - d_N` from `d_0 = 1` with every clone erring by `-eps`.
    pub worst_unsat_error: ExtProb,
    /// Sharper intermediate constant when `N - n` is between 2 and 6.
    pub milestone: Option<Milestone>,
}

impl AlbBoundReport {
    /// Both worst-case errors lie below their terms.
    pub fn holds(&self) -> bool {
        self.worst_sat_error < self.term_sat && self.worst_unsat_error <= self.term_unsat
    }
}

pub fn theorem3_report(n: u32, level: u32, eps: f64) -> Result<AlbBoundReport, BoundError> {
    check_lemma1_hypothesis(n, eps)?;
    let term_sat = lemma1_bound(level, n)?;
    let steps = ExtProb::from_u128((1u128 << level.min(127)) - 1);
    let term_unsat = steps.mul(ExtProb::from_f64(eps).map_err(|_| BoundError::InvalidEps(eps))?);
    let (bound, dominant) = if term_sat >= term_unsat {
        (term_sat, Dominant::Satisfiable)
    } else {
        (term_unsat, Dominant::Unsatisfiable)
    };

    let d0_sat = ExtProb::ONE.saturating_sub(ExtProb::pow2(-i64::from(n)));
    let worst_sat = boost_approx(d0_sat, level, &NoiseModel::FixedPlus { eps })?.last();
    let worst_unsat = boost_approx(ExtProb::ONE, level, &NoiseModel::FixedMinus { eps })?
        .last()
        .complement();
    let milestone = lemma1_milestone(level - n, eps).map(|b| Milestone {
        step: level,
        bound: b,
        holds: worst_sat < b,
    });

    Ok(AlbBoundReport {
        n,
        level,
        eps,
        term_sat,
        term_unsat,
        bound,
        dominant,
        vacuous: !bound.is_probability(),
        worst_sat_error: worst_sat,
        worst_unsat_error: worst_unsat,
        milestone,
    })
}

/// Fidelity and precision of the optimal unitary `N -> M` cloner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CloningPrecision {
    pub n_in: u64,
    pub m_out: u64,
    /// `(M(N+1) + N) / (M(N+2))`.
    pub fidelity: Ratio<u64>,
    /// `(M - N) / (M(N+2))`, equal to `1 - fidelity`.
    pub precision: Ratio<u64>,
}

impl CloningPrecision {
    pub fn fidelity_f64(&self) -> f64 {
        *self.fidelity.numer() as f64 / *self.fidelity.denom() as f64
    }

    pub fn precision_f64(&self) -> f64 {
        *self.precision.numer() as f64 / *self.precision.denom() as f64
    }
}

pub fn gisin_massar(n_in: u64, m_out: u64) -> Result<CloningPrecision, BoundError> {
    if n_in == 0 || m_out <= n_in {
        return Err(BoundError::CloningShape { n_in, m_out });
    }
    let den = m_out * (n_in + 2);
    Ok(CloningPrecision {
        n_in,
        m_out,
        fidelity: Ratio::new(m_out * (n_in + 1) + n_in, den),
        precision: Ratio::new(m_out - n_in, den),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::boost_exact;

    fn p(x: f64) -> ExtProb {
        ExtProb::from_f64(x).unwrap()
    }

    #[test]
    fn first_step_from_one_loses_exactly_eps() {
        for eps in [1e-3, 1e-6, 2f64.powi(-20)] {
            let t = boost_approx(ExtProb::ONE, 1, &NoiseModel::FixedMinus { eps }).unwrap();
            assert_eq!(t.d[1], ExtProb::ONE.checked_sub(p(eps)).unwrap());
            assert_eq!(t.eps, vec![-eps]);
        }
    }

    #[test]
    fn exact_noise_reduces_to_squaring() {
        let t = boost_approx(p(0.5), 2, &NoiseModel::Exact).unwrap();
        assert_eq!(t.last(), ExtProb::pow2(-4));
        let d0 = p(0.8);
        assert_eq!(
            boost_approx(d0, 30, &NoiseModel::FixedPlus { eps: 0.0 }).unwrap(),
            boost_exact(d0, 30)
        );
    }

    #[test]
    fn milestones_hold_at_n7() {
        let n = 7;
        let eps = 2f64.powi(-8);
        let d0 = ExtProb::ONE.saturating_sub(ExtProb::pow2(-7));
        let t = boost_approx(d0, n + 6, &NoiseModel::FixedPlus { eps }).unwrap();
        assert!(t.d[n as usize + 2] < p(2.0 / 3.0));
        assert!(t.d[n as usize + 6] < p(1.0 / 256.0));
        for offset in 2..=6 {
            assert!(t.d[(n + offset) as usize] < lemma1_milestone(offset, eps).unwrap());
        }
    }

    #[test]
    fn sat_bound_examples() {
        assert_eq!(lemma1_bound(9, 9).unwrap(), ExtProb::pow2(34));
        assert!(!lemma1_bound(9, 9).unwrap().is_probability());
        assert_eq!(lemma1_bound(14, 9).unwrap(), ExtProb::pow2(-1));
        assert_eq!(lemma1_bound(21, 9).unwrap(), ExtProb::pow2(-50));
        assert_eq!(lemma1_bound(10, 5), Err(BoundError::TooFewVars(5)));
        assert!(lemma1_bound(8, 9).is_err());
    }

    #[test]
    fn unsat_bound_examples() {
        assert_eq!(lemma2_bound(0, 0.3), 1.0);
        assert_eq!(lemma2_bound(1, 0.25), 0.75);
        assert!((lemma2_bound(2, 0.01) - 0.97).abs() < 1e-15);
        let t = boost_approx(ExtProb::ONE, 2, &NoiseModel::FixedMinus { eps: 0.01 }).unwrap();
        // (0.99)(0.98) = 0.9702
        assert!((t.d[2].to_f64() - 0.9702).abs() < 1e-15);
        assert!(t.d[2] >= lemma2_bound_ext(2, 0.01).unwrap());
        assert_eq!(lemma2_bound_ext(1, 0.25).unwrap(), p(0.75));
        assert_eq!(lemma2_bound_ext(2, 0.5), None);
    }

    #[test]
    fn combined_reports() {
        let n = 10;
        let r = theorem3_report(n, n + 12, 2f64.powi(-(n as i32) - 62)).unwrap();
        assert_eq!(r.term_sat, ExtProb::pow2(-50));
        assert!(r.term_unsat < ExtProb::pow2(-50));
        assert_eq!(r.dominant, Dominant::Satisfiable);
        assert!(r.holds());

        let r = theorem3_report(n, n + 5, 0.0).unwrap();
        assert_eq!(r.bound, r.term_sat);
        assert!(r.term_unsat.is_zero());

        let eps = 2f64.powi(-(n as i32) - 6);
        let r = theorem3_report(n, n + 4, eps).unwrap();
        let m = r.milestone.unwrap();
        assert_eq!(m.bound, p(0.25 - 3.0 * eps));
        assert!(m.holds);
        assert!(r.vacuous);

        assert_eq!(theorem3_report(6, 10, 0.0), Err(BoundError::TooFewVars(6)));
        assert!(matches!(
            theorem3_report(8, 10, 0.01),
            Err(BoundError::EpsTooLarge { .. })
        ));
    }

    #[test]
    fn cloning_precision_examples() {
        let c = gisin_massar(1, 2).unwrap();
        assert_eq!(c.fidelity, Ratio::new(5, 6));
        assert_eq!(c.precision, Ratio::new(1, 6));
        for (n, m) in [(1, 5), (2, 3), (3, 100)] {
            let c = gisin_massar(n, m).unwrap();
            assert_eq!(c.fidelity + c.precision, Ratio::from_integer(1));
        }
        assert!(gisin_massar(2, 2).is_err());
        assert!(gisin_massar(0, 2).is_err());
        let far = gisin_massar(1, 1_000_000).unwrap();
        assert!((far.precision_f64() - 1.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn noise_parsing() {
        assert_eq!("exact".parse::<NoiseModel>().unwrap(), NoiseModel::Exact);
        assert_eq!(
            "plus:2^-9".parse::<NoiseModel>().unwrap(),
            NoiseModel::FixedPlus { eps: 2f64.powi(-9) }
        );
        assert_eq!(
            "uniform:0.01:7".parse::<NoiseModel>().unwrap(),
            NoiseModel::UniformRandom {
                eps: 0.01,
                seed: 7
            }
        );
        assert!("minus:-1".parse::<NoiseModel>().is_err());
        assert!("bogus".parse::<NoiseModel>().is_err());
        let m = NoiseModel::Adversarial {
            eps: 1e-5,
            target: Target::Minimize,
        };
        assert_eq!(m.to_string().parse::<NoiseModel>().unwrap(), m);
    }

    #[test]
    fn uniform_noise_is_reproducible_and_bounded() {
        let m = NoiseModel::UniformRandom { eps: 1e-3, seed: 99 };
        for k in 0..50 {
            let e = m.realized(k);
            assert_eq!(e, m.realized(k));
            assert!(e.abs() <= 1e-3);
        }
        assert_ne!(m.realized(0), m.realized(1));
    }
}
