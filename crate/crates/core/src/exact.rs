//! Exact failure-probability propagation for the boosting circuit with a
//! perfect cloning oracle.
//!
//! With `d_v = P(D_v = 0)`, uniform sources give `d_0 = 1 - k_S / 2^n` and
//! each clone-and-OR stage squares it, so `d_N = d_0^(2^N)`.

use serde::{Deserialize, Serialize};

use crate::approx::{boost_approx, NoiseModel};
use crate::circuit::CircuitError;
use crate::cnf::{CnfFormula, ModelCount, ModelCounter};
use crate::error::{BoundError, Result};
use crate::ext_prob::ExtProb;

/// Free parameters of a boosting run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoostParams {
    /// Number of clone-and-OR stages `N`.
    pub level: u32,
    /// Maximum gate fan-in `K`.
    pub fan_in: usize,
    pub noise: NoiseModel,
}

impl BoostParams {
    pub fn exact(level: u32) -> Self {
        BoostParams {
            level,
            fan_in: 2,
            noise: NoiseModel::Exact,
        }
    }

    pub fn with_fan_in(mut self, fan_in: usize) -> Self {
        self.fan_in = fan_in;
        self
    }

    pub fn with_noise(mut self, noise: NoiseModel) -> Self {
        self.noise = noise;
        self
    }
}

/// `d_0 .. d_N` together with the clone errors `eps_0 .. eps_{N-1}` that
/// produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbTrace {
    pub d: Vec<ExtProb>,
    pub eps: Vec<f64>,
}

impl ProbTrace {
    pub fn level(&self) -> u32 {
        (self.d.len() - 1) as u32
    }

    pub fn initial(&self) -> ExtProb {
        self.d[0]
    }

    pub fn last(&self) -> ExtProb {
        *self.d.last().expect("a trace holds d_0")
    }

    pub fn is_non_increasing(&self) -> bool {
        self.d.windows(2).all(|w| w[1] <= w[0])
    }
}

/// `1 - k_s / 2^n`, exact for `n < 128`.
pub fn initial_d0(k_s: ModelCount, n: u32) -> Result<ExtProb, BoundError> {
    let k = k_s.get();
    let total: u128 = 1u128
        .checked_shl(n)
        .filter(|_| n < 128)
        .ok_or(BoundError::ModelCountOutOfRange { k_s: k, n })?;
    if u128::from(k) > total {
        return Err(BoundError::ModelCountOutOfRange { k_s: k, n });
    }
    Ok(ExtProb::from_u128(total - u128::from(k)).scale_pow2(-i64::from(n)))
}

/// `d_v = d_0^(2^v)` for `v = 0 ..= level`, by repeated squaring.
pub fn boost_exact(d0: ExtProb, level: u32) -> ProbTrace {
    let mut d = Vec::with_capacity(level as usize + 1);
    d.push(d0);
    for _ in 0..level {
        let prev = *d.last().expect("nonempty");
        d.push(prev.square());
    }
    ProbTrace {
        d,
        eps: vec![0.0; level as usize],
    }
}

/// `(e^-k_s)^(2^(level - n))`, the bound on `d_N` for satisfiable instances.
pub fn theorem1_bound(k_s: ModelCount, n: u32, level: u32) -> Result<ExtProb, BoundError> {
    if k_s.get() == 0 {
        return Err(BoundError::Unsatisfiable);
    }
    if level < n {
        return Err(BoundError::LevelBelowVars { level, n });
    }
    let ln = -(k_s.get() as f64) * 2f64.powi((level - n) as i32);
    Ok(ExtProb::from_ln(ln))
}

/// `m * ln(1 - k/m)`, the log of `a_m = (1 - k/m)^m`, which increases
/// strictly towards `-k` for `m > k`.
pub fn log_binomial_limit(k: u64, m: u64) -> f64 {
    m as f64 * (-(k as f64) / m as f64).ln_1p()
}

/// Outcome of a boosting run on a concrete formula.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub satisfiable: bool,
    pub n: u32,
    pub m: usize,
    pub k_s: ModelCount,
    pub params: BoostParams,
    pub d0: ExtProb,
    pub d_n: ExtProb,
    /// Present for satisfiable instances with `level >= n` under exact
    /// cloning.
    pub bound: Option<ExtProb>,
    pub trace: ProbTrace,
    pub warnings: Vec<String>,
}

/// Runs the boosting recurrence on `formula` and reports the verdict.
///
/// The verdict is "satisfiable" exactly when `P(D_N = 1) = 1 - d_N > 0`.
/// The model count comes from exhaustive enumeration under `counter`'s cap.
pub fn decide_lb(
    formula: &CnfFormula,
    params: &BoostParams,
    counter: &ModelCounter,
) -> Result<Decision> {
    if params.fan_in < 2 {
        return Err(CircuitError::FanIn(params.fan_in).into());
    }
    let n = formula.num_vars();
    let k_s = counter.count(formula)?;
    let d0 = initial_d0(k_s, n)?;
    let trace = match params.noise {
        NoiseModel::Exact => boost_exact(d0, params.level),
        noise => boost_approx(d0, params.level, &noise)?,
    };
    let d_n = trace.last();
    let mut warnings = Vec::new();
    if params.level < n {
        warnings.push(format!(
            "boosting level {} is below the variable count {n}",
            params.level
        ));
    }
    let bound = match (params.noise, k_s.get()) {
        (NoiseModel::Exact, k) if k > 0 && params.level >= n => {
            Some(theorem1_bound(k_s, n, params.level)?)
        }
        _ => None,
    };
    Ok(Decision {
        satisfiable: d_n < ExtProb::ONE,
        n,
        m: formula.num_clauses(),
        k_s,
        params: *params,
        d0,
        d_n,
        bound,
        trace,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ks(k: u64, n: u32) -> ModelCount {
        ModelCount::new(k, n).unwrap()
    }

    fn p(x: f64) -> ExtProb {
        ExtProb::from_f64(x).unwrap()
    }

    #[test]
    fn initial_values() {
        assert_eq!(initial_d0(ks(10, 4), 4).unwrap(), p(0.375));
        assert_eq!(initial_d0(ks(0, 4), 4).unwrap(), ExtProb::ONE);
        assert_eq!(initial_d0(ks(16, 4), 4).unwrap(), ExtProb::ZERO);
        // exact even where f64 would round
        let d = initial_d0(ks(1, 60), 60).unwrap();
        assert_eq!(d.add(ExtProb::pow2(-60)), ExtProb::ONE);
        assert!(initial_d0(ks(17, 64), 4).is_err());
    }

    #[test]
    fn exact_squaring_examples() {
        let t = boost_exact(p(0.5), 3);
        assert_eq!(t.last(), ExtProb::pow2(-8));
        assert_eq!(t.d.len(), 4);
        assert!(t.eps.iter().all(|&e| e == 0.0));
        assert_eq!(boost_exact(ExtProb::ONE, 40).last(), ExtProb::ONE);
        assert!(t.is_non_increasing());
    }

    #[test]
    fn fifteen_sixteenths_to_the_1024() {
        // 1024 * ln(15/16) = -66.0874...; frozen from a 300-bit evaluation
        let expected = 1.988_781_325_613_928e-29;
        let d = boost_exact(p(15.0 / 16.0), 10).last();
        assert!((d.to_f64() / expected - 1.0).abs() < 1e-14);
    }

    #[test]
    fn exact_bound_examples() {
        let b = theorem1_bound(ks(1, 8), 8, 14).unwrap();
        // e^-64
        assert!((b.to_f64() / 1.603_810_890_548_638e-28 - 1.0).abs() < 1e-13);
        assert!(b < p(1.61e-28));
        let b = theorem1_bound(ks(1, 5), 5, 5).unwrap();
        assert!((b.to_f64() - (-1f64).exp()).abs() < 1e-16);
        let b = theorem1_bound(ks(3, 5), 5, 6).unwrap();
        assert!((b.to_f64() / (-6f64).exp() - 1.0).abs() < 1e-15);
        assert_eq!(
            theorem1_bound(ks(0, 5), 5, 6),
            Err(BoundError::Unsatisfiable)
        );
        assert!(matches!(
            theorem1_bound(ks(1, 5), 5, 4),
            Err(BoundError::LevelBelowVars { .. })
        ));
    }

    #[test]
    fn decide_examples() {
        let counter = ModelCounter::default();
        let contradiction = CnfFormula::from_signed(1, &[&[1], &[-1]]).unwrap();
        let d = decide_lb(&contradiction, &BoostParams::exact(7), &counter).unwrap();
        assert!(!d.satisfiable);
        assert_eq!(d.d_n, ExtProb::ONE);
        assert_eq!(d.bound, None);

        let or2 = CnfFormula::from_signed(2, &[&[1, 2]]).unwrap();
        let d = decide_lb(&or2, &BoostParams::exact(8), &counter).unwrap();
        assert!(d.satisfiable);
        // d_0 = 1/4 squared 8 times is 2^-512
        assert_eq!(d.d_n, ExtProb::pow2(-512));
        assert!(d.d_n < d.bound.unwrap());

        let example = CnfFormula::from_signed(4, &[&[-2, -3], &[1, 2, 4]]).unwrap();
        let d = decide_lb(&example, &BoostParams::exact(10), &counter).unwrap();
        assert!(d.satisfiable);
        assert_eq!(d.k_s.get(), 10);
        assert!(d.warnings.is_empty());
        let low = decide_lb(&example, &BoostParams::exact(2), &counter).unwrap();
        assert_eq!(low.warnings.len(), 1);
        assert_eq!(low.bound, None);
    }

    #[test]
    fn binomial_limit_increases() {
        for k in 1..=3u64 {
            let mut prev = log_binomial_limit(k, k + 1);
            for m in k + 2..5000 {
                let cur = log_binomial_limit(k, m);
                assert!(cur > prev);
                assert!(cur < -(k as f64));
                prev = cur;
            }
        }
    }
}
