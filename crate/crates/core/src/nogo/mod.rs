//! Numerical check that a unitary boosting step with a magnitude fixed
//! point at `[1, 0]` cannot lower the failure probability.
//!
//! One step maps the data qubit `D_k = (a, b)` and a hidden register `H`
//! of `h` qubits through a unitary `U`, then applies a classical logic
//! function `L` to the measured `h + 1` bits. Probabilities are squared
//! magnitudes throughout, so `d_k = |a|^2`.
//!
//! Basis index `i` encodes `data_bit * 2^h + hidden_index`: the data bit is
//! the most significant bit, so `D_k ⊗ H = [a H; b H]`.

mod linalg;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use linalg::{haar_unitary, unitarity_defect, CMatrix, CVector};
use linalg::{complete_randomly, complete_with_standard_basis, from_columns, random_unit_vector};

/// Default tolerance for algebraic identities.
pub const IDENTITY_TOL: f64 = 1e-10;
/// Default slack allowed before `d_{k+1} < d_k` counts as a violation.
pub const MONOTONE_TOL: f64 = 1e-12;
/// Tolerance on unit norms of states.
pub const NORM_TOL: f64 = 1e-12;
/// Default cap on hidden qubits (matrices up to 128 x 128).
pub const DEFAULT_H_CAP: u32 = 6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NogoError {
    #[error("hidden register has norm {0:e}, too small to normalize")]
    DegenerateHidden(f64),
    #[error("{what} has norm {norm}, expected 1")]
    NotNormalized { what: &'static str, norm: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("U is not unitary (max |U^†U - I| = {0:e})")]
    NotUnitary(f64),
    #[error("logic function is constantly true; no instance keeps d = 1 fixed")]
    NoFalseInputs,
    #[error("h = {h} exceeds the cap of {cap} hidden qubits")]
    HiddenAboveCap { h: u32, cap: u32 },
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Data qubit `(a0, a1)` with `P(0) = |a0|^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    a0: Complex64,
    a1: Complex64,
}

impl QubitState {
    pub fn new(a0: Complex64, a1: Complex64) -> Result<Self, NogoError> {
        let norm = (a0.norm_sqr() + a1.norm_sqr()).sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(NogoError::NotNormalized { what: "qubit state", norm });
        }
        Ok(QubitState { a0, a1 })
    }

    pub fn zero() -> Self {
        QubitState { a0: c(1.0), a1: c(0.0) }
    }

    pub fn one() -> Self {
        QubitState { a0: c(0.0), a1: c(1.0) }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let v = random_unit_vector(2, rng);
        QubitState { a0: v[0], a1: v[1] }
    }

    pub fn a0(&self) -> Complex64 {
        self.a0
    }

    pub fn a1(&self) -> Complex64 {
        self.a1
    }

    /// `P(value 0) = |a0|^2`.
    pub fn p0(&self) -> f64 {
        self.a0.norm_sqr()
    }
}

/// Unit vector of `2^h` amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenRegister {
    h: u32,
    amps: CVector,
}

impl HiddenRegister {
    pub fn new(amps: CVector) -> Result<Self, NogoError> {
        let h = dim_to_qubits(amps.len())?;
        let norm = amps.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(NogoError::NotNormalized { what: "hidden register", norm });
        }
        Ok(HiddenRegister { h, amps })
    }

    /// Scales `amps` to unit norm.
    pub fn normalized(amps: CVector) -> Result<Self, NogoError> {
        let norm = amps.norm();
        if norm <= 1e-12 || !norm.is_finite() {
            return Err(NogoError::DegenerateHidden(norm));
        }
        Self::new(amps.unscale(norm))
    }

    /// `|0...0>`.
    pub fn basis_zero(h: u32) -> Self {
        let mut amps = CVector::zeros(1 << h);
        amps[0] = c(1.0);
        HiddenRegister { h, amps }
    }

    pub fn random<R: Rng + ?Sized>(h: u32, rng: &mut R) -> Self {
        HiddenRegister {
            h,
            amps: random_unit_vector(1 << h, rng),
        }
    }

    pub fn qubits(&self) -> u32 {
        self.h
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }
}

fn dim_to_qubits(dim: usize) -> Result<u32, NogoError> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(NogoError::DimensionMismatch {
            expected: dim.next_power_of_two().max(1),
            got: dim,
        });
    }
    Ok(dim.trailing_zeros())
}

/// Truth table over the `h + 1` measured bits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogicFunction {
    h: u32,
    table: Vec<bool>,
}

impl LogicFunction {
    pub fn new(h: u32, table: Vec<bool>) -> Result<Self, NogoError> {
        let expected = 2usize << h;
        if table.len() != expected {
            return Err(NogoError::DimensionMismatch {
                expected,
                got: table.len(),
            });
        }
        Ok(LogicFunction { h, table })
    }

    pub fn from_fn(h: u32, f: impl FnMut(usize) -> bool) -> Self {
        LogicFunction {
            h,
            table: (0..2usize << h).map(f).collect(),
        }
    }

    /// Output equals the data bit.
    pub fn data_bit(h: u32) -> Self {
        Self::from_fn(h, |i| i >> h & 1 == 1)
    }

    /// Uniformly random table that is neither constantly true nor false.
    pub fn random_nonconstant<R: Rng + ?Sized>(h: u32, rng: &mut R) -> Self {
        loop {
            let f = Self::from_fn(h, |_| rng.random());
            if !f.true_set().is_empty() && !f.false_set().is_empty() {
                return f;
            }
        }
    }

    pub fn hidden_qubits(&self) -> u32 {
        self.h
    }

    pub fn table(&self) -> &[bool] {
        &self.table
    }

    pub fn eval(&self, index: usize) -> bool {
        self.table[index]
    }

    /// `T_L`, indices where the output is 1.
    pub fn true_set(&self) -> Vec<usize> {
        (0..self.table.len()).filter(|&i| self.table[i]).collect()
    }

    /// `F_L`, indices where the output is 0.
    pub fn false_set(&self) -> Vec<usize> {
        (0..self.table.len()).filter(|&i| !self.table[i]).collect()
    }
}

/// `X = diag(R^t, R^t)` where `R` has orthonormal columns `R_0 = conj(H)`,
/// `R_1, ...`. It maps `[a H; b H]` to `a e_0 + b e_{2^h}`.
pub fn build_basis_matrix(hidden: &HiddenRegister) -> Result<CMatrix, NogoError> {
    let norm = hidden.amps.norm();
    if norm <= 1e-12 || norm.is_nan() {
        return Err(NogoError::DegenerateHidden(norm));
    }
    let dim = hidden.amps.len();
    let r0 = hidden.amps.map(|z| z.conj()).unscale(norm);
    let r = from_columns(&complete_with_standard_basis(vec![r0], dim));
    let rt = r.transpose();
    let mut x = CMatrix::zeros(2 * dim, 2 * dim);
    x.view_mut((0, 0), (dim, dim)).copy_from(&rt);
    x.view_mut((dim, dim), (dim, dim)).copy_from(&rt);
    Ok(x)
}

/// A single unitary boosting step `D_{k+1} = L(U (D_k ⊗ H))`.
#[derive(Debug, Clone)]
pub struct UnitaryBoostInstance {
    hidden: HiddenRegister,
    logic: LogicFunction,
    u: CMatrix,
    x: CMatrix,
    a: CMatrix,
}

impl UnitaryBoostInstance {
    pub fn new(hidden: HiddenRegister, logic: LogicFunction, u: CMatrix) -> Result<Self, NogoError> {
        let dim = 2usize << hidden.h;
        if logic.h != hidden.h {
            return Err(NogoError::DimensionMismatch {
                expected: dim,
                got: logic.table.len(),
            });
        }
        if u.nrows() != dim || u.ncols() != dim {
            return Err(NogoError::DimensionMismatch {
                expected: dim,
                got: u.nrows().max(u.ncols()),
            });
        }
        let defect = unitarity_defect(&u);
        if defect > IDENTITY_TOL {
            return Err(NogoError::NotUnitary(defect));
        }
        let x = build_basis_matrix(&hidden)?;
        let a = &u * x.adjoint();
        Ok(UnitaryBoostInstance {
            hidden,
            logic,
            u,
            x,
            a,
        })
    }

    pub fn identity(hidden: HiddenRegister, logic: LogicFunction) -> Result<Self, NogoError> {
        let dim = 2usize << hidden.h;
        Self::new(hidden, logic, CMatrix::identity(dim, dim))
    }

    pub fn hidden_qubits(&self) -> u32 {
        self.hidden.h
    }

    pub fn dim(&self) -> usize {
        2usize << self.hidden.h
    }

    pub fn hidden(&self) -> &HiddenRegister {
        &self.hidden
    }

    pub fn logic(&self) -> &LogicFunction {
        &self.logic
    }

    pub fn u(&self) -> &CMatrix {
        &self.u
    }

    pub fn x(&self) -> &CMatrix {
        &self.x
    }

    /// `A = U X^{-1} = U X^†`.
    pub fn a(&self) -> &CMatrix {
        &self.a
    }

    fn false_mass(&self, col: usize) -> f64 {
        self.logic
            .false_set()
            .into_iter()
            .map(|i| self.a[(i, col)].norm_sqr())
            .sum()
    }

    /// `sum_{i in F_L} |A_{i,0}|^2`; 1 exactly when `[1, 0]` is a magnitude
    /// fixed point.
    pub fn mfp_mass(&self) -> f64 {
        self.false_mass(0)
    }

    pub fn has_mfp(&self, tol: f64) -> bool {
        (self.mfp_mass() - 1.0).abs() <= tol
    }
}

/// Haar-style random instance whose column 0 of `A` lives on `F_L`, so that
/// `[1, 0]` is a magnitude fixed point.
pub fn make_mfp_instance<R: Rng + ?Sized>(
    h: u32,
    logic: LogicFunction,
    rng: &mut R,
) -> Result<UnitaryBoostInstance, NogoError> {
    let false_set = logic.false_set();
    if false_set.is_empty() {
        return Err(NogoError::NoFalseInputs);
    }
    let dim = 2usize << h;
    let hidden = HiddenRegister::random(h, rng);
    let on_false = random_unit_vector(false_set.len(), rng);
    let mut col0 = CVector::zeros(dim);
    for (k, &i) in false_set.iter().enumerate() {
        col0[i] = on_false[k];
    }
    let a = from_columns(&complete_randomly(vec![col0], dim, rng));
    build_from_a(hidden, logic, a)
}

/// Control instance: `A` is an unconstrained Haar unitary, so column 0
/// generally has mass on `T_L`.
pub fn make_unconstrained_instance<R: Rng + ?Sized>(
    h: u32,
    logic: LogicFunction,
    rng: &mut R,
) -> Result<UnitaryBoostInstance, NogoError> {
    let hidden = HiddenRegister::random(h, rng);
    let a = haar_unitary(2usize << h, rng);
    build_from_a(hidden, logic, a)
}

fn build_from_a(
    hidden: HiddenRegister,
    logic: LogicFunction,
    a: CMatrix,
) -> Result<UnitaryBoostInstance, NogoError> {
    let x = build_basis_matrix(&hidden)?;
    UnitaryBoostInstance::new(hidden, logic, a * x)
}

/// Result of one step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    /// `d_{k+1} = P(L = 0)`.
    pub d_next: f64,
    /// `P(L = 1)`.
    pub p_one: f64,
    pub amplitudes: CVector,
}

/// Direct simulation: `psi = U (D_k ⊗ H)`, then the mass of `psi` on `F_L`.
pub fn apply_step(inst: &UnitaryBoostInstance, state: &QubitState) -> StepOutcome {
    let dim = inst.hidden.amps.len();
    let input = CVector::from_fn(2 * dim, |i, _| {
        let amp = if i < dim { state.a0 } else { state.a1 };
        amp * inst.hidden.amps[i % dim]
    });
    let psi = &inst.u * input;
    let (mut d_next, mut p_one) = (0.0, 0.0);
    for (i, z) in psi.iter().enumerate() {
        if inst.logic.eval(i) {
            p_one += z.norm_sqr();
        } else {
            d_next += z.norm_sqr();
        }
    }
    StepOutcome {
        d_next,
        p_one,
        amplitudes: psi,
    }
}

/// The step rewritten in terms of columns `A_0` and `A_{2^h}`:
/// `U (D_k ⊗ H) = a A_0 + b A_{2^h}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDecomposition {
    /// `sum_{F_L} |A_{i,0}|^2`.
    pub col0_mass: f64,
    /// `sum_{F_L} |A_{i,2^h}|^2`.
    pub mid_mass: f64,
    /// Cross term `conj(a) b sum_{F_L} conj(A_{i,0}) A_{i,2^h}`.
    pub y: Complex64,
    /// `|a|^2 col0_mass + |b|^2 mid_mass + 2 Re(Y)`.
    pub d_next: f64,
    /// `|a|^2 + |b|^2 mid_mass`, valid when `[1, 0]` is a fixed point.
    pub closed_form: f64,
}

pub fn decompose_step(inst: &UnitaryBoostInstance, state: &QubitState) -> StepDecomposition {
    let mid = inst.hidden.amps.len();
    let col0_mass = inst.false_mass(0);
    let mid_mass = inst.false_mass(mid);
    let overlap: Complex64 = inst
        .logic
        .false_set()
        .into_iter()
        .map(|i| inst.a[(i, 0)].conj() * inst.a[(i, mid)])
        .sum();
    let y = state.a0.conj() * state.a1 * overlap;
    let (pa, pb) = (state.a0.norm_sqr(), state.a1.norm_sqr());
    StepDecomposition {
        col0_mass,
        mid_mass,
        y,
        d_next: pa * col0_mass + pb * mid_mass + 2.0 * y.re,
        closed_form: pa + pb * mid_mass,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NogoConfig {
    pub h_values: Vec<u32>,
    pub trials: usize,
    pub control_trials: usize,
    pub seed: u64,
    pub monotone_tol: f64,
    pub identity_tol: f64,
    pub h_cap: u32,
}

impl NogoConfig {
    pub fn new(h_values: Vec<u32>, trials: usize, seed: u64) -> Self {
        NogoConfig {
            h_values,
            trials,
            control_trials: trials,
            seed,
            monotone_tol: MONOTONE_TOL,
            identity_tol: IDENTITY_TOL,
            h_cap: DEFAULT_H_CAP,
        }
    }
}

/// Serializable snapshot of an instance and the step that was evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceDump {
    pub h: u32,
    pub hidden: Vec<[f64; 2]>,
    pub table: Vec<bool>,
    /// Row-major `U` as `[re, im]` pairs.
    pub u: Vec<Vec<[f64; 2]>>,
    pub state: [[f64; 2]; 2],
    pub d_k: f64,
    pub d_next: f64,
}

impl InstanceDump {
    pub fn new(inst: &UnitaryBoostInstance, state: &QubitState, d_next: f64) -> Self {
        let pair = |z: Complex64| [z.re, z.im];
        InstanceDump {
            h: inst.hidden.h,
            hidden: inst.hidden.amps.iter().copied().map(pair).collect(),
            table: inst.logic.table.clone(),
            u: inst
                .u
                .row_iter()
                .map(|row| row.iter().copied().map(pair).collect())
                .collect(),
            state: [pair(state.a0), pair(state.a1)],
            d_k: state.p0(),
            d_next,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HSummary {
    pub h: u32,
    pub trials: usize,
    pub violations: usize,
    pub min_slack: f64,
    pub max_abs_y: f64,
    pub max_mfp_defect: f64,
    pub max_unitarity_defect: f64,
    pub max_closed_form_defect: f64,
    pub control_trials: usize,
    pub control_violations: usize,
    pub control_min_slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NogoReport {
    pub config: NogoConfig,
    pub per_h: Vec<HSummary>,
    pub trials: usize,
    /// Fixed-point instances with `d_{k+1} < d_k - monotone_tol`.
    pub violations: usize,
    /// Fixed-point instances breaking an algebraic identity by more than
    /// `identity_tol` (cross term, mass, unitarity, closed form).
    pub identity_failures: usize,
    pub min_slack: f64,
    pub max_abs_y: f64,
    pub control_trials: usize,
    pub control_group_violations: usize,
    /// First control instance (by `h`, then trial) where `d` decreased.
    pub control_example: Option<InstanceDump>,
}

impl NogoReport {
    /// No violation and no identity failure on fixed-point instances.
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.identity_failures == 0
    }
}

struct TrialOutcome {
    slack: f64,
    abs_y: f64,
    mfp_defect: f64,
    unitarity_defect: f64,
    closed_form_defect: f64,
}

fn trial_rng(seed: u64, h: u32, control: bool, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::from(h) << 48 | u64::from(control) << 47 | trial as u64);
    rng
}

fn run_mfp_trial(h: u32, rng: &mut ChaCha8Rng) -> TrialOutcome {
    let logic = LogicFunction::random_nonconstant(h, rng);
    let inst = make_mfp_instance(h, logic, rng).expect("nonconstant logic has false inputs");
    let state = QubitState::random(rng);
    let step = apply_step(&inst, &state);
    let dec = decompose_step(&inst, &state);
    TrialOutcome {
        slack: step.d_next - state.p0(),
        abs_y: dec.y.norm(),
        mfp_defect: (inst.mfp_mass() - 1.0).abs(),
        unitarity_defect: unitarity_defect(inst.u()),
        closed_form_defect: (step.d_next - dec.closed_form).abs(),
    }
}

fn run_control_trial(h: u32, rng: &mut ChaCha8Rng) -> (f64, InstanceDump) {
    let logic = LogicFunction::random_nonconstant(h, rng);
    let inst = make_unconstrained_instance(h, logic, rng).expect("Haar unitaries are unitary");
    let state = QubitState::random(rng);
    let step = apply_step(&inst, &state);
    (step.d_next - state.p0(), InstanceDump::new(&inst, &state, step.d_next))
}

/// Sweeps random fixed-point instances and an unconstrained control group.
/// Violations are findings in the report; only an `h` above the cap is an
/// error.
pub fn verify_monotone(cfg: &NogoConfig) -> Result<NogoReport, NogoError> {
    if let Some(&h) = cfg.h_values.iter().find(|&&h| h > cfg.h_cap) {
        return Err(NogoError::HiddenAboveCap { h, cap: cfg.h_cap });
    }
    let mut report = NogoReport {
        config: cfg.clone(),
        per_h: Vec::new(),
        trials: 0,
        violations: 0,
        identity_failures: 0,
        min_slack: f64::INFINITY,
        max_abs_y: 0.0,
        control_trials: 0,
        control_group_violations: 0,
        control_example: None,
    };
    for &h in &cfg.h_values {
        let outcomes: Vec<TrialOutcome> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| run_mfp_trial(h, &mut trial_rng(cfg.seed, h, false, t)))
            .collect();
        let controls: Vec<(f64, InstanceDump)> = (0..cfg.control_trials)
            .into_par_iter()
            .map(|t| run_control_trial(h, &mut trial_rng(cfg.seed, h, true, t)))
            .collect();

        let fold = |f: fn(&TrialOutcome) -> f64| outcomes.iter().map(f).fold(0.0, f64::max);
        let violations = outcomes
            .iter()
            .filter(|o| o.slack < -cfg.monotone_tol)
            .count();
        let identity_failures = outcomes
            .iter()
            .filter(|o| {
                o.abs_y > cfg.identity_tol
                    || o.mfp_defect > cfg.identity_tol
                    || o.unitarity_defect > cfg.identity_tol
                    || o.closed_form_defect > cfg.identity_tol
            })
            .count();
        let decreasing: Vec<&(f64, InstanceDump)> = controls
            .iter()
            .filter(|(slack, _)| *slack < -cfg.monotone_tol)
            .collect();
        let summary = HSummary {
            h,
            trials: cfg.trials,
            violations,
            min_slack: outcomes.iter().map(|o| o.slack).fold(f64::INFINITY, f64::min),
            max_abs_y: fold(|o| o.abs_y),
            max_mfp_defect: fold(|o| o.mfp_defect),
            max_unitarity_defect: fold(|o| o.unitarity_defect),
            max_closed_form_defect: fold(|o| o.closed_form_defect),
            control_trials: cfg.control_trials,
            control_violations: decreasing.len(),
            control_min_slack: controls.iter().map(|c| c.0).fold(f64::INFINITY, f64::min),
        };

        report.trials += cfg.trials;
        report.violations += violations;
        report.identity_failures += identity_failures;
        report.min_slack = report.min_slack.min(summary.min_slack);
        report.max_abs_y = report.max_abs_y.max(summary.max_abs_y);
        report.control_trials += cfg.control_trials;
        report.control_group_violations += decreasing.len();
        if report.control_example.is_none() {
            report.control_example = decreasing.first().map(|c| c.1.clone());
        }
        report.per_h.push(summary);
    }
    Ok(report)
}
