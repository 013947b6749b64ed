use anyhow::Result;
use cloneboost::circuit::{build_lb_circuit, report_resources, ResourceReport};
use cloneboost::cnf::{ModelCount, ModelCounter, DEFAULT_COUNT_CAP};
use cloneboost::exact::{decide_lb, BoostParams};
use cloneboost::ExtProb;
use serde::Serialize;

use super::{load_formula, noise, times, FormulaInfo};
use crate::config::Settings;
use crate::{Report, SolveArgs, Status};

#[derive(Serialize)]
struct SolveReport {
    command: &'static str,
    formula: FormulaInfo,
    params: BoostParams,
    model_count: ModelCount,
    verdict: &'static str,
    d0: ExtProb,
    d_n: ExtProb,
    /// `P(D_N = 1)`.
    p_one: ExtProb,
    bound: Option<ExtProb>,
    bound_holds: Option<bool>,
    resources: ResourceReport,
    warnings: Vec<String>,
}

pub fn run(args: &SolveArgs, settings: &Settings) -> Result<Report> {
    let (info, formula) = load_formula(&args.formula, settings)?;
    let level = settings.pick(args.level, "level")?.unwrap_or(info.n + 6);
    let fan_in = settings.pick(args.fan_in, "fan_in")?.unwrap_or(2);
    let cap = settings
        .pick(args.count_cap, "count_cap")?
        .unwrap_or(DEFAULT_COUNT_CAP);
    let params = BoostParams::exact(level)
        .with_fan_in(fan_in)
        .with_noise(noise(&args.noise, settings)?);
    let (t_q, t_k, t_c) = times(&args.times, settings)?;

    let decision = decide_lb(&formula, &params, &ModelCounter::with_cap(cap))?;
    let circuit = build_lb_circuit(&formula, level, fan_in)?;
    let resources = report_resources(&circuit, t_q, t_k, t_c);
    let bound_holds = decision.bound.map(|b| decision.d_n < b);

    let status = match (bound_holds, decision.satisfiable) {
        (Some(false), _) => Status::Violation,
        (_, true) => Status::Success,
        (_, false) => Status::Negative,
    };
    let report = SolveReport {
        command: "solve",
        formula: info,
        params,
        model_count: decision.k_s,
        verdict: if decision.satisfiable {
            "satisfiable"
        } else {
            "unsatisfiable"
        },
        d0: decision.d0,
        d_n: decision.d_n,
        p_one: decision.d_n.complement(),
        bound: decision.bound,
        bound_holds,
        resources,
        warnings: decision.warnings,
    };
    Report::json(&report, status)
}
