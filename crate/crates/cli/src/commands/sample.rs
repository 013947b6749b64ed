use anyhow::{Context, Result};
use cloneboost::sampler::{
    cost_report, predicted_trace, sample_dn, CostEstimate, EmpiricalResult, SamplerConfig,
    SamplingMode, DEFAULT_WORK_BUDGET,
};
use cloneboost::ExtProb;
use serde::Serialize;

use super::{load_formula, noise, FormulaInfo};
use crate::config::Settings;
use crate::{Mode, Report, SampleArgs, Status, WORK_BUDGET_ENV};

#[derive(Serialize)]
struct SampleReport {
    command: &'static str,
    formula: FormulaInfo,
    config: SamplerConfig,
    result: EmpiricalResult,
    predicted_d_n: ExtProb,
    cost: CostEstimate,
}

/// Flag, then environment, then config file, then the default.
fn work_budget(flag: Option<u128>, settings: &Settings) -> Result<u128> {
    if let Some(b) = flag {
        return Ok(b);
    }
    if let Ok(raw) = std::env::var(WORK_BUDGET_ENV) {
        return raw
            .trim()
            .parse()
            .with_context(|| format!("{WORK_BUDGET_ENV}={raw:?} is not a count"));
    }
    Ok(settings.get("budget")?.unwrap_or(DEFAULT_WORK_BUDGET))
}

pub fn run(args: &SampleArgs, settings: &Settings) -> Result<Report> {
    let (info, formula) = load_formula(&args.formula, settings)?;
    let level = settings.pick(args.level, "level")?.unwrap_or(info.n);
    let trials = settings.pick(args.trials, "trials")?.unwrap_or(10_000);
    let seed = settings.pick(args.seed, "seed")?.unwrap_or(0);
    let mode = match settings.pick(args.mode, "mode")?.unwrap_or(Mode::Tree) {
        Mode::Tree => SamplingMode::Tree,
        Mode::Flat => SamplingMode::Flat,
    };
    let allow = args.allow_high_level || settings.get("allow_high_level")?.unwrap_or(false);
    let cfg = SamplerConfig::new(seed, trials, level)
        .with_noise(noise(&args.noise, settings)?)
        .with_mode(mode)
        .with_budget(work_budget(args.budget, settings)?)
        .allow_high_level(allow);

    let result = sample_dn(&formula, &cfg)?;
    let predicted_d_n = predicted_trace(&formula, level, &cfg.noise)?.last();
    let report = SampleReport {
        command: "sample",
        cost: cost_report(info.n, level, info.literals as u64),
        formula: info,
        config: cfg,
        result,
        predicted_d_n,
    };
    Report::json(&report, Status::Success)
}
