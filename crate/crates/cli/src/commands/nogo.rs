use anyhow::{bail, Result};
use cloneboost::nogo::{verify_monotone, NogoConfig, NogoReport};
use serde::Serialize;

use crate::config::Settings;
use crate::grid::parse_u32_list;
use crate::{NogoArgs, Report, Status};

#[derive(Serialize)]
struct Output {
    command: &'static str,
    passed: bool,
    #[serde(flatten)]
    report: NogoReport,
}

pub fn run(args: &NogoArgs, settings: &Settings) -> Result<Report> {
    let h_values = match settings.pick(args.h.clone(), "h")? {
        Some(s) => parse_u32_list(&s)?,
        None => vec![1, 2, 3],
    };
    let trials = settings.pick(args.trials, "trials")?.unwrap_or(1000);
    let seed = settings.pick(args.seed, "seed")?.unwrap_or(0);
    let mut cfg = NogoConfig::new(h_values, trials, seed);
    if let Some(c) = settings.pick(args.control_trials, "control_trials")? {
        cfg.control_trials = c;
    }
    if let Some(cap) = settings.pick(args.h_cap, "h_cap")? {
        cfg.h_cap = cap;
    }
    if let Some(t) = settings.pick(args.monotone_tol, "monotone_tol")? {
        cfg.monotone_tol = t;
    }
    if let Some(t) = settings.pick(args.identity_tol, "identity_tol")? {
        cfg.identity_tol = t;
    }
    if !(cfg.monotone_tol >= 0.0 && cfg.identity_tol >= 0.0) {
        bail!("tolerances must be nonnegative");
    }

    let report = verify_monotone(&cfg)?;
    let passed = report.passed();
    let status = if passed { Status::Success } else { Status::Violation };
    Report::json(
        &Output {
            command: "nogo",
            passed,
            report,
        },
        status,
    )
}
