use anyhow::Result;
use cloneboost::circuit::{build_lb_circuit, report_resources, CircuitDocument, CircuitParams, ResourceReport};
use serde::Serialize;

use super::{load_formula, times, FormulaInfo};
use crate::config::Settings;
use crate::{Report, ResourcesArgs, Status};

#[derive(Serialize)]
struct ResourcesReport {
    command: &'static str,
    formula: FormulaInfo,
    params: CircuitParams,
    resources: ResourceReport,
    warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    circuit: Option<CircuitDocument>,
}

pub fn run(args: &ResourcesArgs, settings: &Settings) -> Result<Report> {
    let (info, formula) = load_formula(&args.formula, settings)?;
    let level = settings.pick(args.level, "level")?.unwrap_or(info.n + 6);
    let fan_in = settings.pick(args.fan_in, "fan_in")?.unwrap_or(2);
    let with_circuit = args.circuit || settings.get("circuit")?.unwrap_or(false);
    let (t_q, t_k, t_c) = times(&args.times, settings)?;

    let circuit = build_lb_circuit(&formula, level, fan_in)?;
    let resources = report_resources(&circuit, t_q, t_k, t_c);
    let report = ResourcesReport {
        command: "resources",
        formula: info,
        params: circuit.params(),
        warnings: circuit.warnings().to_vec(),
        circuit: with_circuit.then(|| CircuitDocument::new(&circuit, resources.clone())),
        resources,
    };
    Report::json(&report, Status::Success)
}
