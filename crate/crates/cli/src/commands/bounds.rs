use anyhow::{bail, Result};
use cloneboost::approx::{boost_approx, theorem3_report, Dominant, NoiseModel};
use cloneboost::cnf::ModelCount;
use cloneboost::exact::{boost_exact, theorem1_bound};
use cloneboost::ExtProb;
use serde::Serialize;

use crate::config::Settings;
use crate::grid::{parse_eps_list, parse_u32_list, EpsSpec};
use crate::{BoundsArgs, Format, Report, Status};

const DEFAULT_N: &str = "7-24";
const DEFAULT_OFFSETS: &str = "0-40";
const DEFAULT_EPS: &str = "0,2^-(n+1),2^-(n+6),2^-(n+62)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
enum CellStatus {
    Holds,
    Violated,
    /// `n < 7` or `eps > 2^-(n+1)`: the bound makes no claim.
    HypothesisViolated,
}

#[derive(Debug, Serialize)]
struct Cell {
    n: u32,
    level: u32,
    offset: u32,
    eps: f64,
    eps_spec: String,
    status: CellStatus,
    /// `d_N` from `d_0 = 1 - 2^-n` with `+eps` clones.
    worst_sat_error: ExtProb,
    /// `1 - d_N` from `d_0 = 1` with `-eps` clones.
    worst_unsat_error: ExtProb,
    sat_term: Option<ExtProb>,
    unsat_term: Option<ExtProb>,
    bound: Option<ExtProb>,
    dominant: Option<Dominant>,
    milestone: Option<ExtProb>,
    milestone_holds: Option<bool>,
    /// For `eps = 0`: the approximate engine reproduces the exact one.
    exact_match: Option<bool>,
}

fn worst_cases(n: u32, level: u32, eps: f64) -> Result<(ExtProb, ExtProb)> {
    let d0 = ExtProb::ONE.saturating_sub(ExtProb::pow2(-i64::from(n)));
    let sat = boost_approx(d0, level, &NoiseModel::FixedPlus { eps })?.last();
    let unsat = boost_approx(ExtProb::ONE, level, &NoiseModel::FixedMinus { eps })?
        .last()
        .complement();
    Ok((sat, unsat))
}

fn evaluate(n: u32, offset: u32, spec: EpsSpec) -> Result<Cell> {
    let level = n + offset;
    let eps = spec.resolve(n);
    let (worst_sat, worst_unsat) = worst_cases(n, level, eps)?;
    let mut cell = Cell {
        n,
        level,
        offset,
        eps,
        eps_spec: spec.to_string(),
        status: CellStatus::HypothesisViolated,
        worst_sat_error: worst_sat,
        worst_unsat_error: worst_unsat,
        sat_term: None,
        unsat_term: None,
        bound: None,
        dominant: None,
        milestone: None,
        milestone_holds: None,
        exact_match: None,
    };

    if eps == 0.0 {
        let d0 = ExtProb::ONE.saturating_sub(ExtProb::pow2(-i64::from(n)));
        let exact = boost_exact(d0, level).last();
        let k1 = ModelCount::new(1, n).expect("n >= 1");
        let term = theorem1_bound(k1, n, level)?;
        let matches = exact == worst_sat && worst_unsat.is_zero();
        cell.exact_match = Some(matches);
        cell.sat_term = Some(term);
        cell.unsat_term = Some(ExtProb::ZERO);
        cell.bound = Some(term);
        cell.dominant = Some(Dominant::Satisfiable);
        cell.status = if matches && exact < term {
            CellStatus::Holds
        } else {
            CellStatus::Violated
        };
        return Ok(cell);
    }

    if n < 7 || eps > 2f64.powi(-(n as i32) - 1) {
        return Ok(cell);
    }
    let r = theorem3_report(n, level, eps)?;
    let milestone_ok = r.milestone.as_ref().is_none_or(|m| m.holds);
    cell.status = if r.holds() && milestone_ok {
        CellStatus::Holds
    } else {
        CellStatus::Violated
    };
    cell.sat_term = Some(r.term_sat);
    cell.unsat_term = Some(r.term_unsat);
    cell.bound = Some(r.bound);
    cell.dominant = Some(r.dominant);
    cell.milestone = r.milestone.as_ref().map(|m| m.bound);
    cell.milestone_holds = r.milestone.map(|m| m.holds);
    Ok(cell)
}

#[derive(Serialize)]
struct Grid {
    n: Vec<u32>,
    offsets: Vec<u32>,
    eps: Vec<String>,
}

#[derive(Serialize, Default)]
struct Summary {
    cells: usize,
    holds: usize,
    violated: usize,
    hypothesis_violated: usize,
}

#[derive(Serialize)]
struct BoundsReport {
    command: &'static str,
    grid: Grid,
    summary: Summary,
    cells: Vec<Cell>,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    n: u32,
    level: u32,
    offset: u32,
    eps: f64,
    eps_spec: &'a str,
    status: CellStatus,
    worst_sat_error: String,
    worst_sat_log2: f64,
    worst_unsat_error: String,
    sat_term: Option<String>,
    unsat_term: Option<String>,
    bound: Option<String>,
    dominant: Option<Dominant>,
    milestone: Option<String>,
    milestone_holds: Option<bool>,
    exact_match: Option<bool>,
}

fn sci(p: ExtProb) -> String {
    p.to_sci_string(12)
}

fn to_csv(cells: &[Cell]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for c in cells {
        w.serialize(CsvRow {
            n: c.n,
            level: c.level,
            offset: c.offset,
            eps: c.eps,
            eps_spec: &c.eps_spec,
            status: c.status,
            worst_sat_error: sci(c.worst_sat_error),
            worst_sat_log2: c.worst_sat_error.log2(),
            worst_unsat_error: sci(c.worst_unsat_error),
            sat_term: c.sat_term.map(sci),
            unsat_term: c.unsat_term.map(sci),
            bound: c.bound.map(sci),
            dominant: c.dominant,
            milestone: c.milestone.map(sci),
            milestone_holds: c.milestone_holds,
            exact_match: c.exact_match,
        })?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn run(args: &BoundsArgs, settings: &Settings) -> Result<Report> {
    let ns = parse_u32_list(&settings.pick(args.n.clone(), "n")?.unwrap_or(DEFAULT_N.into()))?;
    let offsets = parse_u32_list(
        &settings
            .pick(args.offsets.clone(), "offsets")?
            .unwrap_or(DEFAULT_OFFSETS.into()),
    )?;
    let specs = parse_eps_list(&settings.pick(args.eps.clone(), "eps")?.unwrap_or(DEFAULT_EPS.into()))?;
    let format = settings.pick(args.format, "format")?.unwrap_or(Format::Json);
    if ns.contains(&0) {
        bail!("n must be at least 1");
    }
    if ns.iter().chain(&offsets).any(|&v| v > 60) {
        bail!("n and offsets are limited to 60");
    }

    // canonical order: n, then N, then eps as listed
    let mut cells = Vec::with_capacity(ns.len() * offsets.len() * specs.len());
    for &n in &ns {
        for &offset in &offsets {
            for &spec in &specs {
                cells.push(evaluate(n, offset, spec)?);
            }
        }
    }
    let mut summary = Summary {
        cells: cells.len(),
        ..Summary::default()
    };
    for c in &cells {
        match c.status {
            CellStatus::Holds => summary.holds += 1,
            CellStatus::Violated => summary.violated += 1,
            CellStatus::HypothesisViolated => summary.hypothesis_violated += 1,
        }
    }
    let status = if summary.violated > 0 {
        Status::Violation
    } else {
        Status::Success
    };
    match format {
        Format::Csv => Ok(Report {
            body: to_csv(&cells)?,
            status,
        }),
        Format::Json => Report::json(
            &BoundsReport {
                command: "bounds",
                grid: Grid {
                    n: ns,
                    offsets,
                    eps: specs.iter().map(|s| s.to_string()).collect(),
                },
                summary,
                cells,
            },
            status,
        ),
    }
}
