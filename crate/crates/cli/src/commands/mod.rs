use std::path::PathBuf;

use anyhow::{anyhow, Context, Result};
use cloneboost::approx::NoiseModel;
use cloneboost::cnf::{parse_dimacs, CnfFormula};
use serde::Serialize;

use crate::config::Settings;
use crate::TimeArgs;

pub mod bounds;
pub mod nogo;
pub mod resources;
pub mod sample;
pub mod solve;

#[derive(Debug, Serialize)]
pub struct FormulaInfo {
    pub path: String,
    pub n: u32,
    pub m: usize,
    pub literals: usize,
}

/// Reads the DIMACS file named by the positional argument or the
/// `formula` config key.
pub fn load_formula(flag: &Option<PathBuf>, settings: &Settings) -> Result<(FormulaInfo, CnfFormula)> {
    let path = match flag {
        Some(p) => p.clone(),
        None => settings
            .raw("formula")
            .map(PathBuf::from)
            .ok_or_else(|| anyhow!("no formula given (positional argument or `formula` key)"))?,
    };
    let bytes = std::fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
    let formula = parse_dimacs(&bytes).with_context(|| format!("parsing {}", path.display()))?;
    let info = FormulaInfo {
        path: path.display().to_string(),
        n: formula.num_vars(),
        m: formula.num_clauses(),
        literals: formula.literal_count(),
    };
    Ok((info, formula))
}

pub fn noise(flag: &Option<String>, settings: &Settings) -> Result<NoiseModel> {
    Ok(match flag {
        Some(s) => s.parse()?,
        None => settings.get("noise")?.unwrap_or(NoiseModel::Exact),
    })
}

/// `(t_q, t_k, t_c)`, each defaulting to 1.
pub fn times(args: &TimeArgs, settings: &Settings) -> Result<(f64, f64, f64)> {
    let one = |flag: Option<f64>, key: &str| -> Result<f64> {
        let t = settings.pick(flag, key)?.unwrap_or(1.0);
        if !(t.is_finite() && t >= 0.0) {
            return Err(anyhow!("{key} must be finite and nonnegative, got {t}"));
        }
        Ok(t)
    };
    Ok((one(args.t_q, "t_q")?, one(args.t_k, "t_k")?, one(args.t_c, "t_c")?))
}
