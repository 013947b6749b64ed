//! Sweep-grid syntax: comma-separated items, each a value or an inclusive
//! range `a-b`. Approximation degrees may be absolute (`0`, `1e-3`, `2^-20`)
//! or relative to the variable count (`2^-(n+6)`).

use std::fmt;
use std::str::FromStr;

use anyhow::{anyhow, bail, Result};
use cloneboost::approx::parse_eps;

/// Parses `"7-24"`, `"1,2,5-7"` and similar into a sorted, deduplicated list.
pub fn parse_u32_list(s: &str) -> Result<Vec<u32>> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|i| !i.is_empty()) {
        match item.split_once('-') {
            Some((a, b)) => {
                let (a, b): (u32, u32) = (a.trim().parse()?, b.trim().parse()?);
                if a > b {
                    bail!("empty range {item}");
                }
                out.extend(a..=b);
            }
            None => out.push(item.parse()?),
        }
    }
    if out.is_empty() {
        bail!("empty list {s:?}");
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsSpec {
    Absolute(f64),
    /// `2^-(n + shift)`.
    BelowN(i32),
}

impl EpsSpec {
    pub fn resolve(self, n: u32) -> f64 {
        match self {
            EpsSpec::Absolute(e) => e,
            EpsSpec::BelowN(shift) => 2f64.powi(-(n as i32) - shift),
        }
    }
}

impl FromStr for EpsSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if let Some(inner) = t
            .strip_prefix("2^-(n+")
            .and_then(|r| r.strip_suffix(')'))
        {
            return Ok(EpsSpec::BelowN(inner.trim().parse()?));
        }
        let e = parse_eps(t).ok_or_else(|| anyhow!("bad approximation degree {t:?}"))?;
        if !e.is_finite() || e < 0.0 {
            bail!("approximation degree {t:?} must be finite and nonnegative");
        }
        Ok(EpsSpec::Absolute(e))
    }
}

impl fmt::Display for EpsSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EpsSpec::Absolute(e) if *e == 0.0 => write!(f, "0"),
            EpsSpec::Absolute(e) => write!(f, "{e:e}"),
            EpsSpec::BelowN(shift) => write!(f, "2^-(n+{shift})"),
        }
    }
}

pub fn parse_eps_list(s: &str) -> Result<Vec<EpsSpec>> {
    let specs = s
        .split(',')
        .map(str::trim)
        .filter(|i| !i.is_empty())
        .map(str::parse)
        .collect::<Result<Vec<EpsSpec>>>()?;
    if specs.is_empty() {
        bail!("empty list {s:?}");
    }
    Ok(specs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_and_ranges() {
        assert_eq!(parse_u32_list("7-9").unwrap(), vec![7, 8, 9]);
        assert_eq!(parse_u32_list("3, 1,2-3").unwrap(), vec![1, 2, 3]);
        assert!(parse_u32_list("5-3").is_err());
        assert!(parse_u32_list("").is_err());
        assert!(parse_u32_list("x").is_err());
    }

    #[test]
    fn eps_specs() {
        let specs = parse_eps_list("0, 1e-3, 2^-20, 2^-(n+6)").unwrap();
        assert_eq!(specs[0], EpsSpec::Absolute(0.0));
        assert_eq!(specs[1], EpsSpec::Absolute(1e-3));
        assert_eq!(specs[2].resolve(5), 2f64.powi(-20));
        assert_eq!(specs[3].resolve(10), 2f64.powi(-16));
        assert_eq!(specs[3].to_string(), "2^-(n+6)");
        assert!("-1".parse::<EpsSpec>().is_err());
        assert!("2^-(n+x)".parse::<EpsSpec>().is_err());
    }
}
