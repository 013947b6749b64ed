//! CNF formulas over `n` Boolean variables.
//!
//! Variables are 0-based internally (`x_0 .. x_{n-1}`); DIMACS text uses the
//! usual 1-based signed integers.

mod count;
mod dimacs;

pub use count::{count_models, random_kcnf, ModelCount, ModelCounter, DEFAULT_COUNT_CAP};
pub use dimacs::{parse_dimacs, DimacsError};

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CnfError {
    #[error("clause {0} is empty")]
    EmptyClause(usize),
    #[error("variable x{var} out of range for a formula over {n} variables")]
    VarOutOfRange { var: u32, n: u32 },
    #[error("clause {0} contains the literal 0")]
    ZeroLiteral(usize),
    #[error("formula has no clauses")]
    NoClauses,
    #[error("assignment has {got} bits, formula has {expected} variables")]
    AssignmentLength { expected: u32, got: usize },
    #[error("model counting over {n} variables exceeds the enumeration cap of {cap}")]
    CapacityExceeded { n: u32, cap: u32 },
    #[error(transparent)]
    Dimacs(#[from] DimacsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    pub var: u32,
    pub negated: bool,
}

impl Literal {
    pub fn pos(var: u32) -> Self {
        Literal {
            var,
            negated: false,
        }
    }

    pub fn neg(var: u32) -> Self {
        Literal { var, negated: true }
    }

    /// Value of the literal when `x_var = value`.
    #[inline]
    pub fn eval(self, value: bool) -> bool {
        value != self.negated
    }

    pub fn to_dimacs(self) -> i64 {
        let v = i64::from(self.var) + 1;
        if self.negated {
            -v
        } else {
            v
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "~x{}", self.var)
        } else {
            write!(f, "x{}", self.var)
        }
    }
}

/// Nonempty disjunction of literals with repeated literals removed.
///
/// A clause may contain both `x` and `~x`; it is then tautological and is
/// kept as given.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Clause(Vec<Literal>);

impl Clause {
    /// Returns `None` for an empty literal list.
    pub fn new(literals: impl IntoIterator<Item = Literal>) -> Option<Self> {
        let mut out: Vec<Literal> = Vec::new();
        for lit in literals {
            if !out.contains(&lit) {
                out.push(lit);
            }
        }
        if out.is_empty() {
            None
        } else {
            Some(Clause(out))
        }
    }

    pub fn literals(&self) -> &[Literal] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_var(&self) -> u32 {
        self.0.iter().map(|l| l.var).max().unwrap_or(0)
    }
}

/// Conjunction of `m >= 1` clauses over variables `x_0 .. x_{n-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CnfFormula {
    num_vars: u32,
    clauses: Vec<Clause>,
}

impl CnfFormula {
    pub fn new(num_vars: u32, clauses: Vec<Clause>) -> Result<Self, CnfError> {
        if clauses.is_empty() {
            return Err(CnfError::NoClauses);
        }
        for (j, clause) in clauses.iter().enumerate() {
            if clause.is_empty() {
                return Err(CnfError::EmptyClause(j));
            }
            for lit in clause.literals() {
                if lit.var >= num_vars {
                    return Err(CnfError::VarOutOfRange {
                        var: lit.var,
                        n: num_vars,
                    });
                }
            }
        }
        Ok(CnfFormula { num_vars, clauses })
    }

    /// Builds a formula from clauses written as DIMACS-style signed 1-based
    /// integers.
    pub fn from_signed(num_vars: u32, clauses: &[&[i64]]) -> Result<Self, CnfError> {
        let mut out = Vec::with_capacity(clauses.len());
        for (j, lits) in clauses.iter().enumerate() {
            let mut clause = Vec::with_capacity(lits.len());
            for &x in lits.iter() {
                let var = x.unsigned_abs().checked_sub(1).ok_or(CnfError::ZeroLiteral(j))?;
                let var = u32::try_from(var).map_err(|_| CnfError::VarOutOfRange {
                    var: u32::MAX,
                    n: num_vars,
                })?;
                clause.push(Literal {
                    var,
                    negated: x < 0,
                });
            }
            out.push(Clause::new(clause).ok_or(CnfError::EmptyClause(j))?);
        }
        Self::new(num_vars, out)
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// Total number of literal occurrences.
    pub fn literal_count(&self) -> usize {
        self.clauses.iter().map(Clause::len).sum()
    }

    pub fn evaluate(&self, assignment: &Assignment) -> Result<bool, CnfError> {
        if assignment.len() != self.num_vars as usize {
            return Err(CnfError::AssignmentLength {
                expected: self.num_vars,
                got: assignment.len(),
            });
        }
        Ok(self.clauses.iter().all(|c| {
            c.literals()
                .iter()
                .any(|l| l.eval(assignment.get(l.var as usize)))
        }))
    }

    /// Formula with clause `j` removed, or `None` if it is the only clause.
    pub fn without_clause(&self, j: usize) -> Option<CnfFormula> {
        if self.clauses.len() <= 1 || j >= self.clauses.len() {
            return None;
        }
        let mut clauses = self.clauses.clone();
        clauses.remove(j);
        Some(CnfFormula {
            num_vars: self.num_vars,
            clauses,
        })
    }

    /// DIMACS text: `p cnf n m` then one 0-terminated clause per line.
    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for clause in &self.clauses {
            for lit in clause.literals() {
                out.push_str(&lit.to_dimacs().to_string());
                out.push(' ');
            }
            out.push_str("0\n");
        }
        out
    }

    /// Per-clause `(positive, negative)` variable masks; `None` if `n > 64`.
    pub(crate) fn clause_masks(&self) -> Option<Vec<(u64, u64)>> {
        if self.num_vars > 64 {
            return None;
        }
        Some(
            self.clauses
                .iter()
                .map(|c| {
                    c.literals().iter().fold((0u64, 0u64), |(p, n), l| {
                        if l.negated {
                            (p, n | (1 << l.var))
                        } else {
                            (p | (1 << l.var), n)
                        }
                    })
                })
                .collect(),
        )
    }
}

impl fmt::Display for CnfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (j, clause) in self.clauses.iter().enumerate() {
            if j > 0 {
                write!(f, " & ")?;
            }
            write!(f, "(")?;
            for (i, lit) in clause.literals().iter().enumerate() {
                if i > 0 {
                    write!(f, " | ")?;
                }
                write!(f, "{lit}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// Truth assignment; bit `i` is the value of `x_i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    bits: Vec<bool>,
}

impl Assignment {
    pub fn new(bits: Vec<bool>) -> Self {
        Assignment { bits }
    }

    /// Low `n` bits of `mask`, bit `i` giving `x_i`.
    pub fn from_mask(n: u32, mask: u64) -> Self {
        Assignment {
            bits: (0..n).map(|i| i < 64 && (mask >> i) & 1 == 1).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }
}
