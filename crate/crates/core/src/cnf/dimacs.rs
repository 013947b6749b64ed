use super::{Clause, CnfError, CnfFormula, Literal};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DimacsError {
    #[error("no `p cnf` header before the first clause")]
    MissingHeader,
    #[error("line {line}: second `p` header")]
    DuplicateHeader { line: usize },
    #[error("line {line}: malformed header {text:?}")]
    BadHeader { line: usize, text: String },
    #[error("line {line}: invalid literal {token:?}")]
    BadToken { line: usize, token: String },
    #[error("line {line}: variable {var} exceeds the declared {n} variables")]
    VarOutOfRange { line: usize, var: u64, n: u32 },
    #[error("line {line}: empty clause")]
    EmptyClause { line: usize },
    #[error("header declares {declared} clauses, found {found}")]
    ClauseCountMismatch { declared: usize, found: usize },
    #[error("final clause is not terminated by 0")]
    Unterminated,
    #[error("header declares zero clauses")]
    NoClauses,
    #[error("input is not valid UTF-8")]
    Utf8,
}

/// Parses DIMACS CNF text.
///
/// Comment lines start with `c`. Exactly one `p cnf <n> <m>` header must
/// precede the clauses, which are whitespace-separated signed 1-based
/// literals terminated by `0` and may span lines.
pub fn parse_dimacs(input: &[u8]) -> Result<CnfFormula, CnfError> {
    let text = std::str::from_utf8(input).map_err(|_| DimacsError::Utf8)?;
    let mut header: Option<(u32, usize)> = None;
    let mut clauses: Vec<Clause> = Vec::new();
    let mut current: Vec<Literal> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(DimacsError::DuplicateHeader { line }.into());
            }
            header = Some(parse_header(trimmed, line)?);
            continue;
        }
        let (n, _) = header.ok_or(DimacsError::MissingHeader)?;
        for token in trimmed.split_whitespace() {
            let bad = || DimacsError::BadToken {
                line,
                token: token.to_string(),
            };
            let value: i64 = token.parse().map_err(|_| bad())?;
            if value == 0 {
                if token.starts_with('-') {
                    return Err(bad().into());
                }
                let clause = Clause::new(current.drain(..))
                    .ok_or(DimacsError::EmptyClause { line })?;
                clauses.push(clause);
                continue;
            }
            let var = value.unsigned_abs();
            if var > u64::from(n) {
                return Err(DimacsError::VarOutOfRange { line, var, n }.into());
            }
            current.push(Literal {
                var: (var - 1) as u32,
                negated: value < 0,
            });
        }
    }

    let (n, m) = header.ok_or(DimacsError::MissingHeader)?;
    if !current.is_empty() {
        return Err(DimacsError::Unterminated.into());
    }
    if clauses.len() != m {
        return Err(DimacsError::ClauseCountMismatch {
            declared: m,
            found: clauses.len(),
        }
        .into());
    }
    CnfFormula::new(n, clauses)
}

fn parse_header(text: &str, line: usize) -> Result<(u32, usize), DimacsError> {
    let bad = || DimacsError::BadHeader {
        line,
        text: text.to_string(),
    };
    let fields: Vec<&str> = text.split_whitespace().collect();
    match fields.as_slice() {
        ["p", "cnf", n, m] => {
            let n: u32 = n.parse().map_err(|_| bad())?;
            let m: usize = m.parse().map_err(|_| bad())?;
            if m == 0 {
                return Err(DimacsError::NoClauses);
            }
            Ok((n, m))
        }
        _ => Err(bad()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<CnfFormula, CnfError> {
        parse_dimacs(s.as_bytes())
    }

    fn dimacs_err(s: &str) -> DimacsError {
        match parse(s) {
            Err(CnfError::Dimacs(e)) => e,
            other => panic!("expected a DIMACS error, got {other:?}"),
        }
    }

    #[test]
    fn single_clause() {
        let f = parse("p cnf 2 1\n1 2 0").unwrap();
        assert_eq!(f.num_vars(), 2);
        assert_eq!(
            f.clauses()[0].literals(),
            &[Literal::pos(0), Literal::pos(1)]
        );
    }

    #[test]
    fn example_formula_maps_to_zero_based() {
        let f = parse("c example\np cnf 4 2\n-3 -4 0\n1 3 2 0").unwrap();
        assert_eq!(f.num_clauses(), 2);
        assert_eq!(
            f.clauses()[0].literals(),
            &[Literal::neg(2), Literal::neg(3)]
        );
        assert_eq!(
            f.clauses()[1].literals(),
            &[Literal::pos(0), Literal::pos(2), Literal::pos(1)]
        );
    }

    #[test]
    fn clauses_may_span_lines() {
        let f = parse("p cnf 3 2\n1 -2\n3 0 2\n0\n").unwrap();
        assert_eq!(f.clauses()[0].len(), 3);
        assert_eq!(f.clauses()[1].literals(), &[Literal::pos(1)]);
    }

    #[test]
    fn duplicate_literals_are_removed() {
        let f = parse("p cnf 2 1\n1 1 -2 1 0\n").unwrap();
        assert_eq!(f.clauses()[0].literals(), &[Literal::pos(0), Literal::neg(1)]);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            dimacs_err("p cnf 1 1\n2 0"),
            DimacsError::VarOutOfRange { var: 2, n: 1, .. }
        ));
        assert_eq!(dimacs_err("1 2 0\n"), DimacsError::MissingHeader);
        assert_eq!(dimacs_err(""), DimacsError::MissingHeader);
        assert!(matches!(
            dimacs_err("p cnf 2 1\np cnf 2 1\n1 0"),
            DimacsError::DuplicateHeader { line: 2 }
        ));
        assert_eq!(
            dimacs_err("p cnf 2 2\n1 0\n"),
            DimacsError::ClauseCountMismatch {
                declared: 2,
                found: 1
            }
        );
        assert_eq!(dimacs_err("p cnf 2 1\n1 2\n"), DimacsError::Unterminated);
        assert!(matches!(
            dimacs_err("p cnf 2 2\n1 0 0\n"),
            DimacsError::EmptyClause { line: 2 }
        ));
        assert!(matches!(
            dimacs_err("p cnf 2 1\n1 -0\n"),
            DimacsError::BadToken { .. }
        ));
        assert!(matches!(
            dimacs_err("p cnf 2 1\n1 x 0\n"),
            DimacsError::BadToken { .. }
        ));
        assert!(matches!(
            dimacs_err("p dnf 2 1\n1 0\n"),
            DimacsError::BadHeader { .. }
        ));
        assert_eq!(dimacs_err("p cnf 2 0\n"), DimacsError::NoClauses);
    }

    #[test]
    fn serializer_output() {
        let f = parse("p cnf 4 2\n-3 -4 0\n1 3 2 0").unwrap();
        assert_eq!(f.to_dimacs(), "p cnf 4 2\n-3 -4 0\n1 3 2 0\n");
    }
}
