//! CNF and DNF formulas in DIMACS-style text, with brute-force model
//! counting.

use std::fmt;

use num_bigint::BigUint;

use super::Caps;
use crate::error::{Error, Result};

/// A signed DIMACS literal: `v` or `-v` for variable `v` in `1..=n`.
pub type Literal = i32;

fn validate(num_vars: usize, groups: &[Vec<Literal>], what: &str) -> Result<()> {
    for (i, group) in groups.iter().enumerate() {
        for &lit in group {
            let var = lit.unsigned_abs() as usize;
            if lit == 0 || var > num_vars {
                return Err(Error::Parameter(format!(
                    "{what} {i}: literal {lit} outside 1..={num_vars}"
                )));
            }
        }
    }
    Ok(())
}

/// Conjunction of clauses, each a disjunction of literals. An empty clause
/// list is true; an empty clause is false.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CnfFormula {
    num_vars: usize,
    clauses: Vec<Vec<Literal>>,
}

/// Disjunction of terms, each a conjunction of literals. An empty term
/// list is false; an empty term is true.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DnfFormula {
    num_vars: usize,
    terms: Vec<Vec<Literal>>,
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<Vec<Literal>>) -> Result<Self> {
        validate(num_vars, &clauses, "clause")?;
        Ok(CnfFormula { num_vars, clauses })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Vec<Literal>] {
        &self.clauses
    }

    pub fn parse(text: &str) -> Result<Self> {
        let (n, groups) = parse_dimacs(text, "cnf")?;
        CnfFormula::new(n, groups)
    }

    /// Truth value under `assignment`, bit `i` holding variable `i + 1`.
    pub fn eval(&self, assignment: u64) -> bool {
        self.clauses
            .iter()
            .all(|c| c.iter().any(|&l| literal_value(l, assignment)))
    }
}

impl DnfFormula {
    pub fn new(num_vars: usize, terms: Vec<Vec<Literal>>) -> Result<Self> {
        validate(num_vars, &terms, "term")?;
        Ok(DnfFormula { num_vars, terms })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn terms(&self) -> &[Vec<Literal>] {
        &self.terms
    }

    pub fn parse(text: &str) -> Result<Self> {
        let (n, groups) = parse_dimacs(text, "dnf")?;
        DnfFormula::new(n, groups)
    }

    pub fn eval(&self, assignment: u64) -> bool {
        self.terms
            .iter()
            .any(|t| t.iter().all(|&l| literal_value(l, assignment)))
    }

    /// Whether some term can still be satisfied after fixing variables
    /// `1..=prefix.len()` to `prefix`.
    pub fn consistent_with(&self, prefix: &[bool]) -> bool {
        self.terms
            .iter()
            .any(|t| term_consistent(t, prefix))
    }

    /// Satisfiability by per-term consistency, without enumeration.
    pub fn is_satisfiable(&self) -> bool {
        self.consistent_with(&[])
    }
}

/// A term is consistent with a partial assignment if it has no
/// complementary pair and no literal falsified by the assigned prefix.
pub(crate) fn term_consistent(term: &[Literal], prefix: &[bool]) -> bool {
    term.iter().all(|&l| {
        let var = l.unsigned_abs() as usize;
        if term.contains(&-l) {
            return false;
        }
        match prefix.get(var - 1) {
            Some(&value) => value == (l > 0),
            None => true,
        }
    })
}

fn literal_value(lit: Literal, assignment: u64) -> bool {
    let bit = (assignment >> (lit.unsigned_abs() - 1)) & 1 == 1;
    bit == (lit > 0)
}

/// Per-group (positive mask, negative mask) for fast evaluation.
fn masks(groups: &[Vec<Literal>]) -> Vec<(u64, u64)> {
    groups
        .iter()
        .map(|g| {
            g.iter().fold((0u64, 0u64), |(pos, neg), &l| {
                let bit = 1u64 << (l.unsigned_abs() - 1);
                if l > 0 {
                    (pos | bit, neg)
                } else {
                    (pos, neg | bit)
                }
            })
        })
        .collect()
}

fn check_vars(n: usize, caps: &Caps) -> Result<()> {
    if n > caps.max_vars {
        return Err(Error::Capacity {
            what: "variable count",
            actual: n,
            limit: caps.max_vars,
        });
    }
    Ok(())
}

/// Number of satisfying assignments, by enumerating all `2^n`.
pub fn count_sat(formula: &CnfFormula, caps: &Caps) -> Result<BigUint> {
    check_vars(formula.num_vars, caps)?;
    let clauses = masks(&formula.clauses);
    let count = (0u64..1 << formula.num_vars)
        .filter(|&a| clauses.iter().all(|&(pos, neg)| a & pos != 0 || !a & neg != 0))
        .count();
    Ok(BigUint::from(count))
}

/// Number of satisfying assignments of a DNF, by enumeration.
pub fn count_dnf_sat(formula: &DnfFormula, caps: &Caps) -> Result<BigUint> {
    check_vars(formula.num_vars, caps)?;
    let terms = masks(&formula.terms);
    let count = (0u64..1 << formula.num_vars)
        .filter(|&a| terms.iter().any(|&(pos, neg)| a & pos == pos && a & neg == 0))
        .count();
    Ok(BigUint::from(count))
}

/// Number of falsifying assignments of a DNF: `2^n - count_dnf_sat`.
pub fn unsat_count(formula: &DnfFormula, caps: &Caps) -> Result<BigUint> {
    let sat = count_dnf_sat(formula, caps)?;
    Ok((BigUint::from(1u8) << formula.num_vars) - sat)
}

fn parse_dimacs(text: &str, kind: &str) -> Result<(usize, Vec<Vec<Literal>>)> {
    let mut header: Option<(usize, usize)> = None;
    let mut groups = Vec::new();
    let mut current = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(Error::format(line_no, "duplicate header"));
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 || fields[0] != "p" || fields[1] != kind {
                return Err(Error::format(line_no, format!("expected header \"p {kind} <vars> <{kind}s>\"")));
            }
            let n = fields[2]
                .parse()
                .map_err(|_| Error::format(line_no, "bad variable count"))?;
            let m = fields[3]
                .parse()
                .map_err(|_| Error::format(line_no, "bad group count"))?;
            header = Some((n, m));
            continue;
        }
        let Some((n, _)) = header else {
            return Err(Error::format(line_no, "data before header"));
        };
        for tok in line.split_whitespace() {
            let lit: Literal = tok
                .parse()
                .map_err(|_| Error::format(line_no, format!("bad literal {tok:?}")))?;
            if lit == 0 {
                groups.push(std::mem::take(&mut current));
            } else if lit.unsigned_abs() as usize > n {
                return Err(Error::format(line_no, format!("literal {lit} outside 1..={n}")));
            } else {
                current.push(lit);
            }
        }
    }
    let Some((n, m)) = header else {
        return Err(Error::format(0, format!("missing \"p {kind}\" header")));
    };
    if !current.is_empty() {
        return Err(Error::format(0, "last group is not 0-terminated"));
    }
    if groups.len() != m {
        return Err(Error::format(
            0,
            format!("header declares {m} groups, found {}", groups.len()),
        ));
    }
    Ok((n, groups))
}

fn write_dimacs(f: &mut fmt::Formatter<'_>, kind: &str, n: usize, groups: &[Vec<Literal>]) -> fmt::Result {
    writeln!(f, "p {kind} {n} {}", groups.len())?;
    for g in groups {
        for l in g {
            write!(f, "{l} ")?;
        }
        writeln!(f, "0")?;
    }
    Ok(())
}

impl fmt::Display for CnfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_dimacs(f, "cnf", self.num_vars, &self.clauses)
    }
}

impl fmt::Display for DnfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_dimacs(f, "dnf", self.num_vars, &self.terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn caps() -> Caps {
        Caps::default()
    }

    #[test]
    fn cnf_examples() {
        let contradiction = CnfFormula::new(1, vec![vec![1], vec![-1]]).unwrap();
        assert_eq!(count_sat(&contradiction, &caps()).unwrap(), 0u32.into());
        let clause = CnfFormula::new(2, vec![vec![1, 2]]).unwrap();
        assert_eq!(count_sat(&clause, &caps()).unwrap(), 3u32.into());
        let empty = CnfFormula::new(3, vec![]).unwrap();
        assert_eq!(count_sat(&empty, &caps()).unwrap(), 8u32.into());
        let empty_clause = CnfFormula::new(2, vec![vec![]]).unwrap();
        assert_eq!(count_sat(&empty_clause, &caps()).unwrap(), 0u32.into());
    }

    #[test]
    fn dnf_examples() {
        let single = DnfFormula::new(2, vec![vec![1]]).unwrap();
        assert_eq!(count_dnf_sat(&single, &caps()).unwrap(), 2u32.into());
        assert_eq!(unsat_count(&single, &caps()).unwrap(), 2u32.into());
        let empty = DnfFormula::new(2, vec![]).unwrap();
        assert_eq!(count_dnf_sat(&empty, &caps()).unwrap(), 0u32.into());
        assert_eq!(unsat_count(&empty, &caps()).unwrap(), 4u32.into());
        let contradictory = DnfFormula::new(1, vec![vec![1, -1]]).unwrap();
        assert_eq!(count_dnf_sat(&contradictory, &caps()).unwrap(), 0u32.into());
        assert!(!contradictory.is_satisfiable());
        assert!(single.is_satisfiable());
    }

    #[test]
    fn capacity_is_enforced() {
        let f = CnfFormula::new(21, vec![]).unwrap();
        assert!(matches!(count_sat(&f, &caps()), Err(Error::Capacity { .. })));
        let wide = Caps {
            max_vars: 21,
            ..Caps::default()
        };
        assert!(count_sat(&f, &wide).is_ok());
    }

    #[test]
    fn dimacs_parsing() {
        let text = "c example\np cnf 3 2\n1 -2 0\n2 3\n0\n";
        let f = CnfFormula::parse(text).unwrap();
        assert_eq!(f.clauses(), &[vec![1, -2], vec![2, 3]]);
        assert_eq!(CnfFormula::parse(&f.to_string()).unwrap(), f);
        assert!(CnfFormula::parse("p cnf 2 1\n1 3 0\n").is_err());
        assert!(CnfFormula::parse("p cnf 2 2\n1 0\n").is_err());
        assert!(CnfFormula::parse("1 0\n").is_err());
        assert!(CnfFormula::parse("p dnf 2 1\n1 0\n").is_err());
        assert!(DnfFormula::parse("p dnf 2 1\n1 -2 0\n").is_ok());
    }

    fn naive_count(n: usize, groups: &[Vec<Literal>], dnf: bool) -> usize {
        (0..1usize << n)
            .filter(|&a| {
                let value = |l: &Literal| {
                    let b = a >> (l.unsigned_abs() as usize - 1) & 1 == 1;
                    if *l > 0 { b } else { !b }
                };
                if dnf {
                    groups.iter().any(|g| g.iter().all(value))
                } else {
                    groups.iter().all(|g| g.iter().any(value))
                }
            })
            .count()
    }

    fn groups(n: usize) -> impl Strategy<Value = Vec<Vec<Literal>>> {
        let lit = (1..=n as i32, any::<bool>()).prop_map(|(v, s)| if s { v } else { -v });
        prop::collection::vec(prop::collection::vec(lit, 0..4), 0..6)
    }

    proptest! {
        #[test]
        fn counts_match_naive_enumeration(g in groups(6)) {
            let cnf = CnfFormula::new(6, g.clone()).unwrap();
            let dnf = DnfFormula::new(6, g.clone()).unwrap();
            prop_assert_eq!(count_sat(&cnf, &caps()).unwrap(), BigUint::from(naive_count(6, &g, false)));
            prop_assert_eq!(count_dnf_sat(&dnf, &caps()).unwrap(), BigUint::from(naive_count(6, &g, true)));
            let total = count_dnf_sat(&dnf, &caps()).unwrap() + unsat_count(&dnf, &caps()).unwrap();
            prop_assert_eq!(total, BigUint::from(64u32));
            prop_assert_eq!(dnf.is_satisfiable(), naive_count(6, &g, true) > 0);
        }
    }
}
