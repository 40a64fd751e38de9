//! Pruned binary trees described by a boolean circuit over prefix bits.
//!
//! Text format:
//!
//! ```text
//! c comment
//! p subtree <depth> <gate-count>
//! INPUT BIT <i>      prefix bit i (false when the prefix is shorter)
//! INPUT HAS <i>      true iff the prefix has more than i bits
//! CONST 0|1
//! NOT <g>
//! AND <g> <g> ...    conjunction of earlier gates (empty = true)
//! OR <g> <g> ...     disjunction of earlier gates (empty = false)
//! ```
//!
//! Gates are numbered from 0 in order of appearance and may only refer to
//! earlier gates. The last gate is the output.

use std::fmt;

use num_bigint::BigUint;

use super::Caps;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Gate {
    Const(bool),
    Bit(usize),
    Has(usize),
    Not(usize),
    And(Vec<usize>),
    Or(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Circuit {
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(gates: Vec<Gate>) -> Result<Self> {
        if gates.is_empty() {
            return Err(Error::Parameter("circuit needs at least one gate".into()));
        }
        for (i, gate) in gates.iter().enumerate() {
            let refs: &[usize] = match gate {
                Gate::Not(g) => std::slice::from_ref(g),
                Gate::And(gs) | Gate::Or(gs) => gs,
                _ => &[],
            };
            if let Some(&g) = refs.iter().find(|&&g| g >= i) {
                return Err(Error::Parameter(format!(
                    "gate {i} refers to gate {g}, which is not earlier"
                )));
            }
        }
        Ok(Circuit { gates })
    }

    pub fn constant(value: bool) -> Self {
        Circuit {
            gates: vec![Gate::Const(value)],
        }
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn eval(&self, prefix: &[bool]) -> bool {
        let mut values: Vec<bool> = Vec::with_capacity(self.gates.len());
        for gate in &self.gates {
            let v = match gate {
                Gate::Const(b) => *b,
                Gate::Bit(i) => prefix.get(*i).copied().unwrap_or(false),
                Gate::Has(i) => prefix.len() > *i,
                Gate::Not(g) => !values[*g],
                Gate::And(gs) => gs.iter().all(|&g| values[g]),
                Gate::Or(gs) => gs.iter().any(|&g| values[g]),
            };
            values.push(v);
        }
        *values.last().expect("non-empty circuit")
    }
}

/// A binary tree of depth `depth` pruned by an aliveness predicate. A node
/// exists only if it and all of its ancestors are alive.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubtreeInstance {
    depth: usize,
    alive: Circuit,
}

impl SubtreeInstance {
    pub fn new(depth: usize, alive: Circuit) -> Self {
        SubtreeInstance { depth, alive }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn circuit(&self) -> &Circuit {
        &self.alive
    }

    pub fn is_alive(&self, prefix: &[bool]) -> bool {
        self.alive.eval(prefix)
    }

    /// Aliveness of `prefix` together with all of its ancestors.
    pub fn is_reachable(&self, prefix: &[bool]) -> bool {
        (0..=prefix.len()).all(|len| self.alive.eval(&prefix[..len]))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut header: Option<(usize, usize)> = None;
        let mut gates = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('c') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let number = |s: &str| -> Result<usize> {
                s.parse()
                    .map_err(|_| Error::format(line_no, format!("bad number {s:?}")))
            };
            if fields[0] == "p" {
                if header.is_some() {
                    return Err(Error::format(line_no, "duplicate header"));
                }
                if fields.len() != 4 || fields[1] != "subtree" {
                    return Err(Error::format(line_no, "expected header \"p subtree <depth> <gates>\""));
                }
                header = Some((number(fields[2])?, number(fields[3])?));
                continue;
            }
            if header.is_none() {
                return Err(Error::format(line_no, "data before header"));
            }
            let args = &fields[1..];
            let gate = match (fields[0], args) {
                ("CONST", ["0"]) => Gate::Const(false),
                ("CONST", ["1"]) => Gate::Const(true),
                ("INPUT", ["BIT", i]) => Gate::Bit(number(i)?),
                ("INPUT", ["HAS", i]) => Gate::Has(number(i)?),
                ("NOT", [g]) => Gate::Not(number(g)?),
                ("AND", gs) => Gate::And(gs.iter().map(|g| number(g)).collect::<Result<_>>()?),
                ("OR", gs) => Gate::Or(gs.iter().map(|g| number(g)).collect::<Result<_>>()?),
                (op, _) => {
                    return Err(Error::format(line_no, format!("unknown or malformed gate {op:?}")))
                }
            };
            gates.push(gate);
        }
        let Some((depth, count)) = header else {
            return Err(Error::format(0, "missing \"p subtree\" header"));
        };
        if gates.len() != count {
            return Err(Error::format(
                0,
                format!("header declares {count} gates, found {}", gates.len()),
            ));
        }
        let circuit = Circuit::new(gates).map_err(|e| Error::format(0, e.to_string()))?;
        Ok(SubtreeInstance::new(depth, circuit))
    }
}

impl fmt::Display for SubtreeInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "p subtree {} {}", self.depth, self.alive.gates.len())?;
        for gate in &self.alive.gates {
            match gate {
                Gate::Const(b) => writeln!(f, "CONST {}", u8::from(*b))?,
                Gate::Bit(i) => writeln!(f, "INPUT BIT {i}")?,
                Gate::Has(i) => writeln!(f, "INPUT HAS {i}")?,
                Gate::Not(g) => writeln!(f, "NOT {g}")?,
                Gate::And(gs) | Gate::Or(gs) => {
                    f.write_str(if matches!(gate, Gate::And(_)) { "AND" } else { "OR" })?;
                    for g in gs {
                        write!(f, " {g}")?;
                    }
                    writeln!(f)?;
                }
            }
        }
        Ok(())
    }
}

fn check_depth(s: &SubtreeInstance, caps: &Caps) -> Result<()> {
    if s.depth > caps.max_subtree_depth {
        return Err(Error::Capacity {
            what: "subtree depth",
            actual: s.depth,
            limit: caps.max_subtree_depth,
        });
    }
    Ok(())
}

fn walk(s: &SubtreeInstance, prefix: &mut Vec<bool>, visit: &mut impl FnMut(&[bool])) {
    if !s.is_alive(prefix) {
        return;
    }
    visit(prefix);
    if prefix.len() < s.depth {
        for bit in [false, true] {
            prefix.push(bit);
            walk(s, prefix, visit);
            prefix.pop();
        }
    }
}

/// Number of nodes of the pruned tree, by depth-first traversal that does
/// not descend below dead nodes.
pub fn size_of_subtree(s: &SubtreeInstance, caps: &Caps) -> Result<BigUint> {
    check_depth(s, caps)?;
    let mut count = 0u64;
    walk(s, &mut Vec::new(), &mut |_| count += 1);
    Ok(BigUint::from(count))
}

/// Number of nodes of the pruned tree at full depth.
pub fn count_full_depth_leaves(s: &SubtreeInstance, caps: &Caps) -> Result<BigUint> {
    check_depth(s, caps)?;
    let mut count = 0u64;
    walk(s, &mut Vec::new(), &mut |p| {
        if p.len() == s.depth {
            count += 1
        }
    });
    Ok(BigUint::from(count))
}
