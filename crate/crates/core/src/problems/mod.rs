//! Counting problems with exact brute-force oracles, easy decision
//! procedures and self-reduction machines.

pub mod formula;
pub mod graph;
pub mod selfreduce;
pub mod subtree;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::machine::MachineRef;

pub use formula::{count_dnf_sat, count_sat, unsat_count, CnfFormula, DnfFormula, Literal};
pub use graph::{count_independent_sets, count_perfect_matchings, has_perfect_matching, Graph};
pub use selfreduce::{
    build_audited, build_self_reducible_machine, DnfExtensionReduction, IndependentSetReduction,
    MatchingState, PerfectMatchingReduction, SelfReducibleMachine, SelfReduction,
    SubtreeReduction,
};
pub use subtree::{count_full_depth_leaves, size_of_subtree, Circuit, Gate, SubtreeInstance};

/// Enumeration limits for the brute-force oracles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    pub max_vars: usize,
    pub max_vertices: usize,
    pub max_subtree_depth: usize,
    /// Largest `T` accepted by the `2^T` scaling check.
    pub max_scaling_exponent: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_vars: 20,
            max_vertices: 16,
            max_subtree_depth: 20,
            max_scaling_exponent: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    Sat,
    DnfSat,
    PerfectMatchings,
    IndependentSets,
    SizeOfSubtree,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 5] = [
        ProblemKind::Sat,
        ProblemKind::DnfSat,
        ProblemKind::PerfectMatchings,
        ProblemKind::IndependentSets,
        ProblemKind::SizeOfSubtree,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Sat => "sat",
            ProblemKind::DnfSat => "dnf-sat",
            ProblemKind::PerfectMatchings => "perf-match",
            ProblemKind::IndependentSets => "indep-sets",
            ProblemKind::SizeOfSubtree => "size-of-subtree",
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProblemKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown problem kind {s:?}")))
    }
}

/// A counting-problem instance together with the function it asks for.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ProblemInstance {
    Sat(CnfFormula),
    DnfSat(DnfFormula),
    PerfectMatchings(Graph),
    IndependentSets(Graph),
    SizeOfSubtree(SubtreeInstance),
}

impl ProblemInstance {
    pub fn kind(&self) -> ProblemKind {
        match self {
            ProblemInstance::Sat(_) => ProblemKind::Sat,
            ProblemInstance::DnfSat(_) => ProblemKind::DnfSat,
            ProblemInstance::PerfectMatchings(_) => ProblemKind::PerfectMatchings,
            ProblemInstance::IndependentSets(_) => ProblemKind::IndependentSets,
            ProblemInstance::SizeOfSubtree(_) => ProblemKind::SizeOfSubtree,
        }
    }

    /// Parses any of the problem text formats, recognized by header.
    /// Graphs are read as perfect-matching instances unless `graph_kind`
    /// says otherwise.
    pub fn parse(text: &str, graph_kind: ProblemKind) -> Result<Self> {
        let header = text
            .lines()
            .map(str::trim)
            .find(|l| l.starts_with("p "))
            .ok_or_else(|| Error::format(0, "no \"p <format> ...\" header found"))?;
        match header.split_whitespace().nth(1) {
            Some("cnf") => Ok(ProblemInstance::Sat(CnfFormula::parse(text)?)),
            Some("dnf") => Ok(ProblemInstance::DnfSat(DnfFormula::parse(text)?)),
            Some("edge") => {
                let g = Graph::parse(text)?;
                match graph_kind {
                    ProblemKind::IndependentSets => Ok(ProblemInstance::IndependentSets(g)),
                    ProblemKind::PerfectMatchings => Ok(ProblemInstance::PerfectMatchings(g)),
                    other => Err(Error::Parameter(format!("graphs cannot be read as {other}"))),
                }
            }
            Some("subtree") => Ok(ProblemInstance::SizeOfSubtree(SubtreeInstance::parse(text)?)),
            other => Err(Error::format(0, format!("unknown format {other:?}"))),
        }
    }

    /// The instance in its text format.
    pub fn to_text(&self) -> String {
        match self {
            ProblemInstance::Sat(f) => f.to_string(),
            ProblemInstance::DnfSat(f) => f.to_string(),
            ProblemInstance::PerfectMatchings(g) | ProblemInstance::IndependentSets(g) => {
                g.to_string()
            }
            ProblemInstance::SizeOfSubtree(s) => s.to_string(),
        }
    }
}

/// Exact count by the brute-force oracle of the instance's problem.
pub fn brute_force_count(instance: &ProblemInstance, caps: &Caps) -> Result<BigUint> {
    match instance {
        ProblemInstance::Sat(f) => count_sat(f, caps),
        ProblemInstance::DnfSat(f) => count_dnf_sat(f, caps),
        ProblemInstance::PerfectMatchings(g) => count_perfect_matchings(g, caps),
        ProblemInstance::IndependentSets(g) => count_independent_sets(g, caps),
        ProblemInstance::SizeOfSubtree(s) => size_of_subtree(s, caps),
    }
}

/// Whether the count is positive, decided without counting.
///
/// CNF satisfiability has no such procedure here; it falls back to
/// enumeration and is subject to the variable cap.
pub fn decision(instance: &ProblemInstance, caps: &Caps) -> Result<bool> {
    Ok(match instance {
        ProblemInstance::Sat(f) => !count_sat(f, caps)?.is_zero(),
        ProblemInstance::DnfSat(f) => f.is_satisfiable(),
        ProblemInstance::PerfectMatchings(g) => has_perfect_matching(g),
        ProblemInstance::IndependentSets(_) => true,
        ProblemInstance::SizeOfSubtree(s) => s.is_alive(&[]),
    })
}

/// The total-path machine of the instance's self-reduction. Satisfiability
/// of CNF formulas has none.
pub fn self_reduction_machine(instance: &ProblemInstance) -> Result<MachineRef> {
    Ok(match instance {
        ProblemInstance::Sat(_) => {
            return Err(Error::Parameter(
                "#Sat has no self-reduction with an easy decision version".into(),
            ))
        }
        ProblemInstance::DnfSat(f) => Arc::new(build_self_reducible_machine(
            Arc::new(DnfExtensionReduction::new(f.clone())),
            Vec::new(),
        )),
        ProblemInstance::PerfectMatchings(g) => Arc::new(build_self_reducible_machine(
            Arc::new(PerfectMatchingReduction),
            MatchingState::for_graph(g)?,
        )),
        ProblemInstance::IndependentSets(g) => {
            let sr = Arc::new(IndependentSetReduction::new(g));
            let start = sr.initial();
            Arc::new(build_self_reducible_machine(sr, start))
        }
        ProblemInstance::SizeOfSubtree(s) => Arc::new(build_self_reducible_machine(
            Arc::new(SubtreeReduction::new(s.clone())),
            Vec::new(),
        )),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decision_examples() {
        let caps = Caps::default();
        let dnf = DnfFormula::new(3, vec![vec![1, -1], vec![2, 3]]).unwrap();
        assert!(decision(&ProblemInstance::DnfSat(dnf), &caps).unwrap());
        let odd = Graph::new(5, [(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        assert!(!decision(&ProblemInstance::PerfectMatchings(odd), &caps).unwrap());
        let c6 = Graph::new(6, (0..6).map(|i| (i, (i + 1) % 6))).unwrap();
        assert!(decision(&ProblemInstance::PerfectMatchings(c6), &caps).unwrap());
        let big = CnfFormula::new(25, vec![]).unwrap();
        assert!(matches!(
            decision(&ProblemInstance::Sat(big), &caps),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn parse_by_header() {
        let g = ProblemInstance::parse("p edge 2 1\ne 1 2\n", ProblemKind::PerfectMatchings).unwrap();
        assert_eq!(g.kind(), ProblemKind::PerfectMatchings);
        let g = ProblemInstance::parse("p edge 2 1\ne 1 2\n", ProblemKind::IndependentSets).unwrap();
        assert_eq!(brute_force_count(&g, &Caps::default()).unwrap(), 3u32.into());
        let s = ProblemInstance::parse("c x\np subtree 2 1\nCONST 1\n", ProblemKind::PerfectMatchings).unwrap();
        assert_eq!(s.kind(), ProblemKind::SizeOfSubtree);
        assert!(ProblemInstance::parse("p foo 1 1\n", ProblemKind::PerfectMatchings).is_err());
        assert!(ProblemInstance::parse("1 2 0\n", ProblemKind::PerfectMatchings).is_err());
        let text = g.to_text();
        assert_eq!(ProblemInstance::parse(&text, ProblemKind::IndependentSets).unwrap(), g);
    }

    #[test]
    fn kinds_round_trip_through_names() {
        for k in ProblemKind::ALL {
            assert_eq!(k.name().parse::<ProblemKind>().unwrap(), k);
        }
    }

    #[test]
    fn sat_has_no_machine() {
        let f = CnfFormula::new(1, vec![]).unwrap();
        assert!(self_reduction_machine(&ProblemInstance::Sat(f)).is_err());
    }
}
