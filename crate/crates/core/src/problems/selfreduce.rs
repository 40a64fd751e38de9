//! Self-reducible counting functions turned into total-path machines.
//!
//! A self-reduction writes `f(x) = t(x) + sum_i g(x, i) * f(h(x, i))` with a
//! recursion of bounded depth. When the decision `f(x) > 0` is easy, the
//! search tree below can be pruned to positive instances only, so every
//! leaf is a solution and no branch dies: adding one dummy path gives a
//! machine whose total paths minus one is exactly `f(x)`.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;

use super::formula::DnfFormula;
use super::graph::{bits, full_mask, has_perfect_matching_on, Graph};
use super::subtree::SubtreeInstance;
use crate::error::{Error, Result};
use crate::machine::{path_counts, Expansion, Machine, MachineKind, Node, TreeNode, Verdict};

/// The components `(t, r, g, h, decision)` of a self-reduction, plus a
/// base-case detector.
pub trait SelfReduction: Send + Sync + 'static {
    type Instance: Clone + Send + Sync + fmt::Debug + 'static;

    fn name(&self) -> &'static str;

    /// `Some(f(x))` when `x` is a base case, computed directly.
    fn base_count(&self, x: &Self::Instance) -> Option<u64>;

    /// `t(x)`: solutions contributed directly at `x`.
    fn direct(&self, x: &Self::Instance) -> u64;

    /// `r(x) + 1`: number of sub-instances.
    fn arity(&self, x: &Self::Instance) -> usize;

    /// `g(x, i)`.
    fn weight(&self, x: &Self::Instance, i: usize) -> u64;

    /// `h(x, i)`.
    fn reduce(&self, x: &Self::Instance, i: usize) -> Self::Instance;

    /// Polynomial-time test of `f(x) > 0`.
    fn decide(&self, x: &Self::Instance) -> bool;

    /// Bound on the depth of the search tree below `x`, base-case leaf
    /// expansions included.
    fn depth_bound(&self, x: &Self::Instance) -> usize;

    /// Bound on the number of children of a search-tree node below `x`.
    fn fanout_bound(&self, x: &Self::Instance) -> usize;
}

/// Machine with `tot = f(x)` for a fixed instance `x`.
pub struct SelfReducibleMachine<S: SelfReduction> {
    reduction: Arc<S>,
    instance: S::Instance,
}

impl<S: SelfReduction> fmt::Debug for SelfReducibleMachine<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SelfReducibleMachine")
            .field("reduction", &self.reduction.name())
            .field("instance", &self.instance)
            .finish()
    }
}

/// Builds the machine: a single rejecting path if the decision is
/// negative, otherwise a root branching into an accepting dummy leaf
/// (child 0) and the pruned search tree of `x`.
pub fn build_self_reducible_machine<S: SelfReduction>(
    reduction: Arc<S>,
    instance: S::Instance,
) -> SelfReducibleMachine<S> {
    SelfReducibleMachine {
        reduction,
        instance,
    }
}

/// Like [`build_self_reducible_machine`], then counts the machine's paths
/// and compares `tot` with an independent oracle value.
pub fn build_audited<S: SelfReduction>(
    reduction: Arc<S>,
    instance: S::Instance,
    oracle: impl FnOnce(&S::Instance) -> Result<BigUint>,
) -> Result<SelfReducibleMachine<S>> {
    let expected = oracle(&instance)?;
    let machine = build_self_reducible_machine(reduction, instance);
    let tot = path_counts(&machine, "")?.tot();
    if tot != expected {
        return Err(Error::Audit {
            reduction: machine.reduction.name().to_string(),
            message: format!("machine has tot {tot}, oracle counts {expected}"),
        });
    }
    Ok(machine)
}

impl<S: SelfReduction> Machine for SelfReducibleMachine<S> {
    fn kind(&self) -> MachineKind {
        MachineKind::BaseProblem
    }

    fn depth_bound(&self) -> usize {
        1 + self.reduction.depth_bound(&self.instance)
    }

    fn fanout_bound(&self) -> usize {
        2.max(self.reduction.fanout_bound(&self.instance))
    }

    fn root(&self, _input: &str) -> Result<Node> {
        if !self.reduction.decide(&self.instance) {
            return Ok(Node::leaf(Verdict::Reject));
        }
        Ok(Node::branch(vec![
            Node::leaf(Verdict::Accept),
            Node::new(SearchNode {
                reduction: self.reduction.clone(),
                instance: self.instance.clone(),
            }),
        ]))
    }
}

struct SearchNode<S: SelfReduction> {
    reduction: Arc<S>,
    instance: S::Instance,
}

impl<S: SelfReduction> TreeNode for SearchNode<S> {
    fn expand(&self) -> Result<Expansion> {
        let sr = &self.reduction;
        let x = &self.instance;
        let audit = |message: String| Error::Audit {
            reduction: sr.name().to_string(),
            message,
        };
        if let Some(count) = sr.base_count(x) {
            return match count {
                0 => Err(audit(format!("decision positive but base count 0 at {x:?}"))),
                1 => Ok(Expansion::Leaf(Verdict::Accept)),
                c => Ok(Expansion::Branch(vec![Node::leaf(Verdict::Accept); c as usize])),
            };
        }
        let mut children = vec![Node::leaf(Verdict::Accept); sr.direct(x) as usize];
        for i in 0..sr.arity(x) {
            let weight = sr.weight(x, i);
            if weight == 0 {
                continue;
            }
            let sub = sr.reduce(x, i);
            if !sr.decide(&sub) {
                continue;
            }
            for _ in 0..weight {
                children.push(Node::new(SearchNode {
                    reduction: sr.clone(),
                    instance: sub.clone(),
                }));
            }
        }
        if children.is_empty() {
            return Err(audit(format!("decision positive but no solutions below {x:?}")));
        }
        Ok(Expansion::Branch(children))
    }
}

// ---------------------------------------------------------------------------
// Perfect matchings of a bipartite graph

/// Branches on the smallest edge at the smallest uncovered vertex: include
/// it (child 0) or delete it (child 1).
#[derive(Debug, Clone, Copy, Default)]
pub struct PerfectMatchingReduction;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchingState {
    /// Remaining edges as neighbourhood masks.
    pub adjacency: Vec<u64>,
    pub uncovered: u64,
}

impl MatchingState {
    /// Initial state; the graph must be bipartite.
    pub fn for_graph(g: &Graph) -> Result<Self> {
        if g.find_bipartition().is_none() {
            return Err(Error::Parameter(
                "the perfect-matching self-reduction machine is built for bipartite graphs".into(),
            ));
        }
        Ok(MatchingState {
            adjacency: g.adjacency(),
            uncovered: full_mask(g.vertex_count()),
        })
    }

    fn pivot(&self) -> Option<(usize, Option<usize>)> {
        if self.uncovered == 0 {
            return None;
        }
        let v = self.uncovered.trailing_zeros() as usize;
        let u = bits(self.adjacency[v] & self.uncovered).next();
        Some((v, u))
    }

    fn live_edges(&self) -> usize {
        bits(self.uncovered)
            .map(|v| (self.adjacency[v] & self.uncovered).count_ones() as usize)
            .sum::<usize>()
            / 2
    }
}

impl SelfReduction for PerfectMatchingReduction {
    type Instance = MatchingState;

    fn name(&self) -> &'static str {
        "perfect-matchings"
    }

    fn base_count(&self, x: &MatchingState) -> Option<u64> {
        match x.pivot() {
            None => Some(1),
            Some((_, None)) => Some(0),
            Some(_) => None,
        }
    }

    fn direct(&self, _x: &MatchingState) -> u64 {
        0
    }

    fn arity(&self, _x: &MatchingState) -> usize {
        2
    }

    fn weight(&self, _x: &MatchingState, _i: usize) -> u64 {
        1
    }

    fn reduce(&self, x: &MatchingState, i: usize) -> MatchingState {
        let (v, u) = match x.pivot() {
            Some((v, Some(u))) => (v, u),
            _ => unreachable!("reduce is only called on non-base instances"),
        };
        let mut next = x.clone();
        if i == 0 {
            next.uncovered &= !(1 << v | 1 << u);
        } else {
            next.adjacency[v] &= !(1 << u);
            next.adjacency[u] &= !(1 << v);
        }
        next
    }

    fn decide(&self, x: &MatchingState) -> bool {
        has_perfect_matching_on(&x.adjacency, x.uncovered)
    }

    fn depth_bound(&self, x: &MatchingState) -> usize {
        // every step removes at least one live edge
        x.live_edges() + 1
    }

    fn fanout_bound(&self, _x: &MatchingState) -> usize {
        2
    }
}

// ---------------------------------------------------------------------------
// DNF satisfying assignments

/// Extends a partial assignment one variable at a time (false first).
#[derive(Debug, Clone)]
pub struct DnfExtensionReduction {
    formula: Arc<DnfFormula>,
}

impl DnfExtensionReduction {
    pub fn new(formula: DnfFormula) -> Self {
        DnfExtensionReduction {
            formula: Arc::new(formula),
        }
    }

    pub fn formula(&self) -> &DnfFormula {
        &self.formula
    }
}

impl SelfReduction for DnfExtensionReduction {
    type Instance = Vec<bool>;

    fn name(&self) -> &'static str {
        "dnf-sat"
    }

    fn base_count(&self, prefix: &Vec<bool>) -> Option<u64> {
        (prefix.len() == self.formula.num_vars())
            .then(|| u64::from(self.formula.consistent_with(prefix)))
    }

    fn direct(&self, _x: &Vec<bool>) -> u64 {
        0
    }

    fn arity(&self, _x: &Vec<bool>) -> usize {
        2
    }

    fn weight(&self, _x: &Vec<bool>, _i: usize) -> u64 {
        1
    }

    fn reduce(&self, prefix: &Vec<bool>, i: usize) -> Vec<bool> {
        let mut next = prefix.clone();
        next.push(i == 1);
        next
    }

    fn decide(&self, prefix: &Vec<bool>) -> bool {
        self.formula.consistent_with(prefix)
    }

    fn depth_bound(&self, prefix: &Vec<bool>) -> usize {
        self.formula.num_vars() - prefix.len()
    }

    fn fanout_bound(&self, _x: &Vec<bool>) -> usize {
        2
    }
}

// ---------------------------------------------------------------------------
// Independent sets

/// Branches on the smallest remaining vertex: leave it out (child 0) or
/// take it and drop its neighbours (child 1).
#[derive(Debug, Clone)]
pub struct IndependentSetReduction {
    adjacency: Arc<Vec<u64>>,
}

impl IndependentSetReduction {
    pub fn new(g: &Graph) -> Self {
        IndependentSetReduction {
            adjacency: Arc::new(g.adjacency()),
        }
    }

    pub fn initial(&self) -> u64 {
        full_mask(self.adjacency.len())
    }
}

impl SelfReduction for IndependentSetReduction {
    type Instance = u64;

    fn name(&self) -> &'static str {
        "independent-sets"
    }

    fn base_count(&self, remaining: &u64) -> Option<u64> {
        (*remaining == 0).then_some(1)
    }

    fn direct(&self, _x: &u64) -> u64 {
        0
    }

    fn arity(&self, _x: &u64) -> usize {
        2
    }

    fn weight(&self, _x: &u64, _i: usize) -> u64 {
        1
    }

    fn reduce(&self, remaining: &u64, i: usize) -> u64 {
        let v = remaining.trailing_zeros() as usize;
        let without = remaining & !(1 << v);
        if i == 0 {
            without
        } else {
            without & !self.adjacency[v]
        }
    }

    fn decide(&self, _x: &u64) -> bool {
        // the empty set is always independent
        true
    }

    fn depth_bound(&self, remaining: &u64) -> usize {
        remaining.count_ones() as usize
    }

    fn fanout_bound(&self, _x: &u64) -> usize {
        2
    }
}

// ---------------------------------------------------------------------------
// Size of a pruned subtree

/// `f(prefix) = 1 + f(prefix 0) + f(prefix 1)` for a reachable prefix: the
/// node itself is the one direct solution.
#[derive(Debug, Clone)]
pub struct SubtreeReduction {
    instance: Arc<SubtreeInstance>,
}

impl SubtreeReduction {
    pub fn new(instance: SubtreeInstance) -> Self {
        SubtreeReduction {
            instance: Arc::new(instance),
        }
    }
}

impl SelfReduction for SubtreeReduction {
    type Instance = Vec<bool>;

    fn name(&self) -> &'static str {
        "size-of-subtree"
    }

    fn base_count(&self, prefix: &Vec<bool>) -> Option<u64> {
        (prefix.len() == self.instance.depth()).then_some(1)
    }

    fn direct(&self, _x: &Vec<bool>) -> u64 {
        1
    }

    fn arity(&self, _x: &Vec<bool>) -> usize {
        2
    }

    fn weight(&self, _x: &Vec<bool>, _i: usize) -> u64 {
        1
    }

    fn reduce(&self, prefix: &Vec<bool>, i: usize) -> Vec<bool> {
        let mut next = prefix.clone();
        next.push(i == 1);
        next
    }

    fn decide(&self, prefix: &Vec<bool>) -> bool {
        self.instance.is_reachable(prefix)
    }

    fn depth_bound(&self, prefix: &Vec<bool>) -> usize {
        self.instance.depth() - prefix.len() + 1
    }

    fn fanout_bound(&self, _x: &Vec<bool>) -> usize {
        3
    }
}
