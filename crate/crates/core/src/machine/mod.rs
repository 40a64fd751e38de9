//! Computation trees of nondeterministic machines and their exact path
//! census.
//!
//! A [`Machine`] does not simulate a tape. It produces, for a given input,
//! the root [`Node`] of an ordered computation tree whose nodes expand
//! lazily. Leaves carry an accept/reject [`Verdict`]. Every quantity the
//! counting classes talk about (accepting paths, total paths minus one,
//! accepting minus rejecting) is a function of that tree alone.
//!
//! Depth is counted in edges: a machine consisting of a single leaf has
//! depth 0, and a path of length `d` visits `d + 1` nodes.

mod normal;

use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_traits::One;

use crate::error::{Error, PathPrefix, Result};

pub use normal::{binarize, check_normalizable, normalize_perfect};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Accept,
    Reject,
}

impl Verdict {
    pub fn accepts(self) -> bool {
        matches!(self, Verdict::Accept)
    }

    pub fn and(self, other: Verdict) -> Verdict {
        if self.accepts() && other.accepts() {
            Verdict::Accept
        } else {
            Verdict::Reject
        }
    }
}

/// Result of expanding one node of a computation tree.
pub enum Expansion {
    Leaf(Verdict),
    /// Ordered successors; index 0 is the leftmost continuation. Must be
    /// non-empty.
    Branch(Vec<Node>),
}

/// Behaviour behind a [`Node`]. Implementations must be deterministic.
pub trait TreeNode: Send + Sync {
    fn expand(&self) -> Result<Expansion>;
}

/// A lazily expanded node of a computation tree.
#[derive(Clone)]
pub struct Node(Arc<dyn TreeNode>);

impl Node {
    pub fn new(node: impl TreeNode + 'static) -> Self {
        Node(Arc::new(node))
    }

    pub fn leaf(verdict: Verdict) -> Self {
        Node::new(LeafNode(verdict))
    }

    pub fn branch(children: Vec<Node>) -> Self {
        Node::new(StaticBranch(children))
    }

    pub fn expand(&self) -> Result<Expansion> {
        self.0.expand()
    }

    /// Ordered successors; empty for a leaf.
    pub fn successors(&self) -> Result<Vec<Node>> {
        Ok(match self.expand()? {
            Expansion::Leaf(_) => Vec::new(),
            Expansion::Branch(children) => children,
        })
    }

    /// The verdict, defined only for leaves.
    pub fn verdict(&self) -> Result<Option<Verdict>> {
        Ok(match self.expand()? {
            Expansion::Leaf(v) => Some(v),
            Expansion::Branch(_) => None,
        })
    }
}

impl fmt::Debug for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Node(..)")
    }
}

struct LeafNode(Verdict);

impl TreeNode for LeafNode {
    fn expand(&self) -> Result<Expansion> {
        Ok(Expansion::Leaf(self.0))
    }
}

struct StaticBranch(Vec<Node>);

impl TreeNode for StaticBranch {
    fn expand(&self) -> Result<Expansion> {
        Ok(Expansion::Branch(self.0.clone()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MachineKind {
    Leaf,
    Branch,
    BaseProblem,
    CombinatorWrapper,
}

/// A generator of finite ordered computation trees.
///
/// `depth_bound` stands in for the polynomial running-time bound: no path
/// of the tree on any admissible input may be longer. `fanout_bound` is an
/// upper bound on the number of successors of any node, used by
/// [`binarize`] to bound the depth of its output.
pub trait Machine: Send + Sync + fmt::Debug {
    fn kind(&self) -> MachineKind;
    fn depth_bound(&self) -> usize;
    fn fanout_bound(&self) -> usize;
    fn root(&self, input: &str) -> Result<Node>;
}

pub type MachineRef = Arc<dyn Machine>;

/// A machine whose tree is a single leaf.
#[derive(Debug, Clone, Copy)]
pub struct LeafMachine(pub Verdict);

impl Machine for LeafMachine {
    fn kind(&self) -> MachineKind {
        MachineKind::Leaf
    }

    fn depth_bound(&self) -> usize {
        0
    }

    fn fanout_bound(&self) -> usize {
        0
    }

    fn root(&self, _input: &str) -> Result<Node> {
        Ok(Node::leaf(self.0))
    }
}

/// A machine that branches nondeterministically into its operands, in
/// order.
#[derive(Debug, Clone)]
pub struct BranchMachine {
    children: Vec<MachineRef>,
}

impl BranchMachine {
    pub fn new(children: Vec<MachineRef>) -> Result<Self> {
        if children.is_empty() {
            return Err(Error::Parameter("a branch needs at least one child".into()));
        }
        Ok(BranchMachine { children })
    }
}

impl Machine for BranchMachine {
    fn kind(&self) -> MachineKind {
        MachineKind::Branch
    }

    fn depth_bound(&self) -> usize {
        1 + self.children.iter().map(|c| c.depth_bound()).max().unwrap_or(0)
    }

    fn fanout_bound(&self) -> usize {
        self.children
            .iter()
            .map(|c| c.fanout_bound())
            .chain(std::iter::once(self.children.len()))
            .max()
            .unwrap_or(0)
    }

    fn root(&self, input: &str) -> Result<Node> {
        Ok(Node::new(LazyBranch {
            children: self.children.clone(),
            input: Arc::from(input),
        }))
    }
}

struct LazyBranch {
    children: Vec<MachineRef>,
    input: Arc<str>,
}

impl TreeNode for LazyBranch {
    fn expand(&self) -> Result<Expansion> {
        let roots = self
            .children
            .iter()
            .map(|m| m.root(&self.input))
            .collect::<Result<Vec<_>>>()?;
        Ok(Expansion::Branch(roots))
    }
}

pub fn leaf(verdict: Verdict) -> MachineRef {
    Arc::new(LeafMachine(verdict))
}

pub fn branch(children: Vec<MachineRef>) -> Result<MachineRef> {
    Ok(Arc::new(BranchMachine::new(children)?))
}

/// Exact leaf census of a computation tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PathCounts {
    pub total: BigUint,
    pub accepting: BigUint,
    pub rejecting: BigUint,
}

impl PathCounts {
    /// Total paths minus one.
    pub fn tot(&self) -> BigUint {
        // total >= 1 for every tree
        &self.total - BigUint::one()
    }

    /// Accepting minus rejecting paths.
    pub fn gap(&self) -> BigInt {
        BigInt::from(self.accepting.clone()) - BigInt::from(self.rejecting.clone())
    }
}

impl fmt::Display for PathCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "total={} acc={} rej={} tot={} gap={}",
            self.total,
            self.accepting,
            self.rejecting,
            self.tot(),
            self.gap()
        )
    }
}

struct Frame {
    children: Vec<Node>,
    next: usize,
}

fn current_prefix(stack: &[Frame]) -> Vec<usize> {
    stack.iter().map(|f| f.next.saturating_sub(1)).collect()
}

/// Depth-first walk over every leaf of `root`, left to right.
///
/// Fails if an internal node sits at depth `bound` (its successors would
/// exceed the bound).
pub fn for_each_leaf(
    root: Node,
    bound: usize,
    mut visit: impl FnMut(&[usize], Verdict),
) -> Result<()> {
    let mut stack: Vec<Frame> = Vec::new();
    let mut current = Some(root);
    loop {
        if let Some(node) = current.take() {
            match node.expand()? {
                Expansion::Leaf(v) => visit(&current_prefix(&stack), v),
                Expansion::Branch(children) => {
                    if children.is_empty() {
                        return Err(Error::EmptyBranch(PathPrefix(current_prefix(&stack))));
                    }
                    if stack.len() >= bound {
                        return Err(Error::depth(bound, current_prefix(&stack)));
                    }
                    stack.push(Frame { children, next: 0 });
                }
            }
        }
        let Some(top) = stack.last_mut() else { break };
        if top.next < top.children.len() {
            current = Some(top.children[top.next].clone());
            top.next += 1;
        } else {
            stack.pop();
        }
    }
    Ok(())
}

/// Counts total, accepting and rejecting paths of `machine` on `input` by
/// full traversal.
pub fn path_counts(machine: &dyn Machine, input: &str) -> Result<PathCounts> {
    let root = machine.root(input)?;
    let (mut acc, mut rej) = (0u64, 0u64);
    for_each_leaf(root, machine.depth_bound(), |_, v| match v {
        Verdict::Accept => acc += 1,
        Verdict::Reject => rej += 1,
    })?;
    Ok(PathCounts {
        total: BigUint::from(acc) + BigUint::from(rej),
        accepting: BigUint::from(acc),
        rejecting: BigUint::from(rej),
    })
}

/// The path obtained by always descending into child 0, root first.
pub fn leftmost_path(machine: &dyn Machine, input: &str) -> Result<Vec<Node>> {
    let bound = machine.depth_bound();
    let mut node = machine.root(input)?;
    let mut path = Vec::new();
    loop {
        path.push(node.clone());
        match node.expand()? {
            Expansion::Leaf(_) => return Ok(path),
            Expansion::Branch(mut children) => {
                let depth = path.len() - 1;
                if children.is_empty() {
                    return Err(Error::EmptyBranch(PathPrefix(vec![0; depth])));
                }
                if depth >= bound {
                    return Err(Error::depth(bound, vec![0; depth]));
                }
                node = children.swap_remove(0);
            }
        }
    }
}

/// True iff every node below `node` has at most one successor, i.e. the
/// subtree is a single path. `depth_budget` bounds how far the walk may
/// descend.
pub fn is_deterministic_subtree(node: &Node, depth_budget: usize) -> Result<bool> {
    let mut node = node.clone();
    let mut depth = 0;
    loop {
        match node.expand()? {
            Expansion::Leaf(_) => return Ok(true),
            Expansion::Branch(mut children) => match children.len() {
                0 => return Err(Error::EmptyBranch(PathPrefix(vec![0; depth]))),
                1 => {
                    if depth >= depth_budget {
                        return Err(Error::depth(depth_budget, vec![0; depth]));
                    }
                    node = children.pop().expect("one child");
                    depth += 1;
                }
                _ => return Ok(false),
            },
        }
    }
}

/// Deterministic simulation of every path, counting path ends. Returns
/// total paths minus one.
///
/// This is a separate, recursive walk from [`path_counts`]; the two must
/// agree on every machine.
pub fn evaluate_poly_bounded(machine: &dyn Machine, input: &str) -> Result<BigUint> {
    fn walk(node: &Node, depth: usize, bound: usize, counter: &mut u64) -> Result<()> {
        match node.expand()? {
            Expansion::Leaf(_) => {
                *counter += 1;
                Ok(())
            }
            Expansion::Branch(children) => {
                if children.is_empty() {
                    return Err(Error::EmptyBranch(PathPrefix::default()));
                }
                if depth >= bound {
                    return Err(Error::depth(bound, Vec::new()));
                }
                children
                    .iter()
                    .try_for_each(|c| walk(c, depth + 1, bound, counter))
            }
        }
    }
    let mut counter = 0u64;
    walk(&machine.root(input)?, 0, machine.depth_bound(), &mut counter)?;
    Ok(BigUint::from(counter) - BigUint::one())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn acc() -> MachineRef {
        leaf(Verdict::Accept)
    }

    fn rej() -> MachineRef {
        leaf(Verdict::Reject)
    }

    #[test]
    fn single_accepting_leaf() {
        let c = path_counts(acc().as_ref(), "").unwrap();
        assert_eq!(c.total, 1u32.into());
        assert_eq!(c.accepting, 1u32.into());
        assert_eq!(c.rejecting, 0u32.into());
        assert_eq!(c.tot(), 0u32.into());
        assert_eq!(c.to_string(), "total=1 acc=1 rej=0 tot=0 gap=1");
    }

    #[test]
    fn branch_over_two_accepting_leaves() {
        let m = branch(vec![acc(), acc()]).unwrap();
        let c = path_counts(m.as_ref(), "").unwrap();
        assert_eq!(c.total, 2u32.into());
        assert_eq!(c.accepting, 2u32.into());
        assert_eq!(c.tot(), 1u32.into());
        assert_eq!(c.gap(), 2.into());
    }

    #[test]
    fn gap_can_be_negative() {
        let m = branch(vec![rej(), rej(), acc()]).unwrap();
        assert_eq!(path_counts(m.as_ref(), "").unwrap().gap(), (-1).into());
    }

    #[test]
    fn leftmost_path_lengths() {
        assert_eq!(leftmost_path(acc().as_ref(), "").unwrap().len(), 1);
        let d1 = branch(vec![acc(), rej()]).unwrap();
        let d2 = branch(vec![d1.clone(), d1]).unwrap();
        let path = leftmost_path(d2.as_ref(), "").unwrap();
        assert_eq!(path.len(), 3);
        assert_eq!(path[2].verdict().unwrap(), Some(Verdict::Accept));
    }

    #[test]
    fn determinism_of_subtrees() {
        assert!(is_deterministic_subtree(&Node::leaf(Verdict::Reject), 0).unwrap());
        let two = Node::branch(vec![Node::leaf(Verdict::Accept), Node::leaf(Verdict::Reject)]);
        assert!(!is_deterministic_subtree(&two, 5).unwrap());
        let mut chain = Node::leaf(Verdict::Accept);
        for _ in 0..5 {
            chain = Node::branch(vec![chain]);
        }
        assert!(is_deterministic_subtree(&chain, 5).unwrap());
        assert!(matches!(
            is_deterministic_subtree(&chain, 4),
            Err(Error::DepthExceeded { .. })
        ));
    }

    #[derive(Debug)]
    struct Lying(MachineRef);

    impl Machine for Lying {
        fn kind(&self) -> MachineKind {
            MachineKind::CombinatorWrapper
        }
        fn depth_bound(&self) -> usize {
            1
        }
        fn fanout_bound(&self) -> usize {
            2
        }
        fn root(&self, input: &str) -> Result<Node> {
            self.0.root(input)
        }
    }

    #[test]
    fn depth_bound_violation_names_prefix() {
        let inner = branch(vec![acc(), branch(vec![rej(), acc()]).unwrap()]).unwrap();
        let m = Lying(inner);
        match path_counts(&m, "") {
            Err(Error::DepthExceeded { bound, prefix }) => {
                assert_eq!(bound, 1);
                assert_eq!(prefix, PathPrefix(vec![1]));
            }
            other => panic!("expected depth error, got {other:?}"),
        }
        assert!(evaluate_poly_bounded(&m, "").is_err());
    }

    #[test]
    fn poly_bounded_evaluation() {
        // U_totP-style: two paths on yes-instances.
        let m = branch(vec![acc(), rej()]).unwrap();
        assert_eq!(evaluate_poly_bounded(m.as_ref(), "").unwrap(), 1u32.into());
        assert_eq!(evaluate_poly_bounded(acc().as_ref(), "").unwrap(), 0u32.into());
    }

    #[test]
    fn empty_branch_is_rejected() {
        assert!(BranchMachine::new(vec![]).is_err());
        let m = Lying(Arc::new(Bare));
        assert!(matches!(path_counts(&m, ""), Err(Error::EmptyBranch(_))));
    }

    #[derive(Debug)]
    struct Bare;

    impl Machine for Bare {
        fn kind(&self) -> MachineKind {
            MachineKind::Branch
        }
        fn depth_bound(&self) -> usize {
            1
        }
        fn fanout_bound(&self) -> usize {
            0
        }
        fn root(&self, _input: &str) -> Result<Node> {
            Ok(Node::branch(vec![]))
        }
    }
}
