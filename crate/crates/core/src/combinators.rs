//! Machine transformations with exact path-count contracts.
//!
//! Every combinator wraps its operands lazily: the output tree is produced
//! node by node from the operand trees, the way a simulating machine would
//! run its operands and modify their computation.
//!
//! Writing `tot(M)` for total paths minus one and `acc(M)` for accepting
//! paths, the contracts are:
//!
//! | combinator               | contract                                   |
//! |--------------------------|--------------------------------------------|
//! | [`subtract_one`]         | `tot = max(tot(M) - 1, 0)`                 |
//! | [`add`]                  | `tot = tot(A) + tot(B)`                    |
//! | [`multiply`]             | `tot = tot(A) * tot(B)`                    |
//! | [`seq`]                  | `total = total(A) * total(B)`              |
//! | [`double_accepting`]     | `tot - tot(M) = acc(M)`                    |
//! | [`mark_leftmost_reject`] | `acc = tot(M)`                             |
//! | [`acc_to_tot_modk`]      | `tot = acc(M) + k * rej(M)`                |

use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_traits::One;

use crate::error::{Error, Result};
use crate::machine::{
    check_normalizable, is_deterministic_subtree, normalize_perfect, path_counts, Expansion,
    Machine, MachineKind, MachineRef, Node, TreeNode, Verdict,
};

// ---------------------------------------------------------------------------
// Subtraction by one

/// Removes one path, unless the machine already has a single path.
///
/// Walking the leftmost path, the first node with two or more successors
/// that has a successor whose subtree is a single path loses that
/// successor (the first such successor in child order). The deepest
/// branching node on the leftmost path always qualifies, so exactly one
/// path disappears whenever there was more than one. A node left with one
/// successor stays unary.
pub fn subtract_one(machine: MachineRef) -> MachineRef {
    Arc::new(SubtractOne { inner: machine })
}

#[derive(Debug)]
struct SubtractOne {
    inner: MachineRef,
}

impl Machine for SubtractOne {
    fn kind(&self) -> MachineKind {
        MachineKind::CombinatorWrapper
    }

    fn depth_bound(&self) -> usize {
        self.inner.depth_bound()
    }

    fn fanout_bound(&self) -> usize {
        self.inner.fanout_bound()
    }

    fn root(&self, input: &str) -> Result<Node> {
        Ok(subtract_one_node(
            self.inner.root(input)?,
            self.inner.depth_bound(),
        ))
    }
}

fn subtract_one_node(node: Node, budget: usize) -> Node {
    Node::new(LeftmostTrim { node, budget })
}

/// A node on the leftmost path that has not yet seen the removal.
struct LeftmostTrim {
    node: Node,
    budget: usize,
}

impl TreeNode for LeftmostTrim {
    fn expand(&self) -> Result<Expansion> {
        let mut children = match self.node.expand()? {
            leaf @ Expansion::Leaf(_) => return Ok(leaf),
            Expansion::Branch(children) => children,
        };
        if children.is_empty() {
            return Err(Error::EmptyBranch(Default::default()));
        }
        if self.budget == 0 {
            return Err(Error::depth(0, Vec::new()));
        }
        let below = self.budget - 1;
        if children.len() >= 2 {
            for i in 0..children.len() {
                if is_deterministic_subtree(&children[i], below)? {
                    children.remove(i);
                    return Ok(Expansion::Branch(children));
                }
            }
        }
        children[0] = subtract_one_node(children[0].clone(), below);
        Ok(Expansion::Branch(children))
    }
}

fn single_path(machine: &dyn Machine, root: &Node) -> Result<bool> {
    is_deterministic_subtree(root, machine.depth_bound())
}

// ---------------------------------------------------------------------------
// Addition

/// `tot(add(A, B)) = tot(A) + tot(B)`.
///
/// If either operand has a single path the other is simulated unchanged;
/// otherwise the root branches into `subtract_one(A)` and `B`, for
/// `tot(A) + tot(B) + 1` paths.
pub fn add(a: MachineRef, b: MachineRef) -> MachineRef {
    Arc::new(Add { a, b })
}

#[derive(Debug)]
struct Add {
    a: MachineRef,
    b: MachineRef,
}

impl Machine for Add {
    fn kind(&self) -> MachineKind {
        MachineKind::CombinatorWrapper
    }

    fn depth_bound(&self) -> usize {
        1 + self.a.depth_bound().max(self.b.depth_bound())
    }

    fn fanout_bound(&self) -> usize {
        2.max(self.a.fanout_bound()).max(self.b.fanout_bound())
    }

    fn root(&self, input: &str) -> Result<Node> {
        let ra = self.a.root(input)?;
        let rb = self.b.root(input)?;
        if single_path(self.a.as_ref(), &ra)? {
            return Ok(rb);
        }
        if single_path(self.b.as_ref(), &rb)? {
            return Ok(ra);
        }
        Ok(Node::branch(vec![
            subtract_one_node(ra, self.a.depth_bound()),
            rb,
        ]))
    }
}

// ---------------------------------------------------------------------------
// Sequential composition

/// Replaces every leaf of `A`'s tree with a copy of `B`'s tree.
///
/// `total = total(A) * total(B)`; a composed leaf accepts iff both the
/// replaced `A` leaf and the `B` leaf accept.
pub fn seq(a: MachineRef, b: MachineRef) -> MachineRef {
    Arc::new(Seq { a, b })
}

#[derive(Debug)]
struct Seq {
    a: MachineRef,
    b: MachineRef,
}

impl Machine for Seq {
    fn kind(&self) -> MachineKind {
        MachineKind::CombinatorWrapper
    }

    fn depth_bound(&self) -> usize {
        self.a.depth_bound() + self.b.depth_bound() + 1
    }

    fn fanout_bound(&self) -> usize {
        self.a.fanout_bound().max(self.b.fanout_bound())
    }

    fn root(&self, input: &str) -> Result<Node> {
        Ok(Node::new(SeqNode::First {
            node: self.a.root(input)?,
            second: self.b.clone(),
            input: Arc::from(input),
        }))
    }
}

enum SeqNode {
    First {
        node: Node,
        second: MachineRef,
        input: Arc<str>,
    },
    Second {
        first_verdict: Verdict,
        node: Node,
    },
}

impl TreeNode for SeqNode {
    fn expand(&self) -> Result<Expansion> {
        match self {
            SeqNode::First {
                node,
                second,
                input,
            } => match node.expand()? {
                Expansion::Leaf(v) => SeqNode::Second {
                    first_verdict: v,
                    node: second.root(input)?,
                }
                .expand(),
                Expansion::Branch(children) => Ok(Expansion::Branch(
                    children
                        .into_iter()
                        .map(|c| {
                            Node::new(SeqNode::First {
                                node: c,
                                second: second.clone(),
                                input: input.clone(),
                            })
                        })
                        .collect(),
                )),
            },
            SeqNode::Second {
                first_verdict,
                node,
            } => Ok(match node.expand()? {
                Expansion::Leaf(w) => Expansion::Leaf(first_verdict.and(w)),
                Expansion::Branch(children) => Expansion::Branch(
                    children
                        .into_iter()
                        .map(|c| {
                            Node::new(SeqNode::Second {
                                first_verdict: *first_verdict,
                                node: c,
                            })
                        })
                        .collect(),
                ),
            }),
        }
    }
}

// ---------------------------------------------------------------------------
// Multiplication

/// `tot(multiply(A, B)) = tot(A) * tot(B)`.
///
/// If either operand has a single path the result is a single rejecting
/// path. Otherwise the root branches into a rejecting dummy leaf (child 0)
/// and `seq(subtract_one(A), subtract_one(B))`.
pub fn multiply(a: MachineRef, b: MachineRef) -> MachineRef {
    let product = seq(subtract_one(a.clone()), subtract_one(b.clone()));
    Arc::new(Multiply { a, b, product })
}

#[derive(Debug)]
struct Multiply {
    a: MachineRef,
    b: MachineRef,
    product: MachineRef,
}

impl Machine for Multiply {
    fn kind(&self) -> MachineKind {
        MachineKind::CombinatorWrapper
    }

    fn depth_bound(&self) -> usize {
        self.a.depth_bound() + self.b.depth_bound() + 1
    }

    fn fanout_bound(&self) -> usize {
        2.max(self.product.fanout_bound())
    }

    fn root(&self, input: &str) -> Result<Node> {
        let ra = self.a.root(input)?;
        let rb = self.b.root(input)?;
        if single_path(self.a.as_ref(), &ra)? || single_path(self.b.as_ref(), &rb)? {
            return Ok(Node::leaf(Verdict::Reject));
        }
        Ok(Node::branch(vec![
            Node::leaf(Verdict::Reject),
            self.product.root(input)?,
        ]))
    }
}

// ---------------------------------------------------------------------------
// Leaf rewrites

/// Each accepting leaf becomes a branch over two accepting leaves.
pub fn double_accepting(machine: MachineRef) -> MachineRef {
    Arc::new(LeafRewrite {
        inner: machine,
        rule: Rewrite::DoubleAccepting,
    })
}

/// Each rejecting leaf becomes a `k`-way branch of rejecting leaves and a
/// rejecting dummy leaf is added at child index 0 of a new root, so
/// `total = acc + k * rej + 1` and `tot ≡ acc (mod k)`.
///
/// With `k = 2` this is the parity conversion from accepting to total
/// paths.
pub fn acc_to_tot_modk(machine: MachineRef, k: usize) -> Result<MachineRef> {
    if k < 2 {
        return Err(Error::Parameter(format!("modulus k must be at least 2, got {k}")));
    }
    Ok(Arc::new(LeafRewrite {
        inner: machine,
        rule: Rewrite::MultiplyRejecting(k),
    }))
}

#[derive(Debug, Clone, Copy)]
enum Rewrite {
    DoubleAccepting,
    MultiplyRejecting(usize),
}

#[derive(Debug)]
struct LeafRewrite {
    inner: MachineRef,
    rule: Rewrite,
}

impl Machine for LeafRewrite {
    fn kind(&self) -> MachineKind {
        MachineKind::CombinatorWrapper
    }

    fn depth_bound(&self) -> usize {
        match self.rule {
            Rewrite::DoubleAccepting => self.inner.depth_bound() + 1,
            // extra root for the dummy path plus the k-way expansion
            Rewrite::MultiplyRejecting(_) => self.inner.depth_bound() + 2,
        }
    }

    fn fanout_bound(&self) -> usize {
        let width = match self.rule {
            Rewrite::DoubleAccepting => 2,
            Rewrite::MultiplyRejecting(k) => k.max(2),
        };
        width.max(self.inner.fanout_bound())
    }

    fn root(&self, input: &str) -> Result<Node> {
        let rewritten = Node::new(RewriteNode {
            node: self.inner.root(input)?,
            rule: self.rule,
        });
        Ok(match self.rule {
            Rewrite::DoubleAccepting => rewritten,
            Rewrite::MultiplyRejecting(_) => {
                Node::branch(vec![Node::leaf(Verdict::Reject), rewritten])
            }
        })
    }
}

struct RewriteNode {
    node: Node,
    rule: Rewrite,
}

impl TreeNode for RewriteNode {
    fn expand(&self) -> Result<Expansion> {
        Ok(match (self.node.expand()?, self.rule) {
            (Expansion::Leaf(Verdict::Accept), Rewrite::DoubleAccepting) => Expansion::Branch(
                vec![Node::leaf(Verdict::Accept), Node::leaf(Verdict::Accept)],
            ),
            (Expansion::Leaf(Verdict::Reject), Rewrite::MultiplyRejecting(k)) => {
                Expansion::Branch(vec![Node::leaf(Verdict::Reject); k])
            }
            (leaf @ Expansion::Leaf(_), _) => leaf,
            (Expansion::Branch(children), rule) => Expansion::Branch(
                children
                    .into_iter()
                    .map(|node| Node::new(RewriteNode { node, rule }))
                    .collect(),
            ),
        })
    }
}

/// Same tree shape; the leftmost leaf rejects and every other leaf
/// accepts, so `acc = tot(M)`.
pub fn mark_leftmost_reject(machine: MachineRef) -> MachineRef {
    Arc::new(MarkLeftmost { inner: machine })
}

#[derive(Debug)]
struct MarkLeftmost {
    inner: MachineRef,
}

impl Machine for MarkLeftmost {
    fn kind(&self) -> MachineKind {
        MachineKind::CombinatorWrapper
    }

    fn depth_bound(&self) -> usize {
        self.inner.depth_bound()
    }

    fn fanout_bound(&self) -> usize {
        self.inner.fanout_bound()
    }

    fn root(&self, input: &str) -> Result<Node> {
        Ok(Node::new(MarkNode {
            node: self.inner.root(input)?,
            leftmost: true,
        }))
    }
}

struct MarkNode {
    node: Node,
    leftmost: bool,
}

impl TreeNode for MarkNode {
    fn expand(&self) -> Result<Expansion> {
        Ok(match self.node.expand()? {
            Expansion::Leaf(_) if self.leftmost => Expansion::Leaf(Verdict::Reject),
            Expansion::Leaf(_) => Expansion::Leaf(Verdict::Accept),
            Expansion::Branch(children) => Expansion::Branch(
                children
                    .into_iter()
                    .enumerate()
                    .map(|(i, node)| {
                        Node::new(MarkNode {
                            node,
                            leftmost: self.leftmost && i == 0,
                        })
                    })
                    .collect(),
            ),
        })
    }
}

// ---------------------------------------------------------------------------
// Gap functions

/// The integer function `tot(plus) - tot(minus)`.
#[derive(Debug, Clone)]
pub struct GapPair {
    pub plus: MachineRef,
    pub minus: MachineRef,
}

impl GapPair {
    pub fn evaluate(&self, input: &str) -> Result<BigInt> {
        let plus = path_counts(self.plus.as_ref(), input)?.tot();
        let minus = path_counts(self.minus.as_ref(), input)?.tot();
        Ok(BigInt::from(plus) - BigInt::from(minus))
    }
}

/// Expresses `acc(N) - acc(M)` as a difference of two total-path
/// functions: `plus = add(double_accepting(N), M)` and
/// `minus = add(N, double_accepting(M))`.
pub fn gap_decompose(n: MachineRef, m: MachineRef) -> GapPair {
    GapPair {
        plus: add(double_accepting(n.clone()), m.clone()),
        minus: add(n, double_accepting(m)),
    }
}

/// Rewrites `gval - acc(M)` as `g' - tot(M'')` where
/// `g' = gval + 2^p - 1` and `M'' = double_accepting(normalize_perfect(M, p))`.
///
/// The normal form is checked eagerly on `input`.
pub fn fp_gap_normalize(
    gval: &BigInt,
    machine: MachineRef,
    p: usize,
    input: &str,
) -> Result<(BigInt, MachineRef)> {
    check_normalizable(&machine, p, input)?;
    let shift = (BigUint::one() << p) - BigUint::one();
    Ok((
        gval + BigInt::from(shift),
        double_accepting(normalize_perfect(machine, p)),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{branch, leaf, leftmost_path};

    fn a() -> MachineRef {
        leaf(Verdict::Accept)
    }

    fn r() -> MachineRef {
        leaf(Verdict::Reject)
    }

    fn fan(n: usize, v: Verdict) -> MachineRef {
        branch((0..n).map(|_| leaf(v)).collect()).unwrap()
    }

    fn tot(m: &MachineRef) -> u64 {
        path_counts(m.as_ref(), "").unwrap().tot().try_into().unwrap()
    }

    fn acc(m: &MachineRef) -> u64 {
        path_counts(m.as_ref(), "").unwrap().accepting.try_into().unwrap()
    }

    /// tot 13: three subtrees of 4, 5 and 5 leaves.
    fn tot13() -> MachineRef {
        branch(vec![
            branch(vec![fan(2, Verdict::Accept), fan(2, Verdict::Reject)]).unwrap(),
            branch(vec![a(), fan(4, Verdict::Reject)]).unwrap(),
            fan(5, Verdict::Accept),
        ])
        .unwrap()
    }

    #[test]
    fn subtract_one_examples() {
        assert_eq!(tot(&subtract_one(a())), 0);
        let m = branch(vec![a(), r()]).unwrap();
        assert_eq!(tot(&subtract_one(m)), 0);
        assert_eq!(tot(&tot13()), 13);
        assert_eq!(tot(&subtract_one(tot13())), 12);
    }

    #[test]
    fn subtract_one_removes_first_deterministic_child() {
        // root: [BR(BR(a,r), a), r]; leftmost walk: root has child 1 = leaf
        // (deterministic) -> removed, leaving a unary root.
        let m = branch(vec![branch(vec![fan(2, Verdict::Accept), r()]).unwrap(), r()]).unwrap();
        let s = subtract_one(m);
        let root = s.root("").unwrap();
        assert_eq!(root.successors().unwrap().len(), 1);
        assert_eq!(tot(&s), 2);
        assert_eq!(leftmost_path(s.as_ref(), "").unwrap().len(), 4);
    }

    #[test]
    fn add_examples() {
        assert_eq!(tot(&add(a(), r())), 0);
        assert_eq!(tot(&add(fan(2, Verdict::Accept), a())), 1);
        assert_eq!(tot(&add(fan(6, Verdict::Accept), fan(8, Verdict::Reject))), 12);
    }

    #[test]
    fn seq_examples() {
        let b = fan(3, Verdict::Accept);
        assert_eq!(tot(&seq(a(), b.clone())), tot(&b));
        let s = seq(fan(2, Verdict::Accept), b);
        let c = path_counts(s.as_ref(), "").unwrap();
        assert_eq!(c.total, 6u32.into());
        let mixed = seq(branch(vec![a(), r()]).unwrap(), fan(3, Verdict::Accept));
        assert_eq!(acc(&mixed), 3);
    }

    #[test]
    fn multiply_examples() {
        assert_eq!(tot(&multiply(a(), fan(5, Verdict::Accept))), 0);
        assert_eq!(tot(&multiply(fan(2, Verdict::Reject), fan(2, Verdict::Accept))), 1);
        assert_eq!(tot(&multiply(fan(4, Verdict::Accept), fan(5, Verdict::Reject))), 12);
    }

    #[test]
    fn double_accepting_examples() {
        assert_eq!(tot(&double_accepting(fan(3, Verdict::Reject))), 2);
        let d = double_accepting(a());
        assert_eq!(path_counts(d.as_ref(), "").unwrap().total, 2u32.into());
        assert_eq!(tot(&d), 1);
        let m = branch(vec![fan(4, Verdict::Accept), fan(3, Verdict::Reject)]).unwrap();
        assert_eq!(tot(&double_accepting(m.clone())) - tot(&m), 4);
    }

    #[test]
    fn mark_leftmost_examples() {
        assert_eq!(acc(&mark_leftmost_reject(a())), 0);
        assert_eq!(acc(&mark_leftmost_reject(fan(2, Verdict::Reject))), 1);
        let nine = branch(vec![fan(5, Verdict::Reject), fan(5, Verdict::Accept)]).unwrap();
        assert_eq!(acc(&mark_leftmost_reject(nine)), 9);
    }

    #[test]
    fn modk_examples() {
        let all_acc = fan(4, Verdict::Accept);
        assert_eq!(tot(&acc_to_tot_modk(all_acc, 3).unwrap()), 4);
        let m = branch(vec![fan(5, Verdict::Accept), fan(3, Verdict::Reject)]).unwrap();
        let t = tot(&acc_to_tot_modk(m, 3).unwrap());
        assert_eq!(t, 14);
        assert_eq!(t % 3, 5 % 3);
        assert!(matches!(acc_to_tot_modk(a(), 1), Err(Error::Parameter(_))));
    }

    #[test]
    fn gap_decompose_examples() {
        let three = branch(vec![fan(3, Verdict::Accept), r()]).unwrap();
        let zero = fan(2, Verdict::Reject);
        let four = fan(4, Verdict::Accept);
        let one = branch(vec![a(), r(), r()]).unwrap();
        assert_eq!(gap_decompose(three.clone(), three.clone()).evaluate("").unwrap(), 0.into());
        assert_eq!(gap_decompose(three, zero).evaluate("").unwrap(), 3.into());
        assert_eq!(gap_decompose(one, four).evaluate("").unwrap(), (-3).into());
    }

    #[test]
    fn fp_gap_normalize_examples() {
        let (g, m) = fp_gap_normalize(&0.into(), r(), 2, "").unwrap();
        assert_eq!(g, 3.into());
        assert_eq!(tot(&m), 3);

        let two = branch(vec![a(), r(), a()]).unwrap();
        let (g, m) = fp_gap_normalize(&5.into(), two, 3, "").unwrap();
        assert_eq!(g, 12.into());
        assert_eq!(g - BigInt::from(tot(&m)), 3.into());

        let wide = fan(5, Verdict::Accept);
        assert!(matches!(
            fp_gap_normalize(&0.into(), wide, 2, ""),
            Err(Error::Normalization(_))
        ));
    }
}
