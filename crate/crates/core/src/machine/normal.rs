use std::sync::Arc;

use super::{for_each_leaf, Expansion, Machine, MachineKind, MachineRef, Node, TreeNode, Verdict};
use crate::error::{Error, Result};

/// Rewrites a machine so that every internal node has exactly two
/// successors.
///
/// Unary nodes are contracted. A node with `b > 2` successors becomes a
/// right-leaning cascade of `b - 1` binary nodes. Leaves and their
/// left-to-right order are unchanged.
pub fn binarize(machine: MachineRef) -> MachineRef {
    Arc::new(Binarized { inner: machine })
}

#[derive(Debug)]
struct Binarized {
    inner: MachineRef,
}

impl Machine for Binarized {
    fn kind(&self) -> MachineKind {
        MachineKind::CombinatorWrapper
    }

    fn depth_bound(&self) -> usize {
        let fanout = self.inner.fanout_bound();
        if fanout <= 1 {
            0
        } else {
            self.inner.depth_bound() * (fanout - 1)
        }
    }

    fn fanout_bound(&self) -> usize {
        2
    }

    fn root(&self, input: &str) -> Result<Node> {
        Ok(Node::new(BinNode::Wrap {
            node: self.inner.root(input)?,
            budget: self.inner.depth_bound(),
        }))
    }
}

enum BinNode {
    /// An original node with the remaining depth allowed below it.
    Wrap { node: Node, budget: usize },
    /// The tail of a wide node's successor list, at least two entries.
    Cascade { rest: Vec<Node>, budget: usize },
}

fn split(mut children: Vec<Node>, budget: usize) -> Vec<Node> {
    debug_assert!(children.len() >= 2);
    let first = children.remove(0);
    let left = Node::new(BinNode::Wrap { node: first, budget });
    let right = if children.len() == 1 {
        Node::new(BinNode::Wrap {
            node: children.pop().expect("one child"),
            budget,
        })
    } else {
        Node::new(BinNode::Cascade {
            rest: children,
            budget,
        })
    };
    vec![left, right]
}

impl TreeNode for BinNode {
    fn expand(&self) -> Result<Expansion> {
        match self {
            BinNode::Cascade { rest, budget } => Ok(Expansion::Branch(split(rest.clone(), *budget))),
            BinNode::Wrap { node, budget } => {
                let mut node = node.clone();
                let mut budget = *budget;
                loop {
                    match node.expand()? {
                        Expansion::Leaf(v) => return Ok(Expansion::Leaf(v)),
                        Expansion::Branch(mut children) => {
                            if budget == 0 {
                                return Err(Error::depth(0, Vec::new()));
                            }
                            budget -= 1;
                            match children.len() {
                                0 => return Err(Error::EmptyBranch(Default::default())),
                                1 => node = children.pop().expect("one child"),
                                _ => return Ok(Expansion::Branch(split(children, budget))),
                            }
                        }
                    }
                }
            }
        }
    }
}

/// Embeds `binarize(machine)` into the perfect binary tree of depth `p`.
///
/// A leaf found at depth `d <= p` is placed at the leftmost depth-`p` slot
/// below it and the remaining `2^(p-d) - 1` slots become rejecting leaves,
/// so accepting paths are preserved and the total is exactly `2^p`. If the
/// binarized tree is deeper than `p` on some input, evaluation on that
/// input fails with [`Error::Normalization`].
pub fn normalize_perfect(machine: MachineRef, p: usize) -> MachineRef {
    Arc::new(Normalized {
        inner: binarize(machine),
        p,
    })
}

/// Eagerly checks the precondition of [`normalize_perfect`] on one input.
pub fn check_normalizable(machine: &MachineRef, p: usize, input: &str) -> Result<()> {
    let bin = binarize(machine.clone());
    let mut deepest = 0usize;
    for_each_leaf(bin.root(input)?, bin.depth_bound(), |prefix, _| {
        deepest = deepest.max(prefix.len())
    })?;
    if deepest > p {
        return Err(Error::Normalization(format!(
            "binarized tree has depth {deepest}, larger than p = {p}"
        )));
    }
    Ok(())
}

#[derive(Debug)]
struct Normalized {
    inner: MachineRef,
    p: usize,
}

impl Machine for Normalized {
    fn kind(&self) -> MachineKind {
        MachineKind::CombinatorWrapper
    }

    fn depth_bound(&self) -> usize {
        self.p
    }

    fn fanout_bound(&self) -> usize {
        2
    }

    fn root(&self, input: &str) -> Result<Node> {
        Ok(Node::new(NormNode::Real {
            node: self.inner.root(input)?,
            remaining: self.p,
            p: self.p,
        }))
    }
}

enum NormNode {
    Real { node: Node, remaining: usize, p: usize },
    /// Perfect padding subtree whose leftmost leaf carries `verdict` and
    /// whose other leaves reject.
    Pad { verdict: Verdict, remaining: usize },
}

fn pad(verdict: Verdict, remaining: usize) -> Expansion {
    if remaining == 0 {
        Expansion::Leaf(verdict)
    } else {
        Expansion::Branch(vec![
            Node::new(NormNode::Pad {
                verdict,
                remaining: remaining - 1,
            }),
            Node::new(NormNode::Pad {
                verdict: Verdict::Reject,
                remaining: remaining - 1,
            }),
        ])
    }
}

impl TreeNode for NormNode {
    fn expand(&self) -> Result<Expansion> {
        match self {
            NormNode::Pad { verdict, remaining } => Ok(pad(*verdict, *remaining)),
            NormNode::Real { node, remaining, p } => match node.expand()? {
                Expansion::Leaf(v) => Ok(pad(v, *remaining)),
                Expansion::Branch(children) => {
                    if *remaining == 0 {
                        return Err(Error::Normalization(format!(
                            "binarized tree is deeper than p = {p}"
                        )));
                    }
                    Ok(Expansion::Branch(
                        children
                            .into_iter()
                            .map(|c| {
                                Node::new(NormNode::Real {
                                    node: c,
                                    remaining: remaining - 1,
                                    p: *p,
                                })
                            })
                            .collect(),
                    ))
                }
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{branch, leaf, leftmost_path, path_counts};

    fn a() -> MachineRef {
        leaf(Verdict::Accept)
    }

    fn r() -> MachineRef {
        leaf(Verdict::Reject)
    }

    fn verdicts(m: &dyn Machine) -> Vec<(usize, Verdict)> {
        let mut out = Vec::new();
        for_each_leaf(m.root("").unwrap(), m.depth_bound(), |p, v| out.push((p.len(), v))).unwrap();
        out
    }

    #[test]
    fn three_way_branch_becomes_nested_binary() {
        let m = branch(vec![a(), r(), a()]).unwrap();
        let b = binarize(m.clone());
        let leaves = verdicts(b.as_ref());
        assert_eq!(
            leaves,
            vec![(1, Verdict::Accept), (2, Verdict::Reject), (2, Verdict::Accept)]
        );
        assert_eq!(path_counts(b.as_ref(), "").unwrap(), path_counts(m.as_ref(), "").unwrap());
    }

    #[test]
    fn unary_chains_are_contracted() {
        let m = branch(vec![branch(vec![branch(vec![a(), r()]).unwrap()]).unwrap()]).unwrap();
        let b = binarize(m);
        assert_eq!(verdicts(b.as_ref()), vec![(1, Verdict::Accept), (1, Verdict::Reject)]);
        assert_eq!(leftmost_path(b.as_ref(), "").unwrap().len(), 2);
    }

    #[test]
    fn normalize_single_leaf() {
        let n = normalize_perfect(a(), 2);
        let c = path_counts(n.as_ref(), "").unwrap();
        assert_eq!(c.total, 4u32.into());
        assert_eq!(c.accepting, 1u32.into());
        assert_eq!(c.tot(), 3u32.into());
    }

    #[test]
    fn normalize_places_leaves_leftmost() {
        // acc 3 / rej 1
        let m = branch(vec![a(), a(), r(), a()]).unwrap();
        let n = normalize_perfect(m, 3);
        let leaves = verdicts(n.as_ref());
        assert_eq!(leaves.len(), 8);
        assert!(leaves.iter().all(|(d, _)| *d == 3));
        let acc = leaves.iter().filter(|(_, v)| v.accepts()).count();
        assert_eq!(acc, 3);
        // binarized: a at depth 1 -> slots 0..4, a at depth 2 -> slots 4..6,
        // r/a at depth 3 -> slots 6, 7
        let pattern: Vec<bool> = leaves.iter().map(|(_, v)| v.accepts()).collect();
        assert_eq!(pattern, vec![true, false, false, false, true, false, false, true]);
    }

    #[test]
    fn normalize_rejects_small_p() {
        let m = branch(vec![a(), a(), r(), a()]).unwrap();
        assert!(matches!(
            path_counts(normalize_perfect(m.clone(), 2).as_ref(), ""),
            Err(Error::Normalization(_))
        ));
        assert!(check_normalizable(&m, 2, "").is_err());
        assert!(check_normalizable(&m, 3, "").is_ok());
    }
}
