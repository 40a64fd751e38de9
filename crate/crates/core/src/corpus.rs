//! Seeded random corpora of machine expressions and problem instances.
//!
//! Generation is a pure function of the configuration: the same seed always
//! yields the same corpus, on every platform.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::expr::Expr;
use crate::machine::Verdict;
use crate::problems::{Circuit, CnfFormula, DnfFormula, Gate, Graph, Literal, SubtreeInstance};

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusConfig {
    pub seed: u64,
    pub count: usize,
    pub max_depth: usize,
    pub max_fanout: usize,
    /// Chance that a generated tree is wrapped in a depth-preserving
    /// combinator (`SUB1`, `MARKLM`, or `DBLACC` when depth allows).
    pub wrap_probability: f64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            seed: 1,
            count: 1000,
            max_depth: 6,
            max_fanout: 3,
            wrap_probability: 0.25,
        }
    }
}

/// Chance that a non-root node below the depth limit is a leaf.
const LEAF_PROBABILITY: f64 = 0.4;
/// Chance that the root itself is a leaf (single-path machines).
const ROOT_LEAF_PROBABILITY: f64 = 0.04;

/// A deterministic generator keyed by the corpus seed and a stream number,
/// so that independent suites draw independent sequences.
pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Nesting depth of an expression's tree, counted in edges, assuming `LEAF`
/// and `BR` semantics plus the depth effect of each wrapper.
pub fn expr_depth(e: &Expr) -> usize {
    match e {
        Expr::Leaf(_) | Expr::Prob(_) => 0,
        Expr::Branch(cs) => 1 + cs.iter().map(expr_depth).max().unwrap_or(0),
        Expr::Sub1(x) | Expr::MarkLm(x) => expr_depth(x),
        Expr::DblAcc(x) => expr_depth(x) + 1,
        Expr::ModK(x, _) => expr_depth(x) + 2,
        Expr::Norm(_, p) => *p,
        Expr::Add(x, y) => 1 + expr_depth(x).max(expr_depth(y)),
        Expr::Mul(x, y) | Expr::Seq(x, y) => expr_depth(x) + expr_depth(y) + 1,
    }
}

fn verdict(rng: &mut impl Rng) -> Verdict {
    if rng.gen_bool(0.5) {
        Verdict::Accept
    } else {
        Verdict::Reject
    }
}

fn tree(rng: &mut impl Rng, depth_left: usize, max_fanout: usize, root: bool) -> Expr {
    let leaf_p = if root { ROOT_LEAF_PROBABILITY } else { LEAF_PROBABILITY };
    if depth_left == 0 || max_fanout == 0 || rng.gen_bool(leaf_p) {
        return Expr::Leaf(verdict(rng));
    }
    let fanout = rng.gen_range(1..=max_fanout);
    Expr::Branch(
        (0..fanout)
            .map(|_| tree(rng, depth_left - 1, max_fanout, false))
            .collect(),
    )
}

/// One random machine expression of depth at most `max_depth`.
pub fn random_machine(rng: &mut impl Rng, cfg: &CorpusConfig) -> Expr {
    let mut e = tree(rng, cfg.max_depth, cfg.max_fanout, true);
    if rng.gen_bool(cfg.wrap_probability) {
        e = match rng.gen_range(0..3) {
            0 => Expr::Sub1(Box::new(e)),
            1 => Expr::MarkLm(Box::new(e)),
            _ if expr_depth(&e) < cfg.max_depth => Expr::DblAcc(Box::new(e)),
            _ => Expr::Sub1(Box::new(e)),
        };
    }
    e
}

/// The machine corpus described by `cfg`.
pub fn generate(cfg: &CorpusConfig) -> Vec<Expr> {
    let mut rng = rng(cfg.seed, 0);
    (0..cfg.count).map(|_| random_machine(&mut rng, cfg)).collect()
}

fn literal(rng: &mut impl Rng, n: usize) -> Literal {
    let v = rng.gen_range(1..=n) as Literal;
    if rng.gen_bool(0.5) {
        v
    } else {
        -v
    }
}

fn clauses(rng: &mut impl Rng, n: usize, m: usize, max_width: usize) -> Vec<Vec<Literal>> {
    (0..m)
        .map(|_| {
            let width = rng.gen_range(1..=max_width.max(1));
            (0..width).map(|_| literal(rng, n)).collect()
        })
        .collect()
}

/// A random CNF formula on `n >= 1` variables with `m` clauses.
pub fn random_cnf(rng: &mut impl Rng, n: usize, m: usize, max_width: usize) -> CnfFormula {
    CnfFormula::new(n, clauses(rng, n, m, max_width)).expect("literals in range")
}

/// A random DNF formula on `n >= 1` variables with `m` terms.
pub fn random_dnf(rng: &mut impl Rng, n: usize, m: usize, max_width: usize) -> DnfFormula {
    DnfFormula::new(n, clauses(rng, n, m, max_width)).expect("literals in range")
}

/// Erdős–Rényi graph on `n` vertices.
pub fn random_graph(rng: &mut impl Rng, n: usize, edge_probability: f64) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(edge_probability) {
                edges.push((u, v));
            }
        }
    }
    Graph::new(n, edges).expect("valid edges")
}

/// Random bipartite graph with sides `0..a` and `a..a+b`, vertex labels
/// shuffled, and the left side declared.
pub fn random_bipartite(rng: &mut impl Rng, a: usize, b: usize, edge_probability: f64) -> Graph {
    let mut labels: Vec<usize> = (0..a + b).collect();
    labels.shuffle(rng);
    let mut edges = Vec::new();
    for u in 0..a {
        for v in a..a + b {
            if rng.gen_bool(edge_probability) {
                edges.push((labels[u], labels[v]));
            }
        }
    }
    Graph::new(a + b, edges)
        .and_then(|g| g.with_bipartition(labels[..a].to_vec()))
        .expect("valid bipartite graph")
}

/// A pruned-tree instance whose predicate kills every prefix containing
/// one of a few random forbidden patterns of two positions.
pub fn random_subtree(rng: &mut impl Rng, depth: usize, patterns: usize) -> SubtreeInstance {
    if depth == 0 {
        return SubtreeInstance::new(0, Circuit::constant(rng.gen_bool(0.9)));
    }
    let mut gates: Vec<Gate> = (0..depth).map(Gate::Bit).collect();
    let mut dead = Vec::new();
    for _ in 0..patterns {
        let i = rng.gen_range(0..depth);
        let j = rng.gen_range(0..depth);
        let lit = |gates: &mut Vec<Gate>, pos: usize, positive: bool| {
            if positive {
                pos
            } else {
                gates.push(Gate::Not(pos));
                gates.len() - 1
            }
        };
        let x = lit(&mut gates, i, rng.gen_bool(0.5));
        let y = lit(&mut gates, j, rng.gen_bool(0.5));
        // absent bits read as false, so require the prefix to reach both
        gates.push(Gate::Has(i.max(j)));
        let has = gates.len() - 1;
        gates.push(Gate::And(vec![x, y, has]));
        dead.push(gates.len() - 1);
    }
    gates.push(Gate::Or(dead));
    gates.push(Gate::Not(gates.len() - 1));
    SubtreeInstance::new(depth, Circuit::new(gates).expect("gates refer backwards"))
}
