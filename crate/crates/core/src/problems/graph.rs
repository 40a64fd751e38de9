//! Simple undirected graphs with exact matching and independent-set
//! counters.

use std::collections::VecDeque;
use std::fmt;

use num_bigint::BigUint;

use super::Caps;
use crate::error::{Error, Result};

/// Hard ceiling imposed by the bitmask representation.
pub const MAX_VERTICES: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    left: Option<Vec<usize>>,
}

impl Graph {
    /// Vertices are `0..n`. Duplicate edges are merged.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n > MAX_VERTICES {
            return Err(Error::Capacity {
                what: "vertex count",
                actual: n,
                limit: MAX_VERTICES,
            });
        }
        let mut normalized = Vec::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Parameter(format!("edge ({u}, {v}) outside 0..{n}")));
            }
            if u == v {
                return Err(Error::Parameter(format!("self-loop at vertex {u}")));
            }
            normalized.push((u.min(v), u.max(v)));
        }
        normalized.sort_unstable();
        normalized.dedup();
        Ok(Graph {
            n,
            edges: normalized,
            left: None,
        })
    }

    /// Declares `left` as one side of a bipartition; every edge must have
    /// exactly one endpoint in it.
    pub fn with_bipartition(mut self, mut left: Vec<usize>) -> Result<Self> {
        left.sort_unstable();
        left.dedup();
        if let Some(&v) = left.iter().find(|&&v| v >= self.n) {
            return Err(Error::Parameter(format!("bipartition vertex {v} out of range")));
        }
        let mask = left.iter().fold(0u64, |m, &v| m | 1 << v);
        if let Some(&(u, v)) = self
            .edges
            .iter()
            .find(|&&(u, v)| (mask >> u & 1) == (mask >> v & 1))
        {
            return Err(Error::Parameter(format!(
                "edge ({u}, {v}) does not cross the declared bipartition"
            )));
        }
        self.left = Some(left);
        Ok(self)
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn bipartition(&self) -> Option<&[usize]> {
        self.left.as_deref()
    }

    /// Neighbourhood bitmasks.
    pub fn adjacency(&self) -> Vec<u64> {
        let mut adj = vec![0u64; self.n];
        for &(u, v) in &self.edges {
            adj[u] |= 1 << v;
            adj[v] |= 1 << u;
        }
        adj
    }

    /// A left side of some bipartition, declared or found by 2-colouring.
    pub fn find_bipartition(&self) -> Option<Vec<usize>> {
        if let Some(left) = &self.left {
            return Some(left.clone());
        }
        let adj = self.adjacency();
        let mut colour = vec![None; self.n];
        for start in 0..self.n {
            if colour[start].is_some() {
                continue;
            }
            colour[start] = Some(false);
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                let c = colour[v].expect("coloured");
                for u in bits(adj[v]) {
                    match colour[u] {
                        None => {
                            colour[u] = Some(!c);
                            queue.push_back(u);
                        }
                        Some(cu) if cu == c => return None,
                        Some(_) => {}
                    }
                }
            }
        }
        Some((0..self.n).filter(|&v| colour[v] == Some(false)).collect())
    }

    /// Line-oriented edge list: header `p edge <n> <m>`, edge lines
    /// `e <u> <v>` (or just `<u> <v>`) with 1-based vertices, optional
    /// bipartition line `b <left vertices...>`, comments starting with `c`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut header: Option<(usize, usize)> = None;
        let mut edges = Vec::new();
        let mut left = None;
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
            let vertex = |s: &str, n: usize| -> Result<usize> {
                let v = number(s)?;
                if v == 0 || v > n {
                    return Err(Error::format(line_no, format!("vertex {v} outside 1..={n}")));
                }
                Ok(v - 1)
            };
            match fields[0] {
                "p" => {
                    if header.is_some() {
                        return Err(Error::format(line_no, "duplicate header"));
                    }
                    if fields.len() != 4 || fields[1] != "edge" {
                        return Err(Error::format(line_no, "expected header \"p edge <n> <m>\""));
                    }
                    header = Some((number(fields[2])?, number(fields[3])?));
                }
                _ if header.is_none() => {
                    return Err(Error::format(line_no, "data before header"));
                }
                "b" => {
                    let (n, _) = header.expect("header");
                    if left.is_some() {
                        return Err(Error::format(line_no, "duplicate bipartition line"));
                    }
                    left = Some(
                        fields[1..]
                            .iter()
                            .map(|s| vertex(s, n))
                            .collect::<Result<Vec<_>>>()?,
                    );
                }
                _ => {
                    let (n, _) = header.expect("header");
                    let pair = if fields[0] == "e" { &fields[1..] } else { &fields[..] };
                    if pair.len() != 2 {
                        return Err(Error::format(line_no, "edge line needs two vertices"));
                    }
                    let (u, v) = (vertex(pair[0], n)?, vertex(pair[1], n)?);
                    if u == v {
                        return Err(Error::format(line_no, "self-loop"));
                    }
                    edges.push((u, v));
                }
            }
        }
        let Some((n, m)) = header else {
            return Err(Error::format(0, "missing \"p edge\" header"));
        };
        if edges.len() != m {
            return Err(Error::format(
                0,
                format!("header declares {m} edges, found {}", edges.len()),
            ));
        }
        let graph = Graph::new(n, edges)?;
        match left {
            Some(left) => graph.with_bipartition(left),
            None => Ok(graph),
        }
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "p edge {} {}", self.n, self.edges.len())?;
        if let Some(left) = &self.left {
            f.write_str("b")?;
            for v in left {
                write!(f, " {}", v + 1)?;
            }
            writeln!(f)?;
        }
        for &(u, v) in &self.edges {
            writeln!(f, "e {} {}", u + 1, v + 1)?;
        }
        Ok(())
    }
}

pub(crate) fn bits(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let v = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(v)
        }
    })
}

pub(crate) fn full_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn check_vertices(g: &Graph, caps: &Caps) -> Result<()> {
    if g.n > caps.max_vertices {
        return Err(Error::Capacity {
            what: "vertex count",
            actual: g.n,
            limit: caps.max_vertices,
        });
    }
    Ok(())
}

/// Number of perfect matchings.
///
/// The smallest uncovered vertex is matched with each of its uncovered
/// neighbours in turn and the rest is counted recursively.
pub fn count_perfect_matchings(g: &Graph, caps: &Caps) -> Result<BigUint> {
    check_vertices(g, caps)?;
    if g.n % 2 == 1 {
        return Ok(BigUint::default());
    }
    fn count(adj: &[u64], uncovered: u64) -> u128 {
        if uncovered == 0 {
            return 1;
        }
        let v = uncovered.trailing_zeros() as usize;
        let rest = uncovered & !(1 << v);
        bits(adj[v] & rest)
            .map(|u| count(adj, rest & !(1 << u)))
            .sum()
    }
    Ok(BigUint::from(count(&g.adjacency(), full_mask(g.n))))
}

/// Number of independent sets of all sizes, the empty set included.
pub fn count_independent_sets(g: &Graph, caps: &Caps) -> Result<BigUint> {
    check_vertices(g, caps)?;
    fn count(adj: &[u64], remaining: u64) -> u128 {
        if remaining == 0 {
            return 1;
        }
        let v = remaining.trailing_zeros() as usize;
        let without = remaining & !(1 << v);
        count(adj, without) + count(adj, without & !adj[v])
    }
    Ok(BigUint::from(count(&g.adjacency(), full_mask(g.n))))
}

const NONE: usize = usize::MAX;

/// Maximum matching of the subgraph induced by `vertices`, via Edmonds'
/// blossom algorithm. Returns the mate of every vertex (`None` if
/// unmatched or outside `vertices`).
pub fn maximum_matching(adj: &[u64], vertices: u64) -> Vec<Option<usize>> {
    let n = adj.len();
    let neighbours: Vec<Vec<usize>> = (0..n)
        .map(|v| {
            if vertices >> v & 1 == 1 {
                bits(adj[v] & vertices).collect()
            } else {
                Vec::new()
            }
        })
        .collect();
    let mut blossom = Blossom {
        adj: neighbours,
        mate: vec![NONE; n],
        parent: vec![NONE; n],
        base: (0..n).collect(),
        used: vec![false; n],
        in_blossom: vec![false; n],
    };
    // greedy start
    for v in 0..n {
        if blossom.mate[v] == NONE {
            if let Some(&u) = blossom.adj[v].iter().find(|&&u| blossom.mate[u] == NONE) {
                blossom.mate[v] = u;
                blossom.mate[u] = v;
            }
        }
    }
    for root in bits(vertices) {
        if blossom.mate[root] == NONE {
            if let Some(end) = blossom.find_path(root) {
                blossom.augment(end);
            }
        }
    }
    blossom
        .mate
        .into_iter()
        .map(|m| (m != NONE).then_some(m))
        .collect()
}

struct Blossom {
    adj: Vec<Vec<usize>>,
    mate: Vec<usize>,
    parent: Vec<usize>,
    base: Vec<usize>,
    used: Vec<bool>,
    in_blossom: Vec<bool>,
}

impl Blossom {
    fn lca(&self, mut a: usize, mut b: usize) -> usize {
        let mut seen = vec![false; self.adj.len()];
        loop {
            a = self.base[a];
            seen[a] = true;
            if self.mate[a] == NONE {
                break;
            }
            a = self.parent[self.mate[a]];
        }
        loop {
            b = self.base[b];
            if seen[b] {
                return b;
            }
            b = self.parent[self.mate[b]];
        }
    }

    fn mark_path(&mut self, mut v: usize, b: usize, mut child: usize) {
        while self.base[v] != b {
            self.in_blossom[self.base[v]] = true;
            self.in_blossom[self.base[self.mate[v]]] = true;
            self.parent[v] = child;
            child = self.mate[v];
            v = self.parent[self.mate[v]];
        }
    }

    fn find_path(&mut self, root: usize) -> Option<usize> {
        let n = self.adj.len();
        self.used.iter_mut().for_each(|u| *u = false);
        self.parent.iter_mut().for_each(|p| *p = NONE);
        for (i, b) in self.base.iter_mut().enumerate() {
            *b = i;
        }
        self.used[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for idx in 0..self.adj[v].len() {
                let to = self.adj[v][idx];
                if self.base[v] == self.base[to] || self.mate[v] == to {
                    continue;
                }
                if to == root || (self.mate[to] != NONE && self.parent[self.mate[to]] != NONE) {
                    let cur = self.lca(v, to);
                    self.in_blossom.iter_mut().for_each(|b| *b = false);
                    self.mark_path(v, cur, to);
                    self.mark_path(to, cur, v);
                    for i in 0..n {
                        if self.in_blossom[self.base[i]] {
                            self.base[i] = cur;
                            if !self.used[i] {
                                self.used[i] = true;
                                queue.push_back(i);
                            }
                        }
                    }
                } else if self.parent[to] == NONE {
                    self.parent[to] = v;
                    if self.mate[to] == NONE {
                        return Some(to);
                    }
                    let next = self.mate[to];
                    self.used[next] = true;
                    queue.push_back(next);
                }
            }
        }
        None
    }

    fn augment(&mut self, mut v: usize) {
        while v != NONE {
            let pv = self.parent[v];
            let next = self.mate[pv];
            self.mate[v] = pv;
            self.mate[pv] = v;
            v = next;
        }
    }
}

/// Whether the subgraph induced by `vertices` has a perfect matching.
pub fn has_perfect_matching_on(adj: &[u64], vertices: u64) -> bool {
    if vertices.count_ones() % 2 == 1 {
        return false;
    }
    let mate = maximum_matching(adj, vertices);
    bits(vertices).all(|v| mate[v].is_some())
}

pub fn has_perfect_matching(g: &Graph) -> bool {
    has_perfect_matching_on(&g.adjacency(), full_mask(g.n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn caps() -> Caps {
        Caps::default()
    }

    fn cycle(n: usize) -> Graph {
        Graph::new(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    fn complete(n: usize) -> Graph {
        Graph::new(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)))).unwrap()
    }

    /// Every subset of edges checked for being a perfect matching.
    fn matchings_by_edge_subsets(g: &Graph) -> usize {
        let m = g.edges().len();
        (0u64..1 << m)
            .filter(|&s| {
                let mut covered = 0u64;
                for i in bits(s) {
                    let (u, v) = g.edges()[i];
                    if covered >> u & 1 == 1 || covered >> v & 1 == 1 {
                        return false;
                    }
                    covered |= 1 << u | 1 << v;
                }
                covered == full_mask(g.vertex_count())
            })
            .count()
    }

    fn independent_by_subsets(g: &Graph) -> usize {
        (0u64..1 << g.vertex_count())
            .filter(|&s| g.edges().iter().all(|&(u, v)| !(s >> u & 1 == 1 && s >> v & 1 == 1)))
            .count()
    }

    #[test]
    fn perfect_matching_examples() {
        assert_eq!(count_perfect_matchings(&cycle(5), &caps()).unwrap(), 0u32.into());
        assert_eq!(count_perfect_matchings(&complete(3), &caps()).unwrap(), 0u32.into());
        assert_eq!(matchings_by_edge_subsets(&complete(4)), 3);
        assert_eq!(count_perfect_matchings(&complete(4), &caps()).unwrap(), 3u32.into());
        assert_eq!(matchings_by_edge_subsets(&cycle(6)), 2);
        assert_eq!(count_perfect_matchings(&cycle(6), &caps()).unwrap(), 2u32.into());
        assert_eq!(count_perfect_matchings(&Graph::new(0, []).unwrap(), &caps()).unwrap(), 1u32.into());
    }

    #[test]
    fn independent_set_examples() {
        let empty = Graph::new(3, []).unwrap();
        assert_eq!(count_independent_sets(&empty, &caps()).unwrap(), 8u32.into());
        let edge = Graph::new(2, [(0, 1)]).unwrap();
        assert_eq!(independent_by_subsets(&edge), 3);
        assert_eq!(count_independent_sets(&edge, &caps()).unwrap(), 3u32.into());
        assert_eq!(independent_by_subsets(&complete(3)), 4);
        assert_eq!(count_independent_sets(&complete(3), &caps()).unwrap(), 4u32.into());
    }

    #[test]
    fn decision_examples() {
        assert!(!has_perfect_matching(&cycle(7)));
        assert!(has_perfect_matching(&cycle(6)));
        // two triangles joined by an edge: needs a blossom
        let g = Graph::new(6, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (2, 3)]).unwrap();
        assert!(has_perfect_matching(&g));
    }

    #[test]
    fn bipartition_checks() {
        let c6 = cycle(6);
        assert_eq!(c6.find_bipartition().unwrap(), vec![0, 2, 4]);
        assert!(cycle(5).find_bipartition().is_none());
        assert!(cycle(6).with_bipartition(vec![0, 1, 2]).is_err());
        assert!(Graph::new(2, [(0, 0)]).is_err());
    }

    #[test]
    fn edge_list_parsing() {
        let text = "c K2,2\np edge 4 4\nb 1 2\ne 1 3\ne 1 4\n2 3\ne 2 4\n";
        let g = Graph::parse(text).unwrap();
        assert_eq!(g.bipartition(), Some(&[0, 1][..]));
        assert_eq!(count_perfect_matchings(&g, &caps()).unwrap(), 2u32.into());
        assert_eq!(Graph::parse(&g.to_string()).unwrap(), g);
        assert!(Graph::parse("p edge 2 1\ne 1 3\n").is_err());
        assert!(Graph::parse("p edge 3 1\nb 1 2\ne 1 2\n").is_err());
        assert!(Graph::parse("p edge 2 2\ne 1 2\n").is_err());
    }

    #[test]
    fn capacity_is_enforced() {
        assert!(matches!(
            count_perfect_matchings(&cycle(18), &caps()),
            Err(Error::Capacity { .. })
        ));
    }

    fn graphs(max_n: usize) -> impl Strategy<Value = Graph> {
        (1..=max_n).prop_flat_map(|n| {
            prop::collection::vec((0..n, 0..n), 0..(n * 2)).prop_map(move |edges| {
                Graph::new(n, edges.into_iter().filter(|(u, v)| u != v)).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn counters_match_subset_enumeration(g in graphs(8)) {
            prop_assert_eq!(count_perfect_matchings(&g, &caps()).unwrap(), BigUint::from(matchings_by_edge_subsets(&g)));
            prop_assert_eq!(count_independent_sets(&g, &caps()).unwrap(), BigUint::from(independent_by_subsets(&g)));
        }

        #[test]
        fn blossom_decides_perfect_matching(g in graphs(10)) {
            let count = count_perfect_matchings(&g, &caps()).unwrap();
            prop_assert_eq!(has_perfect_matching(&g), count > BigUint::default());
        }

        #[test]
        fn odd_order_graphs_have_no_perfect_matching(g in graphs(9)) {
            if g.vertex_count() % 2 == 1 {
                prop_assert_eq!(count_perfect_matchings(&g, &caps()).unwrap(), BigUint::default());
            }
        }
    }
}
