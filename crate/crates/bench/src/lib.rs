//! Fixed inputs shared by the benchmarks.

use pathcount_core::corpus::{self, CorpusConfig};
use pathcount_core::problems::Graph;
use pathcount_core::MachineRef;

/// The default random corpus, built.
pub fn corpus_machines(count: usize) -> Vec<MachineRef> {
    let cfg = CorpusConfig {
        count,
        ..CorpusConfig::default()
    };
    corpus::generate(&cfg)
        .iter()
        .map(|e| e.build_pure().expect("corpus expressions are pure"))
        .collect()
}

/// Complete bipartite graph K_{n,n}; it has n! perfect matchings.
pub fn complete_bipartite(n: usize) -> Graph {
    let edges = (0..n).flat_map(|i| (0..n).map(move |j| (i, n + j)));
    Graph::new(2 * n, edges).expect("valid graph")
}

/// The 2 x n ladder graph.
pub fn ladder(n: usize) -> Graph {
    let mut edges = Vec::new();
    for i in 0..n {
        edges.push((2 * i, 2 * i + 1));
        if i + 1 < n {
            edges.push((2 * i, 2 * i + 2));
            edges.push((2 * i + 1, 2 * i + 3));
        }
    }
    Graph::new(2 * n, edges).expect("valid graph")
}
