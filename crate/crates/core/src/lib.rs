//! Exact simulation of nondeterministic computation trees and the
//! counting-complexity constructions built on them.
//!
//! - [`machine`]: computation trees, exact path census, binarization and
//!   the perfect-binary-tree normal form.
//! - [`combinators`]: machine transformations with exact count contracts
//!   (subtraction by one, addition, multiplication, accepting-path
//!   doubling, mod-k conversion, leftmost marking, gap decomposition).
//! - [`problems`]: brute-force counting oracles and self-reduction
//!   machines for DNF satisfiability, perfect matchings, independent sets
//!   and pruned subtrees.
//! - [`classes`]: parity, mod-k and difference decision problems over any
//!   counting oracle.
//! - [`reductions`]: parsimonious reductions and their empirical checks.
//! - [`corpus`] and [`suites`]: seeded machine corpora and the
//!   verification suites run by the command-line driver.

pub mod classes;
pub mod combinators;
pub mod corpus;
pub mod error;
pub mod expr;
pub mod machine;
pub mod problems;
pub mod reductions;
pub mod suites;

pub use classes::{CountingOracle, PromiseVerdict};
pub use error::{Error, Result};
pub use expr::Expr;
pub use machine::{path_counts, Machine, MachineRef, Node, PathCounts, Verdict};
pub use problems::{Caps, ProblemInstance, ProblemKind};
