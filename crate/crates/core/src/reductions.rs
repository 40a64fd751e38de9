//! Instance maps between counting problems and empirical checks that they
//! preserve counts exactly on a finite corpus.
//!
//! Parsimony is never proven here. A [`ParsimonyReport`] only covers the
//! instances it lists, and says so in its header.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use rayon::prelude::*;

use crate::classes::{CountingOracle, FnOracle};
use crate::error::{Error, Result};
use crate::problems::{
    count_full_depth_leaves, Caps, Circuit, CnfFormula, DnfFormula, Gate, Literal, ProblemInstance, ProblemKind, SubtreeInstance,
};

type Transform = dyn Fn(&ProblemInstance) -> Result<ProblemInstance> + Send + Sync;

/// A deterministic map from instances of one problem to another.
#[derive(Clone)]
pub struct Reduction {
    name: String,
    source: ProblemKind,
    target: ProblemKind,
    transform: Arc<Transform>,
}

impl fmt::Debug for Reduction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Reduction")
            .field("name", &self.name)
            .field("source", &self.source)
            .field("target", &self.target)
            .finish()
    }
}

impl Reduction {
    pub fn new(
        name: impl Into<String>,
        source: ProblemKind,
        target: ProblemKind,
        transform: impl Fn(&ProblemInstance) -> Result<ProblemInstance> + Send + Sync + 'static,
    ) -> Self {
        Reduction {
            name: name.into(),
            source,
            target,
            transform: Arc::new(transform),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn source(&self) -> ProblemKind {
        self.source
    }

    pub fn target(&self) -> ProblemKind {
        self.target
    }
}

/// Maps `x` through the reduction.
pub fn apply_reduction(r: &Reduction, x: &ProblemInstance) -> Result<ProblemInstance> {
    if x.kind() != r.source {
        return Err(Error::KindMismatch(format!(
            "{} expects {} instances, got {}",
            r.name,
            r.source,
            x.kind()
        )));
    }
    let y = (r.transform)(x)?;
    if y.kind() != r.target {
        return Err(Error::KindMismatch(format!(
            "{} produced a {} instance, declared {}",
            r.name,
            y.kind(),
            r.target
        )));
    }
    Ok(y)
}

/// `second ∘ first`.
pub fn compose(first: &Reduction, second: &Reduction) -> Result<Reduction> {
    if first.target != second.source {
        return Err(Error::KindMismatch(format!(
            "cannot compose {} (to {}) with {} (from {})",
            first.name, first.target, second.name, second.source
        )));
    }
    let (a, b) = (first.clone(), second.clone());
    Ok(Reduction::new(
        format!("{}+{}", first.name, second.name),
        first.source,
        second.target,
        move |x| apply_reduction(&b, &apply_reduction(&a, x)?),
    ))
}

/// Maps every instance to itself.
pub fn identity(kind: ProblemKind) -> Reduction {
    Reduction::new(format!("identity[{kind}]"), kind, kind, |x| Ok(x.clone()))
}

fn rename(groups: &[Vec<Literal>], permutation: &[usize]) -> Vec<Vec<Literal>> {
    groups
        .iter()
        .map(|g| {
            g.iter()
                .map(|&l| {
                    let var = permutation[l.unsigned_abs() as usize - 1] as Literal + 1;
                    if l > 0 {
                        var
                    } else {
                        -var
                    }
                })
                .collect()
        })
        .collect()
}

/// Renames variable `i + 1` to `permutation[i] + 1` in CNF or DNF
/// formulas. Variables beyond the permutation's length are left alone.
pub fn variable_renaming(kind: ProblemKind, permutation: Vec<usize>) -> Result<Reduction> {
    let mut sorted = permutation.clone();
    sorted.sort_unstable();
    if sorted.iter().enumerate().any(|(i, &p)| i != p) {
        return Err(Error::Parameter("renaming must be a permutation of 0..n".into()));
    }
    if !matches!(kind, ProblemKind::Sat | ProblemKind::DnfSat) {
        return Err(Error::Parameter(format!("renaming applies to formulas, not {kind}")));
    }
    Ok(Reduction::new(
        format!("renaming[{kind}]"),
        kind,
        kind,
        move |x| {
            let extend = |n: usize| -> Vec<usize> {
                (0..n.max(permutation.len()))
                    .map(|i| permutation.get(i).copied().unwrap_or(i))
                    .collect()
            };
            match x {
                ProblemInstance::Sat(f) if f.num_vars() >= permutation.len() => {
                    let p = extend(f.num_vars());
                    Ok(ProblemInstance::Sat(CnfFormula::new(f.num_vars(), rename(f.clauses(), &p))?))
                }
                ProblemInstance::DnfSat(f) if f.num_vars() >= permutation.len() => {
                    let p = extend(f.num_vars());
                    Ok(ProblemInstance::DnfSat(DnfFormula::new(f.num_vars(), rename(f.terms(), &p))?))
                }
                _ => Err(Error::Parameter(
                    "formula has fewer variables than the renaming".into(),
                )),
            }
        },
    ))
}

/// The circuit that keeps a prefix alive iff some term of `f` is still
/// satisfiable under it. Prefix bit `i` is variable `i + 1`.
pub fn dnf_consistency_circuit(f: &DnfFormula) -> Circuit {
    let mut gates = Vec::new();
    let mut push = |g: Gate| {
        gates.push(g);
        gates.len() - 1
    };
    let mut term_outputs = Vec::new();
    let mut literal_gates: Vec<(Literal, usize)> = Vec::new();
    for term in f.terms() {
        let mut parts = Vec::new();
        for &lit in term {
            if let Some(&(_, g)) = literal_gates.iter().find(|(l, _)| *l == lit) {
                parts.push(g);
                continue;
            }
            let i = lit.unsigned_abs() as usize - 1;
            let bit = push(Gate::Bit(i));
            let g = if lit > 0 {
                let has = push(Gate::Has(i));
                let unassigned = push(Gate::Not(has));
                push(Gate::Or(vec![unassigned, bit]))
            } else {
                // absent bits read as false
                push(Gate::Not(bit))
            };
            literal_gates.push((lit, g));
            parts.push(g);
        }
        term_outputs.push(push(Gate::And(parts)));
    }
    push(Gate::Or(term_outputs));
    Circuit::new(gates).expect("gates only refer backwards")
}

/// DNF to Size-of-Subtree through the assignment-extension tree: a
/// satisfying assignment is an alive node at full depth, so the DNF count
/// equals the number of full-depth leaves (not the node count).
pub fn dnf_to_subtree() -> Reduction {
    Reduction::new(
        "dnf-to-subtree",
        ProblemKind::DnfSat,
        ProblemKind::SizeOfSubtree,
        |x| match x {
            ProblemInstance::DnfSat(f) => Ok(ProblemInstance::SizeOfSubtree(SubtreeInstance::new(
                f.num_vars(),
                dnf_consistency_circuit(f),
            ))),
            _ => unreachable!("kind checked by apply_reduction"),
        },
    )
}

/// A deliberately non-parsimonious map that drops the last DNF term.
/// Used as a negative control.
pub fn drop_last_term() -> Reduction {
    Reduction::new("drop-last-term", ProblemKind::DnfSat, ProblemKind::DnfSat, |x| match x {
        ProblemInstance::DnfSat(f) => {
            let mut terms = f.terms().to_vec();
            terms.pop();
            Ok(ProblemInstance::DnfSat(DnfFormula::new(f.num_vars(), terms)?))
        }
        _ => unreachable!("kind checked by apply_reduction"),
    })
}

/// Counts full-depth alive leaves of subtree instances, the target
/// function of [`dnf_to_subtree`].
pub fn subtree_leaf_oracle(caps: Caps) -> impl CountingOracle<ProblemInstance> {
    FnOracle::new("size-of-subtree[leaves]", move |x: &ProblemInstance| match x {
        ProblemInstance::SizeOfSubtree(s) => count_full_depth_leaves(s, &caps),
        other => Err(Error::KindMismatch(format!("expected a subtree instance, got {}", other.kind()))),
    })
}

/// Outcome for one corpus instance.
#[derive(Debug, Clone)]
pub struct ParsimonyEntry {
    pub id: String,
    pub source_count: Option<BigUint>,
    pub target_count: Option<BigUint>,
    pub error: Option<String>,
}

impl ParsimonyEntry {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.source_count.is_some() && self.source_count == self.target_count
    }
}

#[derive(Debug, Clone)]
pub struct ParsimonyReport {
    pub reduction: String,
    pub source_oracle: String,
    pub target_oracle: String,
    pub corpus: String,
    pub entries: Vec<ParsimonyEntry>,
}

impl ParsimonyReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(ParsimonyEntry::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ParsimonyEntry> {
        self.entries.iter().filter(|e| !e.passed())
    }
}

impl fmt::Display for ParsimonyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "# reduction={} f={} g={} corpus={}",
            self.reduction, self.source_oracle, self.target_oracle, self.corpus
        )?;
        let show = |c: &Option<BigUint>| c.as_ref().map_or("?".to_string(), |c| c.to_string());
        for e in &self.entries {
            let status = if e.passed() { "OK" } else { "FAIL" };
            write!(f, "{status} {} {} {}", show(&e.source_count), show(&e.target_count), e.id)?;
            if let Some(err) = &e.error {
                write!(f, " # {err}")?;
            }
            writeln!(f)?;
        }
        let failed = self.failures().count();
        writeln!(
            f,
            "SUMMARY {} instances={} failed={}",
            if failed == 0 { "PASS" } else { "FAIL" },
            self.entries.len(),
            failed
        )
    }
}

/// Compares `f(x)` with `g(R(x))` for every `(id, x)` in `corpus`. Errors
/// are recorded per instance.
pub fn check_parsimonious(
    r: &Reduction,
    f: &dyn CountingOracle<ProblemInstance>,
    g: &dyn CountingOracle<ProblemInstance>,
    corpus: &[(String, ProblemInstance)],
    corpus_description: &str,
) -> ParsimonyReport {
    let entries = corpus
        .par_iter()
        .map(|(id, x)| {
            let mut entry = ParsimonyEntry {
                id: id.clone(),
                source_count: None,
                target_count: None,
                error: None,
            };
            match f.count(x) {
                Ok(c) => entry.source_count = Some(c),
                Err(e) => entry.error = Some(e.to_string()),
            }
            match apply_reduction(r, x).and_then(|y| g.count(&y)) {
                Ok(c) => entry.target_count = Some(c),
                Err(e) => entry.error = entry.error.or(Some(e.to_string())),
            }
            entry
        })
        .collect();
    ParsimonyReport {
        reduction: r.name.clone(),
        source_oracle: f.name(),
        target_oracle: g.name(),
        corpus: corpus_description.to_string(),
        entries,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::BruteForce;

    fn dnf(n: usize, terms: Vec<Vec<i32>>) -> ProblemInstance {
        ProblemInstance::DnfSat(DnfFormula::new(n, terms).unwrap())
    }

    fn leaves_oracle() -> impl CountingOracle<ProblemInstance> {
        subtree_leaf_oracle(Caps::default())
    }

    #[test]
    fn identity_returns_same_instance() {
        let x = dnf(2, vec![vec![1, -2]]);
        assert_eq!(apply_reduction(&identity(ProblemKind::DnfSat), &x).unwrap(), x);
        assert!(apply_reduction(&identity(ProblemKind::Sat), &x).is_err());
    }

    #[test]
    fn renaming_permutes_variables() {
        let r = variable_renaming(ProblemKind::Sat, vec![2, 0, 1]).unwrap();
        let x = ProblemInstance::Sat(CnfFormula::new(3, vec![vec![1, -3]]).unwrap());
        let y = apply_reduction(&r, &x).unwrap();
        assert_eq!(y, ProblemInstance::Sat(CnfFormula::new(3, vec![vec![3, -2]]).unwrap()));
        assert!(variable_renaming(ProblemKind::Sat, vec![0, 0]).is_err());
        let twice = compose(&r, &r).unwrap();
        let z = apply_reduction(&twice, &x).unwrap();
        assert_eq!(z, ProblemInstance::Sat(CnfFormula::new(3, vec![vec![2, -1]]).unwrap()));
    }

    #[test]
    fn dnf_to_subtree_counts_leaves() {
        let cases = [
            dnf(2, vec![vec![1], vec![2]]),
            dnf(3, vec![vec![1, -1]]),
            dnf(2, vec![]),
            dnf(3, vec![vec![]]),
            dnf(4, vec![vec![-1, 2], vec![3, -4, 1]]),
        ];
        let corpus: Vec<_> = cases.iter().enumerate().map(|(i, x)| (format!("dnf{i}"), x.clone())).collect();
        let report = check_parsimonious(&dnf_to_subtree(), &BruteForce::default(), &leaves_oracle(), &corpus, "hand-built");
        assert!(report.passed(), "{report}");
        // node counting is a different function
        let nodes = check_parsimonious(&dnf_to_subtree(), &BruteForce::default(), &BruteForce::default(), &corpus, "hand-built");
        assert!(!nodes.passed());
    }

    #[test]
    fn broken_transform_fails_with_witness() {
        let drop_last = drop_last_term();
        let corpus = vec![("x".to_string(), dnf(2, vec![vec![1], vec![-1, 2]]))];
        let report = check_parsimonious(&drop_last, &BruteForce::default(), &BruteForce::default(), &corpus, "one");
        assert!(!report.passed());
        let text = report.to_string();
        assert!(text.contains("FAIL 3 2 x"), "{text}");
        assert!(text.lines().last().unwrap().starts_with("SUMMARY FAIL"));
    }

    #[test]
    fn capacity_errors_are_per_instance() {
        let corpus = vec![
            ("small".to_string(), dnf(2, vec![vec![1]])),
            ("huge".to_string(), dnf(30, vec![vec![1]])),
        ];
        let report = check_parsimonious(&identity(ProblemKind::DnfSat), &BruteForce::default(), &BruteForce::default(), &corpus, "caps");
        assert!(report.entries[0].passed());
        assert!(report.entries[1].error.is_some());
        assert!(report.to_string().contains("FAIL ? ? huge"));
    }

    #[test]
    fn composition_checks_kinds() {
        assert!(compose(&dnf_to_subtree(), &identity(ProblemKind::DnfSat)).is_err());
        let r = compose(&identity(ProblemKind::DnfSat), &dnf_to_subtree()).unwrap();
        assert_eq!(r.source(), ProblemKind::DnfSat);
        assert_eq!(r.target(), ProblemKind::SizeOfSubtree);
    }
}
