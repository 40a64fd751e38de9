//! Verification suites: each proposition is checked exactly over a seeded
//! corpus, producing a line-oriented report.
//!
//! Report layout:
//!
//! ```text
//! # proposition=<id> seed=<n> count=<n> ...
//! OK <case description>
//! FAIL <case description with a serialized counterexample>
//! STAT <name>=<value>
//! SUMMARY PASS|FAIL proposition=<id> cases=<n> failed=<n>
//! ```
//!
//! Cases are evaluated in parallel but always reported in corpus order, so
//! a report is a pure function of the configuration.
//!
//! With `negative_control` set, every suite swaps its construction for a
//! subtly broken one and must then fail.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::classes::{
    diff_eq0, diff_eq1, diff_eqg, diff_gt0, modk_of, parity_of, verify_diff_scaling, AccOracle,
    BruteForce, CountingOracle, FnOracle, PromiseVerdict, TotOracle,
};
use crate::combinators::{
    acc_to_tot_modk, add, double_accepting, fp_gap_normalize, gap_decompose, mark_leftmost_reject,
    multiply, seq, subtract_one, GapPair,
};
use crate::corpus::{
    self, random_bipartite, random_cnf, random_dnf, random_graph, random_subtree, CorpusConfig,
};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::machine::{
    branch, check_normalizable, evaluate_poly_bounded, leftmost_path, normalize_perfect,
    path_counts, MachineRef, PathCounts,
};
use crate::problems::{
    brute_force_count, count_perfect_matchings, count_sat, self_reduction_machine, Caps,
    CnfFormula, Graph, ProblemInstance, ProblemKind,
};
use crate::reductions::{
    check_parsimonious, compose, dnf_to_subtree, drop_last_term, identity, subtree_leaf_oracle,
    variable_renaming, ParsimonyReport, Reduction,
};

type CountFn = dyn Fn(&ProblemInstance) -> Result<BigUint> + Sync + Send;

/// A reduction, its instances, the target oracle and a description.
type Subject<'a> = (
    Reduction,
    &'a [(String, ProblemInstance)],
    &'a dyn CountingOracle<ProblemInstance>,
    String,
);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Proposition {
    Closure,
    ClosureAdd,
    ClosureMul,
    ClosureSub1,
    GapDecompose,
    Normalize,
    ModK,
    Parity,
    PolyBounded,
    Fig1,
    DiffFamily,
    Scaling,
    Parsimony,
}

impl Proposition {
    pub const ALL: [Proposition; 13] = [
        Proposition::Closure,
        Proposition::ClosureAdd,
        Proposition::ClosureMul,
        Proposition::ClosureSub1,
        Proposition::GapDecompose,
        Proposition::Normalize,
        Proposition::ModK,
        Proposition::Parity,
        Proposition::PolyBounded,
        Proposition::Fig1,
        Proposition::DiffFamily,
        Proposition::Scaling,
        Proposition::Parsimony,
    ];

    /// One entry per independent suite; `closure` covers its three parts.
    pub const SUITES: [Proposition; 10] = [
        Proposition::Closure,
        Proposition::GapDecompose,
        Proposition::Normalize,
        Proposition::ModK,
        Proposition::Parity,
        Proposition::PolyBounded,
        Proposition::Fig1,
        Proposition::DiffFamily,
        Proposition::Scaling,
        Proposition::Parsimony,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Proposition::Closure => "closure",
            Proposition::ClosureAdd => "closure-add",
            Proposition::ClosureMul => "closure-mul",
            Proposition::ClosureSub1 => "closure-sub1",
            Proposition::GapDecompose => "gap-decompose",
            Proposition::Normalize => "normalize",
            Proposition::ModK => "modk",
            Proposition::Parity => "parity",
            Proposition::PolyBounded => "poly-bounded",
            Proposition::Fig1 => "fig1",
            Proposition::DiffFamily => "diff-family",
            Proposition::Scaling => "scaling",
            Proposition::Parsimony => "parsimony",
        }
    }
}

impl fmt::Display for Proposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Proposition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Proposition::ALL
            .into_iter()
            .find(|p| p.id() == s)
            .ok_or_else(|| {
                let known: Vec<_> = Proposition::ALL.iter().map(|p| p.id()).collect();
                Error::Parameter(format!(
                    "unknown proposition {s:?}; known: {}",
                    known.join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub corpus: CorpusConfig,
    /// Moduli for the mod-k suite.
    pub k_values: Vec<usize>,
    /// Depths for the normal-form suite.
    pub p_values: Vec<usize>,
    pub caps: Caps,
    /// Random problem instances (or instance pairs) per family.
    pub instances: usize,
    pub negative_control: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            corpus: CorpusConfig::default(),
            k_values: (2..=7).collect(),
            p_values: (4..=8).collect(),
            caps: Caps::default(),
            instances: 200,
            negative_control: false,
        }
    }
}

impl SuiteConfig {
    fn describe(&self) -> String {
        let list = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        format!(
            "seed={} count={} max-depth={} max-fanout={} k={} p={} instances={} caps={}:{}:{}:{} negative-control={}",
            self.corpus.seed,
            self.corpus.count,
            self.corpus.max_depth,
            self.corpus.max_fanout,
            list(&self.k_values),
            list(&self.p_values),
            self.instances,
            self.caps.max_vars,
            self.caps.max_vertices,
            self.caps.max_subtree_depth,
            self.caps.max_scaling_exponent,
            self.negative_control,
        )
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub proposition: Proposition,
    pub parameters: String,
    pub lines: Vec<String>,
    pub stats: BTreeMap<String, usize>,
    pub cases: usize,
    pub failed: usize,
}

impl Report {
    fn new(proposition: Proposition, cfg: &SuiteConfig) -> Self {
        Report {
            proposition,
            parameters: cfg.describe(),
            lines: Vec::new(),
            stats: BTreeMap::new(),
            cases: 0,
            failed: 0,
        }
    }

    /// A suite passes when it checked something and nothing failed.
    pub fn passed(&self) -> bool {
        self.cases > 0 && self.failed == 0
    }

    pub fn stat(&self, name: &str) -> usize {
        self.stats.get(name).copied().unwrap_or(0)
    }

    pub fn summary(&self) -> String {
        format!(
            "SUMMARY {} proposition={} cases={} failed={}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.proposition,
            self.cases,
            self.failed
        )
    }

    /// Lines of failed cases.
    pub fn failures(&self) -> impl Iterator<Item = &str> {
        self.lines
            .iter()
            .filter(|l| l.starts_with("FAIL "))
            .map(String::as_str)
    }

    fn record(&mut self, case: Case) {
        self.cases += 1;
        if !case.passed {
            self.failed += 1;
        }
        if let Some(tag) = case.tag {
            *self.stats.entry(tag).or_default() += 1;
        }
        let status = if case.passed { "OK" } else { "FAIL" };
        self.lines.push(format!("{status} {}", case.line));
    }

    fn record_all(&mut self, cases: impl IntoIterator<Item = Case>) {
        for c in cases {
            self.record(c);
        }
    }

    /// Records many cases under one line; only failures get lines of
    /// their own.
    fn group(&mut self, label: &str, cases: Vec<Case>) {
        let total = cases.len();
        let mut failed = 0;
        for c in cases {
            if let Some(tag) = c.tag {
                *self.stats.entry(tag).or_default() += 1;
            }
            if !c.passed {
                failed += 1;
                self.lines.push(format!("FAIL {}", c.line));
            }
        }
        self.cases += total;
        self.failed += failed;
        let status = if failed == 0 { "OK" } else { "FAIL" };
        self.lines
            .push(format!("{status} group {label} cases={total} failed={failed}"));
    }

    fn note(&mut self, line: String) {
        self.lines.push(line);
    }

    fn add_stat(&mut self, name: &str, n: usize) {
        *self.stats.entry(name.to_string()).or_default() += n;
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# proposition={} {}", self.proposition, self.parameters)?;
        for line in &self.lines {
            writeln!(f, "{line}")?;
        }
        for (name, value) in &self.stats {
            writeln!(f, "STAT {name}={value}")?;
        }
        writeln!(f, "{}", self.summary())
    }
}

struct Case {
    passed: bool,
    line: String,
    tag: Option<String>,
}

impl Case {
    fn new(passed: bool, line: String) -> Self {
        Case {
            passed,
            line,
            tag: None,
        }
    }

    fn tagged(mut self, tag: impl Into<String>) -> Self {
        self.tag = Some(tag.into());
        self
    }

    /// Turns an evaluation error into a failed case.
    fn from_result(label: impl fmt::Display, r: Result<Case>) -> Case {
        r.unwrap_or_else(|e| Case::new(false, format!("{label} error=\"{e}\"")))
    }
}

/// Runs one proposition's suite.
pub fn run(proposition: Proposition, cfg: &SuiteConfig) -> Result<Report> {
    let mut report = Report::new(proposition, cfg);
    match proposition {
        Proposition::Closure => closure(cfg, &[Op::Sub1, Op::Add, Op::Mul], &mut report)?,
        Proposition::ClosureAdd => closure(cfg, &[Op::Add], &mut report)?,
        Proposition::ClosureMul => closure(cfg, &[Op::Mul], &mut report)?,
        Proposition::ClosureSub1 => closure(cfg, &[Op::Sub1], &mut report)?,
        Proposition::GapDecompose => gap(cfg, &mut report)?,
        Proposition::Normalize => normalize(cfg, &mut report)?,
        Proposition::ModK => modk(cfg, &mut report)?,
        Proposition::Parity => parity(cfg, &mut report)?,
        Proposition::PolyBounded => poly_bounded(cfg, &mut report)?,
        Proposition::Fig1 => fig1(cfg, &mut report),
        Proposition::DiffFamily => diff_family(cfg, &mut report),
        Proposition::Scaling => scaling(cfg, &mut report),
        Proposition::Parsimony => parsimony(cfg, &mut report)?,
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Machine corpus suites

const STREAM_PARTNERS: u64 = 1;
const STREAM_GVALS: u64 = 2;
const STREAM_FIG1: u64 = 3;
const STREAM_SCALING: u64 = 4;
const STREAM_PARSIMONY: u64 = 5;
const STREAM_DIFF: u64 = 16;

fn counts(m: &MachineRef) -> Result<PathCounts> {
    path_counts(m.as_ref(), "")
}

fn build_corpus(cfg: &SuiteConfig) -> Result<Vec<(Expr, MachineRef)>> {
    corpus::generate(&cfg.corpus)
        .into_iter()
        .map(|e| {
            let m = e.build_pure()?;
            Ok((e, m))
        })
        .collect()
}

/// For pair-based suites: machine `i` is paired with `partners[i]`.
fn partners(cfg: &SuiteConfig, n: usize) -> Vec<usize> {
    let mut rng = corpus::rng(cfg.corpus.seed, STREAM_PARTNERS);
    (0..n).map(|_| rng.gen_range(0..n)).collect()
}

fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(usize, &T) -> R + Sync + Send) -> Vec<R> {
    items.par_iter().enumerate().map(|(i, x)| f(i, x)).collect()
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Sub1,
    Add,
    Mul,
}

fn closure_case(
    op: Op,
    negative: bool,
    i: usize,
    (ea, ma): &(Expr, MachineRef),
    (eb, mb): &(Expr, MachineRef),
) -> Case {
    let name = match op {
        Op::Sub1 => "sub1",
        Op::Add => "add",
        Op::Mul => "mul",
    };
    let label = format!("{i} {name} A={ea} B={eb}");
    Case::from_result(
        &label,
        (|| {
            let ta = counts(ma)?.tot();
            let tb = counts(mb)?.tot();
            let (expected, out) = match op {
                Op::Sub1 => {
                    let e = if ta.is_zero() { ta.clone() } else { &ta - 1u32 };
                    (e, if negative { ma.clone() } else { subtract_one(ma.clone()) })
                }
                Op::Add => {
                    let out = if negative {
                        branch(vec![ma.clone(), mb.clone()])?
                    } else {
                        add(ma.clone(), mb.clone())
                    };
                    (&ta + &tb, out)
                }
                Op::Mul => {
                    let out = if negative {
                        seq(ma.clone(), mb.clone())
                    } else {
                        multiply(ma.clone(), mb.clone())
                    };
                    (&ta * &tb, out)
                }
            };
            let c = counts(&out)?;
            let actual = c.tot();
            let ok = actual == expected && &c.accepting + &c.rejecting == c.total;
            Ok(Case::new(
                ok,
                if ok {
                    format!("{i} {name} tot(A)={ta} tot(B)={tb} tot={actual}")
                } else {
                    format!("{label} expected={expected} actual={actual}")
                },
            ))
        })(),
    )
}

fn closure(cfg: &SuiteConfig, ops: &[Op], report: &mut Report) -> Result<()> {
    let corpus = build_corpus(cfg)?;
    let partners = partners(cfg, corpus.len());
    let rows = par_map(&corpus, |i, a| {
        ops.iter()
            .map(|&op| closure_case(op, cfg.negative_control, i, a, &corpus[partners[i]]))
            .collect::<Vec<_>>()
    });
    report.record_all(rows.into_iter().flatten());
    Ok(())
}

fn gap(cfg: &SuiteConfig, report: &mut Report) -> Result<()> {
    let corpus = build_corpus(cfg)?;
    let partners = partners(cfg, corpus.len());
    let rows = par_map(&corpus, |i, (en, mn)| {
        let (em, mm) = &corpus[partners[i]];
        let label = format!("{i} N={en} M={em}");
        Case::from_result(
            &label,
            (|| {
                let an = counts(mn)?.accepting;
                let am = counts(mm)?.accepting;
                let pair = if cfg.negative_control {
                    GapPair {
                        plus: add(mn.clone(), mm.clone()),
                        minus: add(mn.clone(), double_accepting(mm.clone())),
                    }
                } else {
                    gap_decompose(mn.clone(), mm.clone())
                };
                let expected = BigInt::from(an.clone()) - BigInt::from(am.clone());
                let actual = pair.evaluate("")?;
                let ok = actual == expected;
                Ok(Case::new(
                    ok,
                    if ok {
                        format!("{i} acc(N)={an} acc(M)={am} gap={actual}")
                    } else {
                        format!("{label} expected={expected} actual={actual}")
                    },
                ))
            })(),
        )
    });
    report.record_all(rows);
    Ok(())
}

fn normalize(cfg: &SuiteConfig, report: &mut Report) -> Result<()> {
    let corpus = build_corpus(cfg)?;
    let mut rng = corpus::rng(cfg.corpus.seed, STREAM_GVALS);
    let gvals: Vec<i64> = (0..corpus.len()).map(|_| rng.gen_range(-50..=50)).collect();
    for &p in &cfg.p_values {
        if p >= 63 {
            return Err(Error::Parameter(format!("normal-form depth {p} is too large")));
        }
        let rows = par_map(&corpus, |i, (e, m)| {
            let label = format!("p={p} {i} M={e}");
            Case::from_result(&label, normalize_case(cfg.negative_control, p, i, m, gvals[i], &label))
        });
        report.record_all(rows);
    }
    Ok(())
}

fn normalize_case(
    negative: bool,
    p: usize,
    i: usize,
    m: &MachineRef,
    gval: i64,
    label: &str,
) -> Result<Case> {
    let gval = BigInt::from(gval);
    match check_normalizable(m, p, "") {
        Ok(()) => {
            let base = counts(m)?;
            let normal = counts(&normalize_perfect(m.clone(), p))?;
            let (mut g2, m2) = fp_gap_normalize(&gval, m.clone(), p, "")?;
            if negative {
                g2 += 1;
            }
            let lhs = &gval - BigInt::from(base.accepting.clone());
            let rhs = &g2 - BigInt::from(counts(&m2)?.tot());
            let ok = normal.total == BigUint::one() << p
                && normal.accepting == base.accepting
                && lhs == rhs;
            let line = if ok {
                format!("p={p} {i} acc={} total={} fp={lhs}", normal.accepting, normal.total)
            } else {
                format!(
                    "{label} acc={}->{} total={} expected-total={} fp-lhs={lhs} fp-rhs={rhs}",
                    base.accepting,
                    normal.accepting,
                    normal.total,
                    BigUint::one() << p
                )
            };
            Ok(Case::new(ok, line).tagged(format!("normalized-p{p}")))
        }
        Err(Error::Normalization(_)) => {
            // the precondition fails, so both constructions must refuse
            let lazy = counts(&normalize_perfect(m.clone(), p));
            let eager = fp_gap_normalize(&gval, m.clone(), p, "");
            let ok = matches!(lazy, Err(Error::Normalization(_)))
                && matches!(eager, Err(Error::Normalization(_)));
            let line = if ok {
                format!("p={p} {i} refused")
            } else {
                format!("{label} precondition fails but normalization did not refuse")
            };
            Ok(Case::new(ok, line).tagged(format!("refused-p{p}")))
        }
        Err(e) => Err(e),
    }
}

fn modk(cfg: &SuiteConfig, report: &mut Report) -> Result<()> {
    let corpus = build_corpus(cfg)?;
    for &k in &cfg.k_values {
        if k < 2 {
            return Err(Error::Parameter(format!("modulus k must be at least 2, got {k}")));
        }
        let built_k = if cfg.negative_control { k + 1 } else { k };
        let rows = par_map(&corpus, |i, (e, m)| {
            let label = format!("k={k} {i} M={e}");
            Case::from_result(
                &label,
                (|| {
                    let base = counts(m)?;
                    let tot = counts(&acc_to_tot_modk(m.clone(), built_k)?)?.tot();
                    let kk = BigUint::from(k);
                    let exact = &base.accepting + &kk * &base.rejecting;
                    let residue = &tot % &kk;
                    let ok = tot == exact && residue == &base.accepting % &kk;
                    Ok(Case::new(
                        ok,
                        if ok {
                            format!(
                                "k={k} {i} acc={} rej={} tot={tot} residue={residue}",
                                base.accepting, base.rejecting
                            )
                        } else {
                            format!(
                                "{label} acc={} rej={} expected-tot={exact} actual-tot={tot}",
                                base.accepting, base.rejecting
                            )
                        },
                    ))
                })(),
            )
        });
        report.record_all(rows);
    }
    Ok(())
}

fn parity(cfg: &SuiteConfig, report: &mut Report) -> Result<()> {
    let corpus = build_corpus(cfg)?;
    let rows = par_map(&corpus, |i, (e, m)| {
        let label = format!("{i} M={e}");
        Case::from_result(
            &label,
            (|| {
                let tot = counts(m)?.tot();
                let marked = if cfg.negative_control {
                    m.clone()
                } else {
                    mark_leftmost_reject(m.clone())
                };
                let acc = counts(&marked)?.accepting;
                let odd_acc = parity_of(&AccOracle(m.clone()), "")?;
                let odd_tot = parity_of(&TotOracle(acc_to_tot_modk(m.clone(), 2)?), "")?;
                let ok = acc == tot && odd_acc == odd_tot;
                Ok(Case::new(
                    ok,
                    if ok {
                        format!("{i} tot={tot} acc(marked)={acc} odd={odd_acc}")
                    } else {
                        format!(
                            "{label} tot={tot} acc(marked)={acc} odd(acc)={odd_acc} odd(tot(modk2))={odd_tot}"
                        )
                    },
                ))
            })(),
        )
    });
    report.record_all(rows);
    Ok(())
}

fn poly_bounded(cfg: &SuiteConfig, report: &mut Report) -> Result<()> {
    let corpus = build_corpus(cfg)?;
    let rows = par_map(&corpus, |i, (e, m)| {
        let label = format!("{i} M={e}");
        Case::from_result(
            &label,
            (|| {
                let c = counts(m)?;
                let mut v = evaluate_poly_bounded(m.as_ref(), "")?;
                if cfg.negative_control {
                    v += 1u32;
                }
                let path = leftmost_path(m.as_ref(), "")?.len();
                let ok = v == c.tot()
                    && c.total >= BigUint::one()
                    && &c.accepting + &c.rejecting == c.total
                    && path <= m.depth_bound() + 1;
                Ok(Case::new(
                    ok,
                    if ok {
                        format!("{i} tot={v} leftmost={path}")
                    } else {
                        format!(
                            "{label} counted={} evaluated={v} leftmost={path} depth-bound={}",
                            c.tot(),
                            m.depth_bound()
                        )
                    },
                ))
            })(),
        )
    });
    report.record_all(rows);
    Ok(())
}

// ---------------------------------------------------------------------------
// Self-reduction machines against brute force

fn compact(x: &ProblemInstance) -> String {
    x.to_text().trim_end().replace('\n', "; ")
}

fn machine_case(x: &ProblemInstance, caps: &Caps, negative: bool, tag: &str) -> Case {
    let label = format!("{} instance=[{}]", x.kind(), compact(x));
    let case = Case::from_result(
        &label,
        (|| {
            let expected = brute_force_count(x, caps)?;
            let c = counts(&self_reduction_machine(x)?)?;
            let actual = if negative { c.total } else { c.tot() };
            let ok = actual == expected;
            Ok(Case::new(
                ok,
                if ok {
                    format!("{} count={actual}", x.kind())
                } else {
                    format!("{label} expected={expected} actual={actual}")
                },
            ))
        })(),
    );
    case.tagged(tag)
}

fn bipartite_subsets(a: usize, b: usize) -> Vec<ProblemInstance> {
    let pairs: Vec<(usize, usize)> = (0..a)
        .flat_map(|u| (a..a + b).map(move |v| (u, v)))
        .collect();
    (0u64..1 << pairs.len())
        .map(|mask| {
            let edges = pairs
                .iter()
                .enumerate()
                .filter(|(j, _)| mask >> j & 1 == 1)
                .map(|(_, &e)| e);
            let g = Graph::new(a + b, edges)
                .and_then(|g| g.with_bipartition((0..a).collect()))
                .expect("bipartite by construction");
            ProblemInstance::PerfectMatchings(g)
        })
        .collect()
}

fn all_graphs(n: usize) -> Vec<ProblemInstance> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .collect();
    (0u64..1 << pairs.len())
        .map(|mask| {
            let edges = pairs
                .iter()
                .enumerate()
                .filter(|(j, _)| mask >> j & 1 == 1)
                .map(|(_, &e)| e);
            ProblemInstance::IndependentSets(Graph::new(n, edges).expect("valid edges"))
        })
        .collect()
}

fn fig1(cfg: &SuiteConfig, report: &mut Report) {
    let neg = cfg.negative_control;
    let caps = &cfg.caps;
    let check = |xs: &[ProblemInstance], tag: &str| -> Vec<Case> {
        par_map(xs, |_, x| machine_case(x, caps, neg, tag))
    };

    // every labelled bipartite graph with sides a <= b and a + b <= 8
    for a in 0..=4 {
        for b in a..=8 - a {
            let family = bipartite_subsets(a, b);
            report.group(&format!("perf-match K{a},{b} edge-subsets"), check(&family, "perf-match-exhaustive"));
        }
    }

    let mut rng = corpus::rng(cfg.corpus.seed, STREAM_FIG1);
    let n = cfg.instances;
    let random_pm: Vec<_> = (0..n)
        .map(|_| {
            let a = rng.gen_range(1..=6);
            let b = if rng.gen_bool(0.7) { a } else { rng.gen_range(0..=12 - a) };
            let p = rng.gen_range(0.25..0.9);
            ProblemInstance::PerfectMatchings(random_bipartite(&mut rng, a, b, p))
        })
        .collect();
    report.record_all(check(&random_pm, "perf-match-random"));

    let dnfs: Vec<_> = (0..n)
        .map(|_| {
            let vars = rng.gen_range(1..=10);
            let terms = rng.gen_range(0..=6);
            ProblemInstance::DnfSat(random_dnf(&mut rng, vars, terms, 4))
        })
        .collect();
    report.record_all(check(&dnfs, "dnf-sat"));

    for v in 0..=5 {
        report.group(&format!("indep-sets all graphs on {v} vertices"), check(&all_graphs(v), "indep-sets-exhaustive"));
    }
    let graphs: Vec<_> = (0..n)
        .map(|_| {
            let v = rng.gen_range(0..=10);
            let p = rng.gen_range(0.1..0.8);
            ProblemInstance::IndependentSets(random_graph(&mut rng, v, p))
        })
        .collect();
    report.record_all(check(&graphs, "indep-sets-random"));

    let subtrees: Vec<_> = (0..n)
        .map(|_| {
            let depth = rng.gen_range(0..=8);
            let patterns = rng.gen_range(0..=4);
            ProblemInstance::SizeOfSubtree(random_subtree(&mut rng, depth, patterns))
        })
        .collect();
    report.record_all(check(&subtrees, "size-of-subtree"));
}

// ---------------------------------------------------------------------------
// Difference, parity and mod-k decision problems

/// Satisfying assignments by direct evaluation, independent of the
/// masked counter in the problems module.
fn naive_sat(f: &CnfFormula) -> BigUint {
    BigUint::from((0u64..1 << f.num_vars()).filter(|&a| f.eval(a)).count())
}

fn random_instance(rng: &mut impl Rng, kind: ProblemKind) -> ProblemInstance {
    match kind {
        ProblemKind::Sat => {
            let n = rng.gen_range(1..=6);
            let m = rng.gen_range(0..=5);
            ProblemInstance::Sat(random_cnf(rng, n, m, 3))
        }
        ProblemKind::DnfSat => {
            let n = rng.gen_range(1..=6);
            let m = rng.gen_range(0..=4);
            ProblemInstance::DnfSat(random_dnf(rng, n, m, 3))
        }
        ProblemKind::PerfectMatchings => {
            let a = rng.gen_range(1..=4);
            let p = rng.gen_range(0.3..0.9);
            ProblemInstance::PerfectMatchings(random_bipartite(rng, a, a, p))
        }
        ProblemKind::IndependentSets => {
            let n = rng.gen_range(0..=7);
            let p = rng.gen_range(0.2..0.8);
            ProblemInstance::IndependentSets(random_graph(rng, n, p))
        }
        ProblemKind::SizeOfSubtree => {
            let depth = rng.gen_range(0..=6);
            let patterns = rng.gen_range(0..=3);
            ProblemInstance::SizeOfSubtree(random_subtree(rng, depth, patterns))
        }
    }
}

fn expected_promise(d: &BigInt, k: u64) -> PromiseVerdict {
    if d.is_zero() {
        PromiseVerdict::No
    } else if *d == BigInt::from(k) {
        PromiseVerdict::Yes
    } else {
        PromiseVerdict::Violated(d.clone())
    }
}

struct DiffPair {
    x: ProblemInstance,
    y: ProblemInstance,
    k: u64,
}

fn diff_case(
    oracle: &dyn CountingOracle<ProblemInstance>,
    reference: &(dyn Fn(&ProblemInstance) -> Result<BigUint> + Sync),
    i: usize,
    pair: &DiffPair,
) -> Result<Case> {
    let DiffPair { x, y, k } = pair;
    let kind = x.kind();
    let cx = reference(x)?;
    let cy = reference(y)?;
    let d = BigInt::from(cx.clone()) - BigInt::from(cy.clone());
    let mut problems = Vec::new();
    let mut expect = |ok: bool, what: String| {
        if !ok {
            problems.push(what);
        }
    };

    let eq0 = diff_eq0(oracle, x, y)?;
    let gt0 = diff_gt0(oracle, x, y)?;
    let lt0 = diff_gt0(oracle, y, x)?;
    expect(eq0 == d.is_zero(), format!("eq0={eq0}"));
    expect(gt0 == d.is_positive(), format!("gt0={gt0}"));
    expect(lt0 == d.is_negative(), format!("gt0(y,x)={lt0}"));
    expect(
        [eq0, gt0, lt0].iter().filter(|&&b| b).count() == 1,
        "trichotomy".into(),
    );

    let eq1 = diff_eq1(oracle, x, y)?;
    expect(eq1 == expected_promise(&d, 1), format!("eq1={eq1}"));
    let eqg = diff_eqg(oracle, x, y, *k)?;
    expect(eqg == expected_promise(&d, *k), format!("eqg({k})={eqg}"));
    if let Some(dk) = d.to_u64().filter(|&v| v > 0) {
        let yes = diff_eqg(oracle, x, y, dk)?;
        expect(yes == PromiseVerdict::Yes, format!("eqg({dk})={yes}"));
    }

    let odd = parity_of(oracle, x)?;
    expect(odd == cx.bit(0), format!("parity={odd}"));
    for m in 2..=7usize {
        let (residue, accept) = modk_of(oracle, x, m)?;
        let want = &cx % BigUint::from(m);
        expect(
            residue == want && accept == !want.is_zero(),
            format!("mod{m}=({residue},{accept})"),
        );
        if m == 2 {
            expect(accept == odd, "parity vs mod2".into());
        }
    }

    let tag = match &eq1 {
        PromiseVerdict::Yes => format!("{kind}-yes"),
        PromiseVerdict::No => format!("{kind}-no"),
        PromiseVerdict::Violated(_) => format!("{kind}-violated"),
    };
    let ok = problems.is_empty();
    let line = if ok {
        format!("{kind} {i} x={cx} y={cy} eq1={eq1} eqg({k})={eqg}")
    } else {
        format!(
            "{kind} {i} x={cx} y={cy} wrong: {} x=[{}] y=[{}]",
            problems.join(" "),
            compact(x),
            compact(y)
        )
    };
    Ok(Case::new(ok, line).tagged(tag))
}

fn diff_family(cfg: &SuiteConfig, report: &mut Report) {
    let caps = cfg.caps;
    for (s, kind) in ProblemKind::ALL.into_iter().enumerate() {
        let mut rng = corpus::rng(cfg.corpus.seed, STREAM_DIFF + s as u64);
        let pairs: Vec<DiffPair> = (0..cfg.instances)
            .map(|_| {
                let x = random_instance(&mut rng, kind);
                let y = if rng.gen_bool(0.15) {
                    x.clone()
                } else {
                    random_instance(&mut rng, kind)
                };
                DiffPair { x, y, k: rng.gen_range(1..=3) }
            })
            .collect();

        // the oracle under test is machine-backed wherever a self-reduction
        // machine exists; #Sat is checked against direct evaluation
        let machine_tot = move |x: &ProblemInstance| -> Result<BigUint> {
            Ok(counts(&self_reduction_machine(x)?)?.tot())
        };
        let brute = move |x: &ProblemInstance| brute_force_count(x, &caps);
        let naive = |x: &ProblemInstance| match x {
            ProblemInstance::Sat(f) => Ok(naive_sat(f)),
            other => Err(Error::KindMismatch(format!("expected sat, got {}", other.kind()))),
        };
        let negative = cfg.negative_control;
        let (under_test, reference): (Box<CountFn>, &CountFn) = if kind == ProblemKind::Sat {
            (Box::new(brute), &naive)
        } else {
            (Box::new(machine_tot), &brute)
        };
        let oracle = FnOracle::new(format!("{kind}"), move |x: &ProblemInstance| {
            let c = under_test(x)?;
            Ok(if negative { c ^ BigUint::one() } else { c })
        });
        let rows = par_map(&pairs, |i, pair| {
            Case::from_result(
                format!("{kind} {i} x=[{}] y=[{}]", compact(&pair.x), compact(&pair.y)),
                diff_case(&oracle, reference, i, pair),
            )
        });
        report.add_stat(&format!("{kind}-pairs"), pairs.len());
        report.record_all(rows);
    }
}

// ---------------------------------------------------------------------------
// Scaling identity

/// A CNF on three variables with exactly `s <= 8` satisfying assignments:
/// each excluded assignment gets a clause of its own. `high` excludes
/// from the top of the assignment order instead of the bottom.
fn cnf_with_count(s: usize, high: bool) -> CnfFormula {
    let excluded: Vec<u64> = if high {
        (s as u64..8).collect()
    } else {
        (0..8 - s as u64).collect()
    };
    let clauses = excluded
        .into_iter()
        .map(|a| {
            (0..3)
                .map(|v| {
                    let lit = v + 1;
                    if a >> v & 1 == 1 {
                        -lit
                    } else {
                        lit
                    }
                })
                .collect()
        })
        .collect();
    CnfFormula::new(3, clauses).expect("literals in range")
}

/// Vertices of [`scaling_graph`].
fn scaling_vertices(t: usize, c: usize) -> usize {
    4 * t + if c == 0 { 1 } else { 2 * c }
}

/// `t` disjoint 4-cycles (two perfect matchings each) next to a gadget
/// with exactly `c` perfect matchings: a hub joined to `t_1..t_c` and
/// connectors `r_j` joined to `t_j` and `t_{j+1}`. The hub's partner fixes
/// how the connectors match. A single vertex stands in for `c = 0`.
fn scaling_graph(rng: &mut impl Rng, t: usize, c: usize) -> Graph {
    let n = scaling_vertices(t, c);
    let mut labels: Vec<usize> = (0..n).collect();
    labels.shuffle(rng);
    let mut edges = Vec::new();
    for i in 0..t {
        let b = 4 * i;
        edges.extend([(b, b + 1), (b + 1, b + 2), (b + 2, b + 3), (b + 3, b)]);
    }
    let hub = 4 * t;
    for i in 1..=c {
        edges.push((hub, hub + i));
    }
    for j in 1..c {
        let r = hub + c + j;
        edges.push((r, hub + j));
        edges.push((r, hub + j + 1));
    }
    Graph::new(n, edges.into_iter().map(|(u, v)| (labels[u], labels[v]))).expect("valid edges")
}

fn scaling(cfg: &SuiteConfig, report: &mut Report) {
    let caps = cfg.caps;
    let mut rng = corpus::rng(cfg.corpus.seed, STREAM_SCALING);
    let mut quads = Vec::new();
    for t in 0..=3usize {
        for s in 0..=8usize {
            for s2 in 0..=8usize {
                let fits = scaling_vertices(t, s).max(scaling_vertices(t, s2)) <= caps.max_vertices;
                if s == s2 || !fits {
                    continue;
                }
                let built_t = if cfg.negative_control { t + 1 } else { t };
                let g = scaling_graph(&mut rng, built_t, s);
                let g2 = scaling_graph(&mut rng, t, s2);
                quads.push((t, s, s2, cnf_with_count(s, false), cnf_with_count(s2, true), g, g2));
            }
        }
    }
    let rows = par_map(&quads, |_, (t, s, s2, phi, phi2, g, g2)| {
        let (t, s, s2) = (*t, *s, *s2);
        let label = format!("T={t} sat={s}-{s2}");
        let case = Case::from_result(
            &label,
            (|| {
                let sat = (count_sat(phi, &caps)?, count_sat(phi2, &caps)?);
                let pm = (count_perfect_matchings(g, &caps)?, count_perfect_matchings(g2, &caps)?);
                let counts_ok = sat == (BigUint::from(s), BigUint::from(s2))
                    && pm == (BigUint::from(s << t), BigUint::from(s2 << t));
                let holds = verify_diff_scaling(phi, phi2, g, g2, t, &caps)?;
                let above = verify_diff_scaling(phi, phi2, g, g2, t + 1, &caps)?;
                let below = t > 0 && verify_diff_scaling(phi, phi2, g, g2, t - 1, &caps)?;
                let mut reflexive = true;
                for tt in [0, 1, t, caps.max_scaling_exponent] {
                    reflexive &= verify_diff_scaling(phi, phi, g, g, tt, &caps)?;
                    reflexive &= verify_diff_scaling(phi2, phi2, g2, g2, tt, &caps)?;
                }
                let ok = counts_ok && holds && !above && !below && reflexive;
                let line = format!(
                    "{label} pm={}-{} at-T={holds} at-T+1={above} at-T-1={below} reflexive={reflexive}",
                    pm.0, pm.1
                );
                Ok(Case::new(ok, line))
            })(),
        );
        case.tagged("quadruples")
    });
    report.record_all(rows);

    // reflexive quadruples on random instances, any T
    let randoms: Vec<_> = (0..cfg.instances.min(100))
        .map(|_| {
            let n = rng.gen_range(1..=8);
            let m = rng.gen_range(0..=6);
            let phi = random_cnf(&mut rng, n, m, 3);
            let v = rng.gen_range(0..=12);
            let p = rng.gen_range(0.2..0.8);
            let g = random_graph(&mut rng, v, p);
            let t = rng.gen_range(0..=caps.max_scaling_exponent);
            (phi, g, t)
        })
        .collect();
    let rows = par_map(&randoms, |i, (phi, g, t)| {
        let label = format!("reflexive {i} T={t}");
        Case::from_result(
            &label,
            (|| {
                let ok = verify_diff_scaling(phi, phi, g, g, *t, &caps)?;
                Ok(Case::new(
                    ok,
                    if ok {
                        label.clone()
                    } else {
                        format!(
                            "{label} phi=[{}] g=[{}]",
                            compact(&ProblemInstance::Sat(phi.clone())),
                            compact(&ProblemInstance::PerfectMatchings(g.clone()))
                        )
                    },
                ))
            })(),
        )
        .tagged("reflexive")
    });
    report.record_all(rows);
}

// ---------------------------------------------------------------------------
// Parsimonious reductions

fn parsimony_lines(r: &ParsimonyReport, prefix: &str) -> Vec<Case> {
    let show = |c: &Option<BigUint>| c.as_ref().map_or("?".to_string(), |c| c.to_string());
    r.entries
        .iter()
        .map(|e| {
            let mut line = format!(
                "{prefix}{} {} {}/{}",
                show(&e.source_count),
                show(&e.target_count),
                r.reduction,
                e.id
            );
            if let Some(err) = &e.error {
                line.push_str(&format!(" # {err}"));
            }
            Case::new(e.passed(), line).tagged(format!("instances-{}", r.reduction))
        })
        .collect()
}

fn parsimony(cfg: &SuiteConfig, report: &mut Report) -> Result<()> {
    let caps = cfg.caps;
    let mut rng = corpus::rng(cfg.corpus.seed, STREAM_PARSIMONY);
    let n = cfg.instances;
    let cnfs: Vec<(String, ProblemInstance)> = (0..n)
        .map(|i| {
            let vars = rng.gen_range(6..=10);
            let m = rng.gen_range(1..=8);
            (format!("cnf-{i}"), ProblemInstance::Sat(random_cnf(&mut rng, vars, m, 3)))
        })
        .collect();
    let dnfs: Vec<(String, ProblemInstance)> = (0..n)
        .map(|i| {
            let vars = rng.gen_range(6..=10);
            let m = rng.gen_range(1..=5);
            (format!("dnf-{i}"), ProblemInstance::DnfSat(random_dnf(&mut rng, vars, m, 4)))
        })
        .collect();
    let mut perm: Vec<usize> = (0..6).collect();
    perm.shuffle(&mut rng);
    let mut perm2: Vec<usize> = (0..6).collect();
    perm2.shuffle(&mut rng);
    let perm_text = |p: &[usize]| p.iter().map(usize::to_string).collect::<Vec<_>>().join(",");

    let brute = BruteForce { caps };
    let leaves = subtree_leaf_oracle(caps);
    let rename_dnf = variable_renaming(ProblemKind::DnfSat, perm2.clone())?;
    let subjects: Vec<Subject> = vec![
        (identity(ProblemKind::Sat), &cnfs, &brute, "random 3-CNF, 6..10 variables".into()),
        (
            variable_renaming(ProblemKind::Sat, perm.clone())?,
            &cnfs,
            &brute,
            format!("random 3-CNF, 6..10 variables, permutation {}", perm_text(&perm)),
        ),
        (
            rename_dnf.clone(),
            &dnfs,
            &brute,
            format!("random DNF, 6..10 variables, permutation {}", perm_text(&perm2)),
        ),
        (dnf_to_subtree(), &dnfs, &leaves, "random DNF, 6..10 variables, leaf counting".into()),
        (
            compose(&rename_dnf, &dnf_to_subtree())?,
            &dnfs,
            &leaves,
            "random DNF, 6..10 variables, leaf counting".into(),
        ),
    ];
    let control = drop_last_term();

    for (r, corpus, g, description) in &subjects {
        let pr = check_parsimonious(r, &brute, *g, corpus, description);
        report.note(format!(
            "# reduction={} f={} g={} corpus={}",
            pr.reduction, pr.source_oracle, pr.target_oracle, pr.corpus
        ));
        report.record_all(parsimony_lines(&pr, ""));
    }

    let pr = check_parsimonious(&control, &brute, &brute, &dnfs, "random DNF, 6..10 variables");
    report.note(format!(
        "# control reduction={} f={} g={} corpus={}",
        pr.reduction, pr.source_oracle, pr.target_oracle, pr.corpus
    ));
    if cfg.negative_control {
        report.record_all(parsimony_lines(&pr, ""));
    } else {
        // the control must be caught: it passes when it fails
        let witnesses = parsimony_lines(&pr, "");
        let failures: Vec<_> = witnesses.iter().filter(|c| !c.passed).collect();
        let caught = !failures.is_empty();
        let witness = failures.first().map_or("none".to_string(), |c| c.line.clone());
        report.record(Case::new(
            caught,
            format!(
                "control {} caught failed={} witness=[FAIL {witness}]",
                pr.reduction,
                failures.len()
            ),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SuiteConfig {
        SuiteConfig {
            corpus: CorpusConfig {
                count: 60,
                ..CorpusConfig::default()
            },
            instances: 20,
            ..SuiteConfig::default()
        }
    }

    #[test]
    fn ids_round_trip() {
        for p in Proposition::ALL {
            assert_eq!(p.id().parse::<Proposition>().unwrap(), p);
        }
        assert!("nope".parse::<Proposition>().is_err());
    }

    #[test]
    fn corpus_suites_pass_and_controls_fail() {
        let cfg = small();
        let negative = SuiteConfig {
            negative_control: true,
            ..small()
        };
        for p in [
            Proposition::Closure,
            Proposition::GapDecompose,
            Proposition::Normalize,
            Proposition::ModK,
            Proposition::Parity,
            Proposition::PolyBounded,
        ] {
            let r = run(p, &cfg).unwrap();
            assert!(r.passed(), "{r}");
            let bad = run(p, &negative).unwrap();
            assert!(!bad.passed(), "{p} negative control passed");
            assert!(bad.failures().next().is_some());
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let cfg = small();
        let a = run(Proposition::ClosureAdd, &cfg).unwrap().to_string();
        let b = run(Proposition::ClosureAdd, &cfg).unwrap().to_string();
        assert_eq!(a, b);
        assert!(a.ends_with("SUMMARY PASS proposition=closure-add cases=60 failed=0\n"));
    }

    #[test]
    fn naive_addition_is_caught_with_counterexample() {
        let cfg = SuiteConfig {
            negative_control: true,
            ..small()
        };
        let r = run(Proposition::ClosureAdd, &cfg).unwrap();
        let line = r.failures().next().unwrap();
        assert!(line.contains("expected=") && line.contains("A=") && line.contains("B="), "{line}");
    }

    #[test]
    fn bad_modulus_is_a_parameter_error() {
        let cfg = SuiteConfig {
            k_values: vec![1],
            ..small()
        };
        assert!(matches!(run(Proposition::ModK, &cfg), Err(Error::Parameter(_))));
    }

    #[test]
    fn scaling_gadget_counts() {
        let mut rng = corpus::rng(0, 0);
        let caps = Caps {
            max_vertices: 32,
            ..Caps::default()
        };
        for c in 0..=5 {
            for t in 0..=2 {
                let g = scaling_graph(&mut rng, t, c);
                let pm = count_perfect_matchings(&g, &caps).unwrap();
                assert_eq!(pm, BigUint::from(c << t), "t={t} c={c}");
            }
        }
        for s in 0..=8 {
            for high in [false, true] {
                let f = cnf_with_count(s, high);
                assert_eq!(count_sat(&f, &Caps::default()).unwrap(), BigUint::from(s));
            }
        }
    }

    #[test]
    fn problem_suites_pass_and_controls_fail() {
        let cfg = SuiteConfig {
            instances: 12,
            ..small()
        };
        let negative = SuiteConfig {
            negative_control: true,
            ..cfg.clone()
        };
        for p in [Proposition::DiffFamily, Proposition::Scaling, Proposition::Parsimony] {
            let r = run(p, &cfg).unwrap();
            assert!(r.passed(), "{r}");
            assert!(!run(p, &negative).unwrap().passed(), "{p}");
        }
    }
}
