//! Decision problems defined from a counting function `#A`: parity,
//! mod-k, and comparisons of `#A(x)` with `#A(y)`, the last two as promise
//! problems.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::machine::{path_counts, MachineRef};
use crate::problems::{
    brute_force_count, count_perfect_matchings, count_sat, Caps, CnfFormula, Graph,
    ProblemInstance,
};

/// An exact counting function over instances of type `I`.
pub trait CountingOracle<I: ?Sized>: Send + Sync {
    fn name(&self) -> String;
    fn count(&self, instance: &I) -> Result<BigUint>;
}

/// Counts each instance with the brute-force oracle of its problem.
#[derive(Debug, Clone, Copy, Default)]
pub struct BruteForce {
    pub caps: Caps,
}

impl CountingOracle<ProblemInstance> for BruteForce {
    fn name(&self) -> String {
        "brute-force".into()
    }

    fn count(&self, instance: &ProblemInstance) -> Result<BigUint> {
        brute_force_count(instance, &self.caps)
    }
}

/// `tot` of a machine, as a function of its input.
#[derive(Debug, Clone)]
pub struct TotOracle(pub MachineRef);

impl CountingOracle<str> for TotOracle {
    fn name(&self) -> String {
        "tot".into()
    }

    fn count(&self, input: &str) -> Result<BigUint> {
        Ok(path_counts(self.0.as_ref(), input)?.tot())
    }
}

/// `acc` of a machine, as a function of its input.
#[derive(Debug, Clone)]
pub struct AccOracle(pub MachineRef);

impl CountingOracle<str> for AccOracle {
    fn name(&self) -> String {
        "acc".into()
    }

    fn count(&self, input: &str) -> Result<BigUint> {
        Ok(path_counts(self.0.as_ref(), input)?.accepting)
    }
}

/// An oracle backed by a closure.
pub struct FnOracle<F> {
    name: String,
    count: F,
}

impl<F> FnOracle<F> {
    pub fn new(name: impl Into<String>, count: F) -> Self {
        FnOracle {
            name: name.into(),
            count,
        }
    }
}

impl<I: ?Sized, F> CountingOracle<I> for FnOracle<F>
where
    F: Fn(&I) -> Result<BigUint> + Send + Sync,
{
    fn name(&self) -> String {
        self.name.clone()
    }

    fn count(&self, instance: &I) -> Result<BigUint> {
        (self.count)(instance)
    }
}

/// Outcome of a promise problem on one input.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PromiseVerdict {
    Yes,
    No,
    /// The input lies outside both promise sets; carries `#A(x) - #A(y)`.
    Violated(BigInt),
}

impl fmt::Display for PromiseVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PromiseVerdict::Yes => f.write_str("YES"),
            PromiseVerdict::No => f.write_str("NO"),
            PromiseVerdict::Violated(d) => write!(f, "VIOLATED {d}"),
        }
    }
}

impl FromStr for PromiseVerdict {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::format(0, format!("bad verdict {s:?}"));
        match s.trim() {
            "YES" => Ok(PromiseVerdict::Yes),
            "NO" => Ok(PromiseVerdict::No),
            other => {
                let diff = other.strip_prefix("VIOLATED ").ok_or_else(bad)?;
                Ok(PromiseVerdict::Violated(diff.trim().parse().map_err(|_| bad())?))
            }
        }
    }
}

/// Whether `#A(x)` is odd.
pub fn parity_of<I: ?Sized>(oracle: &dyn CountingOracle<I>, x: &I) -> Result<bool> {
    Ok(oracle.count(x)?.bit(0))
}

/// `(#A(x) mod k, #A(x) mod k != 0)`.
pub fn modk_of<I: ?Sized>(
    oracle: &dyn CountingOracle<I>,
    x: &I,
    k: usize,
) -> Result<(BigUint, bool)> {
    if k < 2 {
        return Err(Error::Parameter(format!("modulus k must be at least 2, got {k}")));
    }
    let residue = oracle.count(x)? % BigUint::from(k);
    let accept = !residue.is_zero();
    Ok((residue, accept))
}

fn difference<I: ?Sized>(oracle: &dyn CountingOracle<I>, x: &I, y: &I) -> Result<BigInt> {
    Ok(BigInt::from(oracle.count(x)?) - BigInt::from(oracle.count(y)?))
}

/// Whether `#A(x) = #A(y)`.
pub fn diff_eq0<I: ?Sized>(oracle: &dyn CountingOracle<I>, x: &I, y: &I) -> Result<bool> {
    Ok(difference(oracle, x, y)?.is_zero())
}

/// Whether `#A(x) > #A(y)`.
pub fn diff_gt0<I: ?Sized>(oracle: &dyn CountingOracle<I>, x: &I, y: &I) -> Result<bool> {
    Ok(difference(oracle, x, y)? > BigInt::zero())
}

/// Yes iff `#A(x) - #A(y) = 1`, no iff the difference is 0.
pub fn diff_eq1<I: ?Sized>(oracle: &dyn CountingOracle<I>, x: &I, y: &I) -> Result<PromiseVerdict> {
    diff_eqg(oracle, x, y, 1)
}

/// Yes iff `#A(x) - #A(y) = k`, no iff the difference is 0. `k` must be
/// positive.
pub fn diff_eqg<I: ?Sized>(
    oracle: &dyn CountingOracle<I>,
    x: &I,
    y: &I,
    k: u64,
) -> Result<PromiseVerdict> {
    if k == 0 {
        return Err(Error::Parameter("gap k must be positive".into()));
    }
    let d = difference(oracle, x, y)?;
    Ok(if d.is_zero() {
        PromiseVerdict::No
    } else if d == BigInt::from(k) {
        PromiseVerdict::Yes
    } else {
        PromiseVerdict::Violated(d)
    })
}

/// Checks `2^T * (#Sat(φ) - #Sat(φ')) = #PerfMatch(G) - #PerfMatch(G')`
/// exactly.
pub fn verify_diff_scaling(
    phi: &CnfFormula,
    phi_prime: &CnfFormula,
    g: &Graph,
    g_prime: &Graph,
    t: usize,
    caps: &Caps,
) -> Result<bool> {
    if t > caps.max_scaling_exponent {
        return Err(Error::Capacity {
            what: "scaling exponent T",
            actual: t,
            limit: caps.max_scaling_exponent,
        });
    }
    let sat_diff = BigInt::from(count_sat(phi, caps)?) - BigInt::from(count_sat(phi_prime, caps)?);
    let pm_diff = BigInt::from(count_perfect_matchings(g, caps)?)
        - BigInt::from(count_perfect_matchings(g_prime, caps)?);
    Ok((BigInt::one() << t) * sat_diff == pm_diff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{DnfFormula, ProblemKind};

    fn brute() -> BruteForce {
        BruteForce::default()
    }

    fn complete(n: usize) -> Graph {
        Graph::new(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)))).unwrap()
    }

    fn cycle(n: usize) -> Graph {
        Graph::new(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    fn pm(g: Graph) -> ProblemInstance {
        ProblemInstance::PerfectMatchings(g)
    }

    fn sat(n: usize, clauses: Vec<Vec<i32>>) -> ProblemInstance {
        ProblemInstance::Sat(CnfFormula::new(n, clauses).unwrap())
    }

    #[test]
    fn parity_examples() {
        let o = brute();
        assert!(!parity_of(&o, &sat(1, vec![vec![1], vec![-1]])).unwrap());
        let edge = ProblemInstance::IndependentSets(Graph::new(2, [(0, 1)]).unwrap());
        assert!(parity_of(&o, &edge).unwrap());
        assert!(parity_of(&o, &pm(complete(4))).unwrap());
    }

    #[test]
    fn modk_examples() {
        let o = brute();
        let zero = sat(1, vec![vec![1], vec![-1]]);
        assert_eq!(modk_of(&o, &zero, 5).unwrap(), (0u32.into(), false));
        let triangle = ProblemInstance::IndependentSets(complete(3));
        assert_eq!(modk_of(&o, &triangle, 4).unwrap(), (0u32.into(), false));
        let three = sat(2, vec![vec![1, 2]]);
        assert_eq!(modk_of(&o, &three, 2).unwrap(), (1u32.into(), true));
        assert!(matches!(modk_of(&o, &three, 1), Err(Error::Parameter(_))));
    }

    #[test]
    fn comparison_examples() {
        let o = brute();
        let k4 = pm(complete(4));
        assert!(diff_eq0(&o, &k4, &k4).unwrap());
        assert!(!diff_gt0(&o, &k4, &k4).unwrap());
        let c6 = pm(cycle(6));
        assert!(!diff_eq0(&o, &k4, &c6).unwrap());
        assert!(diff_gt0(&o, &k4, &c6).unwrap());
        // 2 vs 5 satisfying assignments
        let two = sat(2, vec![vec![1]]);
        let five = sat(3, vec![vec![1, 2], vec![1, 3]]);
        assert_eq!(brute().count(&five).unwrap(), 5u32.into());
        assert!(!diff_gt0(&o, &two, &five).unwrap());
    }

    #[test]
    fn promise_examples() {
        let o = brute();
        let two = sat(2, vec![vec![1]]);
        let five = sat(3, vec![vec![1, 2], vec![1, 3]]);
        let three = sat(2, vec![vec![1, 2]]);
        assert_eq!(diff_eq1(&o, &two, &two).unwrap(), PromiseVerdict::No);
        assert_eq!(diff_eqg(&o, &five, &two, 3).unwrap(), PromiseVerdict::Yes);
        assert_eq!(diff_eq1(&o, &three, &two).unwrap(), PromiseVerdict::Yes);
        assert_eq!(diff_eq1(&o, &two, &three).unwrap(), PromiseVerdict::Violated((-1).into()));
        let zero = sat(1, vec![vec![1], vec![-1]]);
        assert_eq!(diff_eq1(&o, &two, &zero).unwrap(), PromiseVerdict::Violated(2.into()));
        assert!(diff_eqg(&o, &two, &zero, 0).is_err());
    }

    #[test]
    fn verdict_tokens() {
        for v in [
            PromiseVerdict::Yes,
            PromiseVerdict::No,
            PromiseVerdict::Violated((-7).into()),
        ] {
            assert_eq!(v.to_string().parse::<PromiseVerdict>().unwrap(), v);
        }
        assert_eq!(PromiseVerdict::Violated(2.into()).to_string(), "VIOLATED 2");
        assert!("MAYBE".parse::<PromiseVerdict>().is_err());
    }

    #[test]
    fn scaling_examples() {
        let caps = Caps::default();
        let one = CnfFormula::new(1, vec![vec![1]]).unwrap();
        let zero = CnfFormula::new(1, vec![vec![1], vec![-1]]).unwrap();
        // two disjoint 4-cycles: 4 perfect matchings; two isolated vertices: 0
        let c4c4 = Graph::new(8, [(0, 1), (1, 2), (2, 3), (3, 0), (4, 5), (5, 6), (6, 7), (7, 4)]).unwrap();
        let isolated = Graph::new(2, []).unwrap();
        assert_eq!(count_perfect_matchings(&c4c4, &caps).unwrap(), 4u32.into());
        assert!(verify_diff_scaling(&one, &zero, &c4c4, &isolated, 2, &caps).unwrap());
        assert!(!verify_diff_scaling(&one, &zero, &c4c4, &isolated, 1, &caps).unwrap());
        assert!(verify_diff_scaling(&one, &one, &c4c4, &c4c4, 17, &caps).unwrap());
        assert!(verify_diff_scaling(&one, &one, &c4c4, &c4c4, 65, &caps).is_err());
    }

    #[test]
    fn machine_backed_oracles() {
        let m = crate::expr::Expr::parse("BR(LEAF(A),LEAF(A),LEAF(R))").unwrap().build_pure().unwrap();
        assert!(!parity_of(&AccOracle(m.clone()), "").unwrap());
        assert!(!parity_of(&TotOracle(m), "").unwrap());
        let dnf = ProblemInstance::DnfSat(DnfFormula::new(2, vec![vec![1]]).unwrap());
        let counted = FnOracle::new("dnf", |x: &ProblemInstance| brute().count(x));
        assert_eq!(counted.count(&dnf).unwrap(), 2u32.into());
        assert_eq!(ProblemKind::DnfSat, dnf.kind());
    }
}
