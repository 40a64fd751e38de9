//! Machine expressions.
//!
//! ```text
//! expr := LEAF(A|R) | BR(expr, expr, ...) | SUB1(expr) | ADD(expr,expr)
//!       | MUL(expr,expr) | SEQ(expr,expr) | DBLACC(expr) | MODK(expr,<k>)
//!       | MARKLM(expr) | NORM(expr,<p>) | PROB(<problem-file-ref>)
//! ```
//!
//! Whitespace is insignificant. `PROB(...)` takes everything up to the
//! closing parenthesis as a reference, resolved by a [`ProblemSource`].

use std::fmt;
use std::path::PathBuf;
use std::sync::Arc;

use crate::combinators::{
    acc_to_tot_modk, add, double_accepting, mark_leftmost_reject, multiply, seq, subtract_one,
};
use crate::error::{Error, Result};
use crate::machine::{branch, leaf, normalize_perfect, Machine, MachineKind, MachineRef, Node, Verdict};
use crate::problems::{self_reduction_machine, Caps, ProblemInstance, ProblemKind};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Leaf(Verdict),
    Branch(Vec<Expr>),
    Sub1(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Seq(Box<Expr>, Box<Expr>),
    DblAcc(Box<Expr>),
    ModK(Box<Expr>, usize),
    MarkLm(Box<Expr>),
    Norm(Box<Expr>, usize),
    Prob(String),
}

impl Expr {
    pub fn parse(text: &str) -> Result<Expr> {
        let mut parser = Parser { text, pos: 0 };
        let expr = parser.expr()?;
        parser.skip_ws();
        if parser.pos < text.len() {
            return Err(parser.error("trailing input after expression"));
        }
        Ok(expr)
    }

    /// Builds the machine. `PROB` references go through `problems`.
    pub fn build(&self, problems: &dyn ProblemSource) -> Result<MachineRef> {
        let b = |e: &Expr| e.build(problems);
        Ok(match self {
            Expr::Leaf(v) => leaf(*v),
            Expr::Branch(children) => branch(children.iter().map(b).collect::<Result<_>>()?)?,
            Expr::Sub1(e) => subtract_one(b(e)?),
            Expr::Add(x, y) => add(b(x)?, b(y)?),
            Expr::Mul(x, y) => multiply(b(x)?, b(y)?),
            Expr::Seq(x, y) => seq(b(x)?, b(y)?),
            Expr::DblAcc(e) => double_accepting(b(e)?),
            Expr::ModK(e, k) => acc_to_tot_modk(b(e)?, *k)?,
            Expr::MarkLm(e) => mark_leftmost_reject(b(e)?),
            Expr::Norm(e, p) => normalize_perfect(b(e)?, *p),
            Expr::Prob(reference) => problems.machine(reference)?,
        })
    }

    /// Builds a machine from an expression without `PROB` leaves.
    pub fn build_pure(&self) -> Result<MachineRef> {
        self.build(&NoProblems)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Leaf(Verdict::Accept) => f.write_str("LEAF(A)"),
            Expr::Leaf(Verdict::Reject) => f.write_str("LEAF(R)"),
            Expr::Branch(children) => {
                f.write_str("BR(")?;
                for (i, c) in children.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str(")")
            }
            Expr::Sub1(e) => write!(f, "SUB1({e})"),
            Expr::Add(x, y) => write!(f, "ADD({x},{y})"),
            Expr::Mul(x, y) => write!(f, "MUL({x},{y})"),
            Expr::Seq(x, y) => write!(f, "SEQ({x},{y})"),
            Expr::DblAcc(e) => write!(f, "DBLACC({e})"),
            Expr::ModK(e, k) => write!(f, "MODK({e},{k})"),
            Expr::MarkLm(e) => write!(f, "MARKLM({e})"),
            Expr::Norm(e, p) => write!(f, "NORM({e},{p})"),
            Expr::Prob(r) => write!(f, "PROB({r})"),
        }
    }
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: impl Into<String>) -> Error {
        self.error_at(self.pos, message)
    }

    fn error_at(&self, pos: usize, message: impl Into<String>) -> Error {
        let before = &self.text[..pos];
        let line = before.matches('\n').count() + 1;
        let column = before.rfind('\n').map_or(pos, |i| pos - i - 1) + 1;
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        let rest = &self.text[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.text[self.pos..].chars().next()
    }

    fn expect(&mut self, c: char) -> Result<()> {
        match self.peek() {
            Some(found) if found == c => {
                self.pos += c.len_utf8();
                Ok(())
            }
            Some(found) => Err(self.error(format!("expected '{c}', found '{found}'"))),
            None => Err(self.error(format!("expected '{c}', found end of input"))),
        }
    }

    fn word(&mut self) -> Result<(usize, String)> {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.text[start..];
        let len = rest
            .find(|c: char| !c.is_ascii_alphanumeric() && c != '_')
            .unwrap_or(rest.len());
        if len == 0 {
            return Err(self.error("expected a name or number"));
        }
        self.pos += len;
        Ok((start, self.text[start..start + len].to_string()))
    }

    fn number(&mut self) -> Result<usize> {
        let (start, w) = self.word()?;
        w.parse()
            .map_err(|_| self.error_at(start, format!("expected a number, found {w:?}")))
    }

    /// Comma-separated sub-expressions up to the closing parenthesis.
    fn exprs(&mut self) -> Result<Vec<Expr>> {
        let mut out = vec![self.expr()?];
        while self.peek() == Some(',') {
            self.pos += 1;
            out.push(self.expr()?);
        }
        Ok(out)
    }

    fn exact<const N: usize>(&mut self, head: &str, start: usize) -> Result<[Box<Expr>; N]> {
        let args = self.exprs()?;
        let found = args.len();
        let boxed: Vec<Box<Expr>> = args.into_iter().map(Box::new).collect();
        boxed.try_into().map_err(|_| {
            self.error_at(
                start,
                format!("{head} takes {N} expression argument(s), found {found}"),
            )
        })
    }

    fn expr(&mut self) -> Result<Expr> {
        let (start, head) = self.word()?;
        self.expect('(')?;
        let expr = match head.as_str() {
            "LEAF" => {
                let (at, v) = self.word()?;
                match v.as_str() {
                    "A" => Expr::Leaf(Verdict::Accept),
                    "R" => Expr::Leaf(Verdict::Reject),
                    other => {
                        return Err(self.error_at(at, format!("LEAF takes A or R, found {other:?}")))
                    }
                }
            }
            "BR" => Expr::Branch(self.exprs()?),
            "SUB1" => {
                let [e] = self.exact::<1>(&head, start)?;
                Expr::Sub1(e)
            }
            "DBLACC" => {
                let [e] = self.exact::<1>(&head, start)?;
                Expr::DblAcc(e)
            }
            "MARKLM" => {
                let [e] = self.exact::<1>(&head, start)?;
                Expr::MarkLm(e)
            }
            "ADD" => {
                let [x, y] = self.exact::<2>(&head, start)?;
                Expr::Add(x, y)
            }
            "MUL" => {
                let [x, y] = self.exact::<2>(&head, start)?;
                Expr::Mul(x, y)
            }
            "SEQ" => {
                let [x, y] = self.exact::<2>(&head, start)?;
                Expr::Seq(x, y)
            }
            "MODK" | "NORM" => {
                let e = Box::new(self.expr()?);
                self.expect(',')?;
                let at = self.pos;
                let n = self.number()?;
                if head == "MODK" {
                    if n < 2 {
                        return Err(self.error_at(at, "MODK needs k >= 2"));
                    }
                    Expr::ModK(e, n)
                } else {
                    Expr::Norm(e, n)
                }
            }
            "PROB" => {
                self.skip_ws();
                let rest = &self.text[self.pos..];
                let Some(end) = rest.find(')') else {
                    return Err(self.error("unterminated PROB reference"));
                };
                let reference = rest[..end].trim().to_string();
                if reference.is_empty() {
                    return Err(self.error("empty PROB reference"));
                }
                self.pos += end;
                Expr::Prob(reference)
            }
            other => return Err(self.error_at(start, format!("unknown head {other:?}"))),
        };
        self.expect(')')?;
        Ok(expr)
    }
}

/// Resolves `PROB(<ref>)` leaves to machines.
pub trait ProblemSource {
    fn machine(&self, reference: &str) -> Result<MachineRef>;
}

/// Rejects every `PROB` reference.
pub struct NoProblems;

impl ProblemSource for NoProblems {
    fn machine(&self, reference: &str) -> Result<MachineRef> {
        Err(Error::Parameter(format!("no problem source for PROB({reference})")))
    }
}

/// The reference naming the machine input itself rather than a file.
pub const INPUT_REFERENCE: &str = "$input";

/// Reads problem files relative to a base directory and builds their
/// self-reduction machines. The reference `$input` instead parses the
/// machine's input as the problem instance.
pub struct FileProblems {
    pub base_dir: PathBuf,
    pub graph_kind: ProblemKind,
    pub caps: Caps,
}

impl ProblemSource for FileProblems {
    fn machine(&self, reference: &str) -> Result<MachineRef> {
        if reference == INPUT_REFERENCE {
            return Ok(Arc::new(InputProblem {
                graph_kind: self.graph_kind,
                caps: self.caps,
            }));
        }
        let path = self.base_dir.join(reference);
        let text = std::fs::read_to_string(&path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        self_reduction_machine(&ProblemInstance::parse(&text, self.graph_kind)?)
    }
}

/// Self-reduction machine of whatever instance arrives as input. Its
/// bounds cover every instance within the caps.
#[derive(Debug)]
struct InputProblem {
    graph_kind: ProblemKind,
    caps: Caps,
}

impl Machine for InputProblem {
    fn kind(&self) -> MachineKind {
        MachineKind::BaseProblem
    }

    fn depth_bound(&self) -> usize {
        let v = self.caps.max_vertices;
        let edges = v * v.saturating_sub(1) / 2;
        2 + edges
            .max(self.caps.max_vars)
            .max(self.caps.max_subtree_depth + 1)
    }

    fn fanout_bound(&self) -> usize {
        3
    }

    fn root(&self, input: &str) -> Result<Node> {
        let instance = ProblemInstance::parse(input, self.graph_kind)?;
        let too_big = match &instance {
            ProblemInstance::DnfSat(f) => f.num_vars() > self.caps.max_vars,
            ProblemInstance::PerfectMatchings(g) | ProblemInstance::IndependentSets(g) => {
                g.vertex_count() > self.caps.max_vertices
            }
            ProblemInstance::SizeOfSubtree(s) => s.depth() > self.caps.max_subtree_depth,
            ProblemInstance::Sat(_) => false,
        };
        if too_big {
            return Err(Error::Parameter("input instance exceeds the configured caps".into()));
        }
        self_reduction_machine(&instance)?.root(input)
    }
}
