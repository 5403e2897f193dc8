//! Abstract syntax of tick-instrumented pi-calculus processes with integer
//! time annotations `n : P`.

mod canon;
mod parse;
mod subst;

pub use canon::{canonicalize, congruent, embed, CanonicalForm};
pub use parse::parse_process;
pub use subst::{free_names, substitute, SubstError};

use std::collections::BTreeSet;
use std::fmt;

pub type Name = String;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Var(Name),
    Zero,
    Succ(Box<Expr>),
    FnApp(String, Vec<Expr>),
}

impl Expr {
    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn numeral(n: u64) -> Expr {
        let mut e = Expr::Zero;
        for _ in 0..n {
            e = Expr::Succ(Box::new(e));
        }
        e
    }

    /// The value of a ground successor chain, if the expression is one.
    pub fn as_numeral(&self) -> Option<u64> {
        match self {
            Expr::Zero => Some(0),
            Expr::Succ(e) => e.as_numeral().map(|n| n + 1),
            _ => None,
        }
    }

    pub fn free_names(&self, out: &mut BTreeSet<Name>) {
        match self {
            Expr::Var(v) => {
                out.insert(v.clone());
            }
            Expr::Zero => {}
            Expr::Succ(e) => e.free_names(out),
            Expr::FnApp(_, args) => {
                for a in args {
                    a.free_names(out);
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Process {
    Nil,
    Par(Box<Process>, Box<Process>),
    Input(Name, Vec<Name>, Box<Process>),
    ReplInput(Name, Vec<Name>, Box<Process>),
    Output(Name, Vec<Expr>, Box<Process>),
    New(Name, Box<Process>),
    Tick(Box<Process>),
    /// `match e { 0 => P ; s(x) => Q }` with `x` bound in `Q`.
    Match(Expr, Box<Process>, Name, Box<Process>),
    /// `n : P`, the annotated construct recording elapsed time.
    Annot(u64, Box<Process>),
}

impl Process {
    pub fn par(l: Process, r: Process) -> Process {
        Process::Par(Box::new(l), Box::new(r))
    }

    pub fn tick(p: Process) -> Process {
        Process::Tick(Box::new(p))
    }

    pub fn annot(n: u64, p: Process) -> Process {
        Process::Annot(n, Box::new(p))
    }

    pub fn input(chan: impl Into<Name>, params: Vec<Name>, p: Process) -> Process {
        Process::Input(chan.into(), params, Box::new(p))
    }

    pub fn output(chan: impl Into<Name>, args: Vec<Expr>, p: Process) -> Process {
        Process::Output(chan.into(), args, Box::new(p))
    }

    pub fn new_chan(name: impl Into<Name>, p: Process) -> Process {
        Process::New(name.into(), Box::new(p))
    }

    pub fn contains_annot(&self) -> bool {
        match self {
            Process::Annot(..) => true,
            Process::Nil => false,
            Process::Par(l, r) => l.contains_annot() || r.contains_annot(),
            Process::Input(_, _, p) | Process::ReplInput(_, _, p) | Process::Output(_, _, p) => {
                p.contains_annot()
            }
            Process::New(_, p) | Process::Tick(p) => p.contains_annot(),
            Process::Match(_, p, _, q) => p.contains_annot() || q.contains_annot(),
        }
    }
}

fn is_par(p: &Process) -> bool {
    matches!(p, Process::Par(..))
}

/// Whether the printed form ends in an open `new` scope that would swallow
/// a following `| Q` on reparse.
fn extends_right(p: &Process) -> bool {
    match p {
        Process::New(..) => true,
        Process::Annot(_, q) => extends_right(q),
        Process::Tick(q)
        | Process::Input(_, _, q)
        | Process::ReplInput(_, _, q)
        | Process::Output(_, _, q) => extends_right(q),
        Process::Par(_, r) => extends_right(r),
        Process::Nil | Process::Match(..) => false,
    }
}

fn fmt_prefix(p: &Process, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if is_par(p) {
        write!(f, "(")?;
        fmt_proc(p, f)?;
        write!(f, ")")
    } else {
        fmt_proc(p, f)
    }
}

fn fmt_cont(p: &Process, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if matches!(p, Process::Nil) {
        Ok(())
    } else {
        write!(f, ".")?;
        fmt_prefix(p, f)
    }
}

fn fmt_proc(p: &Process, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match p {
        Process::Nil => write!(f, "0"),
        Process::Par(l, r) => {
            if is_par(l) || extends_right(l) {
                write!(f, "(")?;
                fmt_proc(l, f)?;
                write!(f, ")")?;
            } else {
                fmt_proc(l, f)?;
            }
            write!(f, " | ")?;
            // right-associative: the right operand needs no parentheses
            fmt_proc(r, f)
        }
        Process::Input(a, params, p) => {
            write!(f, "{a}?({})", params.join(","))?;
            fmt_cont(p, f)
        }
        Process::ReplInput(a, params, p) => {
            write!(f, "!{a}?({})", params.join(","))?;
            fmt_cont(p, f)
        }
        Process::Output(a, args, p) => {
            write!(f, "{a}!(")?;
            for (k, e) in args.iter().enumerate() {
                if k > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{e}")?;
            }
            write!(f, ")")?;
            fmt_cont(p, f)
        }
        Process::New(a, p) => {
            write!(f, "new {a} in ")?;
            fmt_proc(p, f)
        }
        Process::Tick(p) => {
            write!(f, "tick")?;
            if matches!(**p, Process::Nil) {
                write!(f, ".0")
            } else {
                fmt_cont(p, f)
            }
        }
        Process::Match(e, z, x, s) => {
            write!(f, "match {e} {{ 0 => ")?;
            fmt_proc(z, f)?;
            write!(f, " ; s({x}) => ")?;
            fmt_proc(s, f)?;
            write!(f, " }}")
        }
        Process::Annot(n, p) => {
            write!(f, "{n} : ")?;
            fmt_prefix(p, f)
        }
    }
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_proc(self, f)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(n) = self.as_numeral() {
            return write!(f, "{n}");
        }
        match self {
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Zero => write!(f, "0"),
            Expr::Succ(e) => write!(f, "s({e})"),
            Expr::FnApp(name, args) => {
                write!(f, "{name}(")?;
                for (k, a) in args.iter().enumerate() {
                    if k > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}
