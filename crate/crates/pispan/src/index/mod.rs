//! Symbolic index arithmetic over the naturals extended with infinity.
//!
//! Indices denote sizes and times. The function symbols are addition,
//! multiplication, truncated subtraction (`n - m = 0` when `m >= n`), max,
//! min, and a factorial defined by the recurrence `fact(0) = 0`,
//! `fact(i) = i * fact(i - 1)` (the base case is deliberately 0, not 1; the
//! sized-type rules for the factorial server discharge exactly the
//! constraints `i <= 0 |= fact(i) = i` and `i >= 1 |= i * fact(i-1) = fact(i)`,
//! which force it).

mod entails;
mod normal;
pub(crate) mod parse;

pub use entails::{entails, entails_all, EntailsConfig, Verdict};
pub use normal::{normalize, simplify};
pub use parse::{parse_constraint, parse_index, parse_interval, parse_valuation};

use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

pub type IdxVar = String;

/// A finite valuation of index variables. The paper's valuations range over
/// plain naturals; infinity only ever enters through the `inf` literal.
pub type Valuation = BTreeMap<IdxVar, u64>;

/// Declared index variable set (the ambient phi).
pub type VarSet = std::collections::BTreeSet<IdxVar>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IdxFn {
    Add,
    Mul,
    Sub,
    Max,
    Min,
    Fact,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Index {
    Var(IdxVar),
    Const(u64),
    Infinity,
    Fn(IdxFn, Vec<Index>),
}

#[allow(clippy::should_implement_trait)]
impl Index {
    pub fn var(name: impl Into<String>) -> Index {
        Index::Var(name.into())
    }

    pub fn add(a: Index, b: Index) -> Index {
        Index::Fn(IdxFn::Add, vec![a, b])
    }

    pub fn mul(a: Index, b: Index) -> Index {
        Index::Fn(IdxFn::Mul, vec![a, b])
    }

    pub fn sub(a: Index, b: Index) -> Index {
        Index::Fn(IdxFn::Sub, vec![a, b])
    }

    pub fn max_of(a: Index, b: Index) -> Index {
        Index::Fn(IdxFn::Max, vec![a, b])
    }

    pub fn min_of(a: Index, b: Index) -> Index {
        Index::Fn(IdxFn::Min, vec![a, b])
    }

    pub fn fact(a: Index) -> Index {
        Index::Fn(IdxFn::Fact, vec![a])
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Index::Const(0))
    }

    pub fn free_vars(&self, out: &mut VarSet) {
        match self {
            Index::Var(v) => {
                out.insert(v.clone());
            }
            Index::Const(_) | Index::Infinity => {}
            Index::Fn(_, args) => {
                for a in args {
                    a.free_vars(out);
                }
            }
        }
    }

    /// Simultaneous substitution of index variables. `inf[i := J] = inf`.
    pub fn subst_many(&self, map: &BTreeMap<IdxVar, Index>) -> Index {
        match self {
            Index::Var(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            Index::Const(_) | Index::Infinity => self.clone(),
            Index::Fn(f, args) => Index::Fn(*f, args.iter().map(|a| a.subst_many(map)).collect()),
        }
    }
}

/// Substitution of a single index variable.
pub fn subst_index(idx: &Index, var: &str, val: &Index) -> Index {
    let mut map = BTreeMap::new();
    map.insert(var.to_string(), val.clone());
    idx.subst_many(&map)
}

/// A natural number or infinity; the value domain of index interpretation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NatInf {
    Fin(u64),
    Inf,
}

#[allow(clippy::should_implement_trait)]
impl NatInf {
    pub fn add(self, other: NatInf) -> NatInf {
        match (self, other) {
            (NatInf::Fin(a), NatInf::Fin(b)) => NatInf::Fin(a.saturating_add(b)),
            _ => NatInf::Inf,
        }
    }

    pub fn mul(self, other: NatInf) -> NatInf {
        // inf * 0 = 0, inf * n = inf for n >= 1
        match (self, other) {
            (NatInf::Fin(a), NatInf::Fin(b)) => NatInf::Fin(a.saturating_mul(b)),
            (NatInf::Fin(0), NatInf::Inf) | (NatInf::Inf, NatInf::Fin(0)) => NatInf::Fin(0),
            _ => NatInf::Inf,
        }
    }

    /// Truncated subtraction: `n - m = 0` when `m >= n`; `inf - k = inf` for
    /// finite `k`. We read `inf - inf = 0` off the truncation rule.
    pub fn sub(self, other: NatInf) -> NatInf {
        match (self, other) {
            (_, NatInf::Inf) => NatInf::Fin(0),
            (NatInf::Inf, NatInf::Fin(_)) => NatInf::Inf,
            (NatInf::Fin(a), NatInf::Fin(b)) => NatInf::Fin(a.saturating_sub(b)),
        }
    }

    pub fn max(self, other: NatInf) -> NatInf {
        match (self, other) {
            (NatInf::Fin(a), NatInf::Fin(b)) => NatInf::Fin(a.max(b)),
            _ => NatInf::Inf,
        }
    }

    pub fn min(self, other: NatInf) -> NatInf {
        match (self, other) {
            (NatInf::Fin(a), NatInf::Fin(b)) => NatInf::Fin(a.min(b)),
            (NatInf::Inf, x) | (x, NatInf::Inf) => x,
        }
    }

    pub fn le(self, other: NatInf) -> bool {
        match (self, other) {
            (NatInf::Fin(a), NatInf::Fin(b)) => a <= b,
            (_, NatInf::Inf) => true,
            (NatInf::Inf, NatInf::Fin(_)) => false,
        }
    }

    pub fn lt(self, other: NatInf) -> bool {
        self.le(other) && self != other
    }
}

impl fmt::Display for NatInf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NatInf::Fin(n) => write!(f, "{n}"),
            NatInf::Inf => write!(f, "inf"),
        }
    }
}

/// Ground factorial per the registry recurrence (`fact(0) = 0`).
pub fn ground_fact(n: u64) -> u64 {
    let mut acc: u64 = 0; // fact(0)
    for k in 1..=n {
        acc = k.saturating_mul(acc);
    }
    acc
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IndexError {
    #[error("unbound index variable `{0}`")]
    UnboundIndexVariable(String),
}

/// Compositional interpretation of an index under a valuation.
pub fn eval_index(idx: &Index, rho: &Valuation) -> Result<NatInf, IndexError> {
    match idx {
        Index::Var(v) => rho
            .get(v)
            .map(|&n| NatInf::Fin(n))
            .ok_or_else(|| IndexError::UnboundIndexVariable(v.clone())),
        Index::Const(n) => Ok(NatInf::Fin(*n)),
        Index::Infinity => Ok(NatInf::Inf),
        Index::Fn(f, args) => {
            let vals: Vec<NatInf> = args
                .iter()
                .map(|a| eval_index(a, rho))
                .collect::<Result<_, _>>()?;
            Ok(apply_fn(*f, &vals))
        }
    }
}

fn apply_fn(f: IdxFn, vals: &[NatInf]) -> NatInf {
    match f {
        IdxFn::Add => vals.iter().copied().fold(NatInf::Fin(0), NatInf::add),
        IdxFn::Mul => vals.iter().copied().fold(NatInf::Fin(1), NatInf::mul),
        IdxFn::Sub => vals[0].sub(vals[1]),
        IdxFn::Max => vals.iter().copied().fold(NatInf::Fin(0), NatInf::max),
        IdxFn::Min => vals.iter().copied().fold(NatInf::Inf, NatInf::min),
        IdxFn::Fact => match vals[0] {
            NatInf::Fin(n) => NatInf::Fin(ground_fact(n)),
            // fact is identically 0 on the naturals, so the limit is 0 too
            NatInf::Inf => NatInf::Fin(0),
        },
    }
}

/// An interval `[lo, hi]` of indices. Serves as obligation, complexity and
/// general interval throughout.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Interval {
    pub lo: Index,
    pub hi: Index,
}

impl Interval {
    pub fn new(lo: Index, hi: Index) -> Interval {
        Interval { lo, hi }
    }

    pub fn point(n: u64) -> Interval {
        Interval {
            lo: Index::Const(n),
            hi: Index::Const(n),
        }
    }

    pub fn zero() -> Interval {
        Interval::point(0)
    }

    /// Pointwise interval addition `[I,J] + [I',J'] = [I+I', J+J']`.
    pub fn add(&self, other: &Interval) -> Interval {
        Interval {
            lo: normalize(&Index::add(self.lo.clone(), other.lo.clone())),
            hi: normalize(&Index::add(self.hi.clone(), other.hi.clone())),
        }
    }

    /// Pointwise max `[I,J] lub [I',J'] = [max(I,I'), max(J,J')]`.
    pub fn lub(&self, other: &Interval) -> Interval {
        Interval {
            lo: normalize(&Index::max_of(self.lo.clone(), other.lo.clone())),
            hi: normalize(&Index::max_of(self.hi.clone(), other.hi.clone())),
        }
    }

    pub fn subst_many(&self, map: &BTreeMap<IdxVar, Index>) -> Interval {
        Interval {
            lo: self.lo.subst_many(map),
            hi: self.hi.subst_many(map),
        }
    }

    pub fn free_vars(&self, out: &mut VarSet) {
        self.lo.free_vars(out);
        self.hi.free_vars(out);
    }

    /// Constraints expressing `self` included in `other` as intervals.
    pub fn included_in(&self, other: &Interval) -> Vec<Constraint> {
        vec![
            Constraint::new(other.lo.clone(), Rel::Le, self.lo.clone()),
            Constraint::new(self.hi.clone(), Rel::Le, other.hi.clone()),
        ]
    }

    /// Constraints expressing pointwise equality of the two intervals.
    pub fn equals(&self, other: &Interval) -> Vec<Constraint> {
        vec![
            Constraint::new(self.lo.clone(), Rel::Eq, other.lo.clone()),
            Constraint::new(self.hi.clone(), Rel::Eq, other.hi.clone()),
        ]
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.lo, self.hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rel {
    Le,
    Lt,
    Eq,
    Ne,
}

impl fmt::Display for Rel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rel::Le => write!(f, "<="),
            Rel::Lt => write!(f, "<"),
            Rel::Eq => write!(f, "="),
            Rel::Ne => write!(f, "!="),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub lhs: Index,
    pub rel: Rel,
    pub rhs: Index,
}

impl Constraint {
    pub fn new(lhs: Index, rel: Rel, rhs: Index) -> Constraint {
        Constraint { lhs, rel, rhs }
    }

    pub fn holds(&self, rho: &Valuation) -> Result<bool, IndexError> {
        let l = eval_index(&self.lhs, rho)?;
        let r = eval_index(&self.rhs, rho)?;
        Ok(match self.rel {
            Rel::Le => l.le(r),
            Rel::Lt => l.lt(r),
            Rel::Eq => l == r,
            Rel::Ne => l != r,
        })
    }

    pub fn free_vars(&self, out: &mut VarSet) {
        self.lhs.free_vars(out);
        self.rhs.free_vars(out);
    }

    pub fn subst_many(&self, map: &BTreeMap<IdxVar, Index>) -> Constraint {
        Constraint {
            lhs: self.lhs.subst_many(map),
            rel: self.rel,
            rhs: self.rhs.subst_many(map),
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.rel, self.rhs)
    }
}

pub type ConstraintSet = Vec<Constraint>;

// ---- display ----

fn prec_of(idx: &Index) -> u8 {
    match idx {
        Index::Fn(IdxFn::Add, _) | Index::Fn(IdxFn::Sub, _) => 1,
        Index::Fn(IdxFn::Mul, _) => 2,
        _ => 3,
    }
}

fn fmt_at(idx: &Index, min_prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let p = prec_of(idx);
    if p < min_prec {
        write!(f, "(")?;
        fmt_at(idx, 0, f)?;
        return write!(f, ")");
    }
    match idx {
        Index::Var(v) => write!(f, "{v}"),
        Index::Const(n) => write!(f, "{n}"),
        Index::Infinity => write!(f, "inf"),
        Index::Fn(IdxFn::Add, args) => {
            for (k, a) in args.iter().enumerate() {
                if k > 0 {
                    write!(f, " + ")?;
                }
                fmt_at(a, 2, f)?;
            }
            Ok(())
        }
        Index::Fn(IdxFn::Sub, args) => {
            fmt_at(&args[0], 1, f)?;
            write!(f, " - ")?;
            fmt_at(&args[1], 2, f)
        }
        Index::Fn(IdxFn::Mul, args) => {
            for (k, a) in args.iter().enumerate() {
                if k > 0 {
                    write!(f, "*")?;
                }
                fmt_at(a, 3, f)?;
            }
            Ok(())
        }
        Index::Fn(IdxFn::Max, args) | Index::Fn(IdxFn::Min, args) => {
            let name = if matches!(idx, Index::Fn(IdxFn::Max, _)) {
                "max"
            } else {
                "min"
            };
            write!(f, "{name}(")?;
            for (k, a) in args.iter().enumerate() {
                if k > 0 {
                    write!(f, ",")?;
                }
                fmt_at(a, 0, f)?;
            }
            write!(f, ")")
        }
        Index::Fn(IdxFn::Fact, args) => {
            write!(f, "fact(")?;
            fmt_at(&args[0], 0, f)?;
            write!(f, ")")
        }
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_at(self, 0, f)
    }
}
