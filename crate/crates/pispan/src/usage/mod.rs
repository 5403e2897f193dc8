//! Usages: CCS-like single-channel behaviours whose actions carry an
//! obligation interval (a guarantee on when the action becomes ready) and a
//! capacity (an assumption on how long a ready action waits for its
//! co-action). A capacity is either a plain upper bound `J`, understood as
//! the interval `[-inf, J]`, or a proper interval; the two are never
//! silently coerced (`A + J != A + [0,J]` in general).

mod normal;
pub(crate) mod parse;
mod reduce;
mod subusage;

pub use normal::{congruent_usages, norm, usages_equal};
pub use parse::parse_usage;
pub use reduce::{reachable_usages, reliable, usage_step, Reliability, StepSet, UsageConfig};
pub use subusage::{subusage, SubusageConfig};

use crate::index::{normalize, Constraint, Index, Interval, Rel};
use std::fmt;

/// Sorted atom multiset of a usage's normal form.
pub fn norm_atoms_of(u: &Usage) -> Vec<Usage> {
    normal::norm_atoms(u)
}

/// Rebuild a usage from an atom multiset.
pub fn rebuild_atoms(atoms: Vec<Usage>) -> Usage {
    normal::rebuild(atoms)
}

/// Obligation interval `[I, J]`.
pub type Obligation = Interval;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarity {
    In,
    Out,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Capacity {
    /// A single index `J`, read as the interval `[-inf, J]`.
    UpperOnly(Index),
    Interval(Interval),
}

impl Capacity {
    pub fn upper(j: impl Into<Index>) -> Capacity {
        Capacity::UpperOnly(j.into())
    }

    fn map(&self, f: impl Fn(&Index) -> Index) -> Capacity {
        match self {
            Capacity::UpperOnly(j) => Capacity::UpperOnly(f(j)),
            Capacity::Interval(iv) => Capacity::Interval(Interval::new(f(&iv.lo), f(&iv.hi))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Usage {
    Zero,
    Par(Box<Usage>, Box<Usage>),
    Act(Polarity, Obligation, Capacity, Box<Usage>),
    Bang(Box<Usage>),
    Choice(Box<Usage>, Box<Usage>),
}

impl Usage {
    pub fn par(l: Usage, r: Usage) -> Usage {
        Usage::Par(Box::new(l), Box::new(r))
    }

    pub fn input(o: Obligation, c: Capacity, cont: Usage) -> Usage {
        Usage::Act(Polarity::In, o, c, Box::new(cont))
    }

    pub fn output(o: Obligation, c: Capacity, cont: Usage) -> Usage {
        Usage::Act(Polarity::Out, o, c, Box::new(cont))
    }

    pub fn bang(u: Usage) -> Usage {
        Usage::Bang(Box::new(u))
    }

    pub fn choice(l: Usage, r: Usage) -> Usage {
        Usage::Choice(Box::new(l), Box::new(r))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Usage::Zero)
    }

    pub fn free_index_vars(&self, out: &mut crate::index::VarSet) {
        match self {
            Usage::Zero => {}
            Usage::Par(l, r) | Usage::Choice(l, r) => {
                l.free_index_vars(out);
                r.free_index_vars(out);
            }
            Usage::Bang(u) => u.free_index_vars(out),
            Usage::Act(_, o, c, cont) => {
                o.free_vars(out);
                match c {
                    Capacity::UpperOnly(j) => j.free_vars(out),
                    Capacity::Interval(iv) => iv.free_vars(out),
                }
                cont.free_index_vars(out);
            }
        }
    }

    pub fn subst_many(
        &self,
        map: &std::collections::BTreeMap<crate::index::IdxVar, Index>,
    ) -> Usage {
        match self {
            Usage::Zero => Usage::Zero,
            Usage::Par(l, r) => Usage::par(l.subst_many(map), r.subst_many(map)),
            Usage::Choice(l, r) => Usage::choice(l.subst_many(map), r.subst_many(map)),
            Usage::Bang(u) => Usage::bang(u.subst_many(map)),
            Usage::Act(p, o, c, cont) => Usage::Act(
                *p,
                o.subst_many(map),
                c.map(|j| j.subst_many(map)),
                Box::new(cont.subst_many(map)),
            ),
        }
    }
}

/// `A_o (+) J_c`: the interval within which a co-action must arrive, given
/// an obligation and the other side's capacity.
pub fn iplus(a: &Obligation, c: &Capacity) -> Interval {
    match c {
        Capacity::UpperOnly(j) => Interval::new(
            Index::Const(0),
            normalize(&Index::add(a.lo.clone(), j.clone())),
        ),
        Capacity::Interval(iv) => Interval::new(
            normalize(&Index::add(a.hi.clone(), iv.lo.clone())),
            normalize(&Index::add(a.lo.clone(), iv.hi.clone())),
        ),
    }
}

/// `A_o lub B_o`: pointwise max of two obligations.
pub fn ilub(a: &Obligation, b: &Obligation) -> Obligation {
    a.lub(b)
}

/// Interval-plus-capacity, `[I,J] + J' = [I, J+J']` for a plain upper bound.
pub fn cap_add(a: &Interval, c: &Capacity) -> Interval {
    match c {
        Capacity::UpperOnly(j) => Interval::new(
            normalize(&a.lo),
            normalize(&Index::add(a.hi.clone(), j.clone())),
        ),
        Capacity::Interval(iv) => a.add(iv),
    }
}

/// The delaying operation: shift every top-level action's obligation by
/// interval addition, distributing over parallel, choice and replication.
pub fn delay(a: &Interval, u: &Usage) -> Usage {
    map_obligations(u, &|b| b.add(a))
}

/// Delaying by a capacity, via `[I,J] + J' = [I, J + J']`.
pub fn delay_by_capacity(c: &Capacity, u: &Usage) -> Usage {
    map_obligations(u, &|b| cap_add(b, c))
}

fn map_obligations(u: &Usage, f: &impl Fn(&Interval) -> Interval) -> Usage {
    match u {
        Usage::Zero => Usage::Zero,
        Usage::Par(l, r) => Usage::par(map_obligations(l, f), map_obligations(r, f)),
        Usage::Choice(l, r) => Usage::choice(map_obligations(l, f), map_obligations(r, f)),
        Usage::Bang(inner) => Usage::bang(map_obligations(inner, f)),
        Usage::Act(p, o, c, cont) => Usage::Act(*p, f(o), c.clone(), cont.clone()),
    }
}

/// `J_c ; K`: the complexity of an input/output with capacity `J_c` whose
/// continuation has complexity `K`. A `[inf,inf]` capacity means the action
/// never fires, so the complexity is `[0,0]`; otherwise the lower bound is
/// pessimistically 0 and the upper bound is `J + K_hi`.
pub fn seq_complexity(c: &Capacity, k: &Interval) -> Interval {
    match c {
        Capacity::UpperOnly(j) => Interval::new(
            Index::Const(0),
            normalize(&Index::add(j.clone(), k.hi.clone())),
        ),
        Capacity::Interval(iv) => {
            if normalize(&iv.lo) == Index::Infinity {
                Interval::zero()
            } else {
                Interval::new(
                    Index::Const(0),
                    normalize(&Index::add(iv.hi.clone(), k.hi.clone())),
                )
            }
        }
    }
}

/// Constraints under which capacity `i` refines capacity `j` (`i <= j` read
/// as interval inclusion with a plain bound meaning `[-inf, J]`). Returns
/// `None` when the shapes make the refinement impossible.
pub fn capacity_le(i: &Capacity, j: &Capacity) -> Option<Vec<Constraint>> {
    match (i, j) {
        (Capacity::UpperOnly(a), Capacity::UpperOnly(b)) => {
            Some(vec![Constraint::new(a.clone(), Rel::Le, b.clone())])
        }
        (Capacity::Interval(iv), Capacity::UpperOnly(b)) => {
            Some(vec![Constraint::new(iv.hi.clone(), Rel::Le, b.clone())])
        }
        (Capacity::Interval(a), Capacity::Interval(b)) => Some(a.included_in(b)),
        // [-inf, J] never fits inside a proper interval
        (Capacity::UpperOnly(_), Capacity::Interval(_)) => None,
    }
}

impl fmt::Display for Capacity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Capacity::UpperOnly(j) => write!(f, "<{j}>"),
            Capacity::Interval(iv) => write!(f, "{iv}"),
        }
    }
}

fn prec_of(u: &Usage) -> u8 {
    match u {
        Usage::Par(..) => 0,
        Usage::Choice(..) => 1,
        _ => 2,
    }
}

fn fmt_at(u: &Usage, min_prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if prec_of(u) < min_prec {
        write!(f, "(")?;
        fmt_at(u, 0, f)?;
        return write!(f, ")");
    }
    match u {
        Usage::Zero => write!(f, "0"),
        Usage::Par(l, r) => {
            fmt_at(l, 1, f)?;
            write!(f, " | ")?;
            fmt_at(r, 0, f)
        }
        Usage::Choice(l, r) => {
            fmt_at(l, 2, f)?;
            write!(f, " + ")?;
            fmt_at(r, 1, f)
        }
        Usage::Bang(inner) => {
            write!(f, "!")?;
            fmt_at(inner, 2, f)
        }
        Usage::Act(p, o, c, cont) => {
            let tag = match p {
                Polarity::In => "In",
                Polarity::Out => "Out",
            };
            write!(f, "{tag}{o}{c}")?;
            if !cont.is_zero() {
                write!(f, ".")?;
                fmt_at(cont, 2, f)?;
            }
            Ok(())
        }
    }
}

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_at(self, 0, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::parse_interval;

    fn iv(src: &str) -> Interval {
        parse_interval(src).unwrap()
    }

    #[test]
    fn iplus_paper_values() {
        // [1,3] (+) [5,7] = [8,8]
        assert_eq!(
            iplus(&iv("[1,3]"), &Capacity::Interval(iv("[5,7]"))),
            iv("[8,8]")
        );
        // [0,0] (+) [1,1] = [1,1]
        assert_eq!(
            iplus(&iv("[0,0]"), &Capacity::Interval(iv("[1,1]"))),
            iv("[1,1]")
        );
        // [1,1] (+) 1 = [0,2]
        assert_eq!(
            iplus(&iv("[1,1]"), &Capacity::upper(Index::Const(1))),
            iv("[0,2]")
        );
        // [1,1] (+) [0,1] = [1,2]
        assert_eq!(
            iplus(&iv("[1,1]"), &Capacity::Interval(iv("[0,1]"))),
            iv("[1,2]")
        );
    }

    #[test]
    fn ilub_paper_values() {
        // [4,8] lub [5,7] = [5,8]
        assert_eq!(ilub(&iv("[4,8]"), &iv("[5,7]")), iv("[5,8]"));
        assert_eq!(ilub(&iv("[0,0]"), &iv("[1,1]")), iv("[1,1]"));
        let a = iv("[2,5]");
        assert_eq!(ilub(&a, &a), a);
    }

    #[test]
    fn seq_complexity_paper_values() {
        // [inf,inf];K = [0,0]
        assert_eq!(
            seq_complexity(&Capacity::Interval(iv("[inf,inf]")), &iv("[3,7]")),
            iv("[0,0]")
        );
        // 1;[1,1] = [0,2]
        assert_eq!(
            seq_complexity(&Capacity::upper(Index::Const(1)), &iv("[1,1]")),
            iv("[0,2]")
        );
        // [1,1];[0,1] = [0,2]
        assert_eq!(
            seq_complexity(&Capacity::Interval(iv("[1,1]")), &iv("[0,1]")),
            iv("[0,2]")
        );
    }

    #[test]
    fn delay_shifts_obligations() {
        // delaying In by [1,1]: Out[0,0]<0> continuation untouched
        let u = Usage::output(iv("[0,0]"), Capacity::upper(Index::Const(0)), Usage::Zero);
        let d = delay(&iv("[1,1]"), &u);
        assert_eq!(
            d,
            Usage::output(iv("[1,1]"), Capacity::upper(Index::Const(0)), Usage::Zero)
        );
        assert_eq!(delay(&iv("[1,1]"), &Usage::Zero), Usage::Zero);
        // delay distributes under bang
        let b = Usage::bang(u.clone());
        assert_eq!(
            delay(&iv("[1,1]"), &b),
            Usage::bang(delay(&iv("[1,1]"), &u))
        );
    }

    #[test]
    fn capacity_shapes_do_not_coerce() {
        let a = iv("[1,1]");
        let plain = iplus(&a, &Capacity::upper(Index::Const(1)));
        let boxed = iplus(&a, &Capacity::Interval(iv("[0,1]")));
        assert_ne!(plain, boxed);
        assert!(capacity_le(
            &Capacity::upper(Index::Const(1)),
            &Capacity::Interval(iv("[0,1]"))
        )
        .is_none());
    }
}
