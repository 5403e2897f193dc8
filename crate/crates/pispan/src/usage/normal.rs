//! Multiset normal form and the usage congruence decision.
//!
//! Normalization flattens parallel composition with `0` as unit, distributes
//! `!` over parallel (`!(U|V) = !U | !V`), collapses `!!U = !U` and drops
//! `!0`. Atoms are actions, choices, and banged atoms. The unfolding axiom
//! `!U = !U | U` is decided by absorbing plain atoms that have a banged
//! twin.

use crate::index::{normalize as idx_norm, ConstraintSet, EntailsConfig, Interval, VarSet};

use super::{Capacity, Usage};

/// Canonical term: sorted parallel multiset, bang-distributed.
pub fn norm(u: &Usage) -> Usage {
    rebuild(norm_atoms(u))
}

/// The sorted atom multiset of the normal form.
pub(crate) fn norm_atoms(u: &Usage) -> Vec<Usage> {
    let mut atoms = Vec::new();
    collect(u, false, &mut atoms);
    atoms.sort();
    atoms
}

fn collect(u: &Usage, banged: bool, out: &mut Vec<Usage>) {
    match u {
        Usage::Zero => {}
        Usage::Par(l, r) => {
            collect(l, banged, out);
            collect(r, banged, out);
        }
        Usage::Bang(inner) => collect(inner, true, out),
        Usage::Act(p, o, c, cont) => {
            let atom = Usage::Act(*p, norm_interval(o), norm_capacity(c), Box::new(norm(cont)));
            out.push(if banged { Usage::bang(atom) } else { atom });
        }
        Usage::Choice(l, r) => {
            let atom = Usage::choice(norm(l), norm(r));
            out.push(if banged { Usage::bang(atom) } else { atom });
        }
    }
}

fn norm_interval(iv: &Interval) -> Interval {
    Interval::new(idx_norm(&iv.lo), idx_norm(&iv.hi))
}

fn norm_capacity(c: &Capacity) -> Capacity {
    match c {
        Capacity::UpperOnly(j) => Capacity::UpperOnly(idx_norm(j)),
        Capacity::Interval(iv) => Capacity::Interval(norm_interval(iv)),
    }
}

pub(crate) fn rebuild(mut atoms: Vec<Usage>) -> Usage {
    atoms.sort();
    let mut it = atoms.into_iter().rev();
    let Some(last) = it.next() else {
        return Usage::Zero;
    };
    it.fold(last, |acc, a| Usage::par(a, acc))
}

/// Remove plain atoms that also occur under a bang (`!U = !U | U`).
pub(crate) fn absorb(atoms: &[Usage]) -> Vec<Usage> {
    let banged: Vec<&Usage> = atoms
        .iter()
        .filter_map(|a| match a {
            Usage::Bang(inner) => Some(&**inner),
            _ => None,
        })
        .collect();
    atoms
        .iter()
        .filter(|a| match a {
            Usage::Bang(_) => true,
            plain => !banged.contains(plain),
        })
        .cloned()
        .collect()
}

/// Decision of the usage congruence. Absorption applies at every depth:
/// the congruence is closed under prefixes, so `a.!U` and `a.(!U | U)` are
/// congruent too.
pub fn congruent_usages(u: &Usage, v: &Usage) -> bool {
    let xs = absorb(&norm_atoms(u));
    let ys = absorb(&norm_atoms(v));
    match_syntactic(&xs, &ys)
}

fn match_syntactic(xs: &[Usage], ys: &[Usage]) -> bool {
    if xs.len() != ys.len() {
        return false;
    }
    if xs == ys {
        return true;
    }
    let Some(x) = xs.first() else { return true };
    for (k, y) in ys.iter().enumerate() {
        if atom_congruent(x, y) {
            let mut rest: Vec<Usage> = ys.to_vec();
            rest.remove(k);
            if match_syntactic(&xs[1..], &rest) {
                return true;
            }
        }
    }
    false
}

fn atom_congruent(x: &Usage, y: &Usage) -> bool {
    if x == y {
        return true;
    }
    match (x, y) {
        (Usage::Bang(a), Usage::Bang(b)) => atom_congruent(a, b),
        (Usage::Choice(a1, a2), Usage::Choice(b1, b2)) => {
            congruent_usages(a1, b1) && congruent_usages(a2, b2)
        }
        (Usage::Act(p1, o1, c1, k1), Usage::Act(p2, o2, c2, k2)) => {
            p1 == p2 && o1 == o2 && c1 == c2 && congruent_usages(k1, k2)
        }
        _ => false,
    }
}

/// Equality of usages up to congruence and provable index equality. Any
/// index comparison that is not `Proven` makes the whole check fail.
pub fn usages_equal(
    phi: &VarSet,
    constraints: &ConstraintSet,
    u: &Usage,
    v: &Usage,
    cfg: &EntailsConfig,
) -> bool {
    let xs = absorb(&norm_atoms(u));
    let ys = absorb(&norm_atoms(v));
    match_multisets(phi, constraints, &xs, &ys, cfg)
}

fn match_multisets(
    phi: &VarSet,
    constraints: &ConstraintSet,
    xs: &[Usage],
    ys: &[Usage],
    cfg: &EntailsConfig,
) -> bool {
    if xs.len() != ys.len() {
        return false;
    }
    if xs == ys {
        return true;
    }
    let Some(x) = xs.first() else { return true };
    for (k, y) in ys.iter().enumerate() {
        if atom_equal(phi, constraints, x, y, cfg) {
            let mut rest: Vec<Usage> = ys.to_vec();
            rest.remove(k);
            if match_multisets(phi, constraints, &xs[1..], &rest, cfg) {
                return true;
            }
        }
    }
    false
}

fn atom_equal(
    phi: &VarSet,
    constraints: &ConstraintSet,
    x: &Usage,
    y: &Usage,
    cfg: &EntailsConfig,
) -> bool {
    if x == y {
        return true;
    }
    match (x, y) {
        (Usage::Bang(a), Usage::Bang(b)) => atom_equal(phi, constraints, a, b, cfg),
        (Usage::Choice(a1, a2), Usage::Choice(b1, b2)) => {
            usages_equal(phi, constraints, a1, b1, cfg)
                && usages_equal(phi, constraints, a2, b2, cfg)
        }
        (Usage::Act(p1, o1, c1, k1), Usage::Act(p2, o2, c2, k2)) => {
            p1 == p2
                && intervals_equal(phi, constraints, o1, o2, cfg)
                && capacities_equal(phi, constraints, c1, c2, cfg)
                && usages_equal(phi, constraints, k1, k2, cfg)
        }
        _ => false,
    }
}

pub(crate) fn intervals_equal(
    phi: &VarSet,
    constraints: &ConstraintSet,
    a: &Interval,
    b: &Interval,
    cfg: &EntailsConfig,
) -> bool {
    crate::index::entails_all(phi, constraints, &a.equals(b), cfg).is_proven()
}

pub(crate) fn capacities_equal(
    phi: &VarSet,
    constraints: &ConstraintSet,
    a: &Capacity,
    b: &Capacity,
    cfg: &EntailsConfig,
) -> bool {
    use crate::index::{Constraint, Rel};
    match (a, b) {
        (Capacity::UpperOnly(i), Capacity::UpperOnly(j)) => crate::index::entails_all(
            phi,
            constraints,
            &[Constraint::new(i.clone(), Rel::Eq, j.clone())],
            cfg,
        )
        .is_proven(),
        (Capacity::Interval(i), Capacity::Interval(j)) => {
            intervals_equal(phi, constraints, i, j, cfg)
        }
        _ => false,
    }
}
