//! Normalization of index terms.
//!
//! `normalize` applies only identities that hold for every valuation
//! (constant folding, flattening, multiset cancellation of truncated
//! subtraction, `(a - b) + b = max(a,b)`, `a - (a - c) = min(a,c)`).
//! `simplify` additionally collapses max/min/sub/fact using facts derivable
//! from an ambient constraint set.

use super::entails::{obviously_le, var_ranges, Ranges};
use super::{ground_fact, ConstraintSet, IdxFn, Index, VarSet};
use std::collections::BTreeMap;

/// Decomposition of a term as a linear combination: atom -> coefficient plus
/// a constant. Atoms are non-Add nodes; `Mul(c, t)` contributes coefficient
/// `c` to atom `t`.
pub(crate) struct LinForm {
    pub terms: BTreeMap<Index, u64>,
    pub konst: u64,
    /// True when the term contains an irreducible infinity (the whole value
    /// may be infinite); linear reasoning then refuses to conclude.
    pub inf: bool,
}

pub(crate) fn lin_form(idx: &Index) -> LinForm {
    let mut lf = LinForm {
        terms: BTreeMap::new(),
        konst: 0,
        inf: false,
    };
    collect_lin(idx, 1, &mut lf);
    lf
}

fn collect_lin(idx: &Index, coef: u64, lf: &mut LinForm) {
    match idx {
        Index::Const(n) => lf.konst = lf.konst.saturating_add(coef.saturating_mul(*n)),
        Index::Infinity => lf.inf = true,
        Index::Fn(IdxFn::Add, args) => {
            for a in args {
                collect_lin(a, coef, lf);
            }
        }
        Index::Fn(IdxFn::Mul, args) => {
            // split off a single constant coefficient when present
            let mut c = coef;
            let mut rest: Vec<Index> = Vec::new();
            for a in args {
                if let Index::Const(n) = a {
                    c = c.saturating_mul(*n);
                } else {
                    rest.push(a.clone());
                }
            }
            match rest.len() {
                0 => lf.konst = lf.konst.saturating_add(c),
                1 => *lf.terms.entry(rest.pop().unwrap()).or_insert(0) += c,
                _ => *lf.terms.entry(Index::Fn(IdxFn::Mul, rest)).or_insert(0) += c,
            }
        }
        other => *lf.terms.entry(other.clone()).or_insert(0) += coef,
    }
}

fn rebuild_lin(lf: &LinForm) -> Index {
    let mut parts: Vec<Index> = Vec::new();
    for (t, &c) in &lf.terms {
        match c {
            0 => {}
            1 => parts.push(t.clone()),
            c => parts.push(Index::Fn(IdxFn::Mul, vec![Index::Const(c), t.clone()])),
        }
    }
    if lf.konst > 0 || parts.is_empty() {
        parts.push(Index::Const(lf.konst));
    }
    if lf.inf {
        parts.push(Index::Infinity);
    }
    match parts.len() {
        1 => parts.pop().unwrap(),
        _ => {
            parts.sort();
            Index::Fn(IdxFn::Add, parts)
        }
    }
}

/// `a <= b` for every valuation, by structure alone (no constraints).
fn le_unconditional(a: &Index, b: &Index) -> bool {
    if a == b || a.is_zero() || matches!(b, Index::Infinity) {
        return true;
    }
    if let Index::Fn(IdxFn::Sub, args) = a {
        if le_unconditional(&args[0], b) {
            return true;
        }
    }
    let (la, lb) = (lin_form(a), lin_form(b));
    if !la.inf
        && la.konst <= lb.konst
        && la
            .terms
            .iter()
            .all(|(t, c)| lb.terms.get(t).is_some_and(|c2| c <= c2))
    {
        return true;
    }
    false
}

pub fn normalize(idx: &Index) -> Index {
    match idx {
        Index::Var(_) | Index::Const(_) | Index::Infinity => idx.clone(),
        Index::Fn(f, args) => {
            let args: Vec<Index> = args.iter().map(normalize).collect();
            match f {
                IdxFn::Add => norm_add(args),
                IdxFn::Mul => norm_mul(args),
                IdxFn::Sub => norm_sub(args[0].clone(), args[1].clone()),
                IdxFn::Max => norm_max(args),
                IdxFn::Min => norm_min(args),
                IdxFn::Fact => match &args[0] {
                    Index::Const(n) => Index::Const(ground_fact(*n)),
                    _ => Index::Fn(IdxFn::Fact, args),
                },
            }
        }
    }
}

fn norm_add(args: Vec<Index>) -> Index {
    let mut lf = LinForm {
        terms: BTreeMap::new(),
        konst: 0,
        inf: false,
    };
    for a in &args {
        collect_lin(a, 1, &mut lf);
    }
    if lf.inf {
        return Index::Infinity; // inf + J = inf
    }
    // (a - b) + b = max(a, b)
    let subs: Vec<Index> = lf
        .terms
        .keys()
        .filter(|t| matches!(t, Index::Fn(IdxFn::Sub, _)))
        .cloned()
        .collect();
    for s in subs {
        let (x, y) = match &s {
            Index::Fn(IdxFn::Sub, a) => (a[0].clone(), a[1].clone()),
            _ => unreachable!(),
        };
        if lf.terms.get(&s).copied().unwrap_or(0) == 0 {
            continue;
        }
        // does the rest of the sum contain y?
        let ly = lin_form(&y);
        if ly.inf {
            continue;
        }
        let mut rest = LinForm {
            terms: lf.terms.clone(),
            konst: lf.konst,
            inf: false,
        };
        *rest.terms.get_mut(&s).unwrap() -= 1;
        let covered = ly.konst <= rest.konst
            && ly
                .terms
                .iter()
                .all(|(t, c)| rest.terms.get(t).is_some_and(|c2| c <= c2));
        if covered {
            rest.konst -= ly.konst;
            for (t, c) in &ly.terms {
                *rest.terms.get_mut(t).unwrap() -= c;
            }
            rest.terms.retain(|_, c| *c > 0);
            let m = normalize(&Index::max_of(x, y));
            *rest.terms.entry(m).or_insert(0) += 1;
            lf = rest;
        }
    }
    lf.terms.retain(|_, c| *c > 0);
    rebuild_lin(&lf)
}

fn norm_mul(args: Vec<Index>) -> Index {
    let mut c: u64 = 1;
    let mut terms: Vec<Index> = Vec::new();
    let mut saw_inf = false;
    for a in args {
        match a {
            Index::Const(n) => c = c.saturating_mul(n),
            Index::Infinity => saw_inf = true,
            Index::Fn(IdxFn::Mul, inner) => {
                for t in inner {
                    match t {
                        Index::Const(n) => c = c.saturating_mul(n),
                        Index::Infinity => saw_inf = true,
                        t => terms.push(t),
                    }
                }
            }
            a => terms.push(a),
        }
    }
    if c == 0 {
        return Index::Const(0); // covers inf * 0 = 0
    }
    if saw_inf && terms.is_empty() {
        return Index::Infinity; // inf * n = inf for constant n >= 1
    }
    if saw_inf {
        terms.push(Index::Infinity);
    }
    terms.sort();
    if c != 1 {
        terms.insert(0, Index::Const(c));
    }
    match terms.len() {
        0 => Index::Const(1),
        1 => terms.pop().unwrap(),
        _ => Index::Fn(IdxFn::Mul, terms),
    }
}

fn norm_sub(a: Index, b: Index) -> Index {
    if b.is_zero() {
        return a;
    }
    if a.is_zero() || a == b {
        return Index::Const(0);
    }
    if matches!(b, Index::Infinity) {
        return Index::Const(0);
    }
    if let (Index::Const(x), Index::Const(y)) = (&a, &b) {
        return Index::Const(x.saturating_sub(*y));
    }
    // a - (a - c) = min(a, c); fails at a = inf (inf - inf = 0), so a must
    // stay finite under every valuation
    if let Index::Fn(IdxFn::Sub, inner) = &b {
        if inner[0] == a && !may_be_infinite(&a) {
            return norm_min(vec![a, inner[1].clone()]);
        }
    }
    // multiset cancellation: (x + s) - s = x, exact over the naturals but
    // only when the cancelled part s is finite-valued ((1 + inf) - inf = 0)
    let (la, lb) = (lin_form(&a), lin_form(&b));
    if !lb.inf
        && lb.konst <= la.konst
        && lb
            .terms
            .iter()
            .all(|(t, c)| !may_be_infinite(t) && la.terms.get(t).is_some_and(|c2| c <= c2))
    {
        let mut diff = LinForm {
            terms: la.terms.clone(),
            konst: la.konst - lb.konst,
            inf: la.inf,
        };
        for (t, c) in &lb.terms {
            let e = diff.terms.get_mut(t).unwrap();
            *e -= c;
        }
        diff.terms.retain(|_, c| *c > 0);
        return rebuild_lin(&diff);
    }
    if matches!(a, Index::Infinity) && !may_be_infinite(&b) {
        return Index::Infinity; // inf - 1 = inf
    }
    Index::sub(a, b)
}

/// Whether a term can evaluate to infinity under some valuation.
pub(crate) fn may_be_infinite(idx: &Index) -> bool {
    match idx {
        Index::Var(_) | Index::Const(_) => false,
        Index::Infinity => true,
        Index::Fn(IdxFn::Sub, args) => may_be_infinite(&args[0]),
        Index::Fn(IdxFn::Min, args) => args.iter().all(may_be_infinite),
        Index::Fn(IdxFn::Fact, _) => false,
        Index::Fn(_, args) => args.iter().any(may_be_infinite),
    }
}

fn norm_max(args: Vec<Index>) -> Index {
    let mut elems: Vec<Index> = Vec::new();
    let mut best_const: u64 = 0;
    for a in args {
        match a {
            Index::Infinity => return Index::Infinity,
            Index::Const(n) => best_const = best_const.max(n),
            Index::Fn(IdxFn::Max, inner) => {
                for t in inner {
                    match t {
                        Index::Infinity => return Index::Infinity,
                        Index::Const(n) => best_const = best_const.max(n),
                        t => elems.push(t),
                    }
                }
            }
            a => elems.push(a),
        }
    }
    if best_const > 0 {
        elems.push(Index::Const(best_const));
    }
    elems.sort();
    elems.dedup();
    // drop elements dominated by another element
    let mut kept: Vec<Index> = Vec::new();
    for (k, e) in elems.iter().enumerate() {
        let dominated = elems
            .iter()
            .enumerate()
            .any(|(j, d)| j != k && le_unconditional(e, d) && !(le_unconditional(d, e) && j > k));
        if !dominated {
            kept.push(e.clone());
        }
    }
    match kept.len() {
        0 => Index::Const(0),
        1 => kept.pop().unwrap(),
        _ => Index::Fn(IdxFn::Max, kept),
    }
}

fn norm_min(args: Vec<Index>) -> Index {
    let mut elems: Vec<Index> = Vec::new();
    let mut best_const: Option<u64> = None;
    let mut flat: Vec<Index> = Vec::new();
    for a in args {
        if let Index::Fn(IdxFn::Min, inner) = a {
            flat.extend(inner);
        } else {
            flat.push(a);
        }
    }
    for a in flat {
        match a {
            Index::Const(0) => return Index::Const(0),
            Index::Infinity => {} // min(inf, J) = J
            Index::Const(n) => {
                best_const = Some(best_const.map_or(n, |b: u64| b.min(n)));
            }
            a => elems.push(a),
        }
    }
    if let Some(c) = best_const {
        elems.push(Index::Const(c));
    }
    elems.sort();
    elems.dedup();
    let mut kept: Vec<Index> = Vec::new();
    for (k, e) in elems.iter().enumerate() {
        let dominated = elems
            .iter()
            .enumerate()
            .any(|(j, d)| j != k && le_unconditional(d, e) && !(le_unconditional(e, d) && j > k));
        if !dominated {
            kept.push(e.clone());
        }
    }
    match kept.len() {
        0 => Index::Infinity, // empty min over NatInf
        1 => kept.pop().unwrap(),
        _ => Index::Fn(IdxFn::Min, kept),
    }
}

/// Normalize, then collapse max/min/sub/fact using the ambient constraints.
pub fn simplify(phi: &VarSet, constraints: &ConstraintSet, idx: &Index) -> Index {
    let ranges = var_ranges(phi, constraints);
    let mut cur = normalize(idx);
    for _ in 0..4 {
        let next = simplify_once(phi, constraints, &ranges, &cur);
        if next == cur {
            break;
        }
        cur = next;
    }
    cur
}

fn simplify_once(phi: &VarSet, constraints: &ConstraintSet, ranges: &Ranges, idx: &Index) -> Index {
    let rec = |i: &Index| simplify_once(phi, constraints, ranges, i);
    let out = match idx {
        Index::Var(_) | Index::Const(_) | Index::Infinity => idx.clone(),
        Index::Fn(f, args) => {
            let args: Vec<Index> = args.iter().map(rec).collect();
            match f {
                IdxFn::Max => {
                    if let Index::Fn(IdxFn::Max, elems) = norm_max(args.clone()) {
                        let kept: Vec<Index> = elems
                            .iter()
                            .enumerate()
                            .filter(|(k, e)| {
                                !elems.iter().enumerate().any(|(j, d)| {
                                    j != *k
                                        && obviously_le(phi, constraints, ranges, e, d)
                                        && !(j > *k && obviously_le(phi, constraints, ranges, d, e))
                                })
                            })
                            .map(|(_, e)| e.clone())
                            .collect();
                        norm_max(kept)
                    } else {
                        norm_max(args)
                    }
                }
                IdxFn::Min => {
                    if let Index::Fn(IdxFn::Min, elems) = norm_min(args.clone()) {
                        let kept: Vec<Index> = elems
                            .iter()
                            .enumerate()
                            .filter(|(k, e)| {
                                !elems.iter().enumerate().any(|(j, d)| {
                                    j != *k
                                        && obviously_le(phi, constraints, ranges, d, e)
                                        && !(j > *k && obviously_le(phi, constraints, ranges, e, d))
                                })
                            })
                            .map(|(_, e)| e.clone())
                            .collect();
                        norm_min(kept)
                    } else {
                        norm_min(args)
                    }
                }
                IdxFn::Sub => {
                    if obviously_le(phi, constraints, ranges, &args[0], &args[1]) {
                        Index::Const(0)
                    } else {
                        norm_sub(args[0].clone(), args[1].clone())
                    }
                }
                IdxFn::Fact => {
                    if obviously_le(phi, constraints, ranges, &args[0], &Index::Const(0)) {
                        Index::Const(0)
                    } else {
                        normalize(&Index::Fn(IdxFn::Fact, args))
                    }
                }
                IdxFn::Add => norm_add(args),
                IdxFn::Mul => norm_mul(args),
            }
        }
    };
    normalize(&out)
}
