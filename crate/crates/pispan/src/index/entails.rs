//! Three-valued constraint entailment.
//!
//! `Proven` is established by a sound symbolic route (normalization, range
//! analysis over the constraint set, linear domination, guarded unfolding of
//! the factorial recurrence). `Refuted` comes with a counterexample valuation
//! found by exhaustive search over small values. Everything else is
//! `Unknown`, which callers must treat as a failed side condition, never as
//! success.

use super::normal::{lin_form, normalize, simplify};
use super::{Constraint, ConstraintSet, IdxFn, Index, NatInf, Rel, Valuation, VarSet};
use serde::Serialize;

#[derive(Debug, Clone, Copy)]
pub struct EntailsConfig {
    /// Counterexample search tries every valuation with values in
    /// `0..=bound` plus a probe at `bound + 1`.
    pub bound: u64,
}

impl Default for EntailsConfig {
    fn default() -> Self {
        EntailsConfig { bound: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Proven,
    Refuted(Valuation),
    Unknown,
}

impl Verdict {
    pub fn is_proven(&self) -> bool {
        matches!(self, Verdict::Proven)
    }
}

pub(crate) type Ranges = std::collections::BTreeMap<String, (NatInf, NatInf)>;

/// Derive per-variable value ranges from the constraint set by a few rounds
/// of interval propagation. Every variable starts at `[0, inf]`.
pub(crate) fn var_ranges(phi: &VarSet, constraints: &ConstraintSet) -> Ranges {
    let mut ranges: Ranges = phi
        .iter()
        .map(|v| (v.clone(), (NatInf::Fin(0), NatInf::Inf)))
        .collect();
    for _ in 0..3 {
        for c in constraints {
            let (llo, lhi) = range_of(&c.lhs, &ranges);
            let (rlo, rhi) = range_of(&c.rhs, &ranges);
            match c.rel {
                Rel::Le | Rel::Lt => {
                    let strict = matches!(c.rel, Rel::Lt);
                    if let Index::Var(v) = &c.lhs {
                        let cap = if strict { dec(rhi) } else { rhi };
                        tighten_hi(&mut ranges, v, cap);
                    }
                    if let Index::Var(v) = &c.rhs {
                        let floor = if strict { inc(llo) } else { llo };
                        tighten_lo(&mut ranges, v, floor);
                    }
                }
                Rel::Eq => {
                    if let Index::Var(v) = &c.lhs {
                        tighten_hi(&mut ranges, v, rhi);
                        tighten_lo(&mut ranges, v, rlo);
                    }
                    if let Index::Var(v) = &c.rhs {
                        tighten_hi(&mut ranges, v, lhi);
                        tighten_lo(&mut ranges, v, llo);
                    }
                }
                Rel::Ne => {}
            }
        }
    }
    ranges
}

fn inc(v: NatInf) -> NatInf {
    v.add(NatInf::Fin(1))
}

fn dec(v: NatInf) -> NatInf {
    match v {
        NatInf::Fin(n) => NatInf::Fin(n.saturating_sub(1)),
        NatInf::Inf => NatInf::Inf,
    }
}

fn tighten_hi(ranges: &mut Ranges, v: &str, hi: NatInf) {
    if let Some((_, h)) = ranges.get_mut(v) {
        *h = h.min(hi);
    }
}

fn tighten_lo(ranges: &mut Ranges, v: &str, lo: NatInf) {
    if let Some((l, _)) = ranges.get_mut(v) {
        *l = l.max(lo);
    }
}

/// Monotone interval evaluation of a term under variable ranges.
pub(crate) fn range_of(idx: &Index, ranges: &Ranges) -> (NatInf, NatInf) {
    match idx {
        Index::Var(v) => ranges
            .get(v)
            .copied()
            .unwrap_or((NatInf::Fin(0), NatInf::Inf)),
        Index::Const(n) => (NatInf::Fin(*n), NatInf::Fin(*n)),
        Index::Infinity => (NatInf::Inf, NatInf::Inf),
        Index::Fn(f, args) => {
            let rs: Vec<(NatInf, NatInf)> = args.iter().map(|a| range_of(a, ranges)).collect();
            match f {
                IdxFn::Add => rs
                    .iter()
                    .fold((NatInf::Fin(0), NatInf::Fin(0)), |(lo, hi), (l, h)| {
                        (lo.add(*l), hi.add(*h))
                    }),
                IdxFn::Mul => rs
                    .iter()
                    .fold((NatInf::Fin(1), NatInf::Fin(1)), |(lo, hi), (l, h)| {
                        (lo.mul(*l), hi.mul(*h))
                    }),
                IdxFn::Sub => (rs[0].0.sub(rs[1].1), rs[0].1.sub(rs[1].0)),
                IdxFn::Max => rs
                    .iter()
                    .fold((NatInf::Fin(0), NatInf::Fin(0)), |(lo, hi), (l, h)| {
                        (lo.max(*l), hi.max(*h))
                    }),
                IdxFn::Min => rs
                    .iter()
                    .fold((NatInf::Inf, NatInf::Inf), |(lo, hi), (l, h)| {
                        (lo.min(*l), hi.min(*h))
                    }),
                IdxFn::Fact => (NatInf::Fin(0), NatInf::Inf),
            }
        }
    }
}

/// Sound, incomplete `a <= b` check under the ambient constraints.
pub(crate) fn obviously_le(
    phi: &VarSet,
    constraints: &ConstraintSet,
    ranges: &Ranges,
    a: &Index,
    b: &Index,
) -> bool {
    le_rec(phi, constraints, ranges, a, b, 8)
}

#[allow(clippy::only_used_in_recursion)]
fn le_rec(
    phi: &VarSet,
    constraints: &ConstraintSet,
    ranges: &Ranges,
    a: &Index,
    b: &Index,
    depth: u32,
) -> bool {
    if depth == 0 {
        return false;
    }
    if a == b || a.is_zero() || matches!(b, Index::Infinity) {
        return true;
    }
    let (_, ahi) = range_of(a, ranges);
    let (blo, _) = range_of(b, ranges);
    if ahi.le(blo) {
        return true;
    }
    let rec = |x: &Index, y: &Index| le_rec(phi, constraints, ranges, x, y, depth - 1);
    // max/min decomposition
    if let Index::Fn(IdxFn::Max, es) = a {
        if es.iter().all(|e| rec(e, b)) {
            return true;
        }
    }
    if let Index::Fn(IdxFn::Max, es) = b {
        if es.iter().any(|e| rec(a, e)) {
            return true;
        }
    }
    if let Index::Fn(IdxFn::Min, es) = a {
        if es.iter().any(|e| rec(e, b)) {
            return true;
        }
    }
    if let Index::Fn(IdxFn::Min, es) = b {
        if es.iter().all(|e| rec(a, e)) {
            return true;
        }
    }
    // truncated subtraction shrinks
    if let Index::Fn(IdxFn::Sub, args) = a {
        if rec(&args[0], b) {
            return true;
        }
    }
    // transitivity through a hypothesis l <= r (or l = r)
    for h in constraints {
        let through = |l: &Index, r: &Index| {
            le_rec(phi, constraints, ranges, a, l, depth - 1)
                && le_rec(phi, constraints, ranges, r, b, depth - 1)
        };
        match h.rel {
            Rel::Le | Rel::Lt => {
                if through(&h.lhs, &h.rhs) {
                    return true;
                }
            }
            Rel::Eq => {
                if through(&h.lhs, &h.rhs) || through(&h.rhs, &h.lhs) {
                    return true;
                }
            }
            Rel::Ne => {}
        }
    }
    // a <= x - y  when  a + y <= x; unsound for y with infinite values
    // (x and y both infinite give x - y = 0), so y must stay finite
    if let Index::Fn(IdxFn::Sub, args) = b {
        if !super::normal::may_be_infinite(&args[1]) {
            let sum = normalize(&Index::add(a.clone(), args[1].clone()));
            if le_rec(phi, constraints, ranges, &sum, &args[0], depth - 1) {
                return true;
            }
        }
    }
    // linear domination: every atom of a is covered by b
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
    // shared-atom cancellation: a <= b  iff  a - common <= b - common,
    // useful for e.g. i + 1 <= 2*i under i >= 1
    if !la.inf && !lb.inf {
        let shared: Vec<(Index, u64)> = la
            .terms
            .iter()
            .filter_map(|(t, c)| lb.terms.get(t).map(|c2| (t.clone(), *c.min(c2))))
            .collect();
        if !shared.is_empty() {
            let mut ra = la;
            let mut rb = lb;
            let ck = ra.konst.min(rb.konst);
            ra.konst -= ck;
            rb.konst -= ck;
            for (t, c) in &shared {
                *ra.terms.get_mut(t).unwrap() -= c;
                *rb.terms.get_mut(t).unwrap() -= c;
            }
            ra.terms.retain(|_, c| *c > 0);
            rb.terms.retain(|_, c| *c > 0);
            let na = rebuild(&ra);
            let nb = rebuild(&rb);
            if (&na, &nb) != (a, b) && le_rec(phi, constraints, ranges, &na, &nb, depth - 1) {
                return true;
            }
        }
    }
    false
}

fn rebuild(lf: &super::normal::LinForm) -> Index {
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
    match parts.len() {
        1 => parts.pop().unwrap(),
        _ => {
            parts.sort();
            Index::Fn(IdxFn::Add, parts)
        }
    }
}

/// Collect `fact` applications appearing anywhere in a term.
fn fact_sites(idx: &Index, out: &mut Vec<Index>) {
    match idx {
        Index::Fn(IdxFn::Fact, args) => {
            out.push(idx.clone());
            fact_sites(&args[0], out);
        }
        Index::Fn(_, args) => {
            for a in args {
                fact_sites(a, out);
            }
        }
        _ => {}
    }
}

fn replace(idx: &Index, from: &Index, to: &Index) -> Index {
    if idx == from {
        return to.clone();
    }
    match idx {
        Index::Fn(f, args) => Index::Fn(*f, args.iter().map(|a| replace(a, from, to)).collect()),
        _ => idx.clone(),
    }
}

/// One round of guarded factorial unfolding: `fact(t)` rewrites to
/// `t * fact(t - 1)` when the constraints prove `t >= 1`, and to `0` when
/// they prove `t <= 0`.
fn unfold_facts(
    phi: &VarSet,
    constraints: &ConstraintSet,
    ranges: &Ranges,
    idx: &Index,
) -> Option<Index> {
    let mut sites = Vec::new();
    fact_sites(idx, &mut sites);
    let mut cur = idx.clone();
    let mut changed = false;
    for site in sites {
        let arg = match &site {
            Index::Fn(IdxFn::Fact, args) => args[0].clone(),
            _ => continue,
        };
        if obviously_le(phi, constraints, ranges, &arg, &Index::Const(0)) {
            cur = replace(&cur, &site, &Index::Const(0));
            changed = true;
        } else if obviously_le(phi, constraints, ranges, &Index::Const(1), &arg) {
            let unfolded = Index::mul(
                arg.clone(),
                Index::fact(Index::sub(arg.clone(), Index::Const(1))),
            );
            cur = replace(&cur, &site, &unfolded);
            changed = true;
        }
    }
    changed.then(|| normalize(&cur))
}

fn prove_le(
    phi: &VarSet,
    constraints: &ConstraintSet,
    ranges: &Ranges,
    a: &Index,
    b: &Index,
) -> bool {
    let mut a = simplify(phi, constraints, a);
    let mut b = simplify(phi, constraints, b);
    for _ in 0..3 {
        if obviously_le(phi, constraints, ranges, &a, &b) {
            return true;
        }
        let ua = unfold_facts(phi, constraints, ranges, &a);
        let ub = unfold_facts(phi, constraints, ranges, &b);
        if ua.is_none() && ub.is_none() {
            return false;
        }
        if let Some(na) = ua {
            a = simplify(phi, constraints, &na);
        }
        if let Some(nb) = ub {
            b = simplify(phi, constraints, &nb);
        }
    }
    obviously_le(phi, constraints, ranges, &a, &b)
}

fn prove(phi: &VarSet, constraints: &ConstraintSet, c: &Constraint) -> bool {
    let ranges = var_ranges(phi, constraints);
    match c.rel {
        Rel::Le => prove_le(phi, constraints, &ranges, &c.lhs, &c.rhs),
        Rel::Eq => {
            prove_le(phi, constraints, &ranges, &c.lhs, &c.rhs)
                && prove_le(phi, constraints, &ranges, &c.rhs, &c.lhs)
        }
        Rel::Lt => {
            // a < b reduces to a + 1 <= b only for finite-valued a
            // (inf < inf is false while inf + 1 <= inf holds)
            let lhs = simplify(phi, constraints, &c.lhs);
            if super::normal::may_be_infinite(&lhs) {
                return false;
            }
            let bumped = normalize(&Index::add(lhs, Index::Const(1)));
            prove_le(phi, constraints, &ranges, &bumped, &c.rhs)
        }
        Rel::Ne => {
            let (alo, ahi) = range_of(&simplify(phi, constraints, &c.lhs), &ranges);
            let (blo, bhi) = range_of(&simplify(phi, constraints, &c.rhs), &ranges);
            ahi.lt(blo) || bhi.lt(alo)
        }
    }
}

/// Exhaustive counterexample search with per-variable values in
/// `0..=bound + 1`.
fn refute(
    phi: &VarSet,
    constraints: &ConstraintSet,
    c: &Constraint,
    bound: u64,
) -> Option<Valuation> {
    let vars: Vec<&String> = phi.iter().collect();
    let mut rho = Valuation::new();
    search(&vars, 0, bound, constraints, c, &mut rho)
}

fn search(
    vars: &[&String],
    at: usize,
    bound: u64,
    constraints: &ConstraintSet,
    c: &Constraint,
    rho: &mut Valuation,
) -> Option<Valuation> {
    if at == vars.len() {
        let sat = constraints.iter().all(|p| p.holds(rho).unwrap_or(false));
        if sat && !c.holds(rho).unwrap_or(true) {
            return Some(rho.clone());
        }
        return None;
    }
    for v in 0..=bound + 1 {
        rho.insert(vars[at].clone(), v);
        if let Some(w) = search(vars, at + 1, bound, constraints, c, rho) {
            return Some(w);
        }
    }
    rho.remove(vars[at]);
    None
}

/// Decide `phi; Phi |= C` three-valuedly.
pub fn entails(
    phi: &VarSet,
    constraints: &ConstraintSet,
    c: &Constraint,
    config: &EntailsConfig,
) -> Verdict {
    if prove(phi, constraints, c) {
        return Verdict::Proven;
    }
    if let Some(w) = refute(phi, constraints, c, config.bound) {
        return Verdict::Refuted(w);
    }
    Verdict::Unknown
}

/// Conjunction of entailments: Refuted dominates, then Unknown.
pub fn entails_all(
    phi: &VarSet,
    constraints: &ConstraintSet,
    cs: &[Constraint],
    config: &EntailsConfig,
) -> Verdict {
    let mut unknown = false;
    for c in cs {
        match entails(phi, constraints, c, config) {
            Verdict::Proven => {}
            Verdict::Refuted(w) => return Verdict::Refuted(w),
            Verdict::Unknown => unknown = true,
        }
    }
    if unknown {
        Verdict::Unknown
    } else {
        Verdict::Proven
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::parse_constraint;

    fn phi(vars: &[&str]) -> VarSet {
        vars.iter().map(|s| s.to_string()).collect()
    }

    fn cs(items: &[&str]) -> ConstraintSet {
        items.iter().map(|s| parse_constraint(s).unwrap()).collect()
    }

    fn check(vars: &[&str], hyps: &[&str], c: &str) -> Verdict {
        entails(
            &phi(vars),
            &cs(hyps),
            &parse_constraint(c).unwrap(),
            &EntailsConfig::default(),
        )
    }

    #[test]
    fn ground_facts_decide_exactly() {
        assert_eq!(check(&[], &[], "1 <= 2"), Verdict::Proven);
        assert_eq!(check(&[], &[], "inf = inf"), Verdict::Proven);
        assert!(matches!(check(&[], &[], "3 <= 2"), Verdict::Refuted(_)));
        assert!(matches!(check(&[], &[], "inf <= 5"), Verdict::Refuted(_)));
    }

    #[test]
    fn refutation_finds_smallest_witness() {
        // {i}; {} |= i <= 3 is refuted with witness i = 4
        let v = check(&["i"], &[], "i <= 3");
        match v {
            Verdict::Refuted(w) => assert_eq!(w.get("i"), Some(&4)),
            other => panic!("expected refutation, got {other:?}"),
        }
    }

    #[test]
    fn factorial_constraints_from_the_typing() {
        // i; i >= 1 |= i * fact(i - 1) = fact(i)
        assert_eq!(
            check(&["i"], &["i >= 1"], "i * fact(i - 1) = fact(i)"),
            Verdict::Proven
        );
        // i; i <= 0 |= fact(i) = i   and   fact(i) = 0
        assert_eq!(check(&["i"], &["i <= 0"], "fact(i) = i"), Verdict::Proven);
        assert_eq!(check(&["i"], &["i <= 0"], "fact(i) = 0"), Verdict::Proven);
    }

    #[test]
    fn symbolic_monotonicity() {
        assert_eq!(check(&["i"], &[], "i - 1 <= i"), Verdict::Proven);
        assert_eq!(check(&["i"], &[], "0 <= i - 1"), Verdict::Proven);
        assert_eq!(
            check(&["i"], &["i >= 1"], "(i - 1) + 1 = i"),
            Verdict::Proven
        );
        assert_eq!(
            check(&["i"], &["i >= 1"], "i - (i - 1) = 1"),
            Verdict::Proven
        );
        assert_eq!(
            check(&["i", "j"], &["i <= j"], "i <= j + 2"),
            Verdict::Proven
        );
    }

    #[test]
    fn infinite_valued_atoms_do_not_cancel() {
        // (1 + inf*j) - inf*j is 0 at j >= 1, so 1 <= it must be refuted
        let v = check(&["j"], &[], "1 <= (1 + inf*j) - inf*j");
        match v {
            Verdict::Refuted(w) => assert!(w.get("j").is_some_and(|&j| j >= 1)),
            other => panic!("expected refutation, got {other:?}"),
        }
        // inf*j - (inf*j - 1) is 0 at j >= 1, never min(inf*j, 1)
        let v = check(&["j"], &["j >= 1"], "inf*j - (inf*j - 1) = 1");
        assert!(matches!(v, Verdict::Refuted(_)), "{v:?}");
        // a < a + 1 fails when a can be infinite
        let v = check(&["j"], &[], "inf*j < inf*j + 1");
        assert!(matches!(v, Verdict::Refuted(_)), "{v:?}");
        // but all three go through for finite-valued terms
        assert_eq!(check(&["j"], &[], "1 <= (1 + 2*j) - 2*j"), Verdict::Proven);
        assert_eq!(
            check(&["j"], &["j >= 1"], "j - (j - 1) = 1"),
            Verdict::Proven
        );
        assert_eq!(check(&["j"], &[], "j < j + 1"), Verdict::Proven);
    }

    #[test]
    fn unknown_is_the_honest_fallback() {
        // true for all naturals but beyond the symbolic rules and not
        // refutable: stays Unknown rather than guessing
        let v = check(&["i", "j"], &[], "min(i,j) * max(i,j) = i * j");
        assert_eq!(v, Verdict::Unknown);
    }

    #[test]
    fn conjunction_combines_verdicts() {
        let p = phi(&["i"]);
        let hyps = cs(&[]);
        let all = [
            parse_constraint("0 <= i").unwrap(),
            parse_constraint("i <= i").unwrap(),
        ];
        assert_eq!(
            entails_all(&p, &hyps, &all, &EntailsConfig::default()),
            Verdict::Proven
        );
        let bad = [
            parse_constraint("0 <= i").unwrap(),
            parse_constraint("i <= 3").unwrap(),
        ];
        assert!(matches!(
            entails_all(&p, &hyps, &bad, &EntailsConfig::default()),
            Verdict::Refuted(_)
        ));
    }
}
