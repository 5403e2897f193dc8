//! Sized/usage types and the context algebra.
//!
//! Types are sized naturals `Nat[I,J]`, simple channels `Ch(T,...)/U`, and
//! index-polymorphic servers `Serv[i,...][K](T,...)/U` whose complexity
//! interval `K` is the cost incurred per invocation. Contexts map names to
//! types; parallel composition, replication and delaying lift the usage
//! operations pointwise.

mod parse;

pub use parse::{parse_context_entry, parse_type};

use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

use crate::index::{
    entails_all, normalize, ConstraintSet, EntailsConfig, IdxVar, Index, Interval, VarSet, Verdict,
};
use crate::process::Name;
use crate::usage::{
    self, capacity_le, delay_by_capacity, reliable, subusage, Capacity, Reliability,
    SubusageConfig, Usage, UsageConfig,
};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Type {
    Nat(Interval),
    Chan(Vec<Type>, Usage),
    Serv(Vec<IdxVar>, Interval, Vec<Type>, Usage),
}

impl Type {
    pub fn usage(&self) -> Option<&Usage> {
        match self {
            Type::Nat(_) => None,
            Type::Chan(_, u) | Type::Serv(_, _, _, u) => Some(u),
        }
    }

    pub fn with_usage(&self, u: Usage) -> Type {
        match self {
            Type::Nat(iv) => Type::Nat(iv.clone()),
            Type::Chan(ts, _) => Type::Chan(ts.clone(), u),
            Type::Serv(is, k, ts, _) => Type::Serv(is.clone(), k.clone(), ts.clone(), u),
        }
    }

    pub fn payload(&self) -> Option<&[Type]> {
        match self {
            Type::Nat(_) => None,
            Type::Chan(ts, _) | Type::Serv(_, _, ts, _) => Some(ts),
        }
    }

    /// Substitute index variables, respecting server binders.
    pub fn subst_many(&self, map: &BTreeMap<IdxVar, Index>) -> Type {
        match self {
            Type::Nat(iv) => Type::Nat(iv.subst_many(map)),
            Type::Chan(ts, u) => Type::Chan(
                ts.iter().map(|t| t.subst_many(map)).collect(),
                u.subst_many(map),
            ),
            Type::Serv(is, k, ts, u) => {
                let mut inner = map.clone();
                for i in is {
                    inner.remove(i);
                }
                Type::Serv(
                    is.clone(),
                    k.subst_many(&inner),
                    ts.iter().map(|t| t.subst_many(&inner)).collect(),
                    u.subst_many(map),
                )
            }
        }
    }

    pub fn free_index_vars(&self, out: &mut VarSet) {
        match self {
            Type::Nat(iv) => iv.free_vars(out),
            Type::Chan(ts, u) => {
                for t in ts {
                    t.free_index_vars(out);
                }
                u.free_index_vars(out);
            }
            Type::Serv(is, k, ts, u) => {
                let mut inner = VarSet::new();
                k.free_vars(&mut inner);
                for t in ts {
                    t.free_index_vars(&mut inner);
                }
                for i in is {
                    inner.remove(i);
                }
                out.extend(inner);
                u.free_index_vars(out);
            }
        }
    }

    /// Structural equality ignoring every usage (the "same types excluding
    /// usage" agreement required for context composition).
    pub fn same_skeleton(&self, other: &Type) -> bool {
        match (self, other) {
            (Type::Nat(a), Type::Nat(b)) => norm_iv(a) == norm_iv(b),
            (Type::Chan(ts, _), Type::Chan(ss, _)) => {
                ts.len() == ss.len() && ts.iter().zip(ss).all(|(t, s)| t.same_skeleton(s))
            }
            (Type::Serv(is, k, ts, _), Type::Serv(js, k2, ss, _)) => {
                is == js
                    && norm_iv(k) == norm_iv(k2)
                    && ts.len() == ss.len()
                    && ts.iter().zip(ss).all(|(t, s)| t.same_skeleton(s))
            }
            _ => false,
        }
    }
}

fn norm_iv(iv: &Interval) -> Interval {
    Interval::new(normalize(&iv.lo), normalize(&iv.hi))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TypeError {
    #[error("incompatible types for `{name}`: {left} vs {right}")]
    IncompatibleTypes {
        name: Name,
        left: String,
        right: String,
    },
}

pub type Context = BTreeMap<Name, Type>;

/// Pointwise configuration for the verdict-producing checks.
#[derive(Debug, Clone, Default)]
pub struct TypeConfig {
    pub entails: EntailsConfig,
    pub usage: UsageConfig,
    pub subusage: SubusageConfig,
}

/// Subtyping per the usage-type rules: `Nat` widens its bounds, channels
/// require payload equivalence both ways plus subusage, servers additionally
/// require complexity equality under the extended variable set.
pub fn subtype(
    phi: &VarSet,
    constraints: &ConstraintSet,
    t: &Type,
    s: &Type,
    cfg: &TypeConfig,
) -> Verdict {
    match (t, s) {
        (Type::Nat(a), Type::Nat(b)) => {
            let cs = vec![
                crate::index::Constraint::new(b.lo.clone(), crate::index::Rel::Le, a.lo.clone()),
                crate::index::Constraint::new(a.hi.clone(), crate::index::Rel::Le, b.hi.clone()),
            ];
            entails_all(phi, constraints, &cs, &cfg.entails)
        }
        (Type::Chan(ts, u), Type::Chan(ss, v)) => {
            if ts.len() != ss.len() {
                return Verdict::Unknown;
            }
            let payload = payload_equiv(phi, constraints, ts, ss, cfg);
            let sub = subusage(phi, constraints, u, v, &cfg.subusage);
            combine(&[payload, sub])
        }
        (Type::Serv(is, k, ts, u), Type::Serv(js, k2, ss, v)) => {
            if is.len() != js.len() || ts.len() != ss.len() {
                return Verdict::Unknown;
            }
            let Some((inner_phi, k, ts, k2, ss)) = align_servers(phi, is, k, ts, js, k2, ss) else {
                return Verdict::Unknown;
            };
            let keq = entails_all(&inner_phi, constraints, &k.equals(&k2), &cfg.entails);
            let payload = payload_equiv(&inner_phi, constraints, &ts, &ss, cfg);
            let sub = subusage(phi, constraints, u, v, &cfg.subusage);
            combine(&[keq, payload, sub])
        }
        _ => Verdict::Unknown,
    }
}

/// Alpha-rename both servers' binders to shared fresh variables (avoiding
/// the ambient set and every free index variable in sight) and return the
/// extended variable set together with the renamed complexities/payloads.
#[allow(clippy::type_complexity)]
fn align_servers(
    phi: &VarSet,
    is: &[IdxVar],
    k: &Interval,
    ts: &[Type],
    js: &[IdxVar],
    k2: &Interval,
    ss: &[Type],
) -> Option<(VarSet, Interval, Vec<Type>, Interval, Vec<Type>)> {
    let mut used: VarSet = phi.clone();
    k.free_vars(&mut used);
    k2.free_vars(&mut used);
    for t in ts.iter().chain(ss) {
        t.free_index_vars(&mut used);
    }
    let mut fresh = Vec::new();
    for base in is {
        let name = if used.insert(base.clone()) {
            base.clone()
        } else {
            let mut n = 0u32;
            loop {
                n += 1;
                let cand = format!("{base}_{n}");
                if used.insert(cand.clone()) {
                    break cand;
                }
            }
        };
        fresh.push(name);
    }
    let rename = |olds: &[IdxVar]| -> BTreeMap<IdxVar, Index> {
        olds.iter()
            .zip(&fresh)
            .map(|(o, f)| (o.clone(), Index::Var(f.clone())))
            .collect()
    };
    let (map_l, map_r) = (rename(is), rename(js));
    let mut inner_phi = phi.clone();
    inner_phi.extend(fresh.iter().cloned());
    Some((
        inner_phi,
        k.subst_many(&map_l),
        ts.iter().map(|t| t.subst_many(&map_l)).collect(),
        k2.subst_many(&map_r),
        ss.iter().map(|t| t.subst_many(&map_r)).collect(),
    ))
}

fn payload_equiv(
    phi: &VarSet,
    constraints: &ConstraintSet,
    ts: &[Type],
    ss: &[Type],
    cfg: &TypeConfig,
) -> Verdict {
    let mut verdicts = Vec::new();
    for (t, s) in ts.iter().zip(ss) {
        verdicts.push(subtype(phi, constraints, t, s, cfg));
        verdicts.push(subtype(phi, constraints, s, t, cfg));
    }
    combine(&verdicts)
}

fn combine(vs: &[Verdict]) -> Verdict {
    let mut unknown = false;
    for v in vs {
        match v {
            Verdict::Proven => {}
            Verdict::Refuted(w) => return Verdict::Refuted(w.clone()),
            Verdict::Unknown => unknown = true,
        }
    }
    if unknown {
        Verdict::Unknown
    } else {
        Verdict::Proven
    }
}

/// Parallel composition of types: usages compose with `|`, sized naturals
/// are idempotent. Partiality is meaningful: a mismatch means a context
/// split is impossible.
pub fn par_types(name: &Name, t: &Type, s: &Type) -> Result<Type, TypeError> {
    if !t.same_skeleton(s) {
        return Err(TypeError::IncompatibleTypes {
            name: name.clone(),
            left: t.to_string(),
            right: s.to_string(),
        });
    }
    Ok(match (t, s) {
        (Type::Nat(_), _) => t.clone(),
        (Type::Chan(_, u), Type::Chan(_, v)) | (Type::Serv(_, _, _, u), Type::Serv(_, _, _, v)) => {
            t.with_usage(Usage::par(u.clone(), v.clone()))
        }
        _ => unreachable!("skeleton check"),
    })
}

/// Replication of a type: `!Ch(T)/U = Ch(T)/!U`; identity on naturals.
pub fn bang_type(t: &Type) -> Type {
    match t.usage() {
        None => t.clone(),
        Some(u) => t.with_usage(Usage::bang(u.clone())),
    }
}

/// Delaying of a type by an interval; identity on naturals.
pub fn delay_type(a: &Interval, t: &Type) -> Type {
    match t.usage() {
        None => t.clone(),
        Some(u) => t.with_usage(usage::delay(a, u)),
    }
}

/// Delaying of a type by a capacity.
pub fn delay_type_cap(c: &Capacity, t: &Type) -> Type {
    match t.usage() {
        None => t.clone(),
        Some(u) => t.with_usage(delay_by_capacity(c, u)),
    }
}

/// A type is reliable when it is a sized natural or its usage is reliable.
pub fn type_reliable(
    phi: &VarSet,
    constraints: &ConstraintSet,
    t: &Type,
    cfg: &UsageConfig,
) -> Reliability {
    match t.usage() {
        None => Reliability::Reliable,
        Some(u) => reliable(phi, constraints, u, cfg),
    }
}

/// Pointwise parallel composition of contexts. Names present on one side
/// only are adjoined with the same type skeleton and usage `0` first.
pub fn par_contexts(gamma: &Context, delta: &Context) -> Result<Context, TypeError> {
    let mut out = Context::new();
    for (name, t) in gamma {
        match delta.get(name) {
            None => {
                out.insert(name.clone(), t.clone());
            }
            Some(s) => {
                out.insert(name.clone(), par_types(name, t, s)?);
            }
        }
    }
    for (name, s) in delta {
        if !gamma.contains_key(name) {
            out.insert(name.clone(), s.clone());
        }
    }
    Ok(out)
}

pub fn delay_context(a: &Interval, gamma: &Context) -> Context {
    gamma
        .iter()
        .map(|(n, t)| (n.clone(), delay_type(a, t)))
        .collect()
}

pub fn delay_context_cap(c: &Capacity, gamma: &Context) -> Context {
    gamma
        .iter()
        .map(|(n, t)| (n.clone(), delay_type_cap(c, t)))
        .collect()
}

pub fn bang_context(gamma: &Context) -> Context {
    gamma
        .iter()
        .map(|(n, t)| (n.clone(), bang_type(t)))
        .collect()
}

/// The context reduction used by the subject-reduction spot checks: the
/// context itself plus every context replacing exactly one name's usage by
/// a reachable successor.
pub fn context_step(
    phi: &VarSet,
    constraints: &ConstraintSet,
    gamma: &Context,
    cfg: &UsageConfig,
) -> Vec<Context> {
    let mut out = vec![gamma.clone()];
    for (name, t) in gamma {
        let Some(u) = t.usage() else { continue };
        for succ in usage::reachable_usages(phi, constraints, u, cfg) {
            if usage::congruent_usages(&succ, u) {
                continue;
            }
            let mut next = gamma.clone();
            next.insert(name.clone(), t.with_usage(succ));
            out.push(next);
        }
    }
    out
}

/// Types-as-equal check (mutual subtyping with every side condition proven).
pub fn types_equal(
    phi: &VarSet,
    constraints: &ConstraintSet,
    t: &Type,
    s: &Type,
    cfg: &TypeConfig,
) -> bool {
    match (t, s) {
        (Type::Nat(a), Type::Nat(b)) => {
            entails_all(phi, constraints, &a.equals(b), &cfg.entails).is_proven()
        }
        (Type::Chan(ts, u), Type::Chan(ss, v)) => {
            ts.len() == ss.len()
                && ts
                    .iter()
                    .zip(ss)
                    .all(|(a, b)| types_equal(phi, constraints, a, b, cfg))
                && usage::usages_equal(phi, constraints, u, v, &cfg.entails)
        }
        (Type::Serv(is, k, ts, u), Type::Serv(js, k2, ss, v)) => {
            if is.len() != js.len() || ts.len() != ss.len() {
                return false;
            }
            let Some((inner_phi, k, ts, k2, ss)) = align_servers(phi, is, k, ts, js, k2, ss) else {
                return false;
            };
            entails_all(&inner_phi, constraints, &k.equals(&k2), &cfg.entails).is_proven()
                && ts
                    .iter()
                    .zip(&ss)
                    .all(|(a, b)| types_equal(&inner_phi, constraints, a, b, cfg))
                && usage::usages_equal(phi, constraints, u, v, &cfg.entails)
        }
        _ => false,
    }
}

/// Whether a capacity refinement `i <= j` is provable.
pub fn capacity_refines(
    phi: &VarSet,
    constraints: &ConstraintSet,
    i: &Capacity,
    j: &Capacity,
    cfg: &EntailsConfig,
) -> bool {
    match capacity_le(i, j) {
        None => false,
        Some(cs) => entails_all(phi, constraints, &cs, cfg).is_proven(),
    }
}

fn fmt_types(ts: &[Type], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    for (k, t) in ts.iter().enumerate() {
        if k > 0 {
            write!(f, ",")?;
        }
        write!(f, "{t}")?;
    }
    Ok(())
}

fn fmt_usage_suffix(u: &Usage, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if matches!(u, Usage::Par(..) | Usage::Choice(..)) {
        write!(f, "/({u})")
    } else {
        write!(f, "/{u}")
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Nat(iv) => write!(f, "Nat{iv}"),
            Type::Chan(ts, u) => {
                write!(f, "Ch(")?;
                fmt_types(ts, f)?;
                write!(f, ")")?;
                fmt_usage_suffix(u, f)
            }
            Type::Serv(is, k, ts, u) => {
                write!(f, "Serv[{}]{k}(", is.join(","))?;
                fmt_types(ts, f)?;
                write!(f, ")")?;
                fmt_usage_suffix(u, f)
            }
        }
    }
}
