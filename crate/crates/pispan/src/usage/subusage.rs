//! Subusage proof search.
//!
//! The relation is searched as chains of single decomposed steps: each step
//! is congruence plus one context-free rule instance (component weakening,
//! choice projection or branch refinement, obligation narrowing with
//! capacity widening, delayed-component absorption, or a single inner step
//! under a prefix or replication). Obligation/capacity instances for the
//! weakening rule are drawn from the target usage to keep the branching
//! finite. Verdicts are `Proven` or `Unknown`; completeness is not claimed.

use std::collections::{HashSet, VecDeque};

use crate::index::{entails_all, ConstraintSet, EntailsConfig, Interval, VarSet, Verdict};

use super::normal::{norm, norm_atoms, rebuild, usages_equal};
use super::{cap_add, capacity_le, delay, Capacity, Polarity, Usage};

#[derive(Debug, Clone)]
pub struct SubusageConfig {
    /// Maximum chain length.
    pub depth: u32,
    /// Maximum number of distinct usages expanded.
    pub nodes: usize,
    pub entails: EntailsConfig,
}

impl Default for SubusageConfig {
    fn default() -> Self {
        SubusageConfig {
            depth: 8,
            nodes: 20_000,
            entails: EntailsConfig::default(),
        }
    }
}

/// Search for a subusage derivation `u (subusage) v`.
pub fn subusage(
    phi: &VarSet,
    constraints: &ConstraintSet,
    u: &Usage,
    v: &Usage,
    cfg: &SubusageConfig,
) -> Verdict {
    let target = norm(v);
    let pool = action_annotations(&target);
    let start = norm(u);
    let mut visited: HashSet<Usage> = HashSet::new();
    let mut queue: VecDeque<(Usage, u32)> = VecDeque::new();
    visited.insert(start.clone());
    queue.push_back((start, 0));
    while let Some((state, depth)) = queue.pop_front() {
        if usages_equal(phi, constraints, &state, &target, &cfg.entails) {
            return Verdict::Proven;
        }
        if depth >= cfg.depth || visited.len() >= cfg.nodes {
            continue;
        }
        for next in step_candidates(phi, constraints, &state, &pool, &cfg.entails) {
            if visited.insert(next.clone()) {
                queue.push_back((next, depth + 1));
            }
        }
    }
    Verdict::Unknown
}

type Annot = (Polarity, Interval, Capacity);

fn action_annotations(v: &Usage) -> Vec<Annot> {
    let mut out = Vec::new();
    fn walk(u: &Usage, out: &mut Vec<Annot>) {
        match u {
            Usage::Zero => {}
            Usage::Par(l, r) | Usage::Choice(l, r) => {
                walk(l, out);
                walk(r, out);
            }
            Usage::Bang(inner) => walk(inner, out),
            Usage::Act(p, o, c, cont) => {
                out.push((*p, o.clone(), c.clone()));
                walk(cont, out);
            }
        }
    }
    walk(v, &mut out);
    out.sort();
    out.dedup();
    out
}

/// All usages reachable from `u` by one decomposed subusage step.
fn step_candidates(
    phi: &VarSet,
    constraints: &ConstraintSet,
    u: &Usage,
    pool: &[Annot],
    ecfg: &EntailsConfig,
) -> Vec<Usage> {
    let atoms = norm_atoms(u);
    let mut out: Vec<Usage> = Vec::new();
    let mut push = |atoms: Vec<Usage>| out.push(rebuild(atoms));

    for (k, atom) in atoms.iter().enumerate() {
        let minus_k = || {
            let mut rest = atoms.clone();
            rest.remove(k);
            rest
        };
        // weaken a component away
        push(minus_k());
        let (inner, banged) = match atom {
            Usage::Bang(inner) => (&**inner, true),
            other => (other, false),
        };
        if banged {
            // replication unfolding: replace !a by one or two plain copies
            for copies in 1..=2usize {
                let mut rest = minus_k();
                for _ in 0..copies {
                    rest.extend(norm_atoms(inner));
                }
                push(rest);
            }
        }
        let rewrap = |nu: Usage| if banged { Usage::bang(nu) } else { nu };
        match inner {
            Usage::Choice(l, r) => {
                // projection
                for branch in [&**l, &**r] {
                    let mut rest = minus_k();
                    rest.extend(norm_atoms(&rewrap(branch.clone())));
                    push(rest);
                }
                // one inner step within a branch
                for l2 in step_candidates(phi, constraints, l, pool, ecfg) {
                    let mut rest = minus_k();
                    rest.extend(norm_atoms(&rewrap(Usage::choice(l2, (**r).clone()))));
                    push(rest);
                }
                for r2 in step_candidates(phi, constraints, r, pool, ecfg) {
                    let mut rest = minus_k();
                    rest.extend(norm_atoms(&rewrap(Usage::choice((**l).clone(), r2))));
                    push(rest);
                }
            }
            Usage::Act(p, o, c, cont) => {
                // strengthen the guarantee, weaken the assumption
                for (_, o2, c2) in pool.iter().filter(|(p2, _, _)| p2 == p) {
                    if (o2, c2) == (o, c) {
                        continue;
                    }
                    let incl = o2.included_in(o);
                    let caps = match capacity_le(c, c2) {
                        Some(cs) => cs,
                        None => continue,
                    };
                    let all: Vec<_> = incl.into_iter().chain(caps).collect();
                    if entails_all(phi, constraints, &all, ecfg).is_proven() {
                        let mut rest = minus_k();
                        rest.extend(norm_atoms(&rewrap(Usage::Act(
                            *p,
                            o2.clone(),
                            c2.clone(),
                            cont.clone(),
                        ))));
                        push(rest);
                    }
                }
                // one inner step under the prefix
                for cont2 in step_candidates(phi, constraints, cont, pool, ecfg) {
                    let mut rest = minus_k();
                    rest.extend(norm_atoms(&rewrap(Usage::Act(
                        *p,
                        o.clone(),
                        c.clone(),
                        Box::new(cont2),
                    ))));
                    push(rest);
                }
                // absorb a parallel component delayed by A_o + J_c under the prefix
                if !banged {
                    let d = cap_add(o, c);
                    for (j, other) in atoms.iter().enumerate() {
                        if j == k || matches!(other, Usage::Bang(_)) {
                            continue;
                        }
                        if let Some(u1) = un_delay(phi, constraints, other, &d, ecfg) {
                            let mut rest: Vec<Usage> = atoms
                                .iter()
                                .enumerate()
                                .filter(|(i, _)| *i != k && *i != j)
                                .map(|(_, a)| a.clone())
                                .collect();
                            let regrouped = Usage::Act(
                                *p,
                                o.clone(),
                                c.clone(),
                                Box::new(Usage::par((**cont).clone(), u1)),
                            );
                            rest.extend(norm_atoms(&regrouped));
                            push(rest);
                        }
                    }
                }
            }
            _ => {}
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Invert the delaying operation: find `w` with `delay(d, w) = u`, if the
/// truncated-subtraction candidate verifies.
fn un_delay(
    phi: &VarSet,
    constraints: &ConstraintSet,
    u: &Usage,
    d: &Interval,
    ecfg: &EntailsConfig,
) -> Option<Usage> {
    use crate::index::{normalize, Index};
    let shift = |iv: &Interval| {
        Interval::new(
            normalize(&Index::sub(iv.lo.clone(), d.lo.clone())),
            normalize(&Index::sub(iv.hi.clone(), d.hi.clone())),
        )
    };
    fn shift_tops(u: &Usage, shift: &impl Fn(&Interval) -> Interval) -> Usage {
        match u {
            Usage::Zero => Usage::Zero,
            Usage::Par(l, r) => Usage::par(shift_tops(l, shift), shift_tops(r, shift)),
            Usage::Choice(l, r) => Usage::choice(shift_tops(l, shift), shift_tops(r, shift)),
            Usage::Bang(inner) => Usage::bang(shift_tops(inner, shift)),
            Usage::Act(p, o, c, cont) => Usage::Act(*p, shift(o), c.clone(), cont.clone()),
        }
    }
    let candidate = shift_tops(u, &shift);
    usages_equal(phi, constraints, &delay(d, &candidate), u, ecfg).then_some(candidate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::usage::parse_usage;

    fn check(u: &str, v: &str) -> Verdict {
        let phi = VarSet::new();
        subusage(
            &phi,
            &vec![],
            &parse_usage(u).unwrap(),
            &parse_usage(v).unwrap(),
            &SubusageConfig::default(),
        )
    }

    #[test]
    fn anything_refines_zero() {
        assert_eq!(
            check("In[0,0]<1>.Out[2,2]<0> | !Out[1,1]<0>", "0"),
            Verdict::Proven
        );
    }

    #[test]
    fn obligation_narrowing() {
        assert_eq!(
            check("In[0,2]<1>.Out[0,0]<0>", "In[0,0]<1>.Out[0,0]<0>"),
            Verdict::Proven
        );
        assert_eq!(
            check("In[1,2]<1>.Out[0,0]<0>", "In[0,0]<1>.Out[0,0]<0>"),
            Verdict::Unknown
        );
    }

    #[test]
    fn capacity_widening() {
        assert_eq!(check("In[0,0]<1>", "In[0,0]<2>"), Verdict::Proven);
        assert_eq!(check("In[0,0][1,1]", "In[0,0]<1>"), Verdict::Proven);
        // a plain capacity cannot refine into a proper interval
        assert_eq!(check("In[0,0]<1>", "In[0,0][1,2]"), Verdict::Unknown);
    }

    #[test]
    fn replication_unfolding() {
        let u = "!In[0,0]<1>.Out[0,0]<0>";
        assert_eq!(
            check(u, &format!("{u} | In[0,0]<1>.Out[0,0]<0>")),
            Verdict::Proven
        );
        assert_eq!(
            check(u, "In[0,0]<1>.Out[0,0]<0> | In[0,0]<1>.Out[0,0]<0>"),
            Verdict::Proven
        );
    }

    #[test]
    fn choice_projection() {
        assert_eq!(
            check("In[0,0]<0> + Out[0,0]<0>", "Out[0,0]<0>"),
            Verdict::Proven
        );
        assert_eq!(
            check("In[0,0]<0> + Out[0,0]<0>", "In[0,0]<0>"),
            Verdict::Proven
        );
    }

    #[test]
    fn inner_weakening_under_prefix() {
        assert_eq!(
            check(
                "In[0,0]<1>.(Out[0,0]<0> | Out[3,3]<9>)",
                "In[0,0]<1>.Out[0,0]<0>"
            ),
            Verdict::Proven
        );
    }

    #[test]
    fn delayed_component_absorption() {
        // (In[0,0]<1>.U) | delayed V refines In[0,0]<1>.(U | V)
        assert_eq!(
            check(
                "In[0,0]<1>.Out[0,0]<0> | Out[0,1]<4>",
                "In[0,0]<1>.(Out[0,0]<0> | Out[0,0]<4>)"
            ),
            Verdict::Proven
        );
    }

    #[test]
    fn symbolic_instances() {
        use crate::index::parse_constraint;
        let phi: VarSet = ["i".to_string()].into_iter().collect();
        let cs = vec![parse_constraint("i <= 0").unwrap()];
        let v = subusage(
            &phi,
            &cs,
            &parse_usage("Out[i,i]<0>").unwrap(),
            &parse_usage("Out[0,0]<0>").unwrap(),
            &SubusageConfig::default(),
        );
        assert_eq!(v, Verdict::Proven);
        let v = subusage(
            &phi,
            &vec![parse_constraint("i >= 1").unwrap()],
            &parse_usage("Out[0,inf]<0>").unwrap(),
            &parse_usage("Out[0,0]<0>").unwrap(),
            &SubusageConfig::default(),
        );
        assert_eq!(v, Verdict::Proven);
    }
}
