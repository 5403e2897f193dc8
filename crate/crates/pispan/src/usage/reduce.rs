//! Usage reduction and reliability.
//!
//! One reduction step picks an input and an output (unfolding replications
//! as needed) and checks the assume-guarantee side conditions
//! `B_o (subset) A_o (+) I_c` and `A_o (subset) B_o (+) J_c`. A provable
//! pair synchronizes and delays the continuations by `A_o lub B_o`; a
//! refutable pair is an Error; anything else blocks the verdict. Choice
//! reduces nondeterministically to either branch.
//!
//! Reliability explores the reachable usages breadth-first. Replication
//! unfolding is budgeted per state with coverability-style subsumption: a
//! normalized usage already seen with at least as much remaining budget is
//! skipped. Exhausting the budget at a state that still has a replicated
//! redex degrades the verdict to Unknown.

use std::collections::{HashMap, VecDeque};

use crate::index::{entails_all, ConstraintSet, EntailsConfig, VarSet, Verdict};

use super::normal::{norm, norm_atoms, rebuild};
use super::{delay, ilub, iplus, Polarity, Usage};

#[derive(Debug, Clone)]
pub struct UsageConfig {
    /// Replication copies available to the whole exploration.
    pub unfold: u32,
    /// Maximum number of distinct states explored.
    pub fuel: usize,
    pub entails: EntailsConfig,
}

impl Default for UsageConfig {
    fn default() -> Self {
        UsageConfig {
            unfold: 2,
            fuel: 100_000,
            entails: EntailsConfig::default(),
        }
    }
}

/// Successors of one reduction step, with Error and Unknown-blocked pairs
/// recorded rather than dropped.
#[derive(Debug, Clone, Default)]
pub struct StepSet {
    /// Normalized successor usages, flagged true when the step unfolded a
    /// replication.
    pub successors: Vec<(Usage, bool)>,
    /// Redex pairs whose side conditions are refuted.
    pub errors: Vec<String>,
    /// Redex pairs whose side conditions are neither provable nor refutable.
    pub blocked: Vec<String>,
}

impl StepSet {
    pub fn next_usages(&self) -> Vec<Usage> {
        self.successors.iter().map(|(u, _)| u.clone()).collect()
    }

    pub fn has_error(&self) -> bool {
        !self.errors.is_empty()
    }
}

/// A candidate action occurrence: an action atom, possibly a copy unfolded
/// from a banged atom.
struct Source<'a> {
    atom_index: usize,
    from_bang: bool,
    polarity: Polarity,
    obligation: &'a crate::index::Interval,
    capacity: &'a super::Capacity,
    cont: &'a Usage,
}

fn action_sources(atoms: &[Usage]) -> Vec<Source<'_>> {
    let mut out = Vec::new();
    for (k, atom) in atoms.iter().enumerate() {
        let (inner, from_bang) = match atom {
            Usage::Bang(inner) => (&**inner, true),
            other => (other, false),
        };
        if let Usage::Act(p, o, c, cont) = inner {
            out.push(Source {
                atom_index: k,
                from_bang,
                polarity: *p,
                obligation: o,
                capacity: c,
                cont,
            });
        }
    }
    out
}

/// All one-step outcomes of the usage reduction.
pub fn usage_step(
    phi: &VarSet,
    constraints: &ConstraintSet,
    u: &Usage,
    cfg: &UsageConfig,
) -> StepSet {
    let atoms = norm_atoms(u);
    let mut out = StepSet::default();

    // choice steps
    for (k, atom) in atoms.iter().enumerate() {
        let (inner, banged) = match atom {
            Usage::Bang(inner) => (&**inner, true),
            other => (other, false),
        };
        if let Usage::Choice(l, r) = inner {
            for branch in [l, r] {
                let mut rest: Vec<Usage> = atoms.clone();
                let picked = if banged {
                    // !(U+V) unfolds a copy and keeps the bang
                    Usage::Par(Box::new((**branch).clone()), Box::new(Usage::Zero))
                } else {
                    rest.remove(k);
                    (**branch).clone()
                };
                rest.extend(norm_atoms(&picked));
                out.successors.push((rebuild(rest), banged));
            }
        }
    }

    // communication steps
    let sources = action_sources(&atoms);
    for sin in sources.iter().filter(|s| s.polarity == Polarity::In) {
        for sout in sources.iter().filter(|s| s.polarity == Polarity::Out) {
            if sin.atom_index == sout.atom_index {
                continue;
            }
            let c1 = sout
                .obligation
                .included_in(&iplus(sin.obligation, sin.capacity));
            let c2 = sin
                .obligation
                .included_in(&iplus(sout.obligation, sout.capacity));
            let all: Vec<_> = c1.into_iter().chain(c2).collect();
            let pair = || {
                format!(
                    "In{}{} with Out{}{}",
                    sin.obligation, sin.capacity, sout.obligation, sout.capacity
                )
            };
            match entails_all(phi, constraints, &all, &cfg.entails) {
                Verdict::Refuted(_) => out.errors.push(pair()),
                Verdict::Unknown => out.blocked.push(pair()),
                Verdict::Proven => {
                    let uses_bang = sin.from_bang || sout.from_bang;
                    let mut rest: Vec<Usage> = Vec::new();
                    for (k, atom) in atoms.iter().enumerate() {
                        let consumed = (k == sin.atom_index && !sin.from_bang)
                            || (k == sout.atom_index && !sout.from_bang);
                        if !consumed {
                            rest.push(atom.clone());
                        }
                    }
                    let stamp = ilub(sin.obligation, sout.obligation);
                    let joined = Usage::par(sin.cont.clone(), sout.cont.clone());
                    rest.extend(norm_atoms(&delay(&stamp, &joined)));
                    out.successors.push((rebuild(rest), uses_bang));
                }
            }
        }
    }
    out
}

/// All usages reachable from `u` by zero or more reduction steps, within
/// the exploration budgets. Error outcomes are not usages and are skipped.
pub fn reachable_usages(
    phi: &VarSet,
    constraints: &ConstraintSet,
    u: &Usage,
    cfg: &UsageConfig,
) -> Vec<Usage> {
    let start = norm(u);
    let mut visited: HashMap<Usage, u32> = HashMap::new();
    let mut queue: VecDeque<(Usage, u32)> = VecDeque::new();
    visited.insert(start.clone(), cfg.unfold);
    queue.push_back((start, cfg.unfold));
    let mut out = Vec::new();
    while let Some((state, budget)) = queue.pop_front() {
        out.push(state.clone());
        if out.len() >= cfg.fuel {
            break;
        }
        for (next, uses_bang) in usage_step(phi, constraints, &state, cfg).successors {
            let next_budget = if uses_bang {
                match budget.checked_sub(1) {
                    Some(b) => b,
                    None => continue,
                }
            } else {
                budget
            };
            match visited.get(&next) {
                Some(&seen) if seen >= next_budget => continue,
                _ => {
                    visited.insert(next.clone(), next_budget);
                    queue.push_back((next, next_budget));
                }
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Reliability {
    Reliable,
    Unreliable { trace: Vec<Usage> },
    Unknown { reason: String },
}

impl Reliability {
    pub fn is_reliable(&self) -> bool {
        matches!(self, Reliability::Reliable)
    }
}

/// Bounded exploration of the reachable usages: Unreliable iff an Error is
/// reachable, Reliable iff the frontier is exhausted with no Error, no
/// blocked side condition, and no budget cap; Unknown otherwise.
pub fn reliable(
    phi: &VarSet,
    constraints: &ConstraintSet,
    u: &Usage,
    cfg: &UsageConfig,
) -> Reliability {
    let start = norm(u);
    let mut visited: HashMap<Usage, u32> = HashMap::new();
    let mut parents: HashMap<Usage, Usage> = HashMap::new();
    let mut queue: VecDeque<(Usage, u32)> = VecDeque::new();
    visited.insert(start.clone(), cfg.unfold);
    queue.push_back((start.clone(), cfg.unfold));
    let mut unknown: Option<String> = None;
    let mut expanded = 0usize;

    while let Some((state, budget)) = queue.pop_front() {
        expanded += 1;
        if expanded > cfg.fuel {
            unknown = Some("state budget exhausted".into());
            break;
        }
        let steps = usage_step(phi, constraints, &state, cfg);
        if steps.has_error() {
            let mut trace = vec![state.clone()];
            let mut cur = state;
            while let Some(prev) = parents.get(&cur) {
                trace.push(prev.clone());
                cur = prev.clone();
            }
            trace.reverse();
            return Reliability::Unreliable { trace };
        }
        if let Some(pair) = steps.blocked.first() {
            unknown.get_or_insert_with(|| {
                format!("side condition neither proven nor refuted for {pair}")
            });
        }
        for (next, uses_bang) in steps.successors {
            let next_budget = if uses_bang {
                match budget.checked_sub(1) {
                    Some(b) => b,
                    None => {
                        unknown.get_or_insert_with(|| {
                            "replication unfolding budget exhausted with a live replicated redex".into()
                        });
                        continue;
                    }
                }
            } else {
                budget
            };
            match visited.get(&next) {
                Some(&seen) if seen >= next_budget => continue,
                _ => {
                    visited.insert(next.clone(), next_budget);
                    parents.entry(next.clone()).or_insert_with(|| state.clone());
                    queue.push_back((next, next_budget));
                }
            }
        }
    }

    match unknown {
        Some(reason) => Reliability::Unknown { reason },
        None => Reliability::Reliable,
    }
}
