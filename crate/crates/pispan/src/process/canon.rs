//! Canonical forms and the congruence decision.
//!
//! A canonical form is a list of top-level binders plus a sorted multiset of
//! annotated threads. Annotations are pushed through parallel composition,
//! name creation and nesting (`0:P = P`, `m:(P|Q) = m:P | m:Q`,
//! `m:(nu a)P = (nu a)(m:P)`, `m:(n:P) = (m+n):P`), all binders are extruded
//! to the top after freshening, guard bodies are canonicalized recursively,
//! and binders are renamed to `#<depth>` names. Top-level binders are
//! numbered by the permutation producing the least overall form, which makes
//! congruent processes yield identical forms (complete up to 6 binders per
//! nesting level; beyond that a fixed heuristic order is used).
//!
//! Threads whose guard is nil (`n : 0`) carry elapsed time that local
//! complexity must see. Since `m:P = n:((m-n):P)` for `m >= n` and
//! `P | 0 = P`, a dead thread is absorbed by any thread with an annotation
//! at least as large; at most one survives, and only when its annotation
//! strictly dominates every live thread's.

use std::collections::BTreeMap;

use super::{Expr, Name, Process};

const PERM_CAP: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalForm {
    pub binders: usize,
    /// Sorted `(annotation, guard)` pairs; the guard is one of the five
    /// guarded shapes, or `Nil` for a dead annotated thread.
    pub threads: Vec<(u64, Process)>,
}

impl CanonicalForm {
    /// The maximal annotation appearing in the form.
    pub fn max_annotation(&self) -> u64 {
        self.threads.iter().map(|(n, _)| *n).max().unwrap_or(0)
    }

    pub fn binder_names(&self) -> Vec<Name> {
        (0..self.binders).map(canon_name).collect()
    }
}

fn canon_name(depth: usize) -> Name {
    format!("#{depth}")
}

pub fn canonicalize(p: &Process) -> CanonicalForm {
    canon_cf(p, 0)
}

pub fn congruent(p: &Process, q: &Process) -> bool {
    canonicalize(p) == canonicalize(q)
}

/// Rebuild a process from a canonical form.
pub fn embed(cf: &CanonicalForm) -> Process {
    embed_at(cf, 0)
}

fn embed_at(cf: &CanonicalForm, depth: usize) -> Process {
    let mut body = Process::Nil;
    let mut rev = cf.threads.iter().rev();
    if let Some((n, g)) = rev.next() {
        body = annotate(*n, g.clone());
        for (n, g) in rev {
            body = Process::par(annotate(*n, g.clone()), body);
        }
    }
    for k in (0..cf.binders).rev() {
        body = Process::New(canon_name(depth + k), Box::new(body));
    }
    body
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn go(pool: &mut Vec<usize>, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pool.is_empty() {
            out.push(cur.clone());
            return;
        }
        for i in 0..pool.len() {
            let x = pool.remove(i);
            cur.push(x);
            go(pool, cur, out);
            cur.pop();
            pool.insert(i, x);
        }
    }
    let mut out = Vec::new();
    go(&mut (0..k).collect(), &mut Vec::new(), &mut out);
    out
}

fn annotate(n: u64, g: Process) -> Process {
    if n == 0 {
        g
    } else {
        Process::annot(n, g)
    }
}

fn canon_cf(p: &Process, depth: usize) -> CanonicalForm {
    let mut fresh = Gensym { counter: 0 };
    let p = freshen(p, &mut BTreeMap::new(), &mut fresh);
    let mut binders: Vec<Name> = Vec::new();
    let mut items: Vec<(u64, Process)> = Vec::new();
    strip(&p, 0, &mut binders, &mut items);

    let k = binders.len();
    let orders: Vec<Vec<usize>> = if k <= PERM_CAP {
        permutations(k)
    } else {
        vec![(0..k).collect()]
    };
    let mut best: Option<Vec<(u64, Process)>> = None;
    for order in orders {
        let rename: BTreeMap<Name, Name> = order
            .iter()
            .enumerate()
            .map(|(slot, &which)| (binders[which].clone(), canon_name(depth + slot)))
            .collect();
        let mut threads: Vec<(u64, Process)> = items
            .iter()
            .map(|(n, g)| (*n, canon_guard(&rename_names(g, &rename), depth + k)))
            .collect();
        threads.sort();
        dedup_dead(&mut threads);
        if best.as_ref().is_none_or(|b| threads < *b) {
            best = Some(threads);
        }
    }
    CanonicalForm {
        binders: k,
        threads: best.unwrap_or_default(),
    }
}

/// Absorb dead threads. Since `m:P = n:((m-n):P)` for `m >= n` and
/// `P | 0 = P`, a thread `n:0` is congruent to nothing whenever some other
/// thread carries an annotation `>= n`; at most one dead thread survives,
/// and only when its annotation strictly dominates every guard's.
fn dedup_dead(threads: &mut Vec<(u64, Process)>) {
    let max_dead = threads
        .iter()
        .filter(|(_, g)| matches!(g, Process::Nil))
        .map(|(n, _)| *n)
        .max();
    let Some(max_dead) = max_dead else { return };
    threads.retain(|(_, g)| !matches!(g, Process::Nil));
    let max_live = threads.iter().map(|(n, _)| *n).max();
    if max_live.is_none_or(|m| max_dead > m) {
        threads.push((max_dead, Process::Nil));
        threads.sort();
    }
}

struct Gensym {
    counter: u64,
}

impl Gensym {
    fn fresh(&mut self) -> Name {
        let n = self.counter;
        self.counter += 1;
        format!("#g{n}")
    }
}

fn rename_expr(e: &Expr, map: &BTreeMap<Name, Name>) -> Expr {
    match e {
        Expr::Var(v) => Expr::Var(map.get(v).cloned().unwrap_or_else(|| v.clone())),
        Expr::Zero => Expr::Zero,
        Expr::Succ(inner) => Expr::Succ(Box::new(rename_expr(inner, map))),
        Expr::FnApp(f, args) => Expr::FnApp(
            f.clone(),
            args.iter().map(|a| rename_expr(a, map)).collect(),
        ),
    }
}

/// Injective renaming of free names; binders are left alone (callers only
/// rename names known to be distinct from every binder).
fn rename_names(p: &Process, map: &BTreeMap<Name, Name>) -> Process {
    let chan = |a: &Name| map.get(a).cloned().unwrap_or_else(|| a.clone());
    match p {
        Process::Nil => Process::Nil,
        Process::Par(l, r) => Process::par(rename_names(l, map), rename_names(r, map)),
        Process::Input(a, xs, body) => {
            Process::Input(chan(a), xs.clone(), Box::new(rename_names(body, map)))
        }
        Process::ReplInput(a, xs, body) => {
            Process::ReplInput(chan(a), xs.clone(), Box::new(rename_names(body, map)))
        }
        Process::Output(a, es, body) => Process::Output(
            chan(a),
            es.iter().map(|e| rename_expr(e, map)).collect(),
            Box::new(rename_names(body, map)),
        ),
        Process::New(a, body) => Process::New(a.clone(), Box::new(rename_names(body, map))),
        Process::Tick(body) => Process::tick(rename_names(body, map)),
        Process::Annot(n, body) => Process::annot(*n, rename_names(body, map)),
        Process::Match(e, zero, x, succ) => Process::Match(
            rename_expr(e, map),
            Box::new(rename_names(zero, map)),
            x.clone(),
            Box::new(rename_names(succ, map)),
        ),
    }
}

/// Alpha-rename every binder in the term to a fresh gensym, so later
/// restructuring can never capture.
fn freshen(p: &Process, map: &mut BTreeMap<Name, Name>, fresh: &mut Gensym) -> Process {
    let chan =
        |a: &Name, map: &BTreeMap<Name, Name>| map.get(a).cloned().unwrap_or_else(|| a.clone());
    match p {
        Process::Nil => Process::Nil,
        Process::Par(l, r) => {
            let l = freshen(l, map, fresh);
            let r = freshen(r, map, fresh);
            Process::par(l, r)
        }
        Process::Input(a, xs, body) | Process::ReplInput(a, xs, body) => {
            let a = chan(a, map);
            let mut saved = Vec::new();
            let mut nxs = Vec::new();
            for x in xs {
                let nx = fresh.fresh();
                saved.push((x.clone(), map.insert(x.clone(), nx.clone())));
                nxs.push(nx);
            }
            let nbody = freshen(body, map, fresh);
            for (x, old) in saved.into_iter().rev() {
                match old {
                    Some(o) => {
                        map.insert(x, o);
                    }
                    None => {
                        map.remove(&x);
                    }
                }
            }
            if matches!(p, Process::Input(..)) {
                Process::Input(a, nxs, Box::new(nbody))
            } else {
                Process::ReplInput(a, nxs, Box::new(nbody))
            }
        }
        Process::Output(a, es, body) => {
            let a = chan(a, map);
            let es = es.iter().map(|e| rename_expr(e, map)).collect();
            let body = freshen(body, map, fresh);
            Process::Output(a, es, Box::new(body))
        }
        Process::New(a, body) => {
            let na = fresh.fresh();
            let old = map.insert(a.clone(), na.clone());
            let body = freshen(body, map, fresh);
            match old {
                Some(o) => {
                    map.insert(a.clone(), o);
                }
                None => {
                    map.remove(a);
                }
            }
            Process::New(na, Box::new(body))
        }
        Process::Tick(body) => Process::tick(freshen(body, map, fresh)),
        Process::Annot(n, body) => Process::annot(*n, freshen(body, map, fresh)),
        Process::Match(e, zero, x, succ) => {
            let e = rename_expr(e, map);
            let zero = freshen(zero, map, fresh);
            let nx = fresh.fresh();
            let old = map.insert(x.clone(), nx.clone());
            let succ = freshen(succ, map, fresh);
            match old {
                Some(o) => {
                    map.insert(x.clone(), o);
                }
                None => {
                    map.remove(x);
                }
            }
            Process::Match(e, Box::new(zero), nx, Box::new(succ))
        }
    }
}

/// Push annotations down, extrude binders, flatten parallel composition.
fn strip(p: &Process, annot: u64, binders: &mut Vec<Name>, items: &mut Vec<(u64, Process)>) {
    match p {
        Process::Nil => {
            if annot > 0 {
                items.push((annot, Process::Nil));
            }
        }
        Process::Par(l, r) => {
            strip(l, annot, binders, items);
            strip(r, annot, binders, items);
        }
        Process::Annot(n, body) => strip(body, annot + n, binders, items),
        Process::New(a, body) => {
            binders.push(a.clone());
            strip(body, annot, binders, items);
        }
        guard => items.push((annot, guard.clone())),
    }
}

/// Canonicalize a guarded process in place: binders inside are renamed to
/// depth names and bodies are recursively put in embedded canonical form.
fn canon_guard(g: &Process, depth: usize) -> Process {
    match g {
        Process::Input(a, xs, body) | Process::ReplInput(a, xs, body) => {
            let rename: BTreeMap<Name, Name> = xs
                .iter()
                .enumerate()
                .map(|(k, x)| (x.clone(), canon_name(depth + k)))
                .collect();
            let nxs: Vec<Name> = (0..xs.len()).map(|k| canon_name(depth + k)).collect();
            let body = rename_names(body, &rename);
            let body = embed_at(&canon_cf_nested(&body, depth + xs.len()), depth + xs.len());
            if matches!(g, Process::Input(..)) {
                Process::Input(a.clone(), nxs, Box::new(body))
            } else {
                Process::ReplInput(a.clone(), nxs, Box::new(body))
            }
        }
        Process::Output(a, es, body) => {
            let body = embed_at(&canon_cf_nested(body, depth), depth);
            Process::Output(a.clone(), es.clone(), Box::new(body))
        }
        Process::Tick(body) => Process::tick(embed_at(&canon_cf_nested(body, depth), depth)),
        Process::Match(e, zero, x, succ) => {
            let zero = embed_at(&canon_cf_nested(zero, depth), depth);
            let rename: BTreeMap<Name, Name> =
                [(x.clone(), canon_name(depth))].into_iter().collect();
            let succ = rename_names(succ, &rename);
            let succ = embed_at(&canon_cf_nested(&succ, depth + 1), depth + 1);
            Process::Match(e.clone(), Box::new(zero), canon_name(depth), Box::new(succ))
        }
        Process::Nil => Process::Nil,
        other => unreachable!("strip only produces guards, got {other}"),
    }
}

fn canon_cf_nested(p: &Process, depth: usize) -> CanonicalForm {
    canon_cf(p, depth)
}
