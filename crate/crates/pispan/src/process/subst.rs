//! Capture-avoiding simultaneous substitution of expressions for variables.

use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

use super::{Expr, Name, Process};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SubstError {
    #[error("substitution arity mismatch: {params} parameters, {args} arguments")]
    ArityMismatch { params: usize, args: usize },
    #[error(
        "ill-formed substitution: channel position `{chan}` receives non-name expression `{expr}`"
    )]
    IllFormedSubstitution { chan: Name, expr: String },
}

pub fn free_names(p: &Process) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    collect_free(p, &mut BTreeSet::new(), &mut out);
    out
}

fn collect_free(p: &Process, bound: &mut BTreeSet<Name>, out: &mut BTreeSet<Name>) {
    let note = |n: &Name, bound: &BTreeSet<Name>, out: &mut BTreeSet<Name>| {
        if !bound.contains(n) {
            out.insert(n.clone());
        }
    };
    match p {
        Process::Nil => {}
        Process::Par(l, r) => {
            collect_free(l, bound, out);
            collect_free(r, bound, out);
        }
        Process::Input(a, params, body) | Process::ReplInput(a, params, body) => {
            note(a, bound, out);
            let added: Vec<Name> = params
                .iter()
                .filter(|x| bound.insert((*x).clone()))
                .cloned()
                .collect();
            collect_free(body, bound, out);
            for x in added {
                bound.remove(&x);
            }
        }
        Process::Output(a, args, body) => {
            note(a, bound, out);
            for e in args {
                let mut names = BTreeSet::new();
                e.free_names(&mut names);
                for n in names {
                    note(&n, bound, out);
                }
            }
            collect_free(body, bound, out);
        }
        Process::New(a, body) => {
            let added = bound.insert(a.clone());
            collect_free(body, bound, out);
            if added {
                bound.remove(a);
            }
        }
        Process::Tick(body) | Process::Annot(_, body) => collect_free(body, bound, out),
        Process::Match(e, zero, x, succ) => {
            let mut names = BTreeSet::new();
            e.free_names(&mut names);
            for n in names {
                note(&n, bound, out);
            }
            collect_free(zero, bound, out);
            let added = bound.insert(x.clone());
            collect_free(succ, bound, out);
            if added {
                bound.remove(x);
            }
        }
    }
}

/// Simultaneous substitution `p[params := args]`. Channel subjects may only
/// receive names.
pub fn substitute(p: &Process, params: &[Name], args: &[Expr]) -> Result<Process, SubstError> {
    if params.len() != args.len() {
        return Err(SubstError::ArityMismatch {
            params: params.len(),
            args: args.len(),
        });
    }
    let map: BTreeMap<Name, Expr> = params.iter().cloned().zip(args.iter().cloned()).collect();
    let mut avoid: BTreeSet<Name> = BTreeSet::new();
    for e in args {
        e.free_names(&mut avoid);
    }
    avoid.extend(free_names(p));
    let mut fresh = FreshNames { avoid, counter: 0 };
    subst_proc(p, &map, &mut fresh)
}

struct FreshNames {
    avoid: BTreeSet<Name>,
    counter: u64,
}

impl FreshNames {
    fn fresh(&mut self, base: &str) -> Name {
        loop {
            self.counter += 1;
            let cand = format!(
                "{}_{}",
                base.trim_end_matches(|c: char| c.is_ascii_digit() || c == '_'),
                self.counter
            );
            if !self.avoid.contains(&cand) {
                self.avoid.insert(cand.clone());
                return cand;
            }
        }
    }
}

fn subst_expr(e: &Expr, map: &BTreeMap<Name, Expr>) -> Expr {
    match e {
        Expr::Var(v) => map.get(v).cloned().unwrap_or_else(|| e.clone()),
        Expr::Zero => Expr::Zero,
        Expr::Succ(inner) => Expr::Succ(Box::new(subst_expr(inner, map))),
        Expr::FnApp(f, args) => {
            Expr::FnApp(f.clone(), args.iter().map(|a| subst_expr(a, map)).collect())
        }
    }
}

fn subst_chan(chan: &Name, map: &BTreeMap<Name, Expr>) -> Result<Name, SubstError> {
    match map.get(chan) {
        None => Ok(chan.clone()),
        Some(Expr::Var(v)) => Ok(v.clone()),
        Some(other) => Err(SubstError::IllFormedSubstitution {
            chan: chan.clone(),
            expr: other.to_string(),
        }),
    }
}

/// Narrow the map to entries not shadowed by `binders`, renaming binders that
/// would capture free names of the substituted expressions.
fn enter_binders(
    binders: &mut [Name],
    body: &Process,
    map: &BTreeMap<Name, Expr>,
    fresh: &mut FreshNames,
) -> Result<(Process, BTreeMap<Name, Expr>), SubstError> {
    let mut map: BTreeMap<Name, Expr> = map.clone();
    let mut body = body.clone();
    for b in binders.iter_mut() {
        map.remove(b);
        let captured = map.values().any(|e| {
            let mut names = BTreeSet::new();
            e.free_names(&mut names);
            names.contains(b)
        });
        if captured {
            let nb = fresh.fresh(b);
            let rename: BTreeMap<Name, Expr> =
                [(b.clone(), Expr::Var(nb.clone()))].into_iter().collect();
            body = subst_proc(&body, &rename, fresh)?;
            *b = nb;
        }
    }
    Ok((body, map))
}

fn subst_proc(
    p: &Process,
    map: &BTreeMap<Name, Expr>,
    fresh: &mut FreshNames,
) -> Result<Process, SubstError> {
    if map.is_empty() {
        return Ok(p.clone());
    }
    Ok(match p {
        Process::Nil => Process::Nil,
        Process::Par(l, r) => Process::par(subst_proc(l, map, fresh)?, subst_proc(r, map, fresh)?),
        Process::Input(a, params, body) => {
            let a = subst_chan(a, map)?;
            let mut params = params.clone();
            let (body, inner) = enter_binders(&mut params, body, map, fresh)?;
            Process::Input(a, params, Box::new(subst_proc(&body, &inner, fresh)?))
        }
        Process::ReplInput(a, params, body) => {
            let a = subst_chan(a, map)?;
            let mut params = params.clone();
            let (body, inner) = enter_binders(&mut params, body, map, fresh)?;
            Process::ReplInput(a, params, Box::new(subst_proc(&body, &inner, fresh)?))
        }
        Process::Output(a, args, body) => {
            let a = subst_chan(a, map)?;
            let args = args.iter().map(|e| subst_expr(e, map)).collect();
            Process::Output(a, args, Box::new(subst_proc(body, map, fresh)?))
        }
        Process::New(a, body) => {
            let mut binders = [a.clone()];
            let (body, inner) = enter_binders(&mut binders, body, map, fresh)?;
            let [a] = binders;
            Process::New(a, Box::new(subst_proc(&body, &inner, fresh)?))
        }
        Process::Tick(body) => Process::tick(subst_proc(body, map, fresh)?),
        Process::Annot(n, body) => Process::annot(*n, subst_proc(body, map, fresh)?),
        Process::Match(e, zero, x, succ) => {
            let e = subst_expr(e, map);
            let zero = subst_proc(zero, map, fresh)?;
            let mut binders = [x.clone()];
            let (succ, inner) = enter_binders(&mut binders, succ, map, fresh)?;
            let [x] = binders;
            Process::Match(
                e,
                Box::new(zero),
                x,
                Box::new(subst_proc(&succ, &inner, fresh)?),
            )
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::parse_process;
    use crate::registry::Registry;

    fn parse(src: &str) -> Process {
        parse_process(src, &Registry::standard()).unwrap()
    }

    #[test]
    fn renames_channels() {
        // (a?(x).b!(x))[b := c] leaves x untouched
        let p = parse("a?(x).b!(x)");
        let q = substitute(&p, &["b".into()], &[Expr::var("c")]).unwrap();
        assert_eq!(q, parse("a?(x).c!(x)"));
    }

    #[test]
    fn descends_into_expressions() {
        let p = parse("r!(mult(n,x))");
        let q = substitute(&p, &["x".into()], &[Expr::numeral(1)]).unwrap();
        assert_eq!(q, parse("r!(mult(n,s(0)))"));
    }

    #[test]
    fn channel_positions_reject_non_names() {
        let p = parse("a!(y)");
        // substituting a process-irrelevant expression for the channel a
        let err = substitute(&p, &["a".into()], &[Expr::numeral(1)]).unwrap_err();
        assert!(matches!(err, SubstError::IllFormedSubstitution { .. }));
        // but payload positions take any expression
        assert!(substitute(&p, &["y".into()], &[Expr::numeral(2)]).is_ok());
    }

    #[test]
    fn arity_mismatch() {
        let p = parse("a!(y)");
        let err = substitute(&p, &["y".into(), "z".into()], &[Expr::Zero]).unwrap_err();
        assert!(matches!(err, SubstError::ArityMismatch { .. }));
    }

    #[test]
    fn avoids_capture() {
        // (new b in c!(b))[c := b] must not capture the free b
        let p = parse("new b in c!(b)");
        let q = substitute(&p, &["c".into()], &[Expr::var("b")]).unwrap();
        if let Process::New(fresh_b, body) = &q {
            assert_ne!(fresh_b, "b");
            assert_eq!(**body, parse(&format!("b!({fresh_b})")));
        } else {
            panic!("expected New, got {q}");
        }
    }

    #[test]
    fn shadowed_params_stop_substitution() {
        let p = parse("a?(x).b!(x)");
        let q = substitute(&p, &["x".into()], &[Expr::numeral(3)]).unwrap();
        assert_eq!(q, p);
    }

    #[test]
    fn free_names_sees_through_binders() {
        let p = parse("new a in a?(x).b!(x,c)");
        let fv = free_names(&p);
        assert!(fv.contains("b") && fv.contains("c"));
        assert!(!fv.contains("a") && !fv.contains("x"));
    }
}
