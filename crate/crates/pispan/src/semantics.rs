//! Executable reduction semantics and the span oracle.
//!
//! Standard reduction cannot fire `tick`; the annotated relation fires
//! `tick.P => 1 : P`, keeps the maximum of the two annotations on a
//! communication, and retains replicated inputs. The oracle explores every
//! nondeterministic interleaving breadth-first over canonical forms, so the
//! reported span is the max over all schedules.

use std::collections::{BTreeSet, HashSet, VecDeque};
use thiserror::Error;

use crate::process::{canonicalize, embed, substitute, CanonicalForm, Process};
use crate::registry::Registry;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("expression has a free variable `{0}`")]
    OpenExpression(String),
    #[error("unknown function symbol `{0}`")]
    UnknownSymbol(String),
}

/// Ground semantics of a closed expression.
pub fn eval_expr(e: &crate::process::Expr, registry: &Registry) -> Result<u64, EvalError> {
    use crate::process::Expr;
    match e {
        Expr::Var(v) => Err(EvalError::OpenExpression(v.clone())),
        Expr::Zero => Ok(0),
        Expr::Succ(inner) => Ok(eval_expr(inner, registry)?.saturating_add(1)),
        Expr::FnApp(f, args) => {
            let spec = registry
                .get(f)
                .ok_or_else(|| EvalError::UnknownSymbol(f.clone()))?;
            let vals: Vec<u64> = args
                .iter()
                .map(|a| eval_expr(a, registry))
                .collect::<Result<_, _>>()?;
            Ok((spec.eval)(&vals))
        }
    }
}

/// Local complexity: the maximal annotation in the canonical form.
pub fn local_complexity(p: &Process) -> u64 {
    canonicalize(p).max_annotation()
}

/// All one-step successors under the annotated reduction, as canonical forms.
pub fn annotated_step(p: &Process, registry: &Registry) -> BTreeSet<CanonicalForm> {
    successors(&canonicalize(p), registry, true)
}

/// All one-step successors under standard reduction (`tick` cannot fire).
/// Callers must pass annotation-free processes.
pub fn standard_step(p: &Process, registry: &Registry) -> BTreeSet<CanonicalForm> {
    debug_assert!(
        !p.contains_annot(),
        "standard reduction is defined on unannotated processes"
    );
    successors(&canonicalize(p), registry, false)
}

fn successors(cf: &CanonicalForm, registry: &Registry, annotated: bool) -> BTreeSet<CanonicalForm> {
    let mut out = BTreeSet::new();
    let threads = &cf.threads;
    let mut push = |replaced: &[usize], added: Process| {
        let mut rest: Vec<(u64, Process)> = Vec::with_capacity(threads.len());
        for (k, t) in threads.iter().enumerate() {
            if !replaced.contains(&k) {
                rest.push(t.clone());
            }
        }
        let residue = CanonicalForm {
            binders: cf.binders,
            threads: rest,
        };
        let p = Process::par(added, embed(&residue));
        out.insert(canonicalize(&p));
    };

    for (i, (n, gi)) in threads.iter().enumerate() {
        // tick and match fire on their own
        match gi {
            Process::Tick(body) if annotated => {
                push(&[i], Process::annot(n + 1, (**body).clone()));
            }
            Process::Match(e, zero, x, succ) => {
                if let Ok(v) = eval_expr(e, registry) {
                    let next = if v == 0 {
                        (**zero).clone()
                    } else {
                        match substitute(
                            succ,
                            std::slice::from_ref(x),
                            &[crate::process::Expr::numeral(v - 1)],
                        ) {
                            Ok(q) => q,
                            Err(_) => continue,
                        }
                    };
                    push(&[i], Process::annot(*n, next));
                }
            }
            _ => {}
        }
        // communication
        for (j, (m, gj)) in threads.iter().enumerate() {
            if i == j {
                continue;
            }
            let (chan_in, params, body_in, repl) = match gi {
                Process::Input(a, xs, body) => (a, xs, body, false),
                Process::ReplInput(a, xs, body) => (a, xs, body, true),
                _ => continue,
            };
            let (chan_out, args, body_out) = match gj {
                Process::Output(b, es, body) => (b, es, body),
                _ => continue,
            };
            if chan_in != chan_out {
                continue;
            }
            let substituted = match substitute(body_in, params, args) {
                Ok(q) => q,
                Err(_) => continue, // ill-formed substitution: not a redex
            };
            let joined = Process::par(substituted, (**body_out).clone());
            let annot = if annotated { (*n).max(*m) } else { 0 };
            if repl {
                let kept = Process::annot(*n, gi.clone());
                push(&[i, j], Process::par(kept, Process::annot(annot, joined)));
            } else {
                push(&[i, j], Process::annot(annot, joined));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct SpanResult {
    pub span: u64,
    /// True iff the reachable state set was exhausted within the fuel;
    /// otherwise `span` is a valid lower bound.
    pub exact: bool,
    pub states_explored: usize,
}

/// Global parallel complexity by breadth-first exploration of all annotated
/// reductions, memoized on canonical forms.
pub fn global_span(p: &Process, fuel: usize, registry: &Registry) -> SpanResult {
    let start = canonicalize(p);
    let mut span = start.max_annotation();
    let mut visited: HashSet<CanonicalForm> = HashSet::new();
    let mut queue: VecDeque<CanonicalForm> = VecDeque::new();
    visited.insert(start.clone());
    queue.push_back(start);
    let mut exact = true;
    while let Some(cf) = queue.pop_front() {
        for next in successors(&cf, registry, true) {
            if visited.contains(&next) {
                continue;
            }
            if visited.len() >= fuel {
                exact = false;
                continue;
            }
            span = span.max(next.max_annotation());
            visited.insert(next.clone());
            queue.push_back(next);
        }
    }
    SpanResult {
        span,
        exact,
        states_explored: visited.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::parse_process;

    fn parse(src: &str) -> Process {
        parse_process(src, &Registry::standard()).unwrap()
    }

    fn reg() -> Registry {
        Registry::standard()
    }

    #[test]
    fn eval_expr_ground() {
        assert_eq!(
            eval_expr(&crate::process::Expr::numeral(2), &reg()).unwrap(),
            2
        );
        let e = crate::process::Expr::FnApp(
            "mult".into(),
            vec![
                crate::process::Expr::numeral(2),
                crate::process::Expr::numeral(3),
            ],
        );
        assert_eq!(eval_expr(&e, &reg()).unwrap(), 6);
        assert!(matches!(
            eval_expr(&crate::process::Expr::var("x"), &reg()),
            Err(EvalError::OpenExpression(_))
        ));
    }

    #[test]
    fn standard_communication() {
        let p = parse("a?().tick.0 | a!().b!()");
        let succs = standard_step(&p, &reg());
        assert_eq!(succs.len(), 1);
        let expected = canonicalize(&parse("tick.0 | b!()"));
        assert!(succs.contains(&expected));
    }

    #[test]
    fn standard_match_rules() {
        let p = parse("match 0 { 0 => a!() ; s(x) => b!(x) }");
        let succs = standard_step(&p, &reg());
        assert_eq!(succs, [canonicalize(&parse("a!()"))].into_iter().collect());
        let p = parse("match 2 { 0 => a!() ; s(x) => b!(x) }");
        let succs = standard_step(&p, &reg());
        assert_eq!(succs, [canonicalize(&parse("b!(1)"))].into_iter().collect());
    }

    #[test]
    fn standard_reduction_cannot_fire_tick() {
        assert!(standard_step(&parse("tick.0"), &reg()).is_empty());
    }

    #[test]
    fn annotated_tick_and_communication() {
        let succs = annotated_step(&parse("tick.a!()"), &reg());
        assert_eq!(
            succs,
            [canonicalize(&parse("1 : a!()"))].into_iter().collect()
        );
        // (n: a?().P) | (m: a!().Q) keeps max(m, n)
        let p = parse("2 : a?().c!() | 3 : a!().d!()");
        let succs = annotated_step(&p, &reg());
        assert_eq!(
            succs,
            [canonicalize(&parse("3 : (c!() | d!())"))]
                .into_iter()
                .collect()
        );
    }

    #[test]
    fn channel_passing_substitutes_names() {
        // mobility: the received name becomes the next subject
        let p = parse("a?(x).x!() | a!(b) | b?().tick.0");
        let r = global_span(&p, 1000, &reg());
        assert_eq!((r.span, r.exact), (1, true));
        // a non-name payload into a channel position is not a redex
        let stuck = parse("a?(x).x!() | a!(s(0))");
        assert!(annotated_step(&stuck, &reg()).is_empty());
    }

    #[test]
    fn unknown_symbols_fail_evaluation() {
        let e = crate::process::Expr::FnApp("frob".into(), vec![]);
        assert!(matches!(
            eval_expr(&e, &reg()),
            Err(EvalError::UnknownSymbol(_))
        ));
    }

    #[test]
    fn replicated_input_is_retained() {
        let p = parse("1 : !a?(x).b!(x) | a!(2)");
        let succs = annotated_step(&p, &reg());
        let expected = canonicalize(&parse("1 : !a?(x).b!(x) | 1 : b!(2)"));
        assert_eq!(succs, [expected].into_iter().collect());
    }

    #[test]
    fn local_complexity_examples() {
        assert_eq!(local_complexity(&parse("a?().tick.0")), 0);
        assert_eq!(local_complexity(&parse("3 : a!()")), 3);
        assert_eq!(local_complexity(&parse("1 : a!() | 2 : b!()")), 2);
    }

    #[test]
    fn semaphore_reduction_passes_through_paper_state() {
        // after the two tick steps the semaphore reaches
        // 1:(a?().tick.a!()) | 1:(a?().tick.a!()) | 0:a!()
        let p = parse("tick.a?().tick.a!() | tick.a?().tick.a!() | a!()");
        let mut frontier: BTreeSet<CanonicalForm> = annotated_step(&p, &reg());
        let mut next = BTreeSet::new();
        for cf in &frontier {
            next.extend(successors(cf, &reg(), true));
        }
        frontier = next;
        let expected = canonicalize(&parse("1 : a?().tick.a!() | 1 : a?().tick.a!() | 0 : a!()"));
        assert!(frontier.contains(&expected));
    }

    #[test]
    fn semaphore_span_is_exactly_three() {
        let p = parse("tick.a?().tick.a!() | tick.a?().tick.a!() | a!()");
        let r = global_span(&p, 100_000, &reg());
        assert_eq!((r.span, r.exact), (3, true));
    }

    #[test]
    fn nil_has_span_zero() {
        let r = global_span(&parse("0"), 10, &reg());
        assert_eq!((r.span, r.exact), (0, true));
    }

    #[test]
    fn motivating_example_span_equals_thread_count() {
        for n in 1..=4usize {
            let body = vec!["a?().tick.a!()"; n].join(" | ");
            let p = parse(&format!("{body} | a!()"));
            let r = global_span(&p, 100_000, &reg());
            assert_eq!((r.span, r.exact), (n as u64, true), "n = {n}");
        }
    }

    #[test]
    fn annotation_shifts_span() {
        let p = parse("tick.a?().tick.a!() | tick.a?().tick.a!() | a!()");
        let shifted = Process::annot(2, p.clone());
        let r0 = global_span(&p, 100_000, &reg());
        let r = global_span(&shifted, 100_000, &reg());
        assert!(r.exact && r0.exact);
        assert_eq!(r.span, r0.span + 2);
    }

    #[test]
    fn fuel_exhaustion_reports_inexact_lower_bound() {
        // a replicated ping-pong with a tick grows annotations forever
        let p = parse("!a?().tick.a!() | a!()");
        let r = global_span(&p, 50, &reg());
        assert!(!r.exact);
        assert!(r.span >= 1);
    }

    #[test]
    fn deadlock_has_span_zero() {
        let p = parse("new a in new b in (a?().tick.b!() | b?().tick.a!())");
        let r = global_span(&p, 1000, &reg());
        assert_eq!((r.span, r.exact), (0, true));
    }
}
