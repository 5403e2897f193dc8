//! Verification of derivation scripts against the typing rules.
//!
//! Checking is top-down: the conclusion context is threaded through the
//! tree, script nodes supply every choice the rules leave open, and each
//! node recomputes its premise contexts and verifies the rule's side
//! conditions through the entailment engine. Unknown side conditions fail
//! the check with a diagnostic; they never pass silently. Premise contexts
//! at delaying rules are recovered by truncated-subtraction inversion and
//! re-verified by delaying, or taken from the script when declared.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::index::{
    entails_all, simplify, Constraint, ConstraintSet, IdxVar, Index, Interval, Rel, VarSet, Verdict,
};
use crate::process::{Expr, Name, Process};
use crate::registry::Registry;
use crate::types::{
    bang_context, delay_context_cap, par_contexts, subtype, type_reliable, types_equal, Context,
    Type, TypeConfig,
};
use crate::usage::{
    delay, delay_by_capacity, norm, seq_complexity, Capacity, Polarity, Reliability, Usage,
};

use super::{ExprRule, ProcRule, Script};

#[derive(Debug, Error, Clone)]
pub enum CheckError {
    #[error("rule `{rule}` does not apply to `{found}`")]
    RuleMismatch { rule: &'static str, found: String },
    #[error("context mismatch at `{name}`: expected {expected}, got {got}")]
    ContextMismatch {
        name: Name,
        expected: String,
        got: String,
    },
    #[error("side condition could not be decided: {0}; consider a larger --index-bound")]
    SideConditionUnknown(String),
    #[error("side condition refuted: {0}")]
    SideConditionRefuted(String),
    #[error("unbound name `{0}`")]
    UnboundName(Name),
    #[error("arity mismatch: {0}")]
    ArityMismatch(String),
    #[error("script shape does not match the process: {0}")]
    ShapeMismatch(String),
    #[error(
        "type for `{name}` is not reliable: {diagnostic}; consider a larger --unfold or --fuel"
    )]
    UnreliableType { name: Name, diagnostic: String },
    #[error("expression type mismatch: expected {expected}, got {got}")]
    TypeMismatch { expected: String, got: String },
}

#[derive(Debug, Clone)]
pub struct CheckedNode {
    pub rule: &'static str,
    pub complexity: Interval,
    pub children: Vec<CheckedNode>,
}

impl CheckedNode {
    /// First node (preorder) checked by the named rule.
    pub fn find(&self, rule: &str) -> Option<&CheckedNode> {
        if self.rule == rule {
            return Some(self);
        }
        self.children.iter().find_map(|c| c.find(rule))
    }
}

#[derive(Debug, Clone)]
pub struct Checked {
    pub complexity: Interval,
    pub tree: CheckedNode,
}

struct Env<'a> {
    registry: &'a Registry,
    cfg: &'a TypeConfig,
}

/// Check a complete script against a process.
pub fn check_script(
    script: &Script,
    process: &Process,
    registry: &Registry,
    cfg: &TypeConfig,
) -> Result<Checked, CheckError> {
    let env = Env { registry, cfg };
    let tree = check(
        &env,
        &script.vars,
        &script.constraints,
        &script.context,
        process,
        &script.root,
    )?;
    Ok(Checked {
        complexity: tree.complexity.clone(),
        tree,
    })
}

/// Check one process judgement (exposed for tests).
pub fn check_process(
    phi: &VarSet,
    constraints: &ConstraintSet,
    ctx: &Context,
    process: &Process,
    rule: &ProcRule,
    registry: &Registry,
    cfg: &TypeConfig,
) -> Result<Checked, CheckError> {
    let env = Env { registry, cfg };
    let tree = check(&env, phi, constraints, ctx, process, rule)?;
    Ok(Checked {
        complexity: tree.complexity.clone(),
        tree,
    })
}

fn verdict_gate(v: Verdict, what: impl Fn() -> String) -> Result<(), CheckError> {
    match v {
        Verdict::Proven => Ok(()),
        Verdict::Refuted(w) => Err(CheckError::SideConditionRefuted(format!(
            "{} (counterexample {w:?})",
            what()
        ))),
        Verdict::Unknown => Err(CheckError::SideConditionUnknown(what())),
    }
}

fn intervals_entail_eq(
    phi: &VarSet,
    cs: &ConstraintSet,
    a: &Interval,
    b: &Interval,
    cfg: &TypeConfig,
    what: &str,
) -> Result<(), CheckError> {
    verdict_gate(entails_all(phi, cs, &a.equals(b), &cfg.entails), || {
        format!("{what}: {a} = {b}")
    })
}

fn zero_usage_like(t: &Type) -> Type {
    match t.usage() {
        None => t.clone(),
        Some(_) => t.with_usage(Usage::Zero),
    }
}

/// Pointwise equality of contexts, padding names missing on either side
/// with the zero usage of the other side's type.
fn ctx_equal(
    env: &Env,
    phi: &VarSet,
    cs: &ConstraintSet,
    got: &Context,
    expected: &Context,
) -> Result<(), CheckError> {
    let names: std::collections::BTreeSet<&Name> = got.keys().chain(expected.keys()).collect();
    for name in names {
        let g = got
            .get(name)
            .cloned()
            .or_else(|| expected.get(name).map(zero_usage_like));
        let e = expected
            .get(name)
            .cloned()
            .or_else(|| got.get(name).map(zero_usage_like));
        let (g, e) = (g.unwrap(), e.unwrap());
        if !types_equal(phi, cs, &g, &e, env.cfg) {
            return Err(CheckError::ContextMismatch {
                name: name.clone(),
                expected: e.to_string(),
                got: g.to_string(),
            });
        }
    }
    Ok(())
}

fn simplify_interval(phi: &VarSet, cs: &ConstraintSet, iv: &Interval) -> Interval {
    Interval::new(simplify(phi, cs, &iv.lo), simplify(phi, cs, &iv.hi))
}

fn simplify_usage(phi: &VarSet, cs: &ConstraintSet, u: &Usage) -> Usage {
    match u {
        Usage::Zero => Usage::Zero,
        Usage::Par(l, r) => Usage::par(simplify_usage(phi, cs, l), simplify_usage(phi, cs, r)),
        Usage::Choice(l, r) => {
            Usage::choice(simplify_usage(phi, cs, l), simplify_usage(phi, cs, r))
        }
        Usage::Bang(inner) => Usage::bang(simplify_usage(phi, cs, inner)),
        Usage::Act(p, o, c, cont) => {
            let c = match c {
                Capacity::UpperOnly(j) => Capacity::UpperOnly(simplify(phi, cs, j)),
                Capacity::Interval(iv) => Capacity::Interval(simplify_interval(phi, cs, iv)),
            };
            Usage::Act(
                *p,
                simplify_interval(phi, cs, o),
                c,
                Box::new(simplify_usage(phi, cs, cont)),
            )
        }
    }
}

fn simplify_type(phi: &VarSet, cs: &ConstraintSet, t: &Type) -> Type {
    match t {
        Type::Nat(iv) => Type::Nat(simplify_interval(phi, cs, iv)),
        Type::Chan(ts, u) => Type::Chan(
            ts.iter().map(|t| simplify_type(phi, cs, t)).collect(),
            simplify_usage(phi, cs, u),
        ),
        Type::Serv(is, k, ts, u) => Type::Serv(
            is.clone(),
            k.clone(),
            ts.clone(),
            simplify_usage(phi, cs, u),
        ),
    }
}

/// Shift every top-level obligation of a usage.
fn shift_tops(u: &Usage, f: &impl Fn(&Interval) -> Interval) -> Usage {
    match u {
        Usage::Zero => Usage::Zero,
        Usage::Par(l, r) => Usage::par(shift_tops(l, f), shift_tops(r, f)),
        Usage::Choice(l, r) => Usage::choice(shift_tops(l, f), shift_tops(r, f)),
        Usage::Bang(inner) => Usage::bang(shift_tops(inner, f)),
        Usage::Act(p, o, c, cont) => Usage::Act(*p, f(o), c.clone(), cont.clone()),
    }
}

enum DelayAmount<'a> {
    ByInterval(&'a Interval),
    ByCapacity(&'a Capacity),
}

impl DelayAmount<'_> {
    fn apply(&self, u: &Usage) -> Usage {
        match self {
            DelayAmount::ByInterval(iv) => delay(iv, u),
            DelayAmount::ByCapacity(c) => delay_by_capacity(c, u),
        }
    }

    fn invert(&self, iv: &Interval) -> Interval {
        match self {
            DelayAmount::ByInterval(d) => Interval::new(
                Index::sub(iv.lo.clone(), d.lo.clone()),
                Index::sub(iv.hi.clone(), d.hi.clone()),
            ),
            DelayAmount::ByCapacity(Capacity::UpperOnly(j)) => {
                Interval::new(iv.lo.clone(), Index::sub(iv.hi.clone(), j.clone()))
            }
            DelayAmount::ByCapacity(Capacity::Interval(d)) => Interval::new(
                Index::sub(iv.lo.clone(), d.lo.clone()),
                Index::sub(iv.hi.clone(), d.hi.clone()),
            ),
        }
    }

    fn describe(&self) -> String {
        match self {
            DelayAmount::ByInterval(iv) => iv.to_string(),
            DelayAmount::ByCapacity(c) => c.to_string(),
        }
    }
}

/// Recover the premise context of a delaying rule: use the declared premise
/// when present, otherwise invert by truncated subtraction; in both cases
/// verify that delaying the premise reproduces the conclusion.
fn un_delay_context(
    env: &Env,
    phi: &VarSet,
    cs: &ConstraintSet,
    conclusion: &Context,
    amount: DelayAmount<'_>,
    declared: Option<&Context>,
) -> Result<Context, CheckError> {
    let premise: Context = match declared {
        Some(d) => d.clone(),
        None => conclusion
            .iter()
            .map(|(name, t)| {
                let t = match t.usage() {
                    None => t.clone(),
                    Some(u) => t.with_usage(simplify_usage(
                        phi,
                        cs,
                        &shift_tops(u, &|iv| amount.invert(iv)),
                    )),
                };
                (name.clone(), t)
            })
            .collect(),
    };
    // verify: delaying the premise yields the conclusion
    let redelayed: Context = premise
        .iter()
        .map(|(name, t)| {
            let t = match t.usage() {
                None => t.clone(),
                Some(u) => t.with_usage(amount.apply(u)),
            };
            (name.clone(), t)
        })
        .collect();
    ctx_equal(env, phi, cs, &redelayed, conclusion).map_err(|e| match e {
        CheckError::ContextMismatch {
            name,
            expected,
            got,
        } => CheckError::ContextMismatch {
            name,
            expected,
            got: format!("{got} (premise does not re-delay by {})", amount.describe()),
        },
        other => other,
    })?;
    Ok(premise)
}

/// The subject's usage must be a single action atom of the given polarity.
fn single_action(
    usage: &Usage,
    pol: Polarity,
    banged: bool,
    rule: &'static str,
) -> Result<(Interval, Capacity, Usage), CheckError> {
    let atoms = crate::usage::norm_atoms_of(usage);
    if let [atom] = atoms.as_slice() {
        let inner = match (banged, atom) {
            (true, Usage::Bang(inner)) => &**inner,
            (false, a @ Usage::Act(..)) => a,
            _ => {
                return Err(CheckError::RuleMismatch {
                    rule,
                    found: usage.to_string(),
                });
            }
        };
        if let Usage::Act(p, o, c, cont) = inner {
            if *p == pol {
                return Ok((o.clone(), c.clone(), (**cont).clone()));
            }
        }
    }
    Err(CheckError::RuleMismatch {
        rule,
        found: usage.to_string(),
    })
}

fn obligation_is_now(
    phi: &VarSet,
    cs: &ConstraintSet,
    o: &Interval,
    cfg: &TypeConfig,
    rule: &str,
) -> Result<(), CheckError> {
    verdict_gate(
        entails_all(phi, cs, &o.equals(&Interval::zero()), &cfg.entails),
        || format!("{rule}: subject obligation {o} must be [0,0]"),
    )
}

fn check(
    env: &Env,
    phi: &VarSet,
    cs: &ConstraintSet,
    ctx: &Context,
    p: &Process,
    rule: &ProcRule,
) -> Result<CheckedNode, CheckError> {
    let node = |complexity: Interval, children: Vec<CheckedNode>| CheckedNode {
        rule: rule.name(),
        complexity,
        children,
    };
    match (rule, p) {
        (ProcRule::Zero, Process::Nil) => Ok(node(Interval::zero(), vec![])),
        (ProcRule::Par { left, right, l, r }, Process::Par(pl, pr)) => {
            let composed = par_contexts(left, right).map_err(|e| CheckError::ContextMismatch {
                name: match &e {
                    crate::types::TypeError::IncompatibleTypes { name, .. } => name.clone(),
                },
                expected: "composable split".into(),
                got: e.to_string(),
            })?;
            ctx_equal(env, phi, cs, &composed, ctx)?;
            let ln = check(env, phi, cs, left, pl, l)?;
            let rn = check(env, phi, cs, right, pr, r)?;
            let k = ln.complexity.lub(&rn.complexity);
            Ok(node(simplify_interval(phi, cs, &k), vec![ln, rn]))
        }
        (ProcRule::Tick { premise, body }, Process::Tick(pb)) => {
            let one = Interval::point(1);
            let prem = un_delay_context(
                env,
                phi,
                cs,
                ctx,
                DelayAmount::ByInterval(&one),
                premise.as_ref(),
            )?;
            let child = check(env, phi, cs, &prem, pb, body)?;
            let k = child.complexity.add(&one);
            Ok(node(simplify_interval(phi, cs, &k), vec![child]))
        }
        (ProcRule::Annot { premise, body }, Process::Annot(m, pb)) => {
            let mm = Interval::point(*m);
            let prem = un_delay_context(
                env,
                phi,
                cs,
                ctx,
                DelayAmount::ByInterval(&mm),
                premise.as_ref(),
            )?;
            let child = check(env, phi, cs, &prem, pb, body)?;
            let k = child.complexity.add(&mm);
            Ok(node(simplify_interval(phi, cs, &k), vec![child]))
        }
        (ProcRule::Ich { premise, body }, Process::Input(a, params, pb)) => {
            let ta = ctx
                .get(a)
                .ok_or_else(|| CheckError::UnboundName(a.clone()))?;
            let Type::Chan(payload_tys, w) = ta else {
                return Err(CheckError::RuleMismatch {
                    rule: "ich",
                    found: ta.to_string(),
                });
            };
            let (o, cap, cont_usage) = single_action(w, Polarity::In, false, "ich")?;
            obligation_is_now(phi, cs, &o, env.cfg, "ich")?;
            if params.len() != payload_tys.len() {
                return Err(CheckError::ArityMismatch(format!(
                    "input on `{a}` binds {} names but the channel carries {}",
                    params.len(),
                    payload_tys.len()
                )));
            }
            let mut rest = ctx.clone();
            rest.remove(a);
            let mut prem = un_delay_context(
                env,
                phi,
                cs,
                &rest,
                DelayAmount::ByCapacity(&cap),
                premise.as_ref(),
            )?;
            prem.insert(a.clone(), Type::Chan(payload_tys.clone(), cont_usage));
            for (x, t) in params.iter().zip(payload_tys) {
                if prem.contains_key(x) {
                    return Err(CheckError::ShapeMismatch(format!(
                        "parameter `{x}` shadows a context name; alpha-rename the process"
                    )));
                }
                prem.insert(x.clone(), t.clone());
            }
            let child = check(env, phi, cs, &prem, pb, body)?;
            let k = seq_complexity(&cap, &child.complexity);
            Ok(node(simplify_interval(phi, cs, &k), vec![child]))
        }
        (
            ProcRule::Och {
                payload,
                cont,
                args,
                body,
            },
            Process::Output(a, es, pb),
        ) => {
            let ta = ctx
                .get(a)
                .ok_or_else(|| CheckError::UnboundName(a.clone()))?;
            let Type::Chan(payload_tys, w) = ta else {
                return Err(CheckError::RuleMismatch {
                    rule: "och",
                    found: ta.to_string(),
                });
            };
            let (_, cap, _) = single_action(w, Polarity::Out, false, "och")?;
            let k = check_output(
                env,
                phi,
                cs,
                ctx,
                a,
                ta,
                &cap,
                payload_tys,
                es,
                payload,
                cont,
                args,
                pb,
                body,
                None,
            )?;
            Ok(node(k.0, k.1))
        }
        (ProcRule::Iserv { premise, body }, Process::ReplInput(a, params, pb)) => {
            let ta = ctx
                .get(a)
                .ok_or_else(|| CheckError::UnboundName(a.clone()))?;
            let Type::Serv(binders, kserv, payload_tys, w) = ta else {
                return Err(CheckError::RuleMismatch {
                    rule: "iserv",
                    found: ta.to_string(),
                });
            };
            let (o, cap, cont_usage) = single_action(w, Polarity::In, true, "iserv")?;
            obligation_is_now(phi, cs, &o, env.cfg, "iserv")?;
            if params.len() != payload_tys.len() {
                return Err(CheckError::ArityMismatch(format!(
                    "server input on `{a}` binds {} names but the server carries {}",
                    params.len(),
                    payload_tys.len()
                )));
            }
            let mut rest = ctx.clone();
            rest.remove(a);
            // conclusion rest = delay_cap(cap, !Gamma)
            let gamma: Context = match premise {
                Some(d) => d.clone(),
                None => {
                    let undelayed =
                        un_delay_context(env, phi, cs, &rest, DelayAmount::ByCapacity(&cap), None)?;
                    un_bang_context(&undelayed)?
                }
            };
            let redone = delay_context_cap(&cap, &bang_context(&gamma));
            ctx_equal(env, phi, cs, &redone, &rest)?;
            // extend the index variables with the server's binders
            let mut inner_phi = phi.clone();
            for i in binders {
                if !inner_phi.insert(i.clone()) {
                    return Err(CheckError::ShapeMismatch(format!(
                        "server binder `{i}` shadows an ambient index variable"
                    )));
                }
            }
            let mut cs_vars = VarSet::new();
            for c in cs {
                c.free_vars(&mut cs_vars);
            }
            if binders.iter().any(|i| cs_vars.contains(i)) {
                return Err(CheckError::ShapeMismatch(
                    "ambient constraints mention a server binder".into(),
                ));
            }
            let mut prem = gamma;
            prem.insert(
                a.clone(),
                Type::Serv(
                    binders.clone(),
                    kserv.clone(),
                    payload_tys.clone(),
                    cont_usage,
                ),
            );
            for (x, t) in params.iter().zip(payload_tys) {
                if prem.contains_key(x) {
                    return Err(CheckError::ShapeMismatch(format!(
                        "parameter `{x}` shadows a context name; alpha-rename the process"
                    )));
                }
                prem.insert(x.clone(), t.clone());
            }
            let child = check(env, &inner_phi, cs, &prem, pb, body)?;
            intervals_entail_eq(
                &inner_phi,
                cs,
                &child.complexity,
                kserv,
                env.cfg,
                "iserv premise complexity must equal the server complexity",
            )?;
            Ok(node(Interval::zero(), vec![child]))
        }
        (
            ProcRule::Oserv {
                inst,
                payload,
                cont,
                args,
                body,
            },
            Process::Output(a, es, pb),
        ) => {
            let ta = ctx
                .get(a)
                .ok_or_else(|| CheckError::UnboundName(a.clone()))?;
            let Type::Serv(binders, kserv, payload_tys, w) = ta else {
                return Err(CheckError::RuleMismatch {
                    rule: "oserv",
                    found: ta.to_string(),
                });
            };
            let (_, cap, _) = single_action(w, Polarity::Out, false, "oserv")?;
            if inst.len() != binders.len() {
                return Err(CheckError::ArityMismatch(format!(
                    "server `{a}` has {} index binders, instantiation gives {}",
                    binders.len(),
                    inst.len()
                )));
            }
            let map: BTreeMap<IdxVar, Index> =
                binders.iter().cloned().zip(inst.iter().cloned()).collect();
            let inst_payload: Vec<Type> = payload_tys
                .iter()
                .map(|t| simplify_type(phi, cs, &t.subst_many(&map)))
                .collect();
            let kinst = simplify_interval(phi, cs, &kserv.subst_many(&map));
            let k = check_output(
                env,
                phi,
                cs,
                ctx,
                a,
                ta,
                &cap,
                &inst_payload,
                es,
                payload,
                cont,
                args,
                pb,
                body,
                Some(&kinst),
            )?;
            Ok(node(k.0, k.1))
        }
        (
            ProcRule::Case {
                complexity,
                scrutinee,
                zero,
                succ,
            },
            Process::Match(e, pz, x, ps),
        ) => {
            let te = check_expr_in(env, phi, cs, ctx, e, scrutinee)?;
            let Type::Nat(bounds) = te else {
                return Err(CheckError::RuleMismatch {
                    rule: "case",
                    found: te.to_string(),
                });
            };
            // zero branch under I <= 0
            let mut cs0 = cs.clone();
            cs0.push(Constraint::new(bounds.lo.clone(), Rel::Le, Index::Const(0)));
            let zn = check(env, phi, &cs0, ctx, pz, zero)?;
            intervals_entail_eq(
                phi,
                &cs0,
                &zn.complexity,
                complexity,
                env.cfg,
                "case zero branch must return the declared complexity",
            )?;
            // successor branch under J >= 1 with x : Nat[I-1, J-1]
            let mut cs1 = cs.clone();
            cs1.push(Constraint::new(Index::Const(1), Rel::Le, bounds.hi.clone()));
            if ctx.contains_key(x) {
                return Err(CheckError::ShapeMismatch(format!(
                    "match binder `{x}` shadows a context name; alpha-rename the process"
                )));
            }
            let shifted = Interval::new(
                simplify(phi, &cs1, &Index::sub(bounds.lo.clone(), Index::Const(1))),
                simplify(phi, &cs1, &Index::sub(bounds.hi.clone(), Index::Const(1))),
            );
            let mut ctx1 = ctx.clone();
            ctx1.insert(x.clone(), Type::Nat(shifted));
            let sn = check(env, phi, &cs1, &ctx1, ps, succ)?;
            intervals_entail_eq(
                phi,
                &cs1,
                &sn.complexity,
                complexity,
                env.cfg,
                "case successor branch must return the declared complexity",
            )?;
            Ok(node(complexity.clone(), vec![zn, sn]))
        }
        (ProcRule::Nu { ty, body }, Process::New(a, pb)) => {
            if ctx.contains_key(a) {
                return Err(CheckError::ShapeMismatch(format!(
                    "created name `{a}` shadows a context name; alpha-rename the process"
                )));
            }
            match type_reliable(phi, cs, ty, &env.cfg.usage) {
                Reliability::Reliable => {}
                Reliability::Unreliable { trace } => {
                    return Err(CheckError::UnreliableType {
                        name: a.clone(),
                        diagnostic: format!(
                            "error reachable after {} step(s) from {}",
                            trace.len().saturating_sub(1),
                            trace.first().map(|u| u.to_string()).unwrap_or_default()
                        ),
                    });
                }
                Reliability::Unknown { reason } => {
                    return Err(CheckError::SideConditionUnknown(format!(
                        "reliability of `{a}`: {reason}"
                    )));
                }
            }
            let mut prem = ctx.clone();
            prem.insert(a.clone(), ty.clone());
            let child = check(env, phi, cs, &prem, pb, body)?;
            let k = child.complexity.clone();
            Ok(node(k, vec![child]))
        }
        (
            ProcRule::Sub {
                target,
                complexity,
                body,
            },
            _,
        ) => {
            // Gamma <= Delta pointwise, padding missing names with zero usage
            let names: std::collections::BTreeSet<&Name> =
                ctx.keys().chain(target.keys()).collect();
            for name in names {
                let g = ctx
                    .get(name)
                    .cloned()
                    .or_else(|| target.get(name).map(zero_usage_like));
                let d = target
                    .get(name)
                    .cloned()
                    .or_else(|| ctx.get(name).map(zero_usage_like));
                let (g, d) = (g.unwrap(), d.unwrap());
                verdict_gate(subtype(phi, cs, &g, &d, env.cfg), || {
                    format!("sub: {name} : {g} <= {d}")
                })?;
            }
            let child = check(env, phi, cs, target, p, body)?;
            verdict_gate(
                entails_all(
                    phi,
                    cs,
                    &child.complexity.included_in(complexity),
                    &env.cfg.entails,
                ),
                || format!("sub: {} within {}", child.complexity, complexity),
            )?;
            Ok(node(complexity.clone(), vec![child]))
        }
        (rule, p) => Err(CheckError::RuleMismatch {
            rule: rule.name(),
            found: p.to_string(),
        }),
    }
}

/// Common checking for (och) and (oserv).
#[allow(clippy::too_many_arguments)]
fn check_output(
    env: &Env,
    phi: &VarSet,
    cs: &ConstraintSet,
    ctx: &Context,
    a: &Name,
    ta: &Type,
    cap: &Capacity,
    payload_tys: &[Type],
    es: &[Expr],
    payload_ctx: &Context,
    cont_ctx: &Context,
    args: &[ExprRule],
    pb: &Process,
    body: &ProcRule,
    server_k: Option<&Interval>,
) -> Result<(Interval, Vec<CheckedNode>), CheckError> {
    if es.len() != payload_tys.len() {
        return Err(CheckError::ArityMismatch(format!(
            "output on `{a}` sends {} values but the channel carries {}",
            es.len(),
            payload_tys.len()
        )));
    }
    if args.len() != es.len() {
        return Err(CheckError::ShapeMismatch(format!(
            "output on `{a}` has {} payload derivations for {} expressions",
            args.len(),
            es.len()
        )));
    }
    let composed =
        par_contexts(payload_ctx, cont_ctx).map_err(|e| CheckError::ContextMismatch {
            name: match &e {
                crate::types::TypeError::IncompatibleTypes { name, .. } => name.clone(),
            },
            expected: "composable payload/continuation split".into(),
            got: e.to_string(),
        })?;
    // expected conclusion: everything but the subject delayed by the
    // capacity; the subject's usage becomes Out[0,0]cap.(V | U)
    let mut expected: Context = composed
        .iter()
        .filter(|(n, _)| *n != a)
        .map(|(n, t)| (n.clone(), crate::types::delay_type_cap(cap, t)))
        .collect();
    let split_usage = composed
        .get(a)
        .and_then(|t| t.usage().cloned())
        .unwrap_or(Usage::Zero);
    expected.insert(
        a.clone(),
        ta.with_usage(norm(&Usage::Act(
            Polarity::Out,
            Interval::zero(),
            cap.clone(),
            Box::new(split_usage),
        ))),
    );
    ctx_equal(env, phi, cs, ctx, &expected)?;
    // payload expressions
    let mut children = Vec::new();
    for ((e, r), want) in es.iter().zip(args).zip(payload_tys) {
        let got = check_expr_in(env, phi, cs, payload_ctx, e, r)?;
        if !types_equal(phi, cs, &got, want, env.cfg) {
            return Err(CheckError::TypeMismatch {
                expected: want.to_string(),
                got: got.to_string(),
            });
        }
    }
    let child = check(env, phi, cs, cont_ctx, pb, body)?;
    let mut k = child.complexity.clone();
    if let Some(kserv) = server_k {
        k = k.lub(kserv);
    }
    children.push(child);
    let k = simplify_interval(phi, cs, &seq_complexity(cap, &k));
    Ok((k, children))
}

fn un_bang_context(ctx: &Context) -> Result<Context, CheckError> {
    let mut out = Context::new();
    for (name, t) in ctx {
        let t = match t.usage() {
            None => t.clone(),
            Some(u) => {
                let atoms = crate::usage::norm_atoms_of(u);
                let mut inners = Vec::new();
                for atom in atoms {
                    match atom {
                        Usage::Bang(inner) => inners.push(*inner),
                        other => {
                            return Err(CheckError::ContextMismatch {
                                name: name.clone(),
                                expected: "a replicated (!) usage".into(),
                                got: other.to_string(),
                            });
                        }
                    }
                }
                t.with_usage(crate::usage::rebuild_atoms(inners))
            }
        };
        out.insert(name.clone(), t);
    }
    Ok(out)
}

fn check_expr_in(
    env: &Env,
    phi: &VarSet,
    cs: &ConstraintSet,
    ctx: &Context,
    e: &Expr,
    rule: &ExprRule,
) -> Result<Type, CheckError> {
    match (rule, e) {
        (ExprRule::Var, Expr::Var(x)) => ctx
            .get(x)
            .cloned()
            .ok_or_else(|| CheckError::UnboundName(x.clone())),
        (ExprRule::ZeroE, Expr::Zero) => Ok(Type::Nat(Interval::zero())),
        (ExprRule::SuccE(inner), Expr::Succ(e)) => {
            let t = check_expr_in(env, phi, cs, ctx, e, inner)?;
            match t {
                Type::Nat(iv) => Ok(Type::Nat(Interval::new(
                    simplify(phi, cs, &Index::add(iv.lo, Index::Const(1))),
                    simplify(phi, cs, &Index::add(iv.hi, Index::Const(1))),
                ))),
                other => Err(CheckError::RuleMismatch {
                    rule: "succe",
                    found: other.to_string(),
                }),
            }
        }
        (ExprRule::SubE(target, inner), e) => {
            let t = check_expr_in(env, phi, cs, ctx, e, inner)?;
            verdict_gate(subtype(phi, cs, &t, target, env.cfg), || {
                format!("sube: {t} <= {target}")
            })?;
            Ok((**target).clone())
        }
        (ExprRule::FnE(inners), Expr::FnApp(f, es)) => {
            let spec = env
                .registry
                .get(f)
                .ok_or_else(|| CheckError::ShapeMismatch(format!("unknown function `{f}`")))?;
            if inners.len() != es.len() || es.len() != spec.arity {
                return Err(CheckError::ArityMismatch(format!(
                    "`{f}` takes {} arguments",
                    spec.arity
                )));
            }
            let mut bounds = Vec::new();
            for (e, r) in es.iter().zip(inners) {
                match check_expr_in(env, phi, cs, ctx, e, r)? {
                    Type::Nat(iv) => bounds.push(iv),
                    other => {
                        return Err(CheckError::RuleMismatch {
                            rule: "fne",
                            found: other.to_string(),
                        })
                    }
                }
            }
            let out = (spec.size_schema)(&bounds);
            Ok(Type::Nat(simplify_interval(phi, cs, &out)))
        }
        (rule, e) => Err(CheckError::RuleMismatch {
            rule: match rule {
                ExprRule::Var => "var",
                ExprRule::ZeroE => "zeroe",
                ExprRule::SuccE(_) => "succe",
                ExprRule::SubE(..) => "sube",
                ExprRule::FnE(_) => "fne",
            },
            found: e.to_string(),
        }),
    }
}

/// Check a single expression judgement (exposed for tests).
pub fn check_expr(
    phi: &VarSet,
    cs: &ConstraintSet,
    ctx: &Context,
    e: &Expr,
    rule: &ExprRule,
    registry: &Registry,
    cfg: &TypeConfig,
) -> Result<Type, CheckError> {
    let env = Env { registry, cfg };
    check_expr_in(&env, phi, cs, ctx, e, rule)
}
