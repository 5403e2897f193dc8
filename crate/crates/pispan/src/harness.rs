//! The soundness harness: checks a derivation script, verifies reliability
//! of the context, and validates the typed bound against the span oracle at
//! a list of valuations.
//!
//! For each valuation, free names typed `Nat` in the context are replaced by
//! the numeral of their declared lower bound evaluated under the valuation,
//! the oracle explores the resulting closed process, and the observed span
//! `n` is checked against the typed interval `[I, J]`: `n <= J` always, and
//! `I <= n` additionally when the context contains no integer names (the
//! lower bound only holds for processes whose pattern matches can always
//! fire). An inexact oracle result downgrades the comparison to advisory.

use serde::Serialize;
use thiserror::Error;

use crate::deriv::{check_script, CheckError, Script};
use crate::index::{eval_index, IndexError, NatInf, Valuation};
use crate::process::{substitute, Process};
use crate::registry::Registry;
use crate::semantics::global_span;
use crate::types::{type_reliable, Type, TypeConfig};
use crate::usage::Reliability;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("script rejected: {0}")]
    ScriptRejected(#[from] CheckError),
    #[error("context entry `{name}` is not reliable: {reason}")]
    ContextNotReliable { name: String, reason: String },
    #[error("valuation {valuation:?} does not satisfy the constraint set")]
    ValuationOutsideConstraints { valuation: Valuation },
    #[error("valuation {valuation:?} misses index variable `{var}`")]
    IncompleteValuation { valuation: Valuation, var: String },
    #[error("index evaluation failed: {0}")]
    Index(#[from] IndexError),
    #[error("substituting sized names failed: {0}")]
    Subst(#[from] crate::process::SubstError),
}

#[derive(Debug, Clone, Serialize)]
pub struct SoundnessRow {
    pub valuation: Valuation,
    pub span: u64,
    pub exact: bool,
    pub states_explored: usize,
    pub bound_lo: String,
    pub bound_hi: String,
    pub upper_ok: bool,
    pub lower_checked: bool,
    pub lower_ok: bool,
    /// True when the row validates the bound; inexact oracle runs pass
    /// advisorily.
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SoundnessReport {
    pub schema: u32,
    pub complexity: String,
    pub rows: Vec<SoundnessRow>,
    /// True when every exact row validates its bound.
    pub pass: bool,
    /// True when some oracle run was cut short by fuel.
    pub advisory: bool,
}

/// Run the end-to-end soundness check.
pub fn run_soundness(
    process: &Process,
    script: &Script,
    registry: &Registry,
    valuations: &[Valuation],
    fuel: usize,
    cfg: &TypeConfig,
) -> Result<SoundnessReport, HarnessError> {
    let checked = check_script(script, process, registry, cfg)?;
    for (name, ty) in &script.context {
        match type_reliable(&script.vars, &script.constraints, ty, &cfg.usage) {
            Reliability::Reliable => {}
            Reliability::Unreliable { .. } => {
                return Err(HarnessError::ContextNotReliable {
                    name: name.clone(),
                    reason: "an Error is reachable in its usage".into(),
                })
            }
            Reliability::Unknown { reason } => {
                return Err(HarnessError::ContextNotReliable {
                    name: name.clone(),
                    reason,
                })
            }
        }
    }

    let nat_names: Vec<(&String, &crate::index::Interval)> = script
        .context
        .iter()
        .filter_map(|(n, t)| match t {
            Type::Nat(iv) => Some((n, iv)),
            _ => None,
        })
        .collect();
    let lower_checked = nat_names.is_empty();

    let mut rows = Vec::new();
    for rho in valuations {
        for var in &script.vars {
            if !rho.contains_key(var) {
                return Err(HarnessError::IncompleteValuation {
                    valuation: rho.clone(),
                    var: var.clone(),
                });
            }
        }
        for c in &script.constraints {
            if !c.holds(rho)? {
                return Err(HarnessError::ValuationOutsideConstraints {
                    valuation: rho.clone(),
                });
            }
        }
        let bound_lo = eval_index(&checked.complexity.lo, rho)?;
        let bound_hi = eval_index(&checked.complexity.hi, rho)?;
        // instantiate sized free names by the numerals of their lower bounds
        let mut p = process.clone();
        for (name, iv) in &nat_names {
            let value = match eval_index(&iv.lo, rho)? {
                NatInf::Fin(v) => v,
                NatInf::Inf => {
                    return Err(HarnessError::Index(IndexError::UnboundIndexVariable(
                        format!("size of `{name}` is infinite"),
                    )))
                }
            };
            p = substitute(
                &p,
                &[(*name).clone()],
                &[crate::process::Expr::numeral(value)],
            )?;
        }
        let result = global_span(&p, fuel, registry);
        let span = NatInf::Fin(result.span);
        let upper_ok = span.le(bound_hi);
        let lower_ok = !lower_checked || bound_lo.le(span);
        let pass = if result.exact {
            upper_ok && lower_ok
        } else {
            true
        };
        rows.push(SoundnessRow {
            valuation: rho.clone(),
            span: result.span,
            exact: result.exact,
            states_explored: result.states_explored,
            bound_lo: bound_lo.to_string(),
            bound_hi: bound_hi.to_string(),
            upper_ok,
            lower_checked,
            lower_ok,
            pass,
        });
    }
    let advisory = rows.iter().any(|r| !r.exact);
    let pass = rows.iter().all(|r| r.pass);
    Ok(SoundnessReport {
        schema: 1,
        complexity: checked.complexity.to_string(),
        rows,
        pass,
        advisory,
    })
}

/// Default valuations: the empty valuation for closed judgements, otherwise
/// every index variable ranging over `0..=3`.
pub fn default_valuations(vars: &crate::index::VarSet) -> Vec<Valuation> {
    if vars.is_empty() {
        return vec![Valuation::new()];
    }
    let vars: Vec<&String> = vars.iter().collect();
    let mut out = vec![Valuation::new()];
    for var in vars {
        let mut next = Vec::new();
        for base in &out {
            for v in 0..=3u64 {
                let mut rho = base.clone();
                rho.insert(var.clone(), v);
                next.push(rho);
            }
        }
        out = next;
    }
    out
}
