//! User-supplied typing derivations and their verification.
//!
//! A derivation script mirrors the process tree and records, at every rule
//! application, the choices the typing rules leave open: context splits at
//! parallel composition, payload/continuation splits at outputs, index
//! instantiations at server calls, the branch complexity at case, created
//! names' types, and subsumption targets. Delaying rules may declare their
//! premise context explicitly; this is required when the conclusion contains
//! infinite time annotations, where un-delaying has no unique inverse.

mod check;
mod parse;

pub use check::{check_expr, check_process, check_script, CheckError, Checked, CheckedNode};
pub use parse::parse_script;

use crate::index::{ConstraintSet, Index, Interval, VarSet};
use crate::types::{Context, Type};

#[derive(Debug, Clone)]
pub enum ExprRule {
    /// Variable lookup.
    Var,
    /// `0 : Nat[0,0]`.
    ZeroE,
    /// `s(e) : Nat[I+1, J+1]`.
    SuccE(Box<ExprRule>),
    /// Subsumption to the declared type.
    SubE(Box<Type>, Box<ExprRule>),
    /// Registry function application via its size schema.
    FnE(Vec<ExprRule>),
}

#[derive(Debug, Clone)]
pub enum ProcRule {
    Zero,
    Par {
        left: Context,
        right: Context,
        l: Box<ProcRule>,
        r: Box<ProcRule>,
    },
    Tick {
        premise: Option<Context>,
        body: Box<ProcRule>,
    },
    Annot {
        premise: Option<Context>,
        body: Box<ProcRule>,
    },
    Ich {
        /// Optional explicit premise for the delayed remainder (everything
        /// but the subject channel and the received parameters).
        premise: Option<Context>,
        body: Box<ProcRule>,
    },
    Och {
        payload: Context,
        cont: Context,
        args: Vec<ExprRule>,
        body: Box<ProcRule>,
    },
    Iserv {
        /// Optional explicit premise for the un-delayed, un-replicated
        /// remainder.
        premise: Option<Context>,
        body: Box<ProcRule>,
    },
    Oserv {
        inst: Vec<Index>,
        payload: Context,
        cont: Context,
        args: Vec<ExprRule>,
        body: Box<ProcRule>,
    },
    Case {
        complexity: Interval,
        scrutinee: ExprRule,
        zero: Box<ProcRule>,
        succ: Box<ProcRule>,
    },
    Nu {
        ty: Type,
        body: Box<ProcRule>,
    },
    Sub {
        target: Context,
        complexity: Interval,
        body: Box<ProcRule>,
    },
}

impl ProcRule {
    pub fn name(&self) -> &'static str {
        match self {
            ProcRule::Zero => "zero",
            ProcRule::Par { .. } => "par",
            ProcRule::Tick { .. } => "tick",
            ProcRule::Annot { .. } => "annot",
            ProcRule::Ich { .. } => "ich",
            ProcRule::Och { .. } => "och",
            ProcRule::Iserv { .. } => "iserv",
            ProcRule::Oserv { .. } => "oserv",
            ProcRule::Case { .. } => "case",
            ProcRule::Nu { .. } => "nu",
            ProcRule::Sub { .. } => "sub",
        }
    }
}

/// A complete derivation: the judgement's ambient data plus the rule tree.
#[derive(Debug, Clone)]
pub struct Script {
    pub vars: VarSet,
    pub constraints: ConstraintSet,
    pub context: Context,
    pub root: ProcRule,
}
