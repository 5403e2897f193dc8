//! The `.deriv` format: s-expression nodes `(rule :choices... children...)`.
//! Types, usages, indices, intervals and constraints appear as quoted
//! strings in their own concrete syntaxes.
//!
//! ```text
//! (deriv
//!   (vars i)
//!   (constraints "i >= 1")
//!   (context (f "Serv[i][0,i](Nat[i,i])/(!In[0,0]<inf>)"))
//!   (par (left (f "...")) (right (f "..."))
//!     (zero)
//!     (zero)))
//! ```

use crate::index::{parse_constraint, parse_index, parse_interval};
use crate::lexer::{Cursor, SyntaxError, Tok};
use crate::types::{parse_type, Context};

use super::{ExprRule, ProcRule, Script};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Sexp {
    Sym(String),
    Str(String),
    Int(u64),
    List(Vec<Sexp>),
}

impl Sexp {
    fn head(&self) -> Option<&str> {
        match self {
            Sexp::List(items) => match items.first() {
                Some(Sexp::Sym(s)) => Some(s),
                _ => None,
            },
            _ => None,
        }
    }

    fn items(&self) -> &[Sexp] {
        match self {
            Sexp::List(items) => items,
            _ => &[],
        }
    }
}

fn read_sexp(cur: &mut Cursor) -> Result<Sexp, SyntaxError> {
    match cur.next() {
        Some(Tok::LParen) => {
            let mut items = Vec::new();
            while cur.peek() != Some(&Tok::RParen) {
                if cur.peek().is_none() {
                    return Err(cur.error("unclosed `(`"));
                }
                items.push(read_sexp(cur)?);
            }
            cur.next();
            Ok(Sexp::List(items))
        }
        Some(Tok::Ident(s)) => Ok(Sexp::Sym(s)),
        Some(Tok::Str(s)) => Ok(Sexp::Str(s)),
        Some(Tok::Int(n)) => Ok(Sexp::Int(n)),
        Some(t) => Err(cur.error(format!("unexpected `{t}` in derivation script"))),
        None => Err(cur.error("expected an s-expression")),
    }
}

fn err(msg: impl Into<String>) -> SyntaxError {
    SyntaxError::new(crate::lexer::Pos { line: 0, col: 0 }, msg)
}

fn as_str(s: &Sexp, what: &str) -> Result<String, SyntaxError> {
    match s {
        Sexp::Str(v) => Ok(v.clone()),
        other => Err(err(format!("expected a string for {what}, got {other:?}"))),
    }
}

fn context_of(items: &[Sexp]) -> Result<Context, SyntaxError> {
    let mut ctx = Context::new();
    for entry in items {
        let parts = entry.items();
        if parts.len() != 2 {
            return Err(err("context entries are (name \"Type\")"));
        }
        let name = match &parts[0] {
            Sexp::Sym(s) => s.clone(),
            other => return Err(err(format!("expected a name, got {other:?}"))),
        };
        let ty = parse_type(&as_str(&parts[1], "a type")?)?;
        ctx.insert(name, ty);
    }
    Ok(ctx)
}

pub fn parse_script(src: &str) -> Result<Script, SyntaxError> {
    let mut cur = Cursor::new(src)?;
    let top = read_sexp(&mut cur)?;
    cur.expect_end()?;
    if top.head() != Some("deriv") {
        return Err(err("a derivation script starts with (deriv ...)"));
    }
    let mut vars = crate::index::VarSet::new();
    let mut constraints = Vec::new();
    let mut context = Context::new();
    let mut root = None;
    for item in &top.items()[1..] {
        match item.head() {
            Some("vars") => {
                for v in &item.items()[1..] {
                    match v {
                        Sexp::Sym(s) => {
                            vars.insert(s.clone());
                        }
                        other => return Err(err(format!("expected a variable, got {other:?}"))),
                    }
                }
            }
            Some("constraints") => {
                for c in &item.items()[1..] {
                    constraints.push(parse_constraint(&as_str(c, "a constraint")?)?);
                }
            }
            Some("context") => {
                context = context_of(&item.items()[1..])?;
            }
            _ => {
                if root.is_some() {
                    return Err(err("multiple rule trees in one script"));
                }
                root = Some(proc_rule(item)?);
            }
        }
    }
    let root = root.ok_or_else(|| err("script has no rule tree"))?;
    Ok(Script {
        vars,
        constraints,
        context,
        root,
    })
}

/// Split leading keyword-argument lists (those whose head is one of `keys`)
/// from the remaining child nodes.
fn split_kw<'a>(items: &'a [Sexp], keys: &[&str]) -> (Vec<(&'a str, &'a [Sexp])>, Vec<&'a Sexp>) {
    let mut kws = Vec::new();
    let mut rest = Vec::new();
    for item in items {
        match item.head() {
            Some(h) if keys.contains(&h) => {
                kws.push((h, &item.items()[1..]));
            }
            _ => rest.push(item),
        }
    }
    (kws.into_iter().collect(), rest)
}

fn one_child(rest: &[&Sexp], rule: &str) -> Result<Box<ProcRule>, SyntaxError> {
    match rest {
        [only] => Ok(Box::new(proc_rule(only)?)),
        _ => Err(err(format!(
            "({rule} ...) takes exactly one premise, got {}",
            rest.len()
        ))),
    }
}

fn proc_rule(s: &Sexp) -> Result<ProcRule, SyntaxError> {
    let head = s
        .head()
        .ok_or_else(|| err(format!("expected a rule node, got {s:?}")))?;
    let items = &s.items()[1..];
    match head {
        "zero" => {
            if !items.is_empty() {
                return Err(err("(zero) takes no arguments"));
            }
            Ok(ProcRule::Zero)
        }
        "par" => {
            let (kws, rest) = split_kw(items, &["left", "right"]);
            let mut left = None;
            let mut right = None;
            for (k, body) in kws {
                let ctx = context_of(body)?;
                match k {
                    "left" => left = Some(ctx),
                    _ => right = Some(ctx),
                }
            }
            let (left, right) = (
                left.ok_or_else(|| err("(par ...) needs (left ...)"))?,
                right.ok_or_else(|| err("(par ...) needs (right ...)"))?,
            );
            match rest.as_slice() {
                [l, r] => Ok(ProcRule::Par {
                    left,
                    right,
                    l: Box::new(proc_rule(l)?),
                    r: Box::new(proc_rule(r)?),
                }),
                _ => Err(err("(par ...) takes two premises")),
            }
        }
        "tick" | "annot" | "ich" | "iserv" => {
            let (kws, rest) = split_kw(items, &["premise"]);
            let premise = kws
                .into_iter()
                .find(|(k, _)| *k == "premise")
                .map(|(_, body)| context_of(body))
                .transpose()?;
            let body = one_child(&rest, head)?;
            Ok(match head {
                "tick" => ProcRule::Tick { premise, body },
                "annot" => ProcRule::Annot { premise, body },
                "ich" => ProcRule::Ich { premise, body },
                _ => ProcRule::Iserv { premise, body },
            })
        }
        "och" | "oserv" => {
            let (kws, rest) = split_kw(items, &["payload", "cont", "inst"]);
            let mut payload = Context::new();
            let mut cont = Context::new();
            let mut inst = Vec::new();
            for (k, body) in kws {
                match k {
                    "payload" => payload = context_of(body)?,
                    "cont" => cont = context_of(body)?,
                    _ => {
                        for ix in body {
                            inst.push(parse_index(&as_str(ix, "an index")?)?);
                        }
                    }
                }
            }
            let (args_s, body_s) = rest
                .split_last()
                .map(|(last, init)| (init, *last))
                .ok_or_else(|| err(format!("({head} ...) needs a continuation premise")))?;
            let args: Vec<ExprRule> = args_s
                .iter()
                .map(|a| expr_rule(a))
                .collect::<Result<_, _>>()?;
            let body = Box::new(proc_rule(body_s)?);
            Ok(if head == "och" {
                ProcRule::Och {
                    payload,
                    cont,
                    args,
                    body,
                }
            } else {
                ProcRule::Oserv {
                    inst,
                    payload,
                    cont,
                    args,
                    body,
                }
            })
        }
        "case" => match items {
            [k, scrut, zero, succ] => Ok(ProcRule::Case {
                complexity: parse_interval(&as_str(k, "the case complexity")?)?,
                scrutinee: expr_rule(scrut)?,
                zero: Box::new(proc_rule(zero)?),
                succ: Box::new(proc_rule(succ)?),
            }),
            _ => Err(err("(case \"K\" scrutinee zero-branch succ-branch)")),
        },
        "nu" => match items {
            [ty, body] => Ok(ProcRule::Nu {
                ty: parse_type(&as_str(ty, "the created name's type")?)?,
                body: Box::new(proc_rule(body)?),
            }),
            _ => Err(err("(nu \"Type\" premise)")),
        },
        "sub" => {
            let (kws, rest) = split_kw(items, &["ctx"]);
            let target = kws
                .into_iter()
                .find(|(k, _)| *k == "ctx")
                .map(|(_, body)| context_of(body))
                .transpose()?
                .ok_or_else(|| err("(sub ...) needs (ctx ...)"))?;
            match rest.as_slice() {
                [k, body] => Ok(ProcRule::Sub {
                    target,
                    complexity: parse_interval(&as_str(k, "the widened complexity")?)?,
                    body: Box::new(proc_rule(body)?),
                }),
                _ => Err(err("(sub (ctx ...) \"K\" premise)")),
            }
        }
        other => Err(err(format!("unknown rule `{other}`"))),
    }
}

fn expr_rule(s: &Sexp) -> Result<ExprRule, SyntaxError> {
    let head = s
        .head()
        .ok_or_else(|| err(format!("expected an expression rule, got {s:?}")))?;
    let items = &s.items()[1..];
    match head {
        "var" => Ok(ExprRule::Var),
        "zeroe" => Ok(ExprRule::ZeroE),
        "succe" => match items {
            [inner] => Ok(ExprRule::SuccE(Box::new(expr_rule(inner)?))),
            _ => Err(err("(succe premise)")),
        },
        "sube" => match items {
            [ty, inner] => Ok(ExprRule::SubE(
                Box::new(parse_type(&as_str(ty, "the subsumption target")?)?),
                Box::new(expr_rule(inner)?),
            )),
            _ => Err(err("(sube \"Type\" premise)")),
        },
        "fne" => Ok(ExprRule::FnE(
            items.iter().map(expr_rule).collect::<Result<_, _>>()?,
        )),
        other => Err(err(format!("unknown expression rule `{other}`"))),
    }
}
