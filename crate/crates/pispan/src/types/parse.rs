//! Parser for the type syntax used in derivation files:
//! `Nat[I,J]`, `Ch(T,...)/U`, `Serv[i,...][K1,K2](T,...)/U`. The usage after
//! `/` parses at prefix precedence, so composite usages take parentheses.

use crate::index::parse::interval;
use crate::lexer::{Cursor, SyntaxError, Tok};
use crate::process::Name;
use crate::usage::Usage;

use super::Type;

pub fn parse_type(src: &str) -> Result<Type, SyntaxError> {
    let mut cur = Cursor::new(src)?;
    let t = ty(&mut cur)?;
    cur.expect_end()?;
    Ok(t)
}

/// Parse `name : Type` (used by CLI helpers and tests).
pub fn parse_context_entry(src: &str) -> Result<(Name, Type), SyntaxError> {
    let mut cur = Cursor::new(src)?;
    let name = cur.expect_ident()?;
    cur.expect(&Tok::Colon)?;
    let t = ty(&mut cur)?;
    cur.expect_end()?;
    Ok((name, t))
}

pub(crate) fn ty(cur: &mut Cursor) -> Result<Type, SyntaxError> {
    match cur.peek() {
        Some(Tok::Ident(name)) if name == "Nat" => {
            cur.next();
            Ok(Type::Nat(interval(cur)?))
        }
        Some(Tok::Ident(name)) if name == "Ch" => {
            cur.next();
            let payload = payload(cur)?;
            let u = usage_suffix(cur)?;
            Ok(Type::Chan(payload, u))
        }
        Some(Tok::Ident(name)) if name == "Serv" => {
            cur.next();
            cur.expect(&Tok::LBracket)?;
            let mut binders = Vec::new();
            if cur.peek() != Some(&Tok::RBracket) {
                loop {
                    binders.push(cur.expect_ident()?);
                    if !cur.eat(&Tok::Comma) {
                        break;
                    }
                }
            }
            cur.expect(&Tok::RBracket)?;
            let k = interval(cur)?;
            let payload = payload(cur)?;
            let u = usage_suffix(cur)?;
            Ok(Type::Serv(binders, k, payload, u))
        }
        _ => Err(cur.error("expected a type: Nat[..], Ch(..)/U or Serv[..][..](..)/U")),
    }
}

fn payload(cur: &mut Cursor) -> Result<Vec<Type>, SyntaxError> {
    cur.expect(&Tok::LParen)?;
    let mut out = Vec::new();
    if cur.peek() != Some(&Tok::RParen) {
        loop {
            out.push(ty(cur)?);
            if !cur.eat(&Tok::Comma) {
                break;
            }
        }
    }
    cur.expect(&Tok::RParen)?;
    Ok(out)
}

fn usage_suffix(cur: &mut Cursor) -> Result<Usage, SyntaxError> {
    cur.expect(&Tok::Slash)?;
    if cur.eat(&Tok::LParen) {
        let u = crate::usage::parse::usage(cur)?;
        cur.expect(&Tok::RParen)?;
        Ok(u)
    } else {
        usage_prefix(cur)
    }
}

fn usage_prefix(cur: &mut Cursor) -> Result<Usage, SyntaxError> {
    match cur.peek() {
        Some(Tok::Int(0)) => {
            cur.next();
            Ok(Usage::Zero)
        }
        Some(Tok::Bang) => {
            cur.next();
            let inner = usage_prefix(cur)?;
            Ok(Usage::bang(inner))
        }
        Some(Tok::Ident(name)) if name == "In" || name == "Out" => {
            let pol = if name == "In" {
                crate::usage::Polarity::In
            } else {
                crate::usage::Polarity::Out
            };
            cur.next();
            let o = interval(cur)?;
            let c = crate::usage::parse::capacity(cur)?;
            let cont = if cur.eat(&Tok::Dot) {
                usage_prefix(cur)?
            } else {
                Usage::Zero
            };
            Ok(Usage::Act(pol, o, c, Box::new(cont)))
        }
        _ => Err(cur.error("expected a usage after `/` (parenthesize compound usages)")),
    }
}
