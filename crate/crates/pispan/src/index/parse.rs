//! Concrete syntax for indices, intervals, constraints and valuations:
//! `i`, `17`, `inf`, `I+J`, `I*J`, `I-J` (truncated), `max(I,J)`, `min(I,J)`,
//! `fact(I)`; intervals `[I,J]`; constraints `I <= J`, `I < J`, `I = J`,
//! `I != J` (with `>=`/`>` accepted and flipped).

use crate::lexer::{Cursor, SyntaxError, Tok};

use super::{Constraint, Index, Interval, Rel, Valuation};

pub fn parse_index(src: &str) -> Result<Index, SyntaxError> {
    let mut cur = Cursor::new(src)?;
    let idx = index(&mut cur)?;
    cur.expect_end()?;
    Ok(idx)
}

pub fn parse_interval(src: &str) -> Result<Interval, SyntaxError> {
    let mut cur = Cursor::new(src)?;
    let iv = interval(&mut cur)?;
    cur.expect_end()?;
    Ok(iv)
}

pub fn parse_constraint(src: &str) -> Result<Constraint, SyntaxError> {
    let mut cur = Cursor::new(src)?;
    let c = constraint(&mut cur)?;
    cur.expect_end()?;
    Ok(c)
}

/// Valuations as `i=3,j=0`; the empty string is the empty valuation.
pub fn parse_valuation(src: &str) -> Result<Valuation, SyntaxError> {
    let mut rho = Valuation::new();
    let mut cur = Cursor::new(src)?;
    if cur.peek().is_none() {
        return Ok(rho);
    }
    loop {
        let name = cur.expect_ident()?;
        cur.expect(&Tok::Eq)?;
        let val = cur.expect_int()?;
        rho.insert(name, val);
        if !cur.eat(&Tok::Comma) {
            break;
        }
    }
    cur.expect_end()?;
    Ok(rho)
}

pub(crate) fn index(cur: &mut Cursor) -> Result<Index, SyntaxError> {
    let mut acc = term(cur)?;
    loop {
        if cur.eat(&Tok::Plus) {
            let rhs = term(cur)?;
            acc = Index::add(acc, rhs);
        } else if cur.eat(&Tok::Minus) {
            let rhs = term(cur)?;
            acc = Index::sub(acc, rhs);
        } else {
            break;
        }
    }
    Ok(acc)
}

fn term(cur: &mut Cursor) -> Result<Index, SyntaxError> {
    let mut acc = factor(cur)?;
    while cur.eat(&Tok::Star) {
        let rhs = factor(cur)?;
        acc = Index::mul(acc, rhs);
    }
    Ok(acc)
}

fn factor(cur: &mut Cursor) -> Result<Index, SyntaxError> {
    match cur.peek() {
        Some(Tok::Int(_)) => Ok(Index::Const(cur.expect_int()?)),
        Some(Tok::LParen) => {
            cur.next();
            let inner = index(cur)?;
            cur.expect(&Tok::RParen)?;
            Ok(inner)
        }
        Some(Tok::Ident(name)) => {
            let name = name.clone();
            match name.as_str() {
                "inf" => {
                    cur.next();
                    Ok(Index::Infinity)
                }
                "max" | "min" => {
                    cur.next();
                    cur.expect(&Tok::LParen)?;
                    let a = index(cur)?;
                    cur.expect(&Tok::Comma)?;
                    let b = index(cur)?;
                    cur.expect(&Tok::RParen)?;
                    Ok(if name == "max" {
                        Index::max_of(a, b)
                    } else {
                        Index::min_of(a, b)
                    })
                }
                "fact" => {
                    cur.next();
                    cur.expect(&Tok::LParen)?;
                    let a = index(cur)?;
                    cur.expect(&Tok::RParen)?;
                    Ok(Index::fact(a))
                }
                _ => {
                    cur.next();
                    if cur.peek() == Some(&Tok::LParen) {
                        return Err(cur.error(format!("unknown index function `{name}`")));
                    }
                    Ok(Index::Var(name))
                }
            }
        }
        _ => Err(cur.error("expected an index")),
    }
}

pub(crate) fn interval(cur: &mut Cursor) -> Result<Interval, SyntaxError> {
    cur.expect(&Tok::LBracket)?;
    let lo = index(cur)?;
    cur.expect(&Tok::Comma)?;
    let hi = index(cur)?;
    cur.expect(&Tok::RBracket)?;
    Ok(Interval::new(lo, hi))
}

fn constraint(cur: &mut Cursor) -> Result<Constraint, SyntaxError> {
    let lhs = index(cur)?;
    let tok = cur.next().ok_or_else(|| cur.error("expected a relation"))?;
    let rhs = index(cur)?;
    Ok(match tok {
        Tok::Le => Constraint::new(lhs, Rel::Le, rhs),
        Tok::LAngle => Constraint::new(lhs, Rel::Lt, rhs),
        Tok::Eq => Constraint::new(lhs, Rel::Eq, rhs),
        Tok::Ne => Constraint::new(lhs, Rel::Ne, rhs),
        Tok::Ge => Constraint::new(rhs, Rel::Le, lhs),
        Tok::RAngle => Constraint::new(rhs, Rel::Lt, lhs),
        other => return Err(cur.error(format!("expected a relation, found `{other}`"))),
    })
}
