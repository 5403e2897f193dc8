//! Parser for the `.usg` syntax: `0`, `U|V`, `U+V`, `!U`,
//! `In[lo,hi][clo,chi].U`, `In[lo,hi]<cap>.U` (plain upper-bound capacity),
//! and the `Out` forms. `|` binds loosest, then `+`, then prefixes; a
//! missing continuation is `0`.

use crate::index::parse::{index, interval};
use crate::lexer::{Cursor, SyntaxError, Tok};

use super::{Capacity, Polarity, Usage};

pub fn parse_usage(src: &str) -> Result<Usage, SyntaxError> {
    let mut cur = Cursor::new(src)?;
    let u = usage(&mut cur)?;
    cur.expect_end()?;
    Ok(u)
}

pub(crate) fn usage(cur: &mut Cursor) -> Result<Usage, SyntaxError> {
    let first = choice(cur)?;
    if cur.eat(&Tok::Bar) {
        let rest = usage(cur)?;
        Ok(Usage::par(first, rest))
    } else {
        Ok(first)
    }
}

fn choice(cur: &mut Cursor) -> Result<Usage, SyntaxError> {
    let first = prefix(cur)?;
    if cur.eat(&Tok::Plus) {
        let rest = choice(cur)?;
        Ok(Usage::choice(first, rest))
    } else {
        Ok(first)
    }
}

fn prefix(cur: &mut Cursor) -> Result<Usage, SyntaxError> {
    match cur.peek() {
        Some(Tok::Int(0)) => {
            cur.next();
            Ok(Usage::Zero)
        }
        Some(Tok::Bang) => {
            cur.next();
            let inner = prefix(cur)?;
            Ok(Usage::bang(inner))
        }
        Some(Tok::LParen) => {
            cur.next();
            let inner = usage(cur)?;
            cur.expect(&Tok::RParen)?;
            Ok(inner)
        }
        Some(Tok::Ident(name)) if name == "In" || name == "Out" => {
            let pol = if name == "In" {
                Polarity::In
            } else {
                Polarity::Out
            };
            cur.next();
            let o = interval(cur)?;
            let c = capacity(cur)?;
            let cont = if cur.eat(&Tok::Dot) {
                prefix(cur)?
            } else {
                Usage::Zero
            };
            Ok(Usage::Act(pol, o, c, Box::new(cont)))
        }
        _ => Err(cur.error("expected a usage")),
    }
}

pub(crate) fn capacity(cur: &mut Cursor) -> Result<Capacity, SyntaxError> {
    match cur.peek() {
        Some(Tok::LBracket) => Ok(Capacity::Interval(interval(cur)?)),
        Some(Tok::LAngle) => {
            cur.next();
            let j = index(cur)?;
            cur.expect(&Tok::RAngle)?;
            Ok(Capacity::UpperOnly(j))
        }
        _ => Err(cur.error("expected a capacity: `[lo,hi]` or `<bound>`")),
    }
}
