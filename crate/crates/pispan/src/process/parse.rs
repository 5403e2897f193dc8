//! Parser for the `.pi` process syntax:
//! `0`, `P | Q`, `a?(x,...).P`, `!a?(x,...).P`, `a!(e,...).P`,
//! `new a in P`, `tick.P`, `match e { 0 => P ; s(x) => Q }`, `n : P`.
//!
//! `new a in` scopes as far right as possible; `|` is right-associative;
//! continuations after `?`/`!`/`tick` may be omitted and default to `0`.
//! Integer literals are sugar for `s(...s(0))` chains. Free names are
//! allowed.

use crate::lexer::{Cursor, SyntaxError, Tok};
use crate::registry::Registry;

use super::{Expr, Name, Process};

const KEYWORDS: &[&str] = &["tick", "new", "in", "match", "s", "inf"];

pub fn parse_process(src: &str, registry: &Registry) -> Result<Process, SyntaxError> {
    let mut cur = Cursor::new(src)?;
    let p = process(&mut cur, registry)?;
    cur.expect_end()?;
    Ok(p)
}

fn ident(cur: &mut Cursor) -> Result<Name, SyntaxError> {
    let pos = cur.pos();
    let name = cur.expect_ident()?;
    if KEYWORDS.contains(&name.as_str()) {
        return Err(SyntaxError::new(
            pos,
            format!("`{name}` is a keyword, not a name"),
        ));
    }
    if !name.chars().next().is_some_and(|c| c.is_ascii_lowercase()) {
        return Err(SyntaxError::new(
            pos,
            format!("names start with a lowercase letter: `{name}`"),
        ));
    }
    Ok(name)
}

fn process(cur: &mut Cursor, reg: &Registry) -> Result<Process, SyntaxError> {
    let first = prefix(cur, reg)?;
    if cur.eat(&Tok::Bar) {
        let rest = process(cur, reg)?;
        Ok(Process::par(first, rest))
    } else {
        Ok(first)
    }
}

fn cont(cur: &mut Cursor, reg: &Registry) -> Result<Process, SyntaxError> {
    if cur.eat(&Tok::Dot) {
        prefix(cur, reg)
    } else {
        Ok(Process::Nil)
    }
}

fn prefix(cur: &mut Cursor, reg: &Registry) -> Result<Process, SyntaxError> {
    match cur.peek() {
        Some(Tok::Int(0)) if cur.peek2() != Some(&Tok::Colon) => {
            cur.next();
            Ok(Process::Nil)
        }
        Some(Tok::Int(_)) => {
            let n = cur.expect_int()?;
            cur.expect(&Tok::Colon)?;
            let p = prefix(cur, reg)?;
            Ok(Process::annot(n, p))
        }
        Some(Tok::LParen) => {
            cur.next();
            let p = process(cur, reg)?;
            cur.expect(&Tok::RParen)?;
            Ok(p)
        }
        Some(Tok::Bang) => {
            cur.next();
            let chan = ident(cur)?;
            cur.expect(&Tok::Question)?;
            let params = param_list(cur)?;
            let p = cont(cur, reg)?;
            Ok(Process::ReplInput(chan, params, Box::new(p)))
        }
        Some(Tok::Ident(name)) => match name.as_str() {
            "tick" => {
                cur.next();
                let p = cont(cur, reg)?;
                Ok(Process::tick(p))
            }
            "new" => {
                cur.next();
                let name = ident(cur)?;
                let kw = cur.expect_ident()?;
                if kw != "in" {
                    return Err(cur.error("expected `in` after `new <name>`"));
                }
                let p = process(cur, reg)?;
                Ok(Process::new_chan(name, p))
            }
            "match" => {
                cur.next();
                let e = expr(cur, reg)?;
                cur.expect(&Tok::LBrace)?;
                let pos = cur.pos();
                match cur.next() {
                    Some(Tok::Int(0)) => {}
                    _ => return Err(SyntaxError::new(pos, "expected `0` pattern")),
                }
                cur.expect(&Tok::Arrow)?;
                let zero = process(cur, reg)?;
                cur.expect(&Tok::Semi)?;
                let s = cur.expect_ident()?;
                if s != "s" {
                    return Err(cur.error("expected `s(x)` pattern"));
                }
                cur.expect(&Tok::LParen)?;
                let binder = ident(cur)?;
                cur.expect(&Tok::RParen)?;
                cur.expect(&Tok::Arrow)?;
                let succ = process(cur, reg)?;
                cur.expect(&Tok::RBrace)?;
                Ok(Process::Match(e, Box::new(zero), binder, Box::new(succ)))
            }
            _ => {
                let chan = ident(cur)?;
                match cur.next() {
                    Some(Tok::Question) => {
                        let params = param_list(cur)?;
                        let p = cont(cur, reg)?;
                        Ok(Process::Input(chan, params, Box::new(p)))
                    }
                    Some(Tok::Bang) => {
                        cur.expect(&Tok::LParen)?;
                        let mut args = Vec::new();
                        if cur.peek() != Some(&Tok::RParen) {
                            loop {
                                args.push(expr(cur, reg)?);
                                if !cur.eat(&Tok::Comma) {
                                    break;
                                }
                            }
                        }
                        cur.expect(&Tok::RParen)?;
                        let p = cont(cur, reg)?;
                        Ok(Process::Output(chan, args, Box::new(p)))
                    }
                    _ => Err(cur.error(format!("expected `?` or `!` after channel `{chan}`"))),
                }
            }
        },
        _ => Err(cur.error("expected a process")),
    }
}

fn param_list(cur: &mut Cursor) -> Result<Vec<Name>, SyntaxError> {
    cur.expect(&Tok::LParen)?;
    let mut params = Vec::new();
    if cur.peek() != Some(&Tok::RParen) {
        loop {
            params.push(ident(cur)?);
            if !cur.eat(&Tok::Comma) {
                break;
            }
        }
    }
    cur.expect(&Tok::RParen)?;
    Ok(params)
}

fn expr(cur: &mut Cursor, reg: &Registry) -> Result<Expr, SyntaxError> {
    match cur.peek() {
        Some(Tok::Int(_)) => Ok(Expr::numeral(cur.expect_int()?)),
        Some(Tok::Ident(name)) => {
            let name = name.clone();
            if name == "s" {
                cur.next();
                cur.expect(&Tok::LParen)?;
                let inner = expr(cur, reg)?;
                cur.expect(&Tok::RParen)?;
                return Ok(Expr::Succ(Box::new(inner)));
            }
            let pos = cur.pos();
            let name = ident(cur)?;
            if cur.peek() == Some(&Tok::LParen) {
                let spec = reg.get(&name).ok_or_else(|| {
                    SyntaxError::new(pos, format!("unknown function symbol `{name}`"))
                })?;
                let arity = spec.arity;
                cur.next();
                let mut args = Vec::new();
                if cur.peek() != Some(&Tok::RParen) {
                    loop {
                        args.push(expr(cur, reg)?);
                        if !cur.eat(&Tok::Comma) {
                            break;
                        }
                    }
                }
                cur.expect(&Tok::RParen)?;
                if args.len() != arity {
                    return Err(SyntaxError::new(
                        pos,
                        format!("`{name}` takes {arity} arguments, got {}", args.len()),
                    ));
                }
                Ok(Expr::FnApp(name, args))
            } else {
                Ok(Expr::Var(name))
            }
        }
        _ => Err(cur.error("expected an expression")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(src: &str) -> Process {
        parse_process(src, &Registry::standard()).unwrap()
    }

    #[test]
    fn single_productions() {
        assert_eq!(parse("tick.0"), Process::tick(Process::Nil));
        assert_eq!(parse("tick"), Process::tick(Process::Nil));
        assert_eq!(parse("0"), Process::Nil);
    }

    #[test]
    fn semaphore_ast() {
        let p = parse("tick.a?().tick.a!() | tick.a?().tick.a!() | a!()");
        let thread = Process::tick(Process::input(
            "a",
            vec![],
            Process::tick(Process::output("a", vec![], Process::Nil)),
        ));
        let out = Process::output("a", vec![], Process::Nil);
        assert_eq!(p, Process::par(thread.clone(), Process::par(thread, out)));
    }

    #[test]
    fn match_with_numeral_sugar() {
        let p = parse("match s(0) { 0 => 0 ; s(x) => tick.0 }");
        assert_eq!(
            p,
            Process::Match(
                Expr::Succ(Box::new(Expr::Zero)),
                Box::new(Process::Nil),
                "x".into(),
                Box::new(Process::tick(Process::Nil)),
            )
        );
        assert_eq!(parse("match 1 { 0 => 0 ; s(x) => tick.0 }"), p);
    }

    #[test]
    fn annotations_and_new() {
        let p = parse("2 : tick.0 | 0");
        assert_eq!(
            p,
            Process::par(Process::annot(2, Process::tick(Process::Nil)), Process::Nil)
        );
        let q = parse("new a in a?().0 | a!()");
        // new scopes over the whole parallel composition
        assert!(matches!(q, Process::New(_, _)));
    }

    #[test]
    fn registry_arity_is_checked() {
        let reg = Registry::standard();
        assert!(parse_process("r!(mult(n,x))", &reg).is_ok());
        assert!(parse_process("r!(mult(n))", &reg).is_err());
        assert!(parse_process("r!(frob(n))", &reg).is_err());
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse_process("tick.\n  ?", &Registry::standard()).unwrap_err();
        assert_eq!(err.pos.line, 2);
    }

    #[test]
    fn display_round_trips() {
        for src in [
            "tick.a?().tick.a!() | tick.a?().tick.a!() | a!()",
            "new a in new b in a?().tick.b!() | b?().tick.a!()",
            "!f?(n,r).match n { 0 => r!(0) ; s(m) => new rp in f!(m,rp) | rp?(x).tick.r!(mult(n,x)) }",
            "3 : a!(s(s(0)))",
            "(a?().0 | b!()) | c!(x,1)",
            "match mult(x,y) { 0 => tick.0 ; s(z) => z0!(z) }",
        ] {
            let p = parse(src);
            let printed = p.to_string();
            assert_eq!(parse(&printed), p, "round trip of `{src}` via `{printed}`");
        }
    }
}
