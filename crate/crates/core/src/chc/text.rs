//! Reader for the clause language (`head :- c1, ..., atom1, ... .`).

use super::clause::{Atom, ClauseSet, Head, HornClause, Term};
use super::linear::{Conjunct, LinExpr, LinearConstraint, Rel, Var};
use super::ChcError;
use crate::syntax::{Cursor, SyntaxError, Tok};

pub fn parse_clauses(src: &str) -> Result<ClauseSet, ChcError> {
    let mut cur = Cursor::new(src)?;
    let mut clauses = Vec::new();
    while !cur.at_end() {
        clauses.push(clause(&mut cur)?);
    }
    ClauseSet::new(clauses)
}

pub fn parse_clause(src: &str) -> Result<HornClause, ChcError> {
    let mut cur = Cursor::new(src)?;
    let c = clause(&mut cur)?;
    if !cur.at_end() {
        return Err(cur.error("trailing input after clause").into());
    }
    Ok(c)
}

/// Parses a single conjunct such as `A-B=<0` or `E=A+B`.
pub fn parse_conjunct(src: &str) -> Result<Conjunct, ChcError> {
    let mut cur = Cursor::new(src)?;
    let c = conjunct(&mut cur)?;
    if !cur.at_end() {
        return Err(cur.error("trailing input after constraint").into());
    }
    Ok(c)
}

pub(crate) fn clause(cur: &mut Cursor) -> Result<HornClause, SyntaxError> {
    let (name, _) = cur.symbol()?;
    let head = if name == "false" {
        Head::False
    } else {
        Head::Pred(atom_rest(cur, name)?)
    };
    let mut constraint = LinearConstraint::truth();
    let mut body = Vec::new();
    if cur.eat(&Tok::Neck) {
        loop {
            body_literal(cur, &mut constraint, &mut body)?;
            if !cur.eat(&Tok::Comma) {
                break;
            }
        }
    }
    cur.expect(&Tok::Dot)?;
    Ok(HornClause::new(head, constraint, body))
}

fn body_literal(
    cur: &mut Cursor,
    constraint: &mut LinearConstraint,
    body: &mut Vec<Atom>,
) -> Result<(), SyntaxError> {
    match (cur.peek(), cur.peek2()) {
        (Some(Tok::Symbol(s)), _) if s == "true" => {
            cur.next();
            Ok(())
        }
        (Some(Tok::Symbol(s)), _) if s == "false" => {
            cur.next();
            *constraint = constraint.and(&LinearConstraint::falsum());
            Ok(())
        }
        (Some(Tok::Symbol(_)), _) => {
            let (name, _) = cur.symbol()?;
            body.push(atom_rest(cur, name)?);
            Ok(())
        }
        _ => {
            constraint.push(conjunct(cur)?);
            Ok(())
        }
    }
}

pub(crate) fn atom_rest(cur: &mut Cursor, pred: String) -> Result<Atom, SyntaxError> {
    let mut args = Vec::new();
    if cur.eat(&Tok::LParen) {
        loop {
            args.push(term(cur)?);
            if !cur.eat(&Tok::Comma) {
                break;
            }
        }
        cur.expect(&Tok::RParen)?;
    }
    Ok(Atom::new(pred, args))
}

fn term(cur: &mut Cursor) -> Result<Term, SyntaxError> {
    match cur.peek() {
        Some(Tok::Variable(_)) => Ok(Term::Var(Var(cur.variable()?.0))),
        Some(Tok::Int(_)) | Some(Tok::Minus) => Ok(Term::Int(cur.int()?.0)),
        Some(Tok::Symbol(s)) => {
            let s = s.clone();
            Err(cur.error(format!(
                "structured or symbolic term `{s}` is not allowed here"
            )))
        }
        _ => Err(cur.error("expected variable or integer")),
    }
}

pub(crate) fn conjunct(cur: &mut Cursor) -> Result<Conjunct, SyntaxError> {
    let lhs = expr(cur)?;
    let rel = match cur.next() {
        Some((Tok::Eq, _)) => Rel::Eq,
        Some((Tok::Ne, _)) => Rel::Ne,
        Some((Tok::Le, _)) => Rel::Le,
        Some((Tok::Ge, _)) => Rel::Ge,
        Some((Tok::Lt, _)) => Rel::Lt,
        Some((Tok::Gt, _)) => Rel::Gt,
        Some((t, p)) => {
            return Err(SyntaxError::new(
                p,
                format!("expected comparison, found {t}"),
            ))
        }
        None => return Err(cur.error("expected comparison, found end of input")),
    };
    let rhs = expr(cur)?;
    Ok(Conjunct::new(lhs, rel, rhs))
}

/// Linear expression: `[-] t (+|- t)*` with `t ::= n | V | n*V | V*n`.
pub(crate) fn expr(cur: &mut Cursor) -> Result<LinExpr, SyntaxError> {
    let mut e = LinExpr::zero();
    let mut sign = if cur.eat(&Tok::Minus) { -1 } else { 1 };
    loop {
        e = e.plus(&lin_term(cur)?.scaled(sign));
        sign = match cur.peek() {
            Some(Tok::Plus) => 1,
            Some(Tok::Minus) => -1,
            _ => return Ok(e),
        };
        cur.next();
    }
}

fn lin_term(cur: &mut Cursor) -> Result<LinExpr, SyntaxError> {
    match cur.next() {
        Some((Tok::Int(n), _)) => {
            if cur.eat(&Tok::Star) {
                let (v, _) = cur.variable()?;
                Ok(LinExpr::term(Var(v), n))
            } else {
                Ok(LinExpr::constant(n))
            }
        }
        Some((Tok::Variable(v), _)) => {
            if cur.eat(&Tok::Star) {
                let (n, _) = cur.int()?;
                Ok(LinExpr::term(Var(v), n))
            } else {
                Ok(LinExpr::var(Var(v)))
            }
        }
        Some((Tok::LParen, _)) => {
            let e = expr(cur)?;
            cur.expect(&Tok::RParen)?;
            Ok(e)
        }
        Some((t, p)) => Err(SyntaxError::new(
            p,
            format!("expected linear term, found {t}"),
        )),
        None => Err(cur.error("expected linear term, found end of input")),
    }
}
