//! Parser for the program language.
//!
//! ```text
//! M ::= [req] Sym[idx,..](M, ..[; n => M])  |  M +[p] M  |  ( M )
//!     | sum { p : M; for i in a..=b : p : M; tail(n >= k[, depth <= d]) : p : M }
//!     | iterate Sym n on M  |  iterate k < n : M on M  |  _
//! ```
//! Choice is right-associative. `#` and `//` start line comments.

use std::sync::Arc;

use crate::error::CoreError;
use crate::rational::{parse_rational, Rational};
use crate::signature::Signature;
use crate::template::{Env, IdxExpr, RatExpr, SumEntry, TailSpec, Template};
use crate::term::{validate_term, Term};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(String),
    Punct(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

const PUNCT: [&str; 19] = [
    "..=", "=>", ">=", "<=", "+[", "(", ")", "[", "]", "{", "}", ",", ";", ":", "+", "-", "*", "/", "^",
];

fn lex(text: &str) -> Result<Vec<Spanned>, CoreError> {
    let mut out = Vec::new();
    for (li, line) in text.lines().enumerate() {
        let chars: Vec<(usize, char)> = line.char_indices().collect();
        let mut i = 0;
        while i < chars.len() {
            let (byte, c) = chars[i];
            let col = i + 1;
            let rest = &line[byte..];
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c == '#' || rest.starts_with("//") {
                break;
            }
            if c.is_ascii_digit() {
                let mut j = i;
                while j < chars.len() && chars[j].1.is_ascii_digit() {
                    j += 1;
                }
                // A decimal point followed by a digit; `..=` stays a range.
                if j + 1 < chars.len() && chars[j].1 == '.' && chars[j + 1].1.is_ascii_digit() {
                    j += 1;
                    while j < chars.len() && chars[j].1.is_ascii_digit() {
                        j += 1;
                    }
                }
                let end = chars.get(j).map_or(line.len(), |(b, _)| *b);
                out.push(Spanned { tok: Tok::Num(line[byte..end].to_string()), line: li + 1, col });
                i = j;
                continue;
            }
            if is_ident_char(c) {
                let mut j = i;
                while j < chars.len() && is_ident_char(chars[j].1) {
                    j += 1;
                }
                // A trailing `?` is part of request names such as `Happy?`.
                if j < chars.len() && chars[j].1 == '?' {
                    j += 1;
                }
                let end = chars.get(j).map_or(line.len(), |(b, _)| *b);
                let word = line[byte..end].trim_end_matches('?').to_string();
                out.push(Spanned { tok: Tok::Ident(word), line: li + 1, col });
                i = j;
                continue;
            }
            if c == '<' && !rest.starts_with("<=") {
                out.push(Spanned { tok: Tok::Punct("<"), line: li + 1, col });
                i += 1;
                continue;
            }
            match PUNCT.iter().find(|p| rest.starts_with(**p)) {
                Some(p) => {
                    out.push(Spanned { tok: Tok::Punct(p), line: li + 1, col });
                    i += p.chars().count();
                }
                None => {
                    return Err(CoreError::Syntax { line: li + 1, col, msg: format!("unexpected character `{c}`") })
                }
            }
        }
    }
    let (line, col) = out.last().map_or((1, 1), |s| (s.line, s.col + 1));
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '⋆' || c == '\''
}

const KEYWORDS: [&str; 8] = ["req", "sum", "for", "in", "tail", "depth", "iterate", "on"];

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, CoreError> {
        let s = &self.toks[self.pos];
        Err(CoreError::Syntax { line: s.line, col: s.col, msg: msg.into() })
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(w) if w == kw)
    }

    fn eat(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, p: &str) -> Result<(), CoreError> {
        if self.eat(p) {
            Ok(())
        } else {
            self.err(format!("expected `{p}`"))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), CoreError> {
        if self.is_kw(kw) {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected `{kw}`"))
        }
    }

    fn ident(&mut self) -> Result<String, CoreError> {
        match self.peek().clone() {
            Tok::Ident(w) if !KEYWORDS.contains(&w.as_str()) => {
                self.bump();
                Ok(w)
            }
            _ => self.err("expected an identifier"),
        }
    }

    fn natural(&mut self) -> Result<u64, CoreError> {
        match self.peek().clone() {
            Tok::Num(n) => match n.parse() {
                Ok(v) => {
                    self.bump();
                    Ok(v)
                }
                Err(_) => self.err("expected a natural number"),
            },
            _ => self.err("expected a natural number"),
        }
    }

    /// `hole_ok` is true inside an iterate context, outside of generators.
    fn expr(&mut self, hole_ok: bool) -> Result<Template, CoreError> {
        let left = self.primary(hole_ok)?;
        if self.eat("+[") {
            let p = self.rat()?;
            self.expect("]")?;
            let right = self.expr(hole_ok)?;
            return Ok(Template::Choice { p, left: Box::new(left), right: Box::new(right) });
        }
        Ok(left)
    }

    fn primary(&mut self, hole_ok: bool) -> Result<Template, CoreError> {
        if self.eat("(") {
            let t = self.expr(hole_ok)?;
            self.expect(")")?;
            return Ok(t);
        }
        if self.is_kw("sum") {
            self.bump();
            return self.sum_body(hole_ok);
        }
        if self.is_kw("iterate") {
            self.bump();
            return self.iterate(hole_ok);
        }
        if self.is_kw("req") {
            self.bump();
        }
        if matches!(self.peek(), Tok::Ident(w) if w == "_") {
            if !hole_ok {
                return self.err("`_` is only allowed inside an iterate context");
            }
            self.bump();
            return Ok(Template::Hole);
        }
        let name = self.ident()?;
        let idx = self.indices()?;
        let mut args = Vec::new();
        let mut rest = None;
        if self.eat("(") {
            if !self.is_punct(")") && !self.is_punct(";") {
                loop {
                    args.push(self.expr(hole_ok)?);
                    if !self.eat(",") {
                        break;
                    }
                }
            }
            if self.eat(";") {
                let var = self.ident()?;
                self.expect("=>")?;
                let body = self.expr(false)?;
                rest = Some((var, Arc::new(body)));
            }
            self.expect(")")?;
        }
        Ok(Template::Req { name, idx, args, rest })
    }

    fn indices(&mut self) -> Result<Vec<IdxExpr>, CoreError> {
        let mut idx = Vec::new();
        if self.eat("[") {
            loop {
                idx.push(self.idx()?);
                if !self.eat(",") {
                    break;
                }
            }
            self.expect("]")?;
        }
        Ok(idx)
    }

    fn sum_body(&mut self, hole_ok: bool) -> Result<Template, CoreError> {
        self.expect("{")?;
        let mut entries = Vec::new();
        let mut tail = None;
        while !self.is_punct("}") {
            if tail.is_some() {
                return self.err("the tail must be the last entry of a sum");
            }
            if self.is_kw("for") {
                self.bump();
                let var = self.ident()?;
                self.expect_kw("in")?;
                let lo = self.idx()?;
                self.expect("..=")?;
                let hi = self.idx()?;
                self.expect(":")?;
                let coeff = self.rat()?;
                self.expect(":")?;
                let body = self.expr(hole_ok)?;
                entries.push(SumEntry::Comprehension { var, lo, hi, coeff, body });
            } else if self.is_kw("tail") {
                self.bump();
                self.expect("(")?;
                let var = self.ident()?;
                self.expect(">=")?;
                let offset = self.natural()?;
                let mut depth = None;
                if self.eat(",") {
                    self.expect_kw("depth")?;
                    self.expect("<=")?;
                    depth = Some(self.natural()?);
                }
                self.expect(")")?;
                self.expect(":")?;
                let coeff = self.rat()?;
                self.expect(":")?;
                let body = self.expr(false)?;
                tail = Some(TailSpec { var, offset, coeff, body: Arc::new(body), depth });
            } else {
                let coeff = self.rat()?;
                self.expect(":")?;
                let body = self.expr(hole_ok)?;
                entries.push(SumEntry::Single(coeff, body));
            }
            if !self.eat(";") {
                break;
            }
        }
        self.expect("}")?;
        Ok(Template::Sum { entries, tail })
    }

    fn iterate(&mut self, hole_ok: bool) -> Result<Template, CoreError> {
        if matches!(self.peek_at(1), Tok::Punct("<")) {
            let var = self.ident()?;
            self.expect("<")?;
            let count = self.idx()?;
            self.expect(":")?;
            let ctx = self.expr(true)?;
            self.expect_kw("on")?;
            let base = self.expr(hole_ok)?;
            return Ok(Template::Iterate { var: Some(var), count, ctx: Box::new(ctx), base: Box::new(base) });
        }
        // `iterate f n on M`: the unary request f applied n times.
        let name = self.ident()?;
        let idx = self.indices()?;
        let count = self.idx_atom()?;
        self.expect_kw("on")?;
        let base = self.expr(hole_ok)?;
        let ctx = Template::Req { name, idx, args: vec![Template::Hole], rest: None };
        Ok(Template::Iterate { var: None, count, ctx: Box::new(ctx), base: Box::new(base) })
    }

    fn idx(&mut self) -> Result<IdxExpr, CoreError> {
        let mut e = self.idx_term()?;
        loop {
            if self.eat("+") {
                e = IdxExpr::Add(Box::new(e), Box::new(self.idx_term()?));
            } else if self.eat("-") {
                e = IdxExpr::Sub(Box::new(e), Box::new(self.idx_term()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn idx_term(&mut self) -> Result<IdxExpr, CoreError> {
        let mut e = self.idx_atom()?;
        while self.eat("*") {
            e = IdxExpr::Mul(Box::new(e), Box::new(self.idx_atom()?));
        }
        Ok(e)
    }

    fn idx_atom(&mut self) -> Result<IdxExpr, CoreError> {
        if self.eat("(") {
            let e = self.idx()?;
            self.expect(")")?;
            return Ok(e);
        }
        if self.eat("-") {
            return Ok(IdxExpr::Sub(Box::new(IdxExpr::Lit(0)), Box::new(self.idx_atom()?)));
        }
        if let Tok::Num(_) = self.peek() {
            let v = self.natural()?;
            return i64::try_from(v).map(IdxExpr::Lit).or_else(|_| self.err("index literal too large"));
        }
        Ok(IdxExpr::Var(self.ident()?))
    }

    fn rat(&mut self) -> Result<RatExpr, CoreError> {
        let mut e = self.rat_term()?;
        loop {
            if self.eat("+") {
                e = RatExpr::Add(Box::new(e), Box::new(self.rat_term()?));
            } else if self.eat("-") {
                e = RatExpr::Sub(Box::new(e), Box::new(self.rat_term()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn rat_term(&mut self) -> Result<RatExpr, CoreError> {
        let mut e = self.rat_factor()?;
        loop {
            if self.eat("*") {
                e = RatExpr::Mul(Box::new(e), Box::new(self.rat_factor()?));
            } else if self.eat("/") {
                e = RatExpr::Div(Box::new(e), Box::new(self.rat_factor()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn rat_factor(&mut self) -> Result<RatExpr, CoreError> {
        let base = self.rat_atom()?;
        if self.eat("^") {
            let e = self.idx_atom()?;
            return Ok(RatExpr::Pow(Box::new(base), e));
        }
        Ok(base)
    }

    fn rat_atom(&mut self) -> Result<RatExpr, CoreError> {
        if self.eat("(") {
            let e = self.rat()?;
            self.expect(")")?;
            return Ok(e);
        }
        if self.eat("-") {
            let inner = self.rat_factor()?;
            return Ok(RatExpr::Sub(Box::new(RatExpr::Lit(Rational::from_integer(0.into()))), Box::new(inner)));
        }
        if let Tok::Num(n) = self.peek().clone() {
            self.bump();
            return match parse_rational(&n) {
                Some(r) => Ok(RatExpr::Lit(r)),
                None => self.err(format!("bad number `{n}`")),
            };
        }
        Ok(RatExpr::Idx(IdxExpr::Var(self.ident()?)))
    }
}

/// Parses program text into a template without checking it.
pub fn parse_template(text: &str) -> Result<Template, CoreError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let t = p.expr(false)?;
    if *p.peek() != Tok::Eof {
        return p.err("unexpected trailing input");
    }
    if let Some(v) = t.free_vars().into_iter().next() {
        return Err(CoreError::UnboundVariable(v));
    }
    Ok(t)
}

/// Parses a closed program without a signature check.
pub fn parse_term(text: &str) -> Result<Term, CoreError> {
    parse_template(text)?.instantiate(&Env::new())
}

/// Parses and validates a program; generators are spot-checked at `g` indices.
pub fn parse_program(text: &str, sig: &Signature, g: u64) -> Result<Term, CoreError> {
    let t = parse_term(text)?;
    validate_term(&t, sig, g)?;
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn happy_sig() -> Signature {
        Signature::parse("op Bye : []\nop Happy : [yes, no]\nop Age : omega").unwrap()
    }

    #[test]
    fn happy_program() {
        let src = "req Happy(req Bye, req Bye +[1/2] req Happy(req Bye +[1/3] req Happy(req Bye, req Bye), req Bye))";
        let t = parse_program(src, &happy_sig(), 16).unwrap();
        assert_eq!(parse_term(&t.to_dsl()).unwrap(), t);
    }

    #[test]
    fn not_well_founded_example() {
        let sig = Signature::parse("op a : 1\nop c : []").unwrap();
        let t = parse_program("sum { tail(n >= 0): 1/2^(n+1) : iterate a n on c }", &sig, 16).unwrap();
        assert_eq!(t.branch(2).unwrap().to_dsl(), "a(a(c))");
        if let Term::Sum { coeffs, .. } = &t {
            assert_eq!(coeffs.coeff(3), rat(1, 16));
        }
        assert_eq!(parse_term(&t.to_dsl()).unwrap().to_dsl(), t.to_dsl());
    }

    #[test]
    fn zero_choice_probability_is_rejected() {
        assert!(matches!(
            parse_program("req Bye +[0/1] req Bye", &happy_sig(), 16),
            Err(CoreError::ProbabilityOutOfRange(_))
        ));
    }

    #[test]
    fn errors_carry_positions() {
        match parse_term("Happy(Bye,\n  Bye +[1/2 Bye)") {
            Err(CoreError::Syntax { line, col, .. }) => assert_eq!((line, col), (2, 13)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_term("f(n)"), Ok(_)));
        assert!(matches!(parse_term("c[n]"), Err(CoreError::UnboundVariable(_))));
    }

    #[test]
    fn omega_children_and_comprehension() {
        let sig = Signature::parse("op b : omega\nop c[_,_] : []").unwrap();
        let src = "b(c[0,0]; n => sum { for i in 0..=n : 1/(n+1) : c[n,i] })";
        let t = parse_program(src, &sig, 8).unwrap();
        let again = parse_term(&t.to_dsl()).unwrap();
        assert_eq!(again.to_dsl(), t.to_dsl());
    }

    #[test]
    fn general_iterate_with_holes() {
        let t = parse_term("iterate k < 3 : f[k](_, g) on c").unwrap();
        assert_eq!(t.to_dsl(), "f[0](f[1](f[2](c, g), g), g)");
    }
}
