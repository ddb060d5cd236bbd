//! Text syntax for word sums.
//!
//! ```text
//! sum    := ['-'] term (('+' | '-') term)*
//! term   := [coeff '*'] word
//! coeff  := number | '(' number ',' number ')'
//! word   := 'I' | atom ('*' atom)*
//! atom   := ('T' | 'H') '(' expr ')'
//! expr   := factor ('.' factor)*
//! factor := (name | 'plus' '(' expr ')' | 'minus' '(' expr ')' | '(' expr ')') ('~' | '*')*
//! ```

use super::{Atom, Kind, OperatorWord, SymbolExpr, WordSum};
use crate::error::{Error, Result};
use num_complex::Complex;
use std::sync::Arc;

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser { src, pos: 0 }
    }

    fn err<X>(&self, msg: &str) -> Result<X> {
        Err(Error::Parse(format!("{msg} at offset {} in `{}`", self.pos, self.src)))
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.rest().chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(&format!("expected `{c}`"))
        }
    }

    fn ident(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let r = self.rest();
        let mut end = 0;
        for (i, c) in r.char_indices() {
            let ok = if i == 0 {
                c.is_alphabetic() || c == '_'
            } else {
                c.is_alphanumeric() || c == '_'
            };
            if !ok {
                break;
            }
            end = i + c.len_utf8();
        }
        if end == 0 {
            None
        } else {
            self.pos += end;
            Some(&r[..end])
        }
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let r = self.rest();
        let end = r
            .char_indices()
            .find(|&(i, c)| {
                !(c.is_ascii_digit()
                    || c == '.'
                    || c == 'e'
                    || c == 'E'
                    || ((c == '-' || c == '+') && i > 0 && matches!(r.as_bytes()[i - 1], b'e' | b'E'))
                    || (c == '-' && i == 0))
            })
            .map_or(r.len(), |(i, _)| i);
        match r[..end].parse::<f64>() {
            Ok(v) => {
                self.pos += end;
                Ok(v)
            }
            Err(_) => self.err("expected a number"),
        }
    }

    fn sum(&mut self) -> Result<WordSum> {
        let mut terms = Vec::new();
        let mut sign = if self.eat('-') { -1.0 } else { 1.0 };
        loop {
            let (c, w) = self.term()?;
            terms.push((c * sign, w));
            if self.eat('+') {
                sign = 1.0;
            } else if self.eat('-') {
                sign = -1.0;
            } else {
                break;
            }
        }
        Ok(WordSum { terms })
    }

    fn term(&mut self) -> Result<(Complex<f64>, OperatorWord)> {
        let c = match self.peek() {
            Some(ch) if ch.is_ascii_digit() || ch == '.' => {
                let v = self.number()?;
                self.expect('*')?;
                Complex::new(v, 0.0)
            }
            Some('(') => {
                self.pos += 1;
                let re = self.number()?;
                self.expect(',')?;
                let im = self.number()?;
                self.expect(')')?;
                self.expect('*')?;
                Complex::new(re, im)
            }
            _ => Complex::new(1.0, 0.0),
        };
        Ok((c, self.word()?))
    }

    fn word(&mut self) -> Result<OperatorWord> {
        let save = self.pos;
        if self.ident() == Some("I") {
            return Ok(OperatorWord::default());
        }
        self.pos = save;
        let mut atoms = vec![self.atom()?];
        while self.eat('*') {
            atoms.push(self.atom()?);
        }
        Ok(OperatorWord(atoms))
    }

    fn atom(&mut self) -> Result<Atom> {
        let kind = match self.ident() {
            Some("T") => Kind::T,
            Some("H") => Kind::H,
            _ => return self.err("expected `T(` or `H(`"),
        };
        self.expect('(')?;
        let e = self.expr()?;
        self.expect(')')?;
        Ok(Atom { kind, expr: e })
    }

    fn expr(&mut self) -> Result<Arc<SymbolExpr>> {
        let mut e = self.factor()?;
        while self.eat('.') {
            let f = self.factor()?;
            e = SymbolExpr::mul(&e, &f);
        }
        Ok(e)
    }

    fn factor(&mut self) -> Result<Arc<SymbolExpr>> {
        let mut e = if self.eat('(') {
            let e = self.expr()?;
            self.expect(')')?;
            e
        } else {
            match self.ident() {
                Some(w @ ("plus" | "minus")) if self.peek() == Some('(') => {
                    self.pos += 1;
                    let inner = self.expr()?;
                    self.expect(')')?;
                    Arc::new(if w == "plus" {
                        SymbolExpr::Plus(inner)
                    } else {
                        SymbolExpr::Minus(inner)
                    })
                }
                Some(name) => SymbolExpr::name(name),
                None => return self.err("expected a symbol name"),
            }
        };
        loop {
            if self.eat('~') {
                e = SymbolExpr::tilde(&e);
            } else if self.eat('*') {
                e = SymbolExpr::star(&e);
            } else {
                break;
            }
        }
        Ok(e)
    }

    fn finish(&mut self) -> Result<()> {
        if self.peek().is_some() {
            return self.err("trailing input");
        }
        Ok(())
    }
}

pub fn parse_word_sum(s: &str) -> Result<WordSum> {
    let mut p = Parser::new(s);
    let ws = p.sum()?;
    p.finish()?;
    Ok(ws)
}

pub fn parse_expr(s: &str) -> Result<Arc<SymbolExpr>> {
    let mut p = Parser::new(s);
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}
