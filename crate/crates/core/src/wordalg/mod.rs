//! Formal words in Toeplitz and Hankel atoms and their rewriting to a normal
//! form where every word is a run of Toeplitz atoms followed by at most one
//! Hankel atom.
//!
//! Two rules, both consequences of the product formulas for `T_{ab}` and
//! `H_{ab}`:
//!
//! ```text
//! H_a H_b  ->  T_{a~ b} - T_{a~} T_b
//! H_a T_b  ->  H_{ab}   - T_{a~} H_b
//! ```

mod parse;

pub use parse::{parse_expr, parse_word_sum};

use crate::error::{Error, Result};
use crate::operators::{hankel_trunc, toeplitz_trunc, TruncatedOperator, WindowSpec};
use crate::scalar::*;
use crate::symbols::MatrixSymbol;
use num_complex::Complex;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

/// Symbol expression over named atoms. Subtrees are shared through `Arc`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SymbolExpr {
    Name(String),
    Tilde(Arc<SymbolExpr>),
    Star(Arc<SymbolExpr>),
    Mul(Arc<SymbolExpr>, Arc<SymbolExpr>),
    Plus(Arc<SymbolExpr>),
    Minus(Arc<SymbolExpr>),
}

impl SymbolExpr {
    pub fn name(s: &str) -> Arc<Self> {
        Arc::new(SymbolExpr::Name(s.to_string()))
    }

    /// Pushes `~` and `*` towards the leaves and cancels double applications.
    /// `~` commutes with products, `*` reverses them, and `*` is kept outside
    /// `~` on a leaf.
    pub fn tilde(e: &Arc<Self>) -> Arc<Self> {
        match &**e {
            SymbolExpr::Tilde(x) => x.clone(),
            SymbolExpr::Mul(a, b) => Arc::new(SymbolExpr::Mul(Self::tilde(a), Self::tilde(b))),
            SymbolExpr::Star(x) => Self::star(&Self::tilde(x)),
            _ => Arc::new(SymbolExpr::Tilde(e.clone())),
        }
    }

    pub fn star(e: &Arc<Self>) -> Arc<Self> {
        match &**e {
            SymbolExpr::Star(x) => x.clone(),
            SymbolExpr::Mul(a, b) => Arc::new(SymbolExpr::Mul(Self::star(b), Self::star(a))),
            _ => Arc::new(SymbolExpr::Star(e.clone())),
        }
    }

    pub fn mul(a: &Arc<Self>, b: &Arc<Self>) -> Arc<Self> {
        Arc::new(SymbolExpr::Mul(a.clone(), b.clone()))
    }

    /// Rebuilds the tree through the smart constructors.
    pub fn normalized(e: &Arc<Self>) -> Arc<Self> {
        match &**e {
            SymbolExpr::Name(_) => e.clone(),
            SymbolExpr::Tilde(x) => Self::tilde(&Self::normalized(x)),
            SymbolExpr::Star(x) => Self::star(&Self::normalized(x)),
            SymbolExpr::Mul(a, b) => Self::mul(&Self::normalized(a), &Self::normalized(b)),
            SymbolExpr::Plus(x) => Arc::new(SymbolExpr::Plus(Self::normalized(x))),
            SymbolExpr::Minus(x) => Arc::new(SymbolExpr::Minus(Self::normalized(x))),
        }
    }

    pub fn names(&self, out: &mut Vec<String>) {
        match self {
            SymbolExpr::Name(n) => {
                if !out.contains(n) {
                    out.push(n.clone());
                }
            }
            SymbolExpr::Tilde(x) | SymbolExpr::Star(x) | SymbolExpr::Plus(x) | SymbolExpr::Minus(x) => {
                x.names(out)
            }
            SymbolExpr::Mul(a, b) => {
                a.names(out);
                b.names(out);
            }
        }
    }

    /// Evaluates against `env`; unbounded products are cut at `trunc`.
    pub fn eval<T: Real>(&self, env: &Env<T>, trunc: usize) -> Result<MatrixSymbol<T>> {
        Ok(match self {
            SymbolExpr::Name(n) => env
                .get(n)
                .cloned()
                .ok_or_else(|| Error::Unbound(n.clone()))?,
            SymbolExpr::Tilde(x) => x.eval(env, trunc)?.tilde(),
            SymbolExpr::Star(x) => x.eval(env, trunc)?.star(),
            SymbolExpr::Mul(a, b) => a.eval(env, trunc)?.mul(&b.eval(env, trunc)?, Some(trunc))?,
            SymbolExpr::Plus(x) => x.eval(env, trunc)?.plus_part(),
            SymbolExpr::Minus(x) => x.eval(env, trunc)?.minus_part(),
        })
    }

    /// Largest coefficient degree, or `None` when unbounded.
    pub fn degree<T: Real>(&self, env: &Env<T>) -> Result<Option<i64>> {
        Ok(match self {
            SymbolExpr::Name(n) => env.get(n).ok_or_else(|| Error::Unbound(n.clone()))?.max_degree(),
            SymbolExpr::Tilde(x) | SymbolExpr::Star(x) | SymbolExpr::Plus(x) | SymbolExpr::Minus(x) => {
                x.degree(env)?
            }
            SymbolExpr::Mul(a, b) => match (a.degree(env)?, b.degree(env)?) {
                (Some(x), Some(y)) => Some(x + y),
                _ => None,
            },
        })
    }

    fn fmt_inner(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolExpr::Name(n) => f.write_str(n),
            SymbolExpr::Tilde(x) => {
                x.fmt_postfix(f)?;
                f.write_str("~")
            }
            SymbolExpr::Star(x) => {
                x.fmt_postfix(f)?;
                f.write_str("*")
            }
            SymbolExpr::Mul(a, b) => {
                a.fmt_inner(f)?;
                f.write_str(".")?;
                b.fmt_inner(f)
            }
            SymbolExpr::Plus(x) => {
                f.write_str("plus(")?;
                x.fmt_inner(f)?;
                f.write_str(")")
            }
            SymbolExpr::Minus(x) => {
                f.write_str("minus(")?;
                x.fmt_inner(f)?;
                f.write_str(")")
            }
        }
    }

    fn fmt_postfix(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolExpr::Mul(..) => {
                f.write_str("(")?;
                self.fmt_inner(f)?;
                f.write_str(")")
            }
            _ => self.fmt_inner(f),
        }
    }
}

impl fmt::Display for SymbolExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_inner(f)
    }
}

pub type Env<T> = HashMap<String, MatrixSymbol<T>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    T,
    H,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub kind: Kind,
    pub expr: Arc<SymbolExpr>,
}

impl Atom {
    pub fn t(expr: Arc<SymbolExpr>) -> Self {
        Atom { kind: Kind::T, expr }
    }

    pub fn h(expr: Arc<SymbolExpr>) -> Self {
        Atom { kind: Kind::H, expr }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            Kind::T => "T",
            Kind::H => "H",
        };
        write!(f, "{k}({})", self.expr)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct OperatorWord(pub Vec<Atom>);

impl OperatorWord {
    pub fn atoms(&self) -> &[Atom] {
        &self.0
    }

    pub fn h_count(&self) -> usize {
        self.0.iter().filter(|a| a.kind == Kind::H).count()
    }

    pub fn h_parity(&self) -> Parity {
        if self.h_count() % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn is_pure_toeplitz(&self) -> bool {
        self.h_count() == 0
    }

    /// All Toeplitz atoms first, at most one Hankel atom at the end.
    pub fn is_normal(&self) -> bool {
        match self.0.iter().position(|a| a.kind == Kind::H) {
            None => true,
            Some(p) => p + 1 == self.0.len(),
        }
    }

    /// Sum over atoms of the symbol degree (`None` if some symbol is unbounded).
    pub fn degree<T: Real>(&self, env: &Env<T>) -> Result<Option<i64>> {
        let mut total = 0;
        for a in &self.0 {
            match a.expr.degree(env)? {
                Some(d) => total += d,
                None => return Ok(None),
            }
        }
        Ok(Some(total))
    }

    pub fn evaluate<T: Real>(&self, env: &Env<T>, n: usize, len: usize) -> Result<TruncatedOperator<T>> {
        let mut acc = TruncatedOperator::identity(n, len)?;
        for a in &self.0 {
            let s = a.expr.eval(env, len)?;
            if s.n() != n {
                return Err(Error::Dimension(format!("symbol {} has block size {}", a.expr, s.n())));
            }
            let op = match a.kind {
                Kind::T => toeplitz_trunc(&s, len)?,
                Kind::H => hankel_trunc(&s, len)?,
            };
            acc = acc.compose(&op)?;
        }
        Ok(acc)
    }
}

impl fmt::Display for OperatorWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("I");
        }
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RewriteOrder {
    /// Rewrite the leftmost Hankel atom that is not already last.
    #[default]
    Leftmost,
    /// Rewrite the rightmost such atom.
    Rightmost,
}

/// Linear combination of words.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WordSum {
    pub terms: Vec<(Complex<f64>, OperatorWord)>,
}

impl WordSum {
    pub fn single(w: OperatorWord) -> Self {
        WordSum {
            terms: vec![(Complex::new(1.0, 0.0), w)],
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_normal(&self) -> bool {
        self.terms.iter().all(|(_, w)| w.is_normal())
    }

    /// Merges identical words and drops zero coefficients.
    pub fn merged(self) -> Self {
        let mut out: Vec<(Complex<f64>, OperatorWord)> = Vec::new();
        for (c, w) in self.terms {
            match out.iter_mut().find(|(_, v)| *v == w) {
                Some((d, _)) => *d += c,
                None => out.push((c, w)),
            }
        }
        out.retain(|(c, _)| c.norm() > 0.0);
        WordSum { terms: out }
    }

    pub fn normalize(&self) -> Self {
        self.normalize_with(RewriteOrder::Leftmost)
    }

    pub fn normalize_with(&self, strategy: RewriteOrder) -> Self {
        let mut done = Vec::new();
        let mut stack: Vec<(Complex<f64>, OperatorWord)> = self.terms.iter().rev().cloned().collect();
        while let Some((c, w)) = stack.pop() {
            let atoms = &w.0;
            let candidates = atoms
                .iter()
                .enumerate()
                .filter(|(i, a)| a.kind == Kind::H && i + 1 < atoms.len())
                .map(|(i, _)| i);
            let pos = match strategy {
                RewriteOrder::Leftmost => candidates.min(),
                RewriteOrder::Rightmost => candidates.max(),
            };
            let Some(p) = pos else {
                done.push((c, w));
                continue;
            };
            let a = &atoms[p].expr;
            let b = &atoms[p + 1];
            let at = SymbolExpr::tilde(a);
            let (first, second) = match b.kind {
                // H_a H_b -> T_{a~ b} - T_{a~} T_b
                Kind::H => (
                    vec![Atom::t(SymbolExpr::mul(&at, &b.expr))],
                    vec![Atom::t(at.clone()), Atom::t(b.expr.clone())],
                ),
                // H_a T_b -> H_{ab} - T_{a~} H_b
                Kind::T => (
                    vec![Atom::h(SymbolExpr::mul(a, &b.expr))],
                    vec![Atom::t(at.clone()), Atom::h(b.expr.clone())],
                ),
            };
            let splice = |mid: Vec<Atom>| {
                let mut v = atoms[..p].to_vec();
                v.extend(mid);
                v.extend_from_slice(&atoms[p + 2..]);
                OperatorWord(v)
            };
            // push in reverse so the first replacement is processed first
            stack.push((-c, splice(second)));
            stack.push((c, splice(first)));
        }
        WordSum { terms: done }.merged()
    }

    pub fn evaluate<T: Real>(&self, env: &Env<T>, n: usize, len: usize) -> Result<TruncatedOperator<T>> {
        let mut acc = TruncatedOperator::zero(n, len)?;
        for (c, w) in &self.terms {
            let op = w.evaluate(env, n, len)?;
            acc = acc.add(&op.scale(Complex::new(lit(c.re), lit(c.im))))?;
        }
        Ok(acc)
    }

    /// Edge margin `2 * max word degree` that keeps truncated products exact.
    pub fn required_margin<T: Real>(&self, env: &Env<T>) -> Result<usize> {
        let mut m = 0;
        for (_, w) in &self.terms {
            match w.degree(env)? {
                Some(d) => m = m.max(2 * d as usize),
                None => {
                    return Err(Error::SupportOverflow(format!(
                        "word {w} has a symbol of unbounded degree"
                    )))
                }
            }
        }
        Ok(m)
    }
}

impl fmt::Display for WordSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (c, w)) in self.terms.iter().enumerate() {
            let real_int = c.im == 0.0 && c.re.fract() == 0.0;
            if real_int {
                let r = c.re as i64;
                let sign = if r < 0 { "-" } else { "+" };
                if i > 0 {
                    write!(f, " {sign} ")?;
                } else if r < 0 {
                    f.write_str("-")?;
                }
                if r.abs() != 1 {
                    write!(f, "{}*", r.abs())?;
                }
            } else {
                if i > 0 {
                    f.write_str(" + ")?;
                }
                write!(f, "({},{})*", c.re, c.im)?;
            }
            write!(f, "{w}")?;
        }
        Ok(())
    }
}

/// Window residual between `ws` and its normal form, evaluated at `len`.
pub fn certify<T: Real>(ws: &WordSum, env: &Env<T>, n: usize, len: usize) -> Result<(WordSum, T)> {
    let margin = ws.required_margin(env)?;
    if len <= margin + 1 {
        return Err(Error::InsufficientTruncation {
            given: len,
            required: margin + 2,
        });
    }
    let normal = ws.normalize();
    let a = ws.evaluate(env, n, len)?;
    let b = normal.evaluate(env, n, len)?;
    let r = a.window_diff(&b, &WindowSpec::interior(len, margin))?;
    Ok((normal, r))
}

#[cfg(test)]
mod tests;
