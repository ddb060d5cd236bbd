//! Matrix-valued symbols on the unit circle.
//!
//! A symbol is a finite map of explicit Fourier coefficients plus a list of
//! closed-form tail terms. Fourier coefficients follow
//! `s^(k) = int s(e^{it}) e^{-ikt} dt / 2pi`.

mod builders;
pub mod quadrature;
pub mod rules;
pub mod spec;

pub use builders::*;
pub use rules::TailRule;

use crate::error::{Error, Result};
use crate::scalar::*;
use num_complex::Complex;
use rules::{max_opt, min_opt, zeta};
use std::collections::BTreeMap;
use std::sync::Arc;

/// Points with modulus at or beyond `1 - BOUNDARY_EPS` are rejected.
pub const BOUNDARY_EPS: f64 = 1e-6;

/// A point of the open unit disk, kept away from the boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskPoint<T: Real> {
    z: Complex<T>,
}

impl<T: Real> DiskPoint<T> {
    pub fn new(z: Complex<T>) -> Result<Self> {
        let r = cabs(z);
        let limit = T::one() - lit(BOUNDARY_EPS);
        if !(r < limit) {
            return Err(Error::OutsideDisk {
                modulus: to_f64(r),
                limit: to_f64(limit),
            });
        }
        Ok(DiskPoint { z })
    }

    pub fn polar(r: T, theta: T) -> Result<Self> {
        Self::new(cis(theta) * r)
    }

    pub fn z(&self) -> Complex<T> {
        self.z
    }

    pub fn modulus(&self) -> T {
        cabs(self.z)
    }

    pub fn conj(&self) -> Self {
        DiskPoint { z: self.z.conj() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Coefficient support: empty, or `[lo, hi]` with `None` for an unbounded end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Support {
    Empty,
    Range { lo: Option<i64>, hi: Option<i64> },
}

impl Support {
    fn join(self, other: Support) -> Support {
        match (self, other) {
            (Support::Empty, s) | (s, Support::Empty) => s,
            (Support::Range { lo: a, hi: b }, Support::Range { lo: c, hi: d }) => Support::Range {
                lo: a.and_then(|a| c.map(|c| a.min(c))),
                hi: b.and_then(|b| d.map(|d| b.max(d))),
            },
        }
    }

    pub fn is_bounded(&self) -> bool {
        match self {
            Support::Empty => true,
            Support::Range { lo, hi } => lo.is_some() && hi.is_some(),
        }
    }
}

/// `coeff(k) = [k in window] * conj?(g(sigma k)) * mat` for a scalar rule `g`,
/// where `sigma k = -k` when `reflect` is set.
#[derive(Debug, Clone)]
pub struct TailTerm<T: Real> {
    rule: Arc<TailRule<T>>,
    reflect: bool,
    conj: bool,
    mat: CMat<T>,
    lo: Option<i64>,
    hi: Option<i64>,
}

impl<T: Real> TailTerm<T> {
    pub fn new(rule: TailRule<T>, mat: CMat<T>) -> Self {
        TailTerm {
            rule: Arc::new(rule),
            reflect: false,
            conj: false,
            mat,
            lo: None,
            hi: None,
        }
    }

    pub fn rule(&self) -> &TailRule<T> {
        &self.rule
    }

    pub fn matrix(&self) -> &CMat<T> {
        &self.mat
    }

    fn map_u(&self, k: i64) -> i64 {
        if self.reflect {
            -k
        } else {
            k
        }
    }

    /// Window translated to the rule's own degree variable.
    fn u_window(&self) -> (Option<i64>, Option<i64>) {
        if self.reflect {
            (self.hi.map(|h| -h), self.lo.map(|l| -l))
        } else {
            (self.lo, self.hi)
        }
    }

    pub fn support(&self) -> Support {
        let (ulo, uhi) = self.rule.support();
        let (klo, khi) = if self.reflect {
            (uhi.map(|h| -h), ulo.map(|l| -l))
        } else {
            (ulo, uhi)
        };
        let lo = max_opt(klo, self.lo);
        let hi = min_opt(khi, self.hi);
        match (lo, hi) {
            (Some(l), Some(h)) if l > h => Support::Empty,
            _ => Support::Range { lo, hi },
        }
    }

    /// Circle points where `value_at` is singular.
    pub fn boundary_singularities(&self) -> Vec<Complex<T>> {
        let flip = self.reflect != self.conj;
        self.rule
            .singular_points()
            .into_iter()
            .map(|s| if flip { s.conj() } else { s })
            .collect()
    }

    pub fn scalar_coeff(&self, k: i64) -> Complex<T> {
        if self.lo.is_some_and(|l| k < l) || self.hi.is_some_and(|h| k > h) {
            return czero();
        }
        let g = self.rule.coeff(self.map_u(k));
        if self.conj {
            g.conj()
        } else {
            g
        }
    }

    pub fn coeff(&self, k: i64) -> CMat<T> {
        &self.mat * self.scalar_coeff(k)
    }

    /// `sum_k coeff(k) zeta_k(p)` through the rule's closed forms.
    pub fn value_at(&self, p: Complex<T>) -> CMat<T> {
        let q = if self.reflect { p.conj() } else { p };
        let (ulo, uhi) = self.u_window();
        let v = if self.conj {
            self.rule.window_value(q.conj(), ulo, uhi).conj()
        } else {
            self.rule.window_value(q, ulo, uhi)
        };
        &self.mat * v
    }

    fn restrict(&self, lo: Option<i64>, hi: Option<i64>) -> Self {
        let mut t = self.clone();
        t.lo = max_opt(t.lo, lo);
        t.hi = min_opt(t.hi, hi);
        t
    }

    fn tilde(&self) -> Self {
        let mut t = self.clone();
        t.reflect = !t.reflect;
        t.lo = self.hi.map(|h| -h);
        t.hi = self.lo.map(|l| -l);
        t
    }

    fn star(&self) -> Self {
        let mut t = self.tilde();
        t.conj = !t.conj;
        t.mat = self.mat.adjoint();
        t
    }

    fn l2_tail_sq(&self, d: i64) -> T {
        let (slo, shi) = self.rule.support();
        let lo = slo.map_or(-d, |l| l.max(-d));
        let hi = shi.map_or(d, |h| h.min(d));
        let mut partial = T::zero();
        for u in lo..=hi {
            partial += cabs2(self.rule.coeff(u));
        }
        let total = match &*self.rule {
            TailRule::Blaschke { .. } | TailRule::SingularInner { .. } => T::one(),
            TailRule::HalfIndicator => lit(0.5),
            TailRule::Geometric { q, .. } => T::one() / (T::one() - cabs2(*q)),
        };
        let rest = total - partial;
        let fro = frob(&self.mat);
        if rest > T::zero() {
            rest * fro * fro
        } else {
            T::zero()
        }
    }
}

/// Matrix-valued symbol with explicit coefficients and closed-form tails.
#[derive(Debug, Clone)]
pub struct MatrixSymbol<T: Real> {
    n: usize,
    coeffs: BTreeMap<i64, CMat<T>>,
    tails: Vec<TailTerm<T>>,
    norm_hint: Option<T>,
}

impl<T: Real> MatrixSymbol<T> {
    pub fn zero(n: usize) -> Self {
        MatrixSymbol {
            n,
            coeffs: BTreeMap::new(),
            tails: Vec::new(),
            norm_hint: None,
        }
    }

    /// Symbol from explicit coefficients; every matrix must be `n x n`.
    pub fn laurent(n: usize, coeffs: impl IntoIterator<Item = (i64, CMat<T>)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Dimension("block dimension must be positive".into()));
        }
        let mut s = Self::zero(n);
        for (k, m) in coeffs {
            if m.shape() != (n, n) {
                return Err(Error::Dimension(format!(
                    "coefficient {k} has shape {:?}, expected ({n}, {n})",
                    m.shape()
                )));
            }
            s.add_coeff(k, m);
        }
        Ok(s)
    }

    /// Scalar Laurent polynomial from `(degree, value)` pairs.
    pub fn scalar(coeffs: impl IntoIterator<Item = (i64, Complex<T>)>) -> Self {
        let mut s = Self::zero(1);
        for (k, c) in coeffs {
            s.add_coeff(k, CMat::from_element(1, 1, c));
        }
        s
    }

    pub fn constant(m: CMat<T>) -> Result<Self> {
        let n = m.nrows();
        Self::laurent(n, [(0, m)])
    }

    pub fn identity(n: usize) -> Self {
        let mut s = Self::zero(n);
        s.add_coeff(0, identity(n));
        s
    }

    /// `M w^k`.
    pub fn monomial(k: i64, m: CMat<T>) -> Result<Self> {
        let n = m.nrows();
        Self::laurent(n, [(k, m)])
    }

    pub fn with_tail(mut self, term: TailTerm<T>) -> Result<Self> {
        if term.mat.shape() != (self.n, self.n) {
            return Err(Error::Dimension(format!(
                "tail matrix has shape {:?}, expected ({}, {})",
                term.mat.shape(),
                self.n,
                self.n
            )));
        }
        self.push_tail(term);
        Ok(self)
    }

    pub fn with_norm_hint(mut self, bound: T) -> Self {
        self.norm_hint = Some(bound);
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn norm_hint(&self) -> Option<T> {
        self.norm_hint
    }

    pub fn explicit(&self) -> &BTreeMap<i64, CMat<T>> {
        &self.coeffs
    }

    pub fn tails(&self) -> &[TailTerm<T>] {
        &self.tails
    }

    pub fn has_tail(&self) -> bool {
        !self.tails.is_empty()
    }

    fn add_coeff(&mut self, k: i64, m: CMat<T>) {
        match self.coeffs.get_mut(&k) {
            Some(c) => *c += m,
            None => {
                self.coeffs.insert(k, m);
            }
        }
    }

    fn push_tail(&mut self, term: TailTerm<T>) {
        match term.support() {
            Support::Empty => {}
            Support::Range {
                lo: Some(l),
                hi: Some(h),
            } => {
                for k in l..=h {
                    let c = term.coeff(k);
                    self.add_coeff(k, c);
                }
            }
            Support::Range { .. } => self.tails.push(term),
        }
    }

    /// Drop explicit coefficients that are exactly zero.
    pub fn pruned(mut self) -> Self {
        self.coeffs.retain(|_, m| m.iter().any(|z| *z != czero()));
        self
    }

    pub fn coeff(&self, k: i64) -> CMat<T> {
        let mut c = self.coeffs.get(&k).cloned().unwrap_or_else(|| zeros(self.n, self.n));
        for t in &self.tails {
            if !matches!(t.support(), Support::Empty) {
                c += t.coeff(k);
            }
        }
        c
    }

    /// Circle points where the closed forms of the tails are singular.
    pub fn boundary_singularities(&self) -> Vec<Complex<T>> {
        let mut v = Vec::new();
        for t in &self.tails {
            if !matches!(t.support(), Support::Empty) {
                v.extend(t.boundary_singularities());
            }
        }
        v
    }

    /// Coefficients for degrees `lo..=hi`, in order.
    pub fn coeffs_range(&self, lo: i64, hi: i64) -> Vec<CMat<T>> {
        (lo..=hi).map(|k| self.coeff(k)).collect()
    }

    pub fn support(&self) -> Support {
        let mut s = Support::Empty;
        let nz: Vec<i64> = self
            .coeffs
            .iter()
            .filter(|(_, m)| m.iter().any(|z| *z != czero()))
            .map(|(k, _)| *k)
            .collect();
        if let (Some(&lo), Some(&hi)) = (nz.first(), nz.last()) {
            s = Support::Range {
                lo: Some(lo),
                hi: Some(hi),
            };
        }
        for t in &self.tails {
            s = s.join(t.support());
        }
        s
    }

    /// Largest `|k|` carrying a coefficient, if bounded.
    pub fn max_degree(&self) -> Option<i64> {
        match self.support() {
            Support::Empty => Some(0),
            Support::Range {
                lo: Some(l),
                hi: Some(h),
            } => Some(l.abs().max(h.abs())),
            _ => None,
        }
    }

    pub fn restrict(&self, lo: Option<i64>, hi: Option<i64>) -> Self {
        let mut s = Self::zero(self.n);
        for (k, m) in &self.coeffs {
            if lo.is_none_or(|l| *k >= l) && hi.is_none_or(|h| *k <= h) {
                s.coeffs.insert(*k, m.clone());
            }
        }
        for t in &self.tails {
            s.push_tail(t.restrict(lo, hi));
        }
        s
    }

    /// Degrees `>= 0`.
    pub fn plus_part(&self) -> Self {
        self.restrict(Some(0), None)
    }

    /// Degrees `< 0`.
    pub fn minus_part(&self) -> Self {
        self.restrict(None, Some(-1))
    }

    pub fn is_analytic(&self) -> bool {
        match self.support() {
            Support::Empty => true,
            Support::Range { lo, .. } => lo.is_some_and(|l| l >= 0),
        }
    }

    /// `s~(w) = s(conj w)`: coefficient `k` becomes coefficient `-k`.
    pub fn tilde(&self) -> Self {
        MatrixSymbol {
            n: self.n,
            coeffs: self.coeffs.iter().map(|(k, m)| (-k, m.clone())).collect(),
            tails: self.tails.iter().map(|t| t.tilde()).collect(),
            norm_hint: self.norm_hint,
        }
    }

    /// Pointwise adjoint: coefficient `k` becomes `coeff(-k)^*`.
    pub fn star(&self) -> Self {
        MatrixSymbol {
            n: self.n,
            coeffs: self.coeffs.iter().map(|(k, m)| (-k, m.adjoint())).collect(),
            tails: self.tails.iter().map(|t| t.star()).collect(),
            norm_hint: self.norm_hint,
        }
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        let mut s = self.clone();
        for m in s.coeffs.values_mut() {
            *m *= c;
        }
        for t in &mut s.tails {
            t.mat *= c;
        }
        s.norm_hint = self.norm_hint.map(|h| h * cabs(c));
        s
    }

    pub fn neg(&self) -> Self {
        self.scale(-cone::<T>())
    }

    /// `A s` (left) or `s A` (right) for a constant matrix `A`.
    pub fn const_mul(&self, a: &CMat<T>, side: Side) -> Result<Self> {
        if a.shape() != (self.n, self.n) {
            return Err(Error::Dimension(format!(
                "constant factor has shape {:?}, symbol block size is {}",
                a.shape(),
                self.n
            )));
        }
        let f = |m: &CMat<T>| match side {
            Side::Left => a * m,
            Side::Right => m * a,
        };
        let mut s = Self::zero(self.n);
        for (k, m) in &self.coeffs {
            s.coeffs.insert(*k, f(m));
        }
        for t in &self.tails {
            let mut t = t.clone();
            t.mat = f(&t.mat);
            s.tails.push(t);
        }
        Ok(s)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::Dimension(format!(
                "block sizes {} and {} differ",
                self.n, other.n
            )));
        }
        let mut s = self.clone();
        for (k, m) in &other.coeffs {
            s.add_coeff(*k, m.clone());
        }
        s.tails.extend(other.tails.iter().cloned());
        s.norm_hint = match (self.norm_hint, other.norm_hint) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        };
        Ok(s)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    /// Explicit copy of the coefficients on `[lo, hi]`.
    pub fn materialize(&self, lo: i64, hi: i64) -> Self {
        let mut s = Self::zero(self.n);
        for k in lo..=hi {
            let c = self.coeff(k);
            if c.iter().any(|z| *z != czero()) {
                s.coeffs.insert(k, c);
            }
        }
        s
    }

    /// Cauchy product. Symbols with unbounded support are cut to
    /// `[-trunc, trunc]` first; without `trunc` that is an error.
    pub fn mul(&self, other: &Self, trunc: Option<usize>) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::Dimension(format!(
                "block sizes {} and {} differ",
                self.n, other.n
            )));
        }
        let a = self.bounded(trunc)?;
        let b = other.bounded(trunc)?;
        let mut s = Self::zero(self.n);
        for (i, ma) in &a.coeffs {
            for (j, mb) in &b.coeffs {
                s.add_coeff(i + j, ma * mb);
            }
        }
        if let (Some(x), Some(y)) = (self.norm_hint, other.norm_hint) {
            if !self.has_tail() && !other.has_tail() {
                s.norm_hint = Some(x * y);
            }
        }
        Ok(s)
    }

    fn bounded(&self, trunc: Option<usize>) -> Result<Self> {
        match self.support() {
            Support::Empty => Ok(Self::zero(self.n)),
            Support::Range {
                lo: Some(_),
                hi: Some(_),
            } if !self.has_tail() => Ok(self.clone()),
            Support::Range { lo, hi } => {
                let d = trunc.ok_or_else(|| {
                    Error::SupportOverflow(
                        "product of symbols with unbounded support needs a truncation degree".into(),
                    )
                })? as i64;
                let l = lo.map_or(-d, |l| l.max(-d));
                let h = hi.map_or(d, |h| h.min(d));
                Ok(self.materialize(l, h))
            }
        }
    }

    /// `sum_k coeff(k) zeta_k(p)` with `zeta_k(p) = p^k` (k >= 0) and
    /// `conj(p)^|k|` (k < 0). On the circle this is the boundary value; in the
    /// disk it is the harmonic extension.
    pub fn value_at(&self, p: Complex<T>) -> CMat<T> {
        let mut v = zeros(self.n, self.n);
        for (k, m) in &self.coeffs {
            v += m * zeta(p, *k);
        }
        for t in &self.tails {
            if !matches!(t.support(), Support::Empty) {
                v += t.value_at(p);
            }
        }
        v
    }

    /// Value on the circle at `e^{i theta}`.
    pub fn boundary_value(&self, theta: T) -> CMat<T> {
        self.value_at(cis(theta))
    }

    /// Harmonic (Poisson) extension at `z`, using closed forms for tails.
    pub fn harmonic_ext(&self, z: &DiskPoint<T>) -> CMat<T> {
        self.value_at(z.z())
    }

    /// Harmonic extension by a truncated coefficient series. Tails with a
    /// geometric decay certificate are cut at the degree that guarantees
    /// `tol`; the others use their closed form.
    pub fn harmonic_ext_series(&self, z: &DiskPoint<T>, tol: T) -> Result<CMat<T>> {
        let p = z.z();
        let rz = z.modulus();
        let mut v = zeros(self.n, self.n);
        for (k, m) in &self.coeffs {
            v += m * zeta(p, *k);
        }
        for t in &self.tails {
            match t.rule.decay() {
                Some((c, r)) => {
                    let d = cutoff_degree(c * frob(&t.mat).max(T::one()), r, rz, tol)?;
                    let (lo, hi) = match t.support() {
                        Support::Empty => continue,
                        Support::Range { lo, hi } => (
                            lo.map_or(-(d as i64), |l| l.max(-(d as i64))),
                            hi.map_or(d as i64, |h| h.min(d as i64)),
                        ),
                    };
                    for k in lo..=hi {
                        v += t.coeff(k) * zeta(p, k);
                    }
                }
                // slowly decaying tails: the closed form is exact
                None => v += t.value_at(p),
            }
        }
        Ok(v)
    }

    /// Sup norm over the circle: `norm_hint` if present, otherwise the largest
    /// spectral norm over `samples` equispaced midpoints.
    pub fn sup_norm(&self, samples: usize) -> T {
        if let Some(h) = self.norm_hint {
            return h;
        }
        if !self.has_tail() && self.coeffs.is_empty() {
            return T::zero();
        }
        let h = lit::<T>(std::f64::consts::TAU / samples as f64);
        let mut best = T::zero();
        for j in 0..samples {
            let th = h * (lit::<T>(j as f64) + lit(0.5));
            let s = spectral_norm(&self.boundary_value(th));
            if s > best {
                best = s;
            }
        }
        best
    }

    /// Bound on the squared L2 mass of the coefficients outside `[-d, d]`.
    pub fn tail_l2_sq(&self, d: i64) -> T {
        let mut acc = T::zero();
        for (k, m) in &self.coeffs {
            if k.abs() > d {
                let f = frob(m);
                acc += f * f;
            }
        }
        for t in &self.tails {
            let s = t.l2_tail_sq(d).sqrt();
            acc += s * s;
        }
        acc
    }

    /// Degree that brings the geometric tails below `tol` at radius `r`
    /// (`None` when some tail has no decay certificate).
    pub fn series_cutoff(&self, r: T, tol: T) -> Option<usize> {
        let mut d = self.max_degree().unwrap_or(0).unsigned_abs() as usize;
        if self.max_degree().is_none() {
            d = self
                .coeffs
                .keys()
                .map(|k| k.unsigned_abs() as usize)
                .max()
                .unwrap_or(0);
        }
        for t in &self.tails {
            let (c, q) = t.rule.decay()?;
            let need = cutoff_degree(c * frob(&t.mat).max(T::one()), q, r, tol).ok()?;
            d = d.max(need);
        }
        Some(d)
    }
}

/// `D = ceil(log(tol (1 - r s) / C) / log(r s))` so that
/// `sum_{k > D} C (r s)^k <= tol`.
pub fn cutoff_degree<T: Real>(c: T, r: T, s: T, tol: T) -> Result<usize> {
    let rho = r * s;
    if rho <= T::zero() {
        return Ok(1);
    }
    if rho >= T::one() {
        return Err(Error::NonConvergence(format!(
            "decay rate {} does not make the series converge",
            to_f64(rho)
        )));
    }
    let d = (tol * (T::one() - rho) / c).ln() / rho.ln();
    let d = to_f64(d).ceil().max(1.0);
    if d > 1e7 {
        return Err(Error::NonConvergence(format!(
            "series cutoff {d} exceeds the supported range"
        )));
    }
    Ok(d as usize)
}
