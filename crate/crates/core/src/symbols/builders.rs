use super::{DiskPoint, MatrixSymbol, TailRule, TailTerm};
use crate::error::{Error, Result};
use crate::scalar::*;
use num_complex::Complex;

fn check_disk<T: Real>(a: Complex<T>, what: &str) -> Result<()> {
    if cabs(a) < T::one() {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "{what} parameter must lie in the open unit disk, got modulus {}",
            to_f64(cabs(a))
        )))
    }
}

fn scalar_tail<T: Real>(rule: TailRule<T>) -> MatrixSymbol<T> {
    MatrixSymbol::zero(1)
        .with_tail(TailTerm::new(rule, identity(1)))
        .expect("1x1 tail on a 1x1 symbol")
}

/// `w I_n`.
pub fn shift<T: Real>(n: usize) -> MatrixSymbol<T> {
    MatrixSymbol::monomial(1, identity(n)).expect("square identity")
}

/// `conj(w) I_n`.
pub fn coshift<T: Real>(n: usize) -> MatrixSymbol<T> {
    MatrixSymbol::monomial(-1, identity(n)).expect("square identity")
}

/// Analytic Blaschke factor `b_a(w) = (w - a)/(1 - conj(a) w)`.
pub fn blaschke<T: Real>(a: Complex<T>) -> Result<MatrixSymbol<T>> {
    check_disk(a, "blaschke")?;
    Ok(scalar_tail(TailRule::Blaschke { a }).with_norm_hint(T::one()))
}

/// Conjugate of the Blaschke factor, `conj(b_a)`: coefficient `-k` of
/// `conj(b_a)` is `conj(b_a^(k))`.
pub fn blaschke_conj<T: Real>(a: Complex<T>) -> Result<MatrixSymbol<T>> {
    Ok(blaschke(a)?.star())
}

/// `exp(mass (w + p)/(w - p))` for a unimodular point `p = e^{i theta}`.
pub fn singular_inner<T: Real>(theta: T, mass: T) -> Result<MatrixSymbol<T>> {
    if !(mass > T::zero()) {
        return Err(Error::Parameter("singular inner mass must be positive".into()));
    }
    Ok(scalar_tail(TailRule::singular_inner(cis(theta), mass)).with_norm_hint(T::one()))
}

pub fn singular_inner_conj<T: Real>(theta: T, mass: T) -> Result<MatrixSymbol<T>> {
    Ok(singular_inner(theta, mass)?.star())
}

/// Indicator of the upper half circle `{Im w > 0}`.
pub fn half_indicator<T: Real>() -> MatrixSymbol<T> {
    scalar_tail(TailRule::HalfIndicator).with_norm_hint(T::one())
}

/// `sum_{k >= 1} q^{k-1} w^k` (analytic) or the same series in `conj(w)`.
pub fn geometric<T: Real>(q: Complex<T>, analytic: bool) -> Result<MatrixSymbol<T>> {
    check_disk(q, "geometric")?;
    let hint = T::one() / (T::one() - cabs(q));
    Ok(scalar_tail(TailRule::Geometric { q, analytic }).with_norm_hint(hint))
}

/// Moebius automorphism `phi_z(w) = (w - z)/(1 - conj(z) w)` times `I_n`.
pub fn mobius_phi<T: Real>(z: &DiskPoint<T>, n: usize) -> MatrixSymbol<T> {
    lift(&blaschke(z.z()).expect("disk point is inside the disk"), &identity(n))
        .expect("scalar symbol")
}

/// Normalized reproducing kernel coefficients `sqrt(1 - |z|^2) conj(z)^m`,
/// `0 <= m < len`.
pub fn kernel_kz<T: Real>(z: &DiskPoint<T>, len: usize) -> CVec<T> {
    let zc = z.z().conj();
    let s = (T::one() - cabs2(z.z())).sqrt();
    let mut v = CVec::zeros(len);
    let mut p = creal(s);
    for m in 0..len {
        v[m] = p;
        p *= zc;
    }
    v
}

/// Scalar symbol `s` times a constant matrix `m`: the block symbol `s(w) M`.
pub fn lift<T: Real>(s: &MatrixSymbol<T>, m: &CMat<T>) -> Result<MatrixSymbol<T>> {
    if s.n() != 1 {
        return Err(Error::Dimension("lift expects a scalar symbol".into()));
    }
    if !m.is_square() {
        return Err(Error::Dimension("lift expects a square matrix".into()));
    }
    let n = m.nrows();
    let mut out = MatrixSymbol::laurent(n, s.explicit().iter().map(|(k, c)| (*k, m * c[(0, 0)])))?;
    for t in s.tails() {
        let mut t = t.clone();
        t.mat = m * t.mat[(0, 0)];
        out = out.with_tail(t)?;
    }
    if let Some(h) = s.norm_hint() {
        out = out.with_norm_hint(h * spectral_norm(m));
    }
    Ok(out)
}

/// Block-diagonal symbol from scalar entries.
pub fn diag<T: Real>(entries: &[MatrixSymbol<T>]) -> Result<MatrixSymbol<T>> {
    let n = entries.len();
    let mut out = MatrixSymbol::zero(n);
    for (i, e) in entries.iter().enumerate() {
        let mut m = zeros(n, n);
        m[(i, i)] = cone();
        out = out.add(&lift(e, &m)?)?;
    }
    let hint = entries
        .iter()
        .map(|e| e.norm_hint())
        .try_fold(T::zero(), |acc, h| h.map(|h| if h > acc { h } else { acc }));
    out.norm_hint = hint;
    Ok(out)
}

/// Symbol whose `(i, j)` entry is the scalar symbol `entries[i][j]`.
pub fn from_entries<T: Real>(entries: &[Vec<MatrixSymbol<T>>]) -> Result<MatrixSymbol<T>> {
    let n = entries.len();
    let mut out = MatrixSymbol::zero(n);
    for (i, row) in entries.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Dimension("entry grid must be square".into()));
        }
        for (j, e) in row.iter().enumerate() {
            let mut m = zeros(n, n);
            m[(i, j)] = cone();
            out = out.add(&lift(e, &m)?)?;
        }
    }
    out.norm_hint = None;
    Ok(out)
}

/// Laurent polynomial of degree `deg` with coefficients uniform in the unit
/// square, scaled by `1/(2 deg + 1)`.
pub fn random_laurent<T: Real, R: rand::Rng + ?Sized>(rng: &mut R, n: usize, deg: i64) -> MatrixSymbol<T> {
    let scale = 1.0 / (2 * deg + 1) as f64;
    let coeffs: Vec<(i64, CMat<T>)> = (-deg..=deg)
        .map(|k| {
            let m = CMat::from_fn(n, n, |_, _| {
                cx(
                    rng.random_range(-1.0..1.0) * scale,
                    rng.random_range(-1.0..1.0) * scale,
                )
            });
            (k, m)
        })
        .collect();
    MatrixSymbol::laurent(n, coeffs).expect("square coefficients")
}
