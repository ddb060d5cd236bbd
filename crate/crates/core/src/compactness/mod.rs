//! Compactness diagnostics for `H_Phi T_Psi` near the circle.
//!
//! Every quantity here reduces to small `n x n` matrices. For a symbol `F`
//! with co-analytic part `F_- = sum_{k >= 1} A_k conj(w)^k`, the columns
//! `H_F k_z e_i` stack into blocks `sqrt(1 - |z|^2) B_l` with
//! `B_l = sum_{k > l} A_k conj(z)^(k - l - 1)`, and their Gram matrix is
//! `|F_- - F_-(z)|^2(z)`. Symbols without a decay certificate fall back to
//! boundary quadrature of the same harmonic extension.

mod gamma;
mod quad;
mod sweep;

pub use gamma::{gamma1, gamma2, GammaOptions, GammaResult};
pub use sweep::{radial_sweep, DiagnosticReport, DiagnosticRow, Quantity, RayTrend, SweepGrid, SweepOptions};

use crate::error::{Error, Result};
use crate::linalg::Svd;
use crate::operators::{hankel_trunc, rank_one_sum, toeplitz_trunc, block_vector};
use crate::scalar::*;
use crate::symbols::{from_entries, kernel_kz, mobius_phi, DiskPoint, MatrixSymbol};

/// Largest degree a decay certificate may ask for before the series path is
/// abandoned.
const SERIES_DEGREE_CAP: usize = 1 << 16;

/// Relative tolerance of the quadrature fallback.
const QUAD_TOL: f64 = 1e-11;

/// `N(z) = max(64, ceil(12 / (1 - |z|)))`.
pub fn truncation_policy<T: Real>(r: T) -> usize {
    let r = to_f64(r);
    // shave rounding so that 12 / 0.1 is 120, not 121
    let n = (12.0 / (1.0 - r) * (1.0 - 1e-12)).ceil();
    if n.is_finite() && n < 1e9 {
        (n as usize).max(64)
    } else {
        usize::MAX / 4
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GramMethod {
    /// Exact or certified coefficient series.
    Series,
    /// Boundary quadrature of the harmonic extension.
    Quadrature,
    /// Coefficient series cut at the truncation policy, bound a posteriori.
    Truncated,
}

/// `(H_F K_z)^* (H_F K_z) = |F_- - F_-(z)|^2(z)` with a bound on the trace
/// norm of its error.
#[derive(Debug, Clone)]
pub struct KernelGram<T: Real> {
    pub gram: CMat<T>,
    pub degree: usize,
    pub bound: T,
    pub method: GramMethod,
}

impl<T: Real> KernelGram<T> {
    pub fn trace(&self) -> T {
        (0..self.gram.nrows()).fold(T::zero(), |a, i| a + self.gram[(i, i)].re)
    }
}

/// Degree carrying all of `s` up to an L1 tail of `1e-15 (1 - r)`, if some
/// certificate provides it.
fn certified_degree<T: Real>(s: &MatrixSymbol<T>, r: T) -> Option<usize> {
    if let Some(d) = s.max_degree() {
        return Some(d.unsigned_abs() as usize);
    }
    let tol = lit::<T>(1e-15) * (T::one() - r);
    s.series_cutoff(T::one(), tol).filter(|&d| d <= SERIES_DEGREE_CAP)
}

/// Stack of `sqrt(1 - |z|^2) B_l`, `l < d`, from `a[k - 1] = A_k`.
fn stack_from_coeffs<T: Real>(a: &[CMat<T>], z: &DiskPoint<T>, n: usize) -> CMat<T> {
    let d = a.len();
    let zc = z.z().conj();
    let s = creal((T::one() - cabs2(z.z())).sqrt());
    let mut out = zeros::<T>(d * n, n);
    let mut b = zeros::<T>(n, n);
    for l in (0..d).rev() {
        b = &a[l] + &b * zc;
        out.view_mut((l * n, 0), (n, n)).copy_from(&(&b * s));
    }
    out
}

fn minus_coeffs<T: Real>(f: &MatrixSymbol<T>, d: usize) -> Vec<CMat<T>> {
    (1..=d as i64).map(|k| f.coeff(-k)).collect()
}

/// Trace-norm bound on the Gram error from an L2 coefficient tail `tail`.
fn apriori_bound<T: Real>(stack: &CMat<T>, tail: T, r: T) -> T {
    let e = (T::one() - r * r).sqrt() * lit::<T>(2.0) * tail / (T::one() - r);
    lit::<T>(2.0) * frob(stack) * e + e * e
}

/// `|F_- - F_-(z)|^2(z)` for any symbol `F` (only `F_-` is used).
pub fn kernel_gram<T: Real>(f: &MatrixSymbol<T>, z: &DiskPoint<T>) -> KernelGram<T> {
    let fm = f.minus_part();
    let n = fm.n();
    let r = z.modulus();
    if let Some(d) = certified_degree(&fm, r) {
        let stack = stack_from_coeffs(&minus_coeffs(&fm, d), z, n);
        let bound = if fm.has_tail() {
            apriori_bound(&stack, fm.tail_l2_sq(d as i64).sqrt(), r)
        } else {
            T::zero()
        };
        return KernelGram {
            gram: stack.adjoint() * &stack,
            degree: d,
            bound,
            method: GramMethod::Series,
        };
    }
    let (gram, err) = quad::boundary_gram(&fm, z, QUAD_TOL);
    KernelGram {
        gram,
        degree: 0,
        bound: err * lit::<T>((n as f64).sqrt()),
        method: GramMethod::Quadrature,
    }
}

/// `(Psi_-)~*`: the co-analytic symbol whose Hankel operator is `H_Psi^*`.
fn adjoint_partner<T: Real>(psi: &MatrixSymbol<T>) -> MatrixSymbol<T> {
    psi.minus_part().star().tilde()
}

fn check_pair<T: Real>(phi: &MatrixSymbol<T>, psi: &MatrixSymbol<T>) -> Result<()> {
    if phi.n() != psi.n() {
        return Err(Error::Dimension(format!("block sizes {} and {} differ", phi.n(), psi.n())));
    }
    Ok(())
}

fn re_trace<T: Real>(m: &CMat<T>) -> T {
    (0..m.nrows().min(m.ncols())).fold(T::zero(), |a, i| a + m[(i, i)].re)
}

/// A value with a bound on its error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounded<T> {
    pub value: T,
    pub bound: T,
}

/// `trace[ |Phi_- - Phi_-(z)|^2(z) |(Psi_-)~* - (Psi_-)~*(zbar)|^2(zbar) ]`.
pub fn c1_trace<T: Real>(phi: &MatrixSymbol<T>, psi: &MatrixSymbol<T>, z: &DiskPoint<T>) -> Result<Bounded<T>> {
    check_pair(phi, psi)?;
    let p = kernel_gram(phi, z);
    let q = kernel_gram(&adjoint_partner(psi), &z.conj());
    let value = re_trace(&(&p.gram * &q.gram));
    let bound = p.bound * q.trace() + p.trace() * q.bound + p.bound * q.bound;
    Ok(Bounded {
        value: if value < T::zero() { T::zero() } else { value },
        bound,
    })
}

/// Coefficients `A_k`, `k = 1..=d_phi`, of
/// `F = (Phi_- Psi_+)_- + Phi_- Psi_-(z)`.
fn c2_coeffs<T: Real>(
    phi: &MatrixSymbol<T>,
    psi: &MatrixSymbol<T>,
    z: &DiskPoint<T>,
    d_phi: usize,
    d_psi: usize,
) -> Vec<CMat<T>> {
    let pm = minus_coeffs(phi, d_phi);
    let pp: Vec<CMat<T>> = (0..=d_psi as i64).map(|j| psi.coeff(j)).collect();
    let psi_mz = psi.minus_part().value_at(z.z());
    (1..=d_phi)
        .map(|k| {
            let mut c = &pm[k - 1] * &psi_mz;
            for (j, b) in pp.iter().enumerate().take(d_phi - k + 1) {
                c += &pm[k + j - 1] * b;
            }
            c
        })
        .collect()
}

/// Gram matrix of the columns `H_Phi T_Psi k_z e_i`.
pub fn product_kernel_gram<T: Real>(
    phi: &MatrixSymbol<T>,
    psi: &MatrixSymbol<T>,
    z: &DiskPoint<T>,
) -> Result<KernelGram<T>> {
    check_pair(phi, psi)?;
    let n = phi.n();
    let r = z.modulus();
    let fm = phi.minus_part();
    let pp = psi.plus_part();
    let policy = truncation_policy(r);
    let (dphi, cphi) = certified_degree(&fm, r).map_or((policy, false), |d| (d, true));
    let (dpsi, cpsi) = certified_degree(&pp, r).map_or((policy, false), |d| (d, true));
    let gram_at = |a: usize, b: usize| {
        let s = stack_from_coeffs(&c2_coeffs(&fm, psi, z, a, b), z, n);
        s.adjoint() * s
    };
    let gram = gram_at(dphi, dpsi);
    if cphi && cpsi {
        let exact = !fm.has_tail() && !pp.has_tail();
        let bound = if exact {
            T::zero()
        } else {
            lit::<T>(1e-13) * (T::one() + re_trace(&gram))
        };
        return Ok(KernelGram {
            gram,
            degree: dphi,
            bound,
            method: GramMethod::Series,
        });
    }
    let coarse = gram_at(dphi.div_ceil(2), dpsi.div_ceil(2));
    let bound = frob(&(&gram - coarse)) * lit::<T>((n as f64).sqrt());
    Ok(KernelGram {
        gram,
        degree: dphi.max(dpsi),
        bound,
        method: GramMethod::Truncated,
    })
}

/// Trace of the harmonic extension at `z` of
/// `|(Phi_- Psi_+)_-(w) - (Phi_- Psi_+)_-(z) + (Phi_-(w) - Phi_-(z)) Psi_-(z)|^2`.
pub fn c2_trace<T: Real>(phi: &MatrixSymbol<T>, psi: &MatrixSymbol<T>, z: &DiskPoint<T>) -> Result<Bounded<T>> {
    let g = product_kernel_gram(phi, psi, z)?;
    let v = g.trace();
    Ok(Bounded {
        value: if v < T::zero() { T::zero() } else { v },
        bound: g.bound,
    })
}

/// `|phi_- - phi_-(z)|^2(z) |psi_- - psi_-(z)|^2(z)` for scalar symbols.
pub fn zheng_product<T: Real>(phi: &MatrixSymbol<T>, psi: &MatrixSymbol<T>, z: &DiskPoint<T>) -> Result<Bounded<T>> {
    if phi.n() != 1 || psi.n() != 1 {
        return Err(Error::Dimension("the scalar criterion needs 1 x 1 symbols".into()));
    }
    let a = kernel_gram(phi, z);
    let b = kernel_gram(psi, z);
    let (x, y) = (a.trace(), b.trace());
    Ok(Bounded {
        value: x * y,
        bound: a.bound * y + x * b.bound + a.bound * b.bound,
    })
}

/// `(trace |Phi_- - Phi_-(z)|^2(z), ||H_Phi H_{conj(phi_zbar)}||_F^2)` with
/// the second value from truncations of size `len`.
pub fn kernel_trace_crosscheck<T: Real>(phi: &MatrixSymbol<T>, z: &DiskPoint<T>, len: usize) -> Result<(T, T)> {
    let series = kernel_gram(phi, z).trace();
    let h = hankel_trunc(phi, len)?;
    let hz = hankel_trunc(&mobius_phi(&z.conj(), phi.n()).star(), len)?;
    let f = h.compose(&hz)?.frob_norm();
    Ok((series, f * f))
}

/// Hermitian square root of a positive semidefinite matrix.
pub(crate) fn psd_sqrt<T: Real>(m: &CMat<T>) -> CMat<T> {
    let h = (m + m.adjoint()) * creal(lit::<T>(0.5));
    let svd = Svd::new(&h);
    let mut v = svd.v.clone();
    for (j, s) in svd.s.iter().enumerate() {
        v.column_mut(j).scale_mut(s.sqrt().sqrt());
    }
    &v * v.adjoint()
}

/// `|| sum_i H_Phi(k_z e_i) (x) H_Psi^*(k_zbar e_i) ||`.
pub fn omega_norm<T: Real>(phi: &MatrixSymbol<T>, psi: &MatrixSymbol<T>, z: &DiskPoint<T>) -> Result<Bounded<T>> {
    check_pair(phi, psi)?;
    let p = kernel_gram(phi, z);
    let q = kernel_gram(&adjoint_partner(psi), &z.conj());
    let v = spectral_norm(&(psd_sqrt(&p.gram) * psd_sqrt(&q.gram)));
    // ||P^1/2 Q^1/2||^2 = ||Q^1/2 P Q^1/2|| moves by at most the Gram errors
    let b2 = p.bound * spectral_norm(&q.gram) + spectral_norm(&p.gram) * q.bound + p.bound * q.bound;
    Ok(Bounded {
        value: v,
        bound: (v * v + b2).sqrt() - v,
    })
}

/// `|| sum_i (H_Phi T_Psi)(k_z e_i) (x) k_zbar e_i ||`.
pub fn product_kernel_norm<T: Real>(
    phi: &MatrixSymbol<T>,
    psi: &MatrixSymbol<T>,
    z: &DiskPoint<T>,
) -> Result<Bounded<T>> {
    let g = product_kernel_gram(phi, psi, z)?;
    let l = spectral_norm(&g.gram);
    let v = l.sqrt();
    Ok(Bounded {
        value: v,
        bound: (l + g.bound).sqrt() - v,
    })
}

fn kernel_columns<T: Real>(z: &DiskPoint<T>, n: usize, len: usize) -> Vec<CVec<T>> {
    let k = kernel_kz(z, len);
    (0..n).map(|i| block_vector(&k, i, n)).collect()
}

/// [`omega_norm`] from truncated operators of size `len`.
pub fn omega_norm_truncated<T: Real>(
    phi: &MatrixSymbol<T>,
    psi: &MatrixSymbol<T>,
    z: &DiskPoint<T>,
    len: usize,
) -> Result<T> {
    check_pair(phi, psi)?;
    let n = phi.n();
    let hp = hankel_trunc(phi, len)?;
    let hq = hankel_trunc(psi, len)?.adjoint();
    let kz = kernel_columns(z, n, len);
    let kzb = kernel_columns(&z.conj(), n, len);
    let pairs: Vec<_> = kz
        .iter()
        .zip(&kzb)
        .map(|(a, b)| Ok((hp.apply(a)?, hq.apply(b)?)))
        .collect::<Result<_>>()?;
    rank_one_sum(n, len, &pairs)?.op_norm()
}

/// [`product_kernel_norm`] from truncated operators of size `len`.
pub fn product_kernel_norm_truncated<T: Real>(
    phi: &MatrixSymbol<T>,
    psi: &MatrixSymbol<T>,
    z: &DiskPoint<T>,
    len: usize,
) -> Result<T> {
    check_pair(phi, psi)?;
    let n = phi.n();
    let x = hankel_trunc(phi, len)?.compose(&toeplitz_trunc(psi, len)?)?;
    let kz = kernel_columns(z, n, len);
    let kzb = kernel_columns(&z.conj(), n, len);
    let pairs: Vec<_> = kz
        .iter()
        .zip(&kzb)
        .map(|(a, b)| Ok((x.apply(a)?, b.clone())))
        .collect::<Result<_>>()?;
    rank_one_sum(n, len, &pairs)?.op_norm()
}

/// Scalar pairs placed along the first row of `Phi` and the first column of
/// `Psi`, so that the `(0, 0)` entry of `H_Phi T_Psi` is the sum of the
/// scalar products. `n` defaults to the number of pairs.
pub fn embed_sum<T: Real>(
    pairs: &[(MatrixSymbol<T>, MatrixSymbol<T>)],
    n: Option<usize>,
) -> Result<(MatrixSymbol<T>, MatrixSymbol<T>)> {
    let n = n.unwrap_or(pairs.len());
    if pairs.is_empty() || pairs.len() > n {
        return Err(Error::Parameter(format!("{} pairs do not fit in {} x {} blocks", pairs.len(), n, n)));
    }
    if pairs.iter().any(|(a, b)| a.n() != 1 || b.n() != 1) {
        return Err(Error::Dimension("embed_sum takes scalar symbols".into()));
    }
    let zero = MatrixSymbol::<T>::zero(1);
    let mut phi = vec![vec![zero.clone(); n]; n];
    let mut psi = vec![vec![zero; n]; n];
    for (i, (a, b)) in pairs.iter().enumerate() {
        phi[0][i] = a.clone();
        psi[i][0] = b.clone();
    }
    Ok((from_entries(&phi)?, from_entries(&psi)?))
}

#[cfg(test)]
mod tests;
