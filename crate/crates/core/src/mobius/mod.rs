//! Moebius defect maps
//!
//! ```text
//! Delta_z(X) = X - T_{phi_z}^* X T_{phi_z}
//! Omega_z(X) = X T_{phi_z} - T_{phi_zbar}^* X
//! ```
//!
//! on truncations, the rank-one kernels `k_z e_i`, and a registry of operator
//! identities checked on interior windows.

mod identities;

pub use identities::{
    identity_names, run_suite, verify_identity, IdentityInputs, IdentityReport, SuiteConfig,
};

use crate::error::{Error, Result};
use crate::operators::{block_vector, rank_one_sum, toeplitz_trunc, hankel_trunc, TruncatedOperator, WindowSpec};
use crate::scalar::*;
use crate::symbols::{kernel_kz, mobius_phi, DiskPoint};
use crate::wordalg::{Env, Kind, OperatorWord, Parity};

/// Extra truncation length so that the geometric tail of `phi_z` is below
/// double precision before the comparison window: `|z|^pad <= 1e-15`.
pub fn tail_padding<T: Real>(z: &DiskPoint<T>) -> usize {
    let r = to_f64(z.modulus());
    if r == 0.0 {
        0
    } else {
        (1e-15f64.ln() / r.ln()).ceil() as usize
    }
}

/// Truncations attached to one point `z`.
#[derive(Debug, Clone)]
pub struct MobiusFrame<T: Real> {
    z: DiskPoint<T>,
    n: usize,
    len: usize,
    t_phi: TruncatedOperator<T>,
    t_phi_conj: TruncatedOperator<T>,
    h_phibar: TruncatedOperator<T>,
    h_phibar_conj: TruncatedOperator<T>,
    c_z: TruncatedOperator<T>,
    c_zbar: TruncatedOperator<T>,
    k_z: Vec<CVec<T>>,
    k_zbar: Vec<CVec<T>>,
}

impl<T: Real> MobiusFrame<T> {
    pub fn new(z: DiskPoint<T>, n: usize, len: usize) -> Result<Self> {
        let zb = z.conj();
        let phi = mobius_phi(&z, n);
        let phi_c = mobius_phi(&zb, n);
        let kz = kernel_kz(&z, len);
        let kzb = kernel_kz(&zb, len);
        let k_z: Vec<CVec<T>> = (0..n).map(|i| block_vector(&kz, i, n)).collect();
        let k_zbar: Vec<CVec<T>> = (0..n).map(|i| block_vector(&kzb, i, n)).collect();
        let proj = |k: &[CVec<T>]| -> Result<TruncatedOperator<T>> {
            let pairs: Vec<_> = k.iter().map(|v| (v.clone(), v.clone())).collect();
            rank_one_sum(n, len, &pairs)
        };
        Ok(MobiusFrame {
            z,
            n,
            len,
            t_phi: toeplitz_trunc(&phi, len)?,
            t_phi_conj: toeplitz_trunc(&phi_c, len)?,
            h_phibar: hankel_trunc(&phi.star(), len)?,
            h_phibar_conj: hankel_trunc(&phi_c.star(), len)?,
            c_z: proj(&k_z)?,
            c_zbar: proj(&k_zbar)?,
            k_z,
            k_zbar,
        })
    }

    pub fn z(&self) -> &DiskPoint<T> {
        &self.z
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `T_{phi_z I}`.
    pub fn t_phi(&self) -> &TruncatedOperator<T> {
        &self.t_phi
    }

    /// `T_{phi_zbar I}`.
    pub fn t_phi_conj(&self) -> &TruncatedOperator<T> {
        &self.t_phi_conj
    }

    /// `H_{conj(phi_z) I}`.
    pub fn h_phibar(&self) -> &TruncatedOperator<T> {
        &self.h_phibar
    }

    /// `H_{conj(phi_zbar) I}`.
    pub fn h_phibar_conj(&self) -> &TruncatedOperator<T> {
        &self.h_phibar_conj
    }

    /// Projection `sum_i k_z e_i (x) k_z e_i` onto the model space of `phi_z I`.
    pub fn c_z(&self) -> &TruncatedOperator<T> {
        &self.c_z
    }

    pub fn c_zbar(&self) -> &TruncatedOperator<T> {
        &self.c_zbar
    }

    pub fn k_z(&self) -> &[CVec<T>] {
        &self.k_z
    }

    pub fn k_zbar(&self) -> &[CVec<T>] {
        &self.k_zbar
    }

    /// Squared norm of the truncated scalar kernel, `1 - |z|^(2N)`.
    pub fn kernel_mass(&self) -> T {
        let v = &self.k_z[0];
        v.iter().map(|c| cabs2(*c)).fold(T::zero(), |a, b| a + b)
    }

    fn check(&self, x: &TruncatedOperator<T>) -> Result<()> {
        if x.n() != self.n || x.len() != self.len {
            return Err(Error::Dimension(format!(
                "operator has n={} N={}, frame has n={} N={}",
                x.n(),
                x.len(),
                self.n,
                self.len
            )));
        }
        Ok(())
    }

    pub fn delta(&self, x: &TruncatedOperator<T>) -> Result<TruncatedOperator<T>> {
        self.check(x)?;
        x.sub(&self.t_phi.adjoint().compose(x)?.compose(&self.t_phi)?)
    }

    pub fn omega(&self, x: &TruncatedOperator<T>) -> Result<TruncatedOperator<T>> {
        self.check(x)?;
        x.compose(&self.t_phi)?
            .sub(&self.t_phi_conj.adjoint().compose(x)?)
    }

    /// `Delta_zbar`, from the same cached truncations.
    pub fn delta_conj(&self, x: &TruncatedOperator<T>) -> Result<TruncatedOperator<T>> {
        self.check(x)?;
        x.sub(&self.t_phi_conj.adjoint().compose(x)?.compose(&self.t_phi_conj)?)
    }

    /// `Omega_zbar(X) = X T_{phi_zbar} - T_{phi_z}^* X`.
    pub fn omega_conj(&self, x: &TruncatedOperator<T>) -> Result<TruncatedOperator<T>> {
        self.check(x)?;
        x.compose(&self.t_phi_conj)?
            .sub(&self.t_phi.adjoint().compose(x)?)
    }
}

/// `(||sum x_i (x) y_i||_F^2, trace(W_x W_y))` with `W_x[i, j] = <x_i, x_j>`.
pub fn gram_trace_check<T: Real>(pairs: &[(CVec<T>, CVec<T>)]) -> Result<(T, T)> {
    let Some(first) = pairs.first() else {
        return Ok((T::zero(), T::zero()));
    };
    let d = first.0.len();
    let e = first.1.len();
    let mut sum = zeros::<T>(d, e);
    for (x, y) in pairs {
        if x.len() != d || y.len() != e {
            return Err(Error::Dimension("pair vectors differ in length".into()));
        }
        sum += x * y.adjoint();
    }
    let lhs = frob(&sum);
    let lhs = lhs * lhs;
    let m = pairs.len();
    let wx = CMat::<T>::from_fn(m, m, |i, j| inner(&pairs[i].0, &pairs[j].0));
    let wy = CMat::<T>::from_fn(m, m, |i, j| inner(&pairs[i].1, &pairs[j].1));
    Ok((lhs, (wx * wy).trace().re))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DefectMap {
    Delta,
    Omega,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankCheck {
    pub map: DefectMap,
    pub observed: usize,
    pub bound: usize,
}

/// Rank bound obtained by pushing `T_{phi_z}` from the right through the word.
///
/// A Toeplitz atom commutes with the carried factor up to rank `n`. A Hankel
/// atom turns `T_{phi_z}` into `T_{phi_zbar}^*` exactly and turns
/// `T_{phi_zbar}^*` back into `T_{phi_z}` up to rank `2n`.
pub fn rank_bound(word: &OperatorWord, n: usize) -> usize {
    let mut flipped = false;
    let mut bound = 0;
    for a in word.atoms().iter().rev() {
        match (a.kind, flipped) {
            (Kind::T, _) => bound += n,
            (Kind::H, false) => flipped = true,
            (Kind::H, true) => {
                bound += 2 * n;
                flipped = false;
            }
        }
    }
    bound
}

/// Numerical rank of `Delta_z` (even words) or `Omega_z` (odd words) of the
/// evaluated word on `[0, N - margin)`, against [`rank_bound`].
pub fn rank_bound_check<T: Real>(
    word: &OperatorWord,
    env: &Env<T>,
    frame: &MobiusFrame<T>,
    map: DefectMap,
    margin: usize,
) -> Result<RankCheck> {
    match (map, word.h_parity()) {
        (DefectMap::Delta, Parity::Even) | (DefectMap::Omega, Parity::Odd) => {}
        (m, p) => {
            return Err(Error::Parity(format!("{m:?} applied to a word of parity {p:?}")));
        }
    }
    let x = word.evaluate(env, frame.n(), frame.len())?;
    let d = match map {
        DefectMap::Delta => frame.delta(&x)?,
        DefectMap::Omega => frame.omega(&x)?,
    };
    let w = WindowSpec::interior(frame.len(), margin);
    let m = d.window_matrix(&w);
    Ok(RankCheck {
        map,
        observed: absolute_rank(&m, lit(1e-9)),
        bound: rank_bound(word, frame.n()),
    })
}

/// Singular values above `tol * max(1, sigma_max)`.
pub(crate) fn absolute_rank<T: Real>(m: &CMat<T>, tol: T) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let svd = crate::linalg::Svd::new(m);
    let top = svd.max();
    svd.rank(tol * if top > T::one() { top } else { T::one() })
}
