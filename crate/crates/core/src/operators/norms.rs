use super::TruncatedOperator;
use crate::error::{Error, Result};
use crate::scalar::*;

/// Above this size `op_norm` switches from a full SVD to power iteration.
pub const SVD_LIMIT: usize = 1024;

/// Default relative threshold for numerical rank.
pub const RANK_TOL: f64 = 1e-9;

/// Spectral norm with a two-sided bound. For the SVD path the bounds coincide.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormEstimate<T: Real> {
    pub value: T,
    pub lower: T,
    pub upper: T,
    pub iterations: usize,
}

impl<T: Real> TruncatedOperator<T> {
    pub fn singular_values(&self) -> Vec<T> {
        crate::linalg::singular_values(&self.data)
    }

    pub fn op_norm(&self) -> Result<T> {
        Ok(self.op_norm_estimate()?.value)
    }

    pub fn op_norm_estimate(&self) -> Result<NormEstimate<T>> {
        if self.dim() <= SVD_LIMIT {
            let s = self.singular_values().first().copied().unwrap_or(T::zero());
            return Ok(NormEstimate {
                value: s,
                lower: s,
                upper: s,
                iterations: 0,
            });
        }
        power_norm(&self.data, 20_000, lit(1e-15))
    }

    /// Number of singular values above `tol * sigma_max` (default `1e-9`).
    pub fn num_rank(&self, tol: Option<T>) -> usize {
        let sv = self.singular_values();
        let Some(&top) = sv.first() else { return 0 };
        if top == T::zero() {
            return 0;
        }
        let cut = top * tol.unwrap_or(lit(RANK_TOL));
        sv.iter().filter(|&&s| s > cut).count()
    }
}

/// Power iteration on `X^* X`.
///
/// The lower bound is the Rayleigh value, which every unit vector certifies.
/// The upper bound is `min(||X||_F, sqrt(||X||_1 ||X||_inf))`, tightened by
/// the Rayleigh residual once the iteration has converged.
pub fn power_norm<T: Real>(x: &CMat<T>, max_iter: usize, rtol: T) -> Result<NormEstimate<T>> {
    let d = x.ncols();
    if d == 0 || x.nrows() == 0 {
        return Ok(NormEstimate {
            value: T::zero(),
            lower: T::zero(),
            upper: T::zero(),
            iterations: 0,
        });
    }
    let col_sum = (0..d)
        .map(|j| x.column(j).iter().fold(T::zero(), |a, z| a + cabs(*z)))
        .fold(T::zero(), |a, b| if b > a { b } else { a });
    let row_sum = (0..x.nrows())
        .map(|i| x.row(i).iter().fold(T::zero(), |a, z| a + cabs(*z)))
        .fold(T::zero(), |a, b| if b > a { b } else { a });
    let fro = frob(x);
    let mut upper = (col_sum * row_sum).sqrt();
    if fro < upper {
        upper = fro;
    }
    if fro == T::zero() {
        return Ok(NormEstimate {
            value: T::zero(),
            lower: T::zero(),
            upper: T::zero(),
            iterations: 0,
        });
    }
    // deterministic start with no special alignment
    let mut v = CVec::<T>::from_fn(d, |i, _| cx(1.0 + (i as f64 * 0.618_033_988_7).fract(), 0.0));
    let nv = vec_norm(&v);
    v /= creal(nv);
    let mut lambda = T::zero();
    for it in 1..=max_iter {
        let y = x * &v;
        let b = x.adjoint() * &y;
        let lam = vec_norm(&y);
        let lam = lam * lam;
        let res = vec_norm(&(&b - &v * creal(lam)));
        let nb = vec_norm(&b);
        if nb == T::zero() {
            break;
        }
        let done = res <= rtol * lam || (lam - lambda).abs() <= rtol * lam;
        lambda = lam;
        v = b / creal(nb);
        if done && it > 3 {
            let value = lambda.sqrt();
            let up = (lambda + res).sqrt();
            return Ok(NormEstimate {
                value,
                lower: value,
                upper: if up < upper { up } else { upper },
                iterations: it,
            });
        }
    }
    Err(Error::NonConvergence(format!(
        "power iteration stalled at {} after {max_iter} steps (upper bound {})",
        to_f64(lambda.sqrt()),
        to_f64(upper)
    )))
}
