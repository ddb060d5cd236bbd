//! Periodic trapezoid rules on the circle.

use super::{DiskPoint, MatrixSymbol};
use crate::error::{Error, Result};
use crate::scalar::*;

pub const DEFAULT_NODES: usize = 2048;
pub const MAX_NODES: usize = 1 << 20;

/// `s^(k)` from `m` trapezoid nodes `t_j = 2 pi j / m` of a circle function.
pub fn fourier_coeff<T: Real, F>(f: F, k: i64, m: usize) -> CMat<T>
where
    F: Fn(T) -> CMat<T>,
{
    let h = std::f64::consts::TAU / m as f64;
    let mut acc: Option<CMat<T>> = None;
    for j in 0..m {
        let t = lit::<T>(h * j as f64);
        let w = cis(lit::<T>(-(k as f64) * h * j as f64));
        let v = f(t) * w;
        acc = Some(match acc {
            Some(a) => a + v,
            None => v,
        });
    }
    acc.expect("m > 0") / creal(lit::<T>(m as f64))
}

/// Poisson integral of the symbol's boundary values at `z`.
///
/// Substituting `w = (u + z)/(1 + conj(z) u)` turns the Poisson kernel into
/// the uniform measure, so the rule samples midpoints in `u` and doubles the
/// node count until successive values agree within `tol` twice in a row.
pub fn poisson<T: Real>(
    s: &MatrixSymbol<T>,
    z: &DiskPoint<T>,
    tol: T,
    max_nodes: usize,
) -> Result<CMat<T>> {
    let zz = z.z();
    let eval = |m: usize| {
        let h = std::f64::consts::TAU / m as f64;
        let mut acc = zeros::<T>(s.n(), s.n());
        for j in 0..m {
            let u = cis(lit::<T>(h * (j as f64 + 0.5)));
            let w = (u + zz) / (cone::<T>() + zz.conj() * u);
            acc += s.value_at(w);
        }
        acc / creal(lit::<T>(m as f64))
    };
    // step functions can make two neighbours agree by accident, so require
    // two agreeing doublings in a row
    let mut m = 64;
    let mut prev = eval(m);
    let mut streak = 0;
    while m < max_nodes {
        m *= 2;
        let cur = eval(m);
        let diff = max_abs(&(&cur - &prev));
        prev = cur;
        streak = if diff <= tol { streak + 1 } else { 0 };
        if streak == 2 {
            return Ok(prev);
        }
    }
    Err(Error::NonConvergence(format!(
        "Poisson quadrature did not settle within {max_nodes} nodes"
    )))
}

/// Mean of `f` over `m` midpoints of the circle after the Moebius change of
/// variable centered at `z`, i.e. a Poisson average of `f`.
pub fn poisson_mean<T: Real, F>(z: &DiskPoint<T>, m: usize, f: F) -> T
where
    F: Fn(num_complex::Complex<T>) -> T,
{
    let zz = z.z();
    let h = std::f64::consts::TAU / m as f64;
    let mut acc = T::zero();
    for j in 0..m {
        let u = cis(lit::<T>(h * (j as f64 + 0.5)));
        let w = (u + zz) / (cone::<T>() + zz.conj() * u);
        acc += f(w);
    }
    acc / lit(m as f64)
}
