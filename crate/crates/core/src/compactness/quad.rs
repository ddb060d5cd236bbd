//! Poisson averages `P[h](z)` computed on the circle after the substitution
//! `w = (xi + z) / (1 + conj(z) xi)`, which turns the Poisson kernel at `z`
//! into the uniform measure. The integrand keeps the singularities of `h`;
//! when their positions are known the circle is cut there and each arc is
//! integrated by tanh-sinh, which tolerates logarithmic endpoint blow-up.

use crate::scalar::*;
use crate::symbols::{DiskPoint, MatrixSymbol};
use std::f64::consts::{FRAC_PI_2, TAU};

const MAX_LEVEL: u32 = 10;
const MAX_TRAPEZOID: usize = 1 << 16;

/// `(mean, error estimate)` of a matrix-valued function of the angle.
fn trapezoid<T: Real>(f: &dyn Fn(f64) -> Option<CMat<T>>, n: usize, tol: f64) -> (CMat<T>, f64) {
    let rule = |m: usize| {
        let mut acc = zeros::<T>(n, n);
        let mut used = 0usize;
        for j in 0..m {
            if let Some(v) = f(TAU * j as f64 / m as f64) {
                acc += v;
                used += 1;
            }
        }
        acc / creal(lit::<T>(used.max(1) as f64))
    };
    let mut m = 32;
    let mut prev = rule(m);
    loop {
        m *= 2;
        let cur = rule(m);
        let diff = to_f64(frob(&(&cur - &prev)));
        if diff <= tol * (1.0 + to_f64(frob(&cur))) || m >= MAX_TRAPEZOID {
            return (cur, diff);
        }
        prev = cur;
    }
}

/// Integral over `(a, b)` at step `h`.
fn tanh_sinh_level<T: Real>(f: &dyn Fn(f64) -> Option<CMat<T>>, n: usize, a: f64, b: f64, h: f64) -> CMat<T> {
    let half = 0.5 * (b - a);
    let mut acc = zeros::<T>(n, n);
    let kmax = (4.0 / h).ceil() as i64;
    for k in -kmax..=kmax {
        let s = k as f64 * h;
        let u = FRAC_PI_2 * s.sinh();
        let w = FRAC_PI_2 * s.cosh() / (u.cosh() * u.cosh());
        if w * half < 1e-300 || !w.is_finite() {
            continue;
        }
        // distance to the nearer endpoint without cancellation
        let t = if k >= 0 {
            b - half * 2.0 / (1.0 + (2.0 * u).exp())
        } else {
            a + half * 2.0 / (1.0 + (-2.0 * u).exp())
        };
        if t <= a || t >= b {
            continue;
        }
        if let Some(v) = f(t) {
            acc += v * creal(lit::<T>(w * h * half));
        }
    }
    acc
}

fn tanh_sinh<T: Real>(
    f: &dyn Fn(f64) -> Option<CMat<T>>,
    n: usize,
    cuts: &[f64],
    tol: f64,
) -> (CMat<T>, f64) {
    let whole = |h: f64| {
        let mut acc = zeros::<T>(n, n);
        for (j, &a) in cuts.iter().enumerate() {
            let b = if j + 1 < cuts.len() { cuts[j + 1] } else { cuts[0] + TAU };
            acc += tanh_sinh_level(f, n, a, b, h);
        }
        acc / creal(lit::<T>(TAU))
    };
    let mut h = 0.5;
    let mut prev = whole(h);
    let mut diff = f64::INFINITY;
    for _ in 1..MAX_LEVEL {
        h *= 0.5;
        let cur = whole(h);
        diff = to_f64(frob(&(&cur - &prev)));
        prev = cur;
        if diff <= tol * (1.0 + to_f64(frob(&prev))) {
            break;
        }
    }
    (prev, diff)
}

/// `|F - F(z)|^2(z)` by quadrature of the boundary values, with an error
/// estimate from the last refinement.
pub(crate) fn boundary_gram<T: Real>(f: &MatrixSymbol<T>, z: &DiskPoint<T>, tol: f64) -> (CMat<T>, T) {
    let n = f.n();
    let zc = z.z();
    let fz = f.value_at(zc);
    let integrand = |t: f64| -> Option<CMat<T>> {
        let xi = cis(lit::<T>(t));
        let w = (xi + zc) / (cone::<T>() + zc.conj() * xi);
        let d = f.value_at(w) - &fz;
        if d.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
            Some(d.adjoint() * d)
        } else {
            None
        }
    };
    // preimages of the singular points under the substitution
    let mut cuts: Vec<f64> = f
        .boundary_singularities()
        .into_iter()
        .map(|s| {
            let e = (s - zc) / (cone::<T>() - zc.conj() * s);
            to_f64(e.im).atan2(to_f64(e.re)).rem_euclid(TAU)
        })
        .collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    let (m, err) = if cuts.is_empty() {
        trapezoid(&integrand, n, tol)
    } else {
        tanh_sinh(&integrand, n, &cuts, tol)
    };
    // the integrand is Hermitian; drop rounding asymmetry
    let m = (&m + m.adjoint()) * creal(lit::<T>(0.5));
    (m, lit(err))
}
