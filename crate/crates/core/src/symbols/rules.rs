//! Scalar closed-form coefficient rules for symbols with infinite support.
//!
//! Each rule describes a scalar function `g` on the circle through its
//! Fourier coefficients `g(u)` and through the two analytic functions
//!
//! ```text
//! N(p) = sum_{u >= 0} g(u)  p^u        M(p) = sum_{u >= 1} g(-u) p^u
//! ```
//!
//! so that `g(w) = N(w) + M(conj w)` on the circle and the harmonic extension
//! at `z` is `N(z) + M(conj z)`.

use crate::scalar::*;
use num_complex::Complex;
use rustfft::FftPlanner;
use std::f64::consts::PI;
use std::sync::Mutex;

/// Minimum node count for the quadrature that produces singular inner
/// coefficients.
pub const SINGULAR_NODE_FLOOR: usize = 8192;

#[derive(Debug)]
pub enum TailRule<T: Real> {
    /// Analytic Blaschke factor `(w - a) / (1 - conj(a) w)`.
    Blaschke { a: Complex<T> },
    /// Analytic singular inner function `exp(mass (w + p) / (w - p))` with
    /// unimodular mass point `p`.
    SingularInner {
        point: Complex<T>,
        mass: T,
        table: Mutex<Option<CoeffTable>>,
    },
    /// Indicator of the upper half circle.
    HalfIndicator,
    /// `g(u) = q^(u-1)` for `u >= 1` (analytic) or `g(-u) = q^(u-1)` for
    /// `u >= 1` (co-analytic).
    Geometric { q: Complex<T>, analytic: bool },
}

/// Taylor coefficients `0..m/16` recovered from `m` samples.
#[derive(Debug, Clone)]
pub struct CoeffTable {
    m: usize,
    coeffs: Vec<Complex<f64>>,
}

impl<T: Real> Clone for TailRule<T> {
    fn clone(&self) -> Self {
        match self {
            TailRule::Blaschke { a } => TailRule::Blaschke { a: *a },
            TailRule::SingularInner { point, mass, table } => TailRule::SingularInner {
                point: *point,
                mass: *mass,
                table: Mutex::new(table.lock().map(|t| t.clone()).unwrap_or(None)),
            },
            TailRule::HalfIndicator => TailRule::HalfIndicator,
            TailRule::Geometric { q, analytic } => TailRule::Geometric {
                q: *q,
                analytic: *analytic,
            },
        }
    }
}

impl<T: Real> TailRule<T> {
    pub fn singular_inner(point: Complex<T>, mass: T) -> Self {
        TailRule::SingularInner {
            point,
            mass,
            table: Mutex::new(None),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            TailRule::Blaschke { .. } => "blaschke",
            TailRule::SingularInner { .. } => "singular_inner",
            TailRule::HalfIndicator => "half_indicator",
            TailRule::Geometric { .. } => "geometric",
        }
    }

    /// Natural support `[lo, hi]` of the coefficient sequence (`None` = unbounded).
    pub fn support(&self) -> (Option<i64>, Option<i64>) {
        match self {
            TailRule::Blaschke { .. } | TailRule::SingularInner { .. } => (Some(0), None),
            TailRule::HalfIndicator => (None, None),
            TailRule::Geometric { analytic: true, .. } => (Some(1), None),
            TailRule::Geometric { analytic: false, .. } => (None, Some(-1)),
        }
    }

    /// Points of the circle where the closed forms blow up or oscillate.
    pub fn singular_points(&self) -> Vec<Complex<T>> {
        match self {
            TailRule::SingularInner { point, .. } => vec![*point],
            TailRule::HalfIndicator => vec![cone(), -cone::<T>()],
            _ => Vec::new(),
        }
    }

    /// Geometric decay certificate: `|g(u)| <= c r^|u|` for every `u`.
    pub fn decay(&self) -> Option<(T, T)> {
        match self {
            TailRule::Blaschke { a } => {
                let r = cabs(*a);
                if r == T::zero() {
                    // b_0 = w: a single coefficient
                    Some((T::one(), T::zero()))
                } else {
                    Some((T::one() / r, r))
                }
            }
            TailRule::Geometric { q, .. } => {
                let r = cabs(*q);
                if r == T::zero() {
                    Some((T::one(), T::zero()))
                } else {
                    Some((T::one() / r, r))
                }
            }
            _ => None,
        }
    }

    pub fn coeff(&self, u: i64) -> Complex<T> {
        match self {
            TailRule::Blaschke { a } => {
                if u < 0 {
                    czero()
                } else if u == 0 {
                    -*a
                } else {
                    let s = T::one() - cabs2(*a);
                    cpow(a.conj(), (u - 1) as u64) * s
                }
            }
            TailRule::SingularInner { point, mass, table } => {
                if u < 0 {
                    return czero();
                }
                let c = singular_coeff(*point, *mass, table, u);
                cx(c.re, c.im)
            }
            TailRule::HalfIndicator => {
                if u == 0 {
                    creal(lit(0.5))
                } else if u % 2 == 0 {
                    czero()
                } else {
                    // (1 - (-1)^u) / (2 pi i u) = -i / (pi u) for odd u
                    Complex::new(T::zero(), lit(-1.0 / (PI * u as f64)))
                }
            }
            TailRule::Geometric { q, analytic } => {
                let d = if *analytic { u } else { -u };
                if d >= 1 {
                    cpow(*q, (d - 1) as u64)
                } else {
                    czero()
                }
            }
        }
    }

    /// `N(p)`: analytic part evaluated at `p` in the closed disk.
    pub fn nonneg_fn(&self, p: Complex<T>) -> Complex<T> {
        match self {
            TailRule::Blaschke { a } => (p - *a) / (cone::<T>() - a.conj() * p),
            TailRule::SingularInner { point, mass, .. } => {
                cexp((p + *point) / (p - *point) * *mass)
            }
            TailRule::HalfIndicator => {
                // 1/2 + (1 / (pi i)) artanh(p)
                creal::<T>(lit(0.5)) + artanh(p) * Complex::new(T::zero(), lit(-1.0 / PI))
            }
            TailRule::Geometric { q, analytic } => {
                if *analytic {
                    p / (cone::<T>() - *q * p)
                } else {
                    czero()
                }
            }
        }
    }

    /// `M(p)`: co-analytic part as a function of `p = conj(w)`.
    pub fn neg_fn(&self, p: Complex<T>) -> Complex<T> {
        match self {
            TailRule::Blaschke { .. } | TailRule::SingularInner { .. } => czero(),
            TailRule::HalfIndicator => artanh(p) * Complex::new(T::zero(), lit(1.0 / PI)),
            TailRule::Geometric { q, analytic } => {
                if *analytic {
                    czero()
                } else {
                    p / (cone::<T>() - *q * p)
                }
            }
        }
    }

    /// `sum_{u in [lo, hi]} g(u) zeta_u(p)` where `zeta_u(p) = p^u` for
    /// `u >= 0` and `conj(p)^|u|` for `u < 0`, using the closed forms for
    /// unbounded ends and explicit corrections for the finite ends.
    pub fn window_value(&self, p: Complex<T>, lo: Option<i64>, hi: Option<i64>) -> Complex<T> {
        let (slo, shi) = self.support();
        let lo = max_opt(lo, slo);
        let hi = min_opt(hi, shi);
        if let (Some(l), Some(h)) = (lo, hi) {
            if l > h {
                return czero();
            }
            return (l..=h).fold(czero(), |acc, u| acc + self.coeff(u) * zeta(p, u));
        }
        let mut acc = czero::<T>();
        // non-negative degrees [max(lo, 0), hi]
        let nlo = lo.map_or(0, |l| l.max(0));
        match hi {
            Some(h) if h < 0 => {}
            Some(h) => {
                for u in nlo..=h {
                    acc += self.coeff(u) * zeta(p, u);
                }
            }
            None => {
                acc += self.nonneg_fn(p);
                for u in 0..nlo {
                    acc -= self.coeff(u) * zeta(p, u);
                }
            }
        }
        // negative degrees [lo, min(hi, -1)]
        let nhi = hi.map_or(-1, |h| h.min(-1));
        match lo {
            Some(l) if l > -1 => {}
            Some(l) => {
                for u in l..=nhi {
                    acc += self.coeff(u) * zeta(p, u);
                }
            }
            None => {
                acc += self.neg_fn(p.conj());
                for u in (nhi + 1)..0 {
                    acc -= self.coeff(u) * zeta(p, u);
                }
            }
        }
        acc
    }
}

/// `p^u` for `u >= 0`, `conj(p)^|u|` for `u < 0`.
#[inline]
pub fn zeta<T: Real>(p: Complex<T>, u: i64) -> Complex<T> {
    if u >= 0 {
        cpow(p, u as u64)
    } else {
        cpow(p.conj(), u.unsigned_abs())
    }
}

fn artanh<T: Real>(p: Complex<T>) -> Complex<T> {
    let one = cone::<T>();
    (cln(one + p) - cln(one - p)) * lit::<T>(0.5)
}

pub(crate) fn max_opt(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

pub(crate) fn min_opt(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

fn singular_coeff<T: Real>(
    point: Complex<T>,
    mass: T,
    table: &Mutex<Option<CoeffTable>>,
    u: i64,
) -> Complex<f64> {
    let u = u as usize;
    let mut guard = table.lock().expect("coefficient table poisoned");
    let rebuild = match guard.as_ref() {
        Some(t) => u >= t.m / OVERSAMPLE,
        None => true,
    };
    if rebuild {
        let m = ((u + 1) * OVERSAMPLE).next_power_of_two().max(SINGULAR_NODE_FLOOR);
        let p = Complex::new(to_f64(point.re), to_f64(point.im));
        *guard = Some(singular_table(p, to_f64(mass), m));
    }
    let t = guard.as_ref().expect("table built above");
    t.coeffs[u]
}

/// Coefficients are read only below `m / OVERSAMPLE`.
const OVERSAMPLE: usize = 16;

/// Taylor coefficients of `exp(mass (w + p)/(w - p))` from `m` samples on the
/// circle of radius `rho = exp(-37/m)`, where the function is smooth. Aliasing
/// is damped by `rho^m ~ 1e-16` and the rescaling `rho^{-k}` stays below 10
/// for the coefficients that are read.
fn singular_table(point: Complex<f64>, mass: f64, m: usize) -> CoeffTable {
    let rho = (-37.0 / m as f64).exp();
    let h = 2.0 * PI / m as f64;
    let mut buf: Vec<Complex<f64>> = (0..m)
        .map(|j| {
            let w = Complex::from_polar(rho, h * j as f64);
            ((w + point) / (w - point) * mass).exp()
        })
        .collect();
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(m).process(&mut buf);
    let keep = m / OVERSAMPLE;
    let coeffs = buf
        .iter()
        .take(keep)
        .enumerate()
        .map(|(k, c)| c * rho.powi(-(k as i32)) / m as f64)
        .collect();
    CoeffTable { m, coeffs }
}
