//! Real scalar abstraction shared by every numeric routine in the crate.
//!
//! All operator and symbol types are generic over `T: Real`; the complex
//! field is always `Complex<T>`. Constants are written as `f64` literals and
//! lifted with [`lit`].

use nalgebra::{ComplexField, DMatrix, DVector, RealField};
use num_complex::Complex;
use num_traits::ToPrimitive;
use std::fmt::{Debug, Display, LowerExp};

/// Floating point scalar the crate can run on: `f32` or `f64`.
pub trait Real:
    RealField + Copy + ToPrimitive + Default + Debug + Display + LowerExp + Send + Sync + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

pub type Cx<T> = Complex<T>;
pub type CMat<T> = DMatrix<Complex<T>>;
pub type CVec<T> = DVector<Complex<T>>;

#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    nalgebra::convert(x)
}

#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[inline]
pub fn cx<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(lit(re), lit(im))
}

#[inline]
pub fn czero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

#[inline]
pub fn cone<T: Real>() -> Complex<T> {
    Complex::new(T::one(), T::zero())
}

#[inline]
pub fn creal<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

#[inline]
pub fn cabs<T: Real>(z: Complex<T>) -> T {
    ComplexField::modulus(z)
}

#[inline]
pub fn cabs2<T: Real>(z: Complex<T>) -> T {
    z.re * z.re + z.im * z.im
}

#[inline]
pub fn rabs<T: Real>(x: T) -> T {
    if x < T::zero() {
        -x
    } else {
        x
    }
}

/// `z^k` for a non-negative integer power.
pub fn cpow<T: Real>(z: Complex<T>, k: u64) -> Complex<T> {
    let mut acc = cone::<T>();
    let mut base = z;
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        base = base * base;
        e >>= 1;
    }
    acc
}

/// `e^{i theta}`.
#[inline]
pub fn cis<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

pub fn cexp<T: Real>(z: Complex<T>) -> Complex<T> {
    ComplexField::exp(z)
}

pub fn cln<T: Real>(z: Complex<T>) -> Complex<T> {
    ComplexField::ln(z)
}

pub fn identity<T: Real>(n: usize) -> CMat<T> {
    CMat::identity(n, n)
}

pub fn zeros<T: Real>(rows: usize, cols: usize) -> CMat<T> {
    CMat::zeros(rows, cols)
}

/// Largest entry modulus.
pub fn max_abs<T: Real>(m: &CMat<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| {
        let a = cabs(*z);
        if a > acc {
            a
        } else {
            acc
        }
    })
}

/// Frobenius norm.
pub fn frob<T: Real>(m: &CMat<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc + cabs2(*z)).sqrt()
}

pub fn vec_norm<T: Real>(v: &CVec<T>) -> T {
    v.iter().fold(T::zero(), |acc, z| acc + cabs2(*z)).sqrt()
}

/// Spectral norm of a small dense matrix through its singular values.
pub fn spectral_norm<T: Real>(m: &CMat<T>) -> T {
    if m.nrows() == 0 || m.ncols() == 0 {
        return T::zero();
    }
    crate::linalg::Svd::new(m).max()
}

/// `<x, y> = y^* x`, linear in the first slot.
pub fn inner<T: Real>(x: &CVec<T>, y: &CVec<T>) -> Complex<T> {
    x.iter()
        .zip(y.iter())
        .fold(czero::<T>(), |acc, (a, b)| acc + *a * b.conj())
}

/// Complex matrix product through four real products, which nalgebra
/// dispatches to a blocked kernel for `f32`/`f64`.
pub fn cmatmul<T: Real>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    assert_eq!(a.ncols(), b.nrows(), "inner dimensions differ");
    let ar = a.map(|z| z.re);
    let ai = a.map(|z| z.im);
    let br = b.map(|z| z.re);
    let bi = b.map(|z| z.im);
    let re = &ar * &br - &ai * &bi;
    let im = &ar * &bi + &ai * &br;
    re.zip_map(&im, |r, i| Complex::new(r, i))
}
