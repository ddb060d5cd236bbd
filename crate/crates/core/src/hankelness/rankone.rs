//! Vanishing sums of rank-one operators `sum_i x_i (x) y_i` over vectors in a
//! finite-dimensional space, and bounded coordinates for dependent families.

use crate::error::{Error, Result};
use crate::linalg::{singular_values, Svd};
use crate::scalar::*;

/// Columns `x_1, ..., x_n` as a `d x n` matrix.
fn columns<T: Real>(v: &[CVec<T>]) -> Result<CMat<T>> {
    let d = v.first().map_or(0, |x| x.len());
    if v.iter().any(|x| x.len() != d) {
        return Err(Error::Dimension("vectors of different lengths".into()));
    }
    Ok(CMat::from_fn(d, v.len(), |i, j| v[j][i]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XyMethod {
    /// Induction on the longest `y_j`.
    Recursion,
    /// Orthogonal projector onto the span of the rows of `x`.
    Projector,
}

/// `A = R^* A0 R`, where `x = x_sigma R`, with `x (I - A) = 0` and `y A^* = 0`.
#[derive(Debug, Clone)]
pub struct XyCertificate<T: Real> {
    pub sigma: Vec<usize>,
    pub a0: CMat<T>,
    pub a: CMat<T>,
    pub method: XyMethod,
    pub residual_x: T,
    pub residual_y: T,
}

/// Certificate that `sum_i x_i (x) y_i = 0` via a matrix with entries of
/// modulus at most one. Fails if the sum is not zero within `tol` relative to
/// `sum ||x_i|| ||y_i||`.
pub fn xy_certificate<T: Real>(xs: &[CVec<T>], ys: &[CVec<T>], tol: T) -> Result<XyCertificate<T>> {
    let n = xs.len();
    if ys.len() != n {
        return Err(Error::Dimension(format!("{} x vectors, {} y vectors", n, ys.len())));
    }
    let xm = columns(xs)?;
    let ym = columns(ys)?;
    let scale = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| x.norm() * y.norm())
        .fold(T::one(), |a, b| a + b);
    let sum = cmatmul(&xm, &ym.adjoint());
    let fro = frob(&sum);
    if fro > tol * scale {
        return Err(Error::NonZeroRankOneSum(to_f64(fro)));
    }

    let ymax = ys.iter().map(|y| y.norm()).fold(T::zero(), |a, b| if b > a { b } else { a });
    let eps = tol * if ymax > T::one() { ymax } else { T::one() };
    let idx: Vec<usize> = (0..n).collect();
    let (sigma, a0) = recurse(&idx, ys.to_vec(), eps);
    let mut a = zeros::<T>(n, n);
    for (k, &i) in sigma.iter().enumerate() {
        for (l, &j) in sigma.iter().enumerate() {
            a[(i, j)] = a0[(k, l)];
        }
    }
    let residuals = |a: &CMat<T>| {
        let ia = identity::<T>(n) - a;
        (frob(&cmatmul(&xm, &ia)), frob(&cmatmul(&ym, &a.adjoint())))
    };
    let (rx, ry) = residuals(&a);
    let bound = T::one() + lit(1e-12);
    let post = tol * scale;
    if max_abs(&a) <= bound && rx <= post && ry <= post {
        return Ok(XyCertificate {
            sigma,
            a0,
            a,
            method: XyMethod::Recursion,
            residual_x: rx,
            residual_y: ry,
        });
    }

    // x y^* = 0 puts the columns of y^* in ker x, so the projector P onto
    // range(x^*) gives x (I - P) = 0 and y P = 0, with |P_ij| <= 1.
    let p = row_space_projector(&xm, tol);
    let (rx, ry) = residuals(&p);
    Ok(XyCertificate {
        sigma: (0..n).collect(),
        a0: p.clone(),
        a: p,
        method: XyMethod::Projector,
        residual_x: rx,
        residual_y: ry,
    })
}

fn recurse<T: Real>(idx: &[usize], ys: Vec<CVec<T>>, eps: T) -> (Vec<usize>, CMat<T>) {
    let m = idx.len();
    if m == 0 {
        return (Vec::new(), zeros(0, 0));
    }
    // smallest index among the maximizers
    let mut j = 0;
    for (k, y) in ys.iter().enumerate() {
        if y.norm() > ys[j].norm() {
            j = k;
        }
    }
    let yj = ys[j].clone();
    let nj = yj.norm();
    if nj <= eps {
        return (idx.to_vec(), identity(m));
    }
    let njj = creal(nj * nj);
    let mut rest_idx = Vec::with_capacity(m - 1);
    let mut rest_y = Vec::with_capacity(m - 1);
    let mut a = Vec::with_capacity(m - 1);
    for (k, y) in ys.iter().enumerate() {
        if k == j {
            continue;
        }
        let ak = inner(&yj, y) / njj;
        rest_idx.push(idx[k]);
        rest_y.push(y - &yj * ak.conj());
        a.push(ak);
    }
    let (omega, a1) = recurse(&rest_idx, rest_y, eps);
    // coefficient vector in the order omega
    let av = CVec::<T>::from_fn(m - 1, |k, _| {
        let pos = rest_idx.iter().position(|&i| i == omega[k]).expect("omega permutes rest");
        a[pos]
    });
    let corr = cmatmul(&a1, &CMat::from_column_slice(m - 1, 1, av.as_slice()));
    let mut a0 = zeros::<T>(m, m);
    for k in 0..m - 1 {
        a0[(k + 1, 0)] = -corr[(k, 0)];
        for l in 0..m - 1 {
            a0[(k + 1, l + 1)] = a1[(k, l)];
        }
    }
    let mut sigma = vec![idx[j]];
    sigma.extend(omega);
    (sigma, a0)
}

/// Orthogonal projector onto `range(x^*)`.
pub(crate) fn row_space_projector<T: Real>(xm: &CMat<T>, tol: T) -> CMat<T> {
    let n = xm.ncols();
    if xm.nrows() == 0 || n == 0 {
        return zeros(n, n);
    }
    let svd = Svd::new(xm);
    let top = svd.max();
    let c = svd.row_space(tol * if top > T::one() { top } else { T::one() });
    cmatmul(&c, &c.adjoint())
}

/// `x_sigma[..n-r] = x_sigma[n-r..] B`.
#[derive(Debug, Clone)]
pub struct BasisExtraction<T: Real> {
    pub sigma: Vec<usize>,
    pub rank: usize,
    pub b: CMat<T>,
    pub residual: T,
}

/// Expresses the dependent vectors of a rank-deficient family over a basis
/// subset. The basis is grown by largest remaining norm and then improved by
/// exchanges while some coordinate exceeds one in modulus; each exchange
/// multiplies the basis volume by that modulus, so the loop terminates and
/// the final coordinates are bounded by one (well inside `2^(2n)`).
pub fn bounded_basis_extraction<T: Real>(xs: &[CVec<T>], tol: T) -> Result<BasisExtraction<T>> {
    let n = xs.len();
    let xm = columns(xs)?;
    let sv = singular_values(&xm);
    let top = sv.first().copied().unwrap_or(T::zero());
    if top == T::zero() || n == 0 {
        return Err(Error::ZeroFamily);
    }
    let r = sv.iter().filter(|&&s| s > tol * top).count();
    if r >= n {
        return Err(Error::FullRank);
    }

    // greedy pivoted Gram-Schmidt
    let mut basis = Vec::with_capacity(r);
    let mut resid: Vec<CVec<T>> = xs.to_vec();
    for _ in 0..r {
        let mut best = None;
        let mut bn = T::zero();
        for (k, v) in resid.iter().enumerate() {
            if basis.contains(&k) {
                continue;
            }
            let nv = v.norm();
            if nv > bn {
                bn = nv;
                best = Some(k);
            }
        }
        let k = best.ok_or(Error::ZeroFamily)?;
        basis.push(k);
        let q = &resid[k] / creal(bn);
        for v in resid.iter_mut() {
            let c = inner(v, &q);
            *v -= &q * c;
        }
    }

    let solve = |basis: &[usize]| -> (Vec<usize>, CMat<T>) {
        let dep: Vec<usize> = (0..n).filter(|k| !basis.contains(k)).collect();
        let xb = CMat::from_fn(xm.nrows(), basis.len(), |i, j| xm[(i, basis[j])]);
        let xd = CMat::from_fn(xm.nrows(), dep.len(), |i, j| xm[(i, dep[j])]);
        let svd = Svd::new(&xb);
        let b = svd.solve(&xd, svd.max() * T::default_epsilon() * lit(xb.nrows() as f64));
        (dep, b)
    };
    let (mut dep, mut b) = solve(&basis);
    let cap = 100 * n * n;
    for _ in 0..cap {
        let mut worst = (0, 0, T::zero());
        for i in 0..b.nrows() {
            for j in 0..b.ncols() {
                let m = cabs(b[(i, j)]);
                if m > worst.2 {
                    worst = (i, j, m);
                }
            }
        }
        if worst.2 <= lit(1.0 + 1e-9) {
            break;
        }
        basis[worst.0] = dep[worst.1];
        let (d2, b2) = solve(&basis);
        dep = d2;
        b = b2;
    }
    let xb = CMat::from_fn(xm.nrows(), r, |i, j| xm[(i, basis[j])]);
    let xd = CMat::from_fn(xm.nrows(), n - r, |i, j| xm[(i, dep[j])]);
    let residual = max_abs(&(cmatmul(&xb, &b) - xd));
    let mut sigma = dep;
    sigma.extend(basis);
    Ok(BasisExtraction {
        sigma,
        rank: r,
        b,
        residual,
    })
}

/// Largest entry of `sum_i x_i (x) y_i - sum_k z_k (x) w_k` for `x = z A` and
/// `w = y A^*`, with `z` of length `r` and `y` of length `n`.
pub fn xy0_check<T: Real>(zs: &[CVec<T>], ys: &[CVec<T>], a: &CMat<T>) -> Result<T> {
    if a.shape() != (zs.len(), ys.len()) {
        return Err(Error::Dimension(format!(
            "A is {:?}, expected {} x {}",
            a.shape(),
            zs.len(),
            ys.len()
        )));
    }
    let zm = columns(zs)?;
    let ym = columns(ys)?;
    let xm = cmatmul(&zm, a);
    let wm = cmatmul(&ym, &a.adjoint());
    let lhs = cmatmul(&xm, &ym.adjoint());
    let rhs = cmatmul(&zm, &wm.adjoint());
    Ok(max_abs(&(lhs - rhs)))
}
