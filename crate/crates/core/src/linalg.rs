//! Singular value decomposition by one-sided Jacobi rotations.
//!
//! nalgebra's bidiagonal SVD occasionally returns factors that do not
//! recompose the input (seen on rank-deficient Hermitian matrices, real and
//! complex). Jacobi is slower but reliable and accurate in the small singular
//! values, which is what the rank and null-space decisions here depend on.

use crate::scalar::*;

/// `A = U diag(s) V^*` with `s` in descending order and `p = min(m, n)`
/// columns in `U` and `V`.
#[derive(Debug, Clone)]
pub struct Svd<T: Real> {
    pub u: CMat<T>,
    pub s: Vec<T>,
    pub v: CMat<T>,
}

impl<T: Real> Svd<T> {
    pub fn new(a: &CMat<T>) -> Self {
        let (m, n) = a.shape();
        if m < n {
            let t = jacobi(a.adjoint());
            return Svd { u: t.v, s: t.s, v: t.u };
        }
        jacobi(a.clone())
    }

    pub fn max(&self) -> T {
        self.s.first().copied().unwrap_or(T::zero())
    }

    /// Number of singular values above `cut`.
    pub fn rank(&self, cut: T) -> usize {
        self.s.iter().filter(|&&s| s > cut).count()
    }

    pub fn recompose(&self) -> CMat<T> {
        let mut us = self.u.clone();
        for (j, s) in self.s.iter().enumerate() {
            us.column_mut(j).scale_mut(*s);
        }
        cmatmul(&us, &self.v.adjoint())
    }

    /// Minimum-norm least-squares solution of `A x = b`, ignoring singular
    /// values at or below `cut`.
    pub fn solve(&self, b: &CMat<T>, cut: T) -> CMat<T> {
        let mut c = cmatmul(&self.u.adjoint(), b);
        for (j, s) in self.s.iter().enumerate() {
            let f = if *s > cut { T::one() / *s } else { T::zero() };
            c.row_mut(j).scale_mut(f);
        }
        cmatmul(&self.v, &c)
    }

    /// Orthonormal basis of `ker A` (columns), from the right singular vectors
    /// at or below `cut` together with the complement when `n > m`.
    pub fn null_space(&self, cut: T) -> CMat<T> {
        let n = self.v.nrows();
        let r = self.rank(cut);
        complete(&self.v.columns(0, r).into_owned(), n)
    }

    /// Orthonormal basis of `range(A^*)`.
    pub fn row_space(&self, cut: T) -> CMat<T> {
        self.v.columns(0, self.rank(cut)).into_owned()
    }
}

/// Orthonormal basis of the orthogonal complement of the (orthonormal)
/// columns of `q` in dimension `n`.
pub fn complete<T: Real>(q: &CMat<T>, n: usize) -> CMat<T> {
    let mut basis: Vec<CVec<T>> = q.column_iter().map(|c| c.into_owned()).collect();
    let k = basis.len();
    for e in 0..n {
        if basis.len() == n {
            break;
        }
        let mut v = CVec::<T>::zeros(n);
        v[e] = cone();
        // two passes of Gram-Schmidt
        for _ in 0..2 {
            for b in &basis {
                let c = b.dotc(&v);
                v -= b * c;
            }
        }
        let nv = v.norm();
        if nv > lit(1e-8) {
            basis.push(v / creal(nv));
        }
    }
    if basis.len() == k {
        return zeros(n, 0);
    }
    CMat::from_columns(&basis[k..])
}

pub fn singular_values<T: Real>(a: &CMat<T>) -> Vec<T> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    Svd::new(a).s
}

fn jacobi<T: Real>(mut u: CMat<T>) -> Svd<T> {
    let (m, n) = u.shape();
    let mut v = identity::<T>(n);
    let eps = T::default_epsilon();
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = u.column(p).norm_squared();
                let beta = u.column(q).norm_squared();
                let gamma = u.column(p).dotc(&u.column(q));
                let g = cabs(gamma);
                // separate roots: alpha * beta underflows once a column has collapsed
                if g == T::zero() || g <= eps * alpha.sqrt() * beta.sqrt() {
                    continue;
                }
                rotated = true;
                // rotate (u_p, e^{-i phi} u_q) by a real Jacobi rotation
                let ph = gamma.unscale(g);
                let zeta = (beta - alpha) / (lit::<T>(2.0) * g);
                let sgn = if zeta >= T::zero() { T::one() } else { -T::one() };
                let t = sgn / (rabs(zeta) + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                rotate(&mut u, p, q, ph, c, s);
                rotate(&mut v, p, q, ph, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    let s: Vec<T> = (0..n).map(|j| u.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| s[j].partial_cmp(&s[i]).unwrap_or(std::cmp::Ordering::Equal));
    let top = order.first().map_or(T::zero(), |&i| s[i]);
    let floor = top * eps * lit(m.max(1) as f64);
    let mut uo = zeros::<T>(m, n);
    let mut vo = zeros::<T>(n, n);
    let mut so = Vec::with_capacity(n);
    let mut kept = Vec::new();
    for (k, &j) in order.iter().enumerate() {
        vo.set_column(k, &v.column(j));
        so.push(s[j]);
        if s[j] > floor && s[j] > T::zero() {
            uo.set_column(k, &(u.column(j) / creal(s[j])));
            kept.push(k);
        }
    }
    // left vectors of (numerically) zero singular values complete the basis
    if kept.len() < n {
        let mut q = zeros::<T>(m, kept.len());
        for (c, &k) in kept.iter().enumerate() {
            q.set_column(c, &uo.column(k));
        }
        let extra = complete(&q, m);
        let mut e = 0;
        for k in 0..n {
            if !kept.contains(&k) && e < extra.ncols() {
                uo.set_column(k, &extra.column(e));
                e += 1;
            }
        }
    }
    Svd { u: uo, s: so, v: vo }
}

fn rotate<T: Real>(x: &mut CMat<T>, p: usize, q: usize, ph: Cx<T>, c: T, s: T) {
    let phc = ph.conj();
    for i in 0..x.nrows() {
        let a = x[(i, p)];
        let b = x[(i, q)] * phc;
        x[(i, p)] = a * creal(c) - b * creal(s);
        x[(i, q)] = (a * creal(s) + b * creal(c)) * ph;
    }
}
