//! When is `H_Phi T_Psi` a block Hankel operator?
//!
//! `H_Phi T_Psi = H_{Phi A Psi}` as soon as `Phi (I - A)` and `A Psi` are both
//! analytic. On negative coefficients this reads `X (I - A) = 0`, `A Y = 0`
//! with `X` the column of `Phi^(-k)` and `Y` the row of `Psi^(-k)`,
//! `k = 1..cap`.

mod rankone;

pub use rankone::{
    bounded_basis_extraction, xy0_check, xy_certificate, BasisExtraction, XyCertificate, XyMethod,
};

use crate::error::{Error, Result};
use crate::linalg::Svd;
use crate::scalar::*;
use crate::symbols::{MatrixSymbol, Side};

pub const DEFAULT_DEGREE_CAP: usize = 64;

/// `n x n` matrix with entries bounded by `d` in modulus.
#[derive(Debug, Clone)]
pub struct BoxMatrix<T: Real> {
    a: CMat<T>,
    d: T,
}

impl<T: Real> BoxMatrix<T> {
    pub fn new(a: CMat<T>, d: T) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Dimension(format!("box matrix must be square, got {:?}", a.shape())));
        }
        if d <= T::zero() {
            return Err(Error::Parameter(format!("box bound {d} must be positive")));
        }
        let m = max_abs(&a);
        if m > d + lit(1e-12) {
            return Err(Error::Parameter(format!("entry of modulus {m} exceeds the bound {d}")));
        }
        Ok(BoxMatrix { a, d })
    }

    pub fn matrix(&self) -> &CMat<T> {
        &self.a
    }

    pub fn bound(&self) -> T {
        self.d
    }

    pub fn into_matrix(self) -> CMat<T> {
        self.a
    }
}

/// Radial projection of every entry onto the disk of radius `d`.
pub fn project_box<T: Real>(a: &CMat<T>, d: T) -> CMat<T> {
    a.map(|c| {
        let r = cabs(c);
        if r > d {
            c * creal(d / r)
        } else {
            c
        }
    })
}

/// Negative coefficient stacks `(X, Y)` and the squared L2 mass of both
/// symbols beyond the cap.
pub fn coefficient_stacks<T: Real>(
    phi: &MatrixSymbol<T>,
    psi: &MatrixSymbol<T>,
    cap: usize,
) -> Result<(CMat<T>, CMat<T>, T)> {
    let n = phi.n();
    if psi.n() != n {
        return Err(Error::Dimension(format!("block sizes {} and {} differ", n, psi.n())));
    }
    let cap = effective_cap(phi, psi, cap);
    let mut x = zeros::<T>(cap * n, n);
    let mut y = zeros::<T>(n, cap * n);
    for k in 1..=cap {
        x.view_mut(((k - 1) * n, 0), (n, n)).copy_from(&phi.coeff(-(k as i64)));
        y.view_mut((0, (k - 1) * n), (n, n)).copy_from(&psi.coeff(-(k as i64)));
    }
    let cut = cap as i64;
    let mass = phi.tail_l2_sq(cut) + psi.tail_l2_sq(cut);
    Ok((x, y, mass))
}

/// Degree cap actually needed: the largest negative degree when both symbols
/// have bounded support, otherwise the requested cap.
fn effective_cap<T: Real>(phi: &MatrixSymbol<T>, psi: &MatrixSymbol<T>, cap: usize) -> usize {
    match (phi.max_degree(), psi.max_degree()) {
        (Some(a), Some(b)) => (a.max(b).max(1) as usize).min(cap.max(1)),
        _ => cap.max(1),
    }
}

#[derive(Debug, Clone)]
pub enum Feasibility<T: Real> {
    Feasible {
        a: BoxMatrix<T>,
        residual_x: T,
        residual_y: T,
        tol: T,
        truncated_mass: T,
        note: Option<String>,
    },
    Infeasible {
        /// Certified lower bound on `min ||X (I - A)||^2 + ||A Y||^2` over the box.
        margin: T,
        /// Best box point found and its objective value.
        best: CMat<T>,
        best_value: T,
        truncated_mass: T,
    },
}

impl<T: Real> Feasibility<T> {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible { .. })
    }

    pub fn matrix(&self) -> Option<&CMat<T>> {
        match self {
            Feasibility::Feasible { a, .. } => Some(a.matrix()),
            Feasibility::Infeasible { .. } => None,
        }
    }
}

struct Quadratic<T: Real> {
    x: CMat<T>,
    y: CMat<T>,
    xhx: CMat<T>,
    yyh: CMat<T>,
}

impl<T: Real> Quadratic<T> {
    fn new(x: &CMat<T>, y: &CMat<T>) -> Self {
        Quadratic {
            xhx: cmatmul(&x.adjoint(), x),
            yyh: cmatmul(y, &y.adjoint()),
            x: x.clone(),
            y: y.clone(),
        }
    }

    fn residuals(&self, a: &CMat<T>) -> (T, T) {
        let n = a.nrows();
        let rx = frob(&cmatmul(&self.x, &(identity::<T>(n) - a)));
        let ry = frob(&cmatmul(a, &self.y));
        (rx, ry)
    }

    fn value(&self, a: &CMat<T>) -> T {
        let (rx, ry) = self.residuals(a);
        rx * rx + ry * ry
    }

    fn grad(&self, a: &CMat<T>) -> CMat<T> {
        let n = a.nrows();
        (&self.xhx * (a - identity::<T>(n)) + a * &self.yyh) * creal(lit(2.0))
    }

    /// `||X D||^2 + ||D Y||^2`.
    fn curvature(&self, d: &CMat<T>) -> T {
        let p = (d.adjoint() * &self.xhx * d).trace().re;
        let q = (d * &self.yyh * d.adjoint()).trace().re;
        p + q
    }
}

fn re_inner<T: Real>(g: &CMat<T>, d: &CMat<T>) -> T {
    g.iter().zip(d.iter()).fold(T::zero(), |s, (a, b)| s + (a.conj() * b).re)
}

/// Frank-Wolfe gap at `a`: `f(a) - gap` is a lower bound on the box minimum.
fn fw_gap<T: Real>(g: &CMat<T>, a: &CMat<T>, d: T) -> T {
    let s = g.map(|c| {
        let r = cabs(c);
        if r > T::zero() {
            -c * creal(d / r)
        } else {
            czero()
        }
    });
    re_inner(g, &(a - s))
}

/// Projected gradient with exact line search. Returns the final point, its
/// value and the Frank-Wolfe gap there.
fn projected_gradient<T: Real>(q: &Quadratic<T>, start: CMat<T>, d: T, iters: usize) -> (CMat<T>, T, T) {
    let lip = lit::<T>(2.0) * (frob(&q.xhx) + frob(&q.yyh)) + lit(1e-30);
    let mut a = project_box(&start, d);
    let mut gap = T::zero();
    for _ in 0..iters {
        let g = q.grad(&a);
        gap = fw_gap(&g, &a, d);
        let f = q.value(&a);
        if gap <= lit::<T>(1e-14) * (T::one() + f) {
            break;
        }
        let dir = project_box(&(&a - &g / creal(lip)), d) - &a;
        let slope = re_inner(&g, &dir);
        if slope >= T::zero() {
            break;
        }
        let curv = q.curvature(&dir);
        let t = if curv > T::zero() {
            let t = -slope / (lit::<T>(2.0) * curv);
            if t > T::one() {
                T::one()
            } else {
                t
            }
        } else {
            T::one()
        };
        a += dir * creal(t);
    }
    let v = q.value(&a);
    let g = q.grad(&a);
    let gap = gap.max(T::zero()).min(fw_gap(&g, &a, d).max(T::zero()));
    (a, v, gap)
}

/// Searches for `A` with `|A_ij| <= d`, `X (I - A) = 0` and `A Y = 0`.
///
/// Feasibility is decided on the unconstrained least-squares problem first:
/// a positive minimum there is already a margin for the box. Otherwise the
/// affine solution set is intersected with the box, trying the projector onto
/// `range(X^*)` (entries bounded by one), then alternating projections, then
/// projected gradient.
pub fn find_feasible_a<T: Real>(
    phi: &MatrixSymbol<T>,
    psi: &MatrixSymbol<T>,
    d: T,
    cap: usize,
) -> Result<Feasibility<T>> {
    if d <= T::zero() {
        return Err(Error::Parameter(format!("box bound {d} must be positive")));
    }
    let n = phi.n();
    let (x, y, mass) = coefficient_stacks(phi, psi, cap)?;
    let scale = T::one() + frob(&x) + frob(&y);
    let tol = lit::<T>(1e-9) * scale;
    let feasible = |a: CMat<T>, rx: T, ry: T, note: Option<String>| -> Result<Feasibility<T>> {
        Ok(Feasibility::Feasible {
            a: BoxMatrix::new(a, d)?,
            residual_x: rx,
            residual_y: ry,
            tol,
            truncated_mass: mass,
            note,
        })
    };
    let xz = frob(&x) <= tol;
    let yz = frob(&y) <= tol;
    let q = Quadratic::new(&x, &y);
    if xz && yz {
        let a = zeros(n, n);
        let (rx, ry) = q.residuals(&a);
        return feasible(a, rx, ry, Some("both symbols are analytic on the checked range".into()));
    }
    if xz {
        let a = zeros(n, n);
        let (rx, ry) = q.residuals(&a);
        return feasible(a, rx, ry, None);
    }
    if yz && d >= T::one() {
        let a = identity(n);
        let (rx, ry) = q.residuals(&a);
        return feasible(a, rx, ry, None);
    }

    // vec(A) column-major, unknown i + j n
    let rows_x = x.nrows();
    let cols_y = y.ncols();
    let m1 = rows_x * n;
    let mut m = zeros::<T>(m1 + n * cols_y, n * n);
    let mut b = CVec::<T>::zeros(m.nrows());
    for j in 0..n {
        for r in 0..rows_x {
            b[r + j * rows_x] = x[(r, j)];
            for i in 0..n {
                m[(r + j * rows_x, i + j * n)] = x[(r, i)];
            }
        }
    }
    for c in 0..cols_y {
        for i in 0..n {
            for k in 0..n {
                m[(m1 + i + c * n, i + k * n)] = y[(k, c)];
            }
        }
    }
    let svd = Svd::new(&m);
    let cut = lit::<T>(1e-10) * svd.max();
    let bm = CMat::<T>::from_column_slice(b.len(), 1, b.as_slice());
    let a_ls = CVec::<T>::from_column_slice(svd.solve(&bm, cut).as_slice());
    let kmat = svd.null_space(cut);
    let unvec = |v: &CVec<T>| CMat::<T>::from_column_slice(n, n, v.as_slice());
    let ls = unvec(&a_ls);
    let (rx, ry) = q.residuals(&ls);
    let r2 = rx * rx + ry * ry;

    if rx.hypot(ry) > tol {
        let (best, best_value, gap) = projected_gradient(&q, ls, d, 5000);
        let fw = best_value - gap;
        let margin = if fw > r2 { fw } else { r2 };
        return Ok(Feasibility::Infeasible {
            margin,
            best,
            best_value,
            truncated_mass: mass,
        });
    }

    let ok = |a: &CMat<T>| {
        let (rx, ry) = q.residuals(a);
        (max_abs(a) <= d + lit(1e-12) && rx <= tol && ry <= tol, rx, ry)
    };
    if let (true, rx, ry) = ok(&ls) {
        return feasible(ls, rx, ry, None);
    }
    if d >= T::one() {
        let p = rankone::row_space_projector(&x, lit(1e-10));
        if let (true, rx, ry) = ok(&p) {
            return feasible(p, rx, ry, Some("orthogonal projector".into()));
        }
    }
    let affine = |a: &CMat<T>| -> CMat<T> {
        let v = CVec::<T>::from_column_slice(a.as_slice()) - &a_ls;
        let w = &a_ls + &kmat * (kmat.adjoint() * v);
        unvec(&w)
    };
    let mut a = ls.clone();
    for _ in 0..5000 {
        let p = project_box(&a, d);
        if let (true, rx, ry) = ok(&p) {
            return feasible(p, rx, ry, Some("alternating projections".into()));
        }
        let next = affine(&p);
        if max_abs(&(&next - &a)) <= lit::<T>(1e-15) * (T::one() + max_abs(&a)) {
            break;
        }
        a = next;
    }
    let (best, best_value, gap) = projected_gradient(&q, project_box(&a, d), d, 20000);
    if let (true, rx, ry) = ok(&best) {
        return feasible(best, rx, ry, Some("projected gradient".into()));
    }
    let lower = best_value - gap;
    if lower > T::zero() {
        return Ok(Feasibility::Infeasible {
            margin: lower,
            best,
            best_value,
            truncated_mass: mass,
        });
    }
    Err(Error::OptimizerNonConvergence {
        best: to_f64(best_value),
        gap: to_f64(gap),
    })
}

/// `Phi = (U1 + W2) D`, `Psi = D^-1 (W1 + U2)` with `W1`, `W2` analytic and
/// `H_Phi T_Psi = H_{U1 W1}`. Blocks are stored as `n x n` symbols: `U1` and
/// `W2` occupy the first `l` and last `n - l` columns, `W1` and `U2` the
/// first `l` and last `n - l` rows.
#[derive(Debug, Clone)]
pub struct HuwDecomposition<T: Real> {
    pub d: CMat<T>,
    pub d_inv: CMat<T>,
    pub l: usize,
    pub u1: MatrixSymbol<T>,
    pub w2: MatrixSymbol<T>,
    pub w1: MatrixSymbol<T>,
    pub u2: MatrixSymbol<T>,
    pub a: CMat<T>,
    pub cond: T,
    /// Largest coefficient deviation of the reassembled `Phi` and `Psi`.
    pub reassembly: T,
    pub truncated_mass: T,
}

impl<T: Real> HuwDecomposition<T> {
    /// Symbol `U1 W1` of the product.
    pub fn product_symbol(&self, trunc: Option<usize>) -> Result<MatrixSymbol<T>> {
        self.u1.mul(&self.w1, trunc)
    }
}

pub fn huw_decompose<T: Real>(
    phi: &MatrixSymbol<T>,
    psi: &MatrixSymbol<T>,
    cap: usize,
) -> Result<HuwDecomposition<T>> {
    let n = phi.n();
    let bound = lit::<T>(4f64.powi(n as i32));
    let a = match find_feasible_a(phi, psi, bound, cap)? {
        Feasibility::Infeasible { margin, .. } => {
            return Err(Error::Infeasible { margin: to_f64(margin) })
        }
        Feasibility::Feasible { a, .. } => a.into_matrix(),
    };
    let (x, y, mass) = coefficient_stacks(phi, psi, cap)?;
    let scale = T::one() + frob(&x) + frob(&y);
    let tol = lit::<T>(1e-9) * scale;

    // unitary D^-1 = [C N]: C spans range(X^*), N spans ker X
    let svd = Svd::new(&x);
    let c = svd.row_space(tol);
    let l = c.ncols();
    let nul = svd.null_space(tol);
    let mut d_inv = zeros::<T>(n, n);
    d_inv.columns_mut(0, l).copy_from(&c);
    d_inv.columns_mut(l, n - l).copy_from(&nul);
    let d = d_inv.adjoint();

    let mask = |cols: std::ops::Range<usize>| {
        CMat::<T>::from_fn(n, n, |i, j| if i == j && cols.contains(&i) { cone() } else { czero() })
    };
    let first = mask(0..l);
    let last = mask(l..n);
    let u1 = phi.const_mul(&(&d_inv * &first), Side::Right)?;
    let w2_full = phi.const_mul(&(&d_inv * &last), Side::Right)?;
    let w1_full = psi.const_mul(&(&first * &d), Side::Left)?;
    let u2 = psi.const_mul(&(&last * &d), Side::Left)?;

    let cap_e = effective_cap(phi, psi, cap) as i64;
    let neg = |s: &MatrixSymbol<T>| -> T {
        (1..=cap_e)
            .map(|k| max_abs(&s.coeff(-k)))
            .fold(T::zero(), |a, b| if b > a { b } else { a })
    };
    let (n2, n1) = (neg(&w2_full), neg(&w1_full));
    if n2 > tol || n1 > tol {
        return Err(Error::NonConvergence(format!(
            "analytic blocks keep negative coefficients ({n2:e}, {n1:e})"
        )));
    }
    let w2 = w2_full.plus_part();
    let w1 = w1_full.plus_part();

    let mut reassembly = T::zero();
    for k in -cap_e..=cap_e {
        let p = (u1.coeff(k) + w2.coeff(k)) * &d - phi.coeff(k);
        let s = &d_inv * (w1.coeff(k) + u2.coeff(k)) - psi.coeff(k);
        reassembly = reassembly.max(max_abs(&p)).max(max_abs(&s));
    }
    Ok(HuwDecomposition {
        d,
        d_inv,
        l,
        u1,
        w2,
        w1,
        u2,
        a,
        cond: T::one(),
        reassembly,
        truncated_mass: mass,
    })
}

#[cfg(test)]
mod tests;
