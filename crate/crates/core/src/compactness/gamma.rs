//! Box infima of sums of operator norms.
//!
//! With `K_z = [k_z e_1 ... k_z e_n]`, the three norms reduce to
//! `||P^1/2 (I - A)||`, `||A Q^1/2||` and `||H_{Phi A Psi} K_z||`, where `P`
//! and `Q` are the kernel Grams of `Phi` at `z` and of `(Psi_-)~*` at `zbar`.
//! The last one is linear in `A` and is compressed onto the span of its
//! values before optimizing. The objective is convex; it is minimized by
//! accelerated projected gradient on a smoothed spectral norm with
//! decreasing smoothing, then polished by a compass search on the exact
//! objective.

use super::{adjoint_partner, certified_degree, kernel_gram, psd_sqrt, stack_from_coeffs, truncation_policy};
use crate::error::{Error, Result};
use crate::linalg::Svd;
use crate::scalar::*;
use crate::symbols::{DiskPoint, MatrixSymbol};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Degree cap for the product term when a symbol has no decay certificate.
const UNCERTIFIED_DEGREE_CAP: usize = 256;

#[derive(Debug, Clone)]
pub struct GammaOptions<T: Real> {
    /// Entry bound of the box; `4^n` when `None`.
    pub d: Option<T>,
    /// Number of starting points (at least one).
    pub starts: usize,
    pub seed: u64,
    /// Iteration cap per smoothing stage.
    pub max_iter: usize,
}

impl<T: Real> Default for GammaOptions<T> {
    fn default() -> Self {
        GammaOptions {
            d: None,
            starts: 5,
            seed: 0,
            max_iter: 3000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GammaResult<T: Real> {
    pub value: T,
    pub a: CMat<T>,
    /// Individual norms at `a`.
    pub terms: Vec<T>,
    /// Final objective from each start.
    pub start_values: Vec<T>,
    /// Norm of the projected gradient step of the last smoothed problem.
    pub grad_norm: T,
    pub degree: usize,
    pub tail_bound: T,
}

impl<T: Real> GammaResult<T> {
    /// Largest disagreement between starts.
    pub fn spread(&self) -> T {
        let lo = self.start_values.iter().copied().fold(self.value, |a, b| if b < a { b } else { a });
        let hi = self.start_values.iter().copied().fold(self.value, |a, b| if b > a { b } else { a });
        hi - lo
    }
}

pub(crate) struct Objective<T: Real> {
    n: usize,
    p_half: CMat<T>,
    q_half: CMat<T>,
    /// Compressed `H_{Phi E_pq Psi} K_z`, indexed `p * n + q`.
    s3: Vec<CMat<T>>,
    pub(crate) weights: [T; 3],
}

fn re_inner<T: Real>(a: &CMat<T>, b: &CMat<T>) -> T {
    a.iter().zip(b.iter()).fold(T::zero(), |s, (x, y)| s + (x.conj() * y).re)
}

fn project<T: Real>(a: &mut CMat<T>, d: T) {
    for x in a.iter_mut() {
        let m = cabs(*x);
        if m > d {
            *x *= creal(d / m);
        }
    }
}

/// `mu log sum_i exp(sqrt(lambda_i + mu^2) / mu)` over the eigenvalues of
/// `M^* M`, and its gradient in `M`.
fn smooth_norm<T: Real>(m: &CMat<T>, mu: T) -> (T, CMat<T>) {
    let g = m.adjoint() * m;
    let svd = Svd::new(&((&g + g.adjoint()) * creal(lit::<T>(0.5))));
    let roots: Vec<T> = svd.s.iter().map(|l| (*l + mu * mu).sqrt()).collect();
    let top = roots.iter().copied().fold(T::zero(), |a, b| if b > a { b } else { a });
    let ex: Vec<T> = roots.iter().map(|r| ((*r - top) / mu).exp()).collect();
    let sum = ex.iter().copied().fold(T::zero(), |a, b| a + b);
    let value = top + mu * sum.ln();
    let mut v = svd.v.clone();
    for (j, (e, r)) in ex.iter().zip(&roots).enumerate() {
        v.column_mut(j).scale_mut(*e / sum / *r);
    }
    let grad = m * (v * svd.v.adjoint());
    (value, grad)
}

impl<T: Real> Objective<T> {
    fn matrices(&self, a: &CMat<T>) -> [Option<CMat<T>>; 3] {
        let w = self.weights;
        let t1 = (w[0] > T::zero()).then(|| &self.p_half - &self.p_half * a);
        let t2 = (w[1] > T::zero()).then(|| a * &self.q_half);
        let t3 = (w[2] > T::zero() && !self.s3.is_empty()).then(|| {
            let mut m = zeros::<T>(self.s3[0].nrows(), self.n);
            for (idx, s) in self.s3.iter().enumerate() {
                let c = a[(idx / self.n, idx % self.n)];
                if c != czero() {
                    m += s * c;
                }
            }
            m
        });
        [t1, t2, t3]
    }

    pub(crate) fn terms(&self, a: &CMat<T>) -> Vec<T> {
        self.matrices(a)
            .iter()
            .map(|m| m.as_ref().map_or(T::zero(), spectral_norm))
            .collect()
    }

    pub(crate) fn value(&self, a: &CMat<T>) -> T {
        self.terms(a)
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |s, (t, w)| s + *t * *w)
    }

    fn smooth(&self, a: &CMat<T>, mu: T) -> (T, CMat<T>) {
        let n = self.n;
        let mut val = T::zero();
        let mut grad = zeros::<T>(n, n);
        let [t1, t2, t3] = self.matrices(a);
        if let Some(m) = t1 {
            let (v, g) = smooth_norm(&m, mu);
            val += self.weights[0] * v;
            grad -= &self.p_half * g * creal(self.weights[0]);
        }
        if let Some(m) = t2 {
            let (v, g) = smooth_norm(&m, mu);
            val += self.weights[1] * v;
            grad += g * &self.q_half * creal(self.weights[1]);
        }
        if let Some(m) = t3 {
            let (v, g) = smooth_norm(&m, mu);
            val += self.weights[2] * v;
            for (idx, s) in self.s3.iter().enumerate() {
                let c = s.iter().zip(g.iter()).fold(czero::<T>(), |acc, (x, y)| acc + x.conj() * y);
                grad[(idx / n, idx % n)] += c * self.weights[2];
            }
        }
        (val, grad)
    }

    fn scale(&self) -> T {
        let mut s = spectral_norm(&self.p_half) + spectral_norm(&self.q_half);
        for m in &self.s3 {
            s += spectral_norm(m);
        }
        s
    }
}

/// Coefficients of `Phi` or `Psi` on `[-d, d]`, index `k + d`.
fn window<T: Real>(s: &MatrixSymbol<T>, d: usize) -> Vec<CMat<T>> {
    let d = d as i64;
    (-d..=d).map(|k| s.coeff(k)).collect()
}

/// Compressed stacks of `H_{Phi E_pq Psi} K_z` with symbols cut to `[-d, d]`.
fn product_stacks<T: Real>(phi: &MatrixSymbol<T>, psi: &MatrixSymbol<T>, z: &DiskPoint<T>, d: usize) -> Vec<CMat<T>> {
    let n = phi.n();
    let fw = window(phi, d);
    let gw = window(psi, d);
    let di = d as i64;
    let kmax = 2 * d;
    let mut stacks = Vec::with_capacity(n * n);
    let nz = |m: &CMat<T>| m.iter().any(|c| *c != czero());
    let pairs: Vec<(usize, usize, usize)> = (0..fw.len())
        .flat_map(|i| (0..gw.len()).map(move |j| (i, j)))
        .filter_map(|(i, j)| {
            // degree of Phi is i - d, of Psi is j - d, product degree -k
            let k = -((i as i64 - di) + (j as i64 - di));
            (k >= 1 && nz(&fw[i]) && nz(&gw[j])).then_some((i, j, k as usize))
        })
        .collect();
    for p in 0..n {
        for q in 0..n {
            let mut coeffs = vec![zeros::<T>(n, n); kmax];
            for &(i, j, k) in &pairs {
                let col = fw[i].column(p);
                let row = gw[j].row(q);
                coeffs[k - 1] += col * row;
            }
            stacks.push(stack_from_coeffs(&coeffs, z, n));
        }
    }
    let all = CMat::from_fn(stacks[0].nrows(), n * n * n, |r, c| stacks[c / n][(r, c % n)]);
    if all.nrows() == 0 || frob(&all) == T::zero() {
        return Vec::new();
    }
    let svd = Svd::new(&all);
    let rank = svd.rank(svd.max() * lit(1e-14));
    let u = svd.u.columns(0, rank).adjoint();
    stacks.iter().map(|s| &u * s).collect()
}

struct Built<T: Real> {
    obj: Objective<T>,
    coarse: Option<Objective<T>>,
    degree: usize,
    bound: T,
}

fn build<T: Real>(phi: &MatrixSymbol<T>, psi: &MatrixSymbol<T>, z: &DiskPoint<T>, third: bool) -> Result<Built<T>> {
    if phi.n() != psi.n() {
        return Err(Error::Dimension(format!("block sizes {} and {} differ", phi.n(), psi.n())));
    }
    let n = phi.n();
    let p = kernel_gram(phi, z);
    let q = kernel_gram(&adjoint_partner(psi), &z.conj());
    let mut bound = p.bound.sqrt() + q.bound.sqrt();
    let base = |s3| Objective {
        n,
        p_half: psd_sqrt(&p.gram),
        q_half: psd_sqrt(&q.gram),
        s3,
        weights: [T::one(), T::one(), if third { T::one() } else { T::zero() }],
    };
    if !third {
        return Ok(Built {
            obj: base(Vec::new()),
            coarse: None,
            degree: p.degree.max(q.degree),
            bound,
        });
    }
    let r = z.modulus();
    let (d, certified) = match (certified_degree(phi, r), certified_degree(psi, r)) {
        (Some(a), Some(b)) => (a.max(b), true),
        _ => (truncation_policy(r).min(UNCERTIFIED_DEGREE_CAP), false),
    };
    let coarse = (!certified).then(|| base(product_stacks(phi, psi, z, d / 2)));
    if certified && (phi.has_tail() || psi.has_tail()) {
        bound += lit::<T>(1e-13);
    }
    Ok(Built {
        obj: base(product_stacks(phi, psi, z, d)),
        coarse,
        degree: d,
        bound,
    })
}

fn fista<T: Real>(obj: &Objective<T>, x0: CMat<T>, mu: T, d: T, max_iter: usize, lip0: T) -> (CMat<T>, T, T) {
    let mut x = x0;
    let mut y = x.clone();
    let mut fx = obj.smooth(&x, mu).0;
    let mut t = T::one();
    let mut lip = lip0;
    let half = lit::<T>(0.5);
    for _ in 0..max_iter {
        let (fy, gy) = obj.smooth(&y, mu);
        let mut xn;
        let mut fxn;
        loop {
            xn = &y - &gy * creal(T::one() / lip);
            project(&mut xn, d);
            let dl = &xn - &y;
            fxn = obj.smooth(&xn, mu).0;
            let model = fy + re_inner(&gy, &dl) + half * lip * dl.norm_squared();
            if fxn <= model + lit::<T>(1e-15) * rabs(fy) || lip > lit(1e30) {
                break;
            }
            lip *= lit(2.0);
        }
        if fxn > fx {
            if y == x {
                break;
            }
            y = x.clone();
            t = T::one();
            continue;
        }
        let tn = (T::one() + (T::one() + lit::<T>(4.0) * t * t).sqrt()) * half;
        let step = (&xn - &x).norm();
        y = &xn + (&xn - &x) * creal((t - T::one()) / tn);
        x = xn;
        fx = fxn;
        t = tn;
        if step <= lit::<T>(1e-13) * (T::one() + x.norm()) {
            break;
        }
        lip *= lit(0.9);
    }
    let g = obj.smooth(&x, mu).1;
    let mut pg = &x - g;
    project(&mut pg, d);
    let gn = (&x - pg).norm();
    (x, gn, lip)
}

/// Compass search on the exact objective.
fn polish<T: Real>(obj: &Objective<T>, mut x: CMat<T>, d: T, mut step: T) -> (CMat<T>, T) {
    let n = obj.n;
    let mut f = obj.value(&x);
    let mut evals = 0usize;
    while step > lit(1e-12) && evals < 40_000 {
        let mut improved = false;
        for idx in 0..n * n {
            for dir in [cone::<T>(), -cone::<T>(), cx(0.0, 1.0), cx(0.0, -1.0)] {
                let mut xn = x.clone();
                xn[(idx / n, idx % n)] += dir * step;
                project(&mut xn, d);
                let fnew = obj.value(&xn);
                evals += 1;
                if fnew < f {
                    x = xn;
                    f = fnew;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= lit(0.5);
        }
    }
    (x, f)
}

pub(crate) fn minimize<T: Real>(obj: &Objective<T>, d: T, opts: &GammaOptions<T>) -> Result<(CMat<T>, T, Vec<T>, T)> {
    let n = obj.n;
    let scale = obj.scale();
    if scale == T::zero() {
        return Ok((zeros(n, n), T::zero(), vec![T::zero(); opts.starts.max(1)], T::zero()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut starts = vec![zeros::<T>(n, n), identity::<T>(n)];
    while starts.len() < opts.starts.max(1) {
        starts.push(CMat::from_fn(n, n, |_, _| {
            let rad: f64 = rng.random_range(0.0..1.0);
            let th: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            cis(lit::<T>(th)) * lit::<T>(rad) * d
        }));
    }
    starts.truncate(opts.starts.max(1));
    let mut best: Option<(CMat<T>, T)> = None;
    let mut values = Vec::with_capacity(starts.len());
    let mut grad_norm = T::zero();
    for mut x in starts {
        project(&mut x, d);
        let mut mu = scale * lit(0.1);
        let mut lip = scale * scale / mu;
        let mut gn = T::zero();
        for _ in 0..8 {
            let (xn, g, l) = fista(obj, x, mu, d, opts.max_iter, lip);
            x = xn;
            gn = g;
            mu *= lit(0.1);
            lip = l * lit(10.0);
        }
        let (x, f) = polish(obj, x, d, scale * lit(1e-6));
        values.push(f);
        if best.as_ref().is_none_or(|(_, b)| f < *b) {
            best = Some((x, f));
            grad_norm = gn;
        }
    }
    let (a, f) = best.expect("at least one start");
    if !to_f64(f).is_finite() {
        return Err(Error::OptimizerNonConvergence {
            best: to_f64(f),
            gap: to_f64(grad_norm),
        });
    }
    Ok((a, f, values, grad_norm))
}

fn run<T: Real>(
    phi: &MatrixSymbol<T>,
    psi: &MatrixSymbol<T>,
    z: &DiskPoint<T>,
    opts: &GammaOptions<T>,
    third: bool,
) -> Result<GammaResult<T>> {
    let b = build(phi, psi, z, third)?;
    let n = phi.n();
    let d = opts.d.unwrap_or_else(|| lit((4.0f64).powi(n as i32)));
    if d <= T::zero() {
        return Err(Error::Parameter("box bound must be positive".into()));
    }
    let (a, value, start_values, grad_norm) = minimize(&b.obj, d, opts)?;
    let mut tail_bound = b.bound;
    if let Some(c) = &b.coarse {
        tail_bound += rabs(c.value(&a) - value);
    }
    Ok(GammaResult {
        terms: b.obj.terms(&a),
        value,
        a,
        start_values,
        grad_norm,
        degree: b.degree,
        tail_bound,
    })
}

/// `inf_A ||H_{Phi (I - A)} H_{conj(phi_zbar)}|| + ||H_{conj(phi_zbar)} H_{A Psi}||`
/// over `|A_ij| <= d`.
pub fn gamma1<T: Real>(
    phi: &MatrixSymbol<T>,
    psi: &MatrixSymbol<T>,
    z: &DiskPoint<T>,
    opts: &GammaOptions<T>,
) -> Result<GammaResult<T>> {
    run(phi, psi, z, opts, false)
}

/// [`gamma1`] plus `||H_{Phi A Psi} H_{conj(phi_zbar)}||`.
pub fn gamma2<T: Real>(
    phi: &MatrixSymbol<T>,
    psi: &MatrixSymbol<T>,
    z: &DiskPoint<T>,
    opts: &GammaOptions<T>,
) -> Result<GammaResult<T>> {
    run(phi, psi, z, opts, true)
}

/// Infimum of a single Gamma term, `which` in `0..3`.
#[cfg(test)]
pub(crate) fn single_term_infimum<T: Real>(
    phi: &MatrixSymbol<T>,
    psi: &MatrixSymbol<T>,
    z: &DiskPoint<T>,
    which: usize,
    opts: &GammaOptions<T>,
) -> Result<T> {
    let mut b = build(phi, psi, z, true)?;
    b.obj.weights = [T::zero(); 3];
    b.obj.weights[which] = T::one();
    let d = opts.d.unwrap_or_else(|| lit((4.0f64).powi(phi.n() as i32)));
    Ok(minimize(&b.obj, d, opts)?.1)
}
