//! Registry of operator identities. Each entry builds the two sides as
//! truncations; a check passes when the largest entry of the difference on
//! the comparison window is below the tolerance.

use super::{gram_trace_check, tail_padding, MobiusFrame};
use crate::error::{Error, Result};
use crate::operators::{hankel_trunc, rank_one_sum, toeplitz_trunc, Provenance, TruncatedOperator, WindowSpec};
use crate::scalar::*;
use crate::symbols::{random_laurent, DiskPoint, MatrixSymbol};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

type Op<T> = TruncatedOperator<T>;
type Sides<T> = (Op<T>, Op<T>);
type Builder<T> = fn(&IdentityInputs<T>) -> Result<Sides<T>>;

/// Two symbols and a frame; `phi` and `psi` play the roles of `Phi`, `Psi`.
pub struct IdentityInputs<'a, T: Real> {
    pub frame: &'a MobiusFrame<T>,
    pub phi: &'a MatrixSymbol<T>,
    pub psi: &'a MatrixSymbol<T>,
}

impl<T: Real> IdentityInputs<'_, T> {
    fn len(&self) -> usize {
        self.frame.len()
    }

    fn t(&self, s: &MatrixSymbol<T>) -> Result<Op<T>> {
        toeplitz_trunc(s, self.len())
    }

    fn h(&self, s: &MatrixSymbol<T>) -> Result<Op<T>> {
        hankel_trunc(s, self.len())
    }

    fn product(&self) -> Result<MatrixSymbol<T>> {
        self.phi.mul(self.psi, Some(self.len()))
    }

    fn identity(&self) -> Result<Op<T>> {
        Op::identity(self.frame.n(), self.len())
    }

    /// `X = T_Phi + H_Psi`, `Y = H_Phi T_Psi`.
    fn xy(&self) -> Result<Sides<T>> {
        let x = self.t(self.phi)?.add(&self.h(self.psi)?)?;
        let y = self.h(self.phi)?.compose(&self.t(self.psi)?)?;
        Ok((x, y))
    }

    fn kernel_sum(&self, left: &Op<T>, kl: &[CVec<T>], right: &Op<T>, kr: &[CVec<T>]) -> Result<Op<T>> {
        let pairs = self.kernel_pairs(left, kl, right, kr)?;
        rank_one_sum(self.frame.n(), self.len(), &pairs)
    }

    fn kernel_pairs(
        &self,
        left: &Op<T>,
        kl: &[CVec<T>],
        right: &Op<T>,
        kr: &[CVec<T>],
    ) -> Result<Vec<(CVec<T>, CVec<T>)>> {
        kl.iter()
            .zip(kr)
            .map(|(a, b)| Ok((left.apply(a)?, right.apply(b)?)))
            .collect()
    }
}

fn scalar_op<T: Real>(v: T) -> Result<Op<T>> {
    Op::from_matrix(1, 1, CMat::from_element(1, 1, creal(v)), Provenance::Composite)
}

fn t1<T: Real>(c: &IdentityInputs<T>) -> Result<Sides<T>> {
    let lhs = c.t(&c.product()?)?;
    let rhs = c
        .t(c.phi)?
        .compose(&c.t(c.psi)?)?
        .add(&c.h(&c.phi.tilde())?.compose(&c.h(c.psi)?)?)?;
    Ok((lhs, rhs))
}

fn h1<T: Real>(c: &IdentityInputs<T>) -> Result<Sides<T>> {
    let lhs = c.h(&c.product()?)?;
    let rhs = c
        .h(c.phi)?
        .compose(&c.t(c.psi)?)?
        .add(&c.t(&c.phi.tilde())?.compose(&c.h(c.psi)?)?)?;
    Ok((lhs, rhs))
}

fn t2<T: Real>(c: &IdentityInputs<T>) -> Result<Sides<T>> {
    let psi = c.psi.plus_part();
    let lhs = c.t(c.phi)?.compose(&c.t(&psi)?)?;
    let rhs = c.t(&c.phi.mul(&psi, Some(c.len()))?)?;
    Ok((lhs, rhs))
}

fn h2<T: Real>(c: &IdentityInputs<T>) -> Result<Sides<T>> {
    let psi = c.psi.plus_part();
    let lhs = c.h(c.phi)?.compose(&c.t(&psi)?)?;
    let rhs = c.h(&c.phi.mul(&psi, Some(c.len()))?)?;
    Ok((lhs, rhs))
}

fn aa<T: Real>(c: &IdentityInputs<T>) -> Result<Sides<T>> {
    let f = c.frame;
    let tp = f.t_phi().adjoint();
    let t = c.t(c.phi)?;
    let lhs = tp.compose(&t)?;
    let rhs = t.compose(&tp)?.add(&tp.compose(&t)?.compose(f.c_z())?)?;
    Ok((lhs, rhs))
}

fn bb<T: Real>(c: &IdentityInputs<T>) -> Result<Sides<T>> {
    let f = c.frame;
    let t = c.t(c.phi)?;
    let lhs = t.compose(f.t_phi())?;
    let rhs = f
        .t_phi()
        .compose(&t)?
        .add(&f.c_z().compose(&t)?.compose(f.t_phi())?)?;
    Ok((lhs, rhs))
}

fn ccc<T: Real>(c: &IdentityInputs<T>) -> Result<Sides<T>> {
    let f = c.frame;
    let h = c.h(c.phi)?;
    let tps = f.t_phi().adjoint();
    let tb = f.t_phi_conj();
    let lhs = h.compose(&tps)?;
    let rhs = tb
        .compose(&h)?
        .sub(&tb.compose(&h)?.compose(f.c_z())?)?
        .add(&f.c_zbar().compose(&h)?.compose(&tps)?)?;
    Ok((lhs, rhs))
}

fn mobius_hankel<T: Real>(c: &IdentityInputs<T>) -> Result<Sides<T>> {
    let f = c.frame;
    let pairs: Vec<_> = f
        .k_zbar()
        .iter()
        .zip(f.k_z())
        .map(|(a, b)| (a.clone(), b.clone()))
        .collect();
    Ok((f.h_phibar().clone(), rank_one_sum(f.n(), f.len(), &pairs)?))
}

fn mobius_projection<T: Real>(c: &IdentityInputs<T>) -> Result<Sides<T>> {
    let f = c.frame;
    let rhs = c.identity()?.sub(&f.t_phi().compose(&f.t_phi().adjoint())?)?;
    Ok((f.c_z().clone(), rhs))
}

fn key1<T: Real>(c: &IdentityInputs<T>) -> Result<Sides<T>> {
    let f = c.frame;
    let hp = c.h(c.phi)?;
    let lhs = f.omega(&hp.compose(&c.t(c.psi)?)?)?;
    let rhs = c.kernel_sum(&hp, f.k_z(), &c.h(c.psi)?.adjoint(), f.k_zbar())?;
    Ok((lhs, rhs))
}

fn key1_product<T: Real>(c: &IdentityInputs<T>) -> Result<Sides<T>> {
    let f = c.frame;
    let hp = c.h(c.phi)?;
    let lhs = f.omega(&hp.compose(&c.t(c.psi)?)?)?;
    let rhs = hp.compose(f.h_phibar_conj())?.compose(&c.h(c.psi)?)?;
    Ok((lhs, rhs))
}

fn key2<T: Real>(c: &IdentityInputs<T>) -> Result<Sides<T>> {
    let f = c.frame;
    let lhs = f.omega(&c.t(c.psi)?.compose(&c.h(c.phi)?)?)?;
    let rhs = c
        .kernel_sum(&c.h(&c.psi.tilde())?, f.k_z(), &c.h(c.phi)?.adjoint(), f.k_zbar())?
        .scale(-cone::<T>());
    Ok((lhs, rhs))
}

fn relation<T: Real>(c: &IdentityInputs<T>) -> Result<Sides<T>> {
    let f = c.frame;
    let (x, y) = c.xy()?;
    let tb = f.t_phi_conj();
    let ox = f.omega_conj(&x)?;
    let oy = f.omega(&y)?;
    let lhs = f.delta(&x.compose(&y)?)?;
    let cb = c.identity()?.sub(&tb.compose(&tb.adjoint())?)?;
    let rhs = x
        .compose(&cb)?
        .compose(&y)?
        .sub(&x.compose(tb)?.compose(&oy)?)?
        .add(&ox.compose(&oy)?)?
        .add(&ox.compose(&tb.adjoint())?.compose(&y)?)?;
    Ok((lhs, rhs))
}

fn relation_adjoint<T: Real>(c: &IdentityInputs<T>) -> Result<Sides<T>> {
    let f = c.frame;
    let (x, _) = c.xy()?;
    let xs = x.adjoint();
    let tb = f.t_phi_conj();
    let ox = f.omega_conj(&x)?;
    let lhs = f.delta(&x.compose(&xs)?)?;
    let cb = c.identity()?.sub(&tb.compose(&tb.adjoint())?)?;
    let cross = ox.compose(&tb.adjoint())?.compose(&xs)?;
    let rhs = x
        .compose(&cb)?
        .compose(&xs)?
        .add(&cross.adjoint())?
        .sub(&ox.compose(&ox.adjoint())?)?
        .add(&cross)?;
    Ok((lhs, rhs))
}

fn omega_adjoint<T: Real>(c: &IdentityInputs<T>) -> Result<Sides<T>> {
    let f = c.frame;
    let (_, y) = c.xy()?;
    let lhs = f.omega(&y.adjoint())?;
    let rhs = f.omega_conj(&y)?.adjoint().scale(-cone::<T>());
    Ok((lhs, rhs))
}

fn trace<T: Real>(c: &IdentityInputs<T>) -> Result<Sides<T>> {
    let f = c.frame;
    let pairs = c.kernel_pairs(&c.h(c.phi)?, f.k_z(), &c.h(c.psi)?.adjoint(), f.k_zbar())?;
    let (l, r) = gram_trace_check(&pairs)?;
    Ok((scalar_op(l)?, scalar_op(r)?))
}

fn toeplitz_invariance<T: Real>(c: &IdentityInputs<T>) -> Result<Sides<T>> {
    let f = c.frame;
    let t = c.t(c.phi)?;
    let lhs = f.t_phi().adjoint().compose(&t)?.compose(f.t_phi())?;
    Ok((lhs, t))
}

fn hankel_intertwine<T: Real>(c: &IdentityInputs<T>) -> Result<Sides<T>> {
    let f = c.frame;
    let h = c.h(c.phi)?;
    Ok((h.compose(f.t_phi())?, f.t_phi_conj().adjoint().compose(&h)?))
}

fn registry<T: Real>() -> Vec<(&'static str, Builder<T>)> {
    vec![
        ("t1", t1::<T> as Builder<T>),
        ("h1", h1::<T>),
        ("t2", t2::<T>),
        ("h2", h2::<T>),
        ("aa", aa::<T>),
        ("bb", bb::<T>),
        ("ccc", ccc::<T>),
        ("mobius", mobius_hankel::<T>),
        ("mobius_projection", mobius_projection::<T>),
        ("key1", key1::<T>),
        ("key1_product", key1_product::<T>),
        ("key2", key2::<T>),
        ("relation", relation::<T>),
        ("relation_adjoint", relation_adjoint::<T>),
        ("omega_adjoint", omega_adjoint::<T>),
        ("trace", trace::<T>),
        ("toeplitz_invariance", toeplitz_invariance::<T>),
        ("hankel_intertwine", hankel_intertwine::<T>),
    ]
}

pub fn identity_names() -> Vec<&'static str> {
    registry::<f64>().into_iter().map(|(n, _)| n).collect()
}

/// Largest window entry of `lhs - rhs` for the named identity. Scalar
/// identities (`trace`) compare the two numbers directly.
pub fn verify_identity<T: Real>(name: &str, inputs: &IdentityInputs<T>, window: &WindowSpec) -> Result<T> {
    let (_, build) = registry::<T>()
        .into_iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::UnknownIdentity(name.to_string()))?;
    let (lhs, rhs) = build(inputs)?;
    let w = if lhs.len() == 1 { WindowSpec::square(0..1) } else { window.clone() };
    lhs.window_diff(&rhs, &w)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    pub n: usize,
    pub deg: i64,
    /// Nominal truncation length `N`; the window is `[0, N - margin)`.
    pub len: usize,
    pub margin: usize,
    pub draws: usize,
    pub seed: u64,
    /// Points as `[re, im]`.
    pub points: Vec<[f64; 2]>,
    pub tol: f64,
    /// Restrict to these identities; all when empty.
    #[serde(default)]
    pub names: Vec<String>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            n: 2,
            deg: 3,
            len: 64,
            margin: 16,
            draws: 20,
            seed: 0,
            points: vec![[0.0, 0.0], [0.5, 0.0], [0.3, 0.4]],
            tol: 1e-10,
            names: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub name: String,
    pub seed: u64,
    pub z: [f64; 2],
    pub n: usize,
    /// Nominal `N`.
    pub len: usize,
    /// Length actually evaluated, `N` plus padding for the tail of `phi_z`.
    pub len_eval: usize,
    pub window: [usize; 2],
    pub residual: f64,
    pub pass: bool,
}

/// Every selected identity at every point for `draws` seeded symbol pairs.
/// Reports are ordered by draw, then point, then registry order.
pub fn run_suite<T: Real>(cfg: &SuiteConfig) -> Result<Vec<IdentityReport>> {
    if cfg.n == 0 || cfg.len <= cfg.margin || cfg.deg < 0 {
        return Err(Error::Parameter(format!(
            "need n >= 1, deg >= 0 and N > margin (n={}, deg={}, N={}, margin={})",
            cfg.n, cfg.deg, cfg.len, cfg.margin
        )));
    }
    if !(cfg.tol > 0.0) {
        return Err(Error::Parameter("tolerance must be positive".into()));
    }
    let reg = registry::<T>();
    let selected: Vec<(&'static str, Builder<T>)> = if cfg.names.is_empty() {
        reg
    } else {
        cfg.names
            .iter()
            .map(|n| {
                reg.iter()
                    .find(|(r, _)| r == n)
                    .copied()
                    .ok_or_else(|| Error::UnknownIdentity(n.clone()))
            })
            .collect::<Result<_>>()?
    };
    let frames: Vec<MobiusFrame<T>> = cfg
        .points
        .iter()
        .map(|p| {
            let z = DiskPoint::new(cx(p[0], p[1]))?;
            let pad = tail_padding(&z);
            let len = if pad == 0 {
                cfg.len
            } else {
                cfg.len.max(cfg.len - cfg.margin + pad + 4 * cfg.deg as usize)
            };
            MobiusFrame::new(z, cfg.n, len)
        })
        .collect::<Result<_>>()?;
    let window = WindowSpec::square(0..cfg.len - cfg.margin);
    let per_draw: Vec<Result<Vec<IdentityReport>>> = (0..cfg.draws)
        .into_par_iter()
        .map(|d| {
            let seed = cfg.seed.wrapping_add(d as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let phi = random_laurent::<T, _>(&mut rng, cfg.n, cfg.deg);
            let psi = random_laurent::<T, _>(&mut rng, cfg.n, cfg.deg);
            let mut out = Vec::new();
            for (p, frame) in cfg.points.iter().zip(&frames) {
                let inputs = IdentityInputs { frame, phi: &phi, psi: &psi };
                for (name, build) in &selected {
                    let (lhs, rhs) = build(&inputs)?;
                    let w = if lhs.len() == 1 { WindowSpec::square(0..1) } else { window.clone() };
                    let r = to_f64(lhs.window_diff(&rhs, &w)?);
                    out.push(IdentityReport {
                        name: name.to_string(),
                        seed,
                        z: *p,
                        n: cfg.n,
                        len: cfg.len,
                        len_eval: frame.len(),
                        window: [w.rows.start, w.rows.end],
                        residual: r,
                        pass: r <= cfg.tol,
                    });
                }
            }
            Ok(out)
        })
        .collect();
    let mut all = Vec::new();
    for r in per_draw {
        all.extend(r?);
    }
    Ok(all)
}
