use super::*;
use crate::symbols::{blaschke_conj, coshift, mobius_phi, shift, DiskPoint};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type C = Complex<f64>;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

fn rand_laurent(rng: &mut ChaCha8Rng, n: usize, deg: i64) -> MatrixSymbol<f64> {
    MatrixSymbol::laurent(
        n,
        (-deg..=deg).map(|k| {
            (
                k,
                CMat::from_fn(n, n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))),
            )
        }),
    )
    .unwrap()
}

#[test]
fn toeplitz_examples() {
    let t = toeplitz_trunc(&MatrixSymbol::<f64>::identity(2), 5).unwrap();
    assert_eq!(t.data(), &identity::<f64>(10));
    let s = toeplitz_trunc(&shift::<f64>(1), 3).unwrap();
    let expect = CMat::from_fn(3, 3, |i, j| if i == j + 1 { c(1.0, 0.0) } else { c(0.0, 0.0) });
    assert_eq!(s.data(), &expect);

    let z = DiskPoint::new(c(0.3, 0.2)).unwrap();
    let phi = toeplitz_trunc(&mobius_phi::<f64>(&z, 2), 6).unwrap();
    let zz = z.z();
    // geometric expansion of (w - z)/(1 - zbar w)
    assert!(max_abs(&(phi.block(0, 0) - identity::<f64>(2) * (-zz))) < 1e-15);
    for m in 1..6 {
        let e = zz.conj().powu(m as u32 - 1) * (1.0 - zz.norm_sqr());
        assert!(max_abs(&(phi.block(m, 0) - identity::<f64>(2) * e)) < 1e-15);
        assert_eq!(phi.block(0, m), zeros(2, 2));
    }
}

/// `P J (s w^j e)` computed coefficient by coefficient: `J f(w) = wbar f(wbar)`
/// maps `w^{-m}` to `w^{m-1}`.
fn hankel_oracle(s: &MatrixSymbol<f64>, len: usize) -> CMat<f64> {
    let n = s.n();
    let mut out = zeros(n * len, n * len);
    for j in 0..len {
        for m in 1..=(2 * len as i64) {
            // coefficient of w^{-m} in s w^j is s^(-m - j)
            let row = (m - 1) as usize;
            if row < len {
                let blk = s.coeff(-m - j as i64);
                out.view_mut((row * n, j * n), (n, n)).copy_from(&blk);
            }
        }
    }
    out
}

#[test]
fn hankel_examples() {
    let analytic = MatrixSymbol::scalar([(0, c(1.0, 0.0)), (3, c(2.0, 1.0))]);
    let h = hankel_trunc(&analytic, 8).unwrap();
    assert_eq!(frob(h.data()), 0.0);

    let h1 = hankel_trunc(&coshift::<f64>(1), 3).unwrap();
    let mut e = zeros(3, 3);
    e[(0, 0)] = c(1.0, 0.0);
    assert_eq!(h1.data(), &e);
    assert_eq!(hankel_oracle(&coshift(1), 3), e);

    let w2 = MatrixSymbol::scalar([(-2, c(1.0, 0.0))]);
    let h2 = hankel_trunc(&w2, 3).unwrap();
    let mut e = zeros(3, 3);
    e[(0, 1)] = c(1.0, 0.0);
    e[(1, 0)] = c(1.0, 0.0);
    assert_eq!(h2.data(), &e);
    assert_eq!(hankel_oracle(&w2, 3), e);

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let s = rand_laurent(&mut rng, 2, 4);
    assert_eq!(hankel_trunc(&s, 7).unwrap().data(), &hankel_oracle(&s, 7));
}

#[test]
fn compose_adjoint_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let s = rand_laurent(&mut rng, 2, 3);
    let x = toeplitz_trunc(&s, 10).unwrap();
    let id = TruncatedOperator::identity(2, 10).unwrap();
    assert_eq!(x.compose(&id).unwrap().data(), x.data());
    assert_eq!(&x.adjoint().adjoint(), &x);
    assert_eq!(x.adjoint().data(), toeplitz_trunc(&s.star(), 10).unwrap().data());
    let h = hankel_trunc(&s, 10).unwrap();
    assert_eq!(h.adjoint().data(), hankel_trunc(&s.tilde().star(), 10).unwrap().data());
    assert_eq!(h.data(), hankel_trunc(&s.minus_part(), 10).unwrap().data());
    assert!(x.compose(&TruncatedOperator::identity(2, 9).unwrap()).is_err());
}

#[test]
fn norm_examples() {
    let id = TruncatedOperator::<f64>::identity(2, 4).unwrap();
    assert!((id.op_norm().unwrap() - 1.0).abs() < 1e-14);
    assert!((id.frob_norm() - 8f64.sqrt()).abs() < 1e-14);
    assert_eq!(id.trace_of(), c(8.0, 0.0));

    let u = CVec::from_fn(6, |i, _| c(i as f64, 1.0));
    let v = CVec::from_fn(6, |i, _| c(1.0, -(i as f64) / 3.0));
    let r = rank_one_sum(1, 6, &[(u.clone(), v.clone())]).unwrap();
    assert!((r.op_norm().unwrap() - vec_norm(&u) * vec_norm(&v)).abs() < 1e-12);
    assert_eq!(r.num_rank(None), 1);
}

#[test]
fn power_iteration_matches_svd() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..5 {
        let x = CMat::<f64>::from_fn(16, 16, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let svd = x.clone().singular_values().max();
        let est = norms::power_norm(&x, 100_000, 1e-15).unwrap();
        assert!((est.value - svd).abs() < 1e-8, "{} vs {svd}", est.value);
        assert!(est.lower <= svd + 1e-12 && est.upper >= svd - 1e-12);
    }
}

#[test]
fn large_operator_uses_power_iteration() {
    let s = blaschke_conj::<f64>(c(0.5, 0.0)).unwrap();
    let h = hankel_trunc(&s, 1100).unwrap();
    let est = h.op_norm_estimate().unwrap();
    assert!(est.iterations > 0);
    // the Hankel matrix of conj(b_a) is rank one: 0.75 * sum 0.25^k = 1
    assert!((est.value - 1.0).abs() < 1e-8);
}

#[test]
fn rank_one_examples() {
    let mut e0 = CVec::<f64>::zeros(4);
    e0[0] = c(1.0, 0.0);
    let p = rank_one_sum(1, 4, &[(e0.clone(), e0.clone())]).unwrap();
    let mut expect = zeros(4, 4);
    expect[(0, 0)] = c(1.0, 0.0);
    assert_eq!(p.data(), &expect);

    // projection onto constants: first block is the identity
    let n = 3;
    let len = 4;
    let pairs: Vec<_> = (0..n)
        .map(|i| {
            let mut e = CVec::<f64>::zeros(n * len);
            e[i] = c(1.0, 0.0);
            (e.clone(), e)
        })
        .collect();
    let ce = rank_one_sum(n, len, &pairs).unwrap();
    let f = CVec::from_fn(n * len, |i, _| c(i as f64 + 1.0, 0.5));
    let pf = ce.apply(&f).unwrap();
    for i in 0..n * len {
        let expect = if i < n { f[i] } else { c(0.0, 0.0) };
        assert_eq!(pf[i], expect);
    }
    assert!(rank_one_sum::<f64>(n, len, &[(CVec::zeros(3), CVec::zeros(12))]).is_err());
}

#[test]
fn structure_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let s = rand_laurent(&mut rng, 2, 3);
    let w = WindowSpec::interior(32, 4);
    assert!(toeplitz_trunc(&s, 32).unwrap().is_toeplitz_window(&w).unwrap() <= 1e-12);
    assert!(hankel_trunc(&s, 32).unwrap().is_hankel_window(&w).unwrap() <= 1e-12);
    assert!(toeplitz_trunc(&s, 32).unwrap().is_toeplitz_window(&WindowSpec::square(0..32)).is_err());

    // H_{wbar} T_{wbar} = 1 (x) w
    let hw = hankel_trunc(&coshift::<f64>(1), 8).unwrap();
    let tw = toeplitz_trunc(&coshift::<f64>(1), 8).unwrap();
    let prod = hw.compose(&tw).unwrap();
    let mut e0 = CVec::<f64>::zeros(8);
    e0[0] = c(1.0, 0.0);
    let mut e1 = CVec::<f64>::zeros(8);
    e1[1] = c(1.0, 0.0);
    let r1 = rank_one_sum(1, 8, &[(e0, e1)]).unwrap();
    assert_eq!(prod.data(), r1.data());
    assert!(prod.is_hankel_window(&WindowSpec::square(0..2)).unwrap() >= 1.0);
}

#[test]
fn csv_roundtrip() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let s = rand_laurent(&mut rng, 2, 2);
    let h = hankel_trunc(&s, 5).unwrap();
    let mut buf = Vec::new();
    write_csv(&h, &mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with("# n=2 N=5 provenance=hankel\n"));
    let back: TruncatedOperator<f64> = read_csv(&buf[..]).unwrap();
    assert_eq!(back, h);
    assert!(read_csv::<f64, _>("# n=1 N=2\n1,0,0,0\n0,0,1,0\n".as_bytes()).is_err());
    assert!(read_csv::<f64, _>("# n=1 N=2 provenance=toeplitz\n1,0,0,0\n".as_bytes()).is_err());
}

#[test]
fn size_cap_enforced() {
    assert!(TruncatedOperator::<f64>::identity(2, 2049).is_err());
    assert!(toeplitz_trunc(&MatrixSymbol::<f64>::identity(1), 0).is_err());
}

fn draw(seed: u64, n: usize, deg: i64) -> MatrixSymbol<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rand_laurent(&mut rng, n, deg)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Truncated T_{ab} = T_a T_b + H_{a~} H_b away from the edge.
    #[test]
    fn prop_corner_agreement_t1(seed in 0u64..1000, n in 1usize..=3, d in 1i64..=4) {
        let a = draw(seed, n, d);
        let b = draw(seed + 7919, n, d);
        let len = 40;
        let lhs = toeplitz_trunc(&a.mul(&b, None).unwrap(), len).unwrap();
        let rhs = toeplitz_trunc(&a, len).unwrap().compose(&toeplitz_trunc(&b, len).unwrap()).unwrap()
            .add(&hankel_trunc(&a.tilde(), len).unwrap().compose(&hankel_trunc(&b, len).unwrap()).unwrap()).unwrap();
        let w = WindowSpec::interior(len, 2 * d as usize);
        prop_assert!(lhs.window_diff(&rhs, &w).unwrap() <= 1e-10);
    }

    #[test]
    fn prop_corner_agreement_h1(seed in 0u64..1000, n in 1usize..=3, d in 1i64..=4) {
        let a = draw(seed, n, d);
        let b = draw(seed + 104_729, n, d);
        let len = 40;
        let lhs = hankel_trunc(&a.mul(&b, None).unwrap(), len).unwrap();
        let rhs = hankel_trunc(&a, len).unwrap().compose(&toeplitz_trunc(&b, len).unwrap()).unwrap()
            .add(&toeplitz_trunc(&a.tilde(), len).unwrap().compose(&hankel_trunc(&b, len).unwrap()).unwrap()).unwrap();
        let w = WindowSpec::interior(len, 2 * d as usize);
        prop_assert!(lhs.window_diff(&rhs, &w).unwrap() <= 1e-10);
    }

    #[test]
    fn prop_hankel_adjoint_and_minus(seed in 0u64..1000, n in 1usize..=3) {
        let s = draw(seed, n, 4);
        let h = hankel_trunc(&s, 12).unwrap();
        prop_assert_eq!(h.adjoint().into_data(), hankel_trunc(&s.tilde().star(), 12).unwrap().into_data());
        prop_assert_eq!(h.into_data(), hankel_trunc(&s.minus_part(), 12).unwrap().into_data());
    }

    #[test]
    fn prop_rank_one_sum_rank(seed in 0u64..1000, m in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pairs: Vec<_> = (0..m).map(|_| {
            let u = CVec::<f64>::from_fn(16, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let v = CVec::<f64>::from_fn(16, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            (u, v)
        }).collect();
        let r = rank_one_sum(2, 8, &pairs).unwrap();
        prop_assert!(r.num_rank(None) <= m);
    }
}
