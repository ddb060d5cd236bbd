use super::gamma::single_term_infimum;
use super::*;
use crate::symbols::{blaschke_conj, diag, half_indicator, lift, random_laurent, MatrixSymbol};
use num_complex::Complex;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex<f64> {
    Complex::new(re, im)
}

fn w(k: i64) -> MatrixSymbol<f64> {
    MatrixSymbol::scalar([(k, c(1.0, 0.0))])
}

fn pt(r: f64, theta: f64) -> DiskPoint<f64> {
    DiskPoint::polar(r, theta).unwrap()
}

fn wbar2() -> MatrixSymbol<f64> {
    lift(&w(-1), &identity(2)).unwrap()
}

/// `Phi = diag(wbar, 0.05 wbar)`, `Psi = diag(w + w^2, 0.05 wbar)`.
fn compact_pair() -> (MatrixSymbol<f64>, MatrixSymbol<f64>) {
    let phi = diag(&[w(-1), w(-1).scale(c(0.05, 0.0))]).unwrap();
    let psi = diag(&[w(1).add(&w(2)).unwrap(), w(-1).scale(c(0.05, 0.0))]).unwrap();
    (phi, psi)
}

/// `||H_Phi H_{conj(phi_zbar)} H_Psi||_F^2` from truncations.
fn c1_oracle(phi: &MatrixSymbol<f64>, psi: &MatrixSymbol<f64>, z: &DiskPoint<f64>, len: usize) -> f64 {
    let h = hankel_trunc(phi, len).unwrap();
    let hz = hankel_trunc(&mobius_phi(&z.conj(), phi.n()).star(), len).unwrap();
    let hp = hankel_trunc(psi, len).unwrap();
    let f = h.compose(&hz).unwrap().compose(&hp).unwrap().frob_norm();
    f * f
}

fn quick() -> GammaOptions<f64> {
    GammaOptions {
        starts: 5,
        ..Default::default()
    }
}

#[test]
fn policy_values() {
    assert_eq!(truncation_policy(0.0), 64);
    assert_eq!(truncation_policy(0.9), 120);
    assert_eq!(truncation_policy(0.995), 2400);
}

#[test]
fn c1_wbar_closed_form() {
    for (r, t) in [(0.0, 0.0), (0.5, 0.3), (0.8, 2.0), (0.95, -1.0), (0.999, 0.0)] {
        let z = pt(r, t);
        let v = c1_trace(&w(-1), &w(-1), &z).unwrap();
        let e = (1.0 - r * r) * (1.0 - r * r);
        assert!((v.value - e).abs() < 1e-14, "r={r}: {} vs {e}", v.value);
        assert_eq!(v.bound, 0.0);
    }
}

#[test]
fn c1_vanishes_for_analytic_phi() {
    let z = pt(0.7, 1.0);
    let v = c1_trace(&w(2).add(&w(0)).unwrap(), &w(-3), &z).unwrap();
    assert_eq!(v.value, 0.0);
}

#[test]
fn c1_matches_triple_product_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 1..=3 {
        let phi = random_laurent::<f64, _>(&mut rng, n, 3);
        let psi = random_laurent::<f64, _>(&mut rng, n, 3);
        let z = pt(0.6, 0.4 * n as f64);
        let v = c1_trace(&phi, &psi, &z).unwrap().value;
        let o = c1_oracle(&phi, &psi, &z, 80);
        assert!((v - o).abs() < 1e-10 * (1.0 + o), "n={n}: {v} vs {o}");
    }
}

#[test]
fn c2_examples() {
    let z = pt(0.7, 0.2);
    assert!(c2_trace(&w(-1), &w(1), &z).unwrap().value < 1e-15);
    assert_eq!(c2_trace(&w(1), &w(-2), &z).unwrap().value, 0.0);
    let v = c2_trace(&w(-1), &w(-1), &z).unwrap().value;
    let o = product_kernel_norm_truncated(&w(-1), &w(-1), &z, truncation_policy(0.7)).unwrap();
    assert!((v - o * o).abs() < 1e-6, "{v} vs {}", o * o);
}

#[test]
fn product_kernel_against_truncation_and_trace() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in 1..=3 {
        let phi = random_laurent::<f64, _>(&mut rng, n, 3);
        let psi = random_laurent::<f64, _>(&mut rng, n, 3);
        let z = pt(0.75, -0.5);
        let p = product_kernel_norm(&phi, &psi, &z).unwrap().value;
        let o = product_kernel_norm_truncated(&phi, &psi, &z, 100).unwrap();
        assert!((p - o).abs() < 1e-9, "n={n}: {p} vs {o}");
        let c2 = c2_trace(&phi, &psi, &z).unwrap().value;
        assert!(p * p <= c2 + 1e-14);
        if n == 1 {
            assert!((p * p - c2).abs() < 1e-13);
        }
    }
}

#[test]
fn omega_against_truncation() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for n in 1..=3 {
        let phi = random_laurent::<f64, _>(&mut rng, n, 2);
        let psi = random_laurent::<f64, _>(&mut rng, n, 2);
        let z = pt(0.8, 2.5);
        let v = omega_norm(&phi, &psi, &z).unwrap().value;
        let o = omega_norm_truncated(&phi, &psi, &z, 120).unwrap();
        assert!((v - o).abs() < 1e-9, "n={n}: {v} vs {o}");
        let c1 = c1_trace(&phi, &psi, &z).unwrap().value;
        assert!(v * v <= c1 + 1e-14);
    }
    assert_eq!(omega_norm(&w(2), &w(-1), &pt(0.5, 0.0)).unwrap().value, 0.0);
    assert_eq!(product_kernel_norm(&w(2), &w(-1), &pt(0.5, 0.0)).unwrap().value, 0.0);
}

#[test]
fn zheng_wbar() {
    for r in [0.1, 0.5, 0.9, 0.99] {
        let z = pt(r, 1.0);
        let v = zheng_product(&w(-1), &w(-1), &z).unwrap().value;
        assert!((v - (1.0 - r * r).powi(2)).abs() < 1e-14);
    }
    assert!(zheng_product(&wbar2(), &wbar2(), &pt(0.5, 0.0)).is_err());
}

#[test]
fn kernel_trace_examples() {
    let zero = MatrixSymbol::<f64>::zero(2);
    assert_eq!(kernel_trace_crosscheck(&zero, &pt(0.5, 0.0), 64).unwrap(), (0.0, 0.0));
    for r in [0.3, 0.6, 0.9] {
        let z = pt(r, 0.7);
        let (s, t) = kernel_trace_crosscheck(&wbar2(), &z, truncation_policy(r)).unwrap();
        let e = 2.0 * (1.0 - r * r);
        assert!((s - e).abs() < 1e-14 && (t - e).abs() < 1e-8, "{s} {t} {e}");
    }
    let b = blaschke_conj(c(0.5, 0.0)).unwrap();
    let z = pt(0.8, 0.0);
    let (s, t) = kernel_trace_crosscheck(&b, &z, truncation_policy(0.8)).unwrap();
    assert!((s - t).abs() < 1e-6, "{s} vs {t}");
}

/// For real `phi`, `|phi_- - phi_-(z)|^2(z)` is half the Poisson variance,
/// and an indicator has variance `h (1 - h)`.
fn half_indicator_gram(z: &DiskPoint<f64>) -> f64 {
    let h = half_indicator::<f64>().value_at(z.z())[(0, 0)].re;
    0.5 * h * (1.0 - h)
}

#[test]
fn half_indicator_quadrature() {
    let s = half_indicator::<f64>();
    for (r, t) in [(0.0, 0.0), (0.5, 1.0), (0.9, 0.0), (0.99, 0.0), (0.995, 0.0), (0.9, -2.0)] {
        let z = pt(r, t);
        let g = kernel_gram(&s, &z);
        assert_eq!(g.method, GramMethod::Quadrature);
        let e = half_indicator_gram(&z);
        assert!((g.trace() - e).abs() < 1e-9, "r={r} t={t}: {} vs {e}", g.trace());
        assert!(g.bound < 1e-6);
    }
}

#[test]
fn certified_tails_use_series() {
    let b = blaschke_conj(c(0.5, 0.2)).unwrap();
    let z = pt(0.95, 0.3);
    let g = kernel_gram(&b, &z);
    assert_eq!(g.method, GramMethod::Series);
    let (_, q) = {
        let (gq, e) = quad::boundary_gram(&b.minus_part(), &z, 1e-12);
        (e, gq)
    };
    assert!((g.gram[(0, 0)] - q[(0, 0)]).norm() < 1e-9);
}

#[test]
fn c2_with_tail_against_truncation() {
    let phi = blaschke_conj(c(0.4, 0.0)).unwrap();
    let psi = crate::symbols::geometric(c(0.3, 0.1), true).unwrap().add(&w(-1)).unwrap();
    let z = pt(0.7, 1.2);
    let v = c2_trace(&phi, &psi, &z).unwrap();
    let o = product_kernel_norm_truncated(&phi, &psi, &z, 150).unwrap();
    assert!((v.value - o * o).abs() < 1e-9, "{} vs {}", v.value, o * o);
}

#[test]
fn gamma1_wbar_closed_form() {
    for r in [0.5, 0.8, 0.95] {
        let z = pt(r, 0.0);
        let g = gamma1(&w(-1), &w(-1), &z, &quick()).unwrap();
        let e = (1.0 - r * r).sqrt();
        assert!((g.value - e).abs() < 1e-6, "r={r}: {} vs {e}", g.value);
        assert!(g.spread() < 1e-4);
        assert!(g.a.iter().all(|x| x.norm() <= 4.0 + 1e-12));
    }
}

#[test]
fn gamma_trivial_cases() {
    let z = pt(0.9, 0.5);
    let g = gamma2(&w(2), &w(-1), &z, &quick()).unwrap();
    assert!(g.value < 1e-9, "{}", g.value);
    let g = gamma2(&w(-1), &w(1), &z, &quick()).unwrap();
    assert!(g.value < 1e-6, "{}", g.value);
    let g1 = gamma1(&w(3), &w(-1), &z, &quick()).unwrap();
    assert!(g1.value < 1e-9);
}

#[test]
fn gamma2_of_compact_pair() {
    let (phi, psi) = compact_pair();
    let z = pt(0.99, 0.0);
    let g = gamma2(&phi, &psi, &z, &quick()).unwrap();
    let e = 0.05 * (1.0f64 - 0.99 * 0.99).sqrt();
    assert!(g.value <= e + 1e-6, "{} vs {e}", g.value);
    assert!(g.spread() < 1e-4, "{:?}", g.start_values);
}

#[test]
fn gamma_starts_agree_and_bounds_hold() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for n in 1..=3 {
        let phi = random_laurent::<f64, _>(&mut rng, n, 2);
        let psi = random_laurent::<f64, _>(&mut rng, n, 2);
        let z = pt(0.8, 0.9);
        let opts = GammaOptions {
            starts: 6,
            seed: n as u64,
            ..Default::default()
        };
        let g1 = gamma1(&phi, &psi, &z, &opts).unwrap();
        let g2 = gamma2(&phi, &psi, &z, &opts).unwrap();
        assert!(g1.spread() < 1e-4 && g2.spread() < 1e-4, "{:?} {:?}", g1.start_values, g2.start_values);
        for k in 0..3 {
            let lb = single_term_infimum(&phi, &psi, &z, k, &opts).unwrap();
            assert!(g2.value >= lb - 1e-8, "term {k}: {} < {lb}", g2.value);
        }
        let om = omega_norm(&phi, &psi, &z).unwrap().value;
        let cst = phi.sup_norm(512).max(psi.sup_norm(512));
        assert!(om <= cst * g1.value + 1e-8, "n={n}: {om} > {cst} * {}", g1.value);
    }
}

#[test]
fn gamma_terms_match_truncated_operators() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let n = 2;
    let phi = random_laurent::<f64, _>(&mut rng, n, 2);
    let psi = random_laurent::<f64, _>(&mut rng, n, 2);
    let z = pt(0.6, 0.1);
    let g = gamma2(&phi, &psi, &z, &quick()).unwrap();
    let len = 80;
    let a = &g.a;
    let hz = hankel_trunc(&mobius_phi(&z.conj(), n).star(), len).unwrap();
    let ia = identity::<f64>(n) - a;
    let t1 = hankel_trunc(&phi.const_mul(&ia, crate::symbols::Side::Right).unwrap(), len)
        .unwrap()
        .compose(&hz)
        .unwrap()
        .op_norm()
        .unwrap();
    let t2 = hz
        .compose(&hankel_trunc(&psi.const_mul(a, crate::symbols::Side::Left).unwrap(), len).unwrap())
        .unwrap()
        .op_norm()
        .unwrap();
    let pap = phi.const_mul(a, crate::symbols::Side::Right).unwrap().mul(&psi, None).unwrap();
    let t3 = hankel_trunc(&pap, len).unwrap().compose(&hz).unwrap().op_norm().unwrap();
    for (x, y) in g.terms.iter().zip([t1, t2, t3]) {
        assert!((x - y).abs() < 1e-9, "{x} vs {y}");
    }
}

#[test]
fn embed_sum_blocks() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let pairs: Vec<_> = (0..2)
        .map(|_| (random_laurent::<f64, _>(&mut rng, 1, 3), random_laurent::<f64, _>(&mut rng, 1, 3)))
        .collect();
    let (phi, psi) = embed_sum(&pairs, None).unwrap();
    let len = 20;
    let big = hankel_trunc(&phi, len).unwrap().compose(&toeplitz_trunc(&psi, len).unwrap()).unwrap();
    let mut sum = zeros::<f64>(len, len);
    for (a, b) in &pairs {
        sum += hankel_trunc(a, len).unwrap().compose(&toeplitz_trunc(b, len).unwrap()).unwrap().data();
    }
    let data = big.data();
    let mut err = 0.0f64;
    for i in 0..2 * len {
        for j in 0..2 * len {
            let v = data[(i, j)];
            let e = if i % 2 == 0 && j % 2 == 0 { sum[(i / 2, j / 2)] } else { c(0.0, 0.0) };
            err = err.max((v - e).norm());
        }
    }
    assert!(err < 1e-10, "{err}");
}

#[test]
fn embed_sum_zero_padding() {
    let (a, b) = (w(-1).add(&w(2)).unwrap(), w(-2).add(&w(1)).unwrap());
    let (p1, q1) = embed_sum(&[(a.clone(), b.clone())], None).unwrap();
    let z0 = MatrixSymbol::zero(1);
    let (p2, q2) = embed_sum(&[(a, b), (z0.clone(), z0)], None).unwrap();
    assert_eq!(p1.n(), 1);
    let z = pt(0.7, 0.3);
    for f in [c1_trace::<f64>, c2_trace::<f64>] {
        let x = f(&p1, &q1, &z).unwrap().value;
        let y = f(&p2, &q2, &z).unwrap().value;
        assert!((x - y).abs() < 1e-12);
    }
    let x = omega_norm(&p1, &q1, &z).unwrap().value;
    let y = omega_norm(&p2, &q2, &z).unwrap().value;
    assert!((x - y).abs() < 1e-12);
    assert!(embed_sum::<f64>(&[], None).is_err());
}

#[test]
fn sweep_empty_and_order() {
    let grid = SweepGrid::new(vec![1.5, 0.0], vec![0.5, 0.9]).unwrap();
    let rep = radial_sweep(&w(-1), &w(-1), &grid, &[], &SweepOptions::default()).unwrap();
    assert!(rep.is_empty());
    let rep = radial_sweep(&w(-1), &w(-1), &grid, &[Quantity::C1, Quantity::Zheng], &SweepOptions::default()).unwrap();
    let order: Vec<_> = rep.rows.iter().map(|r| (r.theta, r.r)).collect();
    assert_eq!(order, vec![(0.0, 0.5), (0.0, 0.9), (1.5, 0.5), (1.5, 0.9)]);
    assert!(rep.trends.iter().all(|t| t.decreasing && t.slope < 0.0));
    let csv = rep.to_csv();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.starts_with("theta,r,c1,c2,zheng,gamma1,gamma2,omega_norm,product_kernel_norm,N,tail_bound\n"));
}

#[test]
fn grid_validation() {
    assert!(SweepGrid::new(vec![0.0], vec![0.5, 0.5]).is_err());
    assert!(SweepGrid::new(vec![0.0], vec![0.5, 1.0]).is_err());
    assert!(SweepGrid::new(vec![0.0], vec![0.0, 0.5]).is_err());
    assert_eq!(SweepGrid::parse_radii("0.5:0.9:5").unwrap(), vec![0.5, 0.6, 0.7, 0.8, 0.9]);
    assert_eq!(SweepGrid::parse_rays("0,1.5").unwrap(), vec![0.0, 1.5]);
    assert_eq!(Quantity::parse_list("gamma2,c1,c1").unwrap(), vec![Quantity::C1, Quantity::Gamma2]);
    assert!(Quantity::parse_list("c3").is_err());
}

#[test]
fn sweep_records_failures_and_continues() {
    let grid = SweepGrid::new(vec![0.0], vec![0.5, 0.9]).unwrap();
    let opts = SweepOptions {
        gamma: GammaOptions {
            d: Some(-1.0),
            ..Default::default()
        },
    };
    let rep = radial_sweep(&w(-1), &w(-1), &grid, &[Quantity::C1, Quantity::Gamma1], &opts).unwrap();
    assert_eq!(rep.rows.len(), 2);
    assert_eq!(rep.failures(), 2);
    assert!(rep.rows.iter().all(|r| r.c1.is_some() && r.gamma1.is_none()));
}

#[test]
fn compact_pair_sweep_decreases() {
    let (phi, psi) = compact_pair();
    let radii = vec![0.9, 0.95, 0.99];
    let grid = SweepGrid::new(vec![0.0, 1.5708, 3.0], radii).unwrap();
    let which = [Quantity::C1, Quantity::C2, Quantity::Gamma2];
    let rep = radial_sweep(&phi, &psi, &grid, &which, &SweepOptions::default()).unwrap();
    assert_eq!(rep.failures(), 0);
    for q in which {
        assert!(rep.max_at(q, 0.99).unwrap() <= 1e-2);
    }
    assert!(rep.trends.iter().all(|t| t.decreasing), "{:?}", rep.trends);
}

#[test]
fn half_indicator_c1_stays_away_from_zero() {
    let s = half_indicator::<f64>();
    for r in [0.9, 0.95, 0.99, 0.995] {
        let z = pt(r, 0.0);
        let v = c1_trace(&s, &s, &z).unwrap();
        // the Gram of (psi_-)~* at zbar equals the one of phi_- at z here
        let e = half_indicator_gram(&z).powi(2);
        assert!((v.value - e).abs() < 1e-9, "r={r}: {} vs {e}", v.value);
        assert!(v.value > 0.01);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn diagnostics_nonnegative_and_consistent(seed in any::<u64>(), n in 1usize..=3, r in 0.0f64..0.85, t in -3.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phi = random_laurent::<f64, _>(&mut rng, n, 2);
        let psi = random_laurent::<f64, _>(&mut rng, n, 2);
        let z = pt(r, t);
        let c1 = c1_trace(&phi, &psi, &z).unwrap().value;
        let c2 = c2_trace(&phi, &psi, &z).unwrap().value;
        prop_assert!(c1 >= 0.0 && c2 >= 0.0);
        let o = c1_oracle(&phi, &psi, &z, 100);
        prop_assert!((c1 - o).abs() < 1e-10);
        let (s, tr) = kernel_trace_crosscheck(&phi, &z, truncation_policy(r)).unwrap();
        prop_assert!((s - tr).abs() < 1e-10);
    }

    #[test]
    fn c1_scales_quadratically(seed in any::<u64>(), a in 0.1f64..3.0, b in -3.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phi = random_laurent::<f64, _>(&mut rng, 2, 2);
        let psi = random_laurent::<f64, _>(&mut rng, 2, 2);
        let z = pt(0.7, 0.2);
        let k = c(a, b);
        let x = c1_trace(&phi.scale(k), &psi, &z).unwrap().value;
        let y = c1_trace(&phi, &psi, &z).unwrap().value;
        prop_assert!((x - k.norm_sqr() * y).abs() < 1e-11 * (1.0 + x));
    }
}
