use super::*;
use crate::operators::{hankel_trunc, toeplitz_trunc, WindowSpec};
use crate::symbols::{diag, random_laurent, MatrixSymbol, Side};
use num_complex::Complex;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex<f64> {
    Complex::new(re, im)
}

fn w(k: i64) -> MatrixSymbol<f64> {
    MatrixSymbol::scalar([(k, c(1.0, 0.0))])
}

fn rvec(rng: &mut ChaCha8Rng, d: usize) -> CVec<f64> {
    CVec::from_fn(d, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

fn rmat(rng: &mut ChaCha8Rng, r: usize, s: usize) -> CMat<f64> {
    CMat::from_fn(r, s, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

fn mask(n: usize, keep: std::ops::Range<usize>) -> CMat<f64> {
    CMat::from_fn(n, n, |i, j| if i == j && keep.contains(&i) { c(1.0, 0.0) } else { c(0.0, 0.0) })
}

/// `Phi = [U1 W2] D`, `Psi = D^-1 [W1; U2]` from random blocks.
fn huw_instance(rng: &mut ChaCha8Rng, n: usize, l: usize, deg: i64) -> (MatrixSymbol<f64>, MatrixSymbol<f64>) {
    let first = mask(n, 0..l);
    let last = mask(n, l..n);
    let u1 = random_laurent::<f64, _>(rng, n, deg).const_mul(&first, Side::Right).unwrap();
    let w2 = random_laurent::<f64, _>(rng, n, deg).plus_part().const_mul(&last, Side::Right).unwrap();
    let w1 = random_laurent::<f64, _>(rng, n, deg).plus_part().const_mul(&first, Side::Left).unwrap();
    let u2 = random_laurent::<f64, _>(rng, n, deg).const_mul(&last, Side::Left).unwrap();
    let d = identity::<f64>(n) + rmat(rng, n, n) * c(0.3, 0.0);
    let di = d.clone().try_inverse().unwrap();
    let phi = u1.add(&w2).unwrap().const_mul(&d, Side::Right).unwrap();
    let psi = w1.add(&u2).unwrap().const_mul(&di, Side::Left).unwrap();
    (phi, psi)
}

/// `(is_hankel residual of H_Phi T_Psi, distance to H_{Phi A Psi})` on an
/// interior window.
fn product_check(phi: &MatrixSymbol<f64>, psi: &MatrixSymbol<f64>, a: &CMat<f64>, len: usize, margin: usize) -> (f64, f64) {
    let prod = hankel_trunc(phi, len)
        .unwrap()
        .compose(&toeplitz_trunc(psi, len).unwrap())
        .unwrap();
    let sym = phi
        .const_mul(a, Side::Right)
        .unwrap()
        .mul(psi, None)
        .unwrap();
    let win = WindowSpec::interior(len, margin);
    let h = prod.is_hankel_window(&win).unwrap();
    let e = prod.window_diff(&hankel_trunc(&sym, len).unwrap(), &win).unwrap();
    (h, e)
}

#[test]
fn box_matrix_checks_entries() {
    assert!(BoxMatrix::new(identity::<f64>(2), 1.0).is_ok());
    assert!(BoxMatrix::new(identity::<f64>(2) * c(1.5, 0.0), 1.0).is_err());
    assert!(BoxMatrix::new(identity::<f64>(2), 0.0).is_err());
    assert!(BoxMatrix::new(zeros::<f64>(2, 3), 1.0).is_err());
}

#[test]
fn analytic_phi_gives_zero() {
    let phi = diag(&[w(1), w(2)]).unwrap();
    let psi = diag(&[w(-1), w(-2)]).unwrap();
    let f = find_feasible_a(&phi, &psi, 1.0, 64).unwrap();
    assert_eq!(f.matrix().unwrap(), &zeros::<f64>(2, 2));
}

#[test]
fn analytic_psi_gives_identity() {
    let phi = diag(&[w(-1), w(-2)]).unwrap();
    let psi = diag(&[w(1), w(0)]).unwrap();
    let f = find_feasible_a(&phi, &psi, 1.0, 64).unwrap();
    assert_eq!(f.matrix().unwrap(), &identity::<f64>(2));
}

#[test]
fn both_analytic_notes_the_degenerate_case() {
    let s = diag(&[w(1), w(0)]).unwrap();
    match find_feasible_a(&s, &s, 1.0, 64).unwrap() {
        Feasibility::Feasible { a, note, .. } => {
            assert_eq!(a.matrix(), &zeros::<f64>(2, 2));
            assert!(note.is_some());
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn diagonal_pair() {
    let phi = diag(&[w(-1), w(1)]).unwrap();
    let psi = diag(&[w(1), w(-1)]).unwrap();
    let f = find_feasible_a(&phi, &psi, 1.0, 64).unwrap();
    let a = f.matrix().unwrap();
    // X(I - A) = 0 fixes the first row to (1, 0), AY = 0 kills the second
    // column; the remaining entry is free and the minimum-norm choice is 0.
    let want = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    assert!(max_abs(&(a - &want)) < 1e-12, "{a}");
    let (h, e) = product_check(&phi, &psi, a, 16, 3);
    assert!(h < 1e-14 && e < 1e-14);
    let prod = hankel_trunc(&phi, 16).unwrap().compose(&toeplitz_trunc(&psi, 16).unwrap()).unwrap();
    assert!(max_abs(prod.data()) < 1e-15);
}

#[test]
fn scalar_conjugate_pair_is_infeasible() {
    let s = w(-1);
    match find_feasible_a(&s, &s, 1.0, 64).unwrap() {
        Feasibility::Infeasible { margin, best_value, .. } => {
            // min (1 - a)^2 + a^2 = 1/2 at a = 1/2
            assert!((margin - 0.5).abs() < 1e-12, "{margin}");
            assert!((best_value - 0.5).abs() < 1e-10);
        }
        other => panic!("{other:?}"),
    }
    let prod = hankel_trunc(&s, 12).unwrap().compose(&toeplitz_trunc(&s, 12).unwrap()).unwrap();
    let h = prod.is_hankel_window(&WindowSpec::interior(12, 2)).unwrap();
    assert!((h - 1.0).abs() < 1e-15);
}

#[test]
fn box_alone_can_block() {
    // X = [1], Y = 0 forces a = 1, outside a box of radius 1/2
    match find_feasible_a(&w(-1), &w(1), 0.5, 64).unwrap() {
        Feasibility::Infeasible { margin, .. } => assert!((margin - 0.25).abs() < 1e-9, "{margin}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn alternating_projections_reach_the_box() {
    // row (1, 3) of X: columns of A solve a_0j + 3 a_1j = x_j. The minimum
    // norm solution has an entry 0.9, but 0.8 is attainable.
    let m = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(3.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    let phi = MatrixSymbol::monomial(-1, m.clone()).unwrap();
    let psi = MatrixSymbol::identity(2);
    let f = find_feasible_a(&phi, &psi, 0.8, 64).unwrap();
    let a = f.matrix().expect("feasible");
    assert!(max_abs(a) <= 0.8 + 1e-12);
    assert!(frob(&(&m * (identity::<f64>(2) - a))) < 1e-8);
    assert!(matches!(find_feasible_a(&phi, &psi, 0.5, 64).unwrap(), Feasibility::Infeasible { .. }));
}

#[test]
fn huw_instances_are_feasible_and_sound() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for t in 0..50 {
        let n = 1 + t % 3;
        let l = t % (n + 1);
        let (phi, psi) = huw_instance(&mut rng, n, l, 2);
        let d = 4f64.powi(n as i32);
        let f = find_feasible_a(&phi, &psi, d, 64).unwrap();
        let a = f.matrix().unwrap_or_else(|| panic!("instance {t}: {f:?}"));
        let (h, e) = product_check(&phi, &psi, a, 20, 4);
        assert!(h <= 1e-8 && e <= 1e-8, "instance {t}: {h:e} {e:e}");
    }
}

#[test]
fn generic_pairs_are_not_hankel() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let phi = random_laurent::<f64, _>(&mut rng, 2, 2);
        let psi = random_laurent::<f64, _>(&mut rng, 2, 2);
        match find_feasible_a(&phi, &psi, 16.0, 64).unwrap() {
            Feasibility::Infeasible { margin, .. } => {
                assert!(margin > 0.0);
                let prod = hankel_trunc(&phi, 16).unwrap().compose(&toeplitz_trunc(&psi, 16).unwrap()).unwrap();
                assert!(prod.is_hankel_window(&WindowSpec::interior(16, 4)).unwrap() > 1e-6);
            }
            other => panic!("{other:?}"),
        }
    }
}

#[test]
fn tail_symbols_report_truncated_mass() {
    let q = crate::symbols::geometric::<f64>(c(0.5, 0.0), false).unwrap();
    let f = find_feasible_a(&w(1), &q, 1.0, 10).unwrap();
    match f {
        Feasibility::Feasible { truncated_mass, .. } => {
            assert!(truncated_mass > 0.0 && truncated_mass < 1e-5, "{truncated_mass:e}");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn huw_diagonal_pair() {
    let phi = diag(&[w(-1), w(1)]).unwrap();
    let psi = diag(&[w(1), w(-1)]).unwrap();
    let h = huw_decompose(&phi, &psi, 64).unwrap();
    assert_eq!(h.l, 1);
    assert!(h.reassembly < 1e-12);
    let p = h.product_symbol(None).unwrap();
    assert!(max_abs(hankel_trunc(&p, 12).unwrap().data()) < 1e-14);
}

#[test]
fn huw_analytic_phi() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let phi = random_laurent::<f64, _>(&mut rng, 2, 2).plus_part();
    let psi = random_laurent::<f64, _>(&mut rng, 2, 2);
    let h = huw_decompose(&phi, &psi, 64).unwrap();
    assert_eq!(h.l, 0);
    assert!(h.reassembly < 1e-12);
    let p = h.product_symbol(None).unwrap();
    let prod = hankel_trunc(&phi, 16).unwrap().compose(&toeplitz_trunc(&psi, 16).unwrap()).unwrap();
    let win = WindowSpec::interior(16, 4);
    assert!(prod.window_diff(&hankel_trunc(&p, 16).unwrap(), &win).unwrap() < 1e-12);
}

#[test]
fn huw_rejects_infeasible() {
    assert!(matches!(huw_decompose(&w(-1), &w(-1), 64), Err(Error::Infeasible { .. })));
}

#[test]
fn huw_roundtrip() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for t in 0..20 {
        let n = 2 + t % 2;
        let l = 1 + t % n;
        let (phi, psi) = huw_instance(&mut rng, n, l, 2);
        let h = huw_decompose(&phi, &psi, 64).unwrap();
        assert!(h.reassembly < 1e-10, "{:e}", h.reassembly);
        assert!(h.l <= n);
        for k in 1..=4 {
            assert!(max_abs(&h.w1.coeff(-k)) == 0.0 && max_abs(&h.w2.coeff(-k)) == 0.0);
        }
        let p = h.product_symbol(None).unwrap();
        let prod = hankel_trunc(&phi, 20).unwrap().compose(&toeplitz_trunc(&psi, 20).unwrap()).unwrap();
        let e = prod.window_diff(&hankel_trunc(&p, 20).unwrap(), &WindowSpec::interior(20, 4)).unwrap();
        assert!(e < 1e-8, "{e:e}");
        assert!((h.d.clone() * &h.d_inv - identity::<f64>(n)).norm() < 1e-12);
    }
}

#[test]
fn xy_zero_y_gives_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let xs: Vec<_> = (0..3).map(|_| rvec(&mut rng, 4)).collect();
    let ys = vec![CVec::<f64>::zeros(4); 3];
    let cert = xy_certificate(&xs, &ys, 1e-10).unwrap();
    assert_eq!(cert.a, identity::<f64>(3));
}

#[test]
fn xy_zero_x_gives_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let xs = vec![CVec::<f64>::zeros(4); 3];
    let ys: Vec<_> = (0..3).map(|_| rvec(&mut rng, 4)).collect();
    let cert = xy_certificate(&xs, &ys, 1e-10).unwrap();
    assert!(max_abs(&cert.a) < 1e-12, "{}", cert.a);
}

#[test]
fn xy_opposite_pair() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let u = rvec(&mut rng, 3);
    let v = rvec(&mut rng, 3);
    let xs = vec![v.clone(), -v.clone()];
    let ys = vec![u.clone(), u.clone()];
    let cert = xy_certificate(&xs, &ys, 1e-10).unwrap();
    assert_eq!(cert.method, XyMethod::Recursion);
    // direct evaluation of x (I - A) and y A^*
    let a = &cert.a;
    for j in 0..2 {
        let xr = &xs[j] - (&xs[0] * a[(0, j)] + &xs[1] * a[(1, j)]);
        assert!(xr.norm() < 1e-10);
        let yr = &ys[0] * a[(j, 0)].conj() + &ys[1] * a[(j, 1)].conj();
        assert!(yr.norm() < 1e-10);
    }
    assert!(max_abs(a) <= 1.0 + 1e-12);
}

#[test]
fn xy_rejects_nonzero_sums() {
    let e = CVec::<f64>::from_element(2, c(1.0, 0.0));
    match xy_certificate(&[e.clone()], &[e], 1e-10) {
        Err(Error::NonZeroRankOneSum(f)) => assert!((f - 2.0).abs() < 1e-12),
        other => panic!("{other:?}"),
    }
}

#[test]
fn xy_ties_pick_the_smallest_index() {
    let e0 = CVec::<f64>::from_column_slice(&[c(1.0, 0.0), c(0.0, 0.0)]);
    let e1 = CVec::<f64>::from_column_slice(&[c(0.0, 0.0), c(1.0, 0.0)]);
    let z = CVec::<f64>::zeros(2);
    let cert = xy_certificate(&[z.clone(), z], &[e0, e1], 1e-10).unwrap();
    assert_eq!(cert.sigma, vec![0, 1]);
}

#[test]
fn basis_duplicate_pair() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let u = rvec(&mut rng, 3);
    let b = bounded_basis_extraction(&[u.clone(), u], 1e-10).unwrap();
    assert_eq!(b.rank, 1);
    assert!((b.b[(0, 0)] - c(1.0, 0.0)).norm() < 1e-12);
}

#[test]
fn basis_sum_family() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let u = rvec(&mut rng, 4);
    let v = rvec(&mut rng, 4);
    let xs = vec![u.clone(), v.clone(), &u + &v];
    let b = bounded_basis_extraction(&xs, 1e-10).unwrap();
    assert_eq!(b.rank, 2);
    let dep = &xs[b.sigma[0]];
    let rebuilt = &xs[b.sigma[1]] * b.b[(0, 0)] + &xs[b.sigma[2]] * b.b[(1, 0)];
    assert!((dep - rebuilt).norm() < 1e-10);
}

#[test]
fn basis_rejects_degenerate_families() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let full: Vec<_> = (0..3).map(|_| rvec(&mut rng, 3)).collect();
    assert_eq!(bounded_basis_extraction(&full, 1e-10).unwrap_err(), Error::FullRank);
    let zero = vec![CVec::<f64>::zeros(3); 2];
    assert_eq!(bounded_basis_extraction(&zero, 1e-10).unwrap_err(), Error::ZeroFamily);
}

#[test]
fn xy0_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let zs: Vec<_> = (0..2).map(|_| rvec(&mut rng, 3)).collect();
    let ys: Vec<_> = (0..2).map(|_| rvec(&mut rng, 3)).collect();
    assert!(xy0_check(&zs, &ys, &identity::<f64>(2)).unwrap() < 1e-15);
}

#[test]
fn xy0_two_by_two_expansion() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (z1, z2, y1, y2) = (rvec(&mut rng, 3), rvec(&mut rng, 3), rvec(&mut rng, 3), rvec(&mut rng, 3));
    let (a, b, cc, d) = (c(0.3, 0.1), c(-0.7, 0.2), c(0.5, -0.4), c(0.9, 0.0));
    // x1 = a z1 + c z2, x2 = b z1 + d z2; w1 = conj(a) y1 + conj(b) y2,
    // w2 = conj(c) y1 + conj(d) y2
    let x1 = &z1 * a + &z2 * cc;
    let x2 = &z1 * b + &z2 * d;
    let w1 = &y1 * a.conj() + &y2 * b.conj();
    let w2 = &y1 * cc.conj() + &y2 * d.conj();
    let lhs = &x1 * y1.adjoint() + &x2 * y2.adjoint();
    let rhs = &z1 * w1.adjoint() + &z2 * w2.adjoint();
    assert!(max_abs(&(lhs - rhs)) < 1e-14);
    let am = CMat::from_row_slice(2, 2, &[a, b, cc, d]);
    assert!(xy0_check(&[z1, z2], &[y1, y2], &am).unwrap() < 1e-14);
}

#[test]
fn xy0_rectangular() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let zs: Vec<_> = (0..3).map(|_| rvec(&mut rng, 4)).collect();
    let ys: Vec<_> = (0..2).map(|_| rvec(&mut rng, 4)).collect();
    let a = rmat(&mut rng, 3, 2);
    assert!(xy0_check(&zs, &ys, &a).unwrap() < 1e-12);
    assert!(xy0_check(&zs, &ys, &rmat(&mut rng, 2, 2)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn xy_certificate_in_unit_box(seed in any::<u64>(), n in 2usize..6, r in 1usize..4, d in 2usize..6) {
        let r = r.min(n - 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // x = Z B, y^* columns in ker B
        let bm = rmat(&mut rng, r, n);
        let ker = crate::linalg::Svd::new(&bm).null_space(1e-10);
        let zm = rmat(&mut rng, d, r);
        let xm = &zm * &bm;
        let ym = &rmat(&mut rng, d, ker.ncols()) * ker.adjoint();
        let xs: Vec<_> = (0..n).map(|i| xm.column(i).into_owned()).collect();
        let ys: Vec<_> = (0..n).map(|i| ym.column(i).into_owned()).collect();
        let cert = xy_certificate(&xs, &ys, 1e-9).unwrap();
        prop_assert!(max_abs(&cert.a) <= 1.0 + 1e-12);
        prop_assert!(cert.residual_x <= 1e-8 && cert.residual_y <= 1e-8);
    }

    #[test]
    fn basis_coordinates_bounded(seed in any::<u64>(), n in 2usize..7, r in 1usize..5) {
        let r = r.min(n - 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let basis = rmat(&mut rng, 6, r);
        // near-cancelling coordinates: unit modulus plus small noise
        let coords = CMat::<f64>::from_fn(r, n, |_, _| {
            let t: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            c(t.cos(), t.sin()) * (1.0 + rng.random_range(-1e-3..1e-3))
        });
        let xm = basis * coords;
        let xs: Vec<_> = (0..n).map(|i| xm.column(i).into_owned()).collect();
        let b = bounded_basis_extraction(&xs, 1e-9).unwrap();
        prop_assert_eq!(b.rank, r);
        prop_assert!(max_abs(&b.b) <= 4f64.powi(n as i32));
        prop_assert!(b.residual < 1e-9);
    }

    #[test]
    fn feasible_answers_are_sound(seed in any::<u64>(), n in 1usize..4, l in 0usize..4) {
        let l = l.min(n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (phi, psi) = huw_instance(&mut rng, n, l, 2);
        let f = find_feasible_a(&phi, &psi, 4f64.powi(n as i32), 64).unwrap();
        let a = f.matrix().unwrap();
        let (h, e) = product_check(&phi, &psi, a, 16, 4);
        prop_assert!(h <= 1e-8 && e <= 1e-8);
    }
}
