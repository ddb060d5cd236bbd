use super::*;
use crate::symbols::{random_laurent, MatrixSymbol};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn env(seed: u64, n: usize, deg: i64, names: &[&str]) -> Env<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    names
        .iter()
        .map(|s| (s.to_string(), random_laurent(&mut rng, n, deg)))
        .collect()
}

fn ws(s: &str) -> WordSum {
    parse_word_sum(s).unwrap()
}

#[test]
fn hh_rule() {
    let got = ws("H(a)*H(b)").normalize();
    assert_eq!(got, ws("T(a~.b) - T(a~)*T(b)"));
}

#[test]
fn ht_rule() {
    let got = ws("H(a)*T(b)").normalize();
    assert_eq!(got, ws("H(a.b) - T(a~)*H(b)"));
}

#[test]
fn normal_words_untouched() {
    for s in ["T(a)*T(b)*H(c)", "T(a)", "H(a)", "I", "2*T(a) - T(b)*H(c~)"] {
        let w = ws(s);
        assert!(w.is_normal());
        assert_eq!(w.normalize(), w.clone().merged());
    }
}

#[test]
fn hth_example() {
    // H_a T_b H_c -> H_{ab} H_c - T_{a~} H_b H_c
    //            -> T_{(ab)~ c} - T_{(ab)~} T_c - T_{a~} T_{b~ c} + T_{a~} T_{b~} T_c
    let got = ws("H(a)*T(b)*H(c)").normalize();
    let want = ws("T(a~.b~.c) - T(a~.b~)*T(c) - T(a~)*T(b~.c) + T(a~)*T(b~)*T(c)");
    assert_eq!(got.len(), 4);
    for t in &want.terms {
        assert!(got.terms.contains(t), "missing {}", t.1);
    }
}

#[test]
fn parse_markers_and_parts() {
    let e = parse_expr("(a.b)~*").unwrap();
    assert_eq!(e.to_string(), "b~*.a~*");
    let e = parse_expr("a**").unwrap();
    assert_eq!(*e, SymbolExpr::Name("a".into()));
    let e = parse_expr("plus(a.b~)").unwrap();
    assert_eq!(e.to_string(), "plus(a.b~)");
    assert!(parse_word_sum("T(a").is_err());
    assert!(parse_word_sum("X(a)").is_err());
    assert!(parse_word_sum("T(a) T(b)").is_err());
}

#[test]
fn parse_coefficients() {
    let w = ws("-3*T(a) + (0.5,-1)*H(b)");
    assert_eq!(w.terms[0].0, Complex::new(-3.0, 0.0));
    assert_eq!(w.terms[1].0, Complex::new(0.5, -1.0));
    assert_eq!(ws(&w.to_string()), w);
}

#[test]
fn unbound_and_truncation_errors() {
    let e = env(1, 1, 2, &["a"]);
    assert!(matches!(
        certify(&ws("H(a)*T(b)"), &e, 1, 32),
        Err(Error::Unbound(_))
    ));
    assert!(matches!(
        certify(&ws("H(a)*T(a)*H(a)"), &e, 1, 8),
        Err(Error::InsufficientTruncation { .. })
    ));
}

#[test]
fn unbounded_symbol_refused() {
    let mut e = env(2, 1, 1, &["a"]);
    e.insert("g".into(), crate::symbols::half_indicator());
    assert!(matches!(
        certify(&ws("H(g)*T(a)"), &e, 1, 40),
        Err(Error::SupportOverflow(_))
    ));
}

#[test]
fn certify_block_examples() {
    let e = env(7, 2, 2, &["a", "b", "c", "d"]);
    for s in [
        "H(a)*H(b)",
        "H(a)*T(b)",
        "T(a)*H(b)*T(c)",
        "H(a)*H(b)*H(c)",
        "H(a~)*T(b*)*H(c)*T(d)",
        "H(plus(a))*H(minus(b).c)",
    ] {
        let (normal, r) = certify(&ws(s), &e, 2, 48).unwrap();
        assert!(normal.is_normal(), "{s}");
        assert!(r < 1e-12, "{s}: residual {r:e}");
    }
}

#[test]
fn analytic_product_collapses() {
    // with b analytic, H_a T_b = H_{ab}: the second term vanishes numerically
    let mut e = env(3, 1, 2, &["a"]);
    let b = random_laurent(&mut ChaCha8Rng::seed_from_u64(4), 1, 3).plus_part();
    e.insert("b".into(), b);
    let lhs = ws("H(a)*T(b)").evaluate(&e, 1, 40).unwrap();
    let rhs = ws("H(a.b)").evaluate(&e, 1, 40).unwrap();
    assert!(lhs.window_diff(&rhs, &WindowSpec::interior(40, 10)).unwrap() < 1e-13);
}

#[test]
fn identity_word_evaluates_to_identity() {
    let e: Env<f64> = Env::new();
    let op = ws("I").evaluate(&e, 3, 5).unwrap();
    assert_eq!(op.data(), &crate::scalar::identity::<f64>(15));
    let _ = MatrixSymbol::<f64>::zero(1);
}

fn word_strategy() -> impl Strategy<Value = OperatorWord> {
    let atom = (any::<bool>(), 0usize..3, any::<bool>(), any::<bool>()).prop_map(|(h, i, t, s)| {
        let mut e = SymbolExpr::name(["a", "b", "c"][i]);
        if t {
            e = SymbolExpr::tilde(&e);
        }
        if s {
            e = SymbolExpr::star(&e);
        }
        if h {
            Atom::h(e)
        } else {
            Atom::t(e)
        }
    });
    prop::collection::vec(atom, 1..=5).prop_map(OperatorWord)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn normal_form_is_normal_and_exact(w in word_strategy(), seed in 0u64..1000) {
        let len = w.0.len();
        let e = env(seed, 2, 1, &["a", "b", "c"]);
        let (normal, r) = certify(&WordSum::single(w.clone()), &e, 2, 40).unwrap();
        prop_assert!(normal.is_normal());
        prop_assert!(normal.len() <= 1 << (len - 1), "{} words from length {}", normal.len(), len);
        prop_assert!(r < 1e-11, "residual {:e} for {}", r, w);
    }

    #[test]
    fn parity_preserved(w in word_strategy()) {
        let p = w.h_parity();
        for (_, v) in WordSum::single(w).normalize().terms {
            prop_assert_eq!(v.h_parity(), p);
            prop_assert!(v.h_count() <= 1);
        }
    }

    #[test]
    fn strategies_agree_numerically(w in word_strategy(), seed in 0u64..1000) {
        let e = env(seed, 1, 1, &["a", "b", "c"]);
        let s = WordSum::single(w);
        let l = s.normalize_with(RewriteOrder::Leftmost);
        let r = s.normalize_with(RewriteOrder::Rightmost);
        prop_assert!(r.is_normal());
        let margin = s.required_margin(&e).unwrap();
        let a = l.evaluate(&e, 1, 40).unwrap();
        let b = r.evaluate(&e, 1, 40).unwrap();
        prop_assert!(a.window_diff(&b, &WindowSpec::interior(40, margin)).unwrap() < 1e-11);
    }

    #[test]
    fn display_roundtrip(w in word_strategy()) {
        let s = WordSum::single(w).normalize();
        prop_assert_eq!(parse_word_sum(&s.to_string()).unwrap(), s);
    }
}

#[test]
fn t2_for_analytic_right_factor() {
    let mut e = env(11, 2, 3, &["a"]);
    let b = random_laurent(&mut ChaCha8Rng::seed_from_u64(12), 2, 3).plus_part();
    e.insert("b".into(), b);
    let lhs = ws("T(a)*T(b)").evaluate(&e, 2, 40).unwrap();
    let rhs = ws("T(a.b)").evaluate(&e, 2, 40).unwrap();
    assert!(lhs.window_diff(&rhs, &WindowSpec::interior(40, 12)).unwrap() < 1e-13);
}

#[test]
fn even_words_become_pure_toeplitz() {
    let w = ws("H(a)*T(b)*T(c)*H(a~)*T(b)").normalize();
    assert!(w.terms.iter().all(|(_, v)| v.is_pure_toeplitz()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn normalize_idempotent(w in word_strategy()) {
        let once = WordSum::single(w).normalize();
        prop_assert_eq!(once.normalize(), once);
    }
}
