use std::collections::BTreeMap;

use exo_core::forms::{
    exterior_derivative_flat, hodge_star, homotopy_antiderivative, multi_indices, pullback_to,
    star_involution_sign, wedge, Form, Metric, Pseudostructure,
};
use exo_core::geometry::{
    evolutionary_derivative, form_commutator, one_form_commutator_coefficient,
};
use exo_core::symexpr::{differentiate, integrate_poly, is_exact_zero, substitute};
use exo_core::testing::{
    numbered_chart, random_connection, random_exact_form, random_form, random_polynomial,
    random_symmetric_connection,
};
use exo_core::{Chart, Expr, Rational, Sampler, Verdict};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn difference_vanishes(a: &Form, b: &Form) -> bool {
    a.sub(b).unwrap().is_zero()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn integrate_then_differentiate_round_trips(seed in any::<u64>(), v in 0usize..3) {
        let mut r = rng(seed);
        let c = Chart::numbered("x", 3).unwrap();
        let e = random_polynomial(&mut r, 3, 4, 5);
        let back = differentiate(&integrate_poly(&e, v, &c).unwrap(), v, &c).unwrap();
        prop_assert!(is_exact_zero(&(back - e)));
    }

    #[test]
    fn differentiation_is_linear(seed in any::<u64>(), a in -5i64..5, b in -5i64..5) {
        let mut r = rng(seed);
        let c = Chart::numbered("x", 3).unwrap();
        let e1 = random_polynomial(&mut r, 3, 3, 4) * Expr::Var(0).sin();
        let e2 = random_polynomial(&mut r, 3, 3, 4);
        let lhs = differentiate(&(Expr::int(a) * e1.clone() + Expr::int(b) * e2.clone()), 1, &c).unwrap();
        let rhs = Expr::int(a) * e1.diff(1) + Expr::int(b) * e2.diff(1);
        prop_assert!(Sampler::default().is_zero(&(lhs - rhs)).holds());
    }

    #[test]
    fn simplify_is_idempotent(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = random_polynomial(&mut r, 3, 3, 4);
        let q = random_polynomial(&mut r, 3, 2, 3);
        let e = (p.clone() * q.clone().cos() + (q + Expr::int(2)).pow(-1)).exp() - p.pow(2);
        let once = e.simplify();
        prop_assert_eq!(once.simplify(), once);
    }

    #[test]
    fn nonzero_verdict_is_witnessed(seed in any::<u64>()) {
        let mut r = rng(seed);
        let e = random_polynomial(&mut r, 2, 3, 3) * Expr::Var(1).sin()
            - random_polynomial(&mut r, 2, 2, 3);
        if Sampler::default().is_zero(&e) == Verdict::EXACT_FALSE {
            let found = (0..64).any(|_| {
                let pt = [r.random_range(-3.0..3.0), r.random_range(-3.0..3.0)];
                e.evaluate(&pt).map(|v| v.abs() > 1e-9).unwrap_or(false)
            });
            prop_assert!(found);
        }
    }

    #[test]
    fn d_squared_vanishes(seed in any::<u64>(), n in 1usize..=4, p in 0usize..=3) {
        let mut r = rng(seed);
        let c = numbered_chart(n);
        let t = random_form(&mut r, &c, p.min(n), 3);
        prop_assert!(exterior_derivative_flat(&exterior_derivative_flat(&t)).is_zero());
    }

    #[test]
    fn wedge_is_graded_anticommutative(seed in any::<u64>(), n in 1usize..=4, p in 0usize..=3, q in 0usize..=3) {
        let mut r = rng(seed);
        let c = numbered_chart(n);
        let a = random_form(&mut r, &c, p.min(n), 3);
        let b = random_form(&mut r, &c, q.min(n), 3);
        let sign = if (a.degree() * b.degree()) % 2 == 0 { 1 } else { -1 };
        let ab = wedge(&a, &b).unwrap();
        let ba = wedge(&b, &a).unwrap().scale(&Expr::int(sign));
        prop_assert!(difference_vanishes(&ab, &ba));
    }

    #[test]
    fn leibniz_rule(seed in any::<u64>(), n in 1usize..=4, p in 0usize..=3, q in 0usize..=3) {
        let mut r = rng(seed);
        let c = numbered_chart(n);
        let a = random_form(&mut r, &c, p.min(n), 3);
        let b = random_form(&mut r, &c, q.min(n), 3);
        let sign = if a.degree() % 2 == 0 { 1 } else { -1 };
        let lhs = exterior_derivative_flat(&wedge(&a, &b).unwrap());
        let rhs = wedge(&exterior_derivative_flat(&a), &b).unwrap()
            .add(&wedge(&a, &exterior_derivative_flat(&b)).unwrap().scale(&Expr::int(sign)))
            .unwrap();
        prop_assert!(difference_vanishes(&lhs, &rhs));
    }

    #[test]
    fn pullback_commutes_with_d(seed in any::<u64>(), n in 2usize..=4, p in 0usize..=2, mask in 1u32..15) {
        let mut r = rng(seed);
        let c = numbered_chart(n);
        let t = random_form(&mut r, &c, p.min(n - 1), 3);
        let constraints: Vec<(usize, Expr)> = (0..n)
            .filter(|j| mask & (1 << j) != 0)
            .map(|j| (j, Expr::int(r.random_range(-3..=3))))
            .collect();
        let pi = Pseudostructure::new(c, constraints).unwrap();
        let lhs = pullback_to(&exterior_derivative_flat(&t), &pi).unwrap();
        let rhs = exterior_derivative_flat(&pullback_to(&t, &pi).unwrap());
        prop_assert_eq!(lhs.degree(), rhs.degree());
        prop_assert!(difference_vanishes(&lhs, &rhs));
    }

    #[test]
    fn homotopy_inverts_d_on_closed_forms(seed in any::<u64>(), n in 1usize..=4, p in 1usize..=3) {
        let mut r = rng(seed);
        let c = numbered_chart(n);
        let t = random_exact_form(&mut r, &c, p.min(n), 2);
        let h = homotopy_antiderivative(&t).unwrap();
        prop_assert!(difference_vanishes(&exterior_derivative_flat(&h), &t));
    }

    #[test]
    fn symmetric_connection_reduces_to_flat(seed in any::<u64>(), n in 1usize..=4, p in 0usize..=3) {
        let mut r = rng(seed);
        let c = numbered_chart(n);
        let t = random_form(&mut r, &c, p.min(n), 2);
        let g = random_symmetric_connection(&mut r, &c, 0.3, 2);
        prop_assert_eq!(evolutionary_derivative(&t, &g).unwrap(), exterior_derivative_flat(&t));
    }

    #[test]
    fn one_form_commutator_matches_explicit_formula(seed in any::<u64>(), n in 2usize..=4) {
        let mut r = rng(seed);
        let c = numbered_chart(n);
        let t = random_form(&mut r, &c, 1, 3);
        let g = random_connection(&mut r, &c, 0.3, 2);
        let probe = vec![Rational::from_integer(1.into()); n];
        let report = form_commutator(&t, &g, &probe, &Sampler::default()).unwrap();
        prop_assert!(difference_vanishes(
            &report.total,
            &report.coefficient_term.add(&report.metric_term).unwrap()
        ));
        for a in 0..n {
            for b in (a + 1)..n {
                let want = one_form_commutator_coefficient(&t, &g, a, b);
                prop_assert!(is_exact_zero(&(report.total.coefficient(&[a, b]) - want)));
            }
        }
    }
}

#[test]
fn star_is_an_involution_up_to_sign() {
    for n in 1..=4 {
        let c = numbered_chart(n);
        let g = Metric::euclidean(c.clone());
        for k in 0..=n {
            for idx in multi_indices(n, k) {
                let b = Form::basis(c.clone(), &idx).unwrap();
                let twice = hodge_star(&hodge_star(&b, &g).unwrap(), &g).unwrap();
                let sign = star_involution_sign(k, n);
                assert_eq!(twice, b.scale(&Expr::int(sign as i64)), "n={n} idx={idx:?}");
            }
        }
    }
}

#[test]
fn derivative_of_x_exp_x_matches_finite_differences() {
    let c = Chart::new(["x"]).unwrap();
    let x = Expr::Var(0);
    let e = x.clone() * x.clone().exp();
    let d = differentiate(&e, 0, &c).unwrap();
    let expected = x.clone().exp() + x.clone() * x.exp();
    assert!(is_exact_zero(&(d.clone() - expected)));
    let mut r = rng(11);
    for _ in 0..10 {
        let p: f64 = r.random_range(-2.0..2.0);
        let h = 1e-5;
        let fd = (e.evaluate(&[p + h]).unwrap() - e.evaluate(&[p - h]).unwrap()) / (2.0 * h);
        assert!((fd - d.evaluate(&[p]).unwrap()).abs() < 1e-6);
    }
}

#[test]
fn trigonometric_substitution_is_probably_one() {
    let c = Chart::new(["x", "y", "t"]).unwrap();
    let e = Expr::parse("x^2 + y^2", &c).unwrap();
    let t = Expr::Var(2);
    let bindings = BTreeMap::from([(0, t.clone().cos()), (1, t.sin())]);
    let s = substitute(&e, &bindings);
    assert!(!s.contains_var(0) && !s.contains_var(1));
    let v = Sampler::default().is_zero(&(s - Expr::one()));
    assert_eq!(v.confidence(), exo_core::Confidence::Probable);
    assert!(v.holds());
}

#[test]
fn expand_and_collect() {
    let c = Chart::new(["x"]).unwrap();
    let e = Expr::parse("(x+1)^2 - x^2 - 2*x - 1", &c).unwrap();
    assert_eq!(e.simplify(), Expr::zero());
}
