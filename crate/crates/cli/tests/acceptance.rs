//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use exo_core::forms::{
    exterior_derivative_flat, hodge_star, homotopy_antiderivative, multi_indices, pullback_to,
    wedge, Form, Metric, Pseudostructure,
};
use exo_core::geometry::{evolutionary_derivative, form_commutator, Connection};
use exo_core::relations::{
    classify, integration_chain, is_closed, pseudostructure_search, restrict_relation,
    symplectic_form, verify_canonical, CanonicalMap, Interaction, Relation, RelationKind,
};
use exo_core::symexpr::is_exact_zero;
use exo_core::testing::{
    numbered_chart, random_connection, random_exact_form, random_form, random_symmetric_connection,
};
use exo_core::{Chart, Expr, Rational, Sampler, Verdict};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn chart(names: &[&str]) -> Arc<Chart> {
    Arc::new(Chart::new(names.iter().copied()).unwrap())
}

fn sampler() -> Sampler {
    Sampler::default()
}

/// The difference is zero and the zero test says so exactly.
fn exactly_equal(a: &Form, b: &Form) -> bool {
    match a.sub(b) {
        Ok(d) => d.is_zero() && d.vanishes(&sampler()) == Verdict::EXACT_TRUE,
        Err(_) => false,
    }
}

fn sign(k: usize) -> Expr {
    Expr::int(if k.is_multiple_of(2) { 1 } else { -1 })
}

fn algebra_suite() -> Outcome {
    let start = Instant::now();
    let mut r = ChaCha8Rng::seed_from_u64(1);
    for case in 0..1000 {
        let n = r.random_range(1..=4usize);
        let c = numbered_chart(n);
        let p = r.random_range(0..=3usize.min(n));
        let q = r.random_range(0..=3usize.min(n));
        let a = random_form(&mut r, &c, p, 3);
        let b = random_form(&mut r, &c, q, 3);
        let dd = exterior_derivative_flat(&exterior_derivative_flat(&a));
        ensure!(dd.is_zero(), "case {case}: d(d a) = {}", dd.display());
        let ab = wedge(&a, &b).unwrap();
        let ba = wedge(&b, &a).unwrap().scale(&sign(p * q));
        ensure!(exactly_equal(&ab, &ba), "case {case}: a^b != (-1)^pq b^a");
        let lhs = exterior_derivative_flat(&ab);
        let rhs = wedge(&exterior_derivative_flat(&a), &b)
            .unwrap()
            .add(
                &wedge(&a, &exterior_derivative_flat(&b))
                    .unwrap()
                    .scale(&sign(p)),
            )
            .unwrap();
        ensure!(exactly_equal(&lhs, &rhs), "case {case}: Leibniz rule fails");
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(format!(
        "1000 random forms in {:.2}s",
        elapsed.as_secs_f64()
    ))
}

/// `(∂a_β/∂ξ^α − ∂a_α/∂ξ^β) + (Γ^σ_{βα} − Γ^σ_{αβ}) a_σ`, assembled from
/// scratch.
fn commutator_oracle(t: &Form, c: &Connection, alpha: usize, beta: usize) -> Expr {
    let n = t.chart().dim();
    let a = |i: usize| t.coefficient(&[i]);
    let mut sum = a(beta).diff(alpha) - a(alpha).diff(beta);
    for s in 0..n {
        sum = sum + (c.get(s, beta, alpha).clone() - c.get(s, alpha, beta).clone()) * a(s);
    }
    sum
}

fn commutator_reproduction() -> Outcome {
    let mut r = ChaCha8Rng::seed_from_u64(2);
    for case in 0..200 {
        let n = r.random_range(2..=4usize);
        let ch = numbered_chart(n);
        let t = random_form(&mut r, &ch, 1, 3);
        let symmetric = case % 2 == 1;
        let c = if symmetric {
            random_symmetric_connection(&mut r, &ch, 0.4, 2)
        } else {
            random_connection(&mut r, &ch, 0.4, 2)
        };
        let probe = vec![Rational::from_integer(1.into()); n];
        let report = form_commutator(&t, &c, &probe, &sampler()).unwrap();
        for alpha in 0..n {
            for beta in alpha + 1..n {
                let diff = report.total.coefficient(&[alpha, beta])
                    - commutator_oracle(&t, &c, alpha, beta);
                ensure!(is_exact_zero(&diff), "case {case}: K_{alpha}{beta} differs");
                ensure!(
                    sampler().is_zero(&diff) == Verdict::EXACT_TRUE,
                    "case {case}: difference not decided exactly"
                );
            }
        }
        if symmetric {
            ensure!(
                report.metric_term.is_zero() && report.metric_vanishes == Verdict::EXACT_TRUE,
                "case {case}: symmetric connection has metric term {}",
                report.metric_term.display()
            );
        }
    }
    Ok("200 pairs, 100 with symmetric connections".into())
}

fn flat_reduction() -> Outcome {
    let mut r = ChaCha8Rng::seed_from_u64(3);
    for case in 0..500 {
        let n = r.random_range(1..=4usize);
        let ch = numbered_chart(n);
        let p = r.random_range(0..=3usize.min(n));
        let t = random_form(&mut r, &ch, p, 3);
        let c = if case % 2 == 0 {
            Connection::zero(ch.clone())
        } else {
            random_symmetric_connection(&mut r, &ch, 0.5, 2)
        };
        let got = evolutionary_derivative(&t, &c).unwrap();
        ensure!(
            exactly_equal(&got, &exterior_derivative_flat(&t)),
            "case {case}: differs from flat d"
        );
    }
    Ok("500 forms, zero and symmetric connections".into())
}

fn hodge_involution() -> Outcome {
    let mut checked = 0;
    for n in 1..=4 {
        let ch = numbered_chart(n);
        let g = Metric::euclidean(ch.clone());
        for k in 0..=n {
            let expected = sign(k * (n - k));
            for idx in multi_indices(n, k) {
                let b = Form::basis(ch.clone(), &idx).unwrap();
                let twice = hodge_star(&hodge_star(&b, &g).unwrap(), &g).unwrap();
                ensure!(
                    exactly_equal(&twice, &b.scale(&expected)),
                    "n={n}, basis {idx:?}"
                );
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} basis forms"))
}

fn homotopy_identity() -> Outcome {
    let mut r = ChaCha8Rng::seed_from_u64(5);
    for case in 0..200 {
        let n = r.random_range(1..=4usize);
        let ch = numbered_chart(n);
        let p = r.random_range(1..=3usize.min(n));
        let t = random_exact_form(&mut r, &ch, p, 2);
        let h = homotopy_antiderivative(&t).map_err(|e| format!("case {case}: {e}"))?;
        ensure!(
            exactly_equal(&exterior_derivative_flat(&h), &t),
            "case {case}: d(h t) != t"
        );
    }
    Ok("200 closed forms".into())
}

/// `d(u dx − v dy)` has the single coefficient `−∂v/∂x − ∂u/∂y`.
fn cauchy_riemann() -> Outcome {
    let ch = chart(&["x", "y"]);
    let zero = Connection::zero(ch.clone());
    let cases = [("x^2 - y^2", "2*x*y", true), ("x", "x", false)];
    for (u, v, closed) in cases {
        let u = Expr::parse(u, &ch).unwrap();
        let v = Expr::parse(v, &ch).unwrap();
        let t = Form::new(ch.clone(), 1, [(vec![0], u.clone()), (vec![1], -v.clone())]).unwrap();
        let oracle = is_exact_zero(&(-v.diff(0) - u.diff(1)));
        ensure!(oracle == closed, "oracle disagrees with the expected case");
        let verdict = is_closed(&t, &zero, &sampler()).unwrap();
        let want = if closed {
            Verdict::EXACT_TRUE
        } else {
            Verdict::EXACT_FALSE
        };
        ensure!(verdict == want, "{}: got {verdict:?}", t.display());
    }
    Ok("analytic pair CLOSED, (x, x) NOT CLOSED".into())
}

/// `δ = p dq − P dQ` built by hand, with its closure coefficient.
fn delta_oracle(big_q: &Expr, big_p: &Expr) -> (Expr, Expr, bool) {
    let dq = Expr::Var(1) - big_p.clone() * big_q.diff(0);
    let dp = -(big_p.clone() * big_q.diff(1));
    let closed = is_exact_zero(&(dp.diff(0) - dq.diff(1)));
    (dq, dp, closed)
}

fn symplectic_and_canonical() -> Outcome {
    for m in 1..=3 {
        let names: Vec<String> = (1..=m)
            .map(|i| format!("q{i}"))
            .chain((1..=m).map(|i| format!("p{i}")))
            .collect();
        let ch = Arc::new(Chart::new(names).unwrap());
        let omega = symplectic_form(ch.clone()).unwrap();
        ensure!(omega.len() == m, "m={m}: {} terms", omega.len());
        ensure!(
            omega.terms().all(|(_, e)| e.is_constant()),
            "m={m}: nonconstant coefficient"
        );
        let v = is_closed(&omega, &Connection::zero(ch.clone()), &sampler()).unwrap();
        ensure!(
            v == Verdict::EXACT_TRUE,
            "m={m}: symplectic form not closed: {v:?}"
        );
    }
    let ch = chart(&["q", "p"]);
    let maps = [
        ("identity", "q", "p", true, None),
        ("exchange", "p", "-q", true, Some("q*p")),
        ("shear", "q", "p + q^2", true, None),
        ("scaling", "q", "p + q*p", false, None),
    ];
    for (name, big_q, big_p, accept, expected_w) in maps {
        let big_q = Expr::parse(big_q, &ch).unwrap();
        let big_p = Expr::parse(big_p, &ch).unwrap();
        let (dq, dp, oracle_closed) = delta_oracle(&big_q, &big_p);
        ensure!(
            oracle_closed == accept,
            "{name}: oracle disagrees with the expected case"
        );
        let map = CanonicalMap::new(ch.clone(), vec![big_q], vec![big_p]).unwrap();
        let report = verify_canonical(&map, &sampler()).unwrap();
        let hand = Form::new(ch.clone(), 1, [(vec![0], dq), (vec![1], dp)]).unwrap();
        ensure!(
            exactly_equal(&report.delta, &hand),
            "{name}: delta {}",
            report.delta.display()
        );
        if !accept {
            ensure!(
                report.is_canonical == Verdict::EXACT_FALSE,
                "{name}: accepted"
            );
            continue;
        }
        ensure!(
            report.is_canonical == Verdict::EXACT_TRUE,
            "{name}: rejected"
        );
        let w = report
            .generating_function
            .ok_or_else(|| format!("{name}: no generating function"))?;
        // differentiate back
        let w0 = w.coefficient(&[]);
        let dw = Form::new(
            ch.clone(),
            1,
            [(vec![0], w0.diff(0)), (vec![1], w0.diff(1))],
        )
        .unwrap();
        ensure!(exactly_equal(&dw, &hand), "{name}: dW != delta");
        if let Some(want) = expected_w {
            let gap = w.coefficient(&[]) - Expr::parse(want, &ch).unwrap();
            ensure!(
                is_exact_zero(&gap.diff(0)) && is_exact_zero(&gap.diff(1)),
                "{name}: W = {}",
                w.display()
            );
        }
    }
    Ok(
        "symplectic m = 1..3 closed; identity, exchange, shear accepted; Q=q, P=p+q*p rejected"
            .into(),
    )
}

fn origination_pipeline() -> Outcome {
    let ch = chart(&["x", "y", "z"]);
    let zero = Connection::zero(ch.clone());
    let omega = Form::new(ch.clone(), 1, [(vec![0], Expr::Var(1))]).unwrap();
    let g = Metric::euclidean(ch.clone());
    let events = pseudostructure_search(&omega, &g, &zero, &sampler()).unwrap();
    ensure!(events.len() == 1, "{} events", events.len());
    let e = &events[0];
    let family: Vec<usize> = e.pseudostructure.constraints().keys().copied().collect();
    ensure!(family == [1], "family fixes coordinates {family:?}");
    ensure!(
        e.form_closed == Verdict::EXACT_TRUE,
        "form closure {:?}",
        e.form_closed
    );
    ensure!(
        e.dual_closed == Verdict::EXACT_TRUE,
        "dual closure {:?}",
        e.dual_closed
    );

    let relation = Relation::new(None, omega.clone(), zero.clone(), &sampler()).unwrap();
    let restricted = restrict_relation(&relation, &e.pseudostructure, &sampler()).unwrap();
    ensure!(
        restricted.kind() == RelationKind::Identical,
        "restricted kind {}",
        restricted.kind()
    );
    let omega_pi = pullback_to(&omega, &e.pseudostructure).unwrap();
    let psi = restricted.lhs().ok_or("no potential on the slice")?;
    ensure!(
        exactly_equal(&exterior_derivative_flat(psi), &omega_pi),
        "d psi != omega on the slice"
    );
    // psi = c x up to a constant; x is the first coordinate of the slice
    let gap = psi.coefficient(&[]) - Expr::param("c_y") * Expr::Var(0);
    let induced = e.pseudostructure.dimension();
    ensure!(
        (0..induced).all(|i| is_exact_zero(&gap.diff(i))),
        "psi = {}",
        psi.display()
    );

    let residual = evolutionary_derivative(&omega, &zero).unwrap();
    ensure!(
        residual.vanishes(&sampler()) == Verdict::EXACT_FALSE,
        "residual {}",
        residual.display()
    );
    Ok(format!(
        "{} with psi = {}",
        e.pseudostructure,
        psi.display()
    ))
}

fn integration_chain_criterion() -> Outcome {
    let ch = chart(&["x", "y", "z"]);
    let zero = Connection::zero(ch.clone());
    let omega = Form::new(
        ch.clone(),
        2,
        [(vec![0, 1], Expr::one()), (vec![1, 2], Expr::Var(0))],
    )
    .unwrap();
    let plane = Pseudostructure::new(ch.clone(), [(2, Expr::zero())]).unwrap();
    let r = Relation::new(None, omega, zero, &sampler()).unwrap();
    let start = restrict_relation(&r, &plane, &sampler()).unwrap();
    ensure!(
        start.kind() == RelationKind::Identical,
        "start is {}",
        start.kind()
    );
    ensure!(
        start.rhs().display().to_string() == "dx^dy",
        "start rhs {}",
        start.rhs().display()
    );
    let steps = integration_chain(&start, &sampler()).unwrap();
    let degrees: Vec<usize> = steps.iter().map(|s| s.degree).collect();
    ensure!(degrees == [2, 1, 0], "degrees {degrees:?}");
    for s in &steps {
        let rhs = s.relation.rhs();
        let d = exterior_derivative_flat(rhs);
        ensure!(
            d.is_zero(),
            "step {} not closed: d = {}",
            s.degree,
            d.display()
        );
        ensure!(
            s.closed == Verdict::EXACT_TRUE,
            "step {} verdict {:?}",
            s.degree,
            s.closed
        );
        ensure!(!rhs.is_zero(), "step {} is trivial", s.degree);
        let pi = s
            .relation
            .pseudostructure()
            .ok_or("step without pseudostructure")?;
        ensure!(
            pi.induced_chart().as_ref() == rhs.chart().as_ref(),
            "step {} chart",
            s.degree
        );
        if let Some(psi) = s.relation.lhs() {
            ensure!(
                exactly_equal(&exterior_derivative_flat(psi), rhs),
                "step {}: d psi != rhs",
                s.degree
            );
        }
    }
    Ok("closed forms of degrees 2, 1, 0".into())
}

fn classification_table() -> Outcome {
    let table = [
        Interaction::Strong,
        Interaction::Weak,
        Interaction::Electromagnetic,
        Interaction::Gravitational,
    ];
    let mut checked = 0;
    for (k, want) in table.iter().enumerate() {
        for big_n in 3..=5 {
            for p in k..=3 {
                let c = classify(p, k, big_n, big_n).unwrap();
                ensure!(c.interaction == *want, "k={k}: {}", c.interaction);
                ensure!(
                    c.pseudostructure_dim == big_n - k,
                    "k={k}, N={big_n}: dim {}",
                    c.pseudostructure_dim
                );
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} (p, k, N) triples"))
}

fn determinism() -> Outcome {
    let files = common::corpus_files();
    ensure!(!files.is_empty(), "empty corpus");
    let mut runs = 0;
    for path in &files {
        for run in common::runs(path) {
            let args = common::argv(path, &run);
            let first = common::exo(&args);
            let second = common::exo(&args);
            ensure!(first.status.success(), "exo {} failed", run.join(" "));
            ensure!(
                first.stdout == second.stdout,
                "exo {} differs between runs",
                run.join(" ")
            );
            runs += 1;
        }
    }
    Ok(format!("{runs} runs over {} files", files.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("algebra suite", algebra_suite),
        ("commutator reproduction", commutator_reproduction),
        ("flat reduction", flat_reduction),
        ("Hodge involution", hodge_involution),
        ("homotopy identity", homotopy_identity),
        ("Cauchy-Riemann closure", cauchy_riemann),
        ("symplectic and canonical maps", symplectic_and_canonical),
        ("origination pipeline", origination_pipeline),
        ("sequential integration chain", integration_chain_criterion),
        ("classification table", classification_table),
        ("CLI determinism", determinism),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failures += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
