//! Seeded random generators for property tests and the acceptance suite.

use std::sync::Arc;

use rand::Rng;

use crate::forms::{exterior_derivative_flat, multi_indices, Form};
use crate::geometry::Connection;
use crate::symexpr::{Chart, Expr};

/// Random polynomial in the first `nvars` coordinates with total degree at
/// most `max_degree`, small integer coefficients and up to `max_terms`
/// monomials.
pub fn random_polynomial<R: Rng>(
    rng: &mut R,
    nvars: usize,
    max_degree: u32,
    max_terms: usize,
) -> Expr {
    let terms = rng.random_range(0..=max_terms);
    let mut parts = Vec::with_capacity(terms);
    for _ in 0..terms {
        let coef = loop {
            let c: i64 = rng.random_range(-4..=4);
            if c != 0 {
                break c;
            }
        };
        let degree = rng.random_range(0..=max_degree);
        let mut factors = vec![Expr::int(coef)];
        for _ in 0..degree {
            if nvars > 0 {
                factors.push(Expr::Var(rng.random_range(0..nvars)));
            }
        }
        parts.push(Expr::Mul(factors));
    }
    Expr::Add(parts).simplify()
}

/// Random form of the given degree: each basis element gets a random
/// polynomial coefficient with probability one half.
pub fn random_form<R: Rng>(
    rng: &mut R,
    chart: &Arc<Chart>,
    degree: usize,
    coef_degree: u32,
) -> Form {
    let n = chart.dim();
    let entries: Vec<_> = multi_indices(n, degree)
        .into_iter()
        .filter_map(|idx| {
            rng.random_bool(0.5)
                .then(|| (idx, random_polynomial(rng, n, coef_degree, 3)))
        })
        .collect();
    Form::new(chart.clone(), degree, entries).expect("generated indices are valid")
}

/// Random closed form of degree `degree ≥ 1`, built as `d` of a random form.
pub fn random_exact_form<R: Rng>(
    rng: &mut R,
    chart: &Arc<Chart>,
    degree: usize,
    coef_degree: u32,
) -> Form {
    exterior_derivative_flat(&random_form(rng, chart, degree - 1, coef_degree + 1))
}

/// Random connection with roughly `density` of its components nonzero.
pub fn random_connection<R: Rng>(
    rng: &mut R,
    chart: &Arc<Chart>,
    density: f64,
    coef_degree: u32,
) -> Connection {
    let n = chart.dim();
    let mut c = Connection::zero(chart.clone());
    for s in 0..n {
        for a in 0..n {
            for b in 0..n {
                if rng.random_bool(density) {
                    let e = random_polynomial(rng, n, coef_degree, 2);
                    c.set(s, a, b, e).expect("indices in range");
                }
            }
        }
    }
    c
}

/// Random connection with `Γ^σ_{αβ} = Γ^σ_{βα}`.
pub fn random_symmetric_connection<R: Rng>(
    rng: &mut R,
    chart: &Arc<Chart>,
    density: f64,
    coef_degree: u32,
) -> Connection {
    let n = chart.dim();
    let mut c = Connection::zero(chart.clone());
    for s in 0..n {
        for a in 0..n {
            for b in a..n {
                if rng.random_bool(density) {
                    let e = random_polynomial(rng, n, coef_degree, 2);
                    c.set(s, a, b, e.clone()).expect("indices in range");
                    c.set(s, b, a, e).expect("indices in range");
                }
            }
        }
    }
    c
}

/// Chart `x1 … xn`.
pub fn numbered_chart(n: usize) -> Arc<Chart> {
    Arc::new(Chart::numbered("x", n).expect("dimension within bounds"))
}
