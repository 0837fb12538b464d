//! Skew-symmetric forms on a chart.
//!
//! A [`Form`] of degree `p` stores one canonical coefficient per strictly
//! increasing multi-index `i_1 < … < i_p`; exact-zero coefficients are not
//! stored. Multi-indices iterate in graded lexicographic order.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{Signed, Zero};

use crate::symexpr::{self, is_exact_zero, Chart, Expr, Rational, Sampler, Verdict};
use crate::{Error, Result};

/// Strictly increasing list of coordinate indices.
pub type MultiIndex = Vec<usize>;

/// Sorts `idx` in place and returns the permutation sign, or `None` when an
/// index repeats (the basis element vanishes).
pub fn normalize_index(idx: &mut [usize]) -> Option<i32> {
    let mut sign = 1;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
    }
}

fn signed(e: Expr, sign: i32) -> Expr {
    if sign < 0 {
        -e
    } else {
        e
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Form {
    chart: Arc<Chart>,
    degree: usize,
    terms: BTreeMap<MultiIndex, Expr>,
}

impl Form {
    /// Builds a form from possibly unsorted multi-indices. Repeated indices
    /// drop the term; permutation signs fold into the coefficient; equal
    /// indices accumulate.
    pub fn new<I>(chart: Arc<Chart>, degree: usize, entries: I) -> Result<Form>
    where
        I: IntoIterator<Item = (MultiIndex, Expr)>,
    {
        let n = chart.dim();
        let mut acc: BTreeMap<MultiIndex, Vec<Expr>> = BTreeMap::new();
        for (mut idx, coef) in entries {
            if idx.len() != degree || idx.iter().any(|&i| i >= n) {
                return Err(Error::InvalidIndex(idx));
            }
            if let Some(sign) = normalize_index(&mut idx) {
                acc.entry(idx).or_default().push(signed(coef, sign));
            }
        }
        let terms = acc
            .into_iter()
            .filter_map(|(idx, parts)| {
                let e = Expr::Add(parts).simplify();
                (!is_exact_zero(&e)).then_some((idx, e))
            })
            .collect();
        Ok(Form {
            chart,
            degree,
            terms,
        })
    }

    pub fn zero(chart: Arc<Chart>, degree: usize) -> Form {
        Form {
            chart,
            degree,
            terms: BTreeMap::new(),
        }
    }

    /// Degree-0 form holding a single function.
    pub fn scalar(chart: Arc<Chart>, f: Expr) -> Form {
        Form::new(chart, 0, [(vec![], f)]).expect("empty index is always valid")
    }

    /// `dx^{i_1} ∧ … ∧ dx^{i_p}` with unit coefficient.
    pub fn basis(chart: Arc<Chart>, idx: &[usize]) -> Result<Form> {
        Form::new(chart, idx.len(), [(idx.to_vec(), Expr::one())])
    }

    /// `Σ a_i dx^i`.
    pub fn one_form(chart: Arc<Chart>, coefficients: &[Expr]) -> Result<Form> {
        if coefficients.len() != chart.dim() {
            return Err(Error::Arity(format!(
                "{} coefficients for a chart of dimension {}",
                coefficients.len(),
                chart.dim()
            )));
        }
        let entries = coefficients
            .iter()
            .enumerate()
            .map(|(i, a)| (vec![i], a.clone()))
            .collect::<Vec<_>>();
        Form::new(chart, 1, entries)
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Expr)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of a (possibly unsorted) multi-index, with the
    /// permutation sign applied.
    pub fn coefficient(&self, idx: &[usize]) -> Expr {
        let mut sorted = idx.to_vec();
        match normalize_index(&mut sorted) {
            Some(sign) => match self.terms.get(&sorted) {
                Some(e) => signed(e.clone(), sign).simplify(),
                None => Expr::zero(),
            },
            None => Expr::zero(),
        }
    }

    pub(crate) fn same_chart(&self, other: &Form) -> Result<()> {
        if self.chart == other.chart {
            Ok(())
        } else {
            Err(Error::ChartMismatch)
        }
    }

    pub fn add(&self, other: &Form) -> Result<Form> {
        self.same_chart(other)?;
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch(format!(
                "cannot add forms of degrees {} and {}",
                self.degree, other.degree
            )));
        }
        let entries = self.terms.iter().chain(other.terms.iter());
        Form::new(
            self.chart.clone(),
            self.degree,
            entries
                .map(|(i, e)| (i.clone(), e.clone()))
                .collect::<Vec<_>>(),
        )
    }

    pub fn sub(&self, other: &Form) -> Result<Form> {
        self.add(&other.scale(&Expr::int(-1)))
    }

    pub fn scale(&self, k: &Expr) -> Form {
        let entries: Vec<_> = self
            .terms
            .iter()
            .map(|(i, e)| (i.clone(), k.clone() * e.clone()))
            .collect();
        Form::new(self.chart.clone(), self.degree, entries).expect("indices already valid")
    }

    pub fn map_coefficients(&self, f: impl Fn(&Expr) -> Expr) -> Form {
        let entries: Vec<_> = self.terms.iter().map(|(i, e)| (i.clone(), f(e))).collect();
        Form::new(self.chart.clone(), self.degree, entries).expect("indices already valid")
    }

    /// Zero-test of every coefficient; `Holds` means the form vanishes.
    pub fn vanishes(&self, sampler: &Sampler) -> Verdict {
        Verdict::all(self.terms.values().map(|e| sampler.is_zero(e)))
    }

    pub fn display(&self) -> FormDisplay<'_> {
        FormDisplay(self)
    }
}

/// Canonical text such as `x*y dx^dy + sin(z) dx^dz`.
pub struct FormDisplay<'a>(&'a Form);

impl fmt::Display for FormDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let form = self.0;
        let chart = &*form.chart;
        if form.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (idx, coef)) in form.terms.iter().enumerate() {
            let basis = idx
                .iter()
                .map(|&i| format!("d{}", chart.name(i)))
                .collect::<Vec<_>>()
                .join("^");
            let is_sum = matches!(coef, Expr::Add(_));
            let text = coef.display(chart).to_string();
            let (negative, body) = match text.strip_prefix('-') {
                Some(rest) if !is_sum => (true, rest.to_string()),
                _ => (false, text),
            };
            if k == 0 {
                if negative {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if negative { " - " } else { " + " })?;
            }
            if basis.is_empty() {
                f.write_str(&body)?;
            } else if body == "1" {
                f.write_str(&basis)?;
            } else if is_sum {
                write!(f, "({body}) {basis}")?;
            } else {
                write!(f, "{body} {basis}")?;
            }
        }
        Ok(())
    }
}

/// Exterior product. Returns the zero form (of degree `p + q`) when the
/// degrees exceed the chart dimension.
pub fn wedge(a: &Form, b: &Form) -> Result<Form> {
    a.same_chart(b)?;
    let degree = a.degree + b.degree;
    if degree > a.chart.dim() {
        return Ok(Form::zero(a.chart.clone(), degree));
    }
    let mut entries = Vec::new();
    for (i, ea) in &a.terms {
        for (j, eb) in &b.terms {
            if i.iter().any(|k| j.contains(k)) {
                continue;
            }
            let mut idx = i.clone();
            idx.extend_from_slice(j);
            entries.push((idx, ea.clone() * eb.clone()));
        }
    }
    Form::new(a.chart.clone(), degree, entries)
}

/// Flat exterior derivative: `d(a dx^I) = Σ_j ∂_j a dx^j ∧ dx^I`.
pub fn exterior_derivative_flat(t: &Form) -> Form {
    let n = t.chart.dim();
    let degree = t.degree + 1;
    if degree > n {
        return Form::zero(t.chart.clone(), degree);
    }
    let mut entries = Vec::new();
    for (idx, a) in &t.terms {
        for j in 0..n {
            if idx.contains(&j) {
                continue;
            }
            let da = a.diff(j);
            if is_exact_zero(&da) {
                continue;
            }
            let mut full = Vec::with_capacity(degree);
            full.push(j);
            full.extend_from_slice(idx);
            entries.push((full, da));
        }
    }
    Form::new(t.chart.clone(), degree, entries).expect("indices in range")
}

/// Symmetric metric table with its determinant.
#[derive(Clone, Debug, PartialEq)]
pub struct Metric {
    chart: Arc<Chart>,
    entries: Vec<Vec<Expr>>,
    determinant: Expr,
}

impl Metric {
    /// Validates symmetry and checks the determinant is nonzero at the point
    /// `(1, …, 1)`.
    pub fn new(chart: Arc<Chart>, entries: Vec<Vec<Expr>>) -> Result<Metric> {
        let n = chart.dim();
        if entries.len() != n || entries.iter().any(|r| r.len() != n) {
            return Err(Error::Arity(format!("metric table must be {n}x{n}")));
        }
        let entries: Vec<Vec<Expr>> = entries
            .into_iter()
            .map(|r| r.into_iter().map(|e| e.simplify()).collect())
            .collect();
        for (i, row) in entries.iter().enumerate() {
            for (j, e) in row.iter().enumerate().take(i) {
                if *e != entries[j][i] {
                    return Err(Error::UnsupportedMetric(format!(
                        "entries ({}, {}) and ({}, {}) differ",
                        i + 1,
                        j + 1,
                        j + 1,
                        i + 1
                    )));
                }
            }
        }
        let determinant = symexpr::determinant(&entries)?;
        let ones: BTreeMap<usize, Expr> = (0..n).map(|i| (i, Expr::one())).collect();
        let at_ones = symexpr::substitute(&determinant, &ones);
        if !Sampler::default().is_zero(&at_ones).fails() {
            return Err(Error::DegenerateMetric(
                "determinant vanishes at (1, …, 1)".into(),
            ));
        }
        Ok(Metric {
            chart,
            entries,
            determinant,
        })
    }

    pub fn diagonal(chart: Arc<Chart>, diag: Vec<Expr>) -> Result<Metric> {
        let n = chart.dim();
        if diag.len() != n {
            return Err(Error::Arity(format!(
                "diagonal metric needs {n} entries, got {}",
                diag.len()
            )));
        }
        let mut entries = vec![vec![Expr::zero(); n]; n];
        for (i, d) in diag.into_iter().enumerate() {
            entries[i][i] = d;
        }
        Metric::new(chart, entries)
    }

    pub fn euclidean(chart: Arc<Chart>) -> Metric {
        let n = chart.dim();
        Metric::diagonal(chart, vec![Expr::one(); n]).expect("identity is nondegenerate")
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn entry(&self, i: usize, j: usize) -> &Expr {
        &self.entries[i][j]
    }

    pub fn entries(&self) -> &[Vec<Expr>] {
        &self.entries
    }

    pub fn determinant(&self) -> &Expr {
        &self.determinant
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.chart.dim();
        (0..n).all(|i| (0..n).all(|j| i == j || is_exact_zero(&self.entries[i][j])))
    }
}

/// Hodge dual for diagonal metrics:
/// `*(dx^I) = ε(I, I^c) √|det g| Π_{i∈I} g^{ii} dx^{I^c}`.
///
/// `√|det g|` must be an exact rational, so the determinant has to simplify
/// to a constant whose absolute value is a rational square.
pub fn hodge_star(t: &Form, g: &Metric) -> Result<Form> {
    if t.chart != g.chart {
        return Err(Error::ChartMismatch);
    }
    if !g.is_diagonal() {
        return Err(Error::UnsupportedMetric(
            "only diagonal metrics have an exact Hodge star".into(),
        ));
    }
    let volume = volume_factor(g)?;
    let n = t.chart.dim();
    let mut entries = Vec::new();
    for (idx, a) in &t.terms {
        let complement: Vec<usize> = (0..n).filter(|i| !idx.contains(i)).collect();
        let mut perm = idx.clone();
        perm.extend_from_slice(&complement);
        let sign = normalize_index(&mut perm).expect("permutation of 0..n");
        let mut factors = vec![Expr::Const(volume.clone()), a.clone()];
        factors.extend(idx.iter().map(|&i| g.entries[i][i].clone().pow(-1)));
        entries.push((complement, signed(Expr::Mul(factors), sign)));
    }
    Form::new(t.chart.clone(), n - t.degree, entries)
}

fn volume_factor(g: &Metric) -> Result<Rational> {
    let det = g
        .determinant
        .constant_value()
        .ok_or_else(|| Error::UnsupportedMetric("metric determinant is not constant".into()))?;
    let abs = det.abs();
    let (n, d) = (abs.numer().sqrt(), abs.denom().sqrt());
    if abs.is_zero() || &n * &n != *abs.numer() || &d * &d != *abs.denom() {
        return Err(Error::UnsupportedMetric(format!(
            "|det g| = {abs} is not the square of a rational"
        )));
    }
    Ok(Rational::new(n, d))
}

/// Coordinate slice `{x^j = c_j : j ∈ J}` with its induced chart of free
/// coordinates. Constants are coordinate-free expressions: rationals or
/// named parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Pseudostructure {
    chart: Arc<Chart>,
    constraints: BTreeMap<usize, Expr>,
    free: Vec<usize>,
    induced: Arc<Chart>,
}

impl Pseudostructure {
    pub fn new<I>(chart: Arc<Chart>, constraints: I) -> Result<Pseudostructure>
    where
        I: IntoIterator<Item = (usize, Expr)>,
    {
        let n = chart.dim();
        let mut map = BTreeMap::new();
        for (j, c) in constraints {
            if j >= n {
                return Err(Error::UnknownVariable { index: j, dim: n });
            }
            let c = c.simplify();
            if !c.is_coordinate_free() {
                return Err(Error::Precondition(format!(
                    "constraint on `{}` must not depend on coordinates",
                    chart.name(j)
                )));
            }
            if map.insert(j, c).is_some() {
                return Err(Error::Precondition(format!(
                    "coordinate `{}` constrained twice",
                    chart.name(j)
                )));
            }
        }
        let free: Vec<usize> = (0..n).filter(|i| !map.contains_key(i)).collect();
        let induced = Arc::new(chart.subchart(&free));
        Ok(Pseudostructure {
            chart,
            constraints: map,
            free,
            induced,
        })
    }

    /// Slice whose constants are the free parameters `c_<name>`.
    pub fn symbolic(chart: Arc<Chart>, indices: &[usize]) -> Result<Pseudostructure> {
        let entries: Vec<(usize, Expr)> = indices
            .iter()
            .map(|&j| {
                let name = chart.names().get(j).cloned().unwrap_or_default();
                (j, Expr::param(format!("c_{name}")))
            })
            .collect();
        Pseudostructure::new(chart, entries)
    }

    /// The whole chart, seen as a (degenerate) pseudostructure.
    pub fn whole(chart: Arc<Chart>) -> Pseudostructure {
        Pseudostructure::new(chart, []).expect("no constraints")
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn induced_chart(&self) -> &Arc<Chart> {
        &self.induced
    }

    pub fn constraints(&self) -> &BTreeMap<usize, Expr> {
        &self.constraints
    }

    /// Original indices of the free coordinates, in induced-chart order.
    pub fn free_indices(&self) -> &[usize] {
        &self.free
    }

    pub fn dimension(&self) -> usize {
        self.free.len()
    }

    pub fn is_whole_chart(&self) -> bool {
        self.constraints.is_empty()
    }

    /// Coordinate bindings that realize the pullback: constrained
    /// coordinates become their constants, free ones are renumbered.
    pub(crate) fn bindings(&self) -> BTreeMap<usize, Expr> {
        let mut map: BTreeMap<usize, Expr> = self.constraints.clone();
        for (new, &old) in self.free.iter().enumerate() {
            map.insert(old, Expr::Var(new));
        }
        map
    }

    /// Restricts `inner`, a slice of this pseudostructure's induced chart,
    /// back to a slice of the original chart.
    pub fn compose(&self, inner: &Pseudostructure) -> Result<Pseudostructure> {
        if inner.chart != self.induced {
            return Err(Error::ChartMismatch);
        }
        let mut entries: Vec<(usize, Expr)> = self
            .constraints
            .iter()
            .map(|(k, v)| (*k, v.clone()))
            .collect();
        entries.extend(
            inner
                .constraints
                .iter()
                .map(|(k, v)| (self.free[*k], v.clone())),
        );
        Pseudostructure::new(self.chart.clone(), entries)
    }
}

impl fmt::Display for Pseudostructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, (j, c)) in self.constraints.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, " {} = {}", self.chart.name(*j), c.display(&self.chart))?;
        }
        f.write_str(" }")
    }
}

/// Restriction to a coordinate slice: constrained coordinates are replaced
/// by their constants and every multi-index containing a constrained
/// direction is dropped. The result lives on the induced chart.
pub fn pullback_to(t: &Form, pi: &Pseudostructure) -> Result<Form> {
    if t.chart != pi.chart {
        return Err(Error::ChartMismatch);
    }
    let bindings = pi.bindings();
    let renumber: BTreeMap<usize, usize> = pi
        .free
        .iter()
        .enumerate()
        .map(|(new, &old)| (old, new))
        .collect();
    let mut entries = Vec::new();
    for (idx, a) in &t.terms {
        let mapped: Option<Vec<usize>> = idx.iter().map(|i| renumber.get(i).copied()).collect();
        if let Some(mapped) = mapped {
            entries.push((mapped, symexpr::substitute(a, &bindings)));
        }
    }
    if t.degree > pi.dimension() {
        return Ok(Form::zero(pi.induced.clone(), t.degree));
    }
    Form::new(pi.induced.clone(), t.degree, entries)
}

/// Potential of a closed form with polynomial coefficients, by the homotopy
/// operator of the star-shaped domain centred at the origin:
///
/// `H(a dx^I) = Σ_k (-1)^k (∫₀¹ s^{p-1} a(s x) ds) x^{i_k} dx^{I∖i_k}`.
///
/// `d H(t) = t` whenever `d t = 0`.
pub fn homotopy_antiderivative(t: &Form) -> Result<Form> {
    if t.degree == 0 {
        return Err(Error::DegreeMismatch(
            "a 0-form has no antiderivative form".into(),
        ));
    }
    let dt = exterior_derivative_flat(t);
    if !dt.is_zero() {
        return Err(Error::NotClosed(format!(
            "d of the form is {}",
            dt.display()
        )));
    }
    let n = t.chart.dim();
    let p = t.degree;
    let s = n; // scratch coordinate for the radial parameter
    let scale: BTreeMap<usize, Expr> = (0..n).map(|i| (i, Expr::Var(s) * Expr::Var(i))).collect();
    let at_one = BTreeMap::from([(s, Expr::one())]);
    let mut entries = Vec::new();
    for (idx, a) in &t.terms {
        if !a.is_polynomial() {
            return Err(Error::UnsupportedIntegrand(format!(
                "coefficient {} is not polynomial",
                a.display(&t.chart)
            )));
        }
        let integrand = Expr::Var(s).pow(p as i32 - 1) * symexpr::substitute(a, &scale);
        let primitive = symexpr::integrate_unchecked(&integrand, s)?;
        // The primitive vanishes at s = 0 because every term carries s^p.
        let radial = symexpr::substitute(&primitive, &at_one);
        for (k, &ik) in idx.iter().enumerate() {
            let rest: Vec<usize> = idx.iter().copied().filter(|&j| j != ik).collect();
            let coef = radial.clone() * Expr::Var(ik);
            entries.push((rest, signed(coef, if k % 2 == 0 { 1 } else { -1 })));
        }
    }
    Form::new(t.chart.clone(), p - 1, entries)
}

/// Sign `(-1)^{k(n-k)}` of the double Hodge star on `k`-forms in dimension
/// `n` with a Riemannian metric.
pub fn star_involution_sign(k: usize, n: usize) -> i32 {
    if (k * (n - k)).is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Multi-indices of the given degree in graded lexicographic order.
pub fn multi_indices(n: usize, degree: usize) -> Vec<MultiIndex> {
    fn rec(start: usize, n: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if degree <= n {
        rec(0, n, degree, &mut Vec::new(), &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart(names: &[&str]) -> Arc<Chart> {
        Arc::new(Chart::new(names.iter().copied()).unwrap())
    }

    fn xyz() -> Arc<Chart> {
        chart(&["x", "y", "z"])
    }

    fn v(i: usize) -> Expr {
        Expr::Var(i)
    }

    fn basis(c: &Arc<Chart>, idx: &[usize]) -> Form {
        Form::basis(c.clone(), idx).unwrap()
    }

    #[test]
    fn normalization_folds_sign() {
        let c = xyz();
        let f = Form::new(c.clone(), 2, [(vec![1, 0], v(2))]).unwrap();
        assert_eq!(f.coefficient(&[0, 1]), (-v(2)).simplify());
        assert_eq!(f.coefficient(&[1, 0]), v(2));
        let g = Form::new(c, 2, [(vec![1, 1], v(2))]).unwrap();
        assert!(g.is_zero());
    }

    #[test]
    fn wedge_examples() {
        let c = xyz();
        let dx = basis(&c, &[0]);
        let dy = basis(&c, &[1]);
        assert!(wedge(&dx, &dx).unwrap().is_zero());
        assert_eq!(wedge(&dx, &dy).unwrap(), basis(&c, &[0, 1]));
        assert_eq!(
            wedge(&dy, &dx).unwrap(),
            basis(&c, &[0, 1]).scale(&Expr::int(-1))
        );
        let a = Form::new(c.clone(), 1, [(vec![1], v(0))]).unwrap();
        let b = Form::new(c.clone(), 1, [(vec![2], v(1))]).unwrap();
        let expected = Form::new(c, 2, [(vec![1, 2], v(0) * v(1))]).unwrap();
        assert_eq!(wedge(&a, &b).unwrap(), expected);
    }

    #[test]
    fn wedge_overflowing_degree_is_zero() {
        let c = chart(&["x", "y"]);
        let w = wedge(&basis(&c, &[0, 1]), &basis(&c, &[0])).unwrap();
        assert!(w.is_zero());
        assert_eq!(w.degree(), 3);
    }

    #[test]
    fn wedge_chart_mismatch() {
        let a = basis(&chart(&["x", "y"]), &[0]);
        let b = basis(&chart(&["u", "v"]), &[0]);
        assert_eq!(wedge(&a, &b), Err(Error::ChartMismatch));
    }

    #[test]
    fn flat_derivative_examples() {
        let c = chart(&["x", "y"]);
        let f = Form::scalar(c.clone(), v(0).pow(2));
        let df = exterior_derivative_flat(&f);
        assert_eq!(
            df,
            Form::new(c.clone(), 1, [(vec![0], Expr::int(2) * v(0))]).unwrap()
        );
        let xdy = Form::new(c.clone(), 1, [(vec![1], v(0))]).unwrap();
        assert_eq!(exterior_derivative_flat(&xdy), basis(&c, &[0, 1]));
        let rot = Form::one_form(c.clone(), &[-v(1), v(0)]).unwrap();
        assert_eq!(
            exterior_derivative_flat(&rot),
            basis(&c, &[0, 1]).scale(&Expr::int(2))
        );
    }

    #[test]
    fn hodge_examples() {
        let c = xyz();
        let g = Metric::euclidean(c.clone());
        assert_eq!(
            hodge_star(&basis(&c, &[0]), &g).unwrap(),
            basis(&c, &[1, 2])
        );
        assert_eq!(
            hodge_star(&basis(&c, &[0, 1]), &g).unwrap(),
            basis(&c, &[2])
        );
        let c2 = chart(&["x", "y"]);
        let g2 = Metric::euclidean(c2.clone());
        let dx = basis(&c2, &[0]);
        let twice = hodge_star(&hodge_star(&dx, &g2).unwrap(), &g2).unwrap();
        assert_eq!(twice, dx.scale(&Expr::int(-1)));
    }

    #[test]
    fn hodge_diagonal_scaling() {
        let c = chart(&["t", "x"]);
        let g = Metric::diagonal(c.clone(), vec![Expr::int(-1), Expr::int(1)]).unwrap();
        // *dt = sqrt|det| g^{tt} dx = -dx
        assert_eq!(
            hodge_star(&basis(&c, &[0]), &g).unwrap(),
            basis(&c, &[1]).scale(&Expr::int(-1))
        );
        let g4 = Metric::diagonal(c.clone(), vec![Expr::int(4), Expr::int(1)]).unwrap();
        assert_eq!(
            hodge_star(&basis(&c, &[0]), &g4).unwrap(),
            basis(&c, &[1]).scale(&Expr::ratio(1, 2))
        );
    }

    #[test]
    fn hodge_rejects_unsupported_metrics() {
        let c = chart(&["x", "y"]);
        let g = Metric::new(
            c.clone(),
            vec![
                vec![Expr::int(2), Expr::int(1)],
                vec![Expr::int(1), Expr::int(2)],
            ],
        )
        .unwrap();
        assert!(matches!(
            hodge_star(&basis(&c, &[0]), &g),
            Err(Error::UnsupportedMetric(_))
        ));
        let g2 = Metric::diagonal(c.clone(), vec![Expr::int(2), Expr::int(1)]).unwrap();
        assert!(matches!(
            hodge_star(&basis(&c, &[0]), &g2),
            Err(Error::UnsupportedMetric(_))
        ));
    }

    #[test]
    fn metric_validation() {
        let c = chart(&["x", "y"]);
        assert!(matches!(
            Metric::new(
                c.clone(),
                vec![vec![Expr::one(), v(0)], vec![Expr::zero(), Expr::one()]]
            ),
            Err(Error::UnsupportedMetric(_))
        ));
        assert!(matches!(
            Metric::diagonal(c.clone(), vec![v(0) - Expr::one(), Expr::one()]),
            Err(Error::DegenerateMetric(_))
        ));
        assert!(Metric::diagonal(c, vec![v(0), Expr::one()]).is_ok());
    }

    #[test]
    fn pullback_examples() {
        let c = xyz();
        let pi = Pseudostructure::new(c.clone(), [(1, Expr::int(2))]).unwrap();
        assert!(pullback_to(&basis(&c, &[0, 1]), &pi).unwrap().is_zero());

        let t = Form::new(c.clone(), 1, [(vec![1], v(0)), (vec![0], v(2))]).unwrap();
        let got = pullback_to(&t, &pi).unwrap();
        // induced chart is (x, z): z dx
        let induced = pi.induced_chart().clone();
        assert_eq!(induced.names(), ["x", "z"]);
        assert_eq!(
            got,
            Form::new(induced.clone(), 1, [(vec![0], v(1))]).unwrap()
        );

        let f = Form::scalar(c.clone(), v(0) * v(1).sin());
        let got = pullback_to(&f, &pi).unwrap();
        assert_eq!(got, Form::scalar(induced, v(0) * Expr::int(2).sin()));
    }

    #[test]
    fn pseudostructure_validation() {
        let c = xyz();
        assert!(Pseudostructure::new(c.clone(), [(0, v(1))]).is_err());
        assert!(Pseudostructure::new(c.clone(), [(0, Expr::one()), (0, Expr::int(2))]).is_err());
        assert!(Pseudostructure::new(c.clone(), [(5, Expr::one())]).is_err());
        let whole = Pseudostructure::whole(c.clone());
        assert!(whole.is_whole_chart());
        assert_eq!(whole.dimension(), 3);
        let s = Pseudostructure::symbolic(c, &[1]).unwrap();
        assert_eq!(s.to_string(), "{ y = c_y }");
    }

    #[test]
    fn compose_maps_back_to_original_indices() {
        let c = xyz();
        let outer = Pseudostructure::new(c.clone(), [(2, Expr::zero())]).unwrap();
        let inner =
            Pseudostructure::new(outer.induced_chart().clone(), [(1, Expr::one())]).unwrap();
        let both = outer.compose(&inner).unwrap();
        assert_eq!(both.free_indices(), [0]);
        assert_eq!(both.constraints().get(&1), Some(&Expr::one()));
    }

    #[test]
    fn homotopy_examples() {
        let c = chart(&["x", "y"]);
        let area = basis(&c, &[0, 1]);
        let h = homotopy_antiderivative(&area).unwrap();
        let expected = Form::one_form(
            c.clone(),
            &[-v(1) * Expr::ratio(1, 2), v(0) * Expr::ratio(1, 2)],
        )
        .unwrap();
        assert_eq!(h, expected);
        assert_eq!(exterior_derivative_flat(&h), area);

        let two_x = Form::new(c.clone(), 1, [(vec![0], Expr::int(2) * v(0))]).unwrap();
        assert_eq!(
            homotopy_antiderivative(&two_x).unwrap(),
            Form::scalar(c.clone(), v(0).pow(2))
        );

        let c3 = xyz();
        let t = basis(&c3, &[0, 1]).add(&basis(&c3, &[1, 2])).unwrap();
        let h = homotopy_antiderivative(&t).unwrap();
        assert_eq!(exterior_derivative_flat(&h), t);
    }

    #[test]
    fn homotopy_errors() {
        let c = chart(&["x", "y"]);
        let xdy = Form::new(c.clone(), 1, [(vec![1], v(0))]).unwrap();
        assert!(matches!(
            homotopy_antiderivative(&xdy),
            Err(Error::NotClosed(_))
        ));
        let f = Form::scalar(c.clone(), v(0));
        assert!(matches!(
            homotopy_antiderivative(&f),
            Err(Error::DegreeMismatch(_))
        ));
        let trig = Form::new(c, 1, [(vec![0], v(0).cos())]).unwrap();
        assert!(matches!(
            homotopy_antiderivative(&trig),
            Err(Error::UnsupportedIntegrand(_))
        ));
    }

    #[test]
    fn homotopy_treats_parameters_as_constants() {
        let c = chart(&["x", "z"]);
        let t = Form::new(c.clone(), 1, [(vec![0], Expr::param("c_y"))]).unwrap();
        let h = homotopy_antiderivative(&t).unwrap();
        assert_eq!(h, Form::scalar(c, Expr::param("c_y") * v(0)));
    }

    #[test]
    fn display_is_canonical() {
        let c = xyz();
        let t = Form::new(
            c.clone(),
            2,
            [
                (vec![0, 2], v(2).sin()),
                (vec![0, 1], v(0) * v(1)),
                (vec![1, 2], -(v(0) + Expr::one())),
            ],
        )
        .unwrap();
        assert_eq!(
            t.display().to_string(),
            "x*y dx^dy + sin(z) dx^dz + (-x - 1) dy^dz"
        );
        let r = Form::one_form(c.clone(), &[-v(1), Expr::one(), Expr::ratio(-1, 2)]).unwrap();
        assert_eq!(r.display().to_string(), "-y dx + dy - 1/2 dz");
        assert_eq!(Form::zero(c, 1).display().to_string(), "0");
    }

    #[test]
    fn multi_index_enumeration() {
        assert_eq!(
            multi_indices(3, 2),
            vec![vec![0, 1], vec![0, 2], vec![1, 2]]
        );
        assert_eq!(multi_indices(2, 0), vec![Vec::<usize>::new()]);
        assert!(multi_indices(2, 3).is_empty());
    }
}
