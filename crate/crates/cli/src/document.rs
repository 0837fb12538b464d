//! The `.exo` document language.
//!
//! ```text
//! chart x y z;
//! metric g = diag(1, 1, 1);                 # or [[1, 0, 0], [0, 1, 0], ...]
//! connection G { [1][2][3] = x; }           # Γ^1_{23} = x, indices from 1
//! form w(2) = x*y dx^dy + sin(z) dx^dz;
//! form v(2) = d(u);
//! pseudostructure pi { y = 2, z = 0 };
//! relation r: d(psi) = w with G;            # psi undeclared: unknown potential
//! canonical swap (q, p) -> (Q = p, P = -q);
//! balance system S { xi 2; A[1] = xi2; A[2] = 0; degree 1; }
//! ```
//!
//! Declarations share one namespace and must precede their uses. A
//! document has exactly one chart; a balance system may declare it.

use std::fmt::{self, Write};
use std::sync::Arc;

use exo_core::balance::BalanceSystem;
use exo_core::forms::{exterior_derivative_flat, Form, Metric, Pseudostructure};
use exo_core::geometry::Connection;
use exo_core::relations::CanonicalMap;
use exo_core::symexpr::{
    is_exact_zero, parse_expr, parse_product, ParseError, ParseErrorKind, Pos, Token, TokenKind,
    TokenStream,
};
use exo_core::{Chart, Expr};
use indexmap::IndexMap;

/// A value with the position of its declaration. Equality ignores the
/// position so that reparsed documents compare equal.
#[derive(Clone, Debug)]
pub struct Spanned<T> {
    pub value: T,
    pub pos: Pos,
}

impl<T: PartialEq> PartialEq for Spanned<T> {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FormSource {
    Literal,
    /// `d(name)` of an earlier form.
    Derivative(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FormDecl {
    pub form: Form,
    pub source: FormSource,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Potential {
    /// Unknown state function, named only.
    Unknown(String),
    /// A declared form used as the candidate potential.
    Form(String),
}

impl Potential {
    pub fn name(&self) -> &str {
        match self {
            Potential::Unknown(n) | Potential::Form(n) => n,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelationDecl {
    pub potential: Potential,
    pub rhs: String,
    pub connection: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalDecl {
    /// Labels of the images, `Q…` first, then `P…`.
    pub labels: Vec<String>,
    pub map: CanonicalMap,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BalanceDecl {
    pub prefix: String,
    pub coefficients: Vec<Expr>,
    pub degree: usize,
    pub connection: Option<String>,
    pub form: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Document {
    pub chart: Option<Arc<Chart>>,
    pub metrics: IndexMap<String, Spanned<Metric>>,
    pub connections: IndexMap<String, Spanned<Connection>>,
    pub forms: IndexMap<String, Spanned<FormDecl>>,
    pub pseudostructures: IndexMap<String, Spanned<Pseudostructure>>,
    pub relations: IndexMap<String, Spanned<RelationDecl>>,
    pub canonicals: IndexMap<String, Spanned<CanonicalDecl>>,
    pub balances: IndexMap<String, Spanned<BalanceDecl>>,
}

impl Document {
    pub fn chart(&self) -> Option<&Arc<Chart>> {
        self.chart.as_ref()
    }

    pub fn form(&self, name: &str) -> Option<&Form> {
        self.forms.get(name).map(|d| &d.value.form)
    }

    pub fn is_declared(&self, name: &str) -> bool {
        self.metrics.contains_key(name)
            || self.connections.contains_key(name)
            || self.forms.contains_key(name)
            || self.pseudostructures.contains_key(name)
            || self.relations.contains_key(name)
            || self.canonicals.contains_key(name)
            || self.balances.contains_key(name)
    }

    /// Builds the balance system declared under `name`.
    pub fn balance_system(&self, name: &str) -> Option<exo_core::Result<BalanceSystem>> {
        let decl = &self.balances.get(name)?.value;
        let chart = self.chart.clone()?;
        let build = || {
            let mut s =
                BalanceSystem::new(chart, decl.coefficients.clone())?.with_degree(decl.degree)?;
            if let Some(c) = &decl.connection {
                s = s.with_connection(self.connections[c].value.clone())?;
            }
            if let Some(f) = &decl.form {
                s = s.with_form(self.forms[f].value.form.clone())?;
            }
            Ok(s)
        };
        Some(build())
    }
}

pub fn parse_document(text: &str) -> Result<Document, ParseError> {
    let mut p = Parser {
        ts: TokenStream::new(text)?,
        doc: Document::default(),
        canonical_count: 0,
    };
    while !p.ts.at_eof() {
        p.statement()?;
    }
    Ok(p.doc)
}

struct Parser {
    ts: TokenStream,
    doc: Document,
    canonical_count: usize,
}

fn err(kind: ParseErrorKind, pos: Pos, msg: impl Into<String>) -> ParseError {
    ParseError::new(kind, pos, msg)
}

const STATEMENTS: &[&str] = &[
    "chart",
    "metric",
    "connection",
    "form",
    "pseudostructure",
    "relation",
    "canonical",
    "balance",
];

impl Parser {
    fn statement(&mut self) -> Result<(), ParseError> {
        let t = self.ts.peek().clone();
        let word = match &t.kind {
            TokenKind::Ident(w) if STATEMENTS.contains(&w.as_str()) => w.clone(),
            other => return Err(ParseError::expected(t.pos, other, STATEMENTS)),
        };
        self.ts.next_token();
        match word.as_str() {
            "chart" => self.chart_stmt(t.pos),
            "metric" => self.metric_stmt(),
            "connection" => self.connection_stmt(),
            "form" => self.form_stmt(),
            "pseudostructure" => self.pseudostructure_stmt(),
            "relation" => self.relation_stmt(),
            "canonical" => self.canonical_stmt(t.pos),
            _ => self.balance_stmt(),
        }
    }

    fn chart(&self, pos: Pos) -> Result<Arc<Chart>, ParseError> {
        self.doc.chart.clone().ok_or_else(|| {
            err(
                ParseErrorKind::NameResolution,
                pos,
                "no chart declared before this statement",
            )
        })
    }

    fn fresh_name(&mut self) -> Result<(String, Pos), ParseError> {
        let (name, pos) = self.ts.expect_ident()?;
        if self.doc.is_declared(&name) {
            return Err(err(
                ParseErrorKind::NameResolution,
                pos,
                format!("`{name}` is already declared"),
            ));
        }
        if self
            .doc
            .chart
            .as_ref()
            .is_some_and(|c| c.index_of(&name).is_some())
        {
            return Err(err(
                ParseErrorKind::NameResolution,
                pos,
                format!("`{name}` is a coordinate"),
            ));
        }
        Ok((name, pos))
    }

    fn expr(&mut self, chart: &Chart) -> Result<Expr, ParseError> {
        Ok(parse_expr(&mut self.ts, chart)?.simplify())
    }

    fn index(&mut self, n: usize) -> Result<usize, ParseError> {
        let (k, pos) = self.ts.expect_int()?;
        match usize::try_from(&k).ok() {
            Some(k) if (1..=n).contains(&k) => Ok(k - 1),
            _ => Err(err(
                ParseErrorKind::Dimension,
                pos,
                format!("index {k} outside 1..={n}"),
            )),
        }
    }

    fn set_chart(&mut self, chart: Chart, pos: Pos) -> Result<(), ParseError> {
        if self.doc.chart.is_some() {
            return Err(err(
                ParseErrorKind::Syntax,
                pos,
                "a document has exactly one chart",
            ));
        }
        for name in chart.names() {
            let clash = name == "d"
                || name
                    .strip_prefix('d')
                    .is_some_and(|rest| chart.index_of(rest).is_some());
            if clash {
                return Err(err(
                    ParseErrorKind::NameResolution,
                    pos,
                    format!("coordinate `{name}` collides with a differential"),
                ));
            }
        }
        self.doc.chart = Some(Arc::new(chart));
        Ok(())
    }

    fn chart_stmt(&mut self, pos: Pos) -> Result<(), ParseError> {
        let mut names = Vec::new();
        while !self.ts.at_punct(';') {
            names.push(self.ts.expect_ident()?.0);
        }
        self.ts.expect_punct(';')?;
        let chart =
            Chart::new(names).map_err(|e| err(ParseErrorKind::Dimension, pos, e.to_string()))?;
        self.set_chart(chart, pos)
    }

    fn metric_stmt(&mut self) -> Result<(), ParseError> {
        let (name, pos) = self.fresh_name()?;
        let chart = self.chart(pos)?;
        let n = chart.dim();
        self.ts.expect_punct('=')?;
        let body_pos = self.ts.peek().pos;
        let metric = if self.ts.at_ident("diag") {
            self.ts.next_token();
            self.ts.expect_punct('(')?;
            let diag = self.expr_list(&chart, ')')?;
            if diag.len() != n {
                return Err(err(
                    ParseErrorKind::Dimension,
                    body_pos,
                    format!("diag needs {n} entries, got {}", diag.len()),
                ));
            }
            Metric::diagonal(chart.clone(), diag)
        } else {
            self.ts.expect_punct('[')?;
            let mut rows = Vec::new();
            loop {
                let row_pos = self.ts.expect_punct('[')?;
                let row = self.expr_list(&chart, ']')?;
                if row.len() != n {
                    return Err(err(
                        ParseErrorKind::Dimension,
                        row_pos,
                        format!("metric rows need {n} entries, got {}", row.len()),
                    ));
                }
                rows.push(row);
                if !self.ts.eat_punct(',') {
                    break;
                }
            }
            self.ts.expect_punct(']')?;
            if rows.len() != n {
                return Err(err(
                    ParseErrorKind::Dimension,
                    body_pos,
                    format!("metric needs {n} rows, got {}", rows.len()),
                ));
            }
            Metric::new(chart.clone(), rows)
        };
        self.ts.expect_punct(';')?;
        let metric = metric.map_err(|e| err(ParseErrorKind::Semantic, body_pos, e.to_string()))?;
        self.doc
            .metrics
            .insert(name, Spanned { value: metric, pos });
        Ok(())
    }

    /// Comma-separated expressions up to and including `close`.
    fn expr_list(&mut self, chart: &Chart, close: char) -> Result<Vec<Expr>, ParseError> {
        let mut out = Vec::new();
        if self.ts.eat_punct(close) {
            return Ok(out);
        }
        loop {
            out.push(self.expr(chart)?);
            if !self.ts.eat_punct(',') {
                break;
            }
        }
        self.ts.expect_punct(close)?;
        Ok(out)
    }

    fn connection_stmt(&mut self) -> Result<(), ParseError> {
        let (name, pos) = self.fresh_name()?;
        let chart = self.chart(pos)?;
        let n = chart.dim();
        let mut c = Connection::zero(chart.clone());
        self.ts.expect_punct('{')?;
        while !self.ts.eat_punct('}') {
            let mut idx = [0usize; 3];
            for slot in &mut idx {
                self.ts.expect_punct('[')?;
                *slot = self.index(n)?;
                self.ts.expect_punct(']')?;
            }
            self.ts.expect_punct('=')?;
            let e = self.expr(&chart)?;
            self.ts.expect_punct(';')?;
            c.set(idx[0], idx[1], idx[2], e).expect("indices checked");
        }
        self.ts.eat_punct(';');
        self.doc.connections.insert(name, Spanned { value: c, pos });
        Ok(())
    }

    fn differential(&self, chart: &Chart) -> Option<usize> {
        match &self.ts.peek().kind {
            TokenKind::Ident(w) => w.strip_prefix('d').and_then(|rest| chart.index_of(rest)),
            _ => None,
        }
    }

    fn form_stmt(&mut self) -> Result<(), ParseError> {
        let (name, pos) = self.fresh_name()?;
        let chart = self.chart(pos)?;
        self.ts.expect_punct('(')?;
        let (deg, deg_pos) = self.ts.expect_int()?;
        self.ts.expect_punct(')')?;
        let degree = usize::try_from(&deg)
            .ok()
            .filter(|d| *d <= chart.dim())
            .ok_or_else(|| {
                err(
                    ParseErrorKind::Dimension,
                    deg_pos,
                    format!("degree {deg} exceeds the chart dimension {}", chart.dim()),
                )
            })?;
        self.ts.expect_punct('=')?;
        let decl = if self.ts.at_ident("d") && self.ts.peek_nth(1).kind == TokenKind::Punct('(') {
            let body_pos = self.ts.next_token().pos;
            self.ts.expect_punct('(')?;
            let (inner, inner_pos) = self.ts.expect_ident()?;
            self.ts.expect_punct(')')?;
            let base = self.doc.form(&inner).ok_or_else(|| {
                err(
                    ParseErrorKind::NameResolution,
                    inner_pos,
                    format!("unknown form `{inner}`"),
                )
            })?;
            let form = exterior_derivative_flat(base);
            if form.degree() != degree {
                return Err(err(
                    ParseErrorKind::Dimension,
                    body_pos,
                    format!(
                        "declared degree {degree} but d({inner}) has degree {}",
                        form.degree()
                    ),
                ));
            }
            FormDecl {
                form,
                source: FormSource::Derivative(inner),
            }
        } else {
            let form = self.form_body(&chart, degree)?;
            FormDecl {
                form,
                source: FormSource::Literal,
            }
        };
        self.ts.expect_punct(';')?;
        self.doc.forms.insert(name, Spanned { value: decl, pos });
        Ok(())
    }

    fn form_body(&mut self, chart: &Arc<Chart>, degree: usize) -> Result<Form, ParseError> {
        let mut entries = Vec::new();
        let mut first = true;
        loop {
            let negative = if first {
                let neg = self.ts.eat_punct('-');
                if !neg {
                    self.ts.eat_punct('+');
                }
                neg
            } else if self.ts.eat_punct('+') {
                false
            } else if self.ts.eat_punct('-') {
                true
            } else {
                break;
            };
            first = false;
            let term_pos = self.ts.peek().pos;
            let coef = if self.differential(chart).is_some() {
                Expr::one()
            } else {
                parse_product(&mut self.ts, chart.as_ref())?.simplify()
            };
            let mut basis = Vec::new();
            if let Some(i) = self.differential(chart) {
                self.ts.next_token();
                basis.push(i);
                while self.ts.eat_punct('^') {
                    let t = self.ts.peek().clone();
                    match self.differential(chart) {
                        Some(i) => {
                            self.ts.next_token();
                            basis.push(i);
                        }
                        None => return Err(self.bad_differential(&t)),
                    }
                }
            }
            if let TokenKind::Ident(_) = &self.ts.peek().kind {
                let t = self.ts.peek().clone();
                return Err(self.bad_differential(&t));
            }
            let coef = if negative { -coef } else { coef };
            if basis.is_empty() && is_exact_zero(&coef) {
                continue;
            }
            if basis.len() != degree {
                return Err(err(
                    ParseErrorKind::Dimension,
                    term_pos,
                    format!(
                        "term of degree {} in a form declared with degree {degree}",
                        basis.len()
                    ),
                ));
            }
            entries.push((basis, coef));
        }
        Ok(Form::new(chart.clone(), degree, entries).expect("indices resolved against the chart"))
    }

    fn bad_differential(&self, t: &Token) -> ParseError {
        match &t.kind {
            TokenKind::Ident(w) if w.starts_with('d') => err(
                ParseErrorKind::NameResolution,
                t.pos,
                format!("unknown differential `{w}`"),
            ),
            other => ParseError::expected(t.pos, other, &["differential"]),
        }
    }

    fn pseudostructure_stmt(&mut self) -> Result<(), ParseError> {
        let (name, pos) = self.fresh_name()?;
        let chart = self.chart(pos)?;
        self.ts.expect_punct('{')?;
        let mut constraints = Vec::new();
        if !self.ts.at_punct('}') {
            loop {
                let (var, var_pos) = self.ts.expect_ident()?;
                let j = chart.index_of(&var).ok_or_else(|| {
                    err(
                        ParseErrorKind::NameResolution,
                        var_pos,
                        format!("unknown coordinate `{var}`"),
                    )
                })?;
                self.ts.expect_punct('=')?;
                let value_pos = self.ts.peek().pos;
                let value = self.expr(&chart)?;
                if !value.is_constant() {
                    return Err(err(
                        ParseErrorKind::Semantic,
                        value_pos,
                        "slice values must be rational constants",
                    ));
                }
                constraints.push((j, value));
                if !self.ts.eat_punct(',') {
                    break;
                }
            }
        }
        self.ts.expect_punct('}')?;
        self.ts.expect_punct(';')?;
        let pi = Pseudostructure::new(chart, constraints)
            .map_err(|e| err(ParseErrorKind::Semantic, pos, e.to_string()))?;
        self.doc
            .pseudostructures
            .insert(name, Spanned { value: pi, pos });
        Ok(())
    }

    fn relation_stmt(&mut self) -> Result<(), ParseError> {
        let (name, pos) = self.fresh_name()?;
        self.chart(pos)?;
        self.ts.expect_punct(':')?;
        self.ts.expect_keyword("d")?;
        self.ts.expect_punct('(')?;
        let (psi, psi_pos) = self.ts.expect_ident()?;
        self.ts.expect_punct(')')?;
        self.ts.expect_punct('=')?;
        let (rhs, rhs_pos) = self.ts.expect_ident()?;
        let rhs_form = self.doc.form(&rhs).ok_or_else(|| {
            err(
                ParseErrorKind::NameResolution,
                rhs_pos,
                format!("unknown form `{rhs}`"),
            )
        })?;
        let potential = match self.doc.form(&psi) {
            Some(f) if f.degree() + 1 != rhs_form.degree() => {
                return Err(err(
                    ParseErrorKind::Dimension,
                    psi_pos,
                    format!(
                        "potential of degree {} for a form of degree {}",
                        f.degree(),
                        rhs_form.degree()
                    ),
                ));
            }
            Some(_) => Potential::Form(psi),
            None if self.doc.is_declared(&psi) => {
                return Err(err(
                    ParseErrorKind::NameResolution,
                    psi_pos,
                    format!("`{psi}` is not a form"),
                ));
            }
            None => Potential::Unknown(psi),
        };
        if rhs_form.degree() == 0 {
            return Err(err(
                ParseErrorKind::Dimension,
                rhs_pos,
                "the right-hand side must have degree at least 1",
            ));
        }
        let connection = if self.ts.at_ident("with") {
            self.ts.next_token();
            let (c, c_pos) = self.ts.expect_ident()?;
            if !self.doc.connections.contains_key(&c) {
                return Err(err(
                    ParseErrorKind::NameResolution,
                    c_pos,
                    format!("unknown connection `{c}`"),
                ));
            }
            Some(c)
        } else {
            None
        };
        self.ts.expect_punct(';')?;
        let decl = RelationDecl {
            potential,
            rhs,
            connection,
        };
        self.doc
            .relations
            .insert(name, Spanned { value: decl, pos });
        Ok(())
    }

    fn canonical_stmt(&mut self, kw_pos: Pos) -> Result<(), ParseError> {
        let (name, pos) = if self.ts.at_punct('(') {
            self.canonical_count += 1;
            let mut k = self.canonical_count;
            while self.doc.is_declared(&format!("canonical{k}")) {
                k += 1;
            }
            (format!("canonical{k}"), kw_pos)
        } else {
            self.fresh_name()?
        };
        let chart = self.chart(pos)?;
        let tuple_pos = self.ts.expect_punct('(')?;
        let mut vars = Vec::new();
        loop {
            vars.push(self.ts.expect_ident()?.0);
            if !self.ts.eat_punct(',') {
                break;
            }
        }
        self.ts.expect_punct(')')?;
        if vars.as_slice() != chart.names() {
            return Err(err(
                ParseErrorKind::Dimension,
                tuple_pos,
                format!(
                    "the source tuple must list the chart coordinates ({})",
                    chart.names().join(", ")
                ),
            ));
        }
        self.ts.expect_punct('>')?;
        let image_pos = self.ts.expect_punct('(')?;
        let mut labels = Vec::new();
        let mut images = Vec::new();
        loop {
            labels.push(self.ts.expect_ident()?.0);
            self.ts.expect_punct('=')?;
            images.push(self.expr(&chart)?);
            if !self.ts.eat_punct(',') {
                break;
            }
        }
        self.ts.expect_punct(')')?;
        self.ts.expect_punct(';')?;
        let n = chart.dim();
        if n % 2 != 0 || images.len() != n {
            return Err(err(
                ParseErrorKind::Dimension,
                image_pos,
                format!(
                    "a canonical map on a {n}-dimensional chart needs {n} images, got {}",
                    images.len()
                ),
            ));
        }
        let p_images = images.split_off(n / 2);
        let map = CanonicalMap::new(chart, images, p_images)
            .map_err(|e| err(ParseErrorKind::Dimension, image_pos, e.to_string()))?;
        self.doc.canonicals.insert(
            name,
            Spanned {
                value: CanonicalDecl { labels, map },
                pos,
            },
        );
        Ok(())
    }

    fn balance_stmt(&mut self) -> Result<(), ParseError> {
        self.ts.expect_keyword("system")?;
        let (name, pos) = self.fresh_name()?;
        self.ts.expect_punct('{')?;
        let (prefix, prefix_pos) = self.ts.expect_ident()?;
        let (dim, dim_pos) = self.ts.expect_int()?;
        self.ts.expect_punct(';')?;
        let dim = usize::try_from(&dim)
            .ok()
            .ok_or_else(|| err(ParseErrorKind::Dimension, dim_pos, "dimension out of range"))?;
        let numbered = Chart::numbered(&prefix, dim)
            .map_err(|e| err(ParseErrorKind::Dimension, dim_pos, e.to_string()))?;
        match &self.doc.chart {
            None => self.set_chart(numbered, prefix_pos)?,
            Some(c) if **c == numbered => {}
            Some(c) => {
                return Err(err(
                    ParseErrorKind::Dimension,
                    prefix_pos,
                    format!(
                        "the accompanying chart {} differs from the document chart {}",
                        numbered.names().join(" "),
                        c.names().join(" ")
                    ),
                ))
            }
        }
        let chart = self.chart(pos)?;
        let mut coefficients: Vec<Option<Expr>> = vec![None; dim];
        let mut degree = 1;
        let mut connection = None;
        let mut form = None;
        while !self.ts.eat_punct('}') {
            let t = self.ts.peek().clone();
            match &t.kind {
                TokenKind::Ident(w) if w == "A" => {
                    self.ts.next_token();
                    self.ts.expect_punct('[')?;
                    let i = self.index(dim)?;
                    self.ts.expect_punct(']')?;
                    self.ts.expect_punct('=')?;
                    let e = self.expr(&chart)?;
                    if coefficients[i].replace(e).is_some() {
                        return Err(err(
                            ParseErrorKind::Semantic,
                            t.pos,
                            format!("A[{}] given twice", i + 1),
                        ));
                    }
                }
                TokenKind::Ident(w) if w == "degree" => {
                    self.ts.next_token();
                    let (d, d_pos) = self.ts.expect_int()?;
                    degree = usize::try_from(&d)
                        .ok()
                        .filter(|d| *d <= 3)
                        .ok_or_else(|| {
                            err(
                                ParseErrorKind::Dimension,
                                d_pos,
                                "balance degree must be 0..=3",
                            )
                        })?;
                }
                TokenKind::Ident(w) if w == "connection" => {
                    self.ts.next_token();
                    let (c, c_pos) = self.ts.expect_ident()?;
                    if !self.doc.connections.contains_key(&c) {
                        return Err(err(
                            ParseErrorKind::NameResolution,
                            c_pos,
                            format!("unknown connection `{c}`"),
                        ));
                    }
                    connection = Some(c);
                }
                TokenKind::Ident(w) if w == "form" => {
                    self.ts.next_token();
                    let (f, f_pos) = self.ts.expect_ident()?;
                    if !self.doc.forms.contains_key(&f) {
                        return Err(err(
                            ParseErrorKind::NameResolution,
                            f_pos,
                            format!("unknown form `{f}`"),
                        ));
                    }
                    form = Some(f);
                }
                other => {
                    return Err(ParseError::expected(
                        t.pos,
                        other,
                        &["A", "degree", "connection", "form", "}"],
                    ))
                }
            }
            self.ts.expect_punct(';')?;
        }
        self.ts.eat_punct(';');
        if let Some(f) = &form {
            let fd = self.doc.forms[f].value.form.degree();
            if fd != degree {
                return Err(err(
                    ParseErrorKind::Dimension,
                    pos,
                    format!("declared degree {degree} but form `{f}` has degree {fd}"),
                ));
            }
        }
        let decl = BalanceDecl {
            prefix,
            coefficients: coefficients
                .into_iter()
                .map(|c| c.unwrap_or_else(Expr::zero))
                .collect(),
            degree,
            connection,
            form,
        };
        self.doc.balances.insert(name, Spanned { value: decl, pos });
        Ok(())
    }
}

/// Canonical source text of a document. Reparsing it yields an equal
/// document.
pub fn print_document(doc: &Document) -> String {
    let mut out = String::new();
    write_document(&mut out, doc).expect("writing to a string");
    out
}

fn write_document(out: &mut String, doc: &Document) -> fmt::Result {
    let Some(chart) = &doc.chart else {
        return Ok(());
    };
    writeln!(out, "chart {};", chart.names().join(" "))?;
    let show = |e: &Expr| e.display(chart).to_string();
    for (name, m) in &doc.metrics {
        let m = &m.value;
        let n = chart.dim();
        if m.is_diagonal() {
            let d: Vec<String> = (0..n).map(|i| show(m.entry(i, i))).collect();
            writeln!(out, "metric {name} = diag({});", d.join(", "))?;
        } else {
            let rows: Vec<String> = m
                .entries()
                .iter()
                .map(|r| format!("[{}]", r.iter().map(show).collect::<Vec<_>>().join(", ")))
                .collect();
            writeln!(out, "metric {name} = [{}];", rows.join(", "))?;
        }
    }
    for (name, c) in &doc.connections {
        write!(out, "connection {name} {{")?;
        for (s, a, b, e) in c.value.entries() {
            write!(out, " [{}][{}][{}] = {};", s + 1, a + 1, b + 1, show(e))?;
        }
        writeln!(out, " }}")?;
    }
    for (name, f) in &doc.forms {
        let d = &f.value;
        match &d.source {
            FormSource::Literal => writeln!(
                out,
                "form {name}({}) = {};",
                d.form.degree(),
                d.form.display()
            )?,
            FormSource::Derivative(base) => {
                writeln!(out, "form {name}({}) = d({base});", d.form.degree())?
            }
        }
    }
    for (name, pi) in &doc.pseudostructures {
        writeln!(out, "pseudostructure {name} {};", pi.value)?;
    }
    for (name, r) in &doc.relations {
        let r = &r.value;
        write!(
            out,
            "relation {name}: d({}) = {}",
            r.potential.name(),
            r.rhs
        )?;
        if let Some(c) = &r.connection {
            write!(out, " with {c}")?;
        }
        writeln!(out, ";")?;
    }
    for (name, c) in &doc.canonicals {
        let c = &c.value;
        let images = c.map.q_images().iter().chain(c.map.p_images());
        let parts: Vec<String> = c
            .labels
            .iter()
            .zip(images)
            .map(|(l, e)| format!("{l} = {}", show(e)))
            .collect();
        writeln!(
            out,
            "canonical {name} ({}) -> ({});",
            chart.names().join(", "),
            parts.join(", ")
        )?;
    }
    for (name, b) in &doc.balances {
        let b = &b.value;
        write!(
            out,
            "balance system {name} {{ {} {};",
            b.prefix,
            b.coefficients.len()
        )?;
        for (i, a) in b.coefficients.iter().enumerate() {
            write!(out, " A[{}] = {};", i + 1, show(a))?;
        }
        write!(out, " degree {};", b.degree)?;
        if let Some(c) = &b.connection {
            write!(out, " connection {c};")?;
        }
        if let Some(f) = &b.form {
            write!(out, " form {f};")?;
        }
        writeln!(out, " }}")?;
    }
    Ok(())
}
