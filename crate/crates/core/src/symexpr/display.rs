use std::fmt::{self, Write};

use num_traits::{One, Signed};

use super::poly::{Atom, Poly};
use super::{Chart, Expr, Rational};

/// Canonical text of an expression with chart coordinate names. The output
/// parses back to the same canonical expression.
pub struct ExprDisplay<'a> {
    expr: &'a Expr,
    chart: &'a Chart,
}

impl<'a> ExprDisplay<'a> {
    pub(crate) fn new(expr: &'a Expr, chart: &'a Chart) -> Self {
        ExprDisplay { expr, chart }
    }
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = |i: usize| {
            self.chart
                .names()
                .get(i)
                .cloned()
                .unwrap_or_else(|| format!("_v{i}"))
        };
        write_poly(f, &self.expr.to_poly(), &names)
    }
}

pub(crate) fn write_generic(f: &mut dyn Write, p: &Poly) -> fmt::Result {
    write_poly(f, p, &|i| format!("x{i}"))
}

fn write_poly(f: &mut dyn Write, p: &Poly, names: &dyn Fn(usize) -> String) -> fmt::Result {
    if p.is_zero() {
        return f.write_str("0");
    }
    for (k, (m, c)) in p.terms().enumerate() {
        let mut factors = String::new();
        for (j, (a, e)) in m.factors().iter().enumerate() {
            if j > 0 {
                factors.push('*');
            }
            write_atom(&mut factors, a, *e, names)?;
        }
        let negative = c.is_negative();
        if k == 0 {
            if negative {
                f.write_char('-')?;
            }
        } else {
            f.write_str(if negative { " - " } else { " + " })?;
        }
        let mag = c.abs();
        if factors.is_empty() {
            write_rational(f, &mag)?;
        } else if mag.is_one() {
            f.write_str(&factors)?;
        } else {
            write_rational(f, &mag)?;
            f.write_char('*')?;
            f.write_str(&factors)?;
        }
    }
    Ok(())
}

fn write_rational(f: &mut dyn Write, r: &Rational) -> fmt::Result {
    if r.is_integer() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

fn write_atom(f: &mut String, a: &Atom, e: i32, names: &dyn Fn(usize) -> String) -> fmt::Result {
    let exp = match a {
        Atom::Var(i) => {
            f.push_str(&names(*i));
            e
        }
        Atom::Param(p) => {
            f.push_str(p);
            e
        }
        Atom::Call(func, arg) => {
            f.push_str(func.name());
            f.push('(');
            write_poly(f, arg, names)?;
            f.push(')');
            e
        }
        Atom::Recip(q) => {
            f.push('(');
            write_poly(f, q, names)?;
            f.push(')');
            -e
        }
    };
    if exp != 1 {
        write!(f, "^{exp}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_text() {
        let c = Chart::new(["x", "y"]).unwrap();
        let e = Expr::parse("y^2 - 3/2*x*y + 2 - x^2*sin(y) + 1/(x + 2)", &c).unwrap();
        let text = e.display(&c).to_string();
        assert_eq!(text, "-x^2*sin(y) - 3/2*x*y + y^2 + (x + 2)^-1 + 2");
        let back = Expr::parse(&text, &c).unwrap().simplify();
        assert_eq!(back, e.simplify());
    }
}
