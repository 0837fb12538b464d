//! Tokenizer and expression grammar shared with the document language.
//!
//! ```text
//! sum     := term (('+' | '-') term)*          leading '-' allowed
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' '-'? INT)?
//! primary := INT | FUNC '(' sum ')' | IDENT | '(' sum ')'
//! ```

use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;

use super::{Chart, Expr, Func, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Lexical,
    Syntax,
    NameResolution,
    Dimension,
    /// Well-formed declaration rejected by the engine (asymmetric metric,
    /// non-constant slice value, ...).
    Semantic,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParseErrorKind::Lexical => "lexical error",
            ParseErrorKind::Syntax => "syntax error",
            ParseErrorKind::NameResolution => "name-resolution error",
            ParseErrorKind::Dimension => "dimension error",
            ParseErrorKind::Semantic => "invalid declaration",
        })
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("{pos}: {kind}: {message}{}", expected_suffix(.expected))]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub pos: Pos,
    pub message: String,
    pub expected: Vec<String>,
}

fn expected_suffix(expected: &[String]) -> String {
    if expected.is_empty() {
        String::new()
    } else {
        format!(" (expected one of: {})", expected.join(", "))
    }
}

impl ParseError {
    pub fn new(kind: ParseErrorKind, pos: Pos, message: impl Into<String>) -> Self {
        ParseError {
            kind,
            pos,
            message: message.into(),
            expected: Vec::new(),
        }
    }

    pub fn expected(pos: Pos, found: &TokenKind, expected: &[&str]) -> Self {
        ParseError {
            kind: ParseErrorKind::Syntax,
            pos,
            message: format!("unexpected {found}"),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    Int(BigInt),
    /// Single-character punctuation, or `->` encoded as `'>'`.
    Punct(char),
    Eof,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Ident(s) => write!(f, "identifier `{s}`"),
            TokenKind::Int(n) => write!(f, "integer `{n}`"),
            TokenKind::Punct('>') => f.write_str("`->`"),
            TokenKind::Punct(c) => write!(f, "`{c}`"),
            TokenKind::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub pos: Pos,
}

const PUNCT: &str = "+-*/^()[]{},;=:?";

/// Splits `src` into tokens. `#` and `//` start comments that run to the end
/// of the line.
pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' || (c == '/' && chars.get(i + 1) == Some(&'/')) {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            col += i - start;
            tokens.push(Token {
                kind: TokenKind::Ident(word),
                pos,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            col += i - start;
            tokens.push(Token {
                kind: TokenKind::Int(digits.parse().expect("ascii digits")),
                pos,
            });
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'>') {
            tokens.push(Token {
                kind: TokenKind::Punct('>'),
                pos,
            });
            i += 2;
            col += 2;
            continue;
        }
        if PUNCT.contains(c) {
            tokens.push(Token {
                kind: TokenKind::Punct(c),
                pos,
            });
            i += 1;
            col += 1;
            continue;
        }
        return Err(ParseError::new(
            ParseErrorKind::Lexical,
            pos,
            format!("unexpected character `{c}`"),
        ));
    }
    tokens.push(Token {
        kind: TokenKind::Eof,
        pos: Pos { line, col },
    });
    Ok(tokens)
}

/// Cursor over a token vector (always terminated by `Eof`).
#[derive(Clone, Debug)]
pub struct TokenStream {
    tokens: Vec<Token>,
    idx: usize,
}

impl TokenStream {
    pub fn new(src: &str) -> Result<TokenStream, ParseError> {
        Ok(TokenStream {
            tokens: tokenize(src)?,
            idx: 0,
        })
    }

    pub fn peek(&self) -> &Token {
        &self.tokens[self.idx.min(self.tokens.len() - 1)]
    }

    pub fn peek_nth(&self, n: usize) -> &Token {
        &self.tokens[(self.idx + n).min(self.tokens.len() - 1)]
    }

    pub fn next_token(&mut self) -> Token {
        let t = self.peek().clone();
        if self.idx < self.tokens.len() - 1 {
            self.idx += 1;
        }
        t
    }

    pub fn at_punct(&self, c: char) -> bool {
        self.peek().kind == TokenKind::Punct(c)
    }

    pub fn at_ident(&self, word: &str) -> bool {
        matches!(&self.peek().kind, TokenKind::Ident(w) if w == word)
    }

    pub fn at_eof(&self) -> bool {
        self.peek().kind == TokenKind::Eof
    }

    pub fn eat_punct(&mut self, c: char) -> bool {
        if self.at_punct(c) {
            self.next_token();
            true
        } else {
            false
        }
    }

    pub fn expect_punct(&mut self, c: char) -> Result<Pos, ParseError> {
        let t = self.peek().clone();
        if t.kind == TokenKind::Punct(c) {
            self.next_token();
            Ok(t.pos)
        } else {
            let shown = if c == '>' {
                "->".to_string()
            } else {
                c.to_string()
            };
            Err(ParseError::expected(t.pos, &t.kind, &[&shown]))
        }
    }

    pub fn expect_keyword(&mut self, word: &str) -> Result<Pos, ParseError> {
        let t = self.peek().clone();
        if self.at_ident(word) {
            self.next_token();
            Ok(t.pos)
        } else {
            Err(ParseError::expected(t.pos, &t.kind, &[word]))
        }
    }

    pub fn expect_ident(&mut self) -> Result<(String, Pos), ParseError> {
        let t = self.next_token();
        match t.kind {
            TokenKind::Ident(s) => Ok((s, t.pos)),
            other => Err(ParseError::expected(t.pos, &other, &["identifier"])),
        }
    }

    pub fn expect_int(&mut self) -> Result<(BigInt, Pos), ParseError> {
        let t = self.next_token();
        match t.kind {
            TokenKind::Int(n) => Ok((n, t.pos)),
            other => Err(ParseError::expected(t.pos, &other, &["integer"])),
        }
    }
}

/// Name resolution for identifiers inside expressions.
pub trait Scope {
    fn resolve(&self, name: &str) -> Option<Expr>;
}

impl Scope for Chart {
    fn resolve(&self, name: &str) -> Option<Expr> {
        self.index_of(name).map(Expr::Var)
    }
}

/// Resolves chart coordinates first and treats any other identifier as a
/// free parameter.
pub struct ParamScope<'a>(pub &'a Chart);

impl Scope for ParamScope<'_> {
    fn resolve(&self, name: &str) -> Option<Expr> {
        Some(
            self.0
                .resolve(name)
                .unwrap_or_else(|| Expr::Param(name.to_string())),
        )
    }
}

/// Parses a full sum.
pub fn parse_expr(ts: &mut TokenStream, scope: &dyn Scope) -> Result<Expr, ParseError> {
    let mut terms = Vec::new();
    let first = if ts.eat_punct('-') {
        Expr::Neg(Box::new(parse_product(ts, scope)?))
    } else {
        ts.eat_punct('+');
        parse_product(ts, scope)?
    };
    terms.push(first);
    loop {
        if ts.eat_punct('+') {
            terms.push(parse_product(ts, scope)?);
        } else if ts.eat_punct('-') {
            terms.push(Expr::Neg(Box::new(parse_product(ts, scope)?)));
        } else {
            break;
        }
    }
    Ok(if terms.len() == 1 {
        terms.pop().unwrap()
    } else {
        Expr::Add(terms)
    })
}

/// Parses a product (`term` in the grammar). Stops before any token that
/// cannot continue a product, which lets callers place basis differentials
/// after a coefficient.
pub fn parse_product(ts: &mut TokenStream, scope: &dyn Scope) -> Result<Expr, ParseError> {
    let mut factors = vec![parse_unary(ts, scope)?];
    loop {
        if ts.eat_punct('*') {
            factors.push(parse_unary(ts, scope)?);
        } else if ts.at_punct('/') {
            let pos = ts.next_token().pos;
            let divisor = parse_unary(ts, scope)?;
            if divisor.constant_value().is_some_and(|c| c.is_zero()) {
                return Err(ParseError::new(
                    ParseErrorKind::Syntax,
                    pos,
                    "division by zero",
                ));
            }
            factors.push(Expr::Pow(Box::new(divisor), -1));
        } else {
            break;
        }
    }
    Ok(if factors.len() == 1 {
        factors.pop().unwrap()
    } else {
        Expr::Mul(factors)
    })
}

fn parse_unary(ts: &mut TokenStream, scope: &dyn Scope) -> Result<Expr, ParseError> {
    if ts.eat_punct('-') {
        return Ok(Expr::Neg(Box::new(parse_unary(ts, scope)?)));
    }
    parse_power(ts, scope)
}

fn parse_power(ts: &mut TokenStream, scope: &dyn Scope) -> Result<Expr, ParseError> {
    let base = parse_primary(ts, scope)?;
    if !ts.eat_punct('^') {
        return Ok(base);
    }
    let negative = ts.eat_punct('-');
    let (n, pos) = ts.expect_int()?;
    let k: i32 = n
        .try_into()
        .ok()
        .filter(|k: &i32| *k <= 64)
        .ok_or_else(|| ParseError::new(ParseErrorKind::Syntax, pos, "exponent too large"))?;
    Ok(Expr::Pow(Box::new(base), if negative { -k } else { k }))
}

fn parse_primary(ts: &mut TokenStream, scope: &dyn Scope) -> Result<Expr, ParseError> {
    let t = ts.next_token();
    match t.kind {
        TokenKind::Int(n) => Ok(Expr::Const(Rational::from_integer(n))),
        TokenKind::Punct('(') => {
            let e = parse_expr(ts, scope)?;
            ts.expect_punct(')')?;
            Ok(e)
        }
        TokenKind::Ident(name) => {
            if let Some(func) = Func::from_name(&name) {
                ts.expect_punct('(')?;
                let arg = parse_expr(ts, scope)?;
                ts.expect_punct(')')?;
                return Ok(Expr::Call(func, Box::new(arg)));
            }
            scope.resolve(&name).ok_or_else(|| {
                ParseError::new(
                    ParseErrorKind::NameResolution,
                    t.pos,
                    format!("unknown name `{name}`"),
                )
            })
        }
        other => Err(ParseError::expected(
            t.pos,
            &other,
            &["integer", "identifier", "function call", "("],
        )),
    }
}

pub(crate) fn parse_complete(text: &str, chart: &Chart) -> Result<Expr, ParseError> {
    let mut ts = TokenStream::new(text)?;
    let e = parse_expr(&mut ts, chart)?;
    let t = ts.peek();
    if !ts.at_eof() {
        return Err(ParseError::expected(t.pos, &t.kind, &["end of input"]));
    }
    Ok(e)
}
