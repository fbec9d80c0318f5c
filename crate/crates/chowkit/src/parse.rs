//! One textual expression grammar for scalar polynomials and classes,
//! shared by the scenario file format and the command line. Atoms are
//! integers, named parameters, `binom(p, k)`, and the class atoms `xi`
//! (alias `H`), the fiber atom of the current model, `pt`, declared base
//! symbols, and `pi(<symbol>)`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::chow::{ChowClass, ChowModel, DivSym, DivisorCombo, ModelKind};
use crate::poly::{Param, PolyExpr};
use crate::rat::{Int, Rat};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}, column {col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
    pub expected: Vec<&'static str>,
}

impl ParseError {
    fn new(line: usize, col: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            col,
            message: message.into(),
            expected: Vec::new(),
        }
    }

    fn expecting(mut self, expected: Vec<&'static str>) -> Self {
        self.expected = expected;
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(Int),
    Ident(String),
    Ref(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Int(n) => write!(f, "{}", n),
            Tok::Ident(s) => write!(f, "{}", s),
            Tok::Ref(s) => write!(f, "@{}", s),
            Tok::Plus => write!(f, "+"),
            Tok::Minus => write!(f, "-"),
            Tok::Star => write!(f, "*"),
            Tok::Slash => write!(f, "/"),
            Tok::Caret => write!(f, "^"),
            Tok::LParen => write!(f, "("),
            Tok::RParen => write!(f, ")"),
            Tok::Comma => write!(f, ","),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

struct Lexer {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

fn lex(text: &str, line: usize) -> Result<Lexer, ParseError> {
    let mut toks = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let col = i + 1;
        let c = chars[i];
        match c {
            ' ' | '\t' => {
                i += 1;
            }
            '+' => {
                toks.push((Tok::Plus, line, col));
                i += 1;
            }
            '-' => {
                toks.push((Tok::Minus, line, col));
                i += 1;
            }
            '*' => {
                toks.push((Tok::Star, line, col));
                i += 1;
            }
            '/' => {
                toks.push((Tok::Slash, line, col));
                i += 1;
            }
            '^' => {
                toks.push((Tok::Caret, line, col));
                i += 1;
            }
            '(' => {
                toks.push((Tok::LParen, line, col));
                i += 1;
            }
            ')' => {
                toks.push((Tok::RParen, line, col));
                i += 1;
            }
            ',' => {
                toks.push((Tok::Comma, line, col));
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                toks.push((Tok::Int(s.parse().unwrap()), line, col));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                toks.push((Tok::Ident(s), line, col));
            }
            '@' => {
                i += 1;
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                if start == i {
                    return Err(ParseError::new(line, col, "expected a name after '@'"));
                }
                let s: String = chars[start..i].iter().collect();
                toks.push((Tok::Ref(s), line, col));
            }
            other => {
                return Err(ParseError::new(
                    line,
                    col,
                    format!("unexpected character '{}'", other),
                ));
            }
        }
    }
    toks.push((Tok::Eof, line, chars.len() + 1));
    Ok(Lexer { toks, pos: 0 })
}

impl Lexer {
    fn peek(&self) -> &(Tok, usize, usize) {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> (Tok, usize, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &'static str) -> Result<(), ParseError> {
        let (t, line, col) = self.next();
        if t == want {
            Ok(())
        } else {
            Err(
                ParseError::new(line, col, format!("expected {} but found '{}'", what, t))
                    .expecting(vec![what]),
            )
        }
    }
}

/// Expression tree; spans point at the start of each node.
#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Int(Int),
    Ident(String),
    /// `@name`: a stored value from the running derivation environment.
    Ref(String),
    Pi(String),
    Binom(Box<Ast>, u32),
    Neg(Box<Ast>),
    Add(Box<Ast>, Box<Ast>),
    Sub(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Div(Box<Ast>, Box<Ast>),
    Pow(Box<Ast>, u32),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ast {
    pub node: Node,
    pub line: usize,
    pub col: usize,
}

impl Ast {
    fn new(node: Node, line: usize, col: usize) -> Box<Ast> {
        Box::new(Ast { node, line, col })
    }
}

/// Parse one expression occupying the whole input; `line` seeds error
/// positions when the text comes from a larger file.
pub fn parse_expression_at(text: &str, line: usize) -> Result<Ast, ParseError> {
    let mut lx = lex(text, line)?;
    let ast = parse_expr(&mut lx)?;
    let (t, l, c) = lx.peek().clone();
    if t != Tok::Eof {
        return Err(
            ParseError::new(l, c, format!("unexpected trailing '{}'", t))
                .expecting(vec!["operator", "end of input"]),
        );
    }
    Ok(*ast)
}

pub fn parse_expression(text: &str) -> Result<Ast, ParseError> {
    parse_expression_at(text, 1)
}

fn parse_expr(lx: &mut Lexer) -> Result<Box<Ast>, ParseError> {
    let mut lhs = parse_term(lx)?;
    loop {
        match lx.peek().0 {
            Tok::Plus => {
                let (_, l, c) = lx.next();
                let rhs = parse_term(lx)?;
                lhs = Ast::new(Node::Add(lhs, rhs), l, c);
            }
            Tok::Minus => {
                let (_, l, c) = lx.next();
                let rhs = parse_term(lx)?;
                lhs = Ast::new(Node::Sub(lhs, rhs), l, c);
            }
            _ => return Ok(lhs),
        }
    }
}

fn parse_term(lx: &mut Lexer) -> Result<Box<Ast>, ParseError> {
    let mut lhs = parse_unary(lx)?;
    loop {
        match lx.peek().0 {
            Tok::Star => {
                let (_, l, c) = lx.next();
                let rhs = parse_unary(lx)?;
                lhs = Ast::new(Node::Mul(lhs, rhs), l, c);
            }
            Tok::Slash => {
                let (_, l, c) = lx.next();
                let rhs = parse_unary(lx)?;
                lhs = Ast::new(Node::Div(lhs, rhs), l, c);
            }
            _ => return Ok(lhs),
        }
    }
}

fn parse_unary(lx: &mut Lexer) -> Result<Box<Ast>, ParseError> {
    if lx.peek().0 == Tok::Minus {
        let (_, l, c) = lx.next();
        let inner = parse_unary(lx)?;
        return Ok(Ast::new(Node::Neg(inner), l, c));
    }
    parse_power(lx)
}

fn parse_power(lx: &mut Lexer) -> Result<Box<Ast>, ParseError> {
    let base = parse_atom(lx)?;
    if lx.peek().0 == Tok::Caret {
        let (_, l, c) = lx.next();
        let (t, el, ec) = lx.next();
        let exp = match t {
            Tok::Int(n) => n.to_u32().ok_or_else(|| {
                ParseError::new(el, ec, "exponent out of range".to_string())
            })?,
            other => {
                return Err(ParseError::new(
                    el,
                    ec,
                    format!("expected integer exponent but found '{}'", other),
                )
                .expecting(vec!["integer"]));
            }
        };
        return Ok(Ast::new(Node::Pow(base, exp), l, c));
    }
    Ok(base)
}

fn parse_atom(lx: &mut Lexer) -> Result<Box<Ast>, ParseError> {
    let (t, l, c) = lx.next();
    match t {
        Tok::Int(n) => Ok(Ast::new(Node::Int(n), l, c)),
        Tok::Ref(name) => Ok(Ast::new(Node::Ref(name), l, c)),
        Tok::LParen => {
            let inner = parse_expr(lx)?;
            lx.expect(Tok::RParen, ")")?;
            Ok(inner)
        }
        Tok::Ident(name) => {
            if lx.peek().0 != Tok::LParen {
                return Ok(Ast::new(Node::Ident(name), l, c));
            }
            lx.next(); // consume '('
            match name.as_str() {
                "pi" => {
                    let (t, il, ic) = lx.next();
                    let sym = match t {
                        Tok::Ident(s) => s,
                        other => {
                            return Err(ParseError::new(
                                il,
                                ic,
                                format!("expected a symbol name but found '{}'", other),
                            )
                            .expecting(vec!["symbol"]));
                        }
                    };
                    lx.expect(Tok::RParen, ")")?;
                    Ok(Ast::new(Node::Pi(sym), l, c))
                }
                "binom" => {
                    let arg = parse_expr(lx)?;
                    lx.expect(Tok::Comma, ",")?;
                    let (t, il, ic) = lx.next();
                    let k = match t {
                        Tok::Int(n) => n.to_u32().ok_or_else(|| {
                            ParseError::new(il, ic, "binomial index out of range".to_string())
                        })?,
                        other => {
                            return Err(ParseError::new(
                                il,
                                ic,
                                format!("expected integer index but found '{}'", other),
                            )
                            .expecting(vec!["integer"]));
                        }
                    };
                    lx.expect(Tok::RParen, ")")?;
                    Ok(Ast::new(Node::Binom(arg, k), l, c))
                }
                other => Err(ParseError::new(
                    l,
                    c,
                    format!("unknown function '{}'", other),
                )
                .expecting(vec!["pi", "binom"])),
            }
        }
        other => Err(ParseError::new(
            l,
            c,
            format!("expected an expression but found '{}'", other),
        )
        .expecting(vec!["integer", "identifier", "("])),
    }
}

/// Name-resolution context for lowering parsed expressions.
pub struct LowerCtx<'a> {
    pub model: Option<&'a ChowModel>,
    pub params: &'a BTreeSet<Param>,
    pub classes: &'a BTreeMap<String, ChowClass>,
    pub polys: &'a BTreeMap<String, PolyExpr>,
    /// Treat undeclared identifiers as fresh parameters (ad-hoc CLI mode).
    pub auto_params: bool,
}

impl<'a> LowerCtx<'a> {
    pub fn strict(
        model: &'a ChowModel,
        params: &'a BTreeSet<Param>,
        classes: &'a BTreeMap<String, ChowClass>,
        polys: &'a BTreeMap<String, PolyExpr>,
    ) -> Self {
        LowerCtx {
            model: Some(model),
            params,
            classes,
            polys,
            auto_params: false,
        }
    }

    fn class_atom(&self, name: &str) -> Option<ChowClass> {
        let model = self.model?;
        if name == "xi" || (name == "H" && model.kind == ModelKind::HyperquadricOverCurve) {
            return Some(ChowClass::xi());
        }
        if name == "kx" {
            return Some(crate::chow::canonical_class(model));
        }
        if name == "c2x" {
            return crate::chow::c2_tangent(model).ok();
        }
        if let Some(fiber) = model.fiber_symbol() {
            if name == fiber.name() {
                return Some(ChowClass::fiber(model));
            }
        }
        if model.kind == ModelKind::PBundleOverSurface {
            if name == "f" || name == "pt" {
                return Some(ChowClass::point(PolyExpr::one()));
            }
            if model
                .declared_symbols()
                .iter()
                .any(|s| s.name() == name)
            {
                return Some(ChowClass::divisor(DivisorCombo::sym(DivSym::new(name))));
            }
        }
        None
    }

    fn is_class_atom(&self, name: &str) -> bool {
        self.class_atom(name).is_some()
    }

    /// Lower to a scalar polynomial; class atoms are rejected.
    pub fn lower_poly(&self, ast: &Ast) -> Result<PolyExpr, ParseError> {
        match &ast.node {
            Node::Int(n) => Ok(PolyExpr::constant(Rat::from_integer(n.clone()))),
            Node::Ident(name) => {
                if let Some(p) = self.polys.get(name) {
                    return Ok(p.clone());
                }
                let param = Param::new(name);
                if self.params.contains(&param) {
                    return Ok(PolyExpr::param(&param));
                }
                if self.is_class_atom(name) || self.classes.contains_key(name) {
                    return Err(ParseError::new(
                        ast.line,
                        ast.col,
                        format!("'{}' is a class and cannot appear in a scalar expression", name),
                    ));
                }
                if self.auto_params {
                    return Ok(PolyExpr::param(&param));
                }
                Err(ParseError::new(
                    ast.line,
                    ast.col,
                    format!("unknown parameter '{}'", name),
                ))
            }
            Node::Ref(name) => self.polys.get(name).cloned().ok_or_else(|| {
                ParseError::new(ast.line, ast.col, format!("unknown value '@{}'", name))
            }),
            Node::Pi(_) => Err(ParseError::new(
                ast.line,
                ast.col,
                "pi(..) is a class and cannot appear in a scalar expression",
            )),
            Node::Binom(arg, k) => Ok(self.lower_poly(arg)?.binom(*k)),
            Node::Neg(a) => Ok(self.lower_poly(a)?.neg()),
            Node::Add(a, b) => Ok(self.lower_poly(a)?.add(&self.lower_poly(b)?)),
            Node::Sub(a, b) => Ok(self.lower_poly(a)?.sub(&self.lower_poly(b)?)),
            Node::Mul(a, b) => Ok(self.lower_poly(a)?.mul(&self.lower_poly(b)?)),
            Node::Div(a, b) => {
                let denom = self.lower_poly(b)?;
                let c = denom.as_constant().filter(|c| !c.is_zero()).ok_or_else(|| {
                    ParseError::new(
                        b.line,
                        b.col,
                        "division is only defined by a nonzero constant",
                    )
                })?;
                Ok(self.lower_poly(a)?.scale(&c.recip()))
            }
            Node::Pow(a, k) => Ok(self.lower_poly(a)?.pow(*k)),
        }
    }

    /// Lower to a class on the context model.
    pub fn lower_class(&self, ast: &Ast) -> Result<ChowClass, ParseError> {
        let model = self.model.ok_or_else(|| {
            ParseError::new(ast.line, ast.col, "no model in scope for a class expression")
        })?;
        match &ast.node {
            Node::Int(n) => Ok(ChowClass::scalar(PolyExpr::constant(Rat::from_integer(
                n.clone(),
            )))),
            Node::Ident(name) => {
                if let Some(c) = self.classes.get(name) {
                    return Ok(c.clone());
                }
                if let Some(c) = self.class_atom(name) {
                    return Ok(c);
                }
                if let Some(p) = self.polys.get(name) {
                    return Ok(ChowClass::scalar(p.clone()));
                }
                let param = Param::new(name);
                if self.params.contains(&param) || self.auto_params {
                    return Ok(ChowClass::scalar(PolyExpr::param(&param)));
                }
                Err(ParseError::new(
                    ast.line,
                    ast.col,
                    format!("unknown identifier '{}'", name),
                ))
            }
            Node::Ref(name) => {
                if let Some(c) = self.classes.get(name) {
                    return Ok(c.clone());
                }
                self.polys
                    .get(name)
                    .map(|p| ChowClass::scalar(p.clone()))
                    .ok_or_else(|| {
                        ParseError::new(ast.line, ast.col, format!("unknown value '@{}'", name))
                    })
            }
            Node::Pi(sym) => {
                if model.kind == ModelKind::PBundleOverSurface {
                    if !model.declared_symbols().iter().any(|s| s.name() == sym) {
                        return Err(ParseError::new(
                            ast.line,
                            ast.col,
                            format!("'{}' is not a declared base symbol", sym),
                        ));
                    }
                    Ok(ChowClass::divisor(DivisorCombo::sym(DivSym::new(sym))))
                } else {
                    // on a curve base, pull-backs are identified with
                    // multiples of the fiber class
                    let fiber = model.fiber_symbol().unwrap();
                    if sym == fiber.name() {
                        Ok(ChowClass::fiber(model))
                    } else {
                        Err(ParseError::new(
                            ast.line,
                            ast.col,
                            format!(
                                "'{}' is not a base symbol here; curve-base pull-backs are multiples of '{}'",
                                sym,
                                fiber.name()
                            ),
                        ))
                    }
                }
            }
            Node::Binom(arg, k) => Ok(ChowClass::scalar(self.lower_poly(arg)?.binom(*k))),
            Node::Neg(a) => Ok(self.lower_class(a)?.neg()),
            Node::Add(a, b) => Ok(self.lower_class(a)?.add(&self.lower_class(b)?)),
            Node::Sub(a, b) => Ok(self.lower_class(a)?.sub(&self.lower_class(b)?)),
            Node::Mul(a, b) => self
                .lower_class(a)?
                .mul(&self.lower_class(b)?, model)
                .map_err(|e| ParseError::new(ast.line, ast.col, e.to_string())),
            Node::Div(a, b) => {
                let denom = self.lower_poly(b)?;
                let c = denom.as_constant().filter(|c| !c.is_zero()).ok_or_else(|| {
                    ParseError::new(
                        b.line,
                        b.col,
                        "division is only defined by a nonzero constant",
                    )
                })?;
                Ok(self
                    .lower_class(a)?
                    .scale(&PolyExpr::constant(c.recip())))
            }
            Node::Pow(a, k) => self
                .lower_class(a)?
                .pow(*k, model)
                .map_err(|e| ParseError::new(ast.line, ast.col, e.to_string())),
        }
    }
}
