//! Text syntax for spaces, functions, forms and operators.
//!
//! ```text
//! space    := affine(N) | torus(N) | localized([f =] poly) | product(space, space, ...)
//! sum      := ['-'] product (('+' | '-') product)*
//! product  := atom (['*'] atom)*
//! atom     := number ['/' number] | xI['^' int] | dI['^' N] | f^-N | dxI | '(' sum ')'['^' N]
//! ```
//!
//! `dx1^dx2` is a wedge; any other `^` is an exponent. Operator products are
//! multiplied in the order written, so `d1 x1` parses to `x1 d1 + 1`.

use std::sync::Arc;

use num_traits::One;

use crate::algebra::AlgebraElement;
use crate::diffop::DiffOperator;
use crate::error::{Error, Result};
use crate::forms::DifferentialForm;
use crate::linalg::Rational;
use crate::poly::UniPoly;
use crate::space::{Space, SpaceSpec};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(u64),
    Sym(char),
}

struct Lexer {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Lexer {
    fn new(src: &str) -> Result<Self> {
        let chars: Vec<(usize, char)> = src.char_indices().collect();
        let mut toks = Vec::new();
        let mut k = 0;
        while k < chars.len() {
            let (p, c) = chars[k];
            if c.is_whitespace() {
                k += 1;
            } else if c.is_ascii_alphabetic() {
                let start = k;
                while k < chars.len() && chars[k].1.is_ascii_alphanumeric() {
                    k += 1;
                }
                toks.push((p, Tok::Ident(chars[start..k].iter().map(|(_, c)| c).collect())));
            } else if c.is_ascii_digit() {
                let start = k;
                while k < chars.len() && chars[k].1.is_ascii_digit() {
                    k += 1;
                }
                let text: String = chars[start..k].iter().map(|(_, c)| c).collect();
                let n = text.parse().map_err(|_| Error::parse(p, "number too large"))?;
                toks.push((p, Tok::Int(n)));
            } else if "()+-*/^,=".contains(c) {
                toks.push((p, Tok::Sym(c)));
                k += 1;
            } else {
                return Err(Error::parse(p, format!("unexpected character '{c}'")));
            }
        }
        Ok(Lexer {
            toks,
            pos: 0,
            end: src.len(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|(_, t)| t)
    }

    fn position(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.peek().cloned();
        self.pos += 1;
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::parse(self.position(), message))
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.error(format!("expected '{c}'"))
        }
    }

    fn int(&mut self) -> Result<u64> {
        match self.peek() {
            Some(Tok::Int(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(n)
            }
            _ => self.error("expected a number"),
        }
    }

    fn signed_int(&mut self) -> Result<i64> {
        let negative = self.eat('-');
        let n = self.int()? as i64;
        Ok(if negative { -n } else { n })
    }

    fn finish(&self) -> Result<()> {
        if self.pos < self.toks.len() {
            return self.error("unexpected trailing input");
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
enum Atom {
    Number(Rational),
    Coordinate(usize, i64),
    Partial(usize, u32),
    InverseDenominator(u32),
    Differential(usize),
    Group(Sum, u32),
}

type Product = Vec<(usize, Atom)>;
type Sum = Vec<(bool, Product)>;

fn index_suffix(name: &str, prefix: &str) -> Option<usize> {
    let rest = name.strip_prefix(prefix)?;
    let i: usize = rest.parse().ok()?;
    (i >= 1 && !rest.starts_with('0')).then(|| i - 1)
}

fn starts_atom(t: Option<&Tok>) -> bool {
    matches!(t, Some(Tok::Int(_)) | Some(Tok::Ident(_)) | Some(Tok::Sym('(')))
}

fn parse_sum(lx: &mut Lexer) -> Result<Sum> {
    let mut out = Vec::new();
    let mut negative = lx.eat('-');
    loop {
        out.push((negative, parse_product(lx)?));
        if lx.eat('+') {
            negative = false;
        } else if lx.eat('-') {
            negative = true;
        } else {
            return Ok(out);
        }
    }
}

fn parse_product(lx: &mut Lexer) -> Result<Product> {
    let mut atoms = Vec::new();
    loop {
        atoms.push((lx.position(), parse_atom(lx)?));
        if lx.eat('*') {
            continue;
        }
        // a '^' left over after an atom is a wedge between differentials
        if lx.peek() == Some(&Tok::Sym('^')) && matches!(lx.peek_at(1), Some(Tok::Ident(s)) if s.starts_with("dx")) {
            lx.pos += 1;
            continue;
        }
        if !starts_atom(lx.peek()) {
            return Ok(atoms);
        }
    }
}

fn exponent_follows(lx: &Lexer) -> bool {
    lx.peek() == Some(&Tok::Sym('^')) && matches!(lx.peek_at(1), Some(Tok::Int(_)) | Some(Tok::Sym('-')))
}

fn parse_atom(lx: &mut Lexer) -> Result<Atom> {
    let start = lx.position();
    match lx.next() {
        Some(Tok::Int(n)) => {
            let mut value = Rational::from_integer(n.into());
            if lx.eat('/') {
                let d = lx.int()?;
                if d == 0 {
                    return Err(Error::parse(start, "zero denominator"));
                }
                value /= Rational::from_integer(d.into());
            }
            Ok(Atom::Number(value))
        }
        Some(Tok::Sym('(')) => {
            let inner = parse_sum(lx)?;
            lx.expect(')')?;
            let e = if exponent_follows(lx) {
                lx.pos += 1;
                lx.int()? as u32
            } else {
                1
            };
            Ok(Atom::Group(inner, e))
        }
        Some(Tok::Ident(name)) => {
            if let Some(i) = index_suffix(&name, "dx") {
                return Ok(Atom::Differential(i));
            }
            let exponent = |lx: &mut Lexer| -> Result<i64> {
                if exponent_follows(lx) {
                    lx.pos += 1;
                    lx.signed_int()
                } else {
                    Ok(1)
                }
            };
            if let Some(i) = index_suffix(&name, "x") {
                return Ok(Atom::Coordinate(i, exponent(lx)?));
            }
            if let Some(i) = index_suffix(&name, "d") {
                let e = exponent(lx)?;
                if e < 0 {
                    return Err(Error::parse(start, "negative power of a derivative"));
                }
                return Ok(Atom::Partial(i, e as u32));
            }
            if name == "f" {
                let e = exponent(lx)?;
                if e >= 0 {
                    return Err(Error::parse(start, "only negative powers f^-k are allowed"));
                }
                return Ok(Atom::InverseDenominator((-e) as u32));
            }
            Err(Error::parse(start, format!("unknown symbol '{name}'")))
        }
        _ => Err(Error::parse(start, "expected a term")),
    }
}

fn check_index(space: &Space, pos: usize, i: usize) -> Result<()> {
    if i >= space.num_vars() {
        return Err(Error::parse(pos, format!("variable index {} out of range", i + 1)));
    }
    Ok(())
}

fn operator_of_sum(space: &Arc<Space>, sum: &Sum) -> Result<DiffOperator> {
    let mut total = DiffOperator::zero(space);
    for (negative, product) in sum {
        let mut term = DiffOperator::one(space);
        for (pos, atom) in product {
            let factor = match atom {
                Atom::Number(c) => DiffOperator::constant(space, c.clone()),
                Atom::Coordinate(i, e) => {
                    check_index(space, *pos, *i)?;
                    let mut exps = vec![0; space.num_vars()];
                    exps[*i] = *e as i32;
                    DiffOperator::function(AlgebraElement::monomial(space, exps, Rational::one())?)
                }
                Atom::Partial(i, e) => {
                    check_index(space, *pos, *i)?;
                    DiffOperator::partial(space, *i).pow(*e)
                }
                Atom::InverseDenominator(k) => DiffOperator::function(AlgebraElement::denominator_power(space, *k)?),
                Atom::Differential(_) => return Err(Error::parse(*pos, "differential in a non-form expression")),
                Atom::Group(inner, e) => operator_of_sum(space, inner)?.pow(*e),
            };
            term = term.mul(&factor);
        }
        total = if *negative { total.sub(&term) } else { total.add(&term) };
    }
    Ok(total)
}

pub fn parse_operator(space: &Arc<Space>, src: &str) -> Result<DiffOperator> {
    let mut lx = Lexer::new(src)?;
    let sum = parse_sum(&mut lx)?;
    lx.finish()?;
    operator_of_sum(space, &sum)
}

pub fn parse_function(space: &Arc<Space>, src: &str) -> Result<AlgebraElement> {
    parse_operator(space, src)?
        .as_function()
        .ok_or_else(|| Error::parse(0, "expected a function, found derivatives"))
}

pub fn parse_form(space: &Arc<Space>, src: &str) -> Result<DifferentialForm> {
    let mut lx = Lexer::new(src)?;
    let sum = parse_sum(&mut lx)?;
    lx.finish()?;
    let mut total: Option<DifferentialForm> = None;
    for (negative, product) in &sum {
        let mut indices = Vec::new();
        let mut coefficient = Vec::new();
        for (pos, atom) in product {
            match atom {
                Atom::Differential(i) => {
                    check_index(space, *pos, *i)?;
                    indices.push(*i);
                }
                other => coefficient.push((*pos, other.clone())),
            }
        }
        let pos = product.first().map_or(0, |(p, _)| *p);
        let a = operator_of_sum(space, &vec![(*negative, coefficient)])?
            .as_function()
            .ok_or_else(|| Error::parse(pos, "form coefficients must be functions"))?;
        let term = DifferentialForm::term(a, &indices)?;
        total = Some(match total {
            None => term,
            Some(t) if t.degree() == term.degree() => t.add(&term)?,
            Some(_) => return Err(Error::parse(pos, "terms of different degrees")),
        });
    }
    total.ok_or_else(|| Error::parse(0, "empty form"))
}

fn parse_poly(lx: &mut Lexer) -> Result<UniPoly> {
    let sum = parse_sum(lx)?;
    let mut total = UniPoly::zero();
    for (negative, product) in &sum {
        let mut term = UniPoly::one();
        for (pos, atom) in product {
            let factor = match atom {
                Atom::Number(c) => UniPoly::constant(c.clone()),
                Atom::Coordinate(0, e) if *e >= 0 => UniPoly::monomial(Rational::one(), *e as usize),
                _ => return Err(Error::parse(*pos, "expected a polynomial in x1")),
            };
            term = term.mul(&factor);
        }
        total = if *negative { total.sub(&term) } else { total.add(&term) };
    }
    if total.is_zero() {
        return Err(Error::parse(0, "zero denominator"));
    }
    Ok(total)
}

fn parse_spec(lx: &mut Lexer) -> Result<SpaceSpec> {
    let start = lx.position();
    let Some(Tok::Ident(name)) = lx.next() else {
        return Err(Error::parse(start, "expected a space"));
    };
    lx.expect('(')?;
    let spec = match name.as_str() {
        "affine" | "torus" => {
            let r = lx.int()? as usize;
            if name == "affine" {
                SpaceSpec::affine(r)
            } else {
                SpaceSpec::torus(r)
            }
        }
        "localized" => {
            if matches!(lx.peek(), Some(Tok::Ident(s)) if s == "f") && lx.peek_at(1) == Some(&Tok::Sym('=')) {
                lx.pos += 2;
            }
            SpaceSpec::localized(parse_poly(lx)?)?
        }
        "product" => {
            let mut factors = vec![parse_spec(lx)?];
            while lx.eat(',') {
                factors.push(parse_spec(lx)?);
            }
            if factors.len() < 2 {
                return lx.error("a product needs at least two factors");
            }
            SpaceSpec::product(factors)
        }
        other => return Err(Error::parse(start, format!("unknown space '{other}'"))),
    };
    lx.expect(')')?;
    Ok(spec)
}

pub fn parse_space(src: &str) -> Result<SpaceSpec> {
    let mut lx = Lexer::new(src)?;
    let spec = parse_spec(&mut lx)?;
    lx.finish()?;
    Ok(spec)
}
