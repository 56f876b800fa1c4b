//! A finite graded algebra of named cohomology classes with a cup product
//! and a BV operator, and the bracket it induces.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::{rat, Rational};

/// A formal combination of class labels.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClassExpr(BTreeMap<String, Rational>);

impl ClassExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn label(name: &str) -> Self {
        Self::term(name, Rational::one())
    }

    pub fn term(name: &str, c: Rational) -> Self {
        let mut out = Self::zero();
        out.add_term(name, c);
        out
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coefficient(&self, name: &str) -> Rational {
        self.0.get(name).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&str, &Rational)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v))
    }

    fn add_term(&mut self, name: &str, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.0.entry(name.to_string()) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    pub fn add(&self, other: &ClassExpr) -> ClassExpr {
        let mut out = self.clone();
        for (k, v) in &other.0 {
            out.add_term(k, v.clone());
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> ClassExpr {
        let mut out = Self::zero();
        for (k, v) in &self.0 {
            out.add_term(k, v * c);
        }
        out
    }

    pub fn sub(&self, other: &ClassExpr) -> ClassExpr {
        self.add(&other.scale(&rat(-1)))
    }
}

impl fmt::Display for ClassExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(k, c)| if c.is_one() { k.clone() } else { format!("{c}*{k}") })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

/// Classes with degrees, a cup table and a BV operator. Missing cup or
/// `Δ` entries between declared classes are zero.
#[derive(Clone, Debug, Default)]
pub struct ClassAlgebra {
    degrees: BTreeMap<String, usize>,
    cup: HashMap<(String, String), ClassExpr>,
    delta: HashMap<String, ClassExpr>,
}

impl ClassAlgebra {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_class(mut self, name: &str, degree: usize) -> Self {
        self.degrees.insert(name.to_string(), degree);
        self
    }

    pub fn with_cup(mut self, a: &str, b: &str, value: ClassExpr) -> Self {
        self.cup.insert((a.to_string(), b.to_string()), value);
        self
    }

    pub fn with_delta(mut self, a: &str, value: ClassExpr) -> Self {
        self.delta.insert(a.to_string(), value);
        self
    }

    pub fn degree(&self, name: &str) -> Result<usize> {
        self.degrees
            .get(name)
            .copied()
            .ok_or_else(|| Error::UndefinedClass(name.to_string()))
    }

    fn check(&self, e: &ClassExpr) -> Result<()> {
        e.terms().try_for_each(|(k, _)| self.degree(k).map(drop))
    }

    pub fn cup(&self, a: &ClassExpr, b: &ClassExpr) -> Result<ClassExpr> {
        self.check(a)?;
        self.check(b)?;
        let mut out = ClassExpr::zero();
        for (ka, ca) in a.terms() {
            for (kb, cb) in b.terms() {
                if let Some(v) = self.cup.get(&(ka.to_string(), kb.to_string())) {
                    out = out.add(&v.scale(&(ca * cb)));
                }
            }
        }
        Ok(out)
    }

    pub fn delta(&self, a: &ClassExpr) -> Result<ClassExpr> {
        self.check(a)?;
        let mut out = ClassExpr::zero();
        for (k, c) in a.terms() {
            if let Some(v) = self.delta.get(k) {
                out = out.add(&v.scale(c));
            }
        }
        Ok(out)
    }
}

/// `[a, b] = Δ(a ⌣ b) - Δ(a) ⌣ b - (-1)^{|a|} a ⌣ Δ(b)`.
pub fn bracket_from_bv(algebra: &ClassAlgebra, a: &str, b: &str) -> Result<ClassExpr> {
    let sign = if algebra.degree(a)? % 2 == 0 { rat(1) } else { rat(-1) };
    algebra.degree(b)?;
    let (ea, eb) = (ClassExpr::label(a), ClassExpr::label(b));
    let first = algebra.delta(&algebra.cup(&ea, &eb)?)?;
    let second = algebra.cup(&algebra.delta(&ea)?, &eb)?;
    let third = algebra.cup(&ea, &algebra.delta(&eb)?)?.scale(&sign);
    Ok(first.sub(&second).sub(&third))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `K[x] ⊗ Λ(t)` truncated to `{1, x, t, xt}` with `Δ = ∂_x ∂_t`.
    fn toy() -> ClassAlgebra {
        ClassAlgebra::new()
            .with_class("1", 0)
            .with_class("x", 0)
            .with_class("t", 1)
            .with_class("xt", 1)
            .with_cup("1", "1", ClassExpr::label("1"))
            .with_cup("1", "x", ClassExpr::label("x"))
            .with_cup("x", "1", ClassExpr::label("x"))
            .with_cup("1", "t", ClassExpr::label("t"))
            .with_cup("t", "1", ClassExpr::label("t"))
            .with_cup("x", "t", ClassExpr::label("xt"))
            .with_cup("t", "x", ClassExpr::label("xt"))
            .with_delta("xt", ClassExpr::label("1"))
    }

    #[test]
    fn bracket_values() {
        let alg = toy();
        assert_eq!(bracket_from_bv(&alg, "x", "t").unwrap(), ClassExpr::label("1"));
        assert_eq!(bracket_from_bv(&alg, "t", "x").unwrap(), ClassExpr::label("1"));
        assert!(bracket_from_bv(&alg, "1", "t").unwrap().is_zero());
        // Δ(xt) ⌣ 1 is subtracted from Δ(xt ⌣ 1) = 0
        assert_eq!(bracket_from_bv(&alg, "xt", "1").unwrap(), ClassExpr::term("1", rat(-1)));
    }

    #[test]
    fn undefined_labels() {
        assert!(matches!(
            bracket_from_bv(&toy(), "x", "y"),
            Err(Error::UndefinedClass(l)) if l == "y"
        ));
    }
}
