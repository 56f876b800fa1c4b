//! Elements of the coordinate algebra `A` of a [`Space`].

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::{rat, Rational};
use crate::poly::{push_term, UniPoly};
use crate::space::{CoeffKey, Space};

/// A fraction `p / f^k` in canonical form. `k` is nonzero only on localized
/// spaces, and then `f` does not divide `p`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AlgebraElement {
    space: Arc<Space>,
    terms: BTreeMap<Vec<i32>, Rational>,
    den_power: u32,
}

impl AlgebraElement {
    pub fn zero(space: &Arc<Space>) -> Self {
        AlgebraElement {
            space: space.clone(),
            terms: BTreeMap::new(),
            den_power: 0,
        }
    }

    pub fn constant(space: &Arc<Space>, c: Rational) -> Self {
        let mut e = Self::zero(space);
        if !c.is_zero() {
            e.terms.insert(vec![0; space.num_vars()], c);
        }
        e
    }

    pub fn one(space: &Arc<Space>) -> Self {
        Self::constant(space, Rational::one())
    }

    /// `c * x^exps`; negative exponents only on inverted variables.
    pub fn monomial(space: &Arc<Space>, exps: Vec<i32>, c: Rational) -> Result<Self> {
        if exps.len() != space.num_vars() {
            return Err(Error::SpaceMismatch);
        }
        for (i, e) in exps.iter().enumerate() {
            if *e < 0 && !space.is_laurent(i) {
                return Err(Error::NegativeExponent {
                    var: i + 1,
                    exponent: *e as i64,
                });
            }
        }
        let mut e = Self::zero(space);
        if !c.is_zero() {
            e.terms.insert(exps, c);
        }
        Ok(e)
    }

    /// The coordinate `x_i` (0-based).
    pub fn variable(space: &Arc<Space>, i: usize) -> Self {
        let mut exps = vec![0; space.num_vars()];
        exps[i] = 1;
        Self::monomial(space, exps, Rational::one()).expect("nonnegative exponent")
    }

    /// `f^{-k}` on a localized space.
    pub fn denominator_power(space: &Arc<Space>, k: u32) -> Result<Self> {
        if space.denominator().is_none() {
            return Err(Error::UnsupportedSpace(format!("{space} has no denominator")));
        }
        Ok(Self::from_poly(space, UniPoly::one(), k))
    }

    pub fn from_key(space: &Arc<Space>, key: &CoeffKey, c: Rational) -> Self {
        debug_assert!(space.is_valid_key(key), "invalid key {key:?} for {space}");
        if key.pole == 0 {
            let mut e = Self::zero(space);
            if !c.is_zero() {
                e.terms.insert(key.exps.clone(), c);
            }
            e
        } else {
            Self::from_poly(space, UniPoly::monomial(c, key.exps[0] as usize), key.pole)
        }
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn terms(&self) -> &BTreeMap<Vec<i32>, Rational> {
        &self.terms
    }

    pub fn den_power(&self) -> u32 {
        self.den_power
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.den_power == 0 && self.terms.keys().all(|e| e.iter().all(|x| *x == 0))
    }

    /// Constant coefficient when the element is a constant.
    pub fn as_constant(&self) -> Option<Rational> {
        if !self.is_constant() {
            return None;
        }
        Some(self.terms.values().next().cloned().unwrap_or_else(Rational::zero))
    }

    fn check_space(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.space, &other.space) || self.space == other.space {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }

    fn numerator_poly(&self) -> UniPoly {
        let n = self.terms.keys().map(|e| e[0] as usize).max().map_or(0, |d| d + 1);
        let mut coeffs = vec![Rational::zero(); n];
        for (e, c) in &self.terms {
            coeffs[e[0] as usize] = c.clone();
        }
        UniPoly::from_coeffs(coeffs)
    }

    fn from_poly(space: &Arc<Space>, mut p: UniPoly, mut k: u32) -> Self {
        let f = space.denominator().expect("localized space");
        while k > 0 && !p.is_zero() {
            let (q, r) = p.div_rem(f);
            if !r.is_zero() {
                break;
            }
            p = q;
            k -= 1;
        }
        if p.is_zero() {
            k = 0;
        }
        AlgebraElement {
            space: space.clone(),
            terms: p
                .coeffs()
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, c)| (vec![i as i32], c.clone()))
                .collect(),
            den_power: k,
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_space(other)?;
        Ok(self.add(other))
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.space.denominator().is_some() && (self.den_power > 0 || other.den_power > 0) {
            let f = self.space.denominator().unwrap();
            let k = self.den_power.max(other.den_power);
            let a = self.numerator_poly().mul(&f.pow(k - self.den_power));
            let b = other.numerator_poly().mul(&f.pow(k - other.den_power));
            return Self::from_poly(&self.space, a.add(&b), k);
        }
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            let entry = terms.entry(e.clone()).or_insert_with(Rational::zero);
            *entry += c;
            if entry.is_zero() {
                terms.remove(e);
            }
        }
        AlgebraElement {
            space: self.space.clone(),
            terms,
            den_power: 0,
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(&rat(-1))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(&self.space);
        }
        AlgebraElement {
            space: self.space.clone(),
            terms: self.terms.iter().map(|(e, a)| (e.clone(), a * c)).collect(),
            den_power: self.den_power,
        }
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_space(other)?;
        Ok(self.mul(other))
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero(&self.space);
        }
        if self.space.denominator().is_some() {
            let p = self.numerator_poly().mul(&other.numerator_poly());
            return Self::from_poly(&self.space, p, self.den_power + other.den_power);
        }
        let mut terms: BTreeMap<Vec<i32>, Rational> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<i32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                *terms.entry(e).or_insert_with(Rational::zero) += c1 * c2;
            }
        }
        terms.retain(|_, c| !c.is_zero());
        AlgebraElement {
            space: self.space.clone(),
            terms,
            den_power: 0,
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::one(&self.space), |acc, _| acc.mul(self))
    }

    /// `∂g/∂x_i`, with the quotient rule on localized spaces.
    pub fn partial(&self, i: usize) -> Self {
        if let Some(f) = self.space.denominator() {
            let p = self.numerator_poly();
            let k = self.den_power;
            // (p' f - k p f') / f^{k+1}
            let num = p
                .derivative()
                .mul(f)
                .sub(&p.mul(&f.derivative()).scale(&rat(k as i64)));
            return Self::from_poly(&self.space, num, k + 1);
        }
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut d = e.clone();
            d[i] -= 1;
            terms.insert(d, c * rat(e[i] as i64));
        }
        AlgebraElement {
            space: self.space.clone(),
            terms,
            den_power: 0,
        }
    }

    /// Coordinates in the basis of [`CoeffKey`]s.
    pub fn expansion(&self) -> Vec<(CoeffKey, Rational)> {
        if self.den_power == 0 {
            return self
                .terms
                .iter()
                .map(|(e, c)| (CoeffKey::monomial(e.clone()), c.clone()))
                .collect();
        }
        let f = self.space.denominator().expect("localized space");
        let mut out = Vec::new();
        let mut rest = self.numerator_poly();
        // f-adic digits: p = c_0 + c_1 f + ... ; c_i / f^{k-i}
        for i in 0..self.den_power {
            let (q, r) = rest.div_rem(f);
            for (j, c) in r.coeffs().iter().enumerate() {
                if !c.is_zero() {
                    out.push((
                        CoeffKey {
                            exps: vec![j as i32],
                            pole: self.den_power - i,
                        },
                        c.clone(),
                    ));
                }
            }
            rest = q;
        }
        for (j, c) in rest.coeffs().iter().enumerate() {
            if !c.is_zero() {
                out.push((CoeffKey::monomial(vec![j as i32]), c.clone()));
            }
        }
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    pub fn from_expansion(space: &Arc<Space>, entries: &[(CoeffKey, Rational)]) -> Self {
        entries.iter().fold(Self::zero(space), |acc, (k, c)| {
            acc.add(&Self::from_key(space, k, c.clone()))
        })
    }

    /// Largest basis-key weight in the support.
    pub fn weight(&self) -> u32 {
        self.expansion()
            .iter()
            .map(|(k, _)| self.space.key_weight(k))
            .max()
            .unwrap_or(0)
    }
}

pub(crate) fn monomial_string(exps: &[i32]) -> String {
    exps.iter()
        .enumerate()
        .filter(|(_, e)| **e != 0)
        .map(|(i, e)| {
            if *e == 1 {
                format!("x{}", i + 1)
            } else {
                format!("x{}^{}", i + 1, e)
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut out = String::new();
        for (e, c) in self.terms.iter().rev() {
            let mut mono = monomial_string(e);
            if self.den_power > 0 {
                if !mono.is_empty() {
                    mono.push(' ');
                }
                mono.push_str(&format!("f^-{}", self.den_power));
            }
            push_term(&mut out, c, &mono);
        }
        f.write_str(&out)
    }
}
