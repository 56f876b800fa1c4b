//! Hochschild chains `D ⊗ D^{⊗n}`, stored as `(a_0, a_1, …, a_n)` with
//! `a_0` the coefficient slot, expanded multilinearly in the PBW basis.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::diffop::{DiffOperator, PbwMonomial};
use crate::error::{Error, Result};
use crate::linalg::{rat, Rational};
use crate::space::Space;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chain {
    space: Arc<Space>,
    degree: usize,
    terms: BTreeMap<Vec<PbwMonomial>, Rational>,
}

impl Chain {
    pub fn zero(space: &Arc<Space>, degree: usize) -> Self {
        Chain {
            space: space.clone(),
            degree,
            terms: BTreeMap::new(),
        }
    }

    /// `c · a_0 ⊗ a_1 ⊗ … ⊗ a_n`.
    pub fn tensor(factors: &[DiffOperator], c: Rational) -> Result<Self> {
        let Some(first) = factors.first() else {
            return Err(Error::InvalidDegree(0));
        };
        let space = first.space().clone();
        if factors.iter().any(|f| f.space() != &space) {
            return Err(Error::SpaceMismatch);
        }
        let mut out = Self::zero(&space, factors.len() - 1);
        let mut partial: Vec<(Vec<PbwMonomial>, Rational)> = vec![(Vec::new(), c)];
        for f in factors {
            let ms = f.monomials();
            partial = partial
                .into_iter()
                .flat_map(|(t, c)| {
                    ms.iter().map(move |(m, d)| {
                        let mut t = t.clone();
                        t.push(m.clone());
                        (t, &c * d)
                    })
                })
                .collect();
        }
        for (t, c) in partial {
            out.add_term(t, c);
        }
        Ok(out)
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> &BTreeMap<Vec<PbwMonomial>, Rational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, t: Vec<PbwMonomial>, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(t) {
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

    fn add_tensor(&mut self, factors: &[DiffOperator], c: &Rational) {
        if let Ok(t) = Chain::tensor(factors, c.clone()) {
            for (k, v) in t.terms {
                self.add_term(k, v);
            }
        }
    }

    pub fn add(&self, other: &Chain) -> Result<Chain> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch);
        }
        if self.degree != other.degree {
            return Err(Error::InvalidDegree(other.degree));
        }
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.add_term(k.clone(), v.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> Chain {
        let mut out = Chain::zero(&self.space, self.degree);
        for (k, v) in &self.terms {
            out.add_term(k.clone(), v * c);
        }
        out
    }

    pub fn sub(&self, other: &Chain) -> Result<Chain> {
        self.add(&other.scale(&rat(-1)))
    }

    fn operators(&self, t: &[PbwMonomial]) -> Vec<DiffOperator> {
        t.iter().map(|m| m.to_operator(&self.space)).collect()
    }
}

impl fmt::Display for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(t, c)| {
                let factors: Vec<String> = self
                    .operators(t)
                    .iter()
                    .map(|o| format!("({o})"))
                    .collect();
                format!("{c}*{}", factors.join("⊗"))
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

/// Hochschild boundary
/// `b(a_0,…,a_n) = Σ_{i<n} (-1)^i (…, a_i a_{i+1}, …) + (-1)^n (a_n a_0, a_1, …, a_{n-1})`.
///
/// Degree-0 chains map to the zero chain.
pub fn delta_chain(c: &Chain) -> Chain {
    let n = c.degree;
    if n == 0 {
        return Chain::zero(&c.space, 0);
    }
    let mut out = Chain::zero(&c.space, n - 1);
    for (t, coeff) in &c.terms {
        let a = c.operators(t);
        for i in 0..n {
            let mut merged = Vec::with_capacity(n);
            merged.extend_from_slice(&a[..i]);
            merged.push(a[i].mul(&a[i + 1]));
            merged.extend_from_slice(&a[i + 2..]);
            out.add_tensor(&merged, &(coeff * sign(i)));
        }
        let mut wrapped = Vec::with_capacity(n);
        wrapped.push(a[n].mul(&a[0]));
        wrapped.extend_from_slice(&a[1..n]);
        out.add_tensor(&wrapped, &(coeff * sign(n)));
    }
    out
}

fn sign(i: usize) -> Rational {
    if i % 2 == 0 {
        Rational::one()
    } else {
        rat(-1)
    }
}

/// `t(a_0,…,a_n) = (-1)^n (a_n, a_0, …, a_{n-1})`.
pub fn cyclic_operator(c: &Chain) -> Chain {
    let n = c.degree;
    let mut out = Chain::zero(&c.space, n);
    for (t, coeff) in &c.terms {
        let mut rotated = Vec::with_capacity(n + 1);
        rotated.push(t[n].clone());
        rotated.extend_from_slice(&t[..n]);
        out.add_term(rotated, coeff * sign(n));
    }
    out
}

/// `N = 1 + t + … + t^n` on degree-`n` chains.
pub fn norm_operator(c: &Chain) -> Chain {
    let mut out = c.clone();
    let mut power = c.clone();
    for _ in 0..c.degree {
        power = cyclic_operator(&power);
        out = out.add(&power).expect("same degree");
    }
    out
}

/// The extra degeneracy `s(a_0,…,a_n) = (1, a_0, …, a_n)`.
pub fn prepend_unit(c: &Chain) -> Chain {
    let r = c.space.num_vars();
    let mut out = Chain::zero(&c.space, c.degree + 1);
    for (t, coeff) in &c.terms {
        let mut longer = Vec::with_capacity(t.len() + 1);
        longer.push(PbwMonomial::one(r));
        longer.extend_from_slice(t);
        out.add_term(longer, coeff.clone());
    }
    out
}

/// Connes' operator `B = (1 - t) s N`, raising degree by one.
pub fn connes_b(c: &Chain) -> Chain {
    let s = prepend_unit(&norm_operator(c));
    s.sub(&cyclic_operator(&s)).expect("same degree")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ops() -> (Arc<Space>, DiffOperator, DiffOperator) {
        let s = Arc::new(Space::affine(1));
        let x = DiffOperator::coordinate(&s, 0);
        let d = DiffOperator::partial(&s, 0);
        (s, x, d)
    }

    #[test]
    fn boundary_in_degree_one() {
        let (_, x, d) = ops();
        // stored as (m, a): b = m a - a m
        let c = Chain::tensor(&[d.clone(), x.clone()], rat(1)).unwrap();
        let expected = Chain::tensor(&[d.mul(&x).sub(&x.mul(&d))], rat(1)).unwrap();
        assert_eq!(delta_chain(&c), expected);
    }

    #[test]
    fn cyclic_examples() {
        let (_, x, d) = ops();
        let ab = Chain::tensor(&[x.clone(), d.clone()], rat(1)).unwrap();
        let ba = Chain::tensor(&[d.clone(), x.clone()], rat(-1)).unwrap();
        assert_eq!(cyclic_operator(&ab), ba);
        assert_eq!(cyclic_operator(&cyclic_operator(&ab)), ab);
        let a = Chain::tensor(&[x.clone()], rat(1)).unwrap();
        assert_eq!(cyclic_operator(&a), a);
    }

    #[test]
    fn connes_in_degree_zero() {
        let (s, x, _) = ops();
        let one = DiffOperator::one(&s);
        let a = Chain::tensor(&[x.clone()], rat(1)).unwrap();
        let expected = Chain::tensor(&[one.clone(), x.clone()], rat(1))
            .unwrap()
            .add(&Chain::tensor(&[x, one], rat(1)).unwrap())
            .unwrap();
        assert_eq!(connes_b(&a), expected);
        assert!(connes_b(&connes_b(&a)).is_zero());
        assert!(connes_b(&Chain::zero(&s, 0)).is_zero());
    }
}
