//! The ring `D(A)` of differential operators in PBW normal form
//! `Σ a_β(x) ∂^β`, coefficients on the left.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::algebra::{monomial_string, AlgebraElement};
use crate::error::{Error, Result};
use crate::linalg::{rat, Rational};
use crate::poly::push_term;
use crate::space::{CoeffKey, Space};

/// Truncation bound: total `∂`-order and coefficient weight.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Filtration {
    pub op_order: u32,
    pub coeff_degree: u32,
}

impl Filtration {
    pub const fn new(op_order: u32, coeff_degree: u32) -> Self {
        Filtration {
            op_order,
            coeff_degree,
        }
    }

    pub const fn square(n: u32) -> Self {
        Self::new(n, n)
    }

    pub fn contains(&self, other: &Filtration) -> bool {
        other.op_order <= self.op_order && other.coeff_degree <= self.coeff_degree
    }

    pub fn grow(&self, by: u32) -> Self {
        Self::new(self.op_order + by, self.coeff_degree + by)
    }

    pub fn join(&self, other: &Filtration) -> Self {
        Self::new(
            self.op_order.max(other.op_order),
            self.coeff_degree.max(other.coeff_degree),
        )
    }
}

/// Basis element `key · ∂^dexp` of `D(A)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PbwMonomial {
    pub coeff: CoeffKey,
    pub dexp: Vec<u32>,
}

impl PbwMonomial {
    pub fn one(r: usize) -> Self {
        PbwMonomial {
            coeff: CoeffKey::one(r),
            dexp: vec![0; r],
        }
    }

    pub fn op_order(&self) -> u32 {
        self.dexp.iter().sum()
    }

    pub fn filtration(&self, space: &Space) -> Filtration {
        Filtration::new(self.op_order(), space.key_weight(&self.coeff))
    }

    pub fn to_operator(&self, space: &Arc<Space>) -> DiffOperator {
        DiffOperator::term(
            AlgebraElement::from_key(space, &self.coeff, Rational::one()),
            self.dexp.clone(),
        )
    }
}

/// All PBW monomials inside `bound`, in a fixed order.
pub fn pbw_basis(space: &Space, bound: Filtration) -> Vec<PbwMonomial> {
    let keys = space.keys_within(bound.coeff_degree);
    let dexps = derivative_exponents(space.num_vars(), bound.op_order);
    let mut out = Vec::with_capacity(keys.len() * dexps.len());
    for d in &dexps {
        for k in &keys {
            out.push(PbwMonomial {
                coeff: k.clone(),
                dexp: d.clone(),
            });
        }
    }
    out
}

pub(crate) fn derivative_exponents(r: usize, max: u32) -> Vec<Vec<u32>> {
    fn go(i: usize, r: usize, budget: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == r {
            out.push(cur.clone());
            return;
        }
        for e in 0..=budget {
            cur[i] = e;
            go(i + 1, r, budget - e, cur, out);
        }
        cur[i] = 0;
    }
    let mut out = Vec::new();
    go(0, r, max, &mut vec![0; r], &mut out);
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DiffOperator {
    space: Arc<Space>,
    terms: BTreeMap<Vec<u32>, AlgebraElement>,
}

fn binomial(n: u32, k: u32) -> Rational {
    let mut acc = Rational::one();
    for i in 0..k {
        acc = acc * rat((n - i) as i64) / rat((i + 1) as i64);
    }
    acc
}

impl DiffOperator {
    pub fn zero(space: &Arc<Space>) -> Self {
        DiffOperator {
            space: space.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(space: &Arc<Space>) -> Self {
        Self::function(AlgebraElement::one(space))
    }

    pub fn constant(space: &Arc<Space>, c: Rational) -> Self {
        Self::function(AlgebraElement::constant(space, c))
    }

    pub fn function(a: AlgebraElement) -> Self {
        let r = a.space().num_vars();
        Self::term(a, vec![0; r])
    }

    /// `a · ∂^dexp`.
    pub fn term(a: AlgebraElement, dexp: Vec<u32>) -> Self {
        let mut op = Self::zero(a.space());
        if !a.is_zero() {
            op.terms.insert(dexp, a);
        }
        op
    }

    /// The coordinate `x_i` (0-based).
    pub fn coordinate(space: &Arc<Space>, i: usize) -> Self {
        Self::function(AlgebraElement::variable(space, i))
    }

    /// The coordinate derivation `∂_i` (0-based).
    pub fn partial(space: &Arc<Space>, i: usize) -> Self {
        let mut d = vec![0; space.num_vars()];
        d[i] = 1;
        Self::term(AlgebraElement::one(space), d)
    }

    pub fn from_monomials<'a>(
        space: &Arc<Space>,
        entries: impl IntoIterator<Item = (&'a PbwMonomial, &'a Rational)>,
    ) -> Self {
        let mut by_dexp: BTreeMap<Vec<u32>, Vec<(CoeffKey, Rational)>> = BTreeMap::new();
        for (m, c) in entries {
            by_dexp
                .entry(m.dexp.clone())
                .or_default()
                .push((m.coeff.clone(), c.clone()));
        }
        let mut op = Self::zero(space);
        for (d, coeffs) in by_dexp {
            let a = AlgebraElement::from_expansion(space, &coeffs);
            if !a.is_zero() {
                op.terms.insert(d, a);
            }
        }
        op
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, AlgebraElement> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The coefficient of `∂^0` when the operator is a function.
    pub fn as_function(&self) -> Option<AlgebraElement> {
        let r = self.space.num_vars();
        match self.terms.len() {
            0 => Some(AlgebraElement::zero(&self.space)),
            1 => self.terms.get(&vec![0; r]).cloned(),
            _ => None,
        }
    }

    /// Coordinates in the PBW basis, sorted.
    pub fn monomials(&self) -> Vec<(PbwMonomial, Rational)> {
        let mut out = Vec::new();
        for (d, a) in &self.terms {
            for (k, c) in a.expansion() {
                out.push((
                    PbwMonomial {
                        coeff: k,
                        dexp: d.clone(),
                    },
                    c,
                ));
            }
        }
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    pub fn filtration(&self) -> Filtration {
        self.monomials()
            .iter()
            .fold(Filtration::default(), |acc, (m, _)| acc.join(&m.filtration(&self.space)))
    }

    fn check_space(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.space, &other.space) || self.space == other.space {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }

    fn insert_add(&mut self, d: Vec<u32>, a: AlgebraElement) {
        if a.is_zero() {
            return;
        }
        match self.terms.remove(&d) {
            Some(old) => {
                let s = old.add(&a);
                if !s.is_zero() {
                    self.terms.insert(d, s);
                }
            }
            None => {
                self.terms.insert(d, a);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (d, a) in &other.terms {
            out.insert_add(d.clone(), a.clone());
        }
        out
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_space(other)?;
        Ok(self.add(other))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(&self.space);
        }
        DiffOperator {
            space: self.space.clone(),
            terms: self.terms.iter().map(|(d, a)| (d.clone(), a.scale(c))).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(&rat(-1))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Left multiplication by a function.
    pub fn left_mul_function(&self, g: &AlgebraElement) -> Self {
        let mut out = Self::zero(&self.space);
        for (d, a) in &self.terms {
            out.insert_add(d.clone(), g.mul(a));
        }
        out
    }

    /// Normal-ordered product, via `∂^β b = Σ_μ C(β,μ) ∂^μ(b) ∂^{β-μ}`.
    pub fn mul(&self, other: &Self) -> Self {
        let r = self.space.num_vars();
        let mut out = Self::zero(&self.space);
        let mut derivative_cache: BTreeMap<(usize, Vec<u32>), AlgebraElement> = BTreeMap::new();
        for (beta, a) in &self.terms {
            for mu in derivative_exponents_below(beta) {
                let mut coef = Rational::one();
                for i in 0..r {
                    coef *= binomial(beta[i], mu[i]);
                }
                for (bi, (gamma, b)) in other.terms.iter().enumerate() {
                    let db = derivative_cache
                        .entry((bi, mu.clone()))
                        .or_insert_with(|| {
                            let mut x = b.clone();
                            for (i, m) in mu.iter().enumerate() {
                                for _ in 0..*m {
                                    x = x.partial(i);
                                }
                            }
                            x
                        })
                        .clone();
                    if db.is_zero() {
                        continue;
                    }
                    let d: Vec<u32> = (0..r).map(|i| beta[i] - mu[i] + gamma[i]).collect();
                    out.insert_add(d, a.mul(&db).scale(&coef));
                }
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::one(&self.space), |acc, _| acc.mul(self))
    }

    /// `ad(x_i)(u) = [x_i, u]`, computed termwise as `-β_i a ∂^{β-e_i}`.
    pub fn ad_coordinate(&self, i: usize) -> Self {
        let mut out = Self::zero(&self.space);
        for (d, a) in &self.terms {
            if d[i] == 0 {
                continue;
            }
            let mut e = d.clone();
            e[i] -= 1;
            out.insert_add(e, a.scale(&rat(-(d[i] as i64))));
        }
        out
    }

    /// `ad(∂_i)(u) = [∂_i, u]`, computed termwise as `∂_i(a) ∂^β`.
    pub fn ad_partial(&self, i: usize) -> Self {
        let mut out = Self::zero(&self.space);
        for (d, a) in &self.terms {
            out.insert_add(d.clone(), a.partial(i));
        }
        out
    }
}

fn derivative_exponents_below(beta: &[u32]) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for b in beta {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..=*b).map(move |m| {
                    let mut p = prefix.clone();
                    p.push(m);
                    p
                })
            })
            .collect();
    }
    out
}

/// Product `uv` in normal form.
pub fn multiply(u: &DiffOperator, v: &DiffOperator) -> Result<DiffOperator> {
    u.check_space(v)?;
    Ok(u.mul(v))
}

/// `[u, v] = uv - vu`.
pub fn commutator(u: &DiffOperator, v: &DiffOperator) -> Result<DiffOperator> {
    u.check_space(v)?;
    Ok(u.mul(v).sub(&v.mul(u)))
}

pub(crate) fn dexp_string(d: &[u32]) -> String {
    d.iter()
        .enumerate()
        .filter(|(_, e)| **e != 0)
        .map(|(i, e)| {
            if *e == 1 {
                format!("d{}", i + 1)
            } else {
                format!("d{}^{}", i + 1, e)
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

impl fmt::Display for DiffOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut out = String::new();
        for (d, a) in &self.terms {
            let dpart = dexp_string(d);
            for (e, c) in a.terms().iter().rev() {
                let mut parts = Vec::new();
                let m = monomial_string(e);
                if !m.is_empty() {
                    parts.push(m);
                }
                if a.den_power() > 0 {
                    parts.push(format!("f^-{}", a.den_power()));
                }
                if !dpart.is_empty() {
                    parts.push(dpart.clone());
                }
                push_term(&mut out, c, &parts.join(" "));
            }
        }
        f.write_str(&out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a1() -> Arc<Space> {
        Arc::new(Space::affine(1))
    }

    #[test]
    fn defining_relation() {
        let s = a1();
        let d = DiffOperator::partial(&s, 0);
        let x = DiffOperator::coordinate(&s, 0);
        assert_eq!(d.mul(&x), x.mul(&d).add(&DiffOperator::one(&s)));
        assert_eq!(commutator(&d, &x).unwrap(), DiffOperator::one(&s));
    }

    #[test]
    fn euler_square() {
        let s = a1();
        let d = DiffOperator::partial(&s, 0);
        let x = DiffOperator::coordinate(&s, 0);
        let xd = x.mul(&d);
        let expected = x.mul(&x).mul(&d).mul(&d).add(&xd);
        assert_eq!(xd.mul(&xd), expected);
    }

    #[test]
    fn inverse_coordinate_on_torus() {
        let s = Arc::new(Space::torus(1));
        let d = DiffOperator::partial(&s, 0);
        let inv = DiffOperator::function(AlgebraElement::monomial(&s, vec![-1], rat(1)).unwrap());
        let inv2 = DiffOperator::function(AlgebraElement::monomial(&s, vec![-2], rat(1)).unwrap());
        assert_eq!(d.mul(&inv), inv.mul(&d).sub(&inv2));
    }

    #[test]
    fn commutator_examples() {
        let s = a1();
        let d = DiffOperator::partial(&s, 0);
        let x = DiffOperator::coordinate(&s, 0);
        assert_eq!(commutator(&x, &d.mul(&d)).unwrap(), d.scale(&rat(-2)));
        assert!(commutator(&d, &d).unwrap().is_zero());
    }

    #[test]
    fn fast_ad_matches_commutator() {
        let s = Arc::new(Space::localized(crate::poly::UniPoly::from_i64(&[1, 0, 1])).unwrap());
        let finv = AlgebraElement::denominator_power(&s, 2).unwrap();
        let u = DiffOperator::term(finv, vec![3]).add(&DiffOperator::coordinate(&s, 0));
        let x = DiffOperator::coordinate(&s, 0);
        let d = DiffOperator::partial(&s, 0);
        assert_eq!(u.ad_coordinate(0), commutator(&x, &u).unwrap());
        assert_eq!(u.ad_partial(0), commutator(&d, &u).unwrap());
    }

    #[test]
    fn filtration_and_monomials() {
        let s = Arc::new(Space::torus(2));
        let u = DiffOperator::term(
            AlgebraElement::monomial(&s, vec![-2, 1], rat(3)).unwrap(),
            vec![1, 2],
        );
        assert_eq!(u.filtration(), Filtration::new(3, 3));
        let back = DiffOperator::from_monomials(&s, u.monomials().iter().map(|(m, c)| (m, c)));
        assert_eq!(back, u);
    }

    #[test]
    fn display_operator() {
        let s = a1();
        let x = DiffOperator::coordinate(&s, 0);
        let d = DiffOperator::partial(&s, 0);
        assert_eq!(x.mul(&d).add(&DiffOperator::one(&s)).to_string(), "1 + x1 d1");
    }

    #[test]
    fn basis_size() {
        let s = Space::affine(2);
        assert_eq!(pbw_basis(&s, Filtration::square(2)).len(), 36);
    }
}
