//! Noncommutative one-forms `Ω¹ = ker(D ⊗ D → D)` with the universal
//! derivation `d(u) = 1 ⊗ u - u ⊗ 1`.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::Zero;

use crate::diffop::{pbw_basis, DiffOperator, Filtration, PbwMonomial};
use crate::error::{Error, Result};
use crate::hochschild::Derivation;
use crate::linalg::{rat, Rational};
use crate::space::Space;

/// An element of `Ω¹ ⊂ D ⊗ D`, as a combination of PBW tensors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NcOneForm {
    space: Arc<Space>,
    terms: BTreeMap<(PbwMonomial, PbwMonomial), Rational>,
}

impl NcOneForm {
    pub fn zero(space: &Arc<Space>) -> Self {
        NcOneForm {
            space: space.clone(),
            terms: BTreeMap::new(),
        }
    }

    /// `Σ c · u ⊗ v`, rejected unless `Σ c · uv = 0`.
    pub fn from_tensors(space: &Arc<Space>, tensors: &[(DiffOperator, DiffOperator, Rational)]) -> Result<Self> {
        let mut out = Self::zero(space);
        for (u, v, c) in tensors {
            if u.space() != space || v.space() != space {
                return Err(Error::SpaceMismatch);
            }
            out.add_tensor(u, v, c);
        }
        if !out.multiply_out().is_zero() {
            return Err(Error::Containment);
        }
        Ok(out)
    }

    /// `u · dv = u ⊗ v - uv ⊗ 1`.
    pub fn u_dv(u: &DiffOperator, v: &DiffOperator) -> Self {
        let space = u.space().clone();
        let mut out = Self::zero(&space);
        out.add_tensor(u, v, &rat(1));
        out.add_tensor(&u.mul(v), &DiffOperator::one(&space), &rat(-1));
        out
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn terms(&self) -> &BTreeMap<(PbwMonomial, PbwMonomial), Rational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, key: (PbwMonomial, PbwMonomial), c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(key) {
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

    fn add_tensor(&mut self, u: &DiffOperator, v: &DiffOperator, c: &Rational) {
        let vs = v.monomials();
        for (mu, cu) in u.monomials() {
            for (mv, cv) in &vs {
                self.add_term((mu.clone(), mv.clone()), c * &cu * cv);
            }
        }
    }

    fn pairs(&self) -> impl Iterator<Item = (DiffOperator, DiffOperator, &Rational)> + '_ {
        self.terms
            .iter()
            .map(|((u, v), c)| (u.to_operator(&self.space), v.to_operator(&self.space), c))
    }

    /// `Σ c · uv`; zero for every one-form.
    pub fn multiply_out(&self) -> DiffOperator {
        self.pairs()
            .fold(DiffOperator::zero(&self.space), |acc, (u, v, c)| acc.add(&u.mul(&v).scale(c)))
    }

    pub fn add(&self, other: &NcOneForm) -> Result<NcOneForm> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch);
        }
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> NcOneForm {
        let mut out = Self::zero(&self.space);
        for (k, v) in &self.terms {
            out.add_term(k.clone(), v * c);
        }
        out
    }

    /// `a · ω`.
    pub fn left_mul(&self, a: &DiffOperator) -> NcOneForm {
        let mut out = Self::zero(&self.space);
        for (u, v, c) in self.pairs() {
            out.add_tensor(&a.mul(&u), &v, c);
        }
        out
    }

    /// `ω · a`.
    pub fn right_mul(&self, a: &DiffOperator) -> NcOneForm {
        let mut out = Self::zero(&self.space);
        for (u, v, c) in self.pairs() {
            out.add_tensor(&u, &v.mul(a), c);
        }
        out
    }

    /// The bimodule map `Ω¹ → D` attached to `d`: `u ⊗ v ↦ u d(v)`.
    pub fn contract(&self, d: &Derivation) -> DiffOperator {
        self.pairs()
            .fold(DiffOperator::zero(&self.space), |acc, (u, v, c)| acc.add(&u.mul(&d.apply(&v)).scale(c)))
    }
}

/// `d(u) = 1 ⊗ u - u ⊗ 1`.
pub fn universal_derivation(u: &DiffOperator) -> NcOneForm {
    NcOneForm::u_dv(&DiffOperator::one(u.space()), u)
}

/// Whether `ω ↦ contract(ω, d)` recovers `d` through the universal
/// derivation: `φ(d(a) · b) = d(a) · b` for PBW monomials `a, b` within
/// `bound`.
pub fn corepresent_derivation(d: &Derivation, bound: Filtration) -> bool {
    let space = d.space();
    let sample: Vec<DiffOperator> = pbw_basis(space, bound).iter().map(|m| m.to_operator(space)).collect();
    sample.iter().all(|a| {
        let da = universal_derivation(a);
        let image = d.apply(a);
        sample
            .iter()
            .all(|b| da.right_mul(b).contract(d) == image.mul(b))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn universal_derivation_is_a_form_and_satisfies_leibniz() {
        let s = Arc::new(Space::affine(1));
        let x = DiffOperator::coordinate(&s, 0);
        let p = DiffOperator::partial(&s, 0);
        let dx = universal_derivation(&x);
        assert!(dx.multiply_out().is_zero());
        let lhs = universal_derivation(&x.mul(&p));
        let rhs = dx.right_mul(&p).add(&universal_derivation(&p).left_mul(&x)).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn non_forms_are_rejected() {
        let s = Arc::new(Space::affine(1));
        let x = DiffOperator::coordinate(&s, 0);
        let one = DiffOperator::one(&s);
        assert!(matches!(
            NcOneForm::from_tensors(&s, &[(x, one, rat(1))]),
            Err(Error::Containment)
        ));
    }

    #[test]
    fn corepresentation() {
        let s = Arc::new(Space::affine(1));
        let u = DiffOperator::coordinate(&s, 0).mul(&DiffOperator::partial(&s, 0));
        assert!(corepresent_derivation(&Derivation::inner(&u), Filtration::square(2)));
        // x ↦ x, ∂ ↦ 0 violates [∂, x] = 1
        let broken = Derivation::unchecked(
            &s,
            vec![DiffOperator::coordinate(&s, 0)],
            vec![DiffOperator::zero(&s)],
            None,
        )
        .unwrap();
        assert!(!corepresent_derivation(&broken, Filtration::square(2)));
    }
}
