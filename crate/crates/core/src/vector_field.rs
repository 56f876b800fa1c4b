//! Vector fields `Σ v_i ∂_i` on a coordinate chart.

use std::fmt;
use std::sync::Arc;

use crate::algebra::AlgebraElement;
use crate::error::{Error, Result};
use crate::space::Space;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DerivationVector {
    space: Arc<Space>,
    components: Vec<AlgebraElement>,
}

impl DerivationVector {
    pub fn new(space: &Arc<Space>, components: Vec<AlgebraElement>) -> Result<Self> {
        if components.len() != space.num_vars() || components.iter().any(|c| c.space() != space) {
            return Err(Error::SpaceMismatch);
        }
        Ok(DerivationVector {
            space: space.clone(),
            components,
        })
    }

    pub fn zero(space: &Arc<Space>) -> Self {
        DerivationVector {
            space: space.clone(),
            components: vec![AlgebraElement::zero(space); space.num_vars()],
        }
    }

    /// The coordinate field `∂_i` (0-based).
    pub fn coordinate(space: &Arc<Space>, i: usize) -> Self {
        let mut v = Self::zero(space);
        v.components[i] = AlgebraElement::one(space);
        v
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn components(&self) -> &[AlgebraElement] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &AlgebraElement {
        &self.components[i]
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(AlgebraElement::is_zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        DerivationVector {
            space: self.space.clone(),
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn scale_by(&self, g: &AlgebraElement) -> Self {
        DerivationVector {
            space: self.space.clone(),
            components: self.components.iter().map(|a| a.mul(g)).collect(),
        }
    }
}

/// `v(g) = Σ v_i ∂g/∂x_i`.
pub fn apply_derivation(v: &DerivationVector, g: &AlgebraElement) -> Result<AlgebraElement> {
    if v.space() != g.space() {
        return Err(Error::SpaceMismatch);
    }
    Ok(v.components
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .fold(AlgebraElement::zero(v.space()), |acc, (i, c)| {
            acc.add(&c.mul(&g.partial(i)))
        }))
}

/// `[v, w]_i = v(w_i) - w(v_i)`.
pub fn lie_bracket(v: &DerivationVector, w: &DerivationVector) -> Result<DerivationVector> {
    if v.space() != w.space() {
        return Err(Error::SpaceMismatch);
    }
    let components = (0..v.space.num_vars())
        .map(|i| {
            Ok(apply_derivation(v, w.component(i))?.sub(&apply_derivation(w, v.component(i))?))
        })
        .collect::<Result<Vec<_>>>()?;
    DerivationVector::new(v.space(), components)
}

impl fmt::Display for DerivationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .components
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| format!("({c}) d{}", i + 1))
            .collect();
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" + "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rat;

    #[test]
    fn bracket_examples() {
        let s = Arc::new(Space::affine(2));
        let dx = DerivationVector::coordinate(&s, 0);
        let dy = DerivationVector::coordinate(&s, 1);
        assert!(lie_bracket(&dx, &dy).unwrap().is_zero());

        let s1 = Arc::new(Space::affine(1));
        let d = DerivationVector::coordinate(&s1, 0);
        let xd = d.scale_by(&AlgebraElement::variable(&s1, 0));
        let expected = DerivationVector::new(&s1, vec![AlgebraElement::constant(&s1, rat(-1))]).unwrap();
        assert_eq!(lie_bracket(&xd, &d).unwrap(), expected);
        assert!(lie_bracket(&xd, &xd).unwrap().is_zero());
    }

    #[test]
    fn constants_are_killed() {
        let s = Arc::new(Space::affine(1));
        let xd = DerivationVector::coordinate(&s, 0).scale_by(&AlgebraElement::variable(&s, 0));
        let c = AlgebraElement::constant(&s, rat(7));
        assert!(apply_derivation(&xd, &c).unwrap().is_zero());
    }

    #[test]
    fn mismatched_spaces() {
        let a = Arc::new(Space::affine(1));
        let t = Arc::new(Space::torus(1));
        let v = DerivationVector::coordinate(&a, 0);
        assert!(matches!(
            apply_derivation(&v, &AlgebraElement::one(&t)),
            Err(Error::SpaceMismatch)
        ));
    }
}
