//! Seeded generators shared by the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use dcohom_core::algebra::AlgebraElement;
use dcohom_core::diffop::{pbw_basis, DiffOperator, Filtration};
use dcohom_core::linalg::{rat, Rational};
use dcohom_core::poly::UniPoly;
use dcohom_core::space::Space;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn spaces() -> Vec<Arc<Space>> {
    vec![
        Arc::new(Space::affine(1)),
        Arc::new(Space::torus(1)),
        Arc::new(Space::localized(UniPoly::from_i64(&[1, 0, 1])).unwrap()),
        Arc::new(Space::affine(2)),
        Arc::new(Space::mixed(vec![true, false])),
        Arc::new(Space::torus(2)),
    ]
}

pub fn small_coeff(rng: &mut ChaCha8Rng) -> Rational {
    let n = rng.gen_range(1..=3) * if rng.gen_bool(0.5) { 1 } else { -1 };
    rat(n)
}

/// A combination of up to `terms` PBW monomials within `bound`.
pub fn operator(space: &Arc<Space>, rng: &mut ChaCha8Rng, bound: Filtration, terms: usize) -> DiffOperator {
    let basis = pbw_basis(space, bound);
    let n = rng.gen_range(1..=terms);
    (0..n).fold(DiffOperator::zero(space), |acc, _| {
        let m = &basis[rng.gen_range(0..basis.len())];
        acc.add(&m.to_operator(space).scale(&small_coeff(rng)))
    })
}

pub fn function(space: &Arc<Space>, rng: &mut ChaCha8Rng, degree: u32, terms: usize) -> AlgebraElement {
    operator(space, rng, Filtration::new(0, degree), terms)
        .as_function()
        .expect("order zero")
}

/// `u` acting on a function: `Σ a_β ∂^β g`.
pub fn act(u: &DiffOperator, g: &AlgebraElement) -> AlgebraElement {
    let mut total = AlgebraElement::zero(u.space());
    for (dexp, a) in u.terms() {
        let mut h = g.clone();
        for (i, e) in dexp.iter().enumerate() {
            for _ in 0..*e {
                h = h.partial(i);
            }
        }
        total = total.add(&a.mul(&h));
    }
    total
}
