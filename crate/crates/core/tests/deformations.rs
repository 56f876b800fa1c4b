mod common;

use std::sync::Arc;

use dcohom_core::deform::{
    c1_derivation, c2_cocycle, deformed_multiply, derivation_to_automorphism, extension_cocycle,
    potential_cochain, trivialize_deformation, verify_singular_extension, verify_singular_extension_with,
    DeformedOperator, EquivalenceMap, Trivialization, Twist,
};
use dcohom_core::de_rham::NonExactness;
use dcohom_core::diffop::{pbw_basis, DiffOperator, Filtration};
use dcohom_core::error::Error;
use dcohom_core::hochschild::{delta_cochain, Derivation};
use dcohom_core::parse::parse_form;
use dcohom_core::space::{Space, SpaceSpec};
use proptest::prelude::*;

use common::{operator, rng};

fn twisted(space: &Arc<Space>, omega: &str) -> Arc<Twist> {
    Arc::new(Twist::new(&parse_form(space, omega).unwrap()).unwrap())
}

/// Closed 2-forms used throughout: the plane, a torus class, and a
/// coefficient with nonzero derivatives.
fn twists() -> Vec<(SpaceSpec, &'static str)> {
    vec![
        (SpaceSpec::affine(2), "dx1^dx2"),
        (SpaceSpec::affine(2), "(x1 + x2^2) dx1^dx2"),
        (SpaceSpec::torus(2), "x1^-1 x2^-1 dx1^dx2"),
        (SpaceSpec::product(vec![SpaceSpec::torus(1), SpaceSpec::affine(1)]), "x1^2 x2 dx1^dx2"),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn deformed_product_is_associative(seed in any::<u64>(), which in 0usize..4) {
        let (spec, omega) = &twists()[which];
        let space = spec.flatten().unwrap();
        let tw = twisted(&space, omega);
        let mut r = rng(seed);
        let mut element = || {
            let u = operator(&space, &mut r, Filtration::square(3), 2);
            let v = operator(&space, &mut r, Filtration::square(2), 2);
            DeformedOperator::new(&tw, u, v).unwrap()
        };
        let (a, b, c) = (element(), element(), element());
        let left = deformed_multiply(&deformed_multiply(&a, &b).unwrap(), &c).unwrap();
        let right = deformed_multiply(&a, &deformed_multiply(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(&left.body, &a.body.mul(&b.body).mul(&c.body));
        prop_assert_eq!(left, right);
    }

    /// The t-part of the associativity defect of the lifts is δ₂ of the cocycle.
    #[test]
    fn cocycle_identity(seed in any::<u64>(), which in 0usize..4) {
        let (spec, omega) = &twists()[which];
        let space = spec.flatten().unwrap();
        let c2 = c2_cocycle(spec, &parse_form(&space, omega).unwrap()).unwrap();
        let mut r = rng(seed);
        let args: Vec<DiffOperator> = (0..3).map(|_| operator(&space, &mut r, Filtration::square(2), 2)).collect();
        prop_assert!(delta_cochain(&c2).evaluate(&args).unwrap().is_zero());
    }
}

#[test]
fn reduces_to_the_untwisted_product_mod_t() {
    let space = Arc::new(Space::affine(2));
    let tw = twisted(&space, "dx1^dx2");
    let zero = Arc::new(Twist::zero(&space));
    let mut r = rng(3);
    for _ in 0..20 {
        let (u1, v1) = (operator(&space, &mut r, Filtration::square(2), 3), operator(&space, &mut r, Filtration::square(2), 3));
        let (u2, v2) = (operator(&space, &mut r, Filtration::square(2), 3), operator(&space, &mut r, Filtration::square(2), 3));
        let p = deformed_multiply(
            &DeformedOperator::new(&tw, u1.clone(), v1.clone()).unwrap(),
            &DeformedOperator::new(&tw, u2.clone(), v2.clone()).unwrap(),
        )
        .unwrap();
        assert_eq!(p.body, u1.mul(&u2));
        // the untwisted product is the trivial extension
        let q = deformed_multiply(
            &DeformedOperator::new(&zero, u1.clone(), v1.clone()).unwrap(),
            &DeformedOperator::new(&zero, u2.clone(), v2.clone()).unwrap(),
        )
        .unwrap();
        assert_eq!(q.tangent, u1.mul(&v2).add(&v1.mul(&u2)));
    }
}

#[test]
fn twists_must_match() {
    let space = Arc::new(Space::affine(2));
    let a = DeformedOperator::lift(&twisted(&space, "dx1^dx2"), DiffOperator::one(&space)).unwrap();
    let b = DeformedOperator::lift(&Arc::new(Twist::zero(&space)), DiffOperator::one(&space)).unwrap();
    assert!(matches!(deformed_multiply(&a, &b), Err(Error::TwistMismatch)));
}

#[test]
fn non_closed_twists_are_rejected() {
    let space = Arc::new(Space::affine(3));
    let omega = parse_form(&space, "x3 dx1^dx2").unwrap();
    assert!(matches!(Twist::new(&omega), Err(Error::NotClosed)));
}

#[test]
fn extension_witnesses() {
    let plane = SpaceSpec::affine(2);
    let space = plane.flatten().unwrap();
    let zero = parse_form(&space, "0 dx1^dx2").unwrap();
    let w0 = verify_singular_extension(&plane, &zero, Filtration::square(1)).unwrap();
    let c = extension_cocycle(&w0, Filtration::square(1)).unwrap();
    for a in pbw_basis(&space, Filtration::square(1)) {
        for b in pbw_basis(&space, Filtration::square(1)) {
            assert!(c.evaluate_basis(&[a.clone(), b]).unwrap().is_zero());
        }
    }

    let omega = parse_form(&space, "dx1^dx2").unwrap();
    let w = verify_singular_extension(&plane, &omega, Filtration::square(1)).unwrap();
    let tabulated = extension_cocycle(&w, Filtration::square(2)).unwrap();
    let structural = c2_cocycle(&plane, &omega).unwrap();
    let basis = pbw_basis(&space, Filtration::square(2));
    for a in &basis {
        for b in &basis {
            let pair = [a.clone(), b.clone()];
            assert_eq!(tabulated.evaluate_basis(&pair).unwrap(), structural.evaluate_basis(&pair).unwrap());
        }
    }
    let small = pbw_basis(&space, Filtration::square(1));
    let delta = delta_cochain(&tabulated);
    for a in &small {
        for b in &small {
            for c in &small {
                assert!(delta.evaluate_basis(&[a.clone(), b.clone(), c.clone()]).unwrap().is_zero());
            }
        }
    }
    let outside = DiffOperator::partial(&space, 0).pow(3);
    assert!(matches!(
        tabulated.evaluate(&[outside, DiffOperator::one(&space)]),
        Err(Error::BoundExceeded)
    ));
}

#[test]
fn product_missing_composite_corrections_is_not_associative() {
    let plane = SpaceSpec::affine(2);
    let space = plane.flatten().unwrap();
    let omega = parse_form(&space, "dx1^dx2").unwrap();
    let (d1, d2) = (DiffOperator::partial(&space, 0), DiffOperator::partial(&space, 1));
    let h = omega_value(&space);
    // keeps the correction for the bare pair (∂₂, ∂₁) and drops it elsewhere
    let broken = move |a: &DeformedOperator, b: &DeformedOperator| {
        let mut tangent = a.body.mul(&b.tangent).add(&a.tangent.mul(&b.body));
        if a.body == d2 && b.body == d1 {
            tangent = tangent.add(&h);
        }
        DeformedOperator::new(a.twist(), a.body.mul(&b.body), tangent)
    };
    let result = verify_singular_extension_with(&plane, &omega, Filtration::square(1), &broken);
    assert!(matches!(result, Err(Error::ExtensionAxiomFailure("associativity"))));
}

fn omega_value(space: &Arc<Space>) -> DiffOperator {
    // ω(∂₂, ∂₁) for dx1^dx2
    DiffOperator::constant(space, dcohom_core::linalg::rat(-1))
}

#[test]
fn c2_of_exact_form_is_a_coboundary() {
    let plane = SpaceSpec::affine(2);
    let space = plane.flatten().unwrap();
    let omega = parse_form(&space, "dx1^dx2").unwrap();
    let beta = parse_form(&space, "x1 dx2").unwrap();
    let c2 = c2_cocycle(&plane, &omega).unwrap();
    let eta = potential_cochain(&beta).unwrap();
    let diff = c2.sub(&delta_cochain(&eta)).unwrap();
    let basis = pbw_basis(&space, Filtration::square(2));
    for a in &basis {
        for b in &basis {
            assert!(diff.evaluate_basis(&[a.clone(), b.clone()]).unwrap().is_zero());
        }
    }
}

#[test]
fn trivialization_dichotomy() {
    let plane = SpaceSpec::affine(2);
    let space = plane.flatten().unwrap();
    let t = trivialize_deformation(&plane, &parse_form(&space, "dx1^dx2").unwrap(), Filtration::square(2)).unwrap();
    let Trivialization::Trivial { potential, map } = t else { panic!("plane twist is trivial") };
    assert_eq!(potential, parse_form(&space, "x1 dx2").unwrap());
    assert_eq!(map.correction(&DiffOperator::partial(&space, 1)), DiffOperator::coordinate(&space, 0));

    let zero = trivialize_deformation(&plane, &parse_form(&space, "0 dx1^dx2").unwrap(), Filtration::square(2)).unwrap();
    let Trivialization::Trivial { map, .. } = zero else { panic!("zero twist is trivial") };
    assert!(map.agrees_with(&EquivalenceMap::identity(&space), Filtration::square(3)));

    let torus = SpaceSpec::product(vec![SpaceSpec::torus(1), SpaceSpec::torus(1)]);
    let tspace = torus.flatten().unwrap();
    let omega = parse_form(&tspace, "x1^-1 x2^-1 dx1^dx2").unwrap();
    match trivialize_deformation(&torus, &omega, Filtration::square(2)).unwrap() {
        Trivialization::NonTrivial(NonExactness::Multidegree { potential_space_dim, image_rank, .. }) => {
            assert_eq!(potential_space_dim, 2);
            assert_eq!(image_rank, 0);
        }
        other => panic!("expected a multidegree certificate, got {other:?}"),
    }
}

#[test]
fn automorphisms_from_derivations() {
    let torus = Arc::new(Space::torus(1));
    let d = c1_derivation(&parse_form(&torus, "x1^-1 dx1").unwrap()).unwrap();
    let phi = derivation_to_automorphism(&d, Filtration::square(2)).unwrap();
    let zero = derivation_to_automorphism(&Derivation::zero(&torus), Filtration::square(2)).unwrap();
    assert!(zero.agrees_with(&EquivalenceMap::identity(&torus), Filtration::square(3)));

    let e = Derivation::inner(&DiffOperator::coordinate(&torus, 0).mul(&DiffOperator::partial(&torus, 0)));
    let psi = derivation_to_automorphism(&e, Filtration::square(2)).unwrap();
    let sum = derivation_to_automorphism(&d.add(&e).unwrap(), Filtration::square(2)).unwrap();
    let bound = Filtration::square(3);
    assert!(phi.compose(&psi).agrees_with(&psi.compose(&phi), bound));
    assert!(phi.compose(&psi).agrees_with(&sum, bound));

    let broken = Derivation::unchecked(
        &torus,
        vec![DiffOperator::coordinate(&torus, 0)],
        vec![DiffOperator::zero(&torus)],
        None,
    )
    .unwrap();
    assert!(matches!(derivation_to_automorphism(&broken, bound), Err(Error::NotADerivation(_))));
}

#[test]
fn c1_of_torus_form_is_multiplicative_to_degree_four() {
    let torus = Arc::new(Space::torus(1));
    let d = c1_derivation(&parse_form(&torus, "x1^-1 dx1").unwrap()).unwrap();
    assert!(derivation_to_automorphism(&d, Filtration::new(4, 4)).is_ok());
}
