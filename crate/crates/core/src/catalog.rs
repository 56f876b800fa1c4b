//! Named spaces with known de Rham Betti numbers.

use crate::poly::UniPoly;
use crate::space::SpaceSpec;

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub spec: SpaceSpec,
    /// `dim H^k_dR`, `k = 0..=dim`.
    pub expected: Option<Vec<usize>>,
}

pub fn catalog() -> Vec<CatalogEntry> {
    let entry = |name, spec, expected: &[usize]| CatalogEntry {
        name,
        spec,
        expected: Some(expected.to_vec()),
    };
    vec![
        entry("affine(1)", SpaceSpec::affine(1), &[1, 0]),
        entry("affine(2)", SpaceSpec::affine(2), &[1, 0, 0]),
        entry("torus(1)", SpaceSpec::torus(1), &[1, 1]),
        entry("torus(2)", SpaceSpec::torus(2), &[1, 2, 1]),
        entry(
            "localized(f = x1^2 + 1)",
            SpaceSpec::localized(UniPoly::from_i64(&[1, 0, 1])).expect("squarefree"),
            &[1, 2],
        ),
        entry(
            "product(torus(1), affine(1))",
            SpaceSpec::product(vec![SpaceSpec::torus(1), SpaceSpec::affine(1)]),
            &[1, 1, 0],
        ),
    ]
}

pub fn lookup(name: &str) -> Option<CatalogEntry> {
    catalog().into_iter().find(|e| e.name == name)
}
