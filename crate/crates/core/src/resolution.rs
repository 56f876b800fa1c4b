//! Windowed exactness check of the bimodule Koszul resolution
//!
//! `0 → D^e ⊗ Λ^n → ⋯ → D^e ⊗ Λ^1 → D^e → D → 0`,
//!
//! where `D^e = D ⊗ D^op` acts on pure tensors `u ⊗ v`, a generator `g`
//! contributes `u g ⊗ v - u ⊗ g v`, and the augmentation is `u ⊗ v ↦ uv`.

use std::collections::HashMap;
use std::sync::Arc;

use crate::diffop::{pbw_basis, DiffOperator, Filtration, PbwMonomial};
use crate::error::{Error, Result};
use crate::koszul::{masks_of_size, KoszulGenerator};
use crate::linalg::{rank, rat, Rational, SparseVector};
use crate::space::{Space, SpaceSpec};
use crate::windowed::{image_inside_dim, matrix, RowIndex};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Cell {
    Tensor(u32, PbwMonomial, PbwMonomial),
    Algebra(PbwMonomial),
}

struct Products {
    space: Arc<Space>,
    generators: Vec<DiffOperator>,
    right: HashMap<(PbwMonomial, usize), Vec<(PbwMonomial, Rational)>>,
    left: HashMap<(PbwMonomial, usize), Vec<(PbwMonomial, Rational)>>,
}

impl Products {
    fn right(&mut self, u: &PbwMonomial, g: usize) -> Vec<(PbwMonomial, Rational)> {
        let (space, gens) = (&self.space, &self.generators);
        self.right
            .entry((u.clone(), g))
            .or_insert_with(|| u.to_operator(space).mul(&gens[g]).monomials())
            .clone()
    }

    fn left(&mut self, v: &PbwMonomial, g: usize) -> Vec<(PbwMonomial, Rational)> {
        let (space, gens) = (&self.space, &self.generators);
        self.left
            .entry((v.clone(), g))
            .or_insert_with(|| gens[g].mul(&v.to_operator(space)).monomials())
            .clone()
    }

    /// Image of a basis cell under the augmented differential.
    fn boundary(&mut self, cell: &Cell) -> Vec<(Cell, Rational)> {
        let Cell::Tensor(mask, u, v) = cell else {
            return Vec::new();
        };
        if *mask == 0 {
            let uv = u.to_operator(&self.space).mul(&v.to_operator(&self.space));
            return uv
                .monomials()
                .into_iter()
                .map(|(m, c)| (Cell::Algebra(m), c))
                .collect();
        }
        let mut out = Vec::new();
        let mut position = 0;
        for g in 0..self.generators.len() {
            if mask & (1 << g) == 0 {
                continue;
            }
            let sign = if position % 2 == 0 { rat(1) } else { rat(-1) };
            position += 1;
            let target = mask ^ (1 << g);
            for (ug, c) in self.right(u, g) {
                out.push((Cell::Tensor(target, ug, v.clone()), &c * &sign));
            }
            for (gv, c) in self.left(v, g) {
                out.push((Cell::Tensor(target, u.clone(), gv), -(&c * &sign)));
            }
        }
        out
    }
}

fn cell_filtration(space: &Space, cell: &Cell) -> Filtration {
    match cell {
        Cell::Tensor(_, u, v) => {
            let (a, b) = (u.filtration(space), v.filtration(space));
            Filtration::new(a.op_order + b.op_order, a.coeff_degree + b.coeff_degree)
        }
        Cell::Algebra(m) => m.filtration(space),
    }
}

/// Extra filtration allowed for preimages. Clearing a pole of order `k`
/// on both tensor factors costs `2 deg f` in coefficient weight.
fn preimage_margin(space: &Space) -> u32 {
    2.max(2 * space.denominator_degree())
}

/// Pure tensors `u ⊗ v` whose combined filtration lies within `bound`.
fn tensor_pairs(space: &Space, bound: Filtration) -> Vec<(PbwMonomial, PbwMonomial)> {
    let mut out = Vec::new();
    for u in pbw_basis(space, bound) {
        let f = u.filtration(space);
        let rest = Filtration::new(bound.op_order - f.op_order, bound.coeff_degree - f.coeff_degree);
        for v in pbw_basis(space, rest) {
            out.push((u.clone(), v));
        }
    }
    out
}

/// Per-degree outcome of the windowed exactness check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResolutionReport {
    pub window: Filtration,
    /// Whether consecutive maps compose to zero on the inner window.
    pub squares_to_zero: bool,
    /// Cycle dimension on the inner window, per homological degree.
    pub cycles: Vec<usize>,
    /// Dimension of boundaries from the outer window that land in the inner one.
    pub boundaries: Vec<usize>,
}

impl ResolutionReport {
    pub fn is_exact(&self) -> bool {
        self.squares_to_zero && self.cycles == self.boundaries
    }
}

/// Exactness of the full resolution on `window`, with preimages drawn from
/// `window + 2` (`window + 2 deg f` on a localized line).
pub fn koszul_resolution_check(spec: &SpaceSpec, window: Filtration) -> Result<bool> {
    let r = spec.dimension();
    Ok(resolution_report(spec, window, &KoszulGenerator::all(r))?.is_exact())
}

/// As [`koszul_resolution_check`] but with a caller-chosen generator set.
pub fn koszul_resolution_check_with(
    spec: &SpaceSpec,
    window: Filtration,
    generators: &[KoszulGenerator],
) -> Result<bool> {
    Ok(resolution_report(spec, window, generators)?.is_exact())
}

pub fn resolution_report(
    spec: &SpaceSpec,
    window: Filtration,
    generators: &[KoszulGenerator],
) -> Result<ResolutionReport> {
    if window.op_order < 2 || window.coeff_degree < 2 {
        return Err(Error::InvalidWindow(window.op_order.min(window.coeff_degree)));
    }
    let space = spec.flatten()?;
    let mut gens = generators.to_vec();
    gens.sort();
    gens.dedup();
    let n = gens.len();
    let mut products = Products {
        space: space.clone(),
        generators: gens.iter().map(|g| g.operator(&space)).collect(),
        right: HashMap::new(),
        left: HashMap::new(),
    };
    let outer = window.grow(preimage_margin(&space));
    let inner_pairs = tensor_pairs(&space, window);
    let outer_pairs = tensor_pairs(&space, outer);
    let mut rows: RowIndex<Cell> = RowIndex::new();
    let mut squares_to_zero = true;

    let mut inner_cols: Vec<Vec<SparseVector>> = Vec::new();
    let mut outer_cols: Vec<Vec<SparseVector>> = Vec::new();
    for k in 0..=n {
        let mut inner = Vec::new();
        let mut outer_k = Vec::new();
        for mask in masks_of_size(n, k) {
            for (u, v) in &outer_pairs {
                let cell = Cell::Tensor(mask, u.clone(), v.clone());
                let image = products.boundary(&cell);
                outer_k.push(rows.column(image));
            }
            for (u, v) in &inner_pairs {
                let cell = Cell::Tensor(mask, u.clone(), v.clone());
                let image = products.boundary(&cell);
                let col = rows.column(image.clone());
                // the composite of two consecutive maps must vanish
                let mut second = Vec::new();
                for (c, a) in image {
                    for (cc, b) in products.boundary(&c) {
                        second.push((cc, &a * &b));
                    }
                }
                if !rows.column(second).is_zero() {
                    squares_to_zero = false;
                }
                inner.push(col);
            }
        }
        inner_cols.push(inner);
        outer_cols.push(outer_k);
    }

    let total = rows.len();
    let mut report = ResolutionReport {
        window,
        squares_to_zero,
        cycles: Vec::new(),
        boundaries: Vec::new(),
    };
    for k in 0..=n {
        let cycles = inner_cols[k].len() - rank(&matrix(total, &inner_cols[k]));
        let boundaries = if k < n {
            let m = matrix(total, &outer_cols[k + 1]);
            image_inside_dim(&m, |i| match rows.key(i) {
                c @ Cell::Tensor(mask, _, _) => {
                    mask.count_ones() as usize == k && window.contains(&cell_filtration(&space, c))
                }
                Cell::Algebra(_) => false,
            })
        } else {
            0
        };
        report.cycles.push(cycles);
        report.boundaries.push(boundaries);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_line_resolution_is_exact() {
        assert!(koszul_resolution_check(&SpaceSpec::affine(1), Filtration::square(3)).unwrap());
    }

    #[test]
    fn coordinate_generators_alone_fail() {
        let gens = [KoszulGenerator::Coordinate(0)];
        assert!(!koszul_resolution_check_with(&SpaceSpec::affine(1), Filtration::square(3), &gens).unwrap());
    }

    #[test]
    fn window_too_small() {
        assert!(matches!(
            koszul_resolution_check(&SpaceSpec::affine(1), Filtration::square(1)),
            Err(Error::InvalidWindow(1))
        ));
    }
}
