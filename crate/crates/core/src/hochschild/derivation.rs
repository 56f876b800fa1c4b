//! Derivations of `D(A)` given by their values on generators, and the
//! truncated computation of `Der / Inn`.
//!
//! Generators are `x_i`, `∂_i` and, on a localized line, `g = 1/f`. Laurent
//! inverses need no generator of their own: `d(x^{-1}) = -x^{-1} d(x) x^{-1}`.

use std::sync::Arc;

use crate::algebra::AlgebraElement;
use crate::diffop::{pbw_basis, DiffOperator, Filtration, PbwMonomial};
use crate::error::{Error, Result};
use crate::koszul::CohomologyReport;
use crate::linalg::{rank_of_vectors, rat, Rational, SparseVector, Subspace};
use crate::linalg::kernel_basis;
use crate::space::{CoeffKey, Space, SpaceSpec};
use crate::windowed::{matrix, RowIndex};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    space: Arc<Space>,
    coordinate_images: Vec<DiffOperator>,
    partial_images: Vec<DiffOperator>,
    inverse_image: Option<DiffOperator>,
}

/// Generators of `D(A)` in a fixed order: `x_1..x_r, ∂_1..∂_r[, 1/f]`.
pub fn generators(space: &Arc<Space>) -> Vec<DiffOperator> {
    let r = space.num_vars();
    let mut out: Vec<DiffOperator> = (0..r).map(|i| DiffOperator::coordinate(space, i)).collect();
    out.extend((0..r).map(|i| DiffOperator::partial(space, i)));
    if space.denominator().is_some() {
        out.push(DiffOperator::function(
            AlgebraElement::denominator_power(space, 1).expect("localized space"),
        ));
    }
    out
}

fn commutator(u: &DiffOperator, v: &DiffOperator) -> DiffOperator {
    u.mul(v).sub(&v.mul(u))
}

/// `d(p(x))` for a polynomial `p` in `x_1`, given `d(x_1)`.
fn derivative_of_polynomial(space: &Arc<Space>, p: &crate::poly::UniPoly, dx: &DiffOperator) -> DiffOperator {
    let x = DiffOperator::coordinate(space, 0);
    let mut total = DiffOperator::zero(space);
    for (k, c) in p.coeffs().iter().enumerate() {
        for a in 0..k {
            let term = x.pow(a as u32).mul(dx).mul(&x.pow((k - 1 - a) as u32));
            total = total.add(&term.scale(c));
        }
    }
    total
}

impl Derivation {
    /// Checks the linearized defining relations before accepting the images.
    pub fn new(
        space: &Arc<Space>,
        coordinate_images: Vec<DiffOperator>,
        partial_images: Vec<DiffOperator>,
        inverse_image: Option<DiffOperator>,
    ) -> Result<Self> {
        let d = Self::unchecked(space, coordinate_images, partial_images, inverse_image)?;
        if let Some(label) = d.violated_relation() {
            return Err(Error::NotADerivation(label));
        }
        Ok(d)
    }

    /// Accepts the images without checking the relations.
    pub fn unchecked(
        space: &Arc<Space>,
        coordinate_images: Vec<DiffOperator>,
        partial_images: Vec<DiffOperator>,
        inverse_image: Option<DiffOperator>,
    ) -> Result<Self> {
        let r = space.num_vars();
        if coordinate_images.len() != r || partial_images.len() != r {
            return Err(Error::NotADerivation(format!("expected {r} images per generator family")));
        }
        let all = coordinate_images.iter().chain(&partial_images).chain(inverse_image.iter());
        if all.clone().any(|u| u.space() != space) {
            return Err(Error::SpaceMismatch);
        }
        let inverse_image = match (space.denominator(), inverse_image) {
            (Some(f), None) => {
                // determined by f g = 1: d(g) = -g d(f) g
                let g = DiffOperator::function(AlgebraElement::denominator_power(space, 1)?);
                let df = derivative_of_polynomial(space, f, &coordinate_images[0]);
                Some(g.mul(&df).mul(&g).neg())
            }
            (None, Some(_)) => {
                return Err(Error::NotADerivation("inverse image on a space without denominator".into()))
            }
            (_, img) => img,
        };
        Ok(Derivation {
            space: space.clone(),
            coordinate_images,
            partial_images,
            inverse_image,
        })
    }

    pub fn zero(space: &Arc<Space>) -> Self {
        let r = space.num_vars();
        let z = DiffOperator::zero(space);
        let inv = space.denominator().map(|_| z.clone());
        Derivation {
            space: space.clone(),
            coordinate_images: vec![z.clone(); r],
            partial_images: vec![z; r],
            inverse_image: inv,
        }
    }

    /// The inner derivation `a ↦ [u, a]`.
    pub fn inner(u: &DiffOperator) -> Self {
        let space = u.space().clone();
        let images: Vec<DiffOperator> = generators(&space).iter().map(|g| commutator(u, g)).collect();
        Self::from_generator_images(&space, images)
    }

    /// Images listed in the order of [`generators`].
    fn from_generator_images(space: &Arc<Space>, mut images: Vec<DiffOperator>) -> Self {
        let r = space.num_vars();
        let inverse_image = if images.len() > 2 * r { images.pop() } else { None };
        let partial_images = images.split_off(r);
        Derivation {
            space: space.clone(),
            coordinate_images: images,
            partial_images,
            inverse_image,
        }
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn coordinate_image(&self, i: usize) -> &DiffOperator {
        &self.coordinate_images[i]
    }

    pub fn partial_image(&self, i: usize) -> &DiffOperator {
        &self.partial_images[i]
    }

    pub fn inverse_image(&self) -> Option<&DiffOperator> {
        self.inverse_image.as_ref()
    }

    /// Images in the order of [`generators`].
    pub fn generator_images(&self) -> Vec<DiffOperator> {
        self.coordinate_images
            .iter()
            .chain(&self.partial_images)
            .chain(self.inverse_image.iter())
            .cloned()
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.generator_images().iter().all(DiffOperator::is_zero)
    }

    pub fn add(&self, other: &Derivation) -> Result<Derivation> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch);
        }
        let images = self
            .generator_images()
            .iter()
            .zip(other.generator_images())
            .map(|(a, b)| a.add(&b))
            .collect();
        Ok(Self::from_generator_images(&self.space, images))
    }

    pub fn scale(&self, c: &Rational) -> Derivation {
        let images = self.generator_images().iter().map(|a| a.scale(c)).collect();
        Self::from_generator_images(&self.space, images)
    }

    /// Linearized relation residuals, labelled; all vanish for a derivation.
    fn residuals(&self) -> Vec<(String, DiffOperator)> {
        let s = &self.space;
        let r = s.num_vars();
        let (dx, dd) = (&self.coordinate_images, &self.partial_images);
        let x: Vec<DiffOperator> = (0..r).map(|i| DiffOperator::coordinate(s, i)).collect();
        let d: Vec<DiffOperator> = (0..r).map(|i| DiffOperator::partial(s, i)).collect();
        let mut out = Vec::new();
        for i in 0..r {
            for j in 0..r {
                if i < j {
                    out.push((
                        format!("[x{0}, x{1}] = 0", i + 1, j + 1),
                        commutator(&dx[i], &x[j]).add(&commutator(&x[i], &dx[j])),
                    ));
                    out.push((
                        format!("[d{0}, d{1}] = 0", i + 1, j + 1),
                        commutator(&dd[i], &d[j]).add(&commutator(&d[i], &dd[j])),
                    ));
                }
                out.push((
                    format!("[d{0}, x{1}] = {2}", i + 1, j + 1, u8::from(i == j)),
                    commutator(&dd[i], &x[j]).add(&commutator(&d[i], &dx[j])),
                ));
            }
        }
        if let (Some(f), Some(dg)) = (s.denominator(), &self.inverse_image) {
            let g = DiffOperator::function(AlgebraElement::denominator_power(s, 1).expect("localized"));
            let fop = DiffOperator::function(AlgebraElement::from_expansion(
                s,
                &f.coeffs()
                    .iter()
                    .enumerate()
                    .map(|(k, c)| (CoeffKey::monomial(vec![k as i32]), c.clone()))
                    .collect::<Vec<_>>(),
            ));
            let df = derivative_of_polynomial(s, f, &dx[0]);
            out.push(("f g = 1".into(), df.mul(&g).add(&fop.mul(dg))));
            out.push(("g f = 1".into(), dg.mul(&fop).add(&g.mul(&df))));
        }
        out
    }

    /// The first defining relation whose linearization fails, if any.
    pub fn violated_relation(&self) -> Option<String> {
        self.residuals()
            .into_iter()
            .find(|(_, v)| !v.is_zero())
            .map(|(label, _)| label)
    }

    /// `d(u)` through the Leibniz rule on the normal-form word of each term.
    pub fn apply(&self, u: &DiffOperator) -> DiffOperator {
        let s = &self.space;
        let r = s.num_vars();
        let mut total = DiffOperator::zero(s);
        for (m, c) in u.monomials() {
            let mut letters: Vec<(DiffOperator, DiffOperator)> = Vec::new();
            if m.coeff.pole > 0 {
                let g = DiffOperator::function(AlgebraElement::denominator_power(s, 1).expect("localized"));
                let dg = self.inverse_image.clone().expect("localized derivation carries d(1/f)");
                for _ in 0..m.coeff.exps[0] {
                    letters.push((DiffOperator::coordinate(s, 0), self.coordinate_images[0].clone()));
                }
                for _ in 0..m.coeff.pole {
                    letters.push((g.clone(), dg.clone()));
                }
            } else {
                for i in 0..r {
                    let e = m.coeff.exps[i];
                    let x = DiffOperator::coordinate(s, i);
                    if e >= 0 {
                        for _ in 0..e {
                            letters.push((x.clone(), self.coordinate_images[i].clone()));
                        }
                    } else {
                        let mut exps = vec![0; r];
                        exps[i] = -1;
                        let inv = DiffOperator::function(
                            AlgebraElement::monomial(s, exps, rat(1)).expect("Laurent variable"),
                        );
                        let dinv = inv.mul(&self.coordinate_images[i]).mul(&inv).neg();
                        for _ in 0..-e {
                            letters.push((inv.clone(), dinv.clone()));
                        }
                    }
                }
            }
            for i in 0..r {
                for _ in 0..m.dexp[i] {
                    letters.push((DiffOperator::partial(s, i), self.partial_images[i].clone()));
                }
            }
            // suffix[k] = product of letters k..
            let mut suffix = vec![DiffOperator::one(s); letters.len() + 1];
            for k in (0..letters.len()).rev() {
                suffix[k] = letters[k].0.mul(&suffix[k + 1]);
            }
            let mut prefix = DiffOperator::one(s);
            for (k, (letter, image)) in letters.iter().enumerate() {
                total = total.add(&prefix.mul(image).mul(&suffix[k + 1]).scale(&c));
                prefix = prefix.mul(letter);
            }
        }
        total
    }

    /// `d(ab) = d(a) b + a d(b)` for all pairs drawn from `sample`.
    pub fn leibniz_holds(&self, sample: &[DiffOperator]) -> bool {
        sample.iter().all(|a| {
            let da = self.apply(a);
            sample.iter().all(|b| {
                self.apply(&a.mul(b)) == da.mul(b).add(&a.mul(&self.apply(b)))
            })
        })
    }

    /// Largest filtration among the generator images.
    pub fn filtration(&self) -> Filtration {
        self.generator_images()
            .iter()
            .fold(Filtration::default(), |acc, u| acc.join(&u.filtration()))
    }
}

/// Truncated `Der`, `Inn` and `Out = Der / Inn`.
#[derive(Clone, Debug)]
pub struct DerivationSolve {
    pub bound: Filtration,
    /// Coordinates of image vectors: (generator index, PBW monomial).
    pub coordinates: Vec<(usize, PbwMonomial)>,
    pub der: Subspace,
    pub inner: Subspace,
    pub outer_dim: usize,
    pub stabilized: bool,
}

impl DerivationSolve {
    pub fn derivation(&self, space: &Arc<Space>, v: &SparseVector) -> Derivation {
        let n = generators(space).len();
        let mut images = vec![DiffOperator::zero(space); n];
        for (i, c) in v.entries() {
            let (g, m) = &self.coordinates[*i];
            images[*g] = images[*g].add(&m.to_operator(space).scale(c));
        }
        Derivation::from_generator_images(space, images)
    }
}

struct Solver {
    space: Arc<Space>,
    coords: RowIndex<(usize, PbwMonomial)>,
}

impl Solver {
    fn vector(&mut self, d: &Derivation) -> SparseVector {
        let entries: Vec<((usize, PbwMonomial), Rational)> = d
            .generator_images()
            .iter()
            .enumerate()
            .flat_map(|(g, u)| u.monomials().into_iter().map(move |(m, c)| ((g, m), c)))
            .collect();
        self.coords.column(entries)
    }

    /// `(dim Der, basis of Der, inner vectors)` at `bound`.
    fn solve(&mut self, bound: Filtration) -> (Subspace, Vec<SparseVector>) {
        let space = self.space.clone();
        let gens = generators(&space);
        let basis = pbw_basis(&space, bound);
        let mut residual_rows: RowIndex<(usize, PbwMonomial)> = RowIndex::new();
        let mut unknowns = Vec::new();
        let mut cols = Vec::new();
        for g in 0..gens.len() {
            for m in &basis {
                let mut images = vec![DiffOperator::zero(&space); gens.len()];
                images[g] = m.to_operator(&space);
                let d = Derivation::from_generator_images(&space, images);
                let entries: Vec<_> = d
                    .residuals()
                    .into_iter()
                    .enumerate()
                    .flat_map(|(k, (_, u))| u.monomials().into_iter().map(move |(mm, c)| ((k, mm), c)))
                    .collect();
                cols.push(residual_rows.column(entries));
                unknowns.push(self.coords.id(&(g, m.clone())));
            }
        }
        let kernel = kernel_basis(&matrix(residual_rows.len(), &cols));
        let der_vectors: Vec<SparseVector> = kernel
            .basis()
            .iter()
            .map(|v| SparseVector::from_entries(v.entries().iter().map(|(j, c)| (unknowns[*j], c.clone()))))
            .collect();
        let inner: Vec<SparseVector> = pbw_basis(&space, bound.grow(1))
            .iter()
            .map(|u| {
                let d = Derivation::inner(&u.to_operator(&space));
                self.vector(&d)
            })
            .collect();
        let der = Subspace::span(usize::MAX, der_vectors);
        (der, inner)
    }
}

fn outer_dimension(der: &Subspace, inner: &[SparseVector]) -> usize {
    rank_of_vectors(der.basis().iter().chain(inner)) - rank_of_vectors(inner)
}

/// Derivations with images within `bound`, inner derivations `ad(u)` with
/// `u` within `bound + 1`, and `dim Out`; recomputed at `bound + 2` for
/// stabilization.
pub fn solve_derivations(spec: &SpaceSpec, bound: Filtration) -> Result<DerivationSolve> {
    let space = spec.flatten()?;
    let mut solver = Solver {
        space: space.clone(),
        coords: RowIndex::new(),
    };
    let (der, inner) = solver.solve(bound);
    let outer_dim = outer_dimension(&der, &inner);
    let (der2, inner2) = solver.solve(bound.grow(2));
    let outer2 = outer_dimension(&der2, &inner2);
    let ambient = solver.coords.len();
    let resize = |s: &Subspace| Subspace::span(ambient, s.basis().iter().cloned());
    let result = DerivationSolve {
        bound,
        coordinates: (0..ambient).map(|i| solver.coords.key(i).clone()).collect(),
        der: resize(&der),
        inner: Subspace::span(ambient, inner),
        outer_dim,
        stabilized: outer_dim == outer2,
    };
    if !result.stabilized {
        return Err(Error::NotStabilized(Box::new(CohomologyReport {
            dims: vec![outer_dim],
            window_used: bound,
            stabilized: vec![false],
        })));
    }
    Ok(result)
}

/// Whether `d` is `ad(u)` for some `u` within `bound + 1`.
pub fn is_inner(d: &Derivation, bound: Filtration) -> bool {
    let space = d.space().clone();
    let mut solver = Solver {
        space: space.clone(),
        coords: RowIndex::new(),
    };
    let inner: Vec<SparseVector> = pbw_basis(&space, bound.grow(1))
        .iter()
        .map(|u| solver.vector(&Derivation::inner(&u.to_operator(&space))))
        .collect();
    let v = solver.vector(d);
    rank_of_vectors(inner.iter().chain([&v])) == rank_of_vectors(&inner)
}
