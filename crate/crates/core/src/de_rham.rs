//! Algebraic de Rham cohomology of the catalog spaces.
//!
//! Three exact routes:
//! - polynomial and Laurent charts: the complex is graded by multidegree
//!   (`x^a dx_S` has multidegree `a + e_S`) and `d` preserves it, so each
//!   graded piece is a finite complex; the Euler homotopy contracts every
//!   piece except multidegree zero;
//! - `K[x, 1/f]`: Hermite reduction brings every 1-form to `u' + r/f` with
//!   `deg r < deg f`, and the residues `x^j/f dx` form a basis of `H^1`;
//! - products: Künneth convolution of the factors' Betti vectors.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::algebra::AlgebraElement;
use crate::diffop::Filtration;
use crate::error::{Error, Result};
use crate::forms::{de_rham_d, is_closed, DifferentialForm};
use crate::koszul::CohomologyReport;
use crate::linalg::{rank, rank_of_vectors, rat, Rational, SparseMatrix, SparseVector};
use crate::poly::UniPoly;
use crate::space::{CoeffKey, Space, SpaceSpec};

/// Betti numbers `dim H^k_dR`, `k = 0..=dim`.
///
/// Windowed dimensions are computed at `window` and `window + 2`; a
/// disagreement is reported as [`Error::NotStabilized`].
pub fn dr_cohomology_dims(spec: &SpaceSpec, window: u32) -> Result<Vec<usize>> {
    if window < 1 {
        return Err(Error::InvalidWindow(window));
    }
    match spec {
        SpaceSpec::Atomic(space) => dr_dims_of_chart(space, window),
        SpaceSpec::Product(factors) => {
            let mut dims = vec![1];
            for factor in factors {
                dims = kunneth_dr(&dims, &dr_cohomology_dims(factor, window)?);
            }
            Ok(dims)
        }
    }
}

/// De Rham dimensions computed on a single chart, without Künneth.
pub fn dr_dims_of_chart(space: &Arc<Space>, window: u32) -> Result<Vec<usize>> {
    let at = |w| {
        if space.denominator().is_some() {
            hermite_dims(space, w)
        } else {
            multidegree_dims(space, w)
        }
    };
    let inner = at(window);
    let outer = at(window + 2);
    if inner != outer {
        return Err(Error::NotStabilized(Box::new(CohomologyReport {
            stabilized: inner.iter().zip(&outer).map(|(a, b)| a == b).collect(),
            dims: inner,
            window_used: Filtration::new(0, window),
        })));
    }
    Ok(inner)
}

/// Convolution of Betti vectors.
pub fn kunneth_dr(a: &[usize], b: &[usize]) -> Vec<usize> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn subsets(r: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, r: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..r {
            cur.push(i);
            go(i + 1, r, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, r, k, &mut Vec::new(), &mut out);
    out
}

pub(crate) fn all_subsets(r: usize) -> Vec<Vec<Vec<usize>>> {
    (0..=r).map(|k| subsets(r, k)).collect()
}

/// Cohomology of the finite complex spanned by `x^{m - e_S} dx_S`.
fn multidegree_piece(space: &Space, m: &[i32]) -> Vec<usize> {
    let r = space.num_vars();
    let valid = |s: &[usize]| {
        (0..r).all(|i| {
            let e = m[i] - s.contains(&i) as i32;
            e >= 0 || space.is_laurent(i)
        })
    };
    let bases: Vec<Vec<Vec<usize>>> = all_subsets(r)
        .into_iter()
        .map(|level| level.into_iter().filter(|s| valid(s)).collect())
        .collect();
    let mut ranks = vec![0usize; r + 1];
    for k in 0..r {
        let target: BTreeMap<&Vec<usize>, usize> =
            bases[k + 1].iter().enumerate().map(|(i, s)| (s, i)).collect();
        let columns = bases[k]
            .iter()
            .map(|s| {
                // d(x^{m-e_S} dx_S) = Σ_{j∉S} m_j x^{m-e_S-e_j} dx_j ∧ dx_S
                SparseVector::from_entries((0..r).filter(|j| !s.contains(j) && m[*j] != 0).map(
                    |j| {
                        let mut t = s.clone();
                        t.push(j);
                        t.sort_unstable();
                        let pos = t.iter().position(|x| *x == j).unwrap();
                        let sign = if pos % 2 == 0 { 1 } else { -1 };
                        (target[&t], rat(sign * m[j] as i64))
                    },
                ))
            })
            .collect();
        ranks[k] = rank(&SparseMatrix::from_columns(bases[k + 1].len(), columns));
    }
    (0..=r)
        .map(|k| bases[k].len() - ranks[k] - if k > 0 { ranks[k - 1] } else { 0 })
        .collect()
}

fn multidegrees(space: &Space, window: u32) -> Vec<Vec<i32>> {
    // multidegree m_i ranges over the exponents of x_i plus at most one dx_i
    let r = space.num_vars();
    let mut out = Vec::new();
    let mut cur = vec![0i32; r];
    fn go(space: &Space, i: usize, budget: i64, cur: &mut Vec<i32>, out: &mut Vec<Vec<i32>>) {
        if i == space.num_vars() {
            out.push(cur.clone());
            return;
        }
        let lo = if space.is_laurent(i) { -budget } else { 0 };
        for e in lo..=budget {
            cur[i] = e as i32;
            go(space, i + 1, budget - e.abs(), cur, out);
        }
        cur[i] = 0;
    }
    go(space, 0, window as i64 + r as i64, &mut cur, &mut out);
    out
}

fn multidegree_dims(space: &Space, window: u32) -> Vec<usize> {
    let r = space.num_vars();
    let mut dims = vec![0; r + 1];
    for m in multidegrees(space, window) {
        for (k, d) in multidegree_piece(space, &m).into_iter().enumerate() {
            dims[k] += d;
        }
    }
    dims
}

fn hermite_dims(space: &Arc<Space>, window: u32) -> Vec<usize> {
    let keys = space.keys_within(window);
    // H^0: kernel of d on the windowed functions
    let derivs: Vec<Vec<(CoeffKey, Rational)>> = keys
        .iter()
        .map(|k| AlgebraElement::from_key(space, k, Rational::one()).partial(0).expansion())
        .collect();
    let mut index: BTreeMap<CoeffKey, usize> = BTreeMap::new();
    for d in &derivs {
        for (k, _) in d {
            let n = index.len();
            index.entry(k.clone()).or_insert(n);
        }
    }
    let columns: Vec<SparseVector> = derivs
        .iter()
        .map(|d| SparseVector::from_entries(d.iter().map(|(k, c)| (index[k], c.clone()))))
        .collect();
    let h0 = keys.len() - rank_of_vectors(columns.iter());
    // H^1: span of Hermite residues of the windowed 1-forms
    let residues: Vec<SparseVector> = keys
        .iter()
        .map(|k| {
            let g = AlgebraElement::from_key(space, k, Rational::one());
            let (_, residue) = hermite_reduce(&g);
            SparseVector::from_dense(&residue_vector(&residue, space.denominator_degree()))
        })
        .collect();
    let h1 = rank_of_vectors(residues.iter());
    vec![h0, h1]
}

fn residue_vector(p: &UniPoly, d: u32) -> Vec<Rational> {
    (0..d as usize).map(|j| p.coeff(j)).collect()
}

fn element_from_poly(space: &Arc<Space>, p: &UniPoly, pole: u32) -> AlgebraElement {
    let entries: Vec<(CoeffKey, Rational)> = p
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(j, c)| (CoeffKey::monomial(vec![j as i32]), c.clone()))
        .collect();
    let num = AlgebraElement::from_expansion(space, &entries);
    if pole == 0 {
        num
    } else {
        num.mul(&AlgebraElement::denominator_power(space, pole).expect("localized"))
    }
}

/// Writes `g = u' + r/f` with `deg r < deg f` on `K[x, 1/f]`.
pub fn hermite_reduce(g: &AlgebraElement) -> (AlgebraElement, UniPoly) {
    let space = g.space().clone();
    let f = space.denominator().expect("Hermite reduction needs a denominator").clone();
    let (_, s, t) = f.ext_gcd(&f.derivative());
    let mut rest = g.clone();
    let mut primitive = AlgebraElement::zero(&space);
    loop {
        let k = rest.den_power();
        if k <= 1 {
            break;
        }
        // top f-adic digit c of the pole of order k
        let mut c_coeffs = vec![Rational::zero(); f.degree().unwrap()];
        for (key, c) in rest.expansion() {
            if key.pole == k {
                c_coeffs[key.exps[0] as usize] = c;
            }
        }
        let c = UniPoly::from_coeffs(c_coeffs);
        // c/f^k = cs/f^{k-1} + (ct)'/((k-1) f^{k-1}) - (ct/((k-1) f^{k-1}))'
        let km1 = rat(k as i64 - 1);
        let ct = c.mul(&t);
        let step = element_from_poly(&space, &ct, k - 1).scale(&(Rational::one() / &km1));
        let top = element_from_poly(&space, &c, k);
        let lower = element_from_poly(&space, &c.mul(&s), k - 1)
            .add(&element_from_poly(&space, &ct.derivative(), k - 1).scale(&(Rational::one() / &km1)));
        rest = rest.sub(&top).add(&lower);
        primitive = primitive.sub(&step);
    }
    // rest = polynomial + r/f
    let mut residue = vec![Rational::zero(); f.degree().unwrap()];
    let mut poly_part = Vec::new();
    for (key, c) in rest.expansion() {
        if key.pole == 1 {
            residue[key.exps[0] as usize] = c;
        } else {
            poly_part.push((key, c));
        }
    }
    for (key, c) in poly_part {
        let j = key.exps[0];
        let integral = CoeffKey::monomial(vec![j + 1]);
        primitive = primitive.add(&AlgebraElement::from_key(&space, &integral, c / rat(j as i64 + 1)));
    }
    (primitive, UniPoly::from_coeffs(residue))
}

/// Why a closed form is not exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NonExactness {
    /// The multidegree-zero component of the form survives; potentials in
    /// that multidegree span `potential_space_dim` dimensions and `d` maps
    /// them onto a space of rank `image_rank`.
    Multidegree {
        obstruction: DifferentialForm,
        potential_space_dim: usize,
        image_rank: usize,
    },
    /// Nonzero residue `r/f dx` left after Hermite reduction.
    HermiteResidue { residue: DifferentialForm },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Exactness {
    Exact(DifferentialForm),
    NotExact(NonExactness),
}

impl Exactness {
    pub fn potential(self) -> Option<DifferentialForm> {
        match self {
            Exactness::Exact(beta) => Some(beta),
            Exactness::NotExact(_) => None,
        }
    }
}

/// Decides whether a closed form of positive degree is exact.
pub fn exactness(form: &DifferentialForm) -> Result<Exactness> {
    if form.degree() == 0 {
        return Err(Error::InvalidDegree(0));
    }
    if !is_closed(form) {
        return Err(Error::NotClosed);
    }
    let space = form.space().clone();
    if space.denominator().is_some() {
        let g = form.coefficient(&[0]);
        let (u, residue) = hermite_reduce(&g);
        if residue.is_zero() {
            return Ok(Exactness::Exact(DifferentialForm::function(u)));
        }
        let r = element_from_poly(&space, &residue, 1);
        return Ok(Exactness::NotExact(NonExactness::HermiteResidue {
            residue: DifferentialForm::term(r, &[0])?,
        }));
    }

    let mut pieces: BTreeMap<Vec<i32>, DifferentialForm> = BTreeMap::new();
    for (idx, a) in form.coefficients() {
        for (exps, c) in a.terms() {
            let mut m = exps.clone();
            for i in idx {
                m[*i] += 1;
            }
            let term = DifferentialForm::term(AlgebraElement::monomial(&space, exps.clone(), c.clone())?, idx)?;
            let slot = pieces
                .entry(m)
                .or_insert_with(|| DifferentialForm::zero(&space, form.degree()));
            *slot = slot.add(&term)?;
        }
    }
    let mut beta = DifferentialForm::zero(&space, form.degree() - 1);
    for (m, piece) in &pieces {
        match m.iter().position(|x| *x != 0) {
            Some(i) => {
                let contracted = piece.contract_euler(i).scale(&(Rational::one() / rat(m[i] as i64)));
                beta = beta.add(&contracted)?;
            }
            None => {
                let (dim, image_rank) = multidegree_zero_potentials(&space, form.degree() - 1)?;
                return Ok(Exactness::NotExact(NonExactness::Multidegree {
                    obstruction: piece.clone(),
                    potential_space_dim: dim,
                    image_rank,
                }));
            }
        }
    }
    Ok(Exactness::Exact(beta))
}

/// Returns `β` with `dβ = φ`, or `None` when the class of `φ` is nonzero.
pub fn find_potential(form: &DifferentialForm) -> Result<Option<DifferentialForm>> {
    Ok(exactness(form)?.potential())
}

/// Dimension of multidegree-zero `k`-forms and the rank of `d` on them.
fn multidegree_zero_potentials(space: &Arc<Space>, k: usize) -> Result<(usize, usize)> {
    let r = space.num_vars();
    let basis: Vec<DifferentialForm> = subsets(r, k)
        .into_iter()
        .filter(|s| s.iter().all(|i| space.is_laurent(*i)))
        .map(|s| {
            let mut exps = vec![0; r];
            for i in &s {
                exps[*i] = -1;
            }
            DifferentialForm::term(AlgebraElement::monomial(space, exps, Rational::one())?, &s)
        })
        .collect::<Result<_>>()?;
    if k >= r {
        return Ok((basis.len(), 0));
    }
    let images: Vec<DifferentialForm> = basis.iter().map(de_rham_d).collect::<Result<_>>()?;
    // coordinates of the images in a shared monomial index
    let mut index: BTreeMap<(Vec<usize>, CoeffKey), usize> = BTreeMap::new();
    let mut columns = Vec::new();
    for img in &images {
        let mut entries = Vec::new();
        for (idx, a) in img.coefficients() {
            for (key, c) in a.expansion() {
                let n = index.len();
                let pos = *index.entry((idx.clone(), key)).or_insert(n);
                entries.push((pos, c));
            }
        }
        columns.push(SparseVector::from_entries(entries));
    }
    Ok((basis.len(), rank_of_vectors(columns.iter())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ratio;

    fn loc() -> Arc<Space> {
        Arc::new(Space::localized(UniPoly::from_i64(&[1, 0, 1])).unwrap())
    }

    #[test]
    fn golden_dims() {
        assert_eq!(dr_cohomology_dims(&SpaceSpec::affine(1), 4).unwrap(), vec![1, 0]);
        assert_eq!(dr_cohomology_dims(&SpaceSpec::torus(1), 4).unwrap(), vec![1, 1]);
        let l = SpaceSpec::localized(UniPoly::from_i64(&[1, 0, 1])).unwrap();
        assert_eq!(dr_cohomology_dims(&l, 4).unwrap(), vec![1, 2]);
    }

    #[test]
    fn kunneth_examples() {
        assert_eq!(kunneth_dr(&[1, 0], &[1, 0]), vec![1, 0, 0]);
        assert_eq!(kunneth_dr(&[1, 1], &[1, 1]), vec![1, 2, 1]);
        assert_eq!(kunneth_dr(&[1, 2], &[1, 0]), vec![1, 2, 0]);
    }

    #[test]
    fn hermite_reconstructs_input() {
        let s = loc();
        let x = AlgebraElement::variable(&s, 0);
        let g = x
            .pow(5)
            .add(&AlgebraElement::constant(&s, ratio(3, 2)))
            .mul(&AlgebraElement::denominator_power(&s, 3).unwrap())
            .add(&x.pow(2));
        let (u, r) = hermite_reduce(&g);
        let rebuilt = u.partial(0).add(&element_from_poly(&s, &r, 1));
        assert_eq!(rebuilt, g);
        assert!(r.degree().unwrap_or(0) < 2);
    }

    #[test]
    fn potential_of_area_form() {
        let s = Arc::new(Space::affine(2));
        let w = DifferentialForm::term(AlgebraElement::one(&s), &[0, 1]).unwrap();
        let beta = find_potential(&w).unwrap().unwrap();
        assert_eq!(beta, DifferentialForm::term(AlgebraElement::variable(&s, 0), &[1]).unwrap());
        assert_eq!(de_rham_d(&beta).unwrap(), w);
    }

    #[test]
    fn log_form_is_not_exact() {
        let s = Arc::new(Space::torus(1));
        let w = DifferentialForm::term(AlgebraElement::monomial(&s, vec![-1], rat(1)).unwrap(), &[0]).unwrap();
        match exactness(&w).unwrap() {
            Exactness::NotExact(NonExactness::Multidegree {
                potential_space_dim,
                image_rank,
                ..
            }) => {
                assert_eq!(potential_space_dim, 1);
                assert_eq!(image_rank, 0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_form_has_zero_potential() {
        let s = Arc::new(Space::affine(2));
        let z = DifferentialForm::zero(&s, 2);
        assert!(find_potential(&z).unwrap().unwrap().is_zero());
    }

    #[test]
    fn not_closed_is_rejected() {
        let s = Arc::new(Space::affine(2));
        let w = DifferentialForm::term(AlgebraElement::variable(&s, 0), &[1]).unwrap();
        assert!(matches!(exactness(&w), Err(Error::NotClosed)));
    }

    #[test]
    fn localized_residues() {
        let s = loc();
        let g = AlgebraElement::denominator_power(&s, 1).unwrap();
        let w = DifferentialForm::term(g, &[0]).unwrap();
        assert!(find_potential(&w).unwrap().is_none());
        // d(1/f) = -2x/f^2 dx is exact
        let dg = AlgebraElement::denominator_power(&s, 1).unwrap().partial(0);
        let w = DifferentialForm::term(dg, &[0]).unwrap();
        let beta = find_potential(&w).unwrap().unwrap();
        assert_eq!(de_rham_d(&beta).unwrap(), w);
    }
}
