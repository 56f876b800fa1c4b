//! The commutator Koszul complexes of `D(A)`.
//!
//! Generators are `ξ_i` (acting by `ad(x_i)`) and `η_i` (acting by
//! `ad(∂_i)`), ordered `ξ_1..ξ_r, η_1..η_r`. The `ad` operators pairwise
//! commute because `[x_i, ∂_j]` is central, so both the ascending (cochain)
//! and descending (chain) Koszul complexes square to zero.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_traits::One;

use crate::algebra::AlgebraElement;
use crate::de_rham::dr_cohomology_dims;
use crate::diffop::{pbw_basis, DiffOperator, Filtration, PbwMonomial};
use crate::error::{Error, Result};
use crate::linalg::{rank, rat, Rational, SparseVector};
use crate::space::{CoeffKey, Space, SpaceSpec};
use crate::windowed::{image_inside_dim, matrix, RowIndex};

/// Windowed (co)homology dimensions with per-degree stabilization flags.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CohomologyReport {
    pub dims: Vec<usize>,
    pub window_used: Filtration,
    pub stabilized: Vec<bool>,
}

impl CohomologyReport {
    pub fn is_stabilized(&self) -> bool {
        self.stabilized.iter().all(|s| *s)
    }

    fn into_result(self) -> Result<Self> {
        if self.is_stabilized() {
            Ok(self)
        } else {
            Err(Error::NotStabilized(Box::new(self)))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KoszulGenerator {
    /// `ξ_i`, acting by `ad(x_i)`.
    Coordinate(usize),
    /// `η_i`, acting by `ad(∂_i)`.
    Partial(usize),
}

impl KoszulGenerator {
    /// Position in the ordering `ξ_1..ξ_r, η_1..η_r`.
    pub fn index(&self, r: usize) -> usize {
        match *self {
            KoszulGenerator::Coordinate(i) => i,
            KoszulGenerator::Partial(i) => r + i,
        }
    }

    pub fn from_index(g: usize, r: usize) -> Self {
        if g < r {
            KoszulGenerator::Coordinate(g)
        } else {
            KoszulGenerator::Partial(g - r)
        }
    }

    pub fn all(r: usize) -> Vec<Self> {
        (0..2 * r).map(|g| Self::from_index(g, r)).collect()
    }

    pub fn act(&self, u: &DiffOperator) -> DiffOperator {
        match *self {
            KoszulGenerator::Coordinate(i) => u.ad_coordinate(i),
            KoszulGenerator::Partial(i) => u.ad_partial(i),
        }
    }

    /// The generator as an element of `D(A)`.
    pub fn operator(&self, space: &Arc<Space>) -> DiffOperator {
        match *self {
            KoszulGenerator::Coordinate(i) => DiffOperator::coordinate(space, i),
            KoszulGenerator::Partial(i) => DiffOperator::partial(space, i),
        }
    }
}

impl fmt::Display for KoszulGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KoszulGenerator::Coordinate(i) => write!(f, "xi{}", i + 1),
            KoszulGenerator::Partial(i) => write!(f, "eta{}", i + 1),
        }
    }
}

/// A Koszul (co)chain: operators indexed by sorted generator subsets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KoszulCochain {
    space: Arc<Space>,
    degree: usize,
    components: BTreeMap<Vec<KoszulGenerator>, DiffOperator>,
}

impl KoszulCochain {
    pub fn zero(space: &Arc<Space>, degree: usize) -> Self {
        KoszulCochain {
            space: space.clone(),
            degree,
            components: BTreeMap::new(),
        }
    }

    pub fn new(
        space: &Arc<Space>,
        degree: usize,
        components: impl IntoIterator<Item = (Vec<KoszulGenerator>, DiffOperator)>,
    ) -> Result<Self> {
        let r = space.num_vars();
        if degree > 2 * r {
            return Err(Error::InvalidDegree(degree));
        }
        let mut c = Self::zero(space, degree);
        for (mut subset, op) in components {
            subset.sort();
            subset.dedup();
            if subset.len() != degree || subset.iter().any(|g| g.index(r) >= 2 * r) {
                return Err(Error::InvalidDegree(subset.len()));
            }
            if op.space() != space {
                return Err(Error::SpaceMismatch);
            }
            c.add_component(subset, op);
        }
        Ok(c)
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn components(&self) -> &BTreeMap<Vec<KoszulGenerator>, DiffOperator> {
        &self.components
    }

    pub fn component(&self, subset: &[KoszulGenerator]) -> DiffOperator {
        self.components
            .get(subset)
            .cloned()
            .unwrap_or_else(|| DiffOperator::zero(&self.space))
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }

    fn add_component(&mut self, subset: Vec<KoszulGenerator>, op: DiffOperator) {
        let sum = match self.components.remove(&subset) {
            Some(old) => old.add(&op),
            None => op,
        };
        if !sum.is_zero() {
            self.components.insert(subset, sum);
        }
    }
}

fn sign(position: usize) -> Rational {
    if position % 2 == 0 {
        Rational::one()
    } else {
        rat(-1)
    }
}

/// Ascending differential: `(dc)(T) = Σ_{g∈T} (-1)^{pos(g,T)} ad(g) c(T∖g)`.
pub fn koszul_differential(c: &KoszulCochain) -> Result<KoszulCochain> {
    let r = c.space.num_vars();
    if c.degree >= 2 * r {
        return Err(Error::DegreeOverflow {
            degree: c.degree,
            dim: 2 * r,
        });
    }
    let mut out = KoszulCochain::zero(&c.space, c.degree + 1);
    for (subset, op) in &c.components {
        for g in KoszulGenerator::all(r) {
            if subset.contains(&g) {
                continue;
            }
            let mut target = subset.clone();
            target.push(g);
            target.sort();
            let pos = target.iter().position(|h| *h == g).unwrap();
            out.add_component(target, g.act(op).scale(&sign(pos)));
        }
    }
    Ok(out)
}

/// Descending differential: `(∂c)(S∖g) += (-1)^{pos(g,S)} ad(g) c(S)`.
pub fn koszul_boundary(c: &KoszulCochain) -> Result<KoszulCochain> {
    if c.degree == 0 {
        return Err(Error::InvalidDegree(0));
    }
    let mut out = KoszulCochain::zero(&c.space, c.degree - 1);
    for (subset, op) in &c.components {
        for (pos, g) in subset.iter().enumerate() {
            let mut target = subset.clone();
            target.remove(pos);
            out.add_component(target, g.act(op).scale(&sign(pos)));
        }
    }
    Ok(out)
}

/// Generator subsets of a given size as bitmasks, in increasing order.
pub(crate) fn masks_of_size(n: usize, k: usize) -> Vec<u32> {
    (0u32..(1 << n)).filter(|m| m.count_ones() as usize == k).collect()
}

fn position_in(mask: u32, g: usize) -> usize {
    (mask & ((1 << g) - 1)).count_ones() as usize
}

/// Cached `ad` images of PBW monomials.
pub(crate) struct AdTable {
    space: Arc<Space>,
    derivatives: HashMap<(CoeffKey, usize), Vec<(CoeffKey, Rational)>>,
}

impl AdTable {
    pub(crate) fn new(space: &Arc<Space>) -> Self {
        AdTable {
            space: space.clone(),
            derivatives: HashMap::new(),
        }
    }

    /// `ad(gen_g)(m)` for generator index `g` in `ξ_1..ξ_r, η_1..η_r`.
    pub(crate) fn apply(&mut self, g: usize, m: &PbwMonomial) -> Vec<(PbwMonomial, Rational)> {
        let r = self.space.num_vars();
        if g < r {
            if m.dexp[g] == 0 {
                return Vec::new();
            }
            let mut d = m.dexp.clone();
            d[g] -= 1;
            return vec![(
                PbwMonomial {
                    coeff: m.coeff.clone(),
                    dexp: d,
                },
                rat(-(m.dexp[g] as i64)),
            )];
        }
        let i = g - r;
        let space = &self.space;
        let derivative = self
            .derivatives
            .entry((m.coeff.clone(), i))
            .or_insert_with(|| {
                AlgebraElement::from_key(space, &m.coeff, Rational::one())
                    .partial(i)
                    .expansion()
            });
        derivative
            .iter()
            .map(|(k, c)| {
                (
                    PbwMonomial {
                        coeff: k.clone(),
                        dexp: m.dexp.clone(),
                    },
                    c.clone(),
                )
            })
            .collect()
    }
}

/// Truncated (co)homology of the Koszul complex on `space`.
///
/// For each degree the dimension is computed at inner window `W` with
/// primitives drawn from `W+2`, and again at `W+2` with primitives from
/// `W+4`; a degree is stabilized when the two agree.
pub(crate) fn windowed_koszul(space: &Arc<Space>, window: Filtration, descending: bool) -> CohomologyReport {
    let r = space.num_vars();
    let n = 2 * r;
    let windows = [window, window.grow(2), window.grow(4)];
    let largest = pbw_basis(space, windows[2]);
    let mut ad = AdTable::new(space);
    let mut rows: RowIndex<(u32, PbwMonomial)> = RowIndex::new();

    // For each source degree k: columns of d_k on the largest window, and
    // the smallest window index containing each column's source monomial.
    let mut columns: Vec<Vec<(usize, SparseVector)>> = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let mut cols = Vec::new();
        for mask in masks_of_size(n, k) {
            for m in &largest {
                let f = m.filtration(space);
                let level = windows.iter().position(|w| w.contains(&f)).unwrap();
                let mut image = Vec::new();
                for g in 0..n {
                    let present = mask & (1 << g) != 0;
                    if present != descending {
                        continue;
                    }
                    let target = mask ^ (1 << g);
                    let s = sign(position_in(if descending { mask } else { target }, g));
                    for (mm, c) in ad.apply(g, m) {
                        image.push(((target, mm), &c * &s));
                    }
                }
                cols.push((level, rows.column(image)));
            }
        }
        columns.push(cols);
    }

    let total_rows = rows.len();
    let rank_at = |k: usize, level: usize| {
        rank(&matrix(
            total_rows,
            columns[k].iter().filter(|(l, _)| *l <= level).map(|(_, c)| c),
        ))
    };
    let count_at = |k: usize, level: usize| columns[k].iter().filter(|(l, _)| *l <= level).count();
    let inside = |level: usize| {
        let w = windows[level];
        let rows = &rows;
        move |i: usize| w.contains(&rows.key(i).1.filtration(space))
    };

    let dims_at = |level: usize| -> Vec<usize> {
        (0..=n)
            .map(|j| {
                let cycles = count_at(j, level) - rank_at(j, level);
                let source = if descending { j + 1 } else { j.wrapping_sub(1) };
                let boundaries = if source <= n {
                    let m = matrix(
                        total_rows,
                        columns[source].iter().filter(|(l, _)| *l <= level + 1).map(|(_, c)| c),
                    );
                    image_inside_dim(&m, inside(level))
                } else {
                    0
                };
                cycles - boundaries
            })
            .collect()
    };
    let inner = dims_at(0);
    let outer = dims_at(1);
    CohomologyReport {
        stabilized: inner.iter().zip(&outer).map(|(a, b)| a == b).collect(),
        dims: inner,
        window_used: window,
    }
}

/// `HH^n(D(A))`, `n = 0..=2r`, from the ascending Koszul complex.
pub fn hh_via_koszul(spec: &SpaceSpec, window: Filtration) -> Result<CohomologyReport> {
    let space = spec.flatten()?;
    windowed_koszul(&space, window, false).into_result()
}

/// `HH_n(D(A))`, `n = 0..=2r`, from the descending Koszul complex.
pub fn hh_homology_via_koszul(spec: &SpaceSpec, window: Filtration) -> Result<CohomologyReport> {
    let space = spec.flatten()?;
    windowed_koszul(&space, window, true).into_result()
}

/// `HH^n(D(A)) = H^n_dR`, through the de Rham route.
pub fn hh_via_de_rham(spec: &SpaceSpec) -> Result<Vec<usize>> {
    match dr_cohomology_dims(spec, 6) {
        Err(Error::NotStabilized(_)) => dr_cohomology_dims(spec, 8),
        other => other,
    }
}

/// Checks `dim HH^n = dim HH_{2r-n}` for every `n`.
pub fn vdb_check(spec: &SpaceSpec, window: Filtration) -> Result<bool> {
    let cohomology = hh_via_koszul(spec, window)?;
    let homology = hh_homology_via_koszul(spec, window)?;
    Ok(duality_holds(&cohomology.dims, &homology.dims))
}

pub(crate) fn duality_holds(cohomology: &[usize], homology: &[usize]) -> bool {
    cohomology.len() == homology.len() && cohomology.iter().eq(homology.iter().rev())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a1() -> Arc<Space> {
        Arc::new(Space::affine(1))
    }

    #[test]
    fn differential_examples() {
        let s = a1();
        let one = KoszulCochain::new(&s, 0, [(vec![], DiffOperator::one(&s))]).unwrap();
        assert!(koszul_differential(&one).unwrap().is_zero());

        let d = KoszulCochain::new(&s, 0, [(vec![], DiffOperator::partial(&s, 0))]).unwrap();
        let dc = koszul_differential(&d).unwrap();
        assert_eq!(
            dc.component(&[KoszulGenerator::Coordinate(0)]),
            DiffOperator::constant(&s, rat(-1))
        );
        assert!(dc.component(&[KoszulGenerator::Partial(0)]).is_zero());
    }

    #[test]
    fn overflow_at_top_degree() {
        let s = a1();
        let top = KoszulCochain::zero(&s, 2);
        assert!(matches!(
            koszul_differential(&top),
            Err(Error::DegreeOverflow { degree: 2, dim: 2 })
        ));
    }

    #[test]
    fn ad_table_matches_operator_ad() {
        let s = Arc::new(Space::torus(2));
        let mut table = AdTable::new(&s);
        for m in pbw_basis(&s, Filtration::square(2)) {
            let op = m.to_operator(&s);
            for g in 0..4 {
                let expected = KoszulGenerator::from_index(g, 2).act(&op);
                let got = table.apply(g, &m);
                let got = DiffOperator::from_monomials(&s, got.iter().map(|(m, c)| (m, c)));
                assert_eq!(got, expected);
            }
        }
    }

    #[test]
    fn affine_line_dims() {
        let report = windowed_koszul(&a1(), Filtration::square(4), false);
        assert_eq!(report.dims, vec![1, 0, 0]);
        assert!(report.is_stabilized());
        let report = windowed_koszul(&a1(), Filtration::square(4), true);
        assert_eq!(report.dims, vec![0, 0, 1]);
    }

    #[test]
    fn torus_dims() {
        let t = Arc::new(Space::torus(1));
        assert_eq!(windowed_koszul(&t, Filtration::square(4), false).dims, vec![1, 1, 0]);
        assert_eq!(windowed_koszul(&t, Filtration::square(4), true).dims, vec![0, 1, 1]);
    }
}
