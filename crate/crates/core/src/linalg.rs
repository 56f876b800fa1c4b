//! Exact sparse linear algebra over the rationals.
//!
//! Every cohomology dimension reported by this crate reduces to ranks of
//! sparse rational matrices. Elimination is fraction-free: each column is
//! scaled to a primitive integer vector and reduced against earlier pivots
//! by cross-multiplication, with the content divided out after each step.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Sparse vector with strictly increasing indices and no stored zeros.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SparseVector {
    entries: Vec<(usize, Rational)>,
}

impl SparseVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a vector from unordered entries, summing duplicates.
    pub fn from_entries(entries: impl IntoIterator<Item = (usize, Rational)>) -> Self {
        let mut map: std::collections::BTreeMap<usize, Rational> = Default::default();
        for (i, c) in entries {
            *map.entry(i).or_insert_with(Rational::zero) += c;
        }
        SparseVector {
            entries: map.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }

    pub fn from_dense(values: &[Rational]) -> Self {
        SparseVector {
            entries: values
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, c)| (i, c.clone()))
                .collect(),
        }
    }

    pub fn unit(i: usize) -> Self {
        SparseVector {
            entries: vec![(i, Rational::one())],
        }
    }

    pub fn entries(&self) -> &[(usize, Rational)] {
        &self.entries
    }

    pub fn get(&self, i: usize) -> Rational {
        match self.entries.binary_search_by_key(&i, |(j, _)| *j) {
            Ok(pos) => self.entries[pos].1.clone(),
            Err(_) => Rational::zero(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.last().map(|(i, _)| *i)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::new();
        }
        SparseVector {
            entries: self.entries.iter().map(|(i, v)| (*i, v * c)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_entries(self.entries.iter().chain(other.entries.iter()).cloned())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&rat(-1)))
    }

    pub fn to_dense(&self, len: usize) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); len];
        for (i, c) in &self.entries {
            out[*i] = c.clone();
        }
        out
    }
}

/// Column-major sparse rational matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    rows: usize,
    columns: Vec<SparseVector>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMatrix {
            rows,
            columns: vec![SparseVector::new(); cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            rows: n,
            columns: (0..n).map(SparseVector::unit).collect(),
        }
    }

    /// Panics if a column has an entry at or beyond `rows`.
    pub fn from_columns(rows: usize, columns: Vec<SparseVector>) -> Self {
        for col in &columns {
            if let Some(i) = col.max_index() {
                assert!(i < rows, "row index {i} out of bounds for {rows} rows");
            }
        }
        SparseMatrix { rows, columns }
    }

    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, Rational)>,
    ) -> Self {
        let mut buckets: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); cols];
        for (r, c, v) in triplets {
            assert!(r < rows && c < cols, "entry ({r}, {c}) out of bounds");
            buckets[c].push((r, v));
        }
        SparseMatrix {
            rows,
            columns: buckets.into_iter().map(SparseVector::from_entries).collect(),
        }
    }

    pub fn from_dense_i64(rows: &[Vec<i64>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        Self::from_triplets(
            nrows,
            ncols,
            rows.iter().enumerate().flat_map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0)
                    .map(move |(j, v)| (i, j, rat(*v)))
            }),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &SparseVector {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[SparseVector] {
        &self.columns
    }

    pub fn get(&self, i: usize, j: usize) -> Rational {
        self.columns[j].get(i)
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(SparseVector::nnz).sum()
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(
            self.cols(),
            self.rows,
            self.columns
                .iter()
                .enumerate()
                .flat_map(|(j, col)| col.entries.iter().map(move |(i, v)| (j, *i, v.clone()))),
        )
    }

    pub fn mul_vector(&self, v: &SparseVector) -> SparseVector {
        SparseVector::from_entries(v.entries.iter().flat_map(|(j, c)| {
            self.columns[*j]
                .entries
                .iter()
                .map(move |(i, a)| (*i, a * c))
        }))
    }

    /// Keeps only rows for which `keep` returns true, renumbering them densely.
    pub fn select_rows(&self, keep: impl Fn(usize) -> bool) -> Self {
        let mut map = vec![usize::MAX; self.rows];
        let mut next = 0;
        for (i, slot) in map.iter_mut().enumerate() {
            if keep(i) {
                *slot = next;
                next += 1;
            }
        }
        SparseMatrix {
            rows: next,
            columns: self
                .columns
                .iter()
                .map(|col| SparseVector {
                    entries: col
                        .entries
                        .iter()
                        .filter(|(i, _)| map[*i] != usize::MAX)
                        .map(|(i, v)| (map[*i], v.clone()))
                        .collect(),
                })
                .collect(),
        }
    }
}

/// A subspace of `K^ambient_dim` given by linearly independent vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    ambient_dim: usize,
    basis: Vec<SparseVector>,
}

impl Subspace {
    pub fn zero(ambient_dim: usize) -> Self {
        Subspace {
            ambient_dim,
            basis: Vec::new(),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Subspace {
            ambient_dim,
            basis: (0..ambient_dim).map(SparseVector::unit).collect(),
        }
    }

    /// Span of arbitrary vectors; dependent vectors are dropped.
    pub fn span(ambient_dim: usize, vectors: impl IntoIterator<Item = SparseVector>) -> Self {
        let mut echelon = Echelon::default();
        let mut basis = Vec::new();
        for v in vectors {
            if let Some(i) = v.max_index() {
                assert!(i < ambient_dim, "vector index {i} exceeds ambient {ambient_dim}");
            }
            if echelon.insert(to_integer(&v), None).is_pivot() {
                basis.push(v);
            }
        }
        Subspace { ambient_dim, basis }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[SparseVector] {
        &self.basis
    }

    pub fn into_basis(self) -> Vec<SparseVector> {
        self.basis
    }

    pub fn contains(&self, v: &SparseVector) -> bool {
        let mut echelon = Echelon::default();
        for b in &self.basis {
            echelon.insert(to_integer(b), None);
        }
        !echelon.insert(to_integer(v), None).is_pivot()
    }
}

/// Exact rank over the rationals.
///
/// Columns are first split into blocks with disjoint row support; the
/// blocks are eliminated independently and in parallel.
pub fn rank(m: &SparseMatrix) -> usize {
    let blocks = column_blocks(m);
    if blocks.len() <= 1 {
        return rank_of_vectors(m.columns.iter());
    }
    blocks
        .par_iter()
        .map(|cols| rank_of_vectors(cols.iter().map(|&j| &m.columns[j])))
        .sum()
}

/// Groups nonzero columns into connected components of the row/column graph.
fn column_blocks(m: &SparseMatrix) -> Vec<Vec<usize>> {
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let mut parent: Vec<usize> = (0..m.rows).collect();
    for col in &m.columns {
        if let Some((first, _)) = col.entries.first() {
            let a = find(&mut parent, *first);
            for (i, _) in &col.entries[1..] {
                let b = find(&mut parent, *i);
                if a != b {
                    parent[b] = a;
                }
            }
        }
    }
    let mut by_root: HashMap<usize, Vec<usize>> = HashMap::new();
    for (j, col) in m.columns.iter().enumerate() {
        if let Some((first, _)) = col.entries.first() {
            let root = find(&mut parent, *first);
            by_root.entry(root).or_default().push(j);
        }
    }
    let mut blocks: Vec<Vec<usize>> = by_root.into_values().collect();
    blocks.sort_by_key(|b| std::cmp::Reverse(b.len()));
    blocks
}

pub fn rank_of_vectors<'a>(vectors: impl IntoIterator<Item = &'a SparseVector>) -> usize {
    let mut echelon = Echelon::default();
    vectors
        .into_iter()
        .filter(|v| echelon.insert(to_integer(v), None).is_pivot())
        .count()
}

/// Basis of the right kernel `{v : m v = 0}`.
pub fn kernel_basis(m: &SparseMatrix) -> Subspace {
    let mut basis: Vec<SparseVector> = m
        .columns
        .iter()
        .enumerate()
        .filter(|(_, c)| c.is_zero())
        .map(|(j, _)| SparseVector::unit(j))
        .collect();
    let blocks = column_blocks(m);
    let found: Vec<Vec<SparseVector>> = blocks
        .par_iter()
        .map(|cols| block_kernel(m, cols))
        .collect();
    basis.extend(found.into_iter().flatten());
    basis.sort_by_key(|v| v.max_index());
    Subspace {
        ambient_dim: m.cols(),
        basis,
    }
}

fn block_kernel(m: &SparseMatrix, cols: &[usize]) -> Vec<SparseVector> {
    let mut echelon = Echelon::default();
    let mut scales = HashMap::new();
    let mut basis = Vec::new();
    // Relations are found between the rescaled integer columns `s_j col_j`.
    for &j in cols {
        let (ints, scale) = to_integer_scaled(&m.columns[j]);
        scales.insert(j, scale);
        let combo = vec![(j, BigInt::one())];
        if let Insert::Dependent(relation) = echelon.insert(ints, Some(combo)) {
            basis.push(SparseVector::from_entries(
                relation
                    .into_iter()
                    .map(|(i, c)| (i, Rational::from_integer(c) * &scales[&i])),
            ));
        }
    }
    basis
}

/// `dim(within) - dim(sub)`, after checking that `sub` lies in `within`.
pub fn quotient_dim(sub: &Subspace, within: &Subspace) -> Result<usize> {
    if sub.ambient_dim != within.ambient_dim {
        return Err(Error::Containment);
    }
    let within_rank = rank_of_vectors(within.basis.iter());
    let joint_rank = rank_of_vectors(within.basis.iter().chain(sub.basis.iter()));
    if joint_rank != within_rank {
        return Err(Error::Containment);
    }
    let sub_rank = rank_of_vectors(sub.basis.iter());
    Ok(within_rank - sub_rank)
}

type IntVec = Vec<(usize, BigInt)>;

fn to_integer(v: &SparseVector) -> IntVec {
    to_integer_scaled(v).0
}

/// Primitive integer vector `s·v` together with the scale `s`.
fn to_integer_scaled(v: &SparseVector) -> (IntVec, Rational) {
    let lcm = v
        .entries
        .iter()
        .fold(BigInt::one(), |acc, (_, c)| acc.lcm(c.denom()));
    let ints: IntVec = v
        .entries
        .iter()
        .map(|(i, c)| (*i, c.numer() * (&lcm / c.denom())))
        .collect();
    let g = content(&ints);
    let scale = if g.is_zero() {
        Rational::one()
    } else {
        Rational::new(lcm, g)
    };
    (primitive(ints), scale)
}

fn content(v: &IntVec) -> BigInt {
    let mut g = BigInt::zero();
    for (_, c) in v {
        g = g.gcd(c);
        if g.is_one() {
            break;
        }
    }
    g
}

fn primitive(mut v: IntVec) -> IntVec {
    let g = content(&v);
    if !g.is_zero() && !g.is_one() {
        for (_, c) in v.iter_mut() {
            *c = &*c / &g;
        }
    }
    v
}

/// `a*x - b*y` on sorted sparse integer vectors.
fn combine(a: &BigInt, x: &IntVec, b: &BigInt, y: &IntVec) -> IntVec {
    let mut out = Vec::with_capacity(x.len() + y.len());
    let (mut i, mut j) = (0, 0);
    while i < x.len() || j < y.len() {
        let take_x = j >= y.len() || (i < x.len() && x[i].0 < y[j].0);
        let take_y = i >= x.len() || (j < y.len() && y[j].0 < x[i].0);
        if take_x {
            out.push((x[i].0, a * &x[i].1));
            i += 1;
        } else if take_y {
            out.push((y[j].0, -(b * &y[j].1)));
            j += 1;
        } else {
            let c = a * &x[i].1 - b * &y[j].1;
            if !c.is_zero() {
                out.push((x[i].0, c));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

enum Insert {
    Pivot,
    Dependent(IntVec),
    DependentUntracked,
}

impl Insert {
    fn is_pivot(&self) -> bool {
        matches!(self, Insert::Pivot)
    }
}

/// Incremental fraction-free column echelon form keyed by leading index.
#[derive(Default)]
struct Echelon {
    pivots: HashMap<usize, (IntVec, Option<IntVec>)>,
}

impl Echelon {
    fn insert(&mut self, mut v: IntVec, mut combo: Option<IntVec>) -> Insert {
        loop {
            let Some((lead, b)) = v.first().cloned() else {
                return match combo {
                    Some(c) => Insert::Dependent(c),
                    None => Insert::DependentUntracked,
                };
            };
            match self.pivots.get(&lead) {
                None => {
                    if b.is_negative() {
                        for (_, c) in v.iter_mut() {
                            *c = -&*c;
                        }
                        if let Some(cm) = combo.as_mut() {
                            for (_, c) in cm.iter_mut() {
                                *c = -&*c;
                            }
                        }
                    }
                    self.pivots.insert(lead, (v, combo));
                    return Insert::Pivot;
                }
                Some((p, pcombo)) => {
                    let a = p[0].1.clone();
                    let g = a.gcd(&b);
                    let (a, b) = (&a / &g, &b / &g);
                    v = combine(&a, &v, &b, p);
                    if let (Some(c), Some(pc)) = (combo.as_mut(), pcombo.as_ref()) {
                        *c = combine(&a, c, &b, pc);
                        let g = content(&v).gcd(&content(c));
                        if !g.is_zero() && !g.is_one() {
                            for (_, x) in v.iter_mut().chain(c.iter_mut()) {
                                *x = &*x / &g;
                            }
                        }
                    } else {
                        v = primitive(v);
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Dense Gaussian elimination over the rationals, used only as an oracle.
    fn dense_rank(rows: &[Vec<Rational>]) -> usize {
        let mut m: Vec<Vec<Rational>> = rows.to_vec();
        let ncols = m.first().map_or(0, |r| r.len());
        let mut rank = 0;
        for col in 0..ncols {
            let Some(p) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else {
                continue;
            };
            m.swap(rank, p);
            for r in 0..m.len() {
                if r != rank && !m[r][col].is_zero() {
                    let f = &m[r][col] / &m[rank][col];
                    for c in col..ncols {
                        let d = &f * &m[rank][c];
                        m[r][c] -= d;
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&SparseMatrix::identity(2)), 2);
        assert_eq!(rank(&SparseMatrix::zeros(3, 5)), 0);
        let m = SparseMatrix::from_dense_i64(&[vec![1, 2], vec![2, 4]]);
        let oracle = dense_rank(&[vec![rat(1), rat(2)], vec![rat(2), rat(4)]]);
        assert_eq!(oracle, 1);
        assert_eq!(rank(&m), oracle);
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(kernel_basis(&SparseMatrix::identity(2)).dim(), 0);
        assert_eq!(kernel_basis(&SparseMatrix::zeros(2, 3)).dim(), 3);

        let m = SparseMatrix::from_dense_i64(&[vec![1, 2]]);
        let k = kernel_basis(&m);
        assert_eq!(k.dim(), 1);
        let v = &k.basis()[0];
        // proportional to (2, -1)
        assert_eq!(&v.get(0) * rat(-1), &v.get(1) * rat(2));
        assert!(m.mul_vector(v).is_zero());
    }

    #[test]
    fn quotient_examples() {
        let k2 = Subspace::full(2);
        assert_eq!(quotient_dim(&Subspace::zero(2), &k2).unwrap(), 2);
        assert_eq!(quotient_dim(&k2, &k2).unwrap(), 0);
        let line = Subspace::span(2, [SparseVector::unit(0)]);
        assert_eq!(quotient_dim(&line, &k2).unwrap(), 1);
        let other = Subspace::span(2, [SparseVector::unit(1)]);
        assert!(matches!(quotient_dim(&other, &line), Err(Error::Containment)));
    }

    #[test]
    fn rational_entries_are_cleared() {
        let m = SparseMatrix::from_triplets(
            2,
            2,
            [
                (0, 0, ratio(1, 2)),
                (1, 0, ratio(1, 3)),
                (0, 1, ratio(3, 4)),
                (1, 1, ratio(1, 2)),
            ],
        );
        assert_eq!(rank(&m), 1);
        let k = kernel_basis(&m);
        assert_eq!(k.dim(), 1);
        assert!(m.mul_vector(&k.basis()[0]).is_zero());
    }

    #[test]
    fn span_drops_dependent_vectors() {
        let a = SparseVector::from_entries([(0, rat(1)), (2, rat(3))]);
        let b = a.scale(&ratio(-5, 7));
        let c = SparseVector::unit(1);
        let s = Subspace::span(3, [a.clone(), b, c.clone()]);
        assert_eq!(s.dim(), 2);
        assert!(s.contains(&a.add(&c)));
        assert!(!s.contains(&SparseVector::unit(2)));
    }

    #[test]
    fn block_rank_matches_single_pass() {
        let m = SparseMatrix::from_dense_i64(&[
            vec![1, 2, 0, 0, 0],
            vec![2, 4, 0, 0, 0],
            vec![0, 0, 1, 1, 0],
            vec![0, 0, 0, 1, 0],
        ]);
        assert_eq!(column_blocks(&m).len(), 2);
        assert_eq!(rank(&m), rank_of_vectors(m.columns().iter()));
        assert_eq!(rank(&m), 3);
    }

    #[test]
    fn select_rows_projects() {
        let m = SparseMatrix::from_dense_i64(&[vec![1, 0], vec![0, 1], vec![1, 1]]);
        let p = m.select_rows(|i| i != 2);
        assert_eq!(p.rows(), 2);
        assert_eq!(rank(&p), 2);
        assert_eq!(p.get(1, 1), rat(1));
    }
}
