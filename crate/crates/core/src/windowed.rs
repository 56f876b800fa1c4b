//! Assembly helpers for truncated complexes.
//!
//! A truncated cohomology group at inner window `F` and outer window `G ⊇ F`
//! is `dim Z(V_F) - dim(d(V_G) ∩ V_F)`; the intersection dimension is
//! `rank M - rank(P_out M)` where `P_out` keeps only rows outside `V_F`.

use std::collections::HashMap;
use std::hash::Hash;

use crate::linalg::{rank, Rational, SparseMatrix, SparseVector};

/// Dense numbering of row keys discovered while assembling columns.
pub(crate) struct RowIndex<K> {
    index: HashMap<K, usize>,
    keys: Vec<K>,
}

impl<K: Hash + Eq + Clone> RowIndex<K> {
    pub(crate) fn new() -> Self {
        RowIndex {
            index: HashMap::new(),
            keys: Vec::new(),
        }
    }

    pub(crate) fn id(&mut self, key: &K) -> usize {
        if let Some(&i) = self.index.get(key) {
            return i;
        }
        let i = self.keys.len();
        self.index.insert(key.clone(), i);
        self.keys.push(key.clone());
        i
    }

    pub(crate) fn column(&mut self, image: impl IntoIterator<Item = (K, Rational)>) -> SparseVector {
        let entries: Vec<(usize, Rational)> = image.into_iter().map(|(k, c)| (self.id(&k), c)).collect();
        SparseVector::from_entries(entries)
    }

    pub(crate) fn len(&self) -> usize {
        self.keys.len()
    }

    pub(crate) fn key(&self, i: usize) -> &K {
        &self.keys[i]
    }
}

pub(crate) fn matrix<'a>(rows: usize, cols: impl IntoIterator<Item = &'a SparseVector>) -> SparseMatrix {
    SparseMatrix::from_columns(rows, cols.into_iter().cloned().collect())
}

/// `dim(im m ∩ span{rows where inside})`.
pub(crate) fn image_inside_dim(m: &SparseMatrix, inside: impl Fn(usize) -> bool) -> usize {
    rank(m) - rank(&m.select_rows(|i| !inside(i)))
}
