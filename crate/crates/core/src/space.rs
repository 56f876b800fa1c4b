//! Coordinate spaces: affine spaces, tori, univariate localizations and
//! products of these.
//!
//! A [`Space`] is a single coordinate chart on which the algebra actually
//! computes; a [`SpaceSpec`] is what callers write down, possibly as a
//! product. Products of polynomial/Laurent factors flatten into one chart.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::poly::UniPoly;

/// One chart: `K[x_1..x_r]` with some variables inverted, or
/// `K[x, 1/f]` for a squarefree `f` when `r = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Space {
    laurent: Vec<bool>,
    denominator: Option<UniPoly>,
}

impl Space {
    pub fn affine(r: usize) -> Self {
        Space {
            laurent: vec![false; r],
            denominator: None,
        }
    }

    pub fn torus(r: usize) -> Self {
        Space {
            laurent: vec![true; r],
            denominator: None,
        }
    }

    /// Polynomial ring with the variables flagged in `laurent` inverted.
    pub fn mixed(laurent: Vec<bool>) -> Self {
        Space {
            laurent,
            denominator: None,
        }
    }

    /// `K[x, 1/f]`; `f` must be squarefree of positive degree.
    pub fn localized(f: UniPoly) -> Result<Self> {
        match f.degree() {
            None | Some(0) => {
                return Err(Error::UnsupportedSpace(format!(
                    "denominator {} must have positive degree",
                    f.fmt_in("x1")
                )))
            }
            _ => {}
        }
        if !f.is_squarefree() {
            return Err(Error::NotSquarefree(f.fmt_in("x1")));
        }
        Ok(Space {
            laurent: vec![false],
            denominator: Some(f.monic()),
        })
    }

    pub fn num_vars(&self) -> usize {
        self.laurent.len()
    }

    pub fn is_laurent(&self, i: usize) -> bool {
        self.laurent[i]
    }

    pub fn laurent_vars(&self) -> &[bool] {
        &self.laurent
    }

    pub fn denominator(&self) -> Option<&UniPoly> {
        self.denominator.as_ref()
    }

    pub fn denominator_degree(&self) -> u32 {
        self.denominator
            .as_ref()
            .and_then(UniPoly::degree)
            .unwrap_or(0) as u32
    }

    pub fn is_valid_key(&self, key: &CoeffKey) -> bool {
        if key.exps.len() != self.num_vars() {
            return false;
        }
        if key.exps.iter().zip(&self.laurent).any(|(e, l)| *e < 0 && !l) {
            return false;
        }
        if key.pole > 0 {
            match self.denominator_degree() {
                0 => return false,
                d => return key.exps[0] < d as i32,
            }
        }
        true
    }

    /// All basis keys of the coordinate algebra with weight at most `max`.
    pub fn keys_within(&self, max: u32) -> Vec<CoeffKey> {
        let r = self.num_vars();
        let mut out = Vec::new();
        let mut current = vec![0i32; r];
        enumerate_exponents(&self.laurent, 0, max as i64, &mut current, &mut out);
        let mut keys: Vec<CoeffKey> = out
            .into_iter()
            .map(|exps| CoeffKey { exps, pole: 0 })
            .collect();
        let d = self.denominator_degree();
        if d > 0 {
            let mut pole = 1;
            while pole * d <= max {
                for j in 0..d {
                    if j + pole * d <= max {
                        keys.push(CoeffKey {
                            exps: vec![j as i32],
                            pole,
                        });
                    }
                }
                pole += 1;
            }
        }
        keys.sort();
        keys
    }

    pub fn key_weight(&self, key: &CoeffKey) -> u32 {
        key.exps.iter().map(|e| e.unsigned_abs()).sum::<u32>() + key.pole * self.denominator_degree()
    }
}

fn enumerate_exponents(
    laurent: &[bool],
    i: usize,
    budget: i64,
    current: &mut Vec<i32>,
    out: &mut Vec<Vec<i32>>,
) {
    if i == laurent.len() {
        out.push(current.clone());
        return;
    }
    let lo = if laurent[i] { -budget } else { 0 };
    for e in lo..=budget {
        current[i] = e as i32;
        enumerate_exponents(laurent, i + 1, budget - e.abs(), current, out);
    }
    current[i] = 0;
}

/// Basis element of a coordinate algebra: `x^exps` when `pole = 0`,
/// otherwise `x^j / f^pole` with `j < deg f` (univariate only).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CoeffKey {
    pub exps: Vec<i32>,
    pub pole: u32,
}

impl CoeffKey {
    pub fn one(r: usize) -> Self {
        CoeffKey {
            exps: vec![0; r],
            pole: 0,
        }
    }

    pub fn monomial(exps: Vec<i32>) -> Self {
        CoeffKey { exps, pole: 0 }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(den) = &self.denominator {
            return write!(f, "localized(f = {})", den.fmt_in("x1"));
        }
        let r = self.num_vars();
        if self.laurent.iter().all(|l| *l) && r > 0 {
            return write!(f, "torus({r})");
        }
        if self.laurent.iter().all(|l| !*l) {
            return write!(f, "affine({r})");
        }
        // runs of equal flags, nested as binary products
        let mut runs: Vec<(bool, usize)> = Vec::new();
        for l in &self.laurent {
            match runs.last_mut() {
                Some((flag, n)) if flag == l => *n += 1,
                _ => runs.push((*l, 1)),
            }
        }
        let names: Vec<String> = runs
            .iter()
            .map(|(l, n)| if *l { format!("torus({n})") } else { format!("affine({n})") })
            .collect();
        write!(f, "{}", nest_product(&names))
    }
}

fn nest_product(names: &[String]) -> String {
    match names {
        [one] => one.clone(),
        [first, rest @ ..] => format!("product({}, {})", first, nest_product(rest)),
        [] => "affine(0)".to_string(),
    }
}

/// A space as written by a caller.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SpaceSpec {
    Atomic(Arc<Space>),
    Product(Vec<SpaceSpec>),
}

impl SpaceSpec {
    pub fn affine(r: usize) -> Self {
        SpaceSpec::Atomic(Arc::new(Space::affine(r)))
    }

    pub fn torus(r: usize) -> Self {
        SpaceSpec::Atomic(Arc::new(Space::torus(r)))
    }

    pub fn localized(f: UniPoly) -> Result<Self> {
        Ok(SpaceSpec::Atomic(Arc::new(Space::localized(f)?)))
    }

    pub fn product(factors: Vec<SpaceSpec>) -> Self {
        SpaceSpec::Product(factors)
    }

    pub fn dimension(&self) -> usize {
        match self {
            SpaceSpec::Atomic(s) => s.num_vars(),
            SpaceSpec::Product(fs) => fs.iter().map(SpaceSpec::dimension).sum(),
        }
    }

    /// Single chart computing the same algebra, when one exists.
    pub fn flatten(&self) -> Result<Arc<Space>> {
        match self {
            SpaceSpec::Atomic(s) => Ok(s.clone()),
            SpaceSpec::Product(fs) => {
                let charts = fs.iter().map(SpaceSpec::flatten).collect::<Result<Vec<_>>>()?;
                if charts.len() == 1 {
                    return Ok(charts[0].clone());
                }
                if charts.iter().any(|c| c.denominator().is_some()) {
                    return Err(Error::UnsupportedSpace(format!(
                        "{self} mixes a localized factor into a product chart"
                    )));
                }
                let laurent = charts
                    .iter()
                    .flat_map(|c| c.laurent_vars().iter().copied())
                    .collect();
                Ok(Arc::new(Space::mixed(laurent)))
            }
        }
    }
}

impl From<Space> for SpaceSpec {
    fn from(s: Space) -> Self {
        SpaceSpec::Atomic(Arc::new(s))
    }
}

impl fmt::Display for SpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceSpec::Atomic(s) => write!(f, "{s}"),
            SpaceSpec::Product(fs) => {
                let names: Vec<String> = fs.iter().map(|s| s.to_string()).collect();
                write!(f, "{}", nest_product(&names))
            }
        }
    }
}
