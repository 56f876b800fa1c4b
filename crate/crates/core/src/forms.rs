//! Differential forms `Σ a_I dx_I` and the exterior derivative.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::Zero;

use crate::algebra::AlgebraElement;
use crate::error::{Error, Result};
use crate::linalg::{rat, Rational};
use crate::space::Space;
use crate::vector_field::DerivationVector;

/// A `k`-form; index tuples are strictly increasing and 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DifferentialForm {
    space: Arc<Space>,
    degree: usize,
    coefficients: BTreeMap<Vec<usize>, AlgebraElement>,
}

/// Sign of the permutation sorting `idx`, or `None` if an index repeats.
fn sort_sign(idx: &mut [usize]) -> Option<i64> {
    let mut sign = 1;
    for i in 0..idx.len() {
        for j in 0..idx.len() - 1 - i {
            if idx[j] == idx[j + 1] {
                return None;
            }
            if idx[j] > idx[j + 1] {
                idx.swap(j, j + 1);
                sign = -sign;
            }
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some(sign)
}

impl DifferentialForm {
    pub fn zero(space: &Arc<Space>, degree: usize) -> Self {
        DifferentialForm {
            space: space.clone(),
            degree,
            coefficients: BTreeMap::new(),
        }
    }

    /// `a · dx_{i_1} ∧ … ∧ dx_{i_k}` for arbitrary (unsorted) indices.
    pub fn term(a: AlgebraElement, indices: &[usize]) -> Result<Self> {
        let space = a.space().clone();
        if indices.len() > space.num_vars() || indices.iter().any(|i| *i >= space.num_vars()) {
            return Err(Error::InvalidDegree(indices.len()));
        }
        let mut form = Self::zero(&space, indices.len());
        let mut idx = indices.to_vec();
        if let Some(sign) = sort_sign(&mut idx) {
            form.add_term(idx, a.scale(&rat(sign)));
        }
        Ok(form)
    }

    pub fn function(a: AlgebraElement) -> Self {
        Self::term(a, &[]).expect("0-form")
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coefficients(&self) -> &BTreeMap<Vec<usize>, AlgebraElement> {
        &self.coefficients
    }

    pub fn coefficient(&self, idx: &[usize]) -> AlgebraElement {
        self.coefficients
            .get(idx)
            .cloned()
            .unwrap_or_else(|| AlgebraElement::zero(&self.space))
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    fn add_term(&mut self, idx: Vec<usize>, a: AlgebraElement) {
        if a.is_zero() {
            return;
        }
        let sum = match self.coefficients.remove(&idx) {
            Some(old) => old.add(&a),
            None => a,
        };
        if !sum.is_zero() {
            self.coefficients.insert(idx, sum);
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch);
        }
        if self.degree != other.degree {
            return Err(Error::InvalidDegree(other.degree));
        }
        let mut out = self.clone();
        for (idx, a) in &other.coefficients {
            out.add_term(idx.clone(), a.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = Self::zero(&self.space, self.degree);
        if c.is_zero() {
            return out;
        }
        for (idx, a) in &self.coefficients {
            out.add_term(idx.clone(), a.scale(c));
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&rat(-1)))
    }

    /// `φ(v_1, …, v_k) = Σ_I a_I det(v_j(x_{I_l}))`.
    pub fn evaluate(&self, vectors: &[&DerivationVector]) -> Result<AlgebraElement> {
        if vectors.len() != self.degree {
            return Err(Error::InvalidDegree(vectors.len()));
        }
        if vectors.iter().any(|v| v.space() != &self.space) {
            return Err(Error::SpaceMismatch);
        }
        let mut total = AlgebraElement::zero(&self.space);
        for (idx, a) in &self.coefficients {
            let det = determinant(
                &idx.iter()
                    .map(|&i| vectors.iter().map(|v| v.component(i).clone()).collect())
                    .collect::<Vec<Vec<_>>>(),
                &self.space,
            );
            total = total.add(&a.mul(&det));
        }
        Ok(total)
    }

    /// Wedge product with a 1-form-free helper for `dx_j ∧ self`.
    fn wedge_dx(&self, j: usize, a: &AlgebraElement) -> Self {
        let mut out = Self::zero(&self.space, self.degree + 1);
        for (idx, c) in &self.coefficients {
            let mut full = Vec::with_capacity(idx.len() + 1);
            full.push(j);
            full.extend_from_slice(idx);
            if let Some(sign) = sort_sign(&mut full) {
                out.add_term(full, c.mul(a).scale(&rat(sign)));
            }
        }
        out
    }

    /// Interior product with `x_i ∂_i`, the contracting step of the Euler homotopy.
    pub(crate) fn contract_euler(&self, i: usize) -> Self {
        let x = AlgebraElement::variable(&self.space, i);
        let mut out = Self::zero(&self.space, self.degree.saturating_sub(1));
        for (idx, a) in &self.coefficients {
            if let Some(pos) = idx.iter().position(|k| *k == i) {
                let mut rest = idx.clone();
                rest.remove(pos);
                let sign = if pos % 2 == 0 { 1 } else { -1 };
                out.add_term(rest, a.mul(&x).scale(&rat(sign)));
            }
        }
        out
    }
}

fn determinant(m: &[Vec<AlgebraElement>], space: &Arc<Space>) -> AlgebraElement {
    let n = m.len();
    if n == 0 {
        return AlgebraElement::one(space);
    }
    // Laplace expansion along the first row; forms here have degree <= r.
    let mut total = AlgebraElement::zero(space);
    for col in 0..n {
        if m[0][col].is_zero() {
            continue;
        }
        let minor: Vec<Vec<AlgebraElement>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(c, _)| *c != col)
                    .map(|(_, v)| v.clone())
                    .collect()
            })
            .collect();
        let term = m[0][col].mul(&determinant(&minor, space));
        total = if col % 2 == 0 { total.add(&term) } else { total.sub(&term) };
    }
    total
}

/// Exterior derivative `d(a dx_I) = Σ_j ∂_j a dx_j ∧ dx_I`.
pub fn de_rham_d(form: &DifferentialForm) -> Result<DifferentialForm> {
    let r = form.space.num_vars();
    if form.degree >= r {
        return Err(Error::DegreeOverflow {
            degree: form.degree,
            dim: r,
        });
    }
    let mut out = DifferentialForm::zero(&form.space, form.degree + 1);
    for (idx, a) in &form.coefficients {
        let single = {
            let mut f = DifferentialForm::zero(&form.space, form.degree);
            f.coefficients.insert(idx.clone(), AlgebraElement::one(&form.space));
            f
        };
        for j in 0..r {
            let da = a.partial(j);
            if da.is_zero() {
                continue;
            }
            out = out.add(&single.wedge_dx(j, &da))?;
        }
    }
    Ok(out)
}

pub fn is_closed(form: &DifferentialForm) -> bool {
    form.degree() >= form.space().num_vars() || de_rham_d(form).is_ok_and(|d| d.is_zero())
}

impl fmt::Display for DifferentialForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .coefficients
            .iter()
            .map(|(idx, a)| {
                let wedge = idx
                    .iter()
                    .map(|i| format!("dx{}", i + 1))
                    .collect::<Vec<_>>()
                    .join("^");
                let single = a.terms().len() == 1;
                match (wedge.is_empty(), single, a.as_constant()) {
                    (true, _, _) => a.to_string(),
                    (false, _, Some(c)) if c == rat(1) => wedge,
                    (false, _, Some(c)) if c == rat(-1) => format!("-{wedge}"),
                    (false, true, _) => format!("{a} {wedge}"),
                    (false, false, _) => format!("({a}) {wedge}"),
                }
            })
            .collect();
        let mut out = String::new();
        for p in parts {
            if out.is_empty() {
                out.push_str(&p);
            } else if let Some(rest) = p.strip_prefix('-') {
                out.push_str(" - ");
                out.push_str(rest);
            } else {
                out.push_str(" + ");
                out.push_str(&p);
            }
        }
        f.write_str(&out)
    }
}
