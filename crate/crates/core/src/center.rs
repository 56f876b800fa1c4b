//! Truncated center of `D(A)` and explicit commutator expressions for
//! elements of `D(A)`.

use num_traits::Zero;

use crate::algebra::AlgebraElement;
use crate::diffop::{commutator, pbw_basis, DiffOperator, Filtration, PbwMonomial};
use crate::error::{Error, Result};
use crate::koszul::AdTable;
use crate::linalg::{kernel_basis, rat};
use crate::space::{CoeffKey, SpaceSpec};
use crate::windowed::{matrix, RowIndex};

/// Basis of `{z within bound : [z, x_i] = [z, ∂_i] = 0}`.
///
/// The center of `D(A)` is the constants for every connected chart, so any
/// other outcome is reported as [`Error::CenterMismatch`].
pub fn center_truncated(spec: &SpaceSpec, bound: Filtration) -> Result<Vec<DiffOperator>> {
    let space = spec.flatten()?;
    let r = space.num_vars();
    let basis = pbw_basis(&space, bound);
    let mut ad = AdTable::new(&space);
    let mut rows: RowIndex<(usize, PbwMonomial)> = RowIndex::new();
    let cols: Vec<_> = basis
        .iter()
        .map(|m| {
            let image: Vec<_> = (0..2 * r)
                .flat_map(|g| {
                    ad.apply(g, m)
                        .into_iter()
                        .map(move |(mm, c)| ((g, mm), c))
                })
                .collect();
            rows.column(image)
        })
        .collect();
    let kernel = kernel_basis(&matrix(rows.len(), &cols));
    let center: Vec<DiffOperator> = kernel
        .basis()
        .iter()
        .map(|v| {
            let entries: Vec<_> = v.entries().iter().map(|(j, c)| (&basis[*j], c)).collect();
            DiffOperator::from_monomials(&space, entries)
        })
        .collect();
    let is_constants = center.len() == 1
        && center[0]
            .as_function()
            .and_then(|a| a.as_constant())
            .is_some_and(|c| !c.is_zero());
    if !is_constants {
        return Err(Error::CenterMismatch(center.len()));
    }
    Ok(center)
}

/// Writes `u` as `Σ [p_k, q_k]`, one commutator per PBW monomial.
///
/// `x^α ∂^β = [∂_i, x^{α+e_i} ∂^β] / (α_i + 1)` whenever some `α_i ≠ -1`;
/// otherwise `x^α ∂^β = [x_i, -x^α ∂^{β+e_i} / (β_i + 1)]`, which also
/// covers coefficients with a pole along `f`.
pub fn commutator_reduction(u: &DiffOperator) -> Result<Vec<(DiffOperator, DiffOperator)>> {
    let space = u.space().clone();
    let r = space.num_vars();
    if r == 0 {
        return Err(Error::ReductionFailure(u.to_string()));
    }
    let mut pairs = Vec::new();
    for (m, c) in u.monomials() {
        let by_partial = if m.coeff.pole == 0 {
            m.coeff.exps.iter().position(|a| *a != -1)
        } else {
            None
        };
        let pair = match by_partial {
            Some(i) => {
                let mut exps = m.coeff.exps.clone();
                exps[i] += 1;
                let scale = c / rat(m.coeff.exps[i] as i64 + 1);
                let q = DiffOperator::term(
                    AlgebraElement::from_key(&space, &CoeffKey::monomial(exps), scale),
                    m.dexp.clone(),
                );
                (DiffOperator::partial(&space, i), q)
            }
            None => {
                let i = 0;
                let mut dexp = m.dexp.clone();
                dexp[i] += 1;
                let scale = -c / rat(m.dexp[i] as i64 + 1);
                let q = DiffOperator::term(AlgebraElement::from_key(&space, &m.coeff, scale), dexp);
                (DiffOperator::coordinate(&space, i), q)
            }
        };
        pairs.push(pair);
    }
    let total = pairs.iter().try_fold(DiffOperator::zero(&space), |acc, (p, q)| {
        commutator(p, q).map(|c| acc.add(&c))
    })?;
    if &total != u {
        return Err(Error::ReductionFailure(u.to_string()));
    }
    Ok(pairs)
}

/// True when every PBW monomial within `bound` reduces to commutators.
pub fn commutators_span(spec: &SpaceSpec, bound: Filtration) -> Result<bool> {
    let space = spec.flatten()?;
    for m in pbw_basis(&space, bound) {
        commutator_reduction(&m.to_operator(&space))?;
    }
    Ok(true)
}
