//! Bar-complex cochains `Hom_K(D^{⊗n}, D)`.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::diffop::{pbw_basis, DiffOperator, Filtration, PbwMonomial};
use crate::error::{Error, Result};
use crate::linalg::{rat, Rational};
use crate::space::Space;

type Rule = Arc<dyn Fn(&[DiffOperator]) -> Result<DiffOperator> + Send + Sync>;

#[derive(Clone)]
enum Representation {
    /// Values on PBW basis tuples inside `bound`; absent tuples map to zero.
    Tabulated {
        bound: Filtration,
        values: HashMap<Vec<PbwMonomial>, DiffOperator>,
    },
    Structural(Rule),
}

/// A multilinear map `D^{⊗arity} → D`.
#[derive(Clone)]
pub struct Cochain {
    space: Arc<Space>,
    arity: usize,
    repr: Representation,
}

impl fmt::Debug for Cochain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.repr {
            Representation::Tabulated { bound, values } => {
                format!("tabulated({} values within {:?})", values.len(), bound)
            }
            Representation::Structural(_) => "structural".to_string(),
        };
        f.debug_struct("Cochain")
            .field("arity", &self.arity)
            .field("repr", &kind)
            .finish()
    }
}

impl Cochain {
    /// A cochain given by a rule on arbitrary arguments.
    pub fn from_fn(
        space: &Arc<Space>,
        arity: usize,
        rule: impl Fn(&[DiffOperator]) -> Result<DiffOperator> + Send + Sync + 'static,
    ) -> Self {
        Cochain {
            space: space.clone(),
            arity,
            repr: Representation::Structural(Arc::new(rule)),
        }
    }

    /// A cochain tabulated on basis tuples within `bound`.
    pub fn tabulated(
        space: &Arc<Space>,
        arity: usize,
        bound: Filtration,
        values: impl IntoIterator<Item = (Vec<PbwMonomial>, DiffOperator)>,
    ) -> Result<Self> {
        let mut table = HashMap::new();
        for (args, value) in values {
            if args.len() != arity {
                return Err(Error::InvalidDegree(args.len()));
            }
            if args.iter().any(|m| !bound.contains(&m.filtration(space))) {
                return Err(Error::BoundExceeded);
            }
            if value.space() != space {
                return Err(Error::SpaceMismatch);
            }
            if !value.is_zero() {
                table.insert(args, value);
            }
        }
        Ok(Cochain {
            space: space.clone(),
            arity,
            repr: Representation::Tabulated {
                bound,
                values: table,
            },
        })
    }

    /// The 0-cochain with value `m`.
    pub fn constant(m: DiffOperator) -> Self {
        let space = m.space().clone();
        Self::from_fn(&space, 0, move |_| Ok(m.clone()))
    }

    pub fn zero(space: &Arc<Space>, arity: usize) -> Self {
        let s = space.clone();
        Self::from_fn(space, arity, move |_| Ok(DiffOperator::zero(&s)))
    }

    /// The identity map `D → D`.
    pub fn identity(space: &Arc<Space>) -> Self {
        Self::from_fn(space, 1, |args| Ok(args[0].clone()))
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn bound(&self) -> Option<Filtration> {
        match &self.repr {
            Representation::Tabulated { bound, .. } => Some(*bound),
            Representation::Structural(_) => None,
        }
    }

    pub fn is_tabulated(&self) -> bool {
        self.bound().is_some()
    }

    pub fn evaluate(&self, args: &[DiffOperator]) -> Result<DiffOperator> {
        if args.len() != self.arity {
            return Err(Error::InvalidDegree(args.len()));
        }
        if args.iter().any(|a| a.space() != &self.space) {
            return Err(Error::SpaceMismatch);
        }
        match &self.repr {
            Representation::Structural(rule) => rule(args),
            Representation::Tabulated { bound, values } => {
                let expanded: Vec<Vec<(PbwMonomial, Rational)>> =
                    args.iter().map(DiffOperator::monomials).collect();
                for terms in &expanded {
                    if terms.iter().any(|(m, _)| !bound.contains(&m.filtration(&self.space))) {
                        return Err(Error::BoundExceeded);
                    }
                }
                let mut total = DiffOperator::zero(&self.space);
                for_each_tuple(&expanded, &mut |tuple, coeff| {
                    if let Some(v) = values.get(tuple) {
                        total = total.add(&v.scale(coeff));
                    }
                });
                Ok(total)
            }
        }
    }

    /// Evaluates on PBW basis monomials.
    pub fn evaluate_basis(&self, args: &[PbwMonomial]) -> Result<DiffOperator> {
        let ops: Vec<DiffOperator> = args.iter().map(|m| m.to_operator(&self.space)).collect();
        self.evaluate(&ops)
    }

    /// Tabulates this cochain on every basis tuple within `bound`.
    pub fn tabulate(&self, bound: Filtration) -> Result<Cochain> {
        let basis = pbw_basis(&self.space, bound);
        let mut values = Vec::new();
        let mut tuple = Vec::with_capacity(self.arity);
        let mut stack = vec![0usize; self.arity];
        loop {
            tuple.clear();
            tuple.extend(stack.iter().map(|&i| basis[i].clone()));
            values.push((tuple.clone(), self.evaluate_basis(&tuple)?));
            // odometer over basis^arity
            let mut pos = self.arity;
            loop {
                if pos == 0 {
                    return Cochain::tabulated(&self.space, self.arity, bound, values);
                }
                pos -= 1;
                stack[pos] += 1;
                if stack[pos] < basis.len() {
                    break;
                }
                stack[pos] = 0;
            }
        }
    }

    pub fn add(&self, other: &Cochain) -> Result<Cochain> {
        self.combine(other, rat(1))
    }

    pub fn sub(&self, other: &Cochain) -> Result<Cochain> {
        self.combine(other, rat(-1))
    }

    fn combine(&self, other: &Cochain, c: Rational) -> Result<Cochain> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch);
        }
        if self.arity != other.arity {
            return Err(Error::InvalidDegree(other.arity));
        }
        let (f, g) = (self.clone(), other.clone());
        Ok(Cochain::from_fn(&self.space, self.arity, move |args| {
            Ok(f.evaluate(args)?.add(&g.evaluate(args)?.scale(&c)))
        }))
    }
}

/// Calls `visit` on every tuple drawn from `choices`, with the product of
/// the chosen coefficients.
fn for_each_tuple(
    choices: &[Vec<(PbwMonomial, Rational)>],
    visit: &mut dyn FnMut(&[PbwMonomial], &Rational),
) {
    fn go(
        choices: &[Vec<(PbwMonomial, Rational)>],
        i: usize,
        tuple: &mut Vec<PbwMonomial>,
        coeff: Rational,
        visit: &mut dyn FnMut(&[PbwMonomial], &Rational),
    ) {
        if i == choices.len() {
            visit(tuple, &coeff);
            return;
        }
        for (m, c) in &choices[i] {
            tuple.push(m.clone());
            go(choices, i + 1, tuple, &coeff * c, visit);
            tuple.pop();
        }
    }
    go(choices, 0, &mut Vec::new(), rat(1), visit);
}

/// `δf(a_0,…,a_n) = a_0 f(a_1,…) + Σ_{i=1}^{n} (-1)^i f(…, a_{i-1}a_i, …)
///                 + (-1)^{n+1} f(…, a_{n-1}) a_n`.
pub fn delta_cochain(f: &Cochain) -> Cochain {
    let n = f.arity;
    let g = f.clone();
    Cochain::from_fn(&f.space, n + 1, move |a| {
        let mut total = a[0].mul(&g.evaluate(&a[1..])?);
        for i in 1..=n {
            let mut merged: Vec<DiffOperator> = Vec::with_capacity(n);
            merged.extend_from_slice(&a[..i - 1]);
            merged.push(a[i - 1].mul(&a[i]));
            merged.extend_from_slice(&a[i + 1..]);
            let term = g.evaluate(&merged)?;
            total = if i % 2 == 0 { total.add(&term) } else { total.sub(&term) };
        }
        let last = g.evaluate(&a[..n])?.mul(&a[n]);
        total = if (n + 1) % 2 == 0 { total.add(&last) } else { total.sub(&last) };
        Ok(total)
    })
}

/// `(f ⌣ g)(a_1,…,a_{m+n}) = f(a_1,…,a_m) · g(a_{m+1},…,a_{m+n})`.
pub fn cup(f: &Cochain, g: &Cochain) -> Result<Cochain> {
    if f.space != g.space {
        return Err(Error::SpaceMismatch);
    }
    let (m, n) = (f.arity, g.arity);
    let (f, g) = (f.clone(), g.clone());
    Ok(Cochain::from_fn(&f.space.clone(), m + n, move |a| {
        Ok(f.evaluate(&a[..m])?.mul(&g.evaluate(&a[m..])?))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a1() -> Arc<Space> {
        Arc::new(Space::affine(1))
    }

    #[test]
    fn degree_zero_differential_is_commutator() {
        let s = a1();
        let m = DiffOperator::partial(&s, 0);
        let a = DiffOperator::coordinate(&s, 0);
        let dm = delta_cochain(&Cochain::constant(m.clone()));
        assert_eq!(dm.evaluate(&[a.clone()]).unwrap(), a.mul(&m).sub(&m.mul(&a)));
    }

    #[test]
    fn differential_of_identity_is_product() {
        let s = a1();
        let a = DiffOperator::partial(&s, 0);
        let b = DiffOperator::coordinate(&s, 0).add(&a);
        let di = delta_cochain(&Cochain::identity(&s));
        assert_eq!(di.evaluate(&[a.clone(), b.clone()]).unwrap(), a.mul(&b));
    }

    #[test]
    fn tabulated_matches_structural_and_enforces_bound() {
        let s = a1();
        let id = Cochain::identity(&s);
        let tab = id.tabulate(Filtration::square(2)).unwrap();
        let u = DiffOperator::coordinate(&s, 0).mul(&DiffOperator::partial(&s, 0));
        assert_eq!(tab.evaluate(&[u.clone()]).unwrap(), u);
        let big = u.pow(3);
        assert!(matches!(tab.evaluate(&[big]), Err(Error::BoundExceeded)));
    }

    #[test]
    fn cup_of_constants_is_product() {
        let s = a1();
        let u = DiffOperator::partial(&s, 0);
        let v = DiffOperator::coordinate(&s, 0);
        let c = cup(&Cochain::constant(u.clone()), &Cochain::constant(v.clone())).unwrap();
        assert_eq!(c.arity(), 0);
        assert_eq!(c.evaluate(&[]).unwrap(), u.mul(&v));
    }
}
