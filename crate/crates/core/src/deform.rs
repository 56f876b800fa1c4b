//! Twisted Atiyah algebras, the first-order deformation `D ⊕ tD` attached
//! to a closed 2-form, and the comparison with Hochschild classes.
//!
//! Elements of the deformation are stored as `u + t v` in PBW normal form.
//! Reordering `∂_j ∂_i` (`j > i`) produces `∂_i ∂_j + t ω(∂_j, ∂_i)`;
//! because `t² = 0` every correction is normal-ordered in `D` itself.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use crate::algebra::AlgebraElement;
use crate::de_rham::{exactness, Exactness, NonExactness};
use crate::diffop::{pbw_basis, DiffOperator, Filtration};
use crate::error::{Error, Result};
use crate::forms::{is_closed, DifferentialForm};
use crate::hochschild::{Cochain, Derivation};
use crate::linalg::rat;
use crate::space::{Space, SpaceSpec};
use crate::vector_field::{apply_derivation, lie_bracket, DerivationVector};

fn binomial(n: u32, k: u32) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i + 1) as i64)
}

/// A closed 2-form together with a cache of reordering corrections.
pub struct Twist {
    form: DifferentialForm,
    /// `ω(∂_j, ∂_i)` as a function, indexed `[j][i]`.
    pairing: Vec<Vec<DiffOperator>>,
    reorder: Mutex<HashMap<(Vec<u32>, Vec<u32>), DiffOperator>>,
}

impl fmt::Debug for Twist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Twist({})", self.form)
    }
}

impl Clone for Twist {
    fn clone(&self) -> Self {
        Twist {
            form: self.form.clone(),
            pairing: self.pairing.clone(),
            reorder: Mutex::new(HashMap::new()),
        }
    }
}

impl PartialEq for Twist {
    fn eq(&self, other: &Self) -> bool {
        self.form == other.form
    }
}

impl Twist {
    pub fn new(form: &DifferentialForm) -> Result<Self> {
        if form.degree() != 2 {
            return Err(Error::InvalidDegree(form.degree()));
        }
        if !is_closed(form) {
            return Err(Error::NotClosed);
        }
        let space = form.space().clone();
        let r = space.num_vars();
        let pairing = (0..r)
            .map(|j| {
                (0..r)
                    .map(|i| {
                        let v = DerivationVector::coordinate(&space, j);
                        let w = DerivationVector::coordinate(&space, i);
                        form.evaluate(&[&v, &w]).map(DiffOperator::function)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Twist {
            form: form.clone(),
            pairing,
            reorder: Mutex::new(HashMap::new()),
        })
    }

    pub fn zero(space: &Arc<Space>) -> Self {
        Self::new(&DifferentialForm::zero(space, 2)).expect("zero form is closed")
    }

    pub fn form(&self) -> &DifferentialForm {
        &self.form
    }

    pub fn space(&self) -> &Arc<Space> {
        self.form.space()
    }

    /// `t`-part of sorting the word `∂^left ∂^right` into PBW order.
    fn reorder_correction(&self, left: &[u32], right: &[u32]) -> DiffOperator {
        let key = (left.to_vec(), right.to_vec());
        if let Some(v) = self.reorder.lock().expect("cache").get(&key) {
            return v.clone();
        }
        let space = self.space();
        let mut word: Vec<usize> = Vec::new();
        for (i, &e) in left.iter().enumerate() {
            word.extend(std::iter::repeat(i).take(e as usize));
        }
        for (i, &e) in right.iter().enumerate() {
            word.extend(std::iter::repeat(i).take(e as usize));
        }
        let product = |letters: &[usize]| {
            letters
                .iter()
                .fold(DiffOperator::one(space), |acc, &i| acc.mul(&DiffOperator::partial(space, i)))
        };
        let mut total = DiffOperator::zero(space);
        // bubble sort; each swap of ∂_j ∂_i with j > i leaves t · P ω(∂_j,∂_i) S
        let n = word.len();
        for pass in 0..n {
            for p in 0..n.saturating_sub(1 + pass) {
                let (j, i) = (word[p], word[p + 1]);
                if j > i {
                    let h = &self.pairing[j][i];
                    if !h.is_zero() {
                        let term = product(&word[..p]).mul(h).mul(&product(&word[p + 2..]));
                        total = total.add(&term);
                    }
                    word.swap(p, p + 1);
                }
            }
        }
        self.reorder.lock().expect("cache").insert(key, total.clone());
        total
    }

    /// The `t`-part of `u1 · u2` in the deformed algebra.
    pub fn correction(&self, u1: &DiffOperator, u2: &DiffOperator) -> DiffOperator {
        let space = self.space();
        let r = space.num_vars();
        let mut total = DiffOperator::zero(space);
        if self.form.is_zero() {
            return total;
        }
        for (beta, f) in u1.terms() {
            for (gamma, g) in u2.terms() {
                // ∂^β g = Σ_μ C(β, μ) ∂^μ(g) ∂^{β-μ}
                let mut mu = vec![0u32; r];
                loop {
                    let mut coeff = 1i64;
                    let mut dg = g.clone();
                    for i in 0..r {
                        coeff *= binomial(beta[i], mu[i]);
                        for _ in 0..mu[i] {
                            dg = dg.partial(i);
                        }
                    }
                    if !dg.is_zero() {
                        let rest: Vec<u32> = (0..r).map(|i| beta[i] - mu[i]).collect();
                        let t = self.reorder_correction(&rest, gamma);
                        if !t.is_zero() {
                            let front = DiffOperator::function(f.mul(&dg)).scale(&rat(coeff));
                            total = total.add(&front.mul(&t));
                        }
                    }
                    // odometer over μ ≤ β
                    let mut k = 0;
                    while k < r {
                        if mu[k] < beta[k] {
                            mu[k] += 1;
                            break;
                        }
                        mu[k] = 0;
                        k += 1;
                    }
                    if k == r {
                        break;
                    }
                }
            }
        }
        total
    }
}

/// `(f, v)` in the Atiyah algebra `O ⊕ T` twisted by a closed 2-form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtiyahElement {
    pub function: AlgebraElement,
    pub vector: DerivationVector,
    pub twist: DifferentialForm,
}

impl AtiyahElement {
    pub fn new(function: AlgebraElement, vector: DerivationVector, twist: DifferentialForm) -> Result<Self> {
        if function.space() != vector.space() || twist.space() != function.space() {
            return Err(Error::SpaceMismatch);
        }
        if twist.degree() != 2 {
            return Err(Error::InvalidDegree(twist.degree()));
        }
        if !is_closed(&twist) {
            return Err(Error::NotClosed);
        }
        Ok(AtiyahElement { function, vector, twist })
    }
}

/// `[(f, v), (g, w)] = (v(g) - w(f) + ω(v, w), [v, w])`.
pub fn atiyah_bracket(a: &AtiyahElement, b: &AtiyahElement) -> Result<AtiyahElement> {
    if a.twist != b.twist {
        return Err(Error::TwistMismatch);
    }
    let function = apply_derivation(&a.vector, &b.function)?
        .sub(&apply_derivation(&b.vector, &a.function)?)
        .add(&a.twist.evaluate(&[&a.vector, &b.vector])?);
    Ok(AtiyahElement {
        function,
        vector: lie_bracket(&a.vector, &b.vector)?,
        twist: a.twist.clone(),
    })
}

/// `body + t · tangent` in `D_{tω} = D ⊕ tD`.
#[derive(Clone, Debug)]
pub struct DeformedOperator {
    twist: Arc<Twist>,
    pub body: DiffOperator,
    pub tangent: DiffOperator,
}

impl PartialEq for DeformedOperator {
    fn eq(&self, other: &Self) -> bool {
        self.twist == other.twist && self.body == other.body && self.tangent == other.tangent
    }
}

impl DeformedOperator {
    pub fn new(twist: &Arc<Twist>, body: DiffOperator, tangent: DiffOperator) -> Result<Self> {
        if body.space() != twist.space() || tangent.space() != twist.space() {
            return Err(Error::SpaceMismatch);
        }
        Ok(DeformedOperator {
            twist: twist.clone(),
            body,
            tangent,
        })
    }

    /// `u + t·0`.
    pub fn lift(twist: &Arc<Twist>, body: DiffOperator) -> Result<Self> {
        let zero = DiffOperator::zero(body.space());
        Self::new(twist, body, zero)
    }

    /// `t · v`.
    pub fn infinitesimal(twist: &Arc<Twist>, tangent: DiffOperator) -> Result<Self> {
        let zero = DiffOperator::zero(tangent.space());
        Self::new(twist, zero, tangent)
    }

    pub fn twist(&self) -> &Arc<Twist> {
        &self.twist
    }

    pub fn is_zero(&self) -> bool {
        self.body.is_zero() && self.tangent.is_zero()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.twist != other.twist {
            return Err(Error::TwistMismatch);
        }
        Self::new(&self.twist, self.body.add(&other.body), self.tangent.add(&other.tangent))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.twist != other.twist {
            return Err(Error::TwistMismatch);
        }
        Self::new(&self.twist, self.body.sub(&other.body), self.tangent.sub(&other.tangent))
    }
}

impl fmt::Display for DeformedOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) + t*({})", self.body, self.tangent)
    }
}

/// `(u1 + t v1)(u2 + t v2) = u1 u2 + t (u1 v2 + v1 u2 + c(u1, u2))` with
/// `c` the reordering correction of the twist.
pub fn deformed_multiply(a: &DeformedOperator, b: &DeformedOperator) -> Result<DeformedOperator> {
    if a.twist != b.twist {
        return Err(Error::TwistMismatch);
    }
    let body = a.body.mul(&b.body);
    let tangent = a
        .body
        .mul(&b.tangent)
        .add(&a.tangent.mul(&b.body))
        .add(&a.twist.correction(&a.body, &b.body));
    DeformedOperator::new(&a.twist, body, tangent)
}

/// A product on `D ⊕ tD`, pluggable into [`verify_singular_extension_with`].
pub type Product<'a> = &'a (dyn Fn(&DeformedOperator, &DeformedOperator) -> Result<DeformedOperator> + Sync);

/// Projection `σ(u + tv) = u`, PBW section `ρ(u) = u + t·0` and inclusion
/// `ι(v) = t v`, checked against the extension axioms within `bound`.
#[derive(Clone, Debug)]
pub struct SingularExtensionWitness {
    twist: Arc<Twist>,
    pub bound: Filtration,
}

impl SingularExtensionWitness {
    pub fn twist(&self) -> &Arc<Twist> {
        &self.twist
    }

    pub fn sigma(&self, a: &DeformedOperator) -> DiffOperator {
        a.body.clone()
    }

    pub fn rho(&self, u: &DiffOperator) -> DeformedOperator {
        DeformedOperator::lift(&self.twist, u.clone()).expect("same space")
    }

    pub fn iota(&self, v: &DiffOperator) -> DeformedOperator {
        DeformedOperator::infinitesimal(&self.twist, v.clone()).expect("same space")
    }
}

pub fn verify_singular_extension(
    spec: &SpaceSpec,
    omega: &DifferentialForm,
    bound: Filtration,
) -> Result<SingularExtensionWitness> {
    verify_singular_extension_with(spec, omega, bound, &deformed_multiply)
}

/// Checks, on PBW basis elements within `bound`: `σ` is multiplicative,
/// `σρ = id`, `ι(D)` squares to zero, the bimodule structure on `tD` is the
/// untwisted one, and the product is associative.
pub fn verify_singular_extension_with(
    spec: &SpaceSpec,
    omega: &DifferentialForm,
    bound: Filtration,
    product: Product<'_>,
) -> Result<SingularExtensionWitness> {
    let space = spec.flatten()?;
    if omega.space() != &space {
        return Err(Error::SpaceMismatch);
    }
    let witness = SingularExtensionWitness {
        twist: Arc::new(Twist::new(omega)?),
        bound,
    };
    let basis: Vec<DiffOperator> = pbw_basis(&space, bound).iter().map(|m| m.to_operator(&space)).collect();
    let fail = |axiom| Err(Error::ExtensionAxiomFailure(axiom));
    for u in &basis {
        if &witness.sigma(&witness.rho(u)) != u {
            return fail("section");
        }
    }
    for a in &basis {
        for b in &basis {
            let (ra, rb, ia, ib) = (witness.rho(a), witness.rho(b), witness.iota(a), witness.iota(b));
            let ab = a.mul(b);
            if witness.sigma(&product(&ra, &rb)?) != ab {
                return fail("projection is multiplicative");
            }
            if !product(&ia, &ib)?.is_zero() {
                return fail("square-zero ideal");
            }
            if product(&ra, &ib)? != witness.iota(&ab) || product(&ia, &rb)? != witness.iota(&ab) {
                return fail("bimodule structure");
            }
        }
    }
    let lifted: Vec<DeformedOperator> = basis.iter().map(|u| witness.rho(u)).collect();
    for a in &lifted {
        for b in &lifted {
            let ab = product(a, b)?;
            for c in &lifted {
                if product(&ab, c)? != product(a, &product(b, c)?)? {
                    return fail("associativity");
                }
            }
        }
    }
    Ok(witness)
}

/// `ω(ρ)(a, b) = ρ(a)ρ(b) - ρ(ab)`, tabulated on PBW pairs within `bound`.
/// Evaluating outside `bound` gives [`Error::BoundExceeded`].
pub fn extension_cocycle(w: &SingularExtensionWitness, bound: Filtration) -> Result<Cochain> {
    let space = w.twist.space().clone();
    let basis = pbw_basis(&space, bound);
    let mut values = Vec::new();
    for a in &basis {
        for b in &basis {
            let (ua, ub) = (a.to_operator(&space), b.to_operator(&space));
            let prod = deformed_multiply(&w.rho(&ua), &w.rho(&ub))?;
            let value = prod.sub(&w.rho(&ua.mul(&ub)))?;
            values.push((vec![a.clone(), b.clone()], value.tangent));
        }
    }
    Cochain::tabulated(&space, 2, bound, values)
}

/// The derivation `x_i ↦ 0, ∂_i ↦ λ(∂_i)` of a closed 1-form.
pub fn c1_derivation(lambda: &DifferentialForm) -> Result<Derivation> {
    if lambda.degree() != 1 {
        return Err(Error::InvalidDegree(lambda.degree()));
    }
    if !is_closed(lambda) {
        return Err(Error::NotClosed);
    }
    let space = lambda.space().clone();
    let r = space.num_vars();
    let partials = (0..r)
        .map(|i| DiffOperator::function(lambda.coefficient(&[i])))
        .collect();
    Derivation::new(&space, vec![DiffOperator::zero(&space); r], partials, None)
}

/// The Hochschild 2-cocycle `(a, b) ↦ ρ(a)ρ(b) - ρ(ab)` of `D_{tω}`.
pub fn c2_cocycle(spec: &SpaceSpec, omega: &DifferentialForm) -> Result<Cochain> {
    let space = spec.flatten()?;
    if omega.space() != &space {
        return Err(Error::SpaceMismatch);
    }
    let twist = Arc::new(Twist::new(omega)?);
    Ok(Cochain::from_fn(&space, 2, move |args| {
        Ok(twist.correction(&args[0], &args[1]))
    }))
}

/// The 1-cochain `η_β`: the `t`-part of `f Π (∂_i + t β(∂_i))^{β_i}`
/// computed in the untwisted extension.
pub fn potential_cochain(beta: &DifferentialForm) -> Result<Cochain> {
    if beta.degree() != 1 {
        return Err(Error::InvalidDegree(beta.degree()));
    }
    let rule = potential_rule(beta)?;
    Ok(Cochain::from_fn(beta.space(), 1, move |args| Ok(rule.apply(&args[0]))))
}

fn potential_rule(beta: &DifferentialForm) -> Result<Derivation> {
    let space = beta.space().clone();
    let r = space.num_vars();
    let partials = (0..r).map(|i| DiffOperator::function(beta.coefficient(&[i]))).collect();
    // not a derivation unless dβ = 0; only the word-by-word rule is used
    Derivation::unchecked(&space, vec![DiffOperator::zero(&space); r], partials, None)
}

type Correction = Arc<dyn Fn(&DiffOperator) -> DiffOperator + Send + Sync>;

/// `u + t v ↦ u + t (η(u) + v)` from one first-order extension to another.
#[derive(Clone)]
pub struct EquivalenceMap {
    space: Arc<Space>,
    correction: Correction,
}

impl fmt::Debug for EquivalenceMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("EquivalenceMap")
    }
}

impl EquivalenceMap {
    pub fn identity(space: &Arc<Space>) -> Self {
        let s = space.clone();
        Self::from_fn(space, move |_| DiffOperator::zero(&s))
    }

    pub fn from_fn(space: &Arc<Space>, eta: impl Fn(&DiffOperator) -> DiffOperator + Send + Sync + 'static) -> Self {
        EquivalenceMap {
            space: space.clone(),
            correction: Arc::new(eta),
        }
    }

    pub fn correction(&self, u: &DiffOperator) -> DiffOperator {
        (self.correction)(u)
    }

    /// Image of `a`, landing in the extension twisted by `target`.
    pub fn apply(&self, a: &DeformedOperator, target: &Arc<Twist>) -> Result<DeformedOperator> {
        DeformedOperator::new(target, a.body.clone(), self.correction(&a.body).add(&a.tangent))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &EquivalenceMap) -> EquivalenceMap {
        let (f, g) = (self.correction.clone(), other.correction.clone());
        Self::from_fn(&self.space, move |u| f(u).add(&g(u)))
    }

    /// Agreement with `other` on `u + t v` for PBW basis elements within `bound`.
    pub fn agrees_with(&self, other: &EquivalenceMap, bound: Filtration) -> bool {
        pbw_basis(&self.space, bound).iter().all(|m| {
            let u = m.to_operator(&self.space);
            self.correction(&u) == other.correction(&u)
        })
    }

    /// `φ(ab) = φ(a)φ(b)` for lifts of PBW basis elements within `bound`,
    /// from the `source` twist to the `target` twist. Products involving an
    /// infinitesimal `tv` hold for every `η` since `t² = 0`, so only lifts
    /// are compared.
    pub fn is_multiplicative(&self, source: &Arc<Twist>, target: &Arc<Twist>, bound: Filtration) -> Result<bool> {
        let lifts = pbw_basis(&self.space, bound)
            .iter()
            .map(|m| DeformedOperator::lift(source, m.to_operator(&self.space)))
            .collect::<Result<Vec<_>>>()?;
        let images = lifts
            .iter()
            .map(|a| self.apply(a, target))
            .collect::<Result<Vec<_>>>()?;
        for (a, fa) in lifts.iter().zip(&images) {
            for (b, fb) in lifts.iter().zip(&images) {
                let lhs = self.apply(&deformed_multiply(a, b)?, target)?;
                if lhs != deformed_multiply(fa, fb)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Outcome of comparing `D_{tω}` with the trivial extension.
#[derive(Clone, Debug)]
pub enum Trivialization {
    /// `dβ = ω` and `φ = id + t η_β` is a verified isomorphism
    /// `D_{tω} → D ⊕ tD`.
    Trivial { potential: DifferentialForm, map: EquivalenceMap },
    /// `[ω] ≠ 0`, with the de Rham certificate.
    NonTrivial(NonExactness),
}

impl Trivialization {
    pub fn is_trivial(&self) -> bool {
        matches!(self, Trivialization::Trivial { .. })
    }
}

pub fn trivialize_deformation(
    spec: &SpaceSpec,
    omega: &DifferentialForm,
    bound: Filtration,
) -> Result<Trivialization> {
    let space = spec.flatten()?;
    if omega.space() != &space {
        return Err(Error::SpaceMismatch);
    }
    let source = Arc::new(Twist::new(omega)?);
    let beta = if omega.is_zero() {
        DifferentialForm::zero(&space, 1)
    } else {
        match exactness(omega)? {
            Exactness::Exact(beta) => beta,
            Exactness::NotExact(cert) => return Ok(Trivialization::NonTrivial(cert)),
        }
    };
    let rule = potential_rule(&beta)?;
    let map = EquivalenceMap::from_fn(&space, move |u| rule.apply(u));
    let target = Arc::new(Twist::zero(&space));
    if !map.is_multiplicative(&source, &target, bound)? {
        return Err(Error::ExtensionAxiomFailure("trivialization is multiplicative"));
    }
    Ok(Trivialization::Trivial { potential: beta, map })
}

/// `x + t y ↦ x + t (d(x) + y)` on the trivial extension.
pub fn derivation_to_automorphism(d: &Derivation, bound: Filtration) -> Result<EquivalenceMap> {
    if let Some(relation) = d.violated_relation() {
        return Err(Error::NotADerivation(relation));
    }
    let space = d.space().clone();
    let d = d.clone();
    let map = EquivalenceMap::from_fn(&space, move |u| d.apply(u));
    let trivial = Arc::new(Twist::zero(&space));
    if !map.is_multiplicative(&trivial, &trivial, bound)? {
        return Err(Error::NotADerivation("Leibniz rule".into()));
    }
    Ok(map)
}
