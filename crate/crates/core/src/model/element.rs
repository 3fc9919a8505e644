use std::collections::BTreeMap;
use std::sync::Arc;

use super::{Model, ModelKind};
use crate::coefficient::CoefficientElement;
use crate::error::{Error, Result};
use crate::group::Word;
use crate::scalar::Scalar;

/// A finitely supported element `Σ_γ a_γ b_γ` of a model algebra.
///
/// Zero coefficients are never stored. UHF elements are kept at the lowest
/// level of the tower that contains them, so equal elements have equal terms.
#[derive(Debug, Clone)]
pub struct AlgebraElement<S> {
    model: Arc<Model>,
    terms: BTreeMap<Word, CoefficientElement<S>>,
}

impl<S: Scalar> PartialEq for AlgebraElement<S> {
    fn eq(&self, other: &Self) -> bool {
        self.same_model(other) && self.terms == other.terms
    }
}

impl<S: Scalar> AlgebraElement<S> {
    pub fn zero(model: &Arc<Model>) -> Self {
        AlgebraElement { model: model.clone(), terms: BTreeMap::new() }
    }

    pub fn one(model: &Arc<Model>) -> Self {
        Self::scalar_term(model, model.identity_index(), S::one()).expect("identity index is valid")
    }

    /// The basis unitary `b_γ` (for UHF, the matrix unit named by `γ`).
    pub fn basis(model: &Arc<Model>, index: Word) -> Result<Self> {
        Self::scalar_term(model, index, S::one())
    }

    /// `z · 1_N · b_γ`.
    pub fn scalar_term(model: &Arc<Model>, index: Word, z: S) -> Result<Self> {
        let coeff = model.coefficients().scalar(z);
        Self::term(model, index, coeff)
    }

    pub fn term(model: &Arc<Model>, index: Word, coeff: CoefficientElement<S>) -> Result<Self> {
        Self::from_terms(model, [(index, coeff)])
    }

    /// Sums the given terms; repeated indices add up.
    pub fn from_terms(
        model: &Arc<Model>,
        terms: impl IntoIterator<Item = (Word, CoefficientElement<S>)>,
    ) -> Result<Self> {
        let mut out = BTreeMap::new();
        for (w, a) in terms {
            model.validate_index(&w)?;
            model.coefficients().check(&a)?;
            accumulate(&mut out, w, a);
        }
        let x = AlgebraElement { model: model.clone(), terms: out };
        Ok(if matches!(model.kind, ModelKind::Uhf { .. }) { x.uhf_normalize() } else { x })
    }

    pub fn from_scalar_terms(model: &Arc<Model>, terms: impl IntoIterator<Item = (Word, S)>) -> Result<Self> {
        let n = model.coefficients();
        Self::from_terms(model, terms.into_iter().map(|(w, z)| (w, n.scalar(z))))
    }

    pub fn model(&self) -> &Arc<Model> {
        &self.model
    }

    pub fn terms(&self) -> &BTreeMap<Word, CoefficientElement<S>> {
        &self.terms
    }

    pub fn coefficient(&self, index: &[i64]) -> Option<&CoefficientElement<S>> {
        self.terms.get(index)
    }

    pub fn support(&self) -> Vec<Word> {
        self.terms.keys().cloned().collect()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn same_model(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.model, &other.model) || self.model == other.model
    }

    fn check_model(&self, other: &Self) -> Result<()> {
        if self.same_model(other) {
            Ok(())
        } else {
            Err(Error::ModelMismatch)
        }
    }

    fn is_uhf(&self) -> bool {
        matches!(self.model.kind, ModelKind::Uhf { .. })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_model(other)?;
        if self.is_uhf() {
            let level = self.uhf_level().max(other.uhf_level());
            let (a, b) = (self.uhf_matrix(level), other.uhf_matrix(level));
            return Ok(self.uhf_from_matrix(level, a.into_iter().zip(b).map(|(x, y)| x + y).collect()));
        }
        let mut terms = self.terms.clone();
        for (w, a) in &other.terms {
            accumulate(&mut terms, w.clone(), a.clone());
        }
        Ok(AlgebraElement { model: self.model.clone(), terms })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-S::one()))
    }

    pub fn scale(&self, z: &S) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(w, a)| (w.clone(), a.scale(z)))
            .filter(|(_, a)| !a.is_zero())
            .collect();
        AlgebraElement { model: self.model.clone(), terms }
    }

    /// Convolution product in the model.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_model(other)?;
        let model = &self.model;
        let n = model.coefficients();
        let mut terms = BTreeMap::new();
        match &model.kind {
            ModelKind::Group(g) => {
                for (s, a) in &self.terms {
                    for (t, b) in &other.terms {
                        accumulate(&mut terms, g.mul(s, t), n.mul(a, b)?);
                    }
                }
            }
            ModelKind::Twisted { .. } => {
                for (s, a) in &self.terms {
                    for (t, b) in &other.terms {
                        let phase: S = model.twisted_phase(s, t)?;
                        accumulate(&mut terms, vec![s[0] + t[0], s[1] + t[1]], n.mul(a, b)?.scale(&phase));
                    }
                }
            }
            // (a_g u_g)(b_h u_h) = a_g α_g(b_h) u_{gh}, α_g(b)(y) = b(σ_g^{-1} y)
            ModelKind::Crossed { group, .. } => {
                for (g, a) in &self.terms {
                    let inv = model.action(g).expect("crossed model").inverse();
                    for (h, b) in &other.terms {
                        let moved = CoefficientElement::from_entries(
                            (0..b.entries().len()).map(|y| b.entries()[inv.apply(y)].clone()).collect(),
                        );
                        accumulate(&mut terms, group.mul(g, h), n.mul(a, &moved)?);
                    }
                }
            }
            ModelKind::Uhf { .. } => {
                let level = self.uhf_level().max(other.uhf_level());
                let k = model.uhf_size(level);
                let (a, b) = (self.uhf_matrix(level), other.uhf_matrix(level));
                let mut c = vec![S::zero(); k * k];
                for i in 0..k {
                    for l in 0..k {
                        let x = &a[i * k + l];
                        if x.is_zero() {
                            continue;
                        }
                        for j in 0..k {
                            let y = &b[l * k + j];
                            if !y.is_zero() {
                                c[i * k + j] += x.clone() * y.clone();
                            }
                        }
                    }
                }
                return Ok(self.uhf_from_matrix(level, c));
            }
        }
        Ok(AlgebraElement { model: model.clone(), terms })
    }

    pub fn pow(&self, m: u32) -> Result<Self> {
        let mut acc = Self::one(&self.model);
        for _ in 0..m {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    pub fn adjoint(&self) -> Result<Self> {
        let model = &self.model;
        let n = model.coefficients();
        let mut terms = BTreeMap::new();
        for (w, a) in &self.terms {
            let a_star = n.adjoint(a)?;
            match &model.kind {
                ModelKind::Group(g) => accumulate(&mut terms, g.inv(w), a_star),
                ModelKind::Twisted { .. } => {
                    let phase: S = model.twisted_adjoint_phase(w)?;
                    accumulate(&mut terms, vec![-w[0], -w[1]], a_star.scale(&phase));
                }
                // (a u_g)* = α_{g^{-1}}(a*) u_{g^{-1}}, α_{g^{-1}}(c)(y) = c(σ_g y)
                ModelKind::Crossed { group, .. } => {
                    let sigma = model.action(w).expect("crossed model");
                    let moved = CoefficientElement::from_entries(
                        (0..a_star.entries().len()).map(|y| a_star.entries()[sigma.apply(y)].clone()).collect(),
                    );
                    accumulate(&mut terms, group.inv(w), moved);
                }
                ModelKind::Uhf { .. } => accumulate(&mut terms, vec![w[0], w[2], w[1]], a_star),
            }
        }
        Ok(AlgebraElement { model: model.clone(), terms })
    }

    pub fn is_self_adjoint(&self) -> Result<bool> {
        let adj = self.adjoint()?;
        let scale = self.max_coefficient();
        Ok(adj.terms.len() == self.terms.len()
            && adj.terms.iter().all(|(w, a)| self.terms.get(w).is_some_and(|b| a.close_to(b, scale))))
    }

    fn max_coefficient(&self) -> f64 {
        self.terms.values().flat_map(|a| a.entries().iter().map(|z| z.magnitude())).fold(0.0, f64::max)
    }

    /// Conditional expectation onto `N`: the coefficient of the identity.
    pub fn cond_expect(&self) -> CoefficientElement<S> {
        let n = self.model.coefficients();
        if self.is_uhf() {
            return n.scalar(self.trace());
        }
        self.terms.get(&self.model.identity_index()).cloned().unwrap_or_else(|| n.zero())
    }

    /// `τ(x) = τ_N(E(x))`.
    pub fn trace(&self) -> S {
        if self.is_uhf() {
            let level = self.uhf_level();
            let k = self.model.uhf_size(level) as i64;
            let diag = self.terms.iter().filter(|(w, _)| w[1] == w[2]).fold(S::zero(), |acc, (_, a)| acc + a.entries()[0].clone());
            return diag * S::from_ratio(1, k);
        }
        self.model.coefficients().trace(&self.cond_expect()).expect("coefficient shape checked on construction")
    }

    /// Coefficientwise comparison under the backend's closeness notion.
    pub fn close_to(&self, other: &Self, scale: f64) -> bool {
        if !self.same_model(other) {
            return false;
        }
        let diff = match self.sub(other) {
            Ok(d) => d,
            Err(_) => return false,
        };
        let zero = self.model.coefficients().zero();
        diff.terms.values().all(|a| a.close_to(&zero, scale))
    }

    pub(crate) fn uhf_level(&self) -> usize {
        self.terms.keys().next().map_or(0, |w| w[0] as usize)
    }

    /// Dense row-major matrix of a UHF element embedded at `level`
    /// (`x ↦ 1_r ⊗ x`, so `x_ab` lands at `(t·k + a, t·k + b)`).
    pub(crate) fn uhf_matrix(&self, level: usize) -> Vec<S> {
        let k = self.model.uhf_size(level);
        let own = self.model.uhf_size(self.uhf_level());
        let mut m = vec![S::zero(); k * k];
        for (w, a) in &self.terms {
            let (i, j) = (w[1] as usize, w[2] as usize);
            for t in 0..k / own {
                m[(t * own + i) * k + t * own + j] = a.entries()[0].clone();
            }
        }
        m
    }

    pub(crate) fn uhf_from_matrix(&self, mut level: usize, mut m: Vec<S>) -> Self {
        while level > 0 {
            let k = self.model.uhf_size(level);
            let below = self.model.uhf_size(level - 1);
            let mut reducible = true;
            'check: for i in 0..k {
                for j in 0..k {
                    let (ti, tj) = (i / below, j / below);
                    let expected = if ti == tj { &m[(i % below) * k + j % below] } else { &S::zero() };
                    if m[i * k + j] != *expected {
                        reducible = false;
                        break 'check;
                    }
                }
            }
            if !reducible {
                break;
            }
            m = (0..below * below).map(|x| m[(x / below) * k + x % below].clone()).collect();
            level -= 1;
        }
        let k = self.model.uhf_size(level);
        let n = self.model.coefficients();
        let terms = m
            .into_iter()
            .enumerate()
            .filter(|(_, z)| !z.is_zero())
            .map(|(x, z)| (vec![level as i64, (x / k) as i64, (x % k) as i64], n.scalar(z)))
            .collect();
        AlgebraElement { model: self.model.clone(), terms }
    }

    fn uhf_normalize(self) -> Self {
        let level = self.terms.keys().map(|w| w[0] as usize).max().unwrap_or(0);
        // Terms may arrive at mixed levels; embed each separately.
        let k = self.model.uhf_size(level);
        let mut m = vec![S::zero(); k * k];
        for (w, a) in &self.terms {
            let single = AlgebraElement {
                model: self.model.clone(),
                terms: BTreeMap::from([(w.clone(), a.clone())]),
            };
            for (x, z) in single.uhf_matrix(level).into_iter().enumerate() {
                if !z.is_zero() {
                    m[x] += z;
                }
            }
        }
        self.uhf_from_matrix(level, m)
    }
}

fn accumulate<S: Scalar>(terms: &mut BTreeMap<Word, CoefficientElement<S>>, w: Word, a: CoefficientElement<S>) {
    use std::collections::btree_map::Entry;
    match terms.entry(w) {
        Entry::Vacant(v) => {
            if !a.is_zero() {
                v.insert(a);
            }
        }
        Entry::Occupied(mut o) => {
            let sum = o.get().add(&a);
            if sum.is_zero() {
                o.remove();
            } else {
                *o.get_mut() = sum;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{FiniteGroup, Group, Permutation, PermutationAction};
    use crate::scalar::{GaussianRational as Q, Turns};
    use num_bigint::BigInt;
    use num_complex::Complex64;
    use num_rational::BigRational;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn z() -> Arc<Model> {
        Model::group(Group::free_abelian(1).unwrap())
    }

    fn el(m: &Arc<Model>, terms: &[(&[i64], i64)]) -> AlgebraElement<Q> {
        AlgebraElement::from_scalar_terms(m, terms.iter().map(|(w, c)| (w.to_vec(), Q::from_real(*c)))).unwrap()
    }

    #[test]
    fn telescoping_product() {
        let m = z();
        let x = el(&m, &[(&[0], 1), (&[1], -1)]);
        let y = el(&m, &[(&[0], 1), (&[1], 1), (&[2], 1)]);
        assert_eq!(x.mul(&y).unwrap(), el(&m, &[(&[0], 1), (&[3], -1)]));
    }

    #[test]
    fn group_unitaries() {
        let m = z();
        let u = el(&m, &[(&[1], 1)]);
        assert_eq!(u.adjoint().unwrap(), el(&m, &[(&[-1], 1)]));
        assert_eq!(u.mul(&u.adjoint().unwrap()).unwrap(), AlgebraElement::one(&m));
        assert_eq!(u.trace(), Q::from_real(0));
        assert_eq!(AlgebraElement::<Q>::one(&m).trace(), Q::from_real(1));
    }

    #[test]
    fn rotation_relation_and_adjoint() {
        let theta = 0.3;
        let m = Model::twisted(Turns::Float(theta)).unwrap();
        let u = AlgebraElement::<Complex64>::basis(&m, vec![1, 0]).unwrap();
        let v = AlgebraElement::<Complex64>::basis(&m, vec![0, 1]).unwrap();
        let phase = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * theta);
        let uv = u.mul(&v).unwrap();
        let vu = v.mul(&u).unwrap();
        assert!(uv.close_to(&vu.scale(&phase), 1.0));
        let w = uv.adjoint().unwrap().mul(&uv).unwrap();
        assert!(w.close_to(&AlgebraElement::one(&m), 1.0));
        let w = uv.mul(&uv.adjoint().unwrap()).unwrap();
        assert!(w.close_to(&AlgebraElement::one(&m), 1.0));
    }

    #[test]
    fn crossed_conjugation_moves_functions() {
        let g = Group::Finite(FiniteGroup::cyclic(3).unwrap());
        let rot = Permutation::new(vec![1, 2, 0]).unwrap();
        let act = PermutationAction::new(&g, vec![rot]).unwrap();
        let m = Model::crossed(g, vec![ratio(1, 3); 3], act).unwrap();
        let f = m.coefficients().from_blocks(vec![vec![Q::from_real(5)], vec![Q::from_real(7)], vec![Q::from_real(11)]]).unwrap();
        let a = AlgebraElement::term(&m, vec![0], f.clone()).unwrap();
        let u = AlgebraElement::<Q>::basis(&m, vec![1]).unwrap();
        let conj = u.mul(&a).unwrap().mul(&u.adjoint().unwrap()).unwrap();
        // α_g(f)(y) = f(σ_g^{-1} y) with σ_g = (0 1 2).
        let expected = m.coefficients().from_blocks(vec![vec![Q::from_real(11)], vec![Q::from_real(5)], vec![Q::from_real(7)]]).unwrap();
        assert_eq!(conj, AlgebraElement::term(&m, vec![0], expected).unwrap());
        assert_eq!(a.trace(), Q::from_real(23) * Q::from_ratio(1, 3));
    }

    #[test]
    fn uhf_levels_align() {
        let m = Model::uhf(vec![2, 4]).unwrap();
        let one_low = AlgebraElement::<Q>::one(&m);
        let e00 = AlgebraElement::<Q>::basis(&m, vec![1, 0, 0]).unwrap();
        let e11 = AlgebraElement::<Q>::basis(&m, vec![1, 1, 1]).unwrap();
        assert_eq!(e00.add(&e11).unwrap(), one_low);
        // diag(1, 1) at level 2 of the top-left 2×2 corner of M_4 equals e00 at level 1
        let f = AlgebraElement::from_scalar_terms(&m, [(vec![2, 0, 0], Q::from_real(1)), (vec![2, 2, 2], Q::from_real(1))]).unwrap();
        assert_eq!(f, e00);
        assert_eq!(e00.trace(), Q::from_ratio(1, 2));
        let e01 = AlgebraElement::<Q>::basis(&m, vec![2, 0, 1]).unwrap();
        assert_eq!(e01.adjoint().unwrap().mul(&e01).unwrap(), AlgebraElement::basis(&m, vec![2, 1, 1]).unwrap());
    }
}
