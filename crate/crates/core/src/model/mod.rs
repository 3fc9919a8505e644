//! Concrete tracial algebras `N ⊆ 𝒜 ⊆ M` with explicit basis unitaries.
//!
//! * group algebras `ℂΓ` (N = ℂ),
//! * the rotation algebra `A_θ` with `uv = e^{2πiθ} vu` (N = ℂ),
//! * crossed products `L^∞(X) ⋊ Γ` for a measure-preserving action of `Γ` on
//!   a finite probability space (N = `ℂ^m`),
//! * UHF towers `M_{k(1)} ⊆ M_{k(2)} ⊆ …` (N = ℂ).
//!
//! Elements are finitely supported maps from basis indices ([`Word`]s) to
//! coefficients in `N`. Hilbert-space coordinates of a window are the
//! vectors `δ_y u_g` (crossed) or the basis unitaries themselves; they are
//! pairwise orthogonal for the trace inner product `⟨x, y⟩ = τ(x*y)` with the
//! norms recorded in [`Coordinate::norm_sq`].

mod element;
mod window;

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub use element::AlgebraElement;
pub use window::{folner_window, FolnerWindow};

use crate::coefficient::MultiMatrixAlgebra;
use crate::error::{Error, Result};
use crate::group::{Group, Permutation, PermutationAction, Word};
use crate::scalar::{Scalar, Turns};

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    Group(Group),
    /// Basis `b_{(p,q)} = u^p v^q`, product
    /// `b_{(p,q)} b_{(p',q')} = e^{−2πiθ q p'} b_{(p+p', q+q')}`.
    Twisted { theta: Turns },
    Crossed { group: Group, action: PermutationAction },
    /// `sizes[i]` is `k(i+1)`; level 0 is `ℂ`. Basis index `[level, a, b]`
    /// is the matrix unit `e_ab` of `M_{k(level)}`.
    Uhf { sizes: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    kind: ModelKind,
    coefficients: MultiMatrixAlgebra,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ModelKind::Group(g) => write!(f, "C[{g}]"),
            ModelKind::Twisted { theta } => write!(f, "A_theta (theta = {})", theta.to_f64()),
            ModelKind::Crossed { group, action } => write!(f, "L^inf({} atoms) x| {group}", action.atoms()),
            ModelKind::Uhf { sizes } => write!(f, "UHF{sizes:?}"),
        }
    }
}

/// One Hilbert-space coordinate of a window: `δ_atom · b_index`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Coordinate {
    pub index: Word,
    pub atom: usize,
    /// Right `N`-block (minimal central projection of `N`) the coordinate
    /// lives in.
    pub block: usize,
    /// `τ(e*e)` for the coordinate vector `e`.
    pub norm_sq: BigRational,
}

/// An element pre-digested for repeated left multiplication on coordinates.
pub(crate) enum Prepared<S> {
    Terms(Vec<(Word, S)>),
    Crossed(Vec<(Word, Vec<S>, Permutation)>),
    Matrix { level: usize, k: usize, entries: Vec<S> },
}

impl Model {
    pub fn group(group: Group) -> Arc<Model> {
        Arc::new(Model { kind: ModelKind::Group(group), coefficients: MultiMatrixAlgebra::complex() })
    }

    pub fn twisted(theta: Turns) -> Result<Arc<Model>> {
        let t = theta.to_f64();
        if !(0.0..1.0).contains(&t) {
            return Err(Error::InvalidModel(format!("rotation angle {t} outside [0, 1)")));
        }
        Ok(Arc::new(Model { kind: ModelKind::Twisted { theta }, coefficients: MultiMatrixAlgebra::complex() }))
    }

    /// Crossed product for an action permuting atoms of weights `weights`.
    pub fn crossed(group: Group, weights: Vec<BigRational>, action: PermutationAction) -> Result<Arc<Model>> {
        if weights.len() != action.atoms() {
            return Err(Error::InvalidModel(format!(
                "{} atom weights for an action on {} points",
                weights.len(),
                action.atoms()
            )));
        }
        let coefficients = MultiMatrixAlgebra::diagonal(weights)?;
        let mu = coefficients.block_weights();
        for (k, sigma) in action.generators().iter().enumerate() {
            if (0..mu.len()).any(|j| mu[sigma.apply(j)] != mu[j]) {
                return Err(Error::InvalidModel(format!("generator {k} does not preserve the atom weights")));
            }
        }
        Ok(Arc::new(Model { kind: ModelKind::Crossed { group, action }, coefficients }))
    }

    pub fn uhf(sizes: Vec<usize>) -> Result<Arc<Model>> {
        let mut prev = 1;
        for &k in &sizes {
            if k == 0 || k % prev != 0 {
                return Err(Error::InvalidModel(format!("UHF sizes {sizes:?} do not form a divisor chain")));
            }
            prev = k;
        }
        Ok(Arc::new(Model { kind: ModelKind::Uhf { sizes }, coefficients: MultiMatrixAlgebra::complex() }))
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn coefficients(&self) -> &MultiMatrixAlgebra {
        &self.coefficients
    }

    /// The group `Γ` of a group or crossed-product model.
    pub fn group_of(&self) -> Option<&Group> {
        match &self.kind {
            ModelKind::Group(g) | ModelKind::Crossed { group: g, .. } => Some(g),
            _ => None,
        }
    }

    /// `τ` of each minimal central projection of `N`.
    pub fn block_weights(&self) -> &[BigRational] {
        self.coefficients.block_weights()
    }

    pub fn uhf_size(&self, level: usize) -> usize {
        match &self.kind {
            ModelKind::Uhf { sizes } if level > 0 => sizes[level - 1],
            _ => 1,
        }
    }

    pub fn uhf_levels(&self) -> usize {
        match &self.kind {
            ModelKind::Uhf { sizes } => sizes.len(),
            _ => 0,
        }
    }

    pub fn identity_index(&self) -> Word {
        match &self.kind {
            ModelKind::Group(g) | ModelKind::Crossed { group: g, .. } => g.identity(),
            ModelKind::Twisted { .. } => vec![0, 0],
            ModelKind::Uhf { .. } => vec![0, 0, 0],
        }
    }

    pub fn validate_index(&self, w: &[i64]) -> Result<()> {
        match &self.kind {
            ModelKind::Group(g) | ModelKind::Crossed { group: g, .. } => g.validate(w),
            ModelKind::Twisted { .. } if w.len() == 2 => Ok(()),
            ModelKind::Uhf { sizes } if w.len() == 3 => {
                let ok = w[0] >= 0
                    && (w[0] as usize) <= sizes.len()
                    && (0..2).all(|i| w[1 + i] >= 0 && (w[1 + i] as usize) < self.uhf_size(w[0] as usize));
                if ok {
                    Ok(())
                } else {
                    Err(Error::InvalidIndex { index: w.to_vec(), reason: format!("not a matrix unit of {self}") })
                }
            }
            _ => Err(Error::InvalidIndex { index: w.to_vec(), reason: format!("wrong arity for {self}") }),
        }
    }

    pub(crate) fn twisted_phase<S: Scalar>(&self, s: &[i64], t: &[i64]) -> Result<S> {
        match &self.kind {
            ModelKind::Twisted { theta } => {
                let e = -(s[1] * t[0]);
                if e == 0 {
                    Ok(S::one())
                } else {
                    S::root_of_unity(&theta.times(e))
                }
            }
            _ => Ok(S::one()),
        }
    }

    /// Phase `λ` with `b_{(p,q)}* = λ · b_{(−p,−q)}`.
    pub(crate) fn twisted_adjoint_phase<S: Scalar>(&self, w: &[i64]) -> Result<S> {
        match &self.kind {
            ModelKind::Twisted { theta } if w[0] * w[1] != 0 => S::root_of_unity(&theta.times(-(w[0] * w[1]))),
            _ => Ok(S::one()),
        }
    }

    pub(crate) fn action(&self, g: &[i64]) -> Option<Permutation> {
        match &self.kind {
            ModelKind::Crossed { group, action } => Some(action.act(group, g)),
            _ => None,
        }
    }

    /// Hilbert-space coordinates spanned by the window indices.
    pub fn coordinates(&self, indices: &[Word]) -> Vec<Coordinate> {
        match &self.kind {
            ModelKind::Group(_) | ModelKind::Twisted { .. } => indices
                .iter()
                .map(|w| Coordinate { index: w.clone(), atom: 0, block: 0, norm_sq: BigRational::one() })
                .collect(),
            ModelKind::Crossed { group, action } => {
                let mu = self.block_weights();
                let mut out = Vec::with_capacity(indices.len() * mu.len());
                for g in indices {
                    let inv = action.act(group, g).inverse();
                    for (y, weight) in mu.iter().enumerate() {
                        out.push(Coordinate { index: g.clone(), atom: y, block: inv.apply(y), norm_sq: weight.clone() });
                    }
                }
                out
            }
            ModelKind::Uhf { .. } => indices
                .iter()
                .map(|w| Coordinate {
                    index: w.clone(),
                    atom: 0,
                    block: 0,
                    norm_sq: BigRational::new(BigInt::one(), BigInt::from(self.uhf_size(w[0] as usize))),
                })
                .collect(),
        }
    }

    /// `dim_N` of the span of the coordinates, `Σ_c τ(block(c))`.
    pub fn coordinate_dimension(&self, coords: &[Coordinate]) -> BigRational {
        let w = self.block_weights();
        coords.iter().fold(BigRational::zero(), |acc, c| acc + &w[c.block])
    }

    pub(crate) fn prepare<S: Scalar>(&self, x: &AlgebraElement<S>, level: Option<usize>) -> Result<Prepared<S>> {
        match &self.kind {
            ModelKind::Group(_) | ModelKind::Twisted { .. } => {
                Ok(Prepared::Terms(x.terms().iter().map(|(w, a)| (w.clone(), a.entries()[0].clone())).collect()))
            }
            ModelKind::Crossed { group, action } => Ok(Prepared::Crossed(
                x.terms()
                    .iter()
                    .map(|(w, a)| (w.clone(), a.entries().to_vec(), action.act(group, w)))
                    .collect(),
            )),
            ModelKind::Uhf { .. } => {
                let level = level.unwrap_or_else(|| x.uhf_level());
                if x.uhf_level() > level {
                    return Err(Error::WindowTooSmall(format!(
                        "element lives at UHF level {}, window at level {level}",
                        x.uhf_level()
                    )));
                }
                let k = self.uhf_size(level);
                Ok(Prepared::Matrix { level, k, entries: x.uhf_matrix(level) })
            }
        }
    }

    /// `x · e_c` for a coordinate `c`, as `(index, atom, value)` triples.
    pub(crate) fn apply<S: Scalar>(&self, x: &Prepared<S>, c: &Coordinate) -> Result<Vec<(Word, usize, S)>> {
        let mut out = Vec::new();
        match (x, &self.kind) {
            (Prepared::Terms(terms), ModelKind::Group(g)) => {
                for (s, a) in terms {
                    out.push((g.mul(s, &c.index), 0, a.clone()));
                }
            }
            (Prepared::Terms(terms), ModelKind::Twisted { .. }) => {
                for (s, a) in terms {
                    let phase: S = self.twisted_phase(s, &c.index)?;
                    out.push((vec![s[0] + c.index[0], s[1] + c.index[1]], 0, a.clone() * phase));
                }
            }
            // (a u_h)(δ_y u_g) = a(σ_h y) δ_{σ_h y} u_{hg}
            (Prepared::Crossed(terms), ModelKind::Crossed { group, .. }) => {
                for (h, a, sigma) in terms {
                    let y = sigma.apply(c.atom);
                    if !a[y].is_zero() {
                        out.push((group.mul(h, &c.index), y, a[y].clone()));
                    }
                }
            }
            // X e_ab = Σ_r X_ra e_rb
            (Prepared::Matrix { level, k, entries }, ModelKind::Uhf { .. }) => {
                if c.index[0] as usize != *level {
                    return Err(Error::Invalid("UHF coordinate at a different level".into()));
                }
                let (a, b) = (c.index[1] as usize, c.index[2] as usize);
                for r in 0..*k {
                    let v = &entries[r * k + a];
                    if !v.is_zero() {
                        out.push((vec![*level as i64, r as i64, b as i64], 0, v.clone()));
                    }
                }
            }
            _ => return Err(Error::ModelMismatch),
        }
        Ok(out)
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::FiniteGroup;

    #[test]
    fn crossed_rejects_weight_breaking_actions() {
        let g = Group::free_abelian(1).unwrap();
        let swap = Permutation::new(vec![1, 0]).unwrap();
        let w = |a: i64, b: i64| BigRational::new(a.into(), b.into());
        let act = PermutationAction::new(&g, vec![swap]).unwrap();
        assert!(Model::crossed(g.clone(), vec![w(1, 2), w(1, 2)], act.clone()).is_ok());
        assert!(Model::crossed(g, vec![w(1, 3), w(2, 3)], act).is_err());
    }

    #[test]
    fn uhf_sizes_must_divide() {
        assert!(Model::uhf(vec![2, 4, 8]).is_ok());
        assert!(Model::uhf(vec![2, 3]).is_err());
    }

    #[test]
    fn crossed_coordinates_carry_right_blocks() {
        let c3 = Group::Finite(FiniteGroup::cyclic(3).unwrap());
        let rot = Permutation::new(vec![1, 2, 0]).unwrap();
        let act = PermutationAction::new(&c3, vec![rot]).unwrap();
        let third = BigRational::new(1.into(), 3.into());
        let m = Model::crossed(c3, vec![third.clone(); 3], act).unwrap();
        let coords = m.coordinates(&[vec![1]]);
        // δ_y u_g lies in the block σ_g^{-1}(y).
        assert_eq!(coords.iter().map(|c| c.block).collect::<Vec<_>>(), vec![2, 0, 1]);
        assert_eq!(m.coordinate_dimension(&coords), BigRational::one());
    }
}
