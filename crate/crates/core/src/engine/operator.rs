use std::collections::BTreeSet;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::group::Word;
use crate::model::{AlgebraElement, Model};
use crate::scalar::Scalar;

/// A matrix `T = (T_ij) ∈ M_k(𝒜)` acting on `𝒜^k` by left multiplication.
#[derive(Debug, Clone)]
pub struct EquivariantOperator<S> {
    model: Arc<Model>,
    k: usize,
    entries: Vec<AlgebraElement<S>>,
}

impl<S: Scalar> PartialEq for EquivariantOperator<S> {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k && self.entries == other.entries
    }
}

impl<S: Scalar> EquivariantOperator<S> {
    /// `entries` is row-major, `k × k`.
    pub fn new(model: &Arc<Model>, k: usize, entries: Vec<AlgebraElement<S>>) -> Result<Self> {
        if k == 0 {
            return Err(Error::Invalid("operator matrices need k ≥ 1".into()));
        }
        if entries.len() != k * k {
            return Err(Error::Shape(format!("{} entries for a {k}×{k} matrix", entries.len())));
        }
        if entries.iter().any(|e| !Arc::ptr_eq(e.model(), model) && **e.model() != **model) {
            return Err(Error::ModelMismatch);
        }
        Ok(EquivariantOperator { model: model.clone(), k, entries })
    }

    pub fn from_element(x: AlgebraElement<S>) -> Self {
        EquivariantOperator { model: x.model().clone(), k: 1, entries: vec![x] }
    }

    pub fn diagonal(model: &Arc<Model>, diag: Vec<AlgebraElement<S>>) -> Result<Self> {
        let k = diag.len();
        let mut entries = vec![AlgebraElement::zero(model); k * k];
        for (i, d) in diag.into_iter().enumerate() {
            entries[i * k + i] = d;
        }
        Self::new(model, k, entries)
    }

    pub fn identity(model: &Arc<Model>, k: usize) -> Result<Self> {
        Self::diagonal(model, vec![AlgebraElement::one(model); k])
    }

    pub fn zero(model: &Arc<Model>, k: usize) -> Result<Self> {
        Self::new(model, k, vec![AlgebraElement::zero(model); k * k])
    }

    pub fn model(&self) -> &Arc<Model> {
        &self.model
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn entry(&self, i: usize, j: usize) -> &AlgebraElement<S> {
        &self.entries[i * self.k + j]
    }

    pub fn entries(&self) -> &[AlgebraElement<S>] {
        &self.entries
    }

    /// Union of the supports of all entries.
    pub fn support(&self) -> Vec<Word> {
        let set: BTreeSet<Word> = self.entries.iter().flat_map(|e| e.support()).collect();
        set.into_iter().collect()
    }

    /// `(T*)_ij = (T_ji)*`.
    pub fn adjoint(&self) -> Result<Self> {
        let k = self.k;
        let mut entries = Vec::with_capacity(k * k);
        for i in 0..k {
            for j in 0..k {
                entries.push(self.entry(j, i).adjoint()?);
            }
        }
        Ok(EquivariantOperator { model: self.model.clone(), k, entries })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.k != other.k {
            return Err(Error::Shape(format!("{}×{} times {}×{}", self.k, self.k, other.k, other.k)));
        }
        let k = self.k;
        let mut entries = Vec::with_capacity(k * k);
        for i in 0..k {
            for j in 0..k {
                let mut acc = AlgebraElement::zero(&self.model);
                for l in 0..k {
                    acc = acc.add(&self.entry(i, l).mul(other.entry(l, j))?)?;
                }
                entries.push(acc);
            }
        }
        Ok(EquivariantOperator { model: self.model.clone(), k, entries })
    }

    pub fn pow(&self, m: u32) -> Result<Self> {
        let mut acc = Self::identity(&self.model, self.k)?;
        for _ in 0..m {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    pub fn is_self_adjoint(&self) -> Result<bool> {
        let adj = self.adjoint()?;
        let scale = self
            .entries
            .iter()
            .flat_map(|e| e.terms().values().flat_map(|a| a.entries().iter().map(|z| z.magnitude())).collect::<Vec<_>>())
            .fold(0.0, f64::max);
        Ok(self.entries.iter().zip(&adj.entries).all(|(x, y)| x.close_to(y, scale)))
    }

    /// `Σ_i τ(T_ii)` (not normalized by `k`).
    pub fn trace(&self) -> S {
        (0..self.k).fold(S::zero(), |acc, i| acc + self.entry(i, i).trace())
    }
}
