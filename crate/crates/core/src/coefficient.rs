//! The coefficient algebra `N`: a finite multimatrix algebra
//! `M_{n_1} ⊕ … ⊕ M_{n_r}` with the faithful trace
//! `τ(a) = Σ_i w_i · Tr(a_i)`, normalized by `Σ_i w_i n_i = 1`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiMatrixAlgebra {
    block_sizes: Vec<usize>,
    block_weights: Vec<BigRational>,
    offsets: Vec<usize>,
}

impl MultiMatrixAlgebra {
    pub fn new(block_sizes: Vec<usize>, block_weights: Vec<BigRational>) -> Result<Self> {
        if block_sizes.is_empty() {
            return Err(Error::InvalidModel("a multimatrix algebra needs at least one block".into()));
        }
        if block_sizes.len() != block_weights.len() {
            return Err(Error::InvalidModel(format!(
                "{} block sizes but {} weights",
                block_sizes.len(),
                block_weights.len()
            )));
        }
        if let Some(i) = block_sizes.iter().position(|&n| n == 0) {
            return Err(Error::InvalidModel(format!("block {i} has size 0")));
        }
        if let Some(i) = block_weights.iter().position(|w| !w.is_positive()) {
            return Err(Error::InvalidModel(format!("block {i} has non-positive weight")));
        }
        let total: BigRational = block_sizes
            .iter()
            .zip(&block_weights)
            .map(|(&n, w)| w * BigRational::from_integer(BigInt::from(n)))
            .sum();
        if !total.is_one() {
            return Err(Error::InvalidModel(format!("trace normalization Σ w_i n_i = {total}, expected 1")));
        }
        let mut offsets = Vec::with_capacity(block_sizes.len() + 1);
        let mut acc = 0;
        for &n in &block_sizes {
            offsets.push(acc);
            acc += n * n;
        }
        offsets.push(acc);
        Ok(MultiMatrixAlgebra { block_sizes, block_weights, offsets })
    }

    /// Parses `(block_size, weight_numerator, weight_denominator)` triples.
    pub fn from_triples(triples: &[(usize, i64, i64)]) -> Result<Self> {
        let mut sizes = Vec::with_capacity(triples.len());
        let mut weights = Vec::with_capacity(triples.len());
        for &(n, num, den) in triples {
            if den == 0 {
                return Err(Error::InvalidModel("zero weight denominator".into()));
            }
            sizes.push(n);
            weights.push(BigRational::new(num.into(), den.into()));
        }
        Self::new(sizes, weights)
    }

    /// `ℂ` with `τ(1) = 1`.
    pub fn complex() -> Self {
        Self::new(vec![1], vec![BigRational::one()]).unwrap()
    }

    /// `ℂ^m` with atom weights (a finite probability space).
    pub fn diagonal(weights: Vec<BigRational>) -> Result<Self> {
        Self::new(vec![1; weights.len()], weights)
    }

    /// `M_n(ℂ)` with the normalized trace.
    pub fn full_matrix(n: usize) -> Self {
        Self::new(vec![n], vec![BigRational::new(BigInt::one(), BigInt::from(n))]).unwrap()
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    pub fn block_weights(&self) -> &[BigRational] {
        &self.block_weights
    }

    pub fn is_abelian(&self) -> bool {
        self.block_sizes.iter().all(|&n| n == 1)
    }

    /// Number of scalars needed to store an element.
    pub fn storage_len(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn check(&self, a: &CoefficientElement<impl Scalar>) -> Result<()> {
        if a.entries.len() != self.storage_len() {
            return Err(Error::Shape(format!(
                "element has {} entries, algebra with blocks {:?} needs {}",
                a.entries.len(),
                self.block_sizes,
                self.storage_len()
            )));
        }
        Ok(())
    }

    pub fn zero<S: Scalar>(&self) -> CoefficientElement<S> {
        CoefficientElement { entries: vec![S::zero(); self.storage_len()] }
    }

    pub fn one<S: Scalar>(&self) -> CoefficientElement<S> {
        let mut a = self.zero();
        for (b, &n) in self.block_sizes.iter().enumerate() {
            for i in 0..n {
                a.entries[self.offsets[b] + i * n + i] = S::one();
            }
        }
        a
    }

    pub fn scalar<S: Scalar>(&self, z: S) -> CoefficientElement<S> {
        self.one().scale(&z)
    }

    /// The matrix unit `e_{row,col}` in block `block`.
    pub fn matrix_unit<S: Scalar>(&self, block: usize, row: usize, col: usize) -> CoefficientElement<S> {
        let n = self.block_sizes[block];
        assert!(row < n && col < n, "matrix unit outside block");
        let mut a = self.zero();
        a.entries[self.offsets[block] + row * n + col] = S::one();
        a
    }

    /// Builds an element from per-block row-major matrices.
    pub fn from_blocks<S: Scalar>(&self, blocks: Vec<Vec<S>>) -> Result<CoefficientElement<S>> {
        if blocks.len() != self.block_sizes.len() {
            return Err(Error::Shape(format!("{} blocks given, {} expected", blocks.len(), self.block_sizes.len())));
        }
        for (b, (block, &n)) in blocks.iter().zip(&self.block_sizes).enumerate() {
            if block.len() != n * n {
                return Err(Error::Shape(format!("block {b} has {} entries, expected {}", block.len(), n * n)));
            }
        }
        Ok(CoefficientElement { entries: blocks.into_iter().flatten().collect() })
    }

    pub fn block<'a, S: Scalar>(&self, a: &'a CoefficientElement<S>, b: usize) -> &'a [S] {
        &a.entries[self.offsets[b]..self.offsets[b + 1]]
    }

    /// `τ(a) = Σ_i w_i · Tr(a_i)`.
    pub fn trace<S: Scalar>(&self, a: &CoefficientElement<S>) -> Result<S> {
        self.check(a)?;
        let mut acc = S::zero();
        for (b, (&n, w)) in self.block_sizes.iter().zip(&self.block_weights).enumerate() {
            let block = self.block(a, b);
            let tr = (0..n).fold(S::zero(), |t, i| t + block[i * n + i].clone());
            acc += S::from_gaussian(w, &BigRational::zero()) * tr;
        }
        Ok(acc)
    }

    pub fn mul<S: Scalar>(&self, a: &CoefficientElement<S>, b: &CoefficientElement<S>) -> Result<CoefficientElement<S>> {
        self.check(a)?;
        self.check(b)?;
        if self.is_abelian() {
            return Ok(CoefficientElement {
                entries: a.entries.iter().zip(&b.entries).map(|(x, y)| x.clone() * y.clone()).collect(),
            });
        }
        let mut out = self.zero();
        for (blk, &n) in self.block_sizes.iter().enumerate() {
            let off = self.offsets[blk];
            for i in 0..n {
                for k in 0..n {
                    let x = &a.entries[off + i * n + k];
                    if x.is_zero() {
                        continue;
                    }
                    for j in 0..n {
                        let y = &b.entries[off + k * n + j];
                        if !y.is_zero() {
                            out.entries[off + i * n + j] += x.clone() * y.clone();
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Blockwise conjugate transpose.
    pub fn adjoint<S: Scalar>(&self, a: &CoefficientElement<S>) -> Result<CoefficientElement<S>> {
        self.check(a)?;
        let mut out = self.zero();
        for (blk, &n) in self.block_sizes.iter().enumerate() {
            let off = self.offsets[blk];
            for i in 0..n {
                for j in 0..n {
                    out.entries[off + j * n + i] = a.entries[off + i * n + j].conj();
                }
            }
        }
        Ok(out)
    }
}

/// An element of a [`MultiMatrixAlgebra`], stored as the concatenation of its
/// row-major blocks. For `ℂ^m` this is simply the vector of atom values.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientElement<S> {
    pub(crate) entries: Vec<S>,
}

impl<S: Scalar> CoefficientElement<S> {
    pub fn from_entries(entries: Vec<S>) -> Self {
        CoefficientElement { entries }
    }

    pub fn entries(&self) -> &[S] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|x| x.is_zero())
    }

    pub fn add(&self, other: &Self) -> Self {
        CoefficientElement { entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a.clone() + b.clone()).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        CoefficientElement { entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a.clone() - b.clone()).collect() }
    }

    pub fn scale(&self, z: &S) -> Self {
        CoefficientElement { entries: self.entries.iter().map(|a| z.clone() * a.clone()).collect() }
    }

    pub fn close_to(&self, other: &Self, scale: f64) -> bool {
        self.entries.len() == other.entries.len()
            && self.entries.iter().zip(&other.entries).all(|(a, b)| a.close_to(b, scale))
    }
}
