//! Hilbert `N`-modules spanned by a window, their `N`-valued inner products,
//! `Tr_N`, closure projections of submodules, the compressed state `φ_F` and
//! relative dimensions.
//!
//! Vectors of the amplified module `F^k` are sparse coordinate vectors over
//! `k × (window coordinates)`, slot-major. The right `N`-action is diagonal
//! in these coordinates: coordinate `c` is fixed by the minimal central
//! projection `block(c)` of `N` and killed by the others.

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::coefficient::CoefficientElement;
use crate::error::{Error, Result};
use crate::group::Word;
use crate::linalg::{DenseMatrix, SparseVec, Tolerance};
use crate::model::{AlgebraElement, Coordinate, FolnerWindow, Model};
use crate::scalar::Scalar;

/// `F^k` for the span `F` of a finite set of basis indices.
#[derive(Debug, Clone)]
pub struct WindowModule {
    model: Arc<Model>,
    indices: Vec<Word>,
    k: usize,
    coords: Vec<Coordinate>,
    lookup: HashMap<(Word, usize), usize>,
}

impl WindowModule {
    pub fn new(model: &Arc<Model>, indices: Vec<Word>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Invalid("amplification degree must be at least 1".into()));
        }
        if indices.is_empty() {
            return Err(Error::EmptyWindow);
        }
        for w in &indices {
            model.validate_index(w)?;
        }
        let coords = model.coordinates(&indices);
        let lookup = coords.iter().enumerate().map(|(i, c)| ((c.index.clone(), c.atom), i)).collect();
        Ok(WindowModule { model: model.clone(), indices, k, coords, lookup })
    }

    /// `span(P)^k`.
    pub fn outer(window: &FolnerWindow, k: usize) -> Result<Self> {
        Self::new(window.model(), window.p().to_vec(), k)
    }

    /// `span(S)^k`.
    pub fn inner(window: &FolnerWindow, k: usize) -> Result<Self> {
        Self::new(window.model(), window.s().to_vec(), k)
    }

    pub fn model(&self) -> &Arc<Model> {
        &self.model
    }

    pub fn indices(&self) -> &[Word] {
        &self.indices
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn coordinates(&self) -> &[Coordinate] {
        &self.coords
    }

    /// ℂ-dimension of `F^k`.
    pub fn len(&self) -> usize {
        self.k * self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Position of `(slot, index, atom)`, if the coordinate is in the window.
    pub fn position(&self, slot: usize, index: &[i64], atom: usize) -> Option<usize> {
        self.lookup.get(&(index.to_vec(), atom)).map(|&i| slot * self.coords.len() + i)
    }

    pub fn coordinate(&self, pos: usize) -> (usize, &Coordinate) {
        (pos / self.coords.len(), &self.coords[pos % self.coords.len()])
    }

    pub fn block_of(&self, pos: usize) -> usize {
        self.coordinate(pos).1.block
    }

    /// `dim_N F` (one slot).
    pub fn dim_n_window(&self) -> BigRational {
        self.model.coordinate_dimension(&self.coords)
    }

    /// `dim_N F^k`.
    pub fn dim_n(&self) -> BigRational {
        self.dim_n_window() * BigRational::from_integer(BigInt::from(self.k))
    }

    /// `Tr_N` weight of every coordinate: `τ` of its block projection.
    pub fn trace_weights(&self) -> Vec<BigRational> {
        let w = self.model.block_weights();
        (0..self.len()).map(|p| w[self.block_of(p)].clone()).collect()
    }

    /// `τ(e*e)` of every coordinate vector.
    pub fn norms(&self) -> Vec<BigRational> {
        (0..self.len()).map(|p| self.coordinate(p).1.norm_sq.clone()).collect()
    }

    /// Coordinates of a vector in `𝒜^k`; fails if the support leaves the window.
    pub fn to_coordinates<S: Scalar>(&self, x: &[AlgebraElement<S>]) -> Result<SparseVec<S>> {
        if x.len() != self.k {
            return Err(Error::Shape(format!("vector has {} slots, module has {}", x.len(), self.k)));
        }
        let mut out = Vec::new();
        for (slot, el) in x.iter().enumerate() {
            if !Arc::ptr_eq(el.model(), &self.model) && **el.model() != *self.model {
                return Err(Error::ModelMismatch);
            }
            let terms = self.element_terms(el)?;
            for (index, atom, value) in terms {
                let pos = self.position(slot, &index, atom).ok_or_else(|| Error::InvalidIndex {
                    index: index.clone(),
                    reason: format!("outside the window (slot {slot})"),
                })?;
                out.push((pos, value));
            }
        }
        out.sort_by_key(|(p, _)| *p);
        Ok(out)
    }

    /// Expands an element into `(index, atom, value)` coordinate terms.
    fn element_terms<S: Scalar>(&self, el: &AlgebraElement<S>) -> Result<Vec<(Word, usize, S)>> {
        let uhf_level = self.indices[0].first().copied().unwrap_or(0) as usize;
        if matches!(self.model.kind(), crate::model::ModelKind::Uhf { .. }) {
            // Re-express the element at the level of the window.
            let k = self.model.uhf_size(uhf_level);
            if el.uhf_level() > uhf_level {
                return Err(Error::InvalidIndex {
                    index: vec![el.uhf_level() as i64],
                    reason: "UHF level above the window".into(),
                });
            }
            return Ok(el
                .uhf_matrix(uhf_level)
                .into_iter()
                .enumerate()
                .filter(|(_, z)| !z.is_zero())
                .map(|(x, z)| (vec![uhf_level as i64, (x / k) as i64, (x % k) as i64], 0, z))
                .collect());
        }
        let mut out = Vec::new();
        for (w, a) in el.terms() {
            for (atom, z) in a.entries().iter().enumerate() {
                if !z.is_zero() {
                    out.push((w.clone(), atom, z.clone()));
                }
            }
        }
        Ok(out)
    }

    /// Inverse of [`WindowModule::to_coordinates`].
    pub fn to_elements<S: Scalar>(&self, v: &SparseVec<S>) -> Result<Vec<AlgebraElement<S>>> {
        let n = self.model.coefficients();
        let mut slots: Vec<Vec<(Word, CoefficientElement<S>)>> = vec![Vec::new(); self.k];
        for (pos, z) in v {
            if *pos >= self.len() {
                return Err(Error::Shape(format!("coordinate {pos} beyond module length {}", self.len())));
            }
            let (slot, c) = self.coordinate(*pos);
            let mut entries = vec![S::zero(); n.storage_len()];
            entries[c.atom] = z.clone();
            slots[slot].push((c.index.clone(), CoefficientElement::from_entries(entries)));
        }
        slots.into_iter().map(|terms| AlgebraElement::from_terms(&self.model, terms)).collect()
    }

    /// `⟨x, y⟩_N` of coordinate vectors.
    pub fn n_inner_coords<S: Scalar>(&self, x: &SparseVec<S>, y: &SparseVec<S>) -> CoefficientElement<S> {
        let n = self.model.coefficients();
        let w = self.model.block_weights();
        let mut entries = vec![S::zero(); n.storage_len()];
        let ys: HashMap<usize, &S> = y.iter().map(|(p, z)| (*p, z)).collect();
        for (p, a) in x {
            if let Some(b) = ys.get(p) {
                let (_, c) = self.coordinate(*p);
                let factor = &c.norm_sq / &w[c.block];
                entries[c.block] += a.conj() * (*b).clone() * S::from_gaussian(&factor, &BigRational::zero());
            }
        }
        CoefficientElement::from_entries(entries)
    }

    /// ℂ-inner product `τ(⟨x, y⟩_N)`.
    pub fn inner_coords<S: Scalar>(&self, x: &SparseVec<S>, y: &SparseVec<S>) -> S {
        self.model.coefficients().trace(&self.n_inner_coords(x, y)).expect("shape matches N")
    }

    /// The standard `N`-basis: `b_γ` (or `u_g`) in each slot.
    pub fn standard_basis<S: Scalar>(&self) -> Vec<SparseVec<S>> {
        let per_index: HashMap<&Word, Vec<usize>> = self.coords.iter().enumerate().fold(HashMap::new(), |mut m, (i, c)| {
            m.entry(&c.index).or_default().push(i);
            m
        });
        let mut out = Vec::with_capacity(self.k * self.indices.len());
        for slot in 0..self.k {
            for w in &self.indices {
                let v = per_index[w].iter().map(|&i| (slot * self.coords.len() + i, S::one())).collect();
                out.push(v);
            }
        }
        out
    }

    /// Square compression `P_F x P_F` of left multiplication by `x`, acting on
    /// every slot.
    pub fn square_compression<S: Scalar>(&self, x: &AlgebraElement<S>) -> Result<DenseMatrix<S>> {
        let prepared = self.model.prepare(x, Some(self.uhf_level()))?;
        let n = self.coords.len();
        let mut m: DenseMatrix<S> = DenseMatrix::zeros(self.len(), self.len());
        for (i, c) in self.coords.iter().enumerate() {
            for (index, atom, z) in self.model.apply(&prepared, c)? {
                if let Some(&r) = self.lookup.get(&(index, atom)) {
                    for slot in 0..self.k {
                        let v = m.get(slot * n + r, slot * n + i).clone() + z.clone();
                        m.set(slot * n + r, slot * n + i, v);
                    }
                }
            }
        }
        Ok(m)
    }

    pub(crate) fn uhf_level(&self) -> usize {
        match self.model.kind() {
            crate::model::ModelKind::Uhf { .. } => self.indices[0][0] as usize,
            _ => 0,
        }
    }

    /// Checks that `op` commutes with the right action of every minimal
    /// projection of `N`, i.e. never mixes blocks.
    pub fn check_equivariant<S: Scalar>(&self, op: &DenseMatrix<S>) -> Result<()> {
        if op.rows() != self.len() || op.cols() != self.len() {
            return Err(Error::Shape(format!("operator is {}×{}, module has length {}", op.rows(), op.cols(), self.len())));
        }
        if self.model.block_weights().len() == 1 {
            return Ok(());
        }
        for r in 0..op.rows() {
            for c in 0..op.cols() {
                if !op.get(r, c).is_zero() && self.block_of(r) != self.block_of(c) {
                    return Err(Error::NotEquivariant { generator: self.block_of(c) });
                }
            }
        }
        Ok(())
    }
}

/// `⟨x, y⟩_N = Σ_j E(x_j* y_j)` for vectors in `𝒜^k`.
pub fn n_inner<S: Scalar>(x: &[AlgebraElement<S>], y: &[AlgebraElement<S>]) -> Result<CoefficientElement<S>> {
    if x.len() != y.len() {
        return Err(Error::Shape(format!("{} slots against {}", x.len(), y.len())));
    }
    let Some(first) = x.first() else {
        return Err(Error::Shape("empty vectors".into()));
    };
    let n = first.model().coefficients();
    let mut acc = n.zero();
    for (a, b) in x.iter().zip(y) {
        acc = acc.add(&a.adjoint()?.mul(b)?.cond_expect());
    }
    Ok(acc)
}

/// `Tr_N(op) = Σ_i τ(⟨u_i, op u_i⟩_N) / τ(⟨u_i, u_i⟩_N)` over an `N`-basis
/// `{u_i}` whose vectors are pairwise `N`-orthogonal with `⟨u_i, u_i⟩_N` a
/// positive multiple of `1_N`. `None` uses the standard basis.
pub fn tr_n<S: Scalar>(module: &WindowModule, op: &DenseMatrix<S>, basis: Option<&[SparseVec<S>]>) -> Result<S> {
    module.check_equivariant(op)?;
    let standard;
    let basis = match basis {
        Some(b) => b,
        None => {
            standard = module.standard_basis();
            &standard
        }
    };
    let mut acc = S::zero();
    for u in basis {
        let mut image: Vec<S> = vec![S::zero(); module.len()];
        for (c, z) in u {
            for r in 0..module.len() {
                let m = op.get(r, *c);
                if !m.is_zero() {
                    image[r] += m.clone() * z.clone();
                }
            }
        }
        let image = crate::linalg::sparsify(&image);
        let norm = module.inner_coords(u, u);
        if norm.is_zero() {
            return Err(Error::Invalid("basis contains a zero vector".into()));
        }
        acc += module.inner_coords(u, &image) / norm;
    }
    Ok(acc)
}

/// Finitely many vectors of `F^k` generating an `N`-submodule.
#[derive(Debug, Clone)]
pub struct SubmoduleGens<S> {
    module: Arc<WindowModule>,
    vectors: Vec<SparseVec<S>>,
}

impl<S: Scalar> SubmoduleGens<S> {
    pub fn new(module: &Arc<WindowModule>, vectors: Vec<SparseVec<S>>) -> Result<Self> {
        for v in &vectors {
            if let Some((p, _)) = v.iter().find(|(p, _)| *p >= module.len()) {
                return Err(Error::Shape(format!("coordinate {p} beyond module length {}", module.len())));
            }
        }
        Ok(SubmoduleGens { module: module.clone(), vectors })
    }

    pub fn from_elements(module: &Arc<WindowModule>, vectors: &[Vec<AlgebraElement<S>>]) -> Result<Self> {
        let coords = vectors.iter().map(|x| module.to_coordinates(x)).collect::<Result<Vec<_>>>()?;
        Self::new(module, coords)
    }

    pub fn module(&self) -> &Arc<WindowModule> {
        &self.module
    }

    pub fn vectors(&self) -> &[SparseVec<S>] {
        &self.vectors
    }

    pub fn to_elements(&self) -> Result<Vec<Vec<AlgebraElement<S>>>> {
        self.vectors.iter().map(|v| self.module.to_elements(v)).collect()
    }

    /// ℂ-spanning set of the `N`-span: each generator cut into its right blocks.
    pub fn n_span_columns(&self) -> Vec<SparseVec<S>> {
        let mut out = Vec::new();
        for v in &self.vectors {
            let mut parts: HashMap<usize, SparseVec<S>> = HashMap::new();
            for (p, z) in v {
                parts.entry(self.module.block_of(*p)).or_default().push((*p, z.clone()));
            }
            let mut parts: Vec<_> = parts.into_iter().collect();
            parts.sort_by_key(|(b, _)| *b);
            out.extend(parts.into_iter().map(|(_, col)| col).filter(|c| !c.is_empty()));
        }
        out
    }

    /// Rank of the `N`-span inside each right block.
    pub fn block_ranks(&self, tol: &Tolerance) -> Result<Vec<usize>> {
        let blocks = self.module.model().block_weights().len();
        let mut per_block: Vec<Vec<SparseVec<S>>> = vec![Vec::new(); blocks];
        for col in self.n_span_columns() {
            let b = self.module.block_of(col[0].0);
            per_block[b].push(col);
        }
        per_block.iter().map(|cols| Ok(S::rank(cols, self.module.len(), tol)?.rank)).collect()
    }

    /// `dim_N` of the closure, from block ranks: `Σ_j τ(p_j)·rank_j`.
    pub fn dim_n_by_rank(&self, tol: &Tolerance) -> Result<BigRational> {
        let w = self.module.model().block_weights();
        Ok(self
            .block_ranks(tol)?
            .into_iter()
            .zip(w)
            .fold(BigRational::zero(), |acc, (r, wj)| acc + wj * BigRational::from_integer(BigInt::from(r))))
    }

    fn check_ambient(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.module, &other.module) {
            Ok(())
        } else {
            Err(Error::Invalid("submodules live in different ambient modules".into()))
        }
    }

    pub fn sum(&self, other: &Self) -> Result<Self> {
        self.check_ambient(other)?;
        let mut vectors = self.vectors.clone();
        vectors.extend(other.vectors.iter().cloned());
        Ok(SubmoduleGens { module: self.module.clone(), vectors })
    }

    /// Generators of the intersection of the two closures.
    pub fn intersect(&self, other: &Self, tol: &Tolerance) -> Result<Self> {
        self.check_ambient(other)?;
        let a = self.n_span_columns();
        let b = other.n_span_columns();
        let mut joint = a.clone();
        joint.extend(b.iter().map(|v| v.iter().map(|(p, z)| (*p, -z.clone())).collect::<SparseVec<S>>()));
        let relations = S::kernel(&joint, self.module.len(), tol)?;
        let mut vectors = Vec::with_capacity(relations.len());
        for rel in relations {
            let mut v: SparseVec<S> = Vec::new();
            for (j, coeff) in rel.iter().filter(|(j, _)| *j < a.len()) {
                v = crate::linalg::axpy(&v, coeff, &a[*j]);
            }
            if S::is_exact() {
                vectors.push(v);
            } else {
                // Drop rounding residue far below the data scale.
                let scale = v.iter().map(|(_, z)| z.magnitude()).fold(0.0, f64::max);
                vectors.push(v.into_iter().filter(|(_, z)| z.magnitude() > 1e-13 * scale).collect());
            }
        }
        Ok(SubmoduleGens { module: self.module.clone(), vectors })
    }
}

/// Projection onto the closure of the `N`-span of `gens`, in the window
/// coordinates. It is idempotent and self-adjoint for the trace inner
/// product (orthogonal for the diagonal metric given by the coordinate norms).
pub fn closure_projection<S: Scalar>(gens: &SubmoduleGens<S>, tol: &Tolerance) -> Result<DenseMatrix<S>> {
    let module = gens.module();
    let metric: Vec<S> = module.norms().iter().map(|r| S::from_gaussian(r, &BigRational::zero())).collect();
    S::range_projection(&gens.n_span_columns(), &metric, module.len(), tol)
}

/// `Σ_c τ(block(c)) · op[c, c]`, the `N`-trace of an equivariant operator in
/// window coordinates.
pub fn weighted_trace<S: Scalar>(module: &WindowModule, op: &DenseMatrix<S>) -> S {
    module
        .trace_weights()
        .iter()
        .enumerate()
        .fold(S::zero(), |acc, (c, w)| acc + S::from_gaussian(w, &BigRational::zero()) * op.get(c, c).clone())
}

/// `dim_F(ℰ) = Tr_N(P_{F^k} P_ℰ P_{F^k}) / dim_N F` for `ℰ` generated inside `F^k`.
pub fn relative_dimension<S: Scalar>(gens: &SubmoduleGens<S>, tol: &Tolerance) -> Result<S> {
    let module = gens.module();
    let p = closure_projection(gens, tol)?;
    let dim = module.dim_n_window();
    Ok(weighted_trace(module, &p) / S::from_gaussian(&dim, &BigRational::zero()))
}

/// Same quantity through block ranks, as an exact rational.
pub fn relative_dimension_by_rank<S: Scalar>(gens: &SubmoduleGens<S>, tol: &Tolerance) -> Result<BigRational> {
    Ok(gens.dim_n_by_rank(tol)? / gens.module().dim_n_window())
}

/// `φ_F(T) = Tr_N(P_F T P_F) / dim_N F`, from the square compression.
pub fn phi_state<S: Scalar>(module: &WindowModule, t: &AlgebraElement<S>) -> Result<S> {
    if module.k() != 1 {
        return Err(Error::Invalid("φ_F is defined on the unamplified window".into()));
    }
    let prepared = module.model().prepare(t, Some(module.uhf_level()))?;
    let w = module.model().block_weights();
    let mut acc = S::zero();
    for c in module.coordinates() {
        for (index, atom, z) in module.model().apply(&prepared, c)? {
            if atom == c.atom && index == c.index {
                acc += S::from_gaussian(&w[c.block], &BigRational::zero()) * z;
            }
        }
    }
    Ok(acc / S::from_gaussian(&module.dim_n_window(), &BigRational::zero()))
}

/// `φ_F(T) = (dim_N F)^{-1} Σ_i ⟨u_i, T u_i⟩` over the standard `N`-basis,
/// evaluated with algebra products and the trace.
pub fn phi_state_by_basis<S: Scalar>(module: &WindowModule, t: &AlgebraElement<S>) -> Result<S> {
    if module.k() != 1 {
        return Err(Error::Invalid("φ_F is defined on the unamplified window".into()));
    }
    let mut acc = S::zero();
    for u in module.standard_basis::<S>() {
        let el = module.to_elements(&u)?.remove(0);
        let norm = el.adjoint()?.mul(&el)?.trace();
        acc += el.adjoint()?.mul(&t.mul(&el)?)?.trace() / norm;
    }
    Ok(acc / S::from_gaussian(&module.dim_n_window(), &BigRational::zero()))
}
