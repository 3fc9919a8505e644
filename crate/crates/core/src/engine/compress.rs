use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::EquivariantOperator;
use crate::dimension::{SubmoduleGens, WindowModule};
use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, SingularGap, SparseVec, Tolerance};
use crate::group::Word;
use crate::model::{AlgebraElement, FolnerWindow};
use crate::scalar::Scalar;

/// `T|_{S^k} : S^k → P^k` in window coordinates.
#[derive(Debug, Clone)]
pub struct CompressedOperator<S> {
    rows: Arc<WindowModule>,
    cols: Arc<WindowModule>,
    columns: Vec<SparseVec<S>>,
}

impl<S: Scalar> CompressedOperator<S> {
    /// The module `P^k` the rows index.
    pub fn rows(&self) -> &Arc<WindowModule> {
        &self.rows
    }

    /// The module `S^k` the columns index.
    pub fn cols(&self) -> &Arc<WindowModule> {
        &self.cols
    }

    pub fn columns(&self) -> &[SparseVec<S>] {
        &self.columns
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows.len(), self.cols.len())
    }

    pub fn to_dense(&self) -> DenseMatrix<S> {
        DenseMatrix::from_sparse_columns(&self.columns, self.rows.len())
    }

    /// Column blocks of the right `N`-action with rows renumbered inside the
    /// block: `(block, columns, number of rows)`.
    pub fn blocks(&self) -> Vec<(usize, Vec<usize>, Vec<SparseVec<S>>, usize)> {
        let nblocks = self.rows.model().block_weights().len();
        let mut local = vec![0usize; self.rows.len()];
        let mut row_counts = vec![0usize; nblocks];
        for (p, slot) in local.iter_mut().enumerate() {
            let b = self.rows.block_of(p);
            *slot = row_counts[b];
            row_counts[b] += 1;
        }
        let mut out: Vec<(usize, Vec<usize>, Vec<SparseVec<S>>, usize)> =
            (0..nblocks).map(|b| (b, Vec::new(), Vec::new(), row_counts[b])).collect();
        for (j, col) in self.columns.iter().enumerate() {
            let b = self.cols.block_of(j);
            out[b].1.push(j);
            out[b].2.push(col.iter().map(|(p, z)| (local[*p], z.clone())).collect());
        }
        out
    }

    /// Position in `P^k` of each coordinate of `S^k`.
    pub fn embedding(&self) -> Vec<usize> {
        (0..self.cols.len())
            .map(|j| {
                let (slot, c) = self.cols.coordinate(j);
                self.rows.position(slot, &c.index, c.atom).expect("S ⊆ P")
            })
            .collect()
    }

    /// Kernel of the compression as a submodule of `P^k`.
    pub fn kernel_gens(&self, tol: &Tolerance) -> Result<SubmoduleGens<S>> {
        let embed = self.embedding();
        let mut vectors = Vec::new();
        for (_, cols, block_columns, rows) in self.blocks() {
            for rel in S::kernel(&block_columns, rows, tol)? {
                let mut v: SparseVec<S> = rel.into_iter().map(|(j, z)| (embed[cols[j]], z)).collect();
                v.sort_by_key(|(p, _)| *p);
                vectors.push(v);
            }
        }
        SubmoduleGens::new(&self.rows, vectors)
    }

    /// Range of the compression as a submodule of `P^k`.
    pub fn range_gens(&self) -> Result<SubmoduleGens<S>> {
        SubmoduleGens::new(&self.rows, self.columns.clone())
    }
}

/// Restricts `T` to `S^k → P^k`. Fails with [`Error::WindowTooSmall`] if some
/// entry maps a basis vector of `S` outside `P`.
pub fn compress<S: Scalar>(t: &EquivariantOperator<S>, w: &FolnerWindow) -> Result<CompressedOperator<S>> {
    let model = t.model();
    if !Arc::ptr_eq(model, w.model()) && **model != **w.model() {
        return Err(Error::ModelMismatch);
    }
    let k = t.k();
    let rows = Arc::new(WindowModule::outer(w, k)?);
    let cols = Arc::new(WindowModule::inner(w, k)?);
    let per_slot = cols.coordinates().len();
    let mut columns = vec![BTreeMap::<usize, S>::new(); cols.len()];
    for i in 0..k {
        for j in 0..k {
            let entry = t.entry(i, j);
            if entry.is_zero() {
                continue;
            }
            let prepared = model.prepare(entry, Some(w.level())).map_err(|e| match e {
                Error::WindowTooSmall(msg) => Error::WindowTooSmall(format!("entry ({i}, {j}): {msg}")),
                other => other,
            })?;
            for (c_idx, c) in cols.coordinates().iter().enumerate() {
                let col = &mut columns[j * per_slot + c_idx];
                for (index, atom, z) in model.apply(&prepared, c)? {
                    let r = rows.position(i, &index, atom).ok_or_else(|| {
                        Error::WindowTooSmall(format!(
                            "entry ({i}, {j}) maps basis index {:?} to {index:?}, outside P",
                            c.index
                        ))
                    })?;
                    *col.entry(r).or_insert_with(S::zero) += z;
                }
            }
        }
    }
    let columns = columns.into_iter().map(|c| c.into_iter().filter(|(_, z)| !z.is_zero()).collect()).collect();
    Ok(CompressedOperator { rows, cols, columns })
}

/// Checks `x · S ⊆ P`, returning the first basis index mapped outside `P`.
pub(crate) fn check_containment<S: Scalar>(x: &AlgebraElement<S>, w: &FolnerWindow) -> Result<()> {
    let model = w.model();
    let prepared = model.prepare(x, Some(w.level()))?;
    let inside: HashSet<&Word> = w.p().iter().collect();
    for c in w.s_coordinates() {
        for (index, _, _) in model.apply(&prepared, &c)? {
            if !inside.contains(&index) {
                return Err(Error::WindowTooSmall(format!("maps basis index {:?} to {index:?}, outside P", c.index)));
            }
        }
    }
    Ok(())
}

/// Square compression `P T P` on `P^k`, as sparse columns.
pub(crate) fn square_columns<S: Scalar>(
    t: &EquivariantOperator<S>,
    w: &FolnerWindow,
) -> Result<(Arc<WindowModule>, Vec<SparseVec<S>>)> {
    let model = t.model();
    let k = t.k();
    let module = Arc::new(WindowModule::outer(w, k)?);
    let per_slot = module.coordinates().len();
    let mut columns = vec![BTreeMap::<usize, S>::new(); module.len()];
    for i in 0..k {
        for j in 0..k {
            let entry = t.entry(i, j);
            if entry.is_zero() {
                continue;
            }
            let prepared = model.prepare(entry, Some(w.level()))?;
            for (c_idx, c) in module.coordinates().iter().enumerate() {
                let col = &mut columns[j * per_slot + c_idx];
                for (index, atom, z) in model.apply(&prepared, c)? {
                    if let Some(r) = module.position(i, &index, atom) {
                        *col.entry(r).or_insert_with(S::zero) += z;
                    }
                }
            }
        }
    }
    let columns = columns.into_iter().map(|c| c.into_iter().filter(|(_, z)| !z.is_zero()).collect()).collect();
    Ok((module, columns))
}

/// Relative kernel and range dimensions of a compression.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelRange {
    pub k: usize,
    /// `dim_N ker(T|_{S^k}) / dim_N P`, from explicit kernel vectors.
    pub a: BigRational,
    /// `dim_N rg(T|_{S^k}) / dim_N P`, from the rank.
    pub b: BigRational,
    pub dim_p: BigRational,
    pub dim_s: BigRational,
    /// `dim_N S / dim_N P`.
    pub ratio: BigRational,
    pub nullities: Vec<usize>,
    pub ranks: Vec<usize>,
    /// Tightest singular-value gap over the blocks (floating backend).
    pub gap: Option<SingularGap>,
}

pub fn kernel_range_dims<S: Scalar>(
    t: &EquivariantOperator<S>,
    w: &FolnerWindow,
    tol: &Tolerance,
) -> Result<KernelRange> {
    let c = compress(t, w)?;
    let weights = t.model().block_weights().to_vec();
    let mut nullities = Vec::new();
    let mut ranks = Vec::new();
    let mut gap: Option<SingularGap> = None;
    for (_, _, columns, rows) in c.blocks() {
        let info = S::rank(&columns, rows, tol)?;
        // A full column rank certifies a zero kernel; otherwise list it.
        let nullity = if info.rank == columns.len() { 0 } else { S::kernel(&columns, rows, tol)?.len() };
        if let Some(g) = info.gap {
            let width = |g: &SingularGap| g.smallest_kept.unwrap_or(f64::INFINITY) / g.largest_dropped.unwrap_or(0.0).max(f64::MIN_POSITIVE);
            if gap.as_ref().is_none_or(|old| width(&g) < width(old)) {
                gap = Some(g);
            }
        }
        ranks.push(info.rank);
        nullities.push(nullity);
    }
    let dim_p = w.dim_p();
    let dim_s = w.dim_s();
    let weigh = |counts: &[usize]| {
        counts
            .iter()
            .zip(&weights)
            .fold(BigRational::zero(), |acc, (n, wj)| acc + wj * BigRational::from_integer(BigInt::from(*n)))
            / &dim_p
    };
    Ok(KernelRange {
        k: t.k(),
        a: weigh(&nullities),
        b: weigh(&ranks),
        ratio: &dim_s / &dim_p,
        dim_p,
        dim_s,
        nullities,
        ranks,
        gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Group;
    use crate::model::{folner_window, Model};
    use crate::scalar::GaussianRational as Q;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn one_minus_shift_is_bidiagonal() {
        let m = Model::group(Group::free_abelian(1).unwrap());
        let x = AlgebraElement::from_scalar_terms(&m, [(vec![0], Q::from_real(1)), (vec![1], Q::from_real(-1))]).unwrap();
        let t = EquivariantOperator::from_element(x);
        let w = folner_window(&m, &t.support(), 2).unwrap();
        let c = compress(&t, &w).unwrap();
        assert_eq!(c.shape(), (5, 3));
        let d = c.to_dense();
        // P = [−2, 2], S = [−1, 1]; column γ has 1 at γ and −1 at γ + 1.
        for j in 0..3 {
            for i in 0..5 {
                let expected = if i == j + 1 { 1 } else if i == j + 2 { -1 } else { 0 };
                assert_eq!(*d.get(i, j), Q::from_real(expected), "entry ({i}, {j})");
            }
        }
        let kr = kernel_range_dims(&t, &w, &Tolerance::default()).unwrap();
        assert_eq!(kr.a, r(0, 1));
        assert_eq!(kr.b, r(3, 5));
    }

    #[test]
    fn zero_operator_has_full_kernel() {
        let m = Model::group(Group::free_abelian(1).unwrap());
        let t = EquivariantOperator::<Q>::zero(&m, 1).unwrap();
        let w = folner_window(&m, &[vec![1]], 3).unwrap();
        let kr = kernel_range_dims(&t, &w, &Tolerance::default()).unwrap();
        assert_eq!(kr.a, r(5, 7));
        assert_eq!(kr.b, r(0, 1));
        assert!(compress(&t, &w).unwrap().to_dense().is_zero_matrix());
    }

    #[test]
    fn shifted_window_violates_containment() {
        let m = Model::group(Group::free_abelian(1).unwrap());
        let u = EquivariantOperator::from_element(AlgebraElement::<Q>::basis(&m, vec![1]).unwrap());
        let p: Vec<Vec<i64>> = (0..=4).map(|x| vec![x]).collect();
        let w = FolnerWindow::new(&m, p.clone(), p).unwrap();
        assert!(matches!(compress(&u, &w), Err(Error::WindowTooSmall(_))));
    }
}
