//! Floating-point routines backed by nalgebra's SVD and Hermitian eigensolver.

use nalgebra::{DMatrix, SymmetricEigen, SVD};
use num_complex::{Complex, Complex64};
use num_traits::{Float, Zero};

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, RankInfo, SingularGap, SparseVec, Tolerance};
use crate::scalar::FloatReal;

fn to_nalgebra<T: FloatReal>(columns: &[SparseVec<Complex<T>>], rows: usize) -> DMatrix<Complex<T>> {
    let mut m = DMatrix::from_element(rows, columns.len(), Complex::zero());
    for (j, col) in columns.iter().enumerate() {
        for (i, v) in col {
            m[(*i, j)] = *v;
        }
    }
    m
}

fn svd<T: FloatReal>(m: DMatrix<Complex<T>>, u: bool, v: bool) -> Result<SVD<Complex<T>, nalgebra::Dyn, nalgebra::Dyn>> {
    SVD::try_new(m, u, v, T::default_epsilon(), 0).ok_or_else(|| Error::Numerical("SVD did not converge".into()))
}

fn cutoff<T: FloatReal>(sigma: &[T], rows: usize, cols: usize, tol: &Tolerance) -> f64 {
    let max = sigma.iter().map(|s| s.to_f64().unwrap()).fold(0.0, f64::max);
    tol.relative * max * rows.max(cols) as f64
}

fn gap(sigma: &[f64], cut: f64) -> SingularGap {
    SingularGap {
        cutoff: cut,
        smallest_kept: sigma.iter().cloned().filter(|&s| s > cut).reduce(f64::min),
        largest_dropped: sigma.iter().cloned().filter(|&s| s <= cut).reduce(f64::max),
    }
}

pub fn svd_rank<T: FloatReal>(vectors: &[SparseVec<Complex<T>>], dim: usize, tol: &Tolerance) -> Result<RankInfo> {
    if vectors.is_empty() || dim == 0 || vectors.iter().all(Vec::is_empty) {
        return Ok(RankInfo { rank: 0, gap: None });
    }
    let s = svd(to_nalgebra(vectors, dim), false, false)?;
    let sigma: Vec<T> = s.singular_values.iter().cloned().collect();
    let cut = cutoff(&sigma, dim, vectors.len(), tol);
    let sigma: Vec<f64> = sigma.iter().map(|x| x.to_f64().unwrap()).collect();
    let rank = if cut == 0.0 { 0 } else { sigma.iter().filter(|&&x| x > cut).count() };
    Ok(RankInfo { rank, gap: Some(gap(&sigma, cut)) })
}

/// Right singular vectors whose singular values fall under the cutoff.
pub fn svd_kernel<T: FloatReal>(
    columns: &[SparseVec<Complex<T>>],
    dim: usize,
    tol: &Tolerance,
) -> Result<Vec<SparseVec<Complex<T>>>> {
    let m = columns.len();
    if m == 0 {
        return Ok(Vec::new());
    }
    // Pad with zero rows so the thin SVD returns a full set of right vectors.
    let rows = dim.max(m);
    let s = svd(to_nalgebra(columns, rows), false, true)?;
    let sigma: Vec<T> = s.singular_values.iter().cloned().collect();
    let cut = cutoff(&sigma, dim, m, tol);
    let v_t = s.v_t.expect("requested right singular vectors");
    let mut out = Vec::new();
    for (i, sv) in sigma.iter().enumerate() {
        if sv.to_f64().unwrap() <= cut {
            out.push((0..m).map(|j| (j, v_t[(i, j)].conj())).filter(|(_, x)| !x.is_zero()).collect());
        }
    }
    Ok(out)
}

pub fn weighted_projection<T: FloatReal>(
    columns: &[SparseVec<Complex<T>>],
    weights: &[Complex<T>],
    dim: usize,
    tol: &Tolerance,
) -> Result<DenseMatrix<Complex<T>>> {
    if weights.len() != dim {
        return Err(Error::Shape(format!("{} weights for dimension {dim}", weights.len())));
    }
    let mut out = DenseMatrix::zeros(dim, dim);
    if columns.is_empty() || columns.iter().all(Vec::is_empty) {
        return Ok(out);
    }
    let root: Vec<T> = weights.iter().map(|w| Float::sqrt(w.re)).collect();
    let mut a = to_nalgebra(columns, dim);
    for i in 0..dim {
        for j in 0..columns.len() {
            a[(i, j)] *= root[i];
        }
    }
    let s = svd(a, true, false)?;
    let sigma: Vec<T> = s.singular_values.iter().cloned().collect();
    let cut = cutoff(&sigma, dim, columns.len(), tol);
    let u = s.u.expect("requested left singular vectors");
    let kept: Vec<usize> = (0..sigma.len()).filter(|&k| sigma[k].to_f64().unwrap() > cut && cut > 0.0).collect();
    for i in 0..dim {
        for j in 0..dim {
            let mut acc = Complex::zero();
            for &k in &kept {
                acc += u[(i, k)] * u[(j, k)].conj();
            }
            out.set(i, j, acc * (root[j] / root[i]));
        }
    }
    Ok(out)
}


pub fn hermitian_eigenvalues_c64(m: &DenseMatrix<Complex64>) -> Result<Vec<f64>> {
    let n = m.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let a = DMatrix::from_fn(n, n, |i, j| *m.get(i, j));
    let eig = SymmetricEigen::try_new(a, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("Hermitian eigensolver did not converge".into()))?;
    let mut vals: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}
