//! Exact dense routines: weighted projections and fraction-free elimination.

use num_bigint::BigInt;
use num_complex::Complex;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::echelon::independent_columns;
use crate::linalg::{DenseMatrix, SparseVec};
use crate::scalar::{GaussianRational, Scalar};

/// Inverse by Gauss–Jordan elimination with nonzero pivoting.
pub fn invert<S: Scalar>(m: &DenseMatrix<S>) -> Result<DenseMatrix<S>> {
    let n = m.rows();
    if m.cols() != n {
        return Err(Error::Shape("cannot invert a non-square matrix".into()));
    }
    let mut a = m.clone();
    let mut inv: DenseMatrix<S> = DenseMatrix::identity(n);
    for col in 0..n {
        let pivot = (col..n)
            .filter(|&r| !a.get(r, col).is_zero())
            .max_by(|&x, &y| a.get(x, col).magnitude().total_cmp(&a.get(y, col).magnitude()))
            .ok_or_else(|| Error::Numerical("singular matrix".into()))?;
        if pivot != col {
            for j in 0..n {
                let (x, y) = (a.get(col, j).clone(), a.get(pivot, j).clone());
                a.set(col, j, y);
                a.set(pivot, j, x);
                let (x, y) = (inv.get(col, j).clone(), inv.get(pivot, j).clone());
                inv.set(col, j, y);
                inv.set(pivot, j, x);
            }
        }
        let p = S::one() / a.get(col, col).clone();
        for j in 0..n {
            a.set(col, j, a.get(col, j).clone() * p.clone());
            inv.set(col, j, inv.get(col, j).clone() * p.clone());
        }
        for r in 0..n {
            if r == col || a.get(r, col).is_zero() {
                continue;
            }
            let f = a.get(r, col).clone();
            for j in 0..n {
                let v = a.get(r, j).clone() - f.clone() * a.get(col, j).clone();
                a.set(r, j, v);
                let w = inv.get(r, j).clone() - f.clone() * inv.get(col, j).clone();
                inv.set(r, j, w);
            }
        }
    }
    Ok(inv)
}

/// `P = B (B* W B)^{-1} B* W` for an independent spanning set `B` of the
/// columns; `P` is idempotent and self-adjoint for the metric `W`.
pub fn weighted_projection<S: Scalar>(
    columns: &[SparseVec<S>],
    weights: &[S],
    dim: usize,
) -> Result<DenseMatrix<S>> {
    if weights.len() != dim {
        return Err(Error::Shape(format!("{} weights for dimension {dim}", weights.len())));
    }
    let basis: Vec<SparseVec<S>> = independent_columns(columns).into_iter().map(|j| columns[j].clone()).collect();
    if basis.is_empty() {
        return Ok(DenseMatrix::zeros(dim, dim));
    }
    let b = DenseMatrix::from_sparse_columns(&basis, dim);
    let mut wb = b.clone();
    for i in 0..dim {
        for j in 0..wb.cols() {
            wb.set(i, j, weights[i].clone() * b.get(i, j).clone());
        }
    }
    let gram = b.adjoint().mul(&wb);
    let gram_inv = invert(&gram)?;
    Ok(b.mul(&gram_inv).mul(&wb.adjoint()))
}

type GaussianInt = Complex<BigInt>;

fn exact_div(a: &GaussianInt, b: &GaussianInt) -> GaussianInt {
    let norm = &b.re * &b.re + &b.im * &b.im;
    let num = a * b.conj();
    debug_assert!(num.re.is_multiple_of(&norm) && num.im.is_multiple_of(&norm));
    Complex::new(&num.re / &norm, &num.im / &norm)
}

/// Rank by Bareiss fraction-free elimination over the Gaussian integers.
/// Rows are scaled to clear denominators first, which leaves the rank
/// unchanged.
pub fn fraction_free_rank(m: &DenseMatrix<GaussianRational>) -> usize {
    let (rows, cols) = (m.rows(), m.cols());
    let mut a: Vec<Vec<GaussianInt>> = (0..rows)
        .map(|i| {
            let row = m.row(i);
            let lcm = row.iter().fold(BigInt::one(), |acc, z| acc.lcm(z.re.denom()).lcm(z.im.denom()));
            row.iter()
                .map(|z| {
                    Complex::new(
                        z.re.numer() * (&lcm / z.re.denom()),
                        z.im.numer() * (&lcm / z.im.denom()),
                    )
                })
                .collect()
        })
        .collect();
    let mut prev = GaussianInt::one();
    let mut rank = 0;
    let mut col_order: Vec<usize> = (0..cols).collect();
    for step in 0..rows.min(cols) {
        // Find any nonzero entry in the trailing block.
        let found = (step..cols)
            .flat_map(|c| (step..rows).map(move |r| (r, c)))
            .find(|&(r, c)| !a[r][col_order[c]].is_zero());
        let Some((pr, pc)) = found else { break };
        a.swap(step, pr);
        col_order.swap(step, pc);
        let pivot = a[step][col_order[step]].clone();
        for r in step + 1..rows {
            let factor = a[r][col_order[step]].clone();
            for c in step + 1..cols {
                let j = col_order[c];
                let v = &pivot * &a[r][j] - &factor * &a[step][j];
                a[r][j] = exact_div(&v, &prev);
            }
            a[r][col_order[step]] = GaussianInt::zero();
        }
        prev = pivot;
        rank += 1;
    }
    rank
}
