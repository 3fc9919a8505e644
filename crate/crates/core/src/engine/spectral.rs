use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;

use super::compress::square_columns;
use super::EquivariantOperator;
use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, SparseVec};
use crate::model::FolnerWindow;
use crate::scalar::{rational_to_f64, Scalar};

/// `exact[m] = Σ_i τ((T^m)_ii)` and
/// `compressed[m] = Tr_N((P T P)^m) / dim_N P`, for `m = 0..=m_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments<S> {
    pub exact: Vec<S>,
    pub compressed: Vec<S>,
}

fn require_self_adjoint<S: Scalar>(t: &EquivariantOperator<S>) -> Result<()> {
    if t.is_self_adjoint()? {
        Ok(())
    } else {
        Err(Error::NotSelfAdjoint)
    }
}

fn matvec<S: Scalar>(columns: &[SparseVec<S>], v: &HashMap<usize, S>) -> HashMap<usize, S> {
    let mut out: HashMap<usize, S> = HashMap::new();
    for (c, z) in v {
        for (r, m) in &columns[*c] {
            *out.entry(*r).or_insert_with(S::zero) += m.clone() * z.clone();
        }
    }
    out.retain(|_, z| !z.is_zero());
    out
}

pub fn spectral_moments<S: Scalar>(t: &EquivariantOperator<S>, w: &FolnerWindow, m_max: usize) -> Result<Moments<S>> {
    require_self_adjoint(t)?;
    if m_max == 0 {
        return Err(Error::Invalid("m_max must be at least 1".into()));
    }
    let mut exact = Vec::with_capacity(m_max + 1);
    let mut power = EquivariantOperator::identity(t.model(), t.k())?;
    exact.push(power.trace());
    for _ in 0..m_max {
        power = power.mul(t)?;
        exact.push(power.trace());
    }

    let (module, columns) = square_columns(t, w)?;
    let weights = module.trace_weights();
    let per_coordinate: Vec<Vec<S>> = (0..module.len())
        .into_par_iter()
        .map(|c| {
            let mut v: HashMap<usize, S> = HashMap::from([(c, S::one())]);
            let mut diag = Vec::with_capacity(m_max);
            for _ in 0..m_max {
                v = matvec(&columns, &v);
                diag.push(v.get(&c).cloned().unwrap_or_else(S::zero));
            }
            let wc = S::from_gaussian(&weights[c], &BigRational::zero());
            diag.into_iter().map(|z| z * wc.clone()).collect()
        })
        .collect();
    let dim = S::from_gaussian(&module.dim_n_window(), &BigRational::zero());
    let mut compressed = vec![S::from_real(t.k() as i64)];
    for m in 0..m_max {
        let sum = per_coordinate.iter().fold(S::zero(), |acc, d| acc + d[m].clone());
        compressed.push(sum / dim.clone());
    }
    Ok(Moments { exact, compressed })
}

/// Eigenvalues of `P T P` with their masses `τ(block) / dim_N P`. The masses
/// add up to `k`.
pub fn spectral_measure<S: Scalar>(t: &EquivariantOperator<S>, w: &FolnerWindow) -> Result<Vec<(f64, f64)>> {
    require_self_adjoint(t)?;
    let (module, columns) = square_columns(t, w)?;
    let weights = t.model().block_weights();
    let dim = rational_to_f64(&module.dim_n_window());
    let nblocks = weights.len();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); nblocks];
    for p in 0..module.len() {
        members[module.block_of(p)].push(p);
    }
    let mut out = Vec::new();
    for (b, idx) in members.iter().enumerate() {
        if idx.is_empty() {
            continue;
        }
        let local: HashMap<usize, usize> = idx.iter().enumerate().map(|(l, &p)| (p, l)).collect();
        let mut m: DenseMatrix<S> = DenseMatrix::zeros(idx.len(), idx.len());
        for (j, &p) in idx.iter().enumerate() {
            for (r, z) in &columns[p] {
                let i = *local.get(r).ok_or(Error::NotEquivariant { generator: b })?;
                m.set(i, j, z.clone());
            }
        }
        let mass = rational_to_f64(&weights[b]) / dim;
        out.extend(S::hermitian_eigenvalues(&m)?.into_iter().map(|l| (l, mass)));
    }
    out.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Histogram {
    /// `bins + 1` increasing edges.
    pub edges: Vec<f64>,
    pub masses: Vec<f64>,
}

impl Histogram {
    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// `Σ mass · center^m`, a midpoint approximation of the `m`-th moment.
    pub fn moment(&self, m: u32) -> f64 {
        self.masses
            .iter()
            .enumerate()
            .map(|(i, w)| w * (0.5 * (self.edges[i] + self.edges[i + 1])).powi(m as i32))
            .sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("lower,upper,mass\n");
        for (i, w) in self.masses.iter().enumerate() {
            out.push_str(&format!("{:.12},{:.12},{:.12}\n", self.edges[i], self.edges[i + 1], w));
        }
        out
    }
}

/// Histogram of the eigenvalues of `P T P`. `range` defaults to the spectrum
/// hull; a degenerate hull `{λ}` is widened to `[λ − 1/2, λ + 1/2]`.
pub fn spectral_density<S: Scalar>(
    t: &EquivariantOperator<S>,
    w: &FolnerWindow,
    bins: usize,
    range: Option<(f64, f64)>,
) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::Invalid("histogram needs at least one bin".into()));
    }
    let measure = spectral_measure(t, w)?;
    let (mut lo, mut hi) = range.unwrap_or_else(|| {
        measure.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (l, _)| (lo.min(*l), hi.max(*l)))
    });
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(Error::Invalid(format!("histogram range [{lo}, {hi}]")));
    }
    if hi - lo < 1e-12 {
        lo -= 0.5;
        hi += 0.5;
    }
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| lo + width * i as f64).collect();
    let mut masses = vec![0.0; bins];
    for (l, mass) in measure {
        if l < lo - 1e-9 * width || l > hi + 1e-9 * width {
            continue;
        }
        let bin = (((l - lo) / width).floor().max(0.0) as usize).min(bins - 1);
        masses[bin] += mass;
    }
    Ok(Histogram { edges, masses })
}
