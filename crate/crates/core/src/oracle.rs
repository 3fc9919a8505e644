//! Ground truth computed without windows: Fourier symbols on `ℤ^d`, the left
//! regular representation of finite groups, and closed-walk counting for the
//! Harper operator.

use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;

use crate::engine::EquivariantOperator;
use crate::error::{Error, Result};
use crate::group::{FiniteGroup, Group};
use crate::linalg::exact::fraction_free_rank;
use crate::linalg::{DenseMatrix, Tolerance};
use crate::model::ModelKind;
use crate::scalar::{GaussianRational, Scalar};

/// Laurent polynomial in `d` variables: exponent vector ↦ coefficient.
pub type Laurent = BTreeMap<Vec<i64>, Complex64>;

/// `k × k` matrix of Laurent polynomials, the Fourier transform of an element
/// of `M_k(ℂℤ^d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolMatrix {
    d: usize,
    k: usize,
    entries: Vec<Laurent>,
}

impl SymbolMatrix {
    /// Row-major entries. Zero coefficients are dropped.
    pub fn new(d: usize, k: usize, entries: Vec<Laurent>) -> Result<Self> {
        if k == 0 || entries.len() != k * k {
            return Err(Error::Shape(format!("{} entries for a {k}×{k} symbol", entries.len())));
        }
        if let Some(bad) = entries.iter().flat_map(|e| e.keys()).find(|x| x.len() != d) {
            return Err(Error::InvalidIndex { index: bad.clone(), reason: format!("expected {d} exponents") });
        }
        let entries = entries.into_iter().map(|mut e| {
            e.retain(|_, z| *z != Complex64::zero());
            e
        });
        Ok(SymbolMatrix { d, k, entries: entries.collect() })
    }

    /// Convenience constructor for `k = 1`.
    pub fn scalar(d: usize, terms: impl IntoIterator<Item = (Vec<i64>, Complex64)>) -> Result<Self> {
        let mut e = Laurent::new();
        for (x, z) in terms {
            *e.entry(x).or_insert_with(Complex64::zero) += z;
        }
        Self::new(d, 1, vec![e])
    }

    pub fn from_operator<S: Scalar>(t: &EquivariantOperator<S>) -> Result<Self> {
        let d = match t.model().kind() {
            ModelKind::Group(Group::FreeAbelian { rank }) => *rank,
            _ => return Err(Error::InvalidModel(format!("{} has no Fourier symbol on a torus", t.model()))),
        };
        let entries = t
            .entries()
            .iter()
            .map(|e| e.terms().iter().map(|(w, a)| (w.clone(), a.entries()[0].to_c64())).collect())
            .collect();
        Self::new(d, t.k(), entries)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn entry(&self, i: usize, j: usize) -> &Laurent {
        &self.entries[i * self.k + j]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Laurent::is_empty)
    }

    /// Largest `|exponent|` along any single axis.
    pub fn axis_degree(&self) -> usize {
        self.entries.iter().flat_map(|e| e.keys()).flat_map(|x| x.iter().map(|c| c.unsigned_abs() as usize)).max().unwrap_or(0)
    }

    /// `sym(θ)* = sym(θ)` for all `θ`, i.e. `c_ij(γ) = conj(c_ji(−γ))`,
    /// checked on coefficients.
    pub fn is_self_adjoint(&self) -> bool {
        let scale = self.entries.iter().flat_map(|e| e.values()).map(|z| z.norm()).fold(0.0, f64::max);
        let tol = 1e-12 * scale.max(1.0);
        for i in 0..self.k {
            for j in 0..self.k {
                let (a, b) = (self.entry(i, j), self.entry(j, i));
                let check = |from: &Laurent, to: &Laurent| {
                    from.iter().all(|(x, z)| {
                        let neg: Vec<i64> = x.iter().map(|c| -c).collect();
                        let w = to.get(&neg).copied().unwrap_or_default();
                        (z - w.conj()).norm() <= tol
                    })
                };
                if !check(a, b) || !check(b, a) {
                    return false;
                }
            }
        }
        true
    }

    /// `sym(θ)` with `z_j = exp(2πi θ_j)`.
    pub fn eval(&self, theta: &[f64]) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.k, self.k, |i, j| {
            self.entry(i, j)
                .iter()
                .map(|(x, z)| {
                    let phase: f64 = x.iter().zip(theta).map(|(c, t)| *c as f64 * t).sum();
                    z * Complex64::from_polar(1.0, std::f64::consts::TAU * phase)
                })
                .sum()
        })
    }
}

fn grid_point(flat: usize, per_axis: usize, d: usize, shift: f64) -> Vec<f64> {
    let mut rest = flat;
    (0..d)
        .map(|_| {
            let i = rest % per_axis;
            rest /= per_axis;
            (i as f64 + shift) / per_axis as f64
        })
        .collect()
}

/// `∫_{[0,1]^d} Tr sym(θ)^m dθ` by the trapezoid rule on `m·D + 1` points per
/// axis, which integrates every occurring character exactly. Returns `k` for
/// `m = 0`.
pub fn torus_moment_oracle(sym: &SymbolMatrix, m: u32) -> Result<f64> {
    if !sym.is_self_adjoint() {
        return Err(Error::NotSelfAdjoint);
    }
    if m == 0 {
        return Ok(sym.k as f64);
    }
    let per_axis = m as usize * sym.axis_degree() + 1;
    let total = per_axis.checked_pow(sym.d as u32).ok_or_else(|| Error::Numerical("quadrature grid overflows".into()))?;
    let sum: Complex64 = (0..total)
        .into_par_iter()
        .map(|flat| {
            let s = sym.eval(&grid_point(flat, per_axis, sym.d, 0.0));
            let mut p = s.clone();
            for _ in 1..m {
                p = &p * &s;
            }
            p.trace()
        })
        .sum();
    Ok(sum.re / total as f64)
}

/// Sampling parameters for [`torus_kernel_oracle`].
#[derive(Debug, Clone, Copy)]
pub struct KernelOracleOptions {
    /// Points per axis before capping.
    pub per_axis: usize,
    /// Cap on the total number of samples.
    pub max_samples: usize,
    pub tolerance: Tolerance,
}

impl Default for KernelOracleOptions {
    fn default() -> Self {
        KernelOracleOptions { per_axis: 512, max_samples: 512 * 512, tolerance: Tolerance::default() }
    }
}

/// `∫ (k − rank sym(θ)) dθ`, estimated by averaging over a shifted grid. For
/// `k = 1` the answer is exact: zero sets of nonzero trigonometric
/// polynomials are null.
pub fn torus_kernel_oracle(sym: &SymbolMatrix, options: &KernelOracleOptions) -> f64 {
    if sym.k == 1 {
        return if sym.is_zero() { 1.0 } else { 0.0 };
    }
    let mut per_axis = options.per_axis.max(1);
    while per_axis > 1 && per_axis.checked_pow(sym.d as u32).is_none_or(|t| t > options.max_samples) {
        per_axis -= 1;
    }
    let total = per_axis.pow(sym.d as u32);
    // Irrational offset keeps samples off rational points, where zero sets of
    // lattice symbols tend to sit.
    let shift = 0.381_966_011_250_105;
    let nullity: usize = (0..total)
        .into_par_iter()
        .map(|flat| {
            let s = sym.eval(&grid_point(flat, per_axis, sym.d, shift));
            let sv = s.singular_values();
            let max = sv.iter().cloned().fold(0.0, f64::max);
            let cutoff = options.tolerance.relative * max * sym.k as f64;
            let rank = if max == 0.0 { 0 } else { sv.iter().filter(|x| **x > cutoff).count() };
            sym.k - rank
        })
        .sum();
    nullity as f64 / total as f64
}

/// Finite factors of a finite group, in word order.
fn finite_factors(g: &Group) -> Result<Vec<&FiniteGroup>> {
    match g {
        Group::Finite(f) => Ok(vec![f]),
        Group::Product(fs) => Ok(fs.iter().map(finite_factors).collect::<Result<Vec<_>>>()?.concat()),
        other => Err(Error::InvalidModel(format!("{other} is not finite"))),
    }
}

/// `dim ker T` for `T ∈ M_k(ℂΓ)`, `Γ` finite: the nullity of the left regular
/// representation matrix divided by `|Γ|`, by fraction-free elimination.
pub fn finite_group_oracle(t: &EquivariantOperator<GaussianRational>) -> Result<BigRational> {
    let group = match t.model().kind() {
        ModelKind::Group(g) => g,
        _ => return Err(Error::InvalidModel("the finite-group oracle needs a group model".into())),
    };
    let factors = finite_factors(group)?;
    let orders: Vec<usize> = factors.iter().map(|f| f.order()).collect();
    let order: usize = orders.iter().product();
    let flat = |w: &[i64]| w.iter().zip(&orders).fold(0usize, |acc, (x, m)| acc * m + *x as usize);
    let unflat = |mut x: usize| {
        let mut w = vec![0usize; orders.len()];
        for (slot, m) in w.iter_mut().zip(&orders).rev() {
            *slot = x % m;
            x /= m;
        }
        w
    };
    let mul = |a: usize, b: usize| {
        let (wa, wb) = (unflat(a), unflat(b));
        let prod: Vec<i64> = factors.iter().zip(wa.iter().zip(&wb)).map(|(f, (x, y))| f.table()[*x][*y] as i64).collect();
        flat(&prod)
    };
    let k = t.k();
    let n = k * order;
    let mut m: DenseMatrix<GaussianRational> = DenseMatrix::zeros(n, n);
    // (Tξ)_i = Σ_j T_ij ξ_j, and s·δ_h = δ_{sh}.
    for i in 0..k {
        for j in 0..k {
            for (s, a) in t.entry(i, j).terms() {
                let s = flat(s);
                for h in 0..order {
                    let (r, c) = (i * order + mul(s, h), j * order + h);
                    let v = m.get(r, c).clone() + a.entries()[0].clone();
                    m.set(r, c, v);
                }
            }
        }
    }
    let nullity = n - fraction_free_rank(&m);
    Ok(BigRational::new(BigInt::from(nullity), BigInt::from(order)))
}

/// `τ(h^m)` for the Harper element `h = u + u* + v + v*` of the rotation
/// algebra, by counting closed lattice walks by enclosed signed area.
///
/// A word `w_1 ⋯ w_m` in unit steps equals `exp(−2πiθ A) · u^{ΣP} v^{ΣQ}`
/// with `A = Σ_k Q_{k−1} p_k`, where `Q_{k−1}` is the `v`-exponent collected
/// before step `k`.
pub fn harper_moment_oracle(theta: f64, m: u32) -> Complex64 {
    harper_area_counts(m)
        .into_iter()
        .map(|(a, c)| c as f64 * Complex64::from_polar(1.0, -std::f64::consts::TAU * theta * a as f64))
        .sum()
}

/// Number of closed walks of length `m` on `ℤ^2` grouped by signed area.
pub fn harper_area_counts(m: u32) -> BTreeMap<i64, u128> {
    let mut counts: HashMap<(i64, i64, i64), u128> = HashMap::from([((0, 0, 0), 1)]);
    for _ in 0..m {
        let mut next: HashMap<(i64, i64, i64), u128> = HashMap::new();
        for (&(p, q, a), &c) in &counts {
            for (dp, dq) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                *next.entry((p + dp, q + dq, a + q * dp)).or_default() += c;
            }
        }
        counts = next;
    }
    let mut out = BTreeMap::new();
    for ((p, q, a), c) in counts {
        if p == 0 && q == 0 {
            *out.entry(a).or_default() += c;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AlgebraElement, Model};

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn circle_second_moment() {
        let sym = SymbolMatrix::scalar(1, [(vec![1], c(1.0)), (vec![-1], c(1.0))]).unwrap();
        assert!((torus_moment_oracle(&sym, 2).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(torus_moment_oracle(&sym, 0).unwrap(), 1.0);
    }

    #[test]
    fn laplacian_moments() {
        let sym = SymbolMatrix::scalar(
            2,
            [(vec![0, 0], c(4.0)), (vec![1, 0], c(-1.0)), (vec![-1, 0], c(-1.0)), (vec![0, 1], c(-1.0)), (vec![0, -1], c(-1.0))],
        )
        .unwrap();
        assert!((torus_moment_oracle(&sym, 1).unwrap() - 4.0).abs() < 1e-10);
        assert!((torus_moment_oracle(&sym, 2).unwrap() - 20.0).abs() < 1e-10);
    }

    #[test]
    fn non_hermitian_symbol_is_rejected() {
        let sym = SymbolMatrix::scalar(1, [(vec![1], c(1.0))]).unwrap();
        assert!(matches!(torus_moment_oracle(&sym, 2), Err(Error::NotSelfAdjoint)));
    }

    #[test]
    fn kernel_oracle_examples() {
        let opts = KernelOracleOptions::default();
        let one_minus_z = SymbolMatrix::scalar(1, [(vec![0], c(1.0)), (vec![1], c(-1.0))]).unwrap();
        assert_eq!(torus_kernel_oracle(&one_minus_z, &opts), 0.0);
        let zero = SymbolMatrix::scalar(1, []).unwrap();
        assert_eq!(torus_kernel_oracle(&zero, &opts), 1.0);
        let diag = SymbolMatrix::new(
            1,
            2,
            vec![one_minus_z.entry(0, 0).clone(), Laurent::new(), Laurent::new(), Laurent::new()],
        )
        .unwrap();
        assert_eq!(torus_kernel_oracle(&diag, &opts), 1.0);
    }

    #[test]
    fn regular_representation_of_z2() {
        let m = Model::group(Group::Finite(FiniteGroup::cyclic(2).unwrap()));
        let q = |x| GaussianRational::from_real(x);
        let x = AlgebraElement::from_scalar_terms(&m, [(vec![0], q(1)), (vec![1], q(1))]).unwrap();
        let r = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
        assert_eq!(finite_group_oracle(&EquivariantOperator::from_element(x)).unwrap(), r(1, 2));
        assert_eq!(finite_group_oracle(&EquivariantOperator::zero(&m, 1).unwrap()).unwrap(), r(1, 1));
        assert_eq!(finite_group_oracle(&EquivariantOperator::identity(&m, 1).unwrap()).unwrap(), r(0, 1));
    }

    #[test]
    fn harper_low_moments() {
        for theta in [0.0, 0.25, 0.3819660112501051] {
            assert!((harper_moment_oracle(theta, 1)).norm() < 1e-12);
            assert!((harper_moment_oracle(theta, 2) - c(4.0)).norm() < 1e-12);
            let expected = 28.0 + 8.0 * (std::f64::consts::TAU * theta).cos();
            assert!((harper_moment_oracle(theta, 4) - c(expected)).norm() < 1e-9);
        }
        let areas = harper_area_counts(4);
        assert_eq!(areas.values().sum::<u128>(), 36);
        assert_eq!(areas.get(&1), Some(&4));
        assert_eq!(areas.get(&-1), Some(&4));
    }
}
