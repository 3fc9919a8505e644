//! Scalar fields shared by every computation.
//!
//! Two families implement [`Scalar`]: exact Gaussian rationals
//! (`Complex<BigRational>`) and floating complex numbers (`Complex<f32>`,
//! `Complex<f64>`). Each scalar type also selects the linear-algebra backend
//! used for ranks, kernels and projections.

use std::fmt::Debug;
use std::ops::{AddAssign, MulAssign, Neg, SubAssign};

use nalgebra::RealField;
use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Float, Num, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix, RankInfo, SparseVec, Tolerance};

/// Which arithmetic a computation runs in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Float,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Exact => "exact",
            Backend::Float => "float",
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Backend::Exact),
            "float" => Ok(Backend::Float),
            other => Err(Error::Invalid(format!("unknown backend `{other}`"))),
        }
    }
}

/// An angle measured in full turns, so that the phase it produces is
/// `exp(2πi·turns)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Turns {
    Rational(BigRational),
    Float(f64),
}

impl Turns {
    /// `self · t`, reduced to the interval `[0, 1)`.
    pub fn times(&self, t: i64) -> Turns {
        match self {
            Turns::Rational(r) => {
                let x = r * BigRational::from_integer(BigInt::from(t));
                Turns::Rational(&x - x.floor())
            }
            Turns::Float(f) => {
                // Split to keep the fractional part accurate for large t.
                let whole = f.trunc();
                let frac = f - whole;
                let x = frac * t as f64;
                Turns::Float(x - x.floor())
            }
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Turns::Rational(r) => rational_to_f64(r),
            Turns::Float(f) => *f,
        }
    }
}

/// Real scalar types that back the floating complex backend.
pub trait FloatReal: RealField + Float + Copy + Send + Sync + 'static {}

impl FloatReal for f32 {}
impl FloatReal for f64 {}

/// A complex scalar field together with its linear-algebra backend.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Num
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    const BACKEND: Backend;

    fn conj(&self) -> Self;

    fn from_ratio(num: i64, den: i64) -> Self;

    fn from_gaussian(re: &BigRational, im: &BigRational) -> Self;

    fn from_f64_parts(re: f64, im: f64) -> Result<Self>;

    /// `exp(2πi·turns)`.
    fn root_of_unity(turns: &Turns) -> Result<Self>;

    fn to_c64(&self) -> Complex64;

    /// Exact Gaussian-rational value, when the scalar carries one.
    fn to_gaussian(&self) -> Option<(BigRational, BigRational)>;

    /// Equality up to the backend's notion of closeness. `scale` is the
    /// magnitude the comparison is relative to.
    fn close_to(&self, other: &Self, scale: f64) -> bool;

    /// Fixed-format rendering used in reports.
    fn render(&self) -> String;

    fn rank(vectors: &[SparseVec<Self>], dim: usize, tol: &Tolerance) -> Result<RankInfo>;

    /// Basis of linear relations among `columns` (each of length `dim`),
    /// i.e. of the kernel of the matrix whose columns they are.
    fn kernel(columns: &[SparseVec<Self>], dim: usize, tol: &Tolerance) -> Result<Vec<SparseVec<Self>>>;

    /// Projection onto the span of `columns`, orthogonal for the diagonal
    /// metric `⟨x, y⟩ = Σ weights[c]·conj(x[c])·y[c]`.
    fn range_projection(
        columns: &[SparseVec<Self>],
        weights: &[Self],
        dim: usize,
        tol: &Tolerance,
    ) -> Result<DenseMatrix<Self>>;

    /// Eigenvalues of a Hermitian matrix, ascending.
    fn hermitian_eigenvalues(matrix: &DenseMatrix<Self>) -> Result<Vec<f64>> {
        linalg::float::hermitian_eigenvalues_c64(&matrix.map(|x| x.to_c64()))
    }

    fn is_exact() -> bool {
        Self::BACKEND == Backend::Exact
    }

    fn from_real(x: i64) -> Self {
        Self::from_ratio(x, 1)
    }

    fn i() -> Self {
        Self::from_gaussian(&BigRational::zero(), &BigRational::one())
    }

    fn magnitude(&self) -> f64 {
        self.to_c64().norm()
    }
}

/// Exact Gaussian rationals.
pub type GaussianRational = Complex<BigRational>;

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Fall back to a scaled division for huge numerators/denominators.
        let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000) as usize;
        let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
        let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

pub fn render_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `"p"`, `"p/q"` or a decimal literal such as `"0.25"` exactly.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Invalid(format!("cannot parse `{s}` as a rational number"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Invalid(format!("zero denominator in `{s}`")));
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let negative = whole.trim_start().starts_with('-');
        let digits = format!("{}{}", whole.trim_start_matches(['-', '+']), frac);
        let n: BigInt = digits.parse().map_err(|_| bad())?;
        let d = num_traits::pow(BigInt::from(10), frac.len());
        let r = BigRational::new(n, d);
        return Ok(if negative { -r } else { r });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}

fn exact_quarter_turn(turns: &BigRational) -> Option<GaussianRational> {
    let four = BigRational::from_integer(BigInt::from(4));
    let q = turns * &four;
    if !q.is_integer() {
        return None;
    }
    let k = q.numer().mod_floor(&BigInt::from(4)).to_i64()?;
    let (re, im) = match k {
        0 => (1, 0),
        1 => (0, 1),
        2 => (-1, 0),
        _ => (0, -1),
    };
    Some(Complex::new(
        BigRational::from_integer(re.into()),
        BigRational::from_integer(im.into()),
    ))
}

impl Scalar for GaussianRational {
    const BACKEND: Backend = Backend::Exact;

    fn conj(&self) -> Self {
        Complex::conj(self)
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Complex::new(BigRational::new(num.into(), den.into()), BigRational::zero())
    }

    fn from_gaussian(re: &BigRational, im: &BigRational) -> Self {
        Complex::new(re.clone(), im.clone())
    }

    fn from_f64_parts(re: f64, im: f64) -> Result<Self> {
        let conv = |x: f64| {
            BigRational::from_float(x).ok_or_else(|| Error::Invalid(format!("non-finite value {x}")))
        };
        Ok(Complex::new(conv(re)?, conv(im)?))
    }

    fn root_of_unity(turns: &Turns) -> Result<Self> {
        let exact = match turns {
            Turns::Rational(r) => exact_quarter_turn(r),
            Turns::Float(f) => BigRational::from_float(*f).and_then(|r| exact_quarter_turn(&r)),
        };
        exact.ok_or_else(|| Error::Unrepresentable {
            backend: "exact",
            what: format!("the phase exp(2πi·{})", turns.to_f64()),
        })
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }

    fn to_gaussian(&self) -> Option<(BigRational, BigRational)> {
        Some((self.re.clone(), self.im.clone()))
    }

    fn close_to(&self, other: &Self, _scale: f64) -> bool {
        self == other
    }

    fn render(&self) -> String {
        let re = &self.re;
        let im = &self.im;
        if im.is_zero() {
            return render_rational(re);
        }
        let im_abs = im.abs();
        let im_part = if im_abs.is_one() { "i".to_string() } else { format!("{}i", render_rational(&im_abs)) };
        if re.is_zero() {
            if im.is_negative() {
                format!("-{im_part}")
            } else {
                im_part
            }
        } else {
            let sign = if im.is_negative() { '-' } else { '+' };
            format!("{}{}{}", render_rational(re), sign, im_part)
        }
    }

    fn rank(vectors: &[SparseVec<Self>], dim: usize, _tol: &Tolerance) -> Result<RankInfo> {
        Ok(RankInfo { rank: linalg::modular::certified_rank(vectors, dim)?, gap: None })
    }

    fn kernel(columns: &[SparseVec<Self>], dim: usize, _tol: &Tolerance) -> Result<Vec<SparseVec<Self>>> {
        Ok(linalg::echelon::column_relations(columns, dim))
    }

    fn range_projection(
        columns: &[SparseVec<Self>],
        weights: &[Self],
        dim: usize,
        _tol: &Tolerance,
    ) -> Result<DenseMatrix<Self>> {
        linalg::exact::weighted_projection(columns, weights, dim)
    }
}

impl<T: FloatReal> Scalar for Complex<T> {
    const BACKEND: Backend = Backend::Float;

    fn conj(&self) -> Self {
        Complex::conj(self)
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Complex::new(T::from_f64(num as f64 / den as f64).unwrap(), T::zero())
    }

    fn from_gaussian(re: &BigRational, im: &BigRational) -> Self {
        Complex::new(
            T::from_f64(rational_to_f64(re)).unwrap(),
            T::from_f64(rational_to_f64(im)).unwrap(),
        )
    }

    fn from_f64_parts(re: f64, im: f64) -> Result<Self> {
        if !re.is_finite() || !im.is_finite() {
            return Err(Error::Invalid(format!("non-finite value {re}+{im}i")));
        }
        Ok(Complex::new(T::from_f64(re).unwrap(), T::from_f64(im).unwrap()))
    }

    fn root_of_unity(turns: &Turns) -> Result<Self> {
        // Exact quarter turns stay exact so that integer phases do not pick up
        // rounding noise.
        if let Turns::Rational(r) = turns {
            if let Some(z) = exact_quarter_turn(r) {
                return Ok(Self::from_gaussian(&z.re, &z.im));
            }
        }
        let angle = 2.0 * std::f64::consts::PI * turns.to_f64();
        Ok(Complex::new(T::from_f64(angle.cos()).unwrap(), T::from_f64(angle.sin()).unwrap()))
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64().unwrap(), self.im.to_f64().unwrap())
    }

    fn to_gaussian(&self) -> Option<(BigRational, BigRational)> {
        None
    }

    fn close_to(&self, other: &Self, scale: f64) -> bool {
        let eps = T::epsilon().to_f64().unwrap();
        (self.to_c64() - other.to_c64()).norm() <= 64.0 * eps * scale.max(1.0)
    }

    fn render(&self) -> String {
        let z = self.to_c64();
        if z.im == 0.0 {
            format!("{:.12}", z.re)
        } else {
            format!("{:.12}{:+.12}i", z.re, z.im)
        }
    }

    fn rank(vectors: &[SparseVec<Self>], dim: usize, tol: &Tolerance) -> Result<RankInfo> {
        linalg::float::svd_rank(vectors, dim, tol)
    }

    fn kernel(columns: &[SparseVec<Self>], dim: usize, tol: &Tolerance) -> Result<Vec<SparseVec<Self>>> {
        linalg::float::svd_kernel(columns, dim, tol)
    }

    fn range_projection(
        columns: &[SparseVec<Self>],
        weights: &[Self],
        dim: usize,
        tol: &Tolerance,
    ) -> Result<DenseMatrix<Self>> {
        linalg::float::weighted_projection(columns, weights, dim, tol)
    }

    fn hermitian_eigenvalues(matrix: &DenseMatrix<Self>) -> Result<Vec<f64>> {
        linalg::float::hermitian_eigenvalues_c64(&matrix.map(|x| x.to_c64()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter_turns_are_exact() {
        let i = GaussianRational::root_of_unity(&Turns::Rational(BigRational::new(1.into(), 4.into()))).unwrap();
        assert_eq!(i, GaussianRational::i());
        let m = GaussianRational::root_of_unity(&Turns::Rational(BigRational::new(5.into(), 2.into()))).unwrap();
        assert_eq!(m, -GaussianRational::one());
        assert!(GaussianRational::root_of_unity(&Turns::Float(0.3)).is_err());
    }

    #[test]
    fn float_phase_matches_cos_sin() {
        let z = Complex64::root_of_unity(&Turns::Float(0.125)).unwrap();
        assert!((z.re - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((z.im - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn turns_reduce_mod_one() {
        let t = Turns::Rational(BigRational::new(3.into(), 8.into())).times(5);
        assert_eq!(t, Turns::Rational(BigRational::new(7.into(), 8.into())));
        let f = Turns::Float(0.75).times(-3);
        assert!((f.to_f64() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn parse_and_render() {
        assert_eq!(parse_rational("3/6").unwrap(), BigRational::new(1.into(), 2.into()));
        assert_eq!(parse_rational("-0.25").unwrap(), BigRational::new((-1).into(), 4.into()));
        assert!(parse_rational("1/0").is_err());
        let z = GaussianRational::new(BigRational::new(1.into(), 2.into()), BigRational::from_integer((-1).into()));
        assert_eq!(z.render(), "1/2-i");
        assert_eq!(Complex64::new(0.5, 0.0).render(), "0.500000000000");
    }
}
