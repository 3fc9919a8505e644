use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use super::certificate::default_probes;
use super::compress::kernel_range_dims;
use super::EquivariantOperator;
use crate::dimension::{phi_state, WindowModule};
use crate::error::{Error, Result};
use crate::linalg::{SingularGap, Tolerance};
use crate::model::{folner_window, AlgebraElement, FolnerWindow};
use crate::scalar::{rational_to_f64, render_rational, Backend, Scalar};

#[derive(Debug, Clone)]
pub struct EstimateOptions {
    pub tolerance: Tolerance,
    /// Fit `a_n ≈ a + c/n` through the last two windows. Heuristic: no rate
    /// of convergence is known.
    pub extrapolate: bool,
    pub parallel: bool,
    /// Record wall time per window. Off gives byte-identical reports.
    pub timing: bool,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        EstimateOptions { tolerance: Tolerance::default(), extrapolate: false, parallel: true, timing: true }
    }
}

/// Kernel and range dimensions of one window.
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionReport {
    pub n: usize,
    pub dim_p: BigRational,
    pub dim_s: BigRational,
    pub ratio: BigRational,
    pub a: BigRational,
    pub b: BigRational,
    pub k: usize,
    /// `max |φ_P(x) − τ(x)|` over the probes.
    pub phi_dev: f64,
    /// The deviation vanished exactly (exact backend only).
    pub phi_exact_zero: bool,
    pub seconds: f64,
    pub backend: Backend,
    pub tolerance: f64,
    pub gap: Option<SingularGap>,
}

#[derive(Debug, Clone, Serialize)]
struct JsonRow {
    n: usize,
    #[serde(rename = "dim_P")]
    dim_p: String,
    #[serde(rename = "dim_S")]
    dim_s: String,
    ratio: String,
    a_n: String,
    b_n: String,
    phi_dev: String,
    seconds: String,
    backend: &'static str,
    threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gap: Option<SingularGap>,
}

impl DimensionReport {
    pub const CSV_HEADER: &'static str = "n,dim_P,dim_S,ratio,a_n,b_n,phi_dev,seconds";

    fn number(&self, r: &BigRational) -> String {
        match self.backend {
            Backend::Exact => render_rational(r),
            Backend::Float => format!("{:.12}", rational_to_f64(r)),
        }
    }

    fn phi_text(&self) -> String {
        if self.phi_exact_zero {
            "0".into()
        } else {
            format!("{:.12e}", self.phi_dev)
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{:.6}",
            self.n,
            self.number(&self.dim_p),
            self.number(&self.dim_s),
            self.number(&self.ratio),
            self.number(&self.a),
            self.number(&self.b),
            self.phi_text(),
            self.seconds
        )
    }

    pub fn to_csv(reports: &[DimensionReport]) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in reports {
            out.push_str(&r.csv_row());
            out.push('\n');
        }
        out
    }

    pub fn to_json(reports: &[DimensionReport]) -> Result<String> {
        let rows: Vec<JsonRow> = reports
            .iter()
            .map(|r| JsonRow {
                n: r.n,
                dim_p: r.number(&r.dim_p),
                dim_s: r.number(&r.dim_s),
                ratio: r.number(&r.ratio),
                a_n: r.number(&r.a),
                b_n: r.number(&r.b),
                phi_dev: r.phi_text(),
                seconds: format!("{:.6}", r.seconds),
                backend: r.backend.name(),
                threshold: (r.backend == Backend::Float).then_some(r.tolerance),
                gap: r.gap,
            })
            .collect();
        serde_json::to_string_pretty(&rows).map_err(|e| Error::Invalid(e.to_string()))
    }

    /// `a_n + b_n − k · dim_N S / dim_N P`, zero on the exact backend.
    pub fn rank_nullity_defect(&self) -> BigRational {
        &self.a + &self.b - BigRational::from_integer(BigInt::from(self.k)) * &self.ratio
    }
}

/// The sequence `a_n` together with the last value as the estimate.
#[derive(Debug, Clone)]
pub struct KernelEstimate {
    pub reports: Vec<DimensionReport>,
    pub estimate: BigRational,
    /// Heuristic `a + c/n` fit through the last two windows.
    pub extrapolated: Option<f64>,
}

/// `max |φ_P(x) − τ(x)|` over `probes`, and whether it vanishes exactly.
pub fn phi_deviation<S: Scalar>(w: &FolnerWindow, probes: &[AlgebraElement<S>]) -> Result<(f64, bool)> {
    let module = WindowModule::outer(w, 1)?;
    let mut max = 0.0f64;
    let mut exact_zero = S::is_exact();
    for x in probes {
        let d = phi_state(&module, x)? - x.trace();
        if !d.is_zero() {
            exact_zero = false;
        }
        max = max.max(d.magnitude());
    }
    Ok((max, exact_zero))
}

fn report_for<S: Scalar>(
    t: &EquivariantOperator<S>,
    n: usize,
    probes: &[AlgebraElement<S>],
    options: &EstimateOptions,
) -> Result<DimensionReport> {
    let start = Instant::now();
    let w = folner_window(t.model(), &t.support(), n)?;
    let kr = kernel_range_dims(t, &w, &options.tolerance)?;
    let (phi_dev, phi_exact_zero) = phi_deviation(&w, probes)?;
    Ok(DimensionReport {
        n,
        dim_p: kr.dim_p,
        dim_s: kr.dim_s,
        ratio: kr.ratio,
        a: kr.a,
        b: kr.b,
        k: kr.k,
        phi_dev,
        phi_exact_zero,
        seconds: if options.timing { start.elapsed().as_secs_f64() } else { 0.0 },
        backend: S::BACKEND,
        tolerance: options.tolerance.relative,
        gap: kr.gap,
    })
}

/// Runs the kernel-dimension approximation over an increasing schedule of
/// window sizes. Windows are independent and run in parallel when
/// `options.parallel` is set; the output keeps schedule order.
pub fn estimate_vn_kernel_dim<S: Scalar>(
    t: &EquivariantOperator<S>,
    schedule: &[usize],
    options: &EstimateOptions,
) -> Result<KernelEstimate> {
    if schedule.is_empty() {
        return Err(Error::Invalid("empty window schedule".into()));
    }
    if schedule.windows(2).any(|p| p[0] >= p[1]) {
        return Err(Error::Invalid(format!("window schedule {schedule:?} is not strictly increasing")));
    }
    let entries: Vec<AlgebraElement<S>> = t.entries().to_vec();
    let probes = default_probes(&entries)?;
    let reports: Vec<DimensionReport> = if options.parallel {
        schedule.par_iter().map(|&n| report_for(t, n, &probes, options)).collect::<Result<_>>()?
    } else {
        schedule.iter().map(|&n| report_for(t, n, &probes, options)).collect::<Result<_>>()?
    };
    let estimate = reports.last().expect("non-empty schedule").a.clone();
    let extrapolated = match (options.extrapolate, reports.len()) {
        (true, len) if len >= 2 => {
            let (r1, r2) = (&reports[len - 2], &reports[len - 1]);
            let (n1, n2) = (r1.n as f64, r2.n as f64);
            Some((n2 * rational_to_f64(&r2.a) - n1 * rational_to_f64(&r1.a)) / (n2 - n1))
        }
        _ => None,
    };
    Ok(KernelEstimate { reports, estimate, extrapolated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{FiniteGroup, Group};
    use crate::model::Model;
    use crate::scalar::GaussianRational as Q;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn z2_one_plus_generator() {
        let m = Model::group(Group::Finite(FiniteGroup::cyclic(2).unwrap()));
        let x = AlgebraElement::from_scalar_terms(&m, [(vec![0], Q::from_real(1)), (vec![1], Q::from_real(1))]).unwrap();
        let est = estimate_vn_kernel_dim(&EquivariantOperator::from_element(x), &[1], &EstimateOptions::default()).unwrap();
        assert_eq!(est.estimate, r(1, 2));
        assert!(est.reports[0].phi_exact_zero);
    }

    #[test]
    fn diagonal_kernel_sequence() {
        let m = Model::group(Group::free_abelian(1).unwrap());
        let t = AlgebraElement::from_scalar_terms(&m, [(vec![0], Q::from_real(1)), (vec![1], Q::from_real(-1))]).unwrap();
        let op = EquivariantOperator::diagonal(&m, vec![t, AlgebraElement::zero(&m)]).unwrap();
        let opts = EstimateOptions { extrapolate: true, ..Default::default() };
        let est = estimate_vn_kernel_dim(&op, &[2, 4, 8], &opts).unwrap();
        for rep in &est.reports {
            let n = rep.n as i64;
            assert_eq!(rep.a, r(2 * n - 1, 2 * n + 1));
            assert_eq!(rep.rank_nullity_defect(), r(0, 1));
        }
        assert!((est.extrapolated.unwrap() - 1.0).abs() < 0.02);
    }

    #[test]
    fn schedules_are_validated() {
        let m = Model::group(Group::free_abelian(1).unwrap());
        let op = EquivariantOperator::<Q>::identity(&m, 1).unwrap();
        let opts = EstimateOptions::default();
        assert!(estimate_vn_kernel_dim(&op, &[], &opts).is_err());
        assert!(estimate_vn_kernel_dim(&op, &[3, 3], &opts).is_err());
    }

    #[test]
    fn csv_is_exact_on_the_exact_backend() {
        let m = Model::group(Group::free_abelian(2).unwrap());
        let op = EquivariantOperator::<Q>::zero(&m, 1).unwrap();
        let opts = EstimateOptions { timing: false, ..Default::default() };
        let est = estimate_vn_kernel_dim(&op, &[2], &opts).unwrap();
        let csv = DimensionReport::to_csv(&est.reports);
        assert_eq!(csv, "n,dim_P,dim_S,ratio,a_n,b_n,phi_dev,seconds\n2,25,25,1,1,0,0,0.000000\n");
    }
}
