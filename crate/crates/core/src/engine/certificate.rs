use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::One;

use super::compress::check_containment;
use super::estimate::phi_deviation;
use crate::error::{Error, Result};
use crate::model::{AlgebraElement, FolnerWindow, Model};
use crate::scalar::Scalar;

/// A clause of the strong Følner condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Clause {
    /// `T_i(S) ⊆ P`.
    Containment,
    /// `dim_N S / dim_N P > 1 − ε`.
    Ratio,
    /// `max |φ_P(x) − τ(x)| < ε` over the probes.
    State,
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Clause::Containment => "containment",
            Clause::Ratio => "ratio",
            Clause::State => "state",
        })
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct CertificateReport {
    pub n: Option<usize>,
    pub pass: bool,
    pub violated: Vec<Clause>,
    /// First basis index an operator maps outside `P`.
    pub containment: Option<String>,
    #[serde(serialize_with = "ser_rational")]
    pub ratio: BigRational,
    pub eps: f64,
    pub phi_dev: f64,
    pub phi_exact_zero: bool,
}

fn ser_rational<Ser: serde::Serializer>(r: &BigRational, s: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
    s.serialize_str(&crate::scalar::render_rational(r))
}

/// Probe set: the elements, their adjoints, pairwise products, and `1`.
/// Zero elements and duplicates are dropped.
pub fn default_probes<S: Scalar>(ops: &[AlgebraElement<S>]) -> Result<Vec<AlgebraElement<S>>> {
    let Some(first) = ops.first() else {
        return Ok(Vec::new());
    };
    let model = first.model().clone();
    let mut base: Vec<AlgebraElement<S>> = Vec::new();
    for x in ops {
        base.push(x.clone());
        base.push(x.adjoint()?);
    }
    let mut out = base.clone();
    for x in &base {
        for y in &base {
            out.push(x.mul(y)?);
        }
    }
    out.push(AlgebraElement::one(&model));
    let mut seen = BTreeSet::new();
    out.retain(|x| !x.is_zero() && seen.insert(format!("{:?}", x.terms())));
    Ok(out)
}

/// Checks the three clauses of the strong Følner condition on `w` for the
/// operator set `ops`. The state clause is a finite surrogate for the predual
/// norm: it compares `φ_P` with `τ` on `probes` (default probes if `None`).
pub fn verify_folner_certificate<S: Scalar>(
    model: &Arc<Model>,
    ops: &[AlgebraElement<S>],
    w: &FolnerWindow,
    eps: f64,
    probes: Option<&[AlgebraElement<S>]>,
) -> Result<CertificateReport> {
    if ops.is_empty() {
        return Err(Error::Invalid("certificate needs at least one operator".into()));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Invalid(format!("ε = {eps} must be positive")));
    }
    if ops.iter().any(|x| !Arc::ptr_eq(x.model(), model) && **x.model() != **model)
        || (!Arc::ptr_eq(w.model(), model) && **w.model() != **model)
    {
        return Err(Error::ModelMismatch);
    }
    let mut violated = Vec::new();
    let mut containment = None;
    for (i, x) in ops.iter().enumerate() {
        match check_containment(x, w) {
            Ok(()) => {}
            Err(Error::WindowTooSmall(msg)) => {
                containment = Some(format!("operator {i} {msg}"));
                violated.push(Clause::Containment);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let ratio = w.ratio();
    let eps_exact = BigRational::from_float(eps).ok_or_else(|| Error::Invalid(format!("ε = {eps}")))?;
    if ratio <= BigRational::one() - eps_exact {
        violated.push(Clause::Ratio);
    }
    let owned;
    let probes = match probes {
        Some(p) => p,
        None => {
            owned = default_probes(ops)?;
            &owned
        }
    };
    let (phi_dev, phi_exact_zero) = phi_deviation(w, probes)?;
    if phi_dev >= eps {
        violated.push(Clause::State);
    }
    Ok(CertificateReport { n: w.n(), pass: violated.is_empty(), violated, containment, ratio, eps, phi_dev, phi_exact_zero })
}
