use std::fmt::Write as _;
use std::sync::Arc;

use folner::dimension::{relative_dimension_by_rank, SubmoduleGens, WindowModule};
use folner::engine::{spectral_density, CertificateReport, Histogram};
use folner::io::{build_element, read_operator};
use folner::linalg::Tolerance;
use folner::model::ModelKind;
use folner::scalar::{rational_to_f64, render_rational};
use folner::{
    compress, estimate_vn_kernel_dim, folner_window, verify_folner_certificate, AlgebraElement, Backend, DimensionReport,
    EquivariantOperator, EstimateOptions, ExactScalar, FloatScalar, Model, Scalar, Word,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{CommandName, Format, RunConfig};

/// Why a run stopped, mapped onto the exit-code contract.
#[derive(Debug)]
pub enum Failure {
    /// Exit 2.
    Config(String),
    /// Exit 3.
    Numerical(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<folner::Error> for Failure {
    fn from(e: folner::Error) -> Self {
        match e {
            folner::Error::Numerical(_) | folner::Error::Unrepresentable { .. } => Failure::Numerical(e.to_string()),
            other => Failure::Config(other.to_string()),
        }
    }
}

/// Output of a command: the machine report and whether every check passed.
pub struct Outcome {
    pub report: String,
    pub summary: String,
    pub pass: bool,
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, Failure> {
    match cfg.backend {
        Backend::Exact => run_with::<ExactScalar>(cfg),
        Backend::Float => run_with::<FloatScalar>(cfg),
    }
}

fn run_with<S: Scalar>(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let model = cfg.model.build()?;
    let operators = cfg
        .operators
        .iter()
        .map(|p| {
            let spec = read_operator(p).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?;
            if let Some(declared) = &spec.model {
                let declared = declared.resolve().map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?;
                if declared != cfg.model {
                    return Err(Failure::Config(format!("{}: written for a different model than the run's", p.display())));
                }
            }
            spec.build::<S>(&model).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))
        })
        .collect::<Result<Vec<_>, _>>()?;
    match cfg.command {
        CommandName::Verify => verify(cfg, &model, &operators),
        CommandName::Kernel => kernel(cfg, &operators[0]),
        CommandName::Density => density(cfg, &operators[0]),
        CommandName::Dimreport => dimreport(cfg, &model, &operators),
    }
}

fn support_of<S: Scalar>(ops: &[AlgebraElement<S>]) -> Vec<Word> {
    let mut s: Vec<Word> = ops.iter().flat_map(|x| x.support()).collect();
    s.sort();
    s.dedup();
    s
}

/// Smallest `n` for which the standard window exists and contains the image
/// of `S` under every operator.
fn minimum_window<S: Scalar>(model: &Arc<Model>, ops: &[AlgebraElement<S>]) -> Option<usize> {
    let support = support_of(ops);
    (0..=256).find(|&n| {
        folner_window(model, &support, n)
            .map(|w| ops.iter().all(|x| compress(&EquivariantOperator::from_element(x.clone()), &w).is_ok()))
            .unwrap_or(false)
    })
}

fn window_error<S: Scalar>(e: folner::Error, n: usize, model: &Arc<Model>, ops: &[AlgebraElement<S>]) -> Failure {
    match e {
        folner::Error::WindowTooSmall(msg) => {
            let advice = match minimum_window(model, ops) {
                Some(m) => format!("; the smallest admissible window is n = {m}"),
                None => String::new(),
            };
            Failure::Config(format!("window n = {n} too small: {msg}{advice}"))
        }
        other => other.into(),
    }
}

fn verify<S: Scalar>(cfg: &RunConfig, model: &Arc<Model>, operators: &[EquivariantOperator<S>]) -> Result<Outcome, Failure> {
    let eps = cfg.eps.expect("validated");
    let ops: Vec<AlgebraElement<S>> =
        operators.iter().flat_map(|t| t.entries().iter().filter(|x| !x.is_zero()).cloned()).collect();
    if ops.is_empty() {
        return Err(Failure::Config("operators: every entry is zero".into()));
    }
    let probes = cfg
        .probes
        .as_ref()
        .map(|ps| ps.iter().map(|p| build_element::<S>(model, p)).collect::<folner::Result<Vec<_>>>())
        .transpose()?;
    let support = support_of(&ops);
    let reports: Vec<CertificateReport> = cfg
        .schedule
        .par_iter()
        .map(|&n| {
            let w = folner_window(model, &support, n).map_err(|e| window_error(e, n, model, &ops))?;
            Ok(verify_folner_certificate(model, &ops, &w, eps, probes.as_deref())?)
        })
        .collect::<Result<_, Failure>>()?;
    let pass = reports.iter().all(|r| r.pass);
    let mut summary = String::new();
    for r in &reports {
        let n = r.n.map_or("-".into(), |n| n.to_string());
        let verdict = if r.pass { "PASS".to_string() } else {
            format!("FAIL ({})", r.violated.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", "))
        };
        let _ = write!(summary, "n = {n}: {verdict}; ratio {} ≈ {:.6}, 1 − ε = {:.6}", render_rational(&r.ratio), rational_to_f64(&r.ratio), 1.0 - eps);
        let _ = writeln!(summary, ", state deviation {}", if r.phi_exact_zero { "0".to_string() } else { format!("{:.3e}", r.phi_dev) });
        if let Some(c) = &r.containment {
            let _ = writeln!(summary, "  containment: {c}");
        }
    }
    let report = match cfg.format {
        Format::Csv => {
            let mut out = String::from("n,pass,violated,ratio,phi_dev\n");
            for r in &reports {
                let violated = r.violated.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(";");
                let ratio = match cfg.backend {
                    Backend::Exact => render_rational(&r.ratio),
                    Backend::Float => format!("{:.12}", rational_to_f64(&r.ratio)),
                };
                let phi = if r.phi_exact_zero { "0".into() } else { format!("{:.12e}", r.phi_dev) };
                let _ = writeln!(out, "{},{},{},{},{}", r.n.unwrap_or(0), r.pass, violated, ratio, phi);
            }
            out
        }
        Format::Json => json(&reports)?,
    };
    Ok(Outcome { report, summary, pass })
}

fn json<T: Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(value).map(|s| s + "\n").map_err(|e| Failure::Numerical(e.to_string()))
}

fn kernel<S: Scalar>(cfg: &RunConfig, t: &EquivariantOperator<S>) -> Result<Outcome, Failure> {
    let options = EstimateOptions {
        tolerance: Tolerance { relative: cfg.tolerance },
        extrapolate: cfg.extrapolate,
        parallel: true,
        timing: cfg.timing,
    };
    let est = estimate_vn_kernel_dim(t, &cfg.schedule, &options).map_err(|e| match e {
        folner::Error::WindowTooSmall(_) => {
            let entries: Vec<AlgebraElement<S>> = t.entries().iter().filter(|x| !x.is_zero()).cloned().collect();
            window_error(e, cfg.schedule[0], t.model(), &entries)
        }
        other => other.into(),
    })?;
    let report = match cfg.format {
        Format::Csv => DimensionReport::to_csv(&est.reports),
        Format::Json => DimensionReport::to_json(&est.reports)? + "\n",
    };
    let mut summary = String::new();
    for r in &est.reports {
        let _ = writeln!(summary, "n = {}: a_n = {}, b_n = {}", r.n, render_rational(&r.a), render_rational(&r.b));
    }
    let _ = writeln!(summary, "estimate of dim ker T: {} ≈ {:.6}", render_rational(&est.estimate), rational_to_f64(&est.estimate));
    if let Some(x) = est.extrapolated {
        let _ = writeln!(summary, "extrapolated (heuristic a + c/n fit): {x:.6}");
    }
    Ok(Outcome { report, summary, pass: true })
}

#[derive(Serialize)]
struct DensityRow<'a> {
    n: usize,
    #[serde(flatten)]
    histogram: &'a Histogram,
}

fn density<S: Scalar>(cfg: &RunConfig, t: &EquivariantOperator<S>) -> Result<Outcome, Failure> {
    let support = t.support();
    let histograms: Vec<(usize, Histogram)> = cfg
        .schedule
        .par_iter()
        .map(|&n| {
            let w = folner_window(t.model(), &support, n)?;
            Ok((n, spectral_density(t, &w, cfg.bins, cfg.range)?))
        })
        .collect::<Result<_, Failure>>()?;
    let report = match cfg.format {
        Format::Csv => {
            let mut out = String::from("n,lower,upper,mass\n");
            for (n, h) in &histograms {
                for (i, m) in h.masses.iter().enumerate() {
                    let _ = writeln!(out, "{n},{:.12},{:.12},{:.12}", h.edges[i], h.edges[i + 1], m);
                }
            }
            out
        }
        Format::Json => json(&histograms.iter().map(|(n, histogram)| DensityRow { n: *n, histogram }).collect::<Vec<_>>())?,
    };
    let mut summary = String::new();
    for (n, h) in &histograms {
        let _ = writeln!(summary, "n = {n}: total mass {:.12}, mean {:.6}, second moment {:.6}", h.total_mass(), h.moment(1), h.moment(2));
    }
    Ok(Outcome { report, summary, pass: true })
}

/// Default support when no operator is given: the model's generators.
fn generator_support(model: &Model) -> Vec<Word> {
    match model.kind() {
        ModelKind::Group(g) | ModelKind::Crossed { group: g, .. } => (0..g.generator_count()).map(|k| g.generator(k)).collect(),
        ModelKind::Twisted { .. } => vec![vec![1, 0], vec![0, 1]],
        ModelKind::Uhf { .. } => Vec::new(),
    }
}

fn dimreport<S: Scalar>(cfg: &RunConfig, model: &Arc<Model>, operators: &[EquivariantOperator<S>]) -> Result<Outcome, Failure> {
    let support = if operators.is_empty() {
        generator_support(model)
    } else {
        let entries: Vec<AlgebraElement<S>> = operators.iter().flat_map(|t| t.entries().iter().cloned()).collect();
        support_of(&entries)
    };
    let tol = Tolerance { relative: cfg.tolerance };
    let rows: Vec<[String; 5]> = cfg
        .schedule
        .par_iter()
        .map(|&n| {
            let w = folner_window(model, &support, n)?;
            // Relative dimension of span(S) inside P, through the module layer.
            let outer = Arc::new(WindowModule::outer(&w, 1)?);
            let inner = WindowModule::inner(&w, 1)?;
            let vectors = inner
                .coordinates()
                .iter()
                .map(|c| vec![(outer.position(0, &c.index, c.atom).expect("S ⊆ P"), S::one())])
                .collect();
            let rel = relative_dimension_by_rank(&SubmoduleGens::<S>::new(&outer, vectors)?, &tol)?;
            let fmt = |r: &folner::BigRational| match cfg.backend {
                Backend::Exact => render_rational(r),
                Backend::Float => format!("{:.12}", rational_to_f64(r)),
            };
            Ok([n.to_string(), fmt(&w.dim_p()), fmt(&w.dim_s()), fmt(&w.ratio()), fmt(&rel)])
        })
        .collect::<Result<_, Failure>>()?;
    let report = match cfg.format {
        Format::Csv => {
            let mut out = String::from("n,dim_P,dim_S,ratio,rel_dim\n");
            for r in &rows {
                let _ = writeln!(out, "{}", r.join(","));
            }
            out
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Row<'a> {
                n: &'a str,
                #[serde(rename = "dim_P")]
                dim_p: &'a str,
                #[serde(rename = "dim_S")]
                dim_s: &'a str,
                ratio: &'a str,
                rel_dim: &'a str,
                backend: &'static str,
            }
            let rows: Vec<Row> = rows
                .iter()
                .map(|r| Row { n: &r[0], dim_p: &r[1], dim_s: &r[2], ratio: &r[3], rel_dim: &r[4], backend: cfg.backend.name() })
                .collect();
            json(&rows)?
        }
    };
    let summary = rows.iter().map(|r| format!("n = {}: dim_N S / dim_N P = {}\n", r[0], r[3])).collect();
    Ok(Outcome { report, summary, pass: true })
}
