//! Serializable views of the library reports.
//!
//! Everything goes through `serde_json::Value`, whose maps are ordered by
//! key, so equal reports serialize to equal bytes.

use hammerfix_core::gibbs::GibbsReport;
use hammerfix_core::oracle::OracleReport;
use hammerfix_core::solver::{Classification, SolveReport};
use hammerfix_core::KernelSpec;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inputs {
    pub phi1: String,
    pub phi2: String,
    pub psi1: String,
    pub psi2: String,
    pub k: usize,
    pub quad_tol: f64,
    pub root_tol: f64,
    pub residual_tol: f64,
    pub grid: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub d: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    /// Descending powers of `ξ`.
    pub coefficients: Vec<f64>,
    pub degree: usize,
    pub descartes_bound: usize,
    pub cauchy_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub value: f64,
    pub enclosure: [f64; 2],
    pub poly_residual: f64,
    pub sign_confirmed: bool,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub xi: f64,
    pub x: f64,
    pub y: f64,
    pub q_residual: f64,
    pub operator_residual: Option<f64>,
    pub t: Vec<f64>,
    pub f: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationJson {
    pub verdict: String,
    pub sign_pattern: bool,
    pub d_nondecreasing: bool,
    pub d_nonincreasing: bool,
    pub bracket: Option<[f64; 2]>,
}

impl From<&Classification> for ClassificationJson {
    fn from(c: &Classification) -> Self {
        ClassificationJson {
            verdict: c.verdict.as_str().to_string(),
            sign_pattern: c.sign_pattern,
            d_nondecreasing: c.d_nondecreasing,
            d_nonincreasing: c.d_nonincreasing,
            bracket: c.bracket.map(|(lo, hi)| [lo, hi]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPointJson {
    pub x: f64,
    pub y: f64,
    pub residual: f64,
    pub hits: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PicardJson {
    pub seed: f64,
    pub projective: bool,
    pub converged: bool,
    pub iterations: Option<usize>,
    pub residual: Option<f64>,
    pub distance_to_solution: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleJson {
    pub scan_points: Vec<ScanPointJson>,
    pub starts: usize,
    pub dropped: usize,
    pub excluded: usize,
    pub count_match: bool,
    pub max_ratio_error: f64,
    pub picard: Vec<PicardJson>,
    pub picard_match: bool,
    pub matches: bool,
}

impl From<&OracleReport> for OracleJson {
    fn from(o: &OracleReport) -> Self {
        OracleJson {
            scan_points: o
                .scan
                .points
                .iter()
                .map(|p| ScanPointJson {
                    x: p.point.x,
                    y: p.point.y,
                    residual: p.residual,
                    hits: p.hits,
                })
                .collect(),
            starts: o.scan.starts,
            dropped: o.scan.dropped,
            excluded: o.scan.excluded,
            count_match: o.count_match,
            max_ratio_error: o.max_ratio_error,
            picard: o
                .picard
                .iter()
                .map(|p| PicardJson {
                    seed: p.seed_value,
                    projective: p.projective,
                    converged: p.outcome.is_some(),
                    iterations: p.outcome.as_ref().map(|l| l.iterations),
                    residual: p.outcome.as_ref().map(|l| l.residual),
                    distance_to_solution: p.distance_to_solution,
                })
                .collect(),
            picard_match: o.picard_match,
            matches: o.matches,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveJson {
    pub inputs: Inputs,
    pub coefficients: Coefficients,
    pub polynomial: Polynomial,
    pub roots: Vec<Root>,
    pub fixed_points: Vec<FixedPoint>,
    pub classification: ClassificationJson,
    pub n_fix: usize,
    /// Always present; `null` unless a cross-check ran.
    pub oracle: Option<OracleJson>,
}

impl SolveJson {
    pub fn new(kernel: &KernelSpec, r: &SolveReport, oracle: Option<&OracleReport>) -> Self {
        let o = &r.options;
        let c = &r.coefficients;
        SolveJson {
            inputs: Inputs {
                phi1: kernel.phi1.source().to_string(),
                phi2: kernel.phi2.source().to_string(),
                psi1: kernel.psi1.source().to_string(),
                psi2: kernel.psi2.source().to_string(),
                k: kernel.k,
                quad_tol: o.quad_tol,
                root_tol: o.root_tol,
                residual_tol: o.residual_tol,
                grid: o.grid,
            },
            coefficients: Coefficients {
                a: c.a.clone(),
                b: c.b.clone(),
                d: c.d.clone(),
            },
            polynomial: Polynomial {
                coefficients: r.polynomial.coeffs.clone(),
                degree: r.polynomial.degree(),
                descartes_bound: r.descartes_bound,
                cauchy_bound: r.cauchy_bound,
            },
            roots: r
                .roots
                .iter()
                .map(|x| Root {
                    value: x.value,
                    enclosure: [x.lo, x.hi],
                    poly_residual: x.poly_residual,
                    sign_confirmed: x.sign_confirmed,
                    multiplicity: x.multiplicity,
                })
                .collect(),
            fixed_points: r
                .fixed_points
                .iter()
                .zip(&r.q_residuals)
                .map(|(f, &q)| FixedPoint {
                    xi: f.xi,
                    x: f.x0,
                    y: f.y0,
                    q_residual: q,
                    operator_residual: f.residual_sup,
                    t: f.samples.iter().map(|s| s.0).collect(),
                    f: f.samples.iter().map(|s| s.1).collect(),
                })
                .collect(),
            classification: (&r.classification).into(),
            n_fix: r.n_fix,
            oracle: oracle.map(Into::into),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GibbsJson {
    pub a: f64,
    pub b: f64,
    pub k: usize,
    pub beta: f64,
    pub coefficients: Coefficients,
    pub d_monotone_nondecreasing: bool,
    pub d_sign_monotone: bool,
    pub h_derivative_min: f64,
    pub h_integer_monotone: bool,
    pub n_tigm: Option<usize>,
    pub fixed_point: Option<[f64; 2]>,
    pub operator_residual: Option<f64>,
    pub classification: Option<ClassificationJson>,
    pub quadrature_gap: Option<f64>,
}

impl From<&GibbsReport> for GibbsJson {
    fn from(r: &GibbsReport) -> Self {
        GibbsJson {
            a: r.model.a,
            b: r.model.b,
            k: r.model.k,
            beta: r.model.beta,
            coefficients: Coefficients {
                a: r.coefficients.a.clone(),
                b: r.coefficients.b.clone(),
                d: r.d.clone(),
            },
            d_monotone_nondecreasing: r.d_monotone_nondecreasing,
            d_sign_monotone: r.d_sign_monotone,
            h_derivative_min: r.h_derivative_min,
            h_integer_monotone: r.h_integer_monotone,
            n_tigm: r.n_tigm,
            fixed_point: r.fixed_point.as_ref().map(|f| [f.x0, f.y0]),
            operator_residual: r.fixed_point.as_ref().and_then(|f| f.residual_sup),
            classification: r.classification.as_ref().map(Into::into),
            quadrature_gap: r.quadrature_gap,
        }
    }
}

/// Pretty JSON with keys in sorted order and a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("report types serialize to JSON");
    let mut s = serde_json::to_string_pretty(&v).expect("JSON values print");
    s.push('\n');
    s
}
