//! Translation-invariant Gibbs measures of the Cayley-tree model with
//! interaction `-(1/β) ln(a + b σ(x) σ(y))`, spins in `[0, 1]`.
//!
//! The model reduces to the rank-2 kernel `a + b t u`, i.e. `φ₁ = 1`,
//! `ψ₁ = a`, `φ₂ = t`, `ψ₂ = b t`, whose coefficients have closed forms:
//!
//! ```text
//! a[i] = a C(k,i) / (i + 1)
//! b[i] = b C(k,i) / (i + 2)
//! d[i] = C(k,i) (a / (k - i + 1) - b / (i + 2)) = C(k,i) h(i)
//! ```
//!
//! `h` is increasing on `[1, k]`, so the signs of `d` run `-…-+…+` and the
//! coefficient sequence of the characteristic polynomial changes sign once.
//! The number of translation-invariant measures equals the number of
//! positive fixed points, which is therefore one.
//!
//! Note that `d` itself need not be monotone: the binomial weights can
//! reverse the order of neighbouring `h(i)` values once `k ≥ 3`.

use thiserror::Error;

use crate::quad::{binomial, compute_coefficients, CoefficientSet, KernelSpec, QuadError};
use crate::solver::{solve, Classification, FixedPointFn, SolveError, SolveOptions};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GibbsError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error(transparent)]
    Coefficients(#[from] QuadError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    /// The uniqueness claim failed at runtime.
    #[error("internal contradiction: {0}")]
    Contradiction(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GibbsModel {
    pub a: f64,
    pub b: f64,
    /// Tree order: every vertex has `k + 1` neighbours.
    pub k: usize,
    /// Echoed in reports only; the reduced kernel does not depend on it.
    pub beta: f64,
}

impl GibbsModel {
    pub fn new(a: f64, b: f64, k: usize, beta: f64) -> Result<Self, GibbsError> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(a) || !positive(b) {
            return Err(GibbsError::InvalidModel(format!("need a > 0 and b > 0, got a = {a}, b = {b}")));
        }
        if !positive(beta) {
            return Err(GibbsError::InvalidModel(format!("need beta > 0, got {beta}")));
        }
        if k < 1 {
            return Err(GibbsError::InvalidModel("tree order k must be at least 1".into()));
        }
        Ok(GibbsModel { a, b, k, beta })
    }

    /// The induced kernel `a + b t u` as factor expressions.
    pub fn kernel(&self) -> Result<KernelSpec, GibbsError> {
        KernelSpec::parse("1", "t", &format!("{:?}", self.a), &format!("{:?}*t", self.b), self.k)
            .map_err(|e| GibbsError::InvalidModel(e.to_string()))
    }

    /// `h(x) = a / (k - x + 1) - b / (x + 2)`.
    pub fn h(&self, x: f64) -> f64 {
        self.a / (self.k as f64 - x + 1.0) - self.b / (x + 2.0)
    }

    /// `h'(x) = a / (k - x + 1)² + b / (x + 2)²`.
    pub fn h_prime(&self, x: f64) -> f64 {
        let l = self.k as f64 - x + 1.0;
        self.a / (l * l) + self.b / ((x + 2.0) * (x + 2.0))
    }
}

pub fn gibbs_coefficients(m: &GibbsModel) -> Result<CoefficientSet, GibbsError> {
    let mut a = Vec::with_capacity(m.k + 1);
    let mut b = Vec::with_capacity(m.k + 1);
    for i in 0..=m.k {
        let c = binomial(m.k as u64, i as u64)? as f64;
        a.push(m.a * c / (i as f64 + 1.0));
        b.push(m.b * c / (i as f64 + 2.0));
    }
    Ok(CoefficientSet::new(a, b, 0.0)?)
}

/// `d[i] = C(k,i) h(i)` for `i = 1..=k`, computed without going through `a`, `b`.
pub fn gibbs_d(m: &GibbsModel) -> Result<Vec<f64>, GibbsError> {
    (1..=m.k)
        .map(|i| Ok(binomial(m.k as u64, i as u64)? as f64 * m.h(i as f64)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HCheck {
    pub min_h_prime: f64,
    /// `h(1) ≤ h(2) ≤ … ≤ h(k)`.
    pub monotone: bool,
}

/// Samples `h'` on a uniform grid over `[1, k]` and `h` at the integers.
pub fn h_function_check(m: &GibbsModel, samples: usize) -> Result<HCheck, GibbsError> {
    if samples < 2 {
        return Err(GibbsError::InvalidModel(format!("need at least 2 samples, got {samples}")));
    }
    let span = m.k as f64 - 1.0;
    let min_h_prime = (0..samples)
        .map(|j| m.h_prime(1.0 + span * j as f64 / (samples - 1) as f64))
        .fold(f64::INFINITY, f64::min);
    let hs: Vec<f64> = (1..=m.k).map(|i| m.h(i as f64)).collect();
    Ok(HCheck {
        min_h_prime,
        monotone: hs.windows(2).all(|w| w[0] <= w[1]),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GibbsReport {
    pub model: GibbsModel,
    pub coefficients: CoefficientSet,
    pub d: Vec<f64>,
    pub d_monotone_nondecreasing: bool,
    /// Signs of `d` run nonpositive then nonnegative.
    pub d_sign_monotone: bool,
    pub h_derivative_min: f64,
    pub h_integer_monotone: bool,
    /// `None` for `k = 1`: the reduction needs `k ≥ 2`.
    pub n_tigm: Option<usize>,
    pub fixed_point: Option<FixedPointFn>,
    pub classification: Option<Classification>,
    /// Worst gap between closed-form and quadrature coefficients.
    pub quadrature_gap: Option<f64>,
}

pub const CLOSED_FORM_AGREEMENT: f64 = 1e-10;
const H_SAMPLES: usize = 1001;

pub fn analyze(m: &GibbsModel, opts: &SolveOptions) -> Result<GibbsReport, GibbsError> {
    let coefficients = gibbs_coefficients(m)?;
    let d = gibbs_d(m)?;
    for (i, (&closed, &diff)) in d.iter().zip(&coefficients.d).enumerate() {
        if (closed - diff).abs() > 1e-12 * closed.abs().max(1.0) {
            return Err(GibbsError::Contradiction(format!(
                "d[{}] closed form {closed} disagrees with a - b difference {diff}",
                i + 1
            )));
        }
    }
    let h = h_function_check(m, H_SAMPLES)?;
    if !(h.min_h_prime > 0.0) || !h.monotone {
        return Err(GibbsError::Contradiction(format!(
            "h is not increasing on [1, {}] (min h' = {})",
            m.k, h.min_h_prime
        )));
    }
    let mut report = GibbsReport {
        model: *m,
        d_monotone_nondecreasing: d.windows(2).all(|w| w[0] <= w[1]),
        d_sign_monotone: d.windows(2).all(|w| !(w[0] > 0.0 && w[1] < 0.0)),
        coefficients,
        d,
        h_derivative_min: h.min_h_prime,
        h_integer_monotone: h.monotone,
        n_tigm: None,
        fixed_point: None,
        classification: None,
        quadrature_gap: None,
    };
    if m.k < 2 {
        return Ok(report);
    }

    let kernel = m.kernel()?;
    let quad = compute_coefficients(&kernel, opts.quad_tol)?;
    let gap = quad
        .a
        .iter()
        .zip(&report.coefficients.a)
        .chain(quad.b.iter().zip(&report.coefficients.b))
        .map(|(q, c)| (q - c).abs())
        .fold(0.0, f64::max);
    if gap > CLOSED_FORM_AGREEMENT {
        return Err(GibbsError::Contradiction(format!(
            "closed-form coefficients differ from quadrature by {gap:e}"
        )));
    }
    let solved = solve(&kernel, opts)?;
    if solved.n_fix != 1 {
        return Err(GibbsError::Contradiction(format!(
            "{} translation-invariant measures found for a = {}, b = {}, k = {}; expected exactly one",
            solved.n_fix, m.a, m.b, m.k
        )));
    }
    report.quadrature_gap = Some(gap);
    report.n_tigm = Some(solved.n_fix);
    report.classification = Some(solved.classification);
    report.fixed_point = solved.fixed_points.into_iter().next();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn model(a: f64, b: f64, k: usize) -> GibbsModel {
        GibbsModel::new(a, b, k, 1.0).unwrap()
    }

    #[test]
    fn closed_form_coefficients() {
        let c = gibbs_coefficients(&model(1.0, 1.0, 2)).unwrap();
        for (g, w) in c.a.iter().zip([1.0, 1.0, 1.0 / 3.0]) {
            assert_abs_diff_eq!(*g, w, epsilon = 1e-15);
        }
        for (g, w) in c.b.iter().zip([0.5, 2.0 / 3.0, 0.25]) {
            assert_abs_diff_eq!(*g, w, epsilon = 1e-15);
        }
        let c = gibbs_coefficients(&model(2.0, 1.0, 3)).unwrap();
        assert_eq!(c.a[0], 2.0);
        assert_eq!(c.a[3], 0.5);
        assert_eq!(c.b[0], 0.5);
        assert_abs_diff_eq!(c.b[3], 0.2, epsilon = 1e-15);
    }

    #[test]
    fn d_two_ways() {
        let m = model(1.0, 1.0, 2);
        let d = gibbs_d(&m).unwrap();
        assert_abs_diff_eq!(d[0], 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d[1], 0.75, epsilon = 1e-15);
        let c = gibbs_coefficients(&m).unwrap();
        assert_abs_diff_eq!(d[0], c.a[0] - c.b[1], epsilon = 1e-15);
    }

    #[test]
    fn d_can_lose_monotonicity_while_signs_stay_ordered() {
        // k = 3: d = (a - b, 1.5a - 0.75b, a - 0.2b); d3 < d2 once a > 1.1b
        let m = model(10.0, 0.1, 3);
        let d = gibbs_d(&m).unwrap();
        assert!(d[2] < d[1]);
        let r = analyze(&m, &SolveOptions::default()).unwrap();
        assert!(!r.d_monotone_nondecreasing);
        assert!(r.d_sign_monotone);
        assert_eq!(r.n_tigm, Some(1));
    }

    #[test]
    fn h_checks() {
        let m = model(1.0, 1.0, 2);
        assert_abs_diff_eq!(m.h(1.0), 1.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.h(2.0), 0.75, epsilon = 1e-15);
        let h = h_function_check(&m, 101).unwrap();
        assert!(h.min_h_prime > 0.0 && h.monotone);

        let m = model(1.0, 1.0, 10);
        assert!(m.h(1.0) < 0.0);
        let h = h_function_check(&m, 101).unwrap();
        assert!(h.min_h_prime > 0.0 && h.monotone);
        assert!(h_function_check(&m, 1).is_err());
    }

    #[test]
    fn worked_analysis() {
        let r = analyze(&model(1.0, 1.0, 2), &SolveOptions::default()).unwrap();
        assert_eq!(r.n_tigm, Some(1));
        let f = r.fixed_point.unwrap();
        assert_abs_diff_eq!(f.x0, 0.59436, epsilon = 1e-4);
        assert_abs_diff_eq!(f.y0, 0.34057, epsilon = 1e-4);
        assert!(r.d_monotone_nondecreasing);
        assert!(r.quadrature_gap.unwrap() <= 1e-10);
    }

    #[test]
    fn strongly_asymmetric_model() {
        let r = analyze(&model(10.0, 0.1, 5), &SolveOptions::default()).unwrap();
        assert_eq!(r.n_tigm, Some(1));
    }

    #[test]
    fn order_one_is_reported_without_count() {
        let r = analyze(&model(1.0, 2.0, 1), &SolveOptions::default()).unwrap();
        assert_eq!(r.n_tigm, None);
        assert!(r.fixed_point.is_none());
        assert_eq!(r.d.len(), 1);
    }

    #[test]
    fn invalid_models() {
        assert!(GibbsModel::new(0.0, 1.0, 2, 1.0).is_err());
        assert!(GibbsModel::new(1.0, -1.0, 2, 1.0).is_err());
        assert!(GibbsModel::new(1.0, 1.0, 0, 1.0).is_err());
        assert!(GibbsModel::new(1.0, 1.0, 2, 0.0).is_err());
    }
}
