//! Quadrature over `[0, 1]` and the coefficient vectors of the reduction.
//!
//! For a kernel `φ₁(t)ψ₁(u) + φ₂(t)ψ₂(u)` and degree `k`:
//!
//! ```text
//! a[i] = C(k,i) ∫₀¹ ψ₁ φ₁^{k-i} φ₂^i du
//! b[i] = C(k,i) ∫₀¹ ψ₂ φ₁^{k-i} φ₂^i du        i = 0..k
//! d[i] = a[i-1] - b[i]                          i = 1..k
//! ```

use thiserror::Error;

use crate::expr::{ConeVerdict, ExprError, Expression, PositivityReport};

pub const DEFAULT_QUAD_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_K: usize = 64;
pub const CONE_GRID: usize = 1001;
const MAX_PANELS: usize = 2000;
/// Relative accuracy floor; just above the per-panel `50·ε` roundoff estimate.
pub const ROUNDOFF_REL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("quadrature did not converge after {panels} panels (error estimate {estimate:e})")]
    NonConvergence { panels: usize, estimate: f64 },
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("integrand: {0}")]
    Integrand(#[from] ExprError),
    #[error("binomial coefficient C({k},{i}) overflows")]
    BinomialOverflow { k: u64, i: u64 },
    #[error("binomial coefficient C({k},{i}) is undefined")]
    BinomialDomain { k: u64, i: u64 },
    #[error("degenerate coefficient {family}[{index}] = {value:e}; all coefficients must be strictly positive")]
    DegenerateCoefficient {
        family: char,
        index: usize,
        value: f64,
    },
    #[error("coefficient vectors must both have length k+1 >= 2 (got {a} and {b})")]
    Shape { a: usize, b: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("degree k = {0} is below 2")]
    DegreeTooSmall(usize),
    #[error("degree k = {k} exceeds the configured maximum {max}")]
    DegreeTooLarge { k: usize, max: usize },
    #[error("{which} = `{source_text}` is not in the cone C0+[0,1] (min {min} at t = {argmin})")]
    Cone {
        which: &'static str,
        source_text: String,
        min: f64,
        argmin: f64,
    },
    #[error("{which}: {err}")]
    Expr { which: &'static str, err: ExprError },
}

// Gauss–Kronrod 7/15 nodes and weights on [-1, 1] (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

fn gk15<F>(f: &mut F, lo: f64, hi: f64) -> Result<Panel, ExprError>
where
    F: FnMut(f64) -> Result<f64, ExprError>,
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center)?;
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = kronrod.abs();
    let mut fv = [(0.0, 0.0); 7];
    for (j, slot) in fv.iter_mut().enumerate() {
        let dx = half * XGK[j];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
        *slot = (f1, f2);
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (fc - mean).abs();
    for (j, (f1, f2)) in fv.iter().enumerate() {
        asc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let value = kronrod * half;
    let res_abs = abs_sum * half.abs();
    let res_asc = asc * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(Panel {
        lo,
        hi,
        value,
        error,
    })
}

/// Globally adaptive Gauss–Kronrod (7/15) integration over `[0, 1]`.
///
/// Bisects the panel with the largest error estimate until the summed
/// estimate drops below `tol`, or below the roundoff floor
/// `ROUNDOFF_REL · |I|` when the absolute target is out of reach in double
/// precision.
pub fn integrate<F>(mut f: F, tol: f64) -> Result<f64, QuadError>
where
    F: FnMut(f64) -> Result<f64, ExprError>,
{
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(QuadError::InvalidTolerance(tol));
    }
    let mut panels = vec![gk15(&mut f, 0.0, 1.0)?];
    loop {
        let total: f64 = panels.iter().map(|p| p.value).sum();
        let err: f64 = panels.iter().map(|p| p.error).sum();
        if err <= tol || err <= ROUNDOFF_REL * total.abs() {
            return Ok(total);
        }
        if panels.len() >= MAX_PANELS {
            return Err(QuadError::NonConvergence {
                panels: panels.len(),
                estimate: err,
            });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, p)| {
                if p.error > best.1 {
                    (i, p.error)
                } else {
                    best
                }
            });
        let p = panels[worst];
        let mid = 0.5 * (p.lo + p.hi);
        if mid <= p.lo || mid >= p.hi {
            return Err(QuadError::NonConvergence {
                panels: panels.len(),
                estimate: err,
            });
        }
        panels[worst] = gk15(&mut f, p.lo, mid)?;
        panels.push(gk15(&mut f, mid, p.hi)?);
    }
}

/// Exact `C(k, i)`; errors instead of wrapping when it exceeds `u64`.
pub fn binomial(k: u64, i: u64) -> Result<u64, QuadError> {
    if i > k {
        return Err(QuadError::BinomialDomain { k, i });
    }
    let i = i.min(k - i);
    let mut c: u128 = 1;
    for j in 0..i {
        // c * (k - j) is divisible by j + 1 at every step
        c = c
            .checked_mul(u128::from(k - j))
            .ok_or(QuadError::BinomialOverflow { k, i })?
            / u128::from(j + 1);
    }
    u64::try_from(c).map_err(|_| QuadError::BinomialOverflow { k, i })
}

/// The four factor functions of a rank-2 kernel together with the degree.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    pub phi1: Expression,
    pub phi2: Expression,
    pub psi1: Expression,
    pub psi2: Expression,
    pub k: usize,
}

impl KernelSpec {
    pub fn new(
        phi1: Expression,
        phi2: Expression,
        psi1: Expression,
        psi2: Expression,
        k: usize,
    ) -> Result<Self, KernelError> {
        Self::with_max_k(phi1, phi2, psi1, psi2, k, DEFAULT_MAX_K)
    }

    pub fn with_max_k(
        phi1: Expression,
        phi2: Expression,
        psi1: Expression,
        psi2: Expression,
        k: usize,
        max_k: usize,
    ) -> Result<Self, KernelError> {
        if k < 2 {
            return Err(KernelError::DegreeTooSmall(k));
        }
        if k > max_k {
            return Err(KernelError::DegreeTooLarge { k, max: max_k });
        }
        let spec = KernelSpec {
            phi1,
            phi2,
            psi1,
            psi2,
            k,
        };
        for (which, e) in spec.factors() {
            let report = e
                .check_cone(CONE_GRID)
                .map_err(|err| KernelError::Expr { which, err })?;
            if report.verdict() == ConeVerdict::NonMember {
                return Err(KernelError::Cone {
                    which,
                    source_text: e.source().to_string(),
                    min: report.min_value,
                    argmin: report.argmin,
                });
            }
        }
        Ok(spec)
    }

    /// Parses the four factor sources and validates the result.
    pub fn parse(phi1: &str, phi2: &str, psi1: &str, psi2: &str, k: usize) -> Result<Self, KernelError> {
        let p = |which: &'static str, src: &str| {
            Expression::parse(src).map_err(|err| KernelError::Expr { which, err })
        };
        Self::new(
            p("phi1", phi1)?,
            p("phi2", phi2)?,
            p("psi1", psi1)?,
            p("psi2", psi2)?,
            k,
        )
    }

    pub fn factors(&self) -> [(&'static str, &Expression); 4] {
        [
            ("phi1", &self.phi1),
            ("phi2", &self.phi2),
            ("psi1", &self.psi1),
            ("psi2", &self.psi2),
        ]
    }

    pub fn cone_reports(&self) -> Result<Vec<(&'static str, PositivityReport)>, ExprError> {
        self.factors()
            .into_iter()
            .map(|(w, e)| Ok((w, e.check_cone(CONE_GRID)?)))
            .collect()
    }

    /// `K(t, u) = φ₁(t)ψ₁(u) + φ₂(t)ψ₂(u)`.
    pub fn kernel_at(&self, t: f64, u: f64) -> Result<f64, ExprError> {
        Ok(self.phi1.eval(t)? * self.psi1.eval(u)? + self.phi2.eval(t)? * self.psi2.eval(u)?)
    }
}

/// `a`, `b` (indexed `0..=k`) and `d` (stored 0-based, `d[i-1] = a[i-1] - b[i]`).
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub d: Vec<f64>,
    pub k: usize,
    /// Absolute accuracy of each entry of `a` and `b`; zero for closed forms.
    pub quadrature_tol: f64,
}

impl CoefficientSet {
    /// Validates shape and strict positivity (`> 10·quadrature_tol`).
    pub fn new(a: Vec<f64>, b: Vec<f64>, quadrature_tol: f64) -> Result<Self, QuadError> {
        if a.len() != b.len() || a.len() < 2 {
            return Err(QuadError::Shape {
                a: a.len(),
                b: b.len(),
            });
        }
        let floor = 10.0 * quadrature_tol;
        for (family, v) in [('a', &a), ('b', &b)] {
            if let Some((index, &value)) = v
                .iter()
                .enumerate()
                .find(|(_, &x)| !(x.is_finite() && x > floor))
            {
                return Err(QuadError::DegenerateCoefficient {
                    family,
                    index,
                    value,
                });
            }
        }
        let k = a.len() - 1;
        let d = (1..=k).map(|i| a[i - 1] - b[i]).collect();
        Ok(CoefficientSet {
            a,
            b,
            d,
            k,
            quadrature_tol,
        })
    }

    /// `d_i` with the 1-based index used in the formulas.
    pub fn d_at(&self, i: usize) -> f64 {
        self.d[i - 1]
    }

    /// Magnitude below which a `d` entry is indistinguishable from zero.
    pub fn zero_threshold(&self) -> f64 {
        10.0 * self.quadrature_tol
    }
}

/// Integrates the `2(k+1)` coefficient integrals of `kernel`.
pub fn compute_coefficients(kernel: &KernelSpec, tol: f64) -> Result<CoefficientSet, QuadError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(QuadError::InvalidTolerance(tol));
    }
    let k = kernel.k;
    let mut a = Vec::with_capacity(k + 1);
    let mut b = Vec::with_capacity(k + 1);
    for i in 0..=k {
        let c = binomial(k as u64, i as u64)? as f64;
        let family = |psi: &Expression| {
            integrate(
                |u| {
                    let p1 = kernel.phi1.eval(u)?;
                    let p2 = kernel.phi2.eval(u)?;
                    Ok(psi.eval(u)? * p1.powi((k - i) as i32) * p2.powi(i as i32))
                },
                tol / c,
            )
        };
        a.push(c * family(&kernel.psi1)?);
        b.push(c * family(&kernel.psi2)?);
    }
    CoefficientSet::new(a, b, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn monomials_and_constants() {
        for i in 0..8 {
            let v = integrate(|u| Ok(u.powi(i)), 1e-12).unwrap();
            assert_abs_diff_eq!(v, 1.0 / (i as f64 + 1.0), epsilon = 1e-12);
        }
        assert_abs_diff_eq!(integrate(|_| Ok(1.0), 1e-12).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn exponential_against_antiderivative() {
        let v = integrate(|u| Ok(u.exp()), 1e-12).unwrap();
        assert_abs_diff_eq!(v, std::f64::consts::E - 1.0, epsilon = 1e-12);
    }

    #[test]
    fn endpoint_singularity_still_converges() {
        // ∫ ln u du = -1 and ∫ u^{-1/2} du = 2
        let v = integrate(|u| Ok(u.ln()), 1e-9).unwrap();
        assert_abs_diff_eq!(v, -1.0, epsilon = 1e-8);
        let v = integrate(|u| Ok(1.0 / u.sqrt()), 1e-8).unwrap();
        assert_abs_diff_eq!(v, 2.0, epsilon = 1e-6);
    }

    #[test]
    fn rejects_bad_tolerance_and_propagates_domain_errors() {
        assert!(matches!(
            integrate(Ok, 0.0),
            Err(QuadError::InvalidTolerance(_))
        ));
        let e = Expression::parse("sqrt(t - 0.5)").unwrap();
        assert!(matches!(
            integrate(|u| e.eval(u), 1e-10),
            Err(QuadError::Integrand(ExprError::Domain { .. }))
        ));
    }

    fn pascal(n: usize) -> Vec<Vec<u64>> {
        let mut rows = vec![vec![1u64]];
        for r in 1..=n {
            let prev = &rows[r - 1];
            let mut row = vec![1u64; r + 1];
            for j in 1..r {
                row[j] = prev[j - 1] + prev[j];
            }
            rows.push(row);
        }
        rows
    }

    #[test]
    fn binomial_matches_pascal_triangle() {
        assert_eq!(binomial(2, 0).unwrap(), 1);
        assert_eq!(binomial(4, 2).unwrap(), 6);
        let tri = pascal(64);
        assert_eq!(tri[10][5], 252);
        for (n, row) in tri.iter().enumerate() {
            for (i, &v) in row.iter().enumerate() {
                assert_eq!(binomial(n as u64, i as u64).unwrap(), v, "C({n},{i})");
            }
        }
    }

    #[test]
    fn binomial_errors() {
        assert!(matches!(binomial(3, 4), Err(QuadError::BinomialDomain { .. })));
        assert!(matches!(binomial(70, 35), Err(QuadError::BinomialOverflow { .. })));
        assert_eq!(binomial(67, 33).unwrap(), 14_226_520_737_620_288_370);
    }

    #[test]
    fn all_unit_factors() {
        let kernel = KernelSpec::parse("1", "1", "1", "1", 2).unwrap();
        let c = compute_coefficients(&kernel, 1e-10).unwrap();
        for (got, want) in c.a.iter().zip([1.0, 2.0, 1.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
        assert_eq!(c.a, c.b);
        assert_abs_diff_eq!(c.d_at(1), -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.d_at(2), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn linear_kernel_worked_coefficients() {
        let kernel = KernelSpec::parse("1", "t", "1", "1*t", 2).unwrap();
        let c = compute_coefficients(&kernel, 1e-10).unwrap();
        let a = [1.0, 1.0, 1.0 / 3.0];
        let b = [0.5, 2.0 / 3.0, 0.25];
        for i in 0..3 {
            assert_abs_diff_eq!(c.a[i], a[i], epsilon = 1e-10);
            assert_abs_diff_eq!(c.b[i], b[i], epsilon = 1e-10);
        }
    }

    #[test]
    fn kernel_validation() {
        assert!(matches!(
            KernelSpec::parse("1", "t", "t-1", "t", 2),
            Err(KernelError::Cone { which: "psi1", .. })
        ));
        assert!(matches!(
            KernelSpec::parse("1", "t", "1", "t", 1),
            Err(KernelError::DegreeTooSmall(1))
        ));
        assert!(matches!(
            KernelSpec::parse("1", "t", "1", "t", 65),
            Err(KernelError::DegreeTooLarge { .. })
        ));
        assert!(matches!(
            KernelSpec::parse("1", "ln(t)", "1", "t", 2),
            Err(KernelError::Expr { which: "phi2", .. })
        ));
        assert!(matches!(
            KernelSpec::parse("1", "q", "1", "t", 2),
            Err(KernelError::Expr { which: "phi2", .. })
        ));
    }

    #[test]
    fn degenerate_coefficients_rejected() {
        // ψ₂ vanishes on [0, 1/2] and φ₂ on [1/2, 1]: every b[i] with i ≥ 1 is zero
        let kernel = KernelSpec::parse("1", "abs(t-0.5)-(t-0.5)", "1", "abs(t-0.5)+(t-0.5)", 2).unwrap();
        match compute_coefficients(&kernel, 1e-10) {
            Err(QuadError::DegenerateCoefficient { family: 'b', .. }) => {}
            other => panic!("expected degenerate b, got {other:?}"),
        }
        assert!(CoefficientSet::new(vec![1.0, 0.0], vec![1.0, 1.0], 0.0).is_err());
        assert!(CoefficientSet::new(vec![1.0, 1.0], vec![1.0], 0.0).is_err());
    }
}
