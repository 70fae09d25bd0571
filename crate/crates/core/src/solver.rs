//! Kernel → coefficients → polynomial → roots → fixed points.
//!
//! Each distinct positive root `ξ₀` of the characteristic polynomial gives
//! the planar fixed point
//!
//! ```text
//! x₀ = (Σ a[i] ξ₀^i)^{-1/(k-1)},   y₀ = ξ₀ x₀
//! ```
//!
//! and the operator fixed point `f₀ = x₀ φ₁ + y₀ φ₂`. Every reconstructed
//! point is checked against the planar map and against the integral
//! operator itself before it is reported.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

use crate::expr::ExprError;
use crate::polyroots::{
    build_polynomial, descartes_positive_bound, isolate_and_refine, root_upper_bound, PolyError,
    PolySpec, PositiveRoot, DEFAULT_ROOT_TOL,
};
use crate::quad::{compute_coefficients, integrate, CoefficientSet, KernelSpec, QuadError, DEFAULT_QUAD_TOL};

pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-6;
pub const DEFAULT_GRID: usize = 201;
pub const Q_RESIDUAL_TOL: f64 = 1e-8;
const BRACKET_SCAN_POINTS: usize = 256;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("coefficient stage: {0}")]
    Coefficients(#[from] QuadError),
    #[error("polynomial stage: {0}")]
    Polynomial(#[from] PolyError),
    #[error("reconstruction stage: {0}")]
    Reconstruction(#[from] ExprError),
    #[error("operator verification stage: {0}")]
    Verification(QuadError),
    /// A proven bound or a residual check failed at runtime.
    #[error("internal contradiction: {0}")]
    Contradiction(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub quad_tol: f64,
    pub root_tol: f64,
    pub residual_tol: f64,
    pub grid: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            quad_tol: DEFAULT_QUAD_TOL,
            root_tol: DEFAULT_ROOT_TOL,
            residual_tol: DEFAULT_RESIDUAL_TOL,
            grid: DEFAULT_GRID,
        }
    }
}

impl SolveOptions {
    fn validate(&self) -> Result<(), SolveError> {
        for (name, v) in [
            ("quadrature tolerance", self.quad_tol),
            ("root tolerance", self.root_tol),
            ("residual tolerance", self.residual_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SolveError::Precondition(format!("{name} must be positive, got {v}")));
            }
        }
        if self.grid < 2 {
            return Err(SolveError::Precondition(format!(
                "report grid needs at least 2 points, got {}",
                self.grid
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanePoint {
    pub x: f64,
    pub y: f64,
}

impl PlanePoint {
    pub fn new(x: f64, y: f64) -> Self {
        PlanePoint { x, y }
    }

    pub fn is_positive(&self) -> bool {
        self.x > 0.0 && self.y > 0.0
    }

    pub fn dist(&self, other: &PlanePoint) -> f64 {
        (self.x - other.x).abs().max((self.y - other.y).abs())
    }
}

/// A fixed point `f₀ = x₀φ₁ + y₀φ₂` sampled on the report grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointFn {
    pub x0: f64,
    pub y0: f64,
    pub xi: f64,
    pub samples: Vec<(f64, f64)>,
    /// `sup |H_k f₀ - f₀|` over the samples; `None` until verified.
    pub residual_sup: Option<f64>,
    /// The zero function θ. Never counted.
    pub trivial: bool,
}

impl FixedPointFn {
    pub fn eval(&self, kernel: &KernelSpec, t: f64) -> Result<f64, ExprError> {
        Ok(self.x0 * kernel.phi1.eval(t)? + self.y0 * kernel.phi2.eval(t)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// At most one sign change in the coefficients: exactly one fixed point.
    UniqueBySignPattern,
    /// A sign bracket exists on the positive axis: at least two fixed points.
    BracketImpliesGe2,
    /// `d` nonincreasing: at most three fixed points.
    AtMost3ByMonotoneDecrease,
    General,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::UniqueBySignPattern => "UNIQUE_BY_SIGN_PATTERN",
            Verdict::BracketImpliesGe2 => "BRACKET_IMPLIES_GE_2",
            Verdict::AtMost3ByMonotoneDecrease => "AT_MOST_3_BY_MONOTONE_DECREASE",
            Verdict::General => "GENERAL",
        }
    }

    /// Whether `n_fix` is compatible with what the verdict proves.
    pub fn admits(self, n_fix: usize) -> bool {
        match self {
            Verdict::UniqueBySignPattern => n_fix == 1,
            Verdict::BracketImpliesGe2 => n_fix >= 2,
            Verdict::AtMost3ByMonotoneDecrease => n_fix <= 3,
            Verdict::General => true,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Every criterion evaluated, plus the verdict reported under precedence
/// unique > bracket > at-most-3 > general.
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub verdict: Verdict,
    pub sign_pattern: bool,
    pub d_nondecreasing: bool,
    pub d_nonincreasing: bool,
    pub bracket: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub kernel: Option<KernelSpec>,
    pub options: SolveOptions,
    pub coefficients: CoefficientSet,
    pub polynomial: PolySpec,
    pub descartes_bound: usize,
    pub cauchy_bound: f64,
    pub roots: Vec<PositiveRoot>,
    pub points: Vec<PlanePoint>,
    pub q_residuals: Vec<f64>,
    /// Present when solving from a kernel.
    pub fixed_points: Vec<FixedPointFn>,
    pub n_fix: usize,
    pub classification: Classification,
}

/// Planar fixed point generated by a positive root `ξ₀`.
pub fn root_to_point(xi0: f64, c: &CoefficientSet) -> Result<PlanePoint, SolveError> {
    if !(xi0 > 0.0 && xi0.is_finite()) {
        return Err(SolveError::Precondition(format!("root must be positive, got {xi0}")));
    }
    if c.k < 2 {
        return Err(SolveError::Precondition(format!("degree k = {} is below 2", c.k)));
    }
    let sum = c.a.iter().rev().fold(0.0, |acc, &ai| acc * xi0 + ai);
    let x = sum.powf(-1.0 / (c.k as f64 - 1.0));
    Ok(PlanePoint { x, y: xi0 * x })
}

/// `max(|Q₁(p) - x|, |Q₂(p) - y|)` with powers expanded term by term.
pub fn verify_q(p: &PlanePoint, c: &CoefficientSet) -> f64 {
    let k = c.k as i32;
    let (mut q1, mut q2) = (0.0, 0.0);
    for i in 0..=c.k {
        let m = p.x.powi(k - i as i32) * p.y.powi(i as i32);
        q1 += c.a[i] * m;
        q2 += c.b[i] * m;
    }
    (q1 - p.x).abs().max((q2 - p.y).abs())
}

/// Samples `f₀ = x φ₁ + y φ₂` on a uniform grid of `grid` points.
///
/// The origin is accepted and yields the trivial fixed point.
pub fn reconstruct(p: &PlanePoint, kernel: &KernelSpec, grid: usize) -> Result<FixedPointFn, SolveError> {
    let trivial = p.x == 0.0 && p.y == 0.0;
    if !trivial && !p.is_positive() {
        return Err(SolveError::Precondition(format!(
            "fixed point ({}, {}) is not in the open positive quadrant",
            p.x, p.y
        )));
    }
    if grid < 2 {
        return Err(SolveError::Precondition(format!("grid must have at least 2 points, got {grid}")));
    }
    let mut f = FixedPointFn {
        x0: p.x,
        y0: p.y,
        xi: if trivial { 0.0 } else { p.y / p.x },
        samples: Vec::with_capacity(grid),
        residual_sup: None,
        trivial,
    };
    for j in 0..grid {
        let t = j as f64 / (grid - 1) as f64;
        let v = f.eval(kernel, t)?;
        f.samples.push((t, v));
    }
    Ok(f)
}

/// Applies `H_k` to the closed form of `f` and stores `sup |H_k f - f|` over
/// the sample points.
pub fn verify_operator(f: &mut FixedPointFn, kernel: &KernelSpec, tol: f64) -> Result<f64, SolveError> {
    if f.trivial {
        f.residual_sup = Some(0.0);
        return Ok(0.0);
    }
    let k = kernel.k as i32;
    let moment = |psi: &crate::expr::Expression| {
        integrate(|u| Ok(psi.eval(u)? * f.eval(kernel, u)?.powi(k)), tol)
    };
    let c1 = moment(&kernel.psi1).map_err(SolveError::Verification)?;
    let c2 = moment(&kernel.psi2).map_err(SolveError::Verification)?;
    let mut sup: f64 = 0.0;
    for &(t, v) in &f.samples {
        let hf = c1 * kernel.phi1.eval(t)? + c2 * kernel.phi2.eval(t)?;
        sup = sup.max((hf - v).abs());
    }
    f.residual_sup = Some(sup);
    Ok(sup)
}

fn sign_pattern_unique(d: &[f64], eps: f64) -> bool {
    // d ≤ 0 on 1..=i₀ and d ≥ 0 afterwards, for some i₀ in 0..=k
    let mut seen_positive = false;
    for &v in d {
        if v > eps {
            seen_positive = true;
        } else if v < -eps && seen_positive {
            return false;
        }
    }
    true
}

fn d_monotone(d: &[f64], eps: f64) -> (bool, bool) {
    let up = d.windows(2).all(|w| w[0] <= w[1] + eps);
    let down = d.windows(2).all(|w| w[0] + eps >= w[1]);
    (up, down)
}

/// Log-spaced scan of `(0, B]` for `ξ₁ < ξ₂` with `P(ξ₁) > 0 ≥ P(ξ₂)`,
/// using exact signs.
fn find_bracket(p: &PolySpec) -> Option<(f64, f64)> {
    let bound = root_upper_bound(p);
    let lo = bound * 1e-8;
    let ratio = (bound / lo).powf(1.0 / (BRACKET_SCAN_POINTS - 1) as f64);
    let mut first_positive = None;
    let mut x = lo;
    for j in 0..BRACKET_SCAN_POINTS {
        let xi = if j + 1 == BRACKET_SCAN_POINTS { bound } else { x };
        match (first_positive, p.sign_at(xi)) {
            (None, Ordering::Greater) => first_positive = Some(xi),
            (Some(x1), Ordering::Less | Ordering::Equal) => return Some((x1, xi)),
            _ => {}
        }
        x *= ratio;
    }
    None
}

pub fn classify(c: &CoefficientSet) -> Classification {
    classify_with(c, &build_polynomial(c))
}

fn classify_with(c: &CoefficientSet, p: &PolySpec) -> Classification {
    let eps = c.zero_threshold();
    let sign_pattern = sign_pattern_unique(&c.d, eps);
    let (d_nondecreasing, d_nonincreasing) = d_monotone(&c.d, eps);
    let bracket = find_bracket(p);
    let verdict = if sign_pattern || d_nondecreasing {
        Verdict::UniqueBySignPattern
    } else if bracket.is_some() {
        Verdict::BracketImpliesGe2
    } else if d_nonincreasing {
        Verdict::AtMost3ByMonotoneDecrease
    } else {
        Verdict::General
    };
    Classification {
        verdict,
        sign_pattern,
        d_nondecreasing,
        d_nonincreasing,
        bracket,
    }
}

/// The algebraic half of the pipeline: roots and planar fixed points only.
pub fn solve_coefficients(c: &CoefficientSet, opts: &SolveOptions) -> Result<SolveReport, SolveError> {
    opts.validate()?;
    if c.k < 2 {
        return Err(SolveError::Precondition(format!("degree k = {} is below 2", c.k)));
    }
    let polynomial = build_polynomial(c);
    let descartes_bound = descartes_positive_bound(&polynomial);
    let cauchy_bound = root_upper_bound(&polynomial);
    let roots = isolate_and_refine(&polynomial, opts.root_tol)?;
    let points = roots
        .iter()
        .map(|r| root_to_point(r.value, c))
        .collect::<Result<Vec<_>, _>>()?;
    let q_residuals: Vec<f64> = points.iter().map(|p| verify_q(p, c)).collect();
    let classification = classify_with(c, &polynomial);
    let report = SolveReport {
        kernel: None,
        options: *opts,
        coefficients: c.clone(),
        polynomial,
        descartes_bound,
        cauchy_bound,
        n_fix: roots.len(),
        roots,
        points,
        q_residuals,
        fixed_points: Vec::new(),
        classification,
    };
    check_consistency(&report)?;
    Ok(report)
}

fn check_consistency(r: &SolveReport) -> Result<(), SolveError> {
    let k = r.coefficients.k;
    let n = r.n_fix;
    if !(1..=k + 1).contains(&n) {
        return Err(SolveError::Contradiction(format!(
            "{n} positive roots found, outside the range 1..={}",
            k + 1
        )));
    }
    let with_mult: usize = r.roots.iter().map(|x| x.multiplicity).sum();
    if with_mult > r.descartes_bound || !(r.descartes_bound - with_mult).is_multiple_of(2) {
        return Err(SolveError::Contradiction(format!(
            "{with_mult} roots counted with multiplicity vs Descartes bound {}",
            r.descartes_bound
        )));
    }
    if !r.classification.verdict.admits(n) {
        return Err(SolveError::Contradiction(format!(
            "classification {} disagrees with {n} fixed points",
            r.classification.verdict
        )));
    }
    for (p, &res) in r.points.iter().zip(&r.q_residuals) {
        let scale = p.x.abs().max(p.y.abs()).max(1.0);
        if !p.is_positive() || !(res <= Q_RESIDUAL_TOL * scale) {
            return Err(SolveError::Contradiction(format!(
                "reconstructed point ({}, {}) misses the planar map by {res:e}",
                p.x, p.y
            )));
        }
    }
    Ok(())
}

/// Full pipeline on a validated kernel.
pub fn solve(kernel: &KernelSpec, opts: &SolveOptions) -> Result<SolveReport, SolveError> {
    opts.validate()?;
    let coefficients = compute_coefficients(kernel, opts.quad_tol)?;
    let mut report = solve_coefficients(&coefficients, opts)?;
    for p in &report.points {
        let mut f = reconstruct(p, kernel, opts.grid)?;
        let residual = verify_operator(&mut f, kernel, opts.quad_tol)?;
        let scale = f.samples.iter().fold(1.0f64, |m, s| m.max(s.1.abs()));
        if !(residual <= opts.residual_tol * scale) {
            return Err(SolveError::Contradiction(format!(
                "fixed point for ξ = {} has operator residual {residual:e}",
                f.xi
            )));
        }
        report.fixed_points.push(f);
    }
    report.kernel = Some(kernel.clone());
    Ok(report)
}
