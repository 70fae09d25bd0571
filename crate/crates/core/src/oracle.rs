//! Independent cross-checks for the solver.
//!
//! Two routes that never touch the characteristic polynomial:
//!
//! - a damped-Newton scan for fixed points of the planar map `Q_k` over a
//!   grid of starting points;
//! - a discretized integral operator on a uniform grid (piecewise-cubic
//!   interpolation of `f`, 8-point Gauss–Legendre per cell, full kernel
//!   `K(t, u)`), iterated as a Picard probe.
//!
//! Picard iteration is a heuristic. `H_k` is `k`-homogeneous, so every
//! positive fixed point repels along its own ray and the plain iteration
//! generally collapses to θ or blows up. The projective variant iterates
//! directions instead and rescales the limit by homogeneity.

use thiserror::Error;

use crate::expr::ExprError;
use crate::polyroots::{build_polynomial, root_upper_bound};
use crate::quad::{CoefficientSet, KernelSpec};
use crate::solver::{PlanePoint, SolveReport};

pub const NEWTON_TOL: f64 = 1e-11;
pub const DEDUP_RADIUS: f64 = 1e-7;
pub const MIN_COORD: f64 = 1e-9;
const NEWTON_MAX_ITER: usize = 200;
const OVERFLOW_GUARD: f64 = 1e100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("planar map diverged at ({x}, {y})")]
    Divergence { x: f64, y: f64 },
    #[error("kernel evaluation: {0}")]
    Expr(#[from] ExprError),
}

/// Uniform-grid samples `values[j] ≈ f(j / (n - 1))`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(values: Vec<f64>) -> Result<Self, OracleError> {
        if values.len() < 2 {
            return Err(OracleError::Precondition(format!(
                "grid function needs at least 2 nodes, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(OracleError::Precondition("grid function has non-finite values".into()));
        }
        Ok(GridFunction { values })
    }

    pub fn constant(n: usize, c: f64) -> Result<Self, OracleError> {
        Self::new(vec![c; n])
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(f64) -> f64) -> Result<Self, OracleError> {
        Self::new((0..n).map(|j| f(node(j, n))).collect())
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn t(&self, j: usize) -> f64 {
        node(j, self.n())
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sup_dist(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn scaled(&self, c: f64) -> GridFunction {
        GridFunction {
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }
}

fn node(j: usize, n: usize) -> f64 {
    j as f64 / (n - 1) as f64
}

/// `(Σ a[i] x^{k-i} y^i, Σ b[i] x^{k-i} y^i)`, nested as
/// `(…((c₀x + c₁y)x + c₂y²)x …) + c_k y^k`.
pub fn q_map(p: &PlanePoint, c: &CoefficientSet) -> Result<PlanePoint, OracleError> {
    let (x, y) = (p.x, p.y);
    let mut q1 = c.a[0];
    let mut q2 = c.b[0];
    let mut ypow = 1.0;
    for i in 1..=c.k {
        ypow *= y;
        q1 = q1 * x + c.a[i] * ypow;
        q2 = q2 * x + c.b[i] * ypow;
    }
    if q1.is_finite() && q2.is_finite() {
        Ok(PlanePoint::new(q1, q2))
    } else {
        Err(OracleError::Divergence { x, y })
    }
}

fn q_jacobian(p: &PlanePoint, c: &CoefficientSet) -> [[f64; 2]; 2] {
    let k = c.k as i32;
    let mut j = [[0.0; 2]; 2];
    for i in 0..=c.k {
        let i32_ = i as i32;
        let dx = if k - i32_ >= 1 {
            f64::from(k - i32_) * p.x.powi(k - i32_ - 1) * p.y.powi(i32_)
        } else {
            0.0
        };
        let dy = if i32_ >= 1 {
            f64::from(i32_) * p.x.powi(k - i32_) * p.y.powi(i32_ - 1)
        } else {
            0.0
        };
        j[0][0] += c.a[i] * dx;
        j[0][1] += c.a[i] * dy;
        j[1][0] += c.b[i] * dx;
        j[1][1] += c.b[i] * dy;
    }
    j
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

impl Region {
    pub fn square(lo: f64, hi: f64) -> Self {
        Region {
            x_lo: lo,
            x_hi: hi,
            y_lo: lo,
            y_hi: hi,
        }
    }

    /// `[1e-6, R]²` with `R` twice a bound on every positive fixed point's
    /// coordinates: for `ξ ∈ (0, B]`, `x ≤ a[0]^{-1/(k-1)}` and `y = ξx`.
    pub fn for_coefficients(c: &CoefficientSet) -> Self {
        let bound = root_upper_bound(&build_polynomial(c));
        let x_max = c.a[0].powf(-1.0 / (c.k as f64 - 1.0));
        Region::square(1e-6, 2.0 * x_max * bound.max(1.0))
    }

    fn validate(&self) -> Result<(), OracleError> {
        let ok = self.x_lo >= 0.0
            && self.y_lo >= 0.0
            && self.x_lo < self.x_hi
            && self.y_lo < self.y_hi
            && self.x_hi.is_finite()
            && self.y_hi.is_finite();
        if ok {
            Ok(())
        } else {
            Err(OracleError::Precondition(format!(
                "scan region {self:?} is not a rectangle in the positive quadrant"
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub point: PlanePoint,
    pub residual: f64,
    pub iterations: usize,
    /// Starts that converged to this point.
    pub hits: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    /// Positive fixed points, deduplicated, ascending in `x`.
    pub points: Vec<ScanPoint>,
    pub starts: usize,
    /// Starts that failed to converge or diverged.
    pub dropped: usize,
    /// Starts that converged to θ or outside the open quadrant.
    pub excluded: usize,
}

fn newton_from(start: PlanePoint, c: &CoefficientSet) -> Option<(PlanePoint, f64, usize)> {
    let residual = |p: &PlanePoint| -> Option<f64> {
        let q = q_map(p, c).ok()?;
        Some((q.x - p.x).abs().max((q.y - p.y).abs()))
    };
    let mut p = start;
    let mut norm = residual(&p)?;
    let mut iterations = 0;
    while iterations < NEWTON_MAX_ITER {
        iterations += 1;
        let q = q_map(&p, c).ok()?;
        let (fx, fy) = (q.x - p.x, q.y - p.y);
        let mut jac = q_jacobian(&p, c);
        jac[0][0] -= 1.0;
        jac[1][1] -= 1.0;
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let sx = -(jac[1][1] * fx - jac[0][1] * fy) / det;
        let sy = -(-jac[1][0] * fx + jac[0][0] * fy) / det;
        let mut lambda = 1.0;
        let mut accepted = None;
        while lambda > 1e-12 {
            let cand = PlanePoint::new(p.x + lambda * sx, p.y + lambda * sy);
            if let Some(r) = residual(&cand) {
                if r < norm {
                    accepted = Some((cand, r));
                    break;
                }
            }
            lambda *= 0.5;
        }
        let Some((next, r)) = accepted else { break };
        let step = (next.x - p.x).abs().max((next.y - p.y).abs());
        p = next;
        norm = r;
        if step <= 1e-15 * (1.0 + p.x.abs().max(p.y.abs())) {
            break;
        }
    }
    (norm <= NEWTON_TOL * p.x.abs().max(p.y.abs()).max(1.0)).then_some((p, norm, iterations))
}

/// Damped Newton on `Q_k(p) - p` from a grid of starts in `region`, plus any
/// `extra_starts`. Each axis carries `starts_per_axis` uniform and as many
/// log-spaced nodes.
pub fn newton_scan_q(
    c: &CoefficientSet,
    region: &Region,
    starts_per_axis: usize,
    extra_starts: &[PlanePoint],
) -> Result<ScanResult, OracleError> {
    region.validate()?;
    if starts_per_axis < 2 {
        return Err(OracleError::Precondition(format!(
            "need at least 2 starts per axis, got {starts_per_axis}"
        )));
    }
    if c.k < 2 {
        return Err(OracleError::Precondition(format!("degree k = {} is below 2", c.k)));
    }
    let n = starts_per_axis;
    // Cell-centred uniform nodes plus log-spaced nodes: the region is sized
    // by a root bound and can exceed the fixed points by many decades.
    let axis = |lo: f64, hi: f64| -> Vec<f64> {
        let mut v: Vec<f64> = (0..n).map(|j| lo + (hi - lo) * (j as f64 + 0.5) / n as f64).collect();
        let llo = lo.max(hi * 1e-12).ln();
        let lhi = hi.ln();
        v.extend((0..n).map(|j| (llo + (lhi - llo) * j as f64 / (n - 1) as f64).exp()));
        v
    };
    let xs = axis(region.x_lo, region.x_hi);
    let ys = axis(region.y_lo, region.y_hi);
    let mut starts: Vec<PlanePoint> = xs
        .iter()
        .flat_map(|&x| ys.iter().map(move |&y| PlanePoint::new(x, y)))
        .collect();
    starts.extend_from_slice(extra_starts);

    let mut result = ScanResult {
        points: Vec::new(),
        starts: starts.len(),
        dropped: 0,
        excluded: 0,
    };
    for s in starts {
        match newton_from(s, c) {
            None => result.dropped += 1,
            Some((p, _, _)) if !(p.x > MIN_COORD && p.y > MIN_COORD) => result.excluded += 1,
            Some((point, residual, iterations)) => {
                match result.points.iter_mut().find(|q| q.point.dist(&point) <= DEDUP_RADIUS) {
                    Some(existing) => {
                        existing.hits += 1;
                        if residual < existing.residual {
                            existing.point = point;
                            existing.residual = residual;
                            existing.iterations = iterations;
                        }
                    }
                    None => result.points.push(ScanPoint {
                        point,
                        residual,
                        iterations,
                        hits: 1,
                    }),
                }
            }
        }
    }
    result.points.sort_by(|a, b| a.point.x.total_cmp(&b.point.x));
    Ok(result)
}

// 8-point Gauss–Legendre on [-1, 1]
const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

#[derive(Debug, Clone)]
struct Stencil {
    start: usize,
    weights: [f64; 4],
    len: usize,
}

/// `H_k` discretized on an `n`-point uniform grid.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    n: usize,
    k: i32,
    stencils: Vec<Stencil>,
    /// Row `j`: `K(t_j, u_q) · w_q` for every quadrature node `u_q`.
    matrix: Vec<f64>,
}

impl DiscreteOperator {
    pub fn new(kernel: &KernelSpec, n: usize) -> Result<Self, OracleError> {
        if n < 2 {
            return Err(OracleError::Precondition(format!("grid needs at least 2 nodes, got {n}")));
        }
        let h = 1.0 / (n - 1) as f64;
        let width = n.min(4);
        let mut stencils = Vec::with_capacity((n - 1) * 8);
        let mut nodes = Vec::with_capacity((n - 1) * 8);
        for cell in 0..n - 1 {
            let start = cell.saturating_sub(1).min(n - width);
            let lo = cell as f64 * h;
            for (&x, &w) in GL_NODES.iter().zip(&GL_WEIGHTS) {
                let u = lo + 0.5 * h * (x + 1.0);
                let mut weights = [0.0; 4];
                for (m, wm) in weights.iter_mut().enumerate().take(width) {
                    let tm = node(start + m, n);
                    *wm = (0..width)
                        .filter(|&l| l != m)
                        .map(|l| {
                            let tl = node(start + l, n);
                            (u - tl) / (tm - tl)
                        })
                        .product();
                }
                stencils.push(Stencil {
                    start,
                    weights,
                    len: width,
                });
                nodes.push((u, 0.5 * h * w));
            }
        }
        let psi: Vec<(f64, f64)> = nodes
            .iter()
            .map(|&(u, w)| Ok((kernel.psi1.eval(u)? * w, kernel.psi2.eval(u)? * w)))
            .collect::<Result<_, ExprError>>()?;
        let mut matrix = Vec::with_capacity(n * nodes.len());
        for j in 0..n {
            let t = node(j, n);
            let (p1, p2) = (kernel.phi1.eval(t)?, kernel.phi2.eval(t)?);
            matrix.extend(psi.iter().map(|&(s1, s2)| p1 * s1 + p2 * s2));
        }
        Ok(DiscreteOperator {
            n,
            k: kernel.k as i32,
            stencils,
            matrix,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k as usize
    }

    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction, OracleError> {
        if f.n() != self.n {
            return Err(OracleError::Precondition(format!(
                "grid function has {} nodes, operator expects {}",
                f.n(),
                self.n
            )));
        }
        let powered: Vec<f64> = self
            .stencils
            .iter()
            .map(|s| {
                let v: f64 = s.weights[..s.len]
                    .iter()
                    .zip(&f.values[s.start..s.start + s.len])
                    .map(|(w, v)| w * v)
                    .sum();
                v.powi(self.k)
            })
            .collect();
        let m = powered.len();
        let values = (0..self.n)
            .map(|j| {
                self.matrix[j * m..(j + 1) * m]
                    .iter()
                    .zip(&powered)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect();
        Ok(GridFunction { values })
    }

    /// Plain iteration `f ← H_k f` from `seed`.
    ///
    /// `None` when the iterates overflow, collapse to θ, or fail to settle
    /// within `max_iter` steps.
    pub fn picard(&self, seed: &GridFunction, max_iter: usize, tol: f64) -> Result<Option<PicardLimit>, OracleError> {
        check_seed(seed)?;
        let mut f = seed.clone();
        for it in 1..=max_iter {
            let next = self.apply(&f)?;
            if !next.values.iter().all(|v| v.is_finite() && v.abs() < OVERFLOW_GUARD) {
                return Ok(None);
            }
            let step = next.sup_dist(&f);
            f = next;
            if step <= tol {
                if f.sup_norm() <= 10.0 * tol {
                    return Ok(None);
                }
                let residual = self.apply(&f)?.sup_dist(&f);
                return Ok((residual <= 10.0 * tol).then_some(PicardLimit {
                    limit: f,
                    iterations: it,
                    residual,
                    eigenvalue: None,
                }));
            }
        }
        Ok(None)
    }

    /// Iterates directions `g ← H_k g / ‖H_k g‖∞`. Once `H_k g ≈ λ g`, the
    /// fixed point on that ray is `λ^{-1/(k-1)} g`; iteration stops when that
    /// candidate's residual is at most `tol`.
    pub fn picard_projective(
        &self,
        seed: &GridFunction,
        max_iter: usize,
        tol: f64,
    ) -> Result<Option<PicardLimit>, OracleError> {
        check_seed(seed)?;
        if self.k < 2 {
            return Err(OracleError::Precondition("projective iteration needs k >= 2".into()));
        }
        let mut g = seed.scaled(1.0 / seed.sup_norm());
        for it in 1..=max_iter {
            let h = self.apply(&g)?;
            let lambda = h.sup_norm();
            if !(lambda > 0.0 && lambda.is_finite()) {
                return Ok(None);
            }
            let scale = lambda.powf(-1.0 / f64::from(self.k - 1));
            let candidate = g.scaled(scale);
            let residual = self.apply(&candidate)?.sup_dist(&candidate);
            if residual <= tol {
                return Ok(Some(PicardLimit {
                    limit: candidate,
                    iterations: it,
                    residual,
                    eigenvalue: Some(lambda),
                }));
            }
            g = h.scaled(1.0 / lambda);
        }
        Ok(None)
    }
}

fn check_seed(seed: &GridFunction) -> Result<(), OracleError> {
    if seed.values.iter().any(|&v| v < 0.0) {
        return Err(OracleError::Precondition("Picard seed must be nonnegative".into()));
    }
    if seed.sup_norm() == 0.0 {
        return Err(OracleError::Precondition("Picard seed is identically zero".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardLimit {
    pub limit: GridFunction,
    pub iterations: usize,
    /// `sup |H_k f - f|` on the grid.
    pub residual: f64,
    /// Set by the projective iteration: `λ` with `H_k g ≈ λ g`, `‖g‖∞ = 1`.
    pub eigenvalue: Option<f64>,
}

pub fn apply_operator_grid(f: &GridFunction, kernel: &KernelSpec) -> Result<GridFunction, OracleError> {
    if f.values.iter().any(|&v| v < 0.0) {
        return Err(OracleError::Precondition("operator input must be nonnegative".into()));
    }
    DiscreteOperator::new(kernel, f.n())?.apply(f)
}

pub fn picard(
    kernel: &KernelSpec,
    seed: &GridFunction,
    max_iter: usize,
    tol: f64,
) -> Result<Option<PicardLimit>, OracleError> {
    DiscreteOperator::new(kernel, seed.n())?.picard(seed, max_iter, tol)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub starts_per_axis: usize,
    /// Add one Newton start at the planar image of each polynomial root.
    pub seed_from_roots: bool,
    pub picard_seeds: usize,
    pub picard_grid: usize,
    pub picard_max_iter: usize,
    pub picard_tol: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            starts_per_axis: 20,
            seed_from_roots: true,
            picard_seeds: 3,
            picard_grid: 201,
            picard_max_iter: 500,
            picard_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardProbe {
    pub seed_value: f64,
    pub projective: bool,
    pub outcome: Option<PicardLimit>,
    /// Sup distance on the grid to the nearest reported fixed point.
    pub distance_to_solution: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub scan: ScanResult,
    pub picard: Vec<PicardProbe>,
    pub solver_n_fix: usize,
    pub count_match: bool,
    /// Worst `|y/x - ξ|` over scan points against their nearest root.
    pub max_ratio_error: f64,
    pub picard_match: bool,
    pub matches: bool,
}

pub const RATIO_TOL: f64 = 1e-6;
/// Sup distance for a plain Picard limit. Projective limits are held to
/// `PICARD_MATCH_TOL · max(1, sup|f₀|)`: they reach large fixed points, where
/// the grid interpolation error grows with the solution.
pub const PICARD_MATCH_TOL: f64 = 1e-4;

/// Runs every independent check against a finished solve.
pub fn cross_check(report: &SolveReport, opts: &OracleOptions) -> Result<OracleReport, OracleError> {
    let c = &report.coefficients;
    let extra: Vec<PlanePoint> = if opts.seed_from_roots {
        report.points.clone()
    } else {
        Vec::new()
    };
    let scan = newton_scan_q(c, &Region::for_coefficients(c), opts.starts_per_axis, &extra)?;
    let max_ratio_error = scan
        .points
        .iter()
        .map(|sp| {
            let ratio = sp.point.y / sp.point.x;
            report
                .roots
                .iter()
                .map(|r| (r.value - ratio).abs())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    let count_match = scan.points.len() == report.n_fix;

    let mut picard_probes = Vec::new();
    if let Some(kernel) = &report.kernel {
        if opts.picard_seeds > 0 {
            let op = DiscreteOperator::new(kernel, opts.picard_grid)?;
            let targets: Vec<GridFunction> = report
                .fixed_points
                .iter()
                .map(|f| GridFunction::from_fn(op.n(), |t| f.eval(kernel, t).unwrap_or(f64::NAN)))
                .collect::<Result<_, _>>()?;
            for s in 0..opts.picard_seeds {
                // 0.5, 1, 2, … doubling
                let seed_value = 0.5 * 2f64.powi(s as i32);
                let seed = GridFunction::constant(op.n(), seed_value)?;
                for projective in [false, true] {
                    let outcome = if projective {
                        op.picard_projective(&seed, opts.picard_max_iter, opts.picard_tol)?
                    } else {
                        op.picard(&seed, opts.picard_max_iter, opts.picard_tol)?
                    };
                    let distance_to_solution = outcome.as_ref().map(|o| {
                        targets
                            .iter()
                            .map(|t| t.sup_dist(&o.limit))
                            .fold(f64::INFINITY, f64::min)
                    });
                    picard_probes.push(PicardProbe {
                        seed_value,
                        projective,
                        outcome,
                        distance_to_solution,
                    });
                }
            }
        }
    }
    let scale = report
        .fixed_points
        .iter()
        .flat_map(|f| f.samples.iter().map(|s| s.1.abs()))
        .fold(1.0f64, f64::max);
    let picard_match = picard_probes.iter().all(|p| {
        let tol = if p.projective { PICARD_MATCH_TOL * scale } else { PICARD_MATCH_TOL };
        p.distance_to_solution.is_none_or(|d| d <= tol)
    });
    Ok(OracleReport {
        matches: count_match && max_ratio_error <= RATIO_TOL && picard_match,
        scan,
        picard: picard_probes,
        solver_n_fix: report.n_fix,
        count_match,
        max_ratio_error,
        picard_match,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{solve, solve_coefficients, SolveOptions};
    use approx::assert_abs_diff_eq;

    fn unit_ab() -> KernelSpec {
        KernelSpec::parse("1", "t", "1", "1*t", 2).unwrap()
    }

    fn worked() -> CoefficientSet {
        CoefficientSet::new(vec![1.0, 1.0, 1.0 / 3.0], vec![0.5, 2.0 / 3.0, 0.25], 0.0).unwrap()
    }

    #[test]
    fn q_map_examples() {
        let c = worked();
        assert_eq!(q_map(&PlanePoint::new(0.0, 0.0), &c).unwrap(), PlanePoint::new(0.0, 0.0));
        let q = q_map(&PlanePoint::new(1.0, 1.0), &c).unwrap();
        assert_abs_diff_eq!(q.x, 7.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q.y, 17.0 / 12.0, epsilon = 1e-15);
        assert!(matches!(
            q_map(&PlanePoint::new(1e300, 1e300), &c),
            Err(OracleError::Divergence { .. })
        ));
    }

    #[test]
    fn q_map_fixes_solver_point() {
        let c = worked();
        let report = solve_coefficients(&c, &SolveOptions::default()).unwrap();
        let p = report.points[0];
        assert!(q_map(&p, &c).unwrap().dist(&p) <= 1e-8);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let c = CoefficientSet::new(vec![1.0, 0.3, 2.0, 0.7], vec![0.2, 1.1, 0.4, 0.9], 0.0).unwrap();
        let p = PlanePoint::new(0.7, 1.3);
        let j = q_jacobian(&p, &c);
        let h = 1e-6;
        let fd = |dx: f64, dy: f64| {
            let a = q_map(&PlanePoint::new(p.x + dx, p.y + dy), &c).unwrap();
            let b = q_map(&PlanePoint::new(p.x - dx, p.y - dy), &c).unwrap();
            ((a.x - b.x) / (2.0 * h), (a.y - b.y) / (2.0 * h))
        };
        let (d1x, d2x) = fd(h, 0.0);
        let (d1y, d2y) = fd(0.0, h);
        assert_abs_diff_eq!(j[0][0], d1x, epsilon = 1e-7);
        assert_abs_diff_eq!(j[1][0], d2x, epsilon = 1e-7);
        assert_abs_diff_eq!(j[0][1], d1y, epsilon = 1e-7);
        assert_abs_diff_eq!(j[1][1], d2y, epsilon = 1e-7);
    }

    #[test]
    fn scan_finds_worked_point() {
        let scan = newton_scan_q(&worked(), &Region::square(0.0, 3.0), 20, &[]).unwrap();
        assert_eq!(scan.points.len(), 1);
        let p = scan.points[0].point;
        assert_abs_diff_eq!(p.x, 0.59436, epsilon = 1e-4);
        assert_abs_diff_eq!(p.y, 0.34057, epsilon = 1e-4);
    }

    #[test]
    fn scan_finds_tangential_point() {
        // P = (ξ-1)^2 (ξ-2): fixed points at ratios 1 (tangential) and 2
        let c = CoefficientSet::new(vec![6.0, 1.0, 1.0], vec![2.0, 1.0, 5.0], 0.0).unwrap();
        let report = solve_coefficients(&c, &SolveOptions::default()).unwrap();
        let scan = newton_scan_q(&c, &Region::for_coefficients(&c), 20, &[]).unwrap();
        assert_eq!(scan.points.len(), 2, "{scan:?}");
        for (sp, root) in scan.points.iter().zip(report.roots.iter().rev()) {
            // ascending x means descending ratio here
            assert_abs_diff_eq!(sp.point.y / sp.point.x, root.value, epsilon = 1e-6);
        }
    }

    #[test]
    fn scan_finds_three_points() {
        let c = CoefficientSet::new(vec![12.0, 1.0, 1.0], vec![6.0, 1.0, 7.0], 0.0).unwrap();
        let scan = newton_scan_q(&c, &Region::for_coefficients(&c), 20, &[]).unwrap();
        assert_eq!(scan.points.len(), 3);
    }

    #[test]
    fn scan_rejects_bad_region() {
        let c = worked();
        assert!(newton_scan_q(&c, &Region::square(-1.0, 3.0), 20, &[]).is_err());
        assert!(newton_scan_q(&c, &Region::square(3.0, 1.0), 20, &[]).is_err());
        assert!(newton_scan_q(&c, &Region::square(0.0, 1.0), 1, &[]).is_err());
    }

    #[test]
    fn operator_on_constants() {
        let k = unit_ab();
        let zero = GridFunction::constant(11, 0.0).unwrap();
        assert_eq!(apply_operator_grid(&zero, &k).unwrap().sup_norm(), 0.0);
        for deg in 2..5 {
            let k = KernelSpec::parse("1", "t", "1", "1*t", deg).unwrap();
            let one = GridFunction::constant(21, 1.0).unwrap();
            let hf = apply_operator_grid(&one, &k).unwrap();
            for (j, v) in hf.values.iter().enumerate() {
                assert_abs_diff_eq!(*v, 1.0 + hf.t(j) / 2.0, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn operator_matches_closed_form_application() {
        // f = 0.3 + t^2 exp(t); H f = c1 + c2 t with the moments by adaptive quadrature
        let k = KernelSpec::parse("1", "t", "1", "1*t", 3).unwrap();
        let f = |t: f64| 0.3 + t * t * t.exp();
        let g = GridFunction::from_fn(401, f).unwrap();
        let hf = apply_operator_grid(&g, &k).unwrap();
        let c1 = crate::quad::integrate(|u| Ok(f(u).powi(3)), 1e-13).unwrap();
        let c2 = crate::quad::integrate(|u| Ok(u * f(u).powi(3)), 1e-13).unwrap();
        for (j, v) in hf.values.iter().enumerate() {
            assert_abs_diff_eq!(*v, c1 + c2 * hf.t(j), epsilon = 1e-7);
        }
    }

    #[test]
    fn homogeneity() {
        let k = KernelSpec::parse("1+t", "exp(t)", "2-t", "t^2+0.1", 3).unwrap();
        let f = GridFunction::from_fn(51, |t| 0.2 + t.sin()).unwrap();
        let h1 = apply_operator_grid(&f, &k).unwrap();
        let h2 = apply_operator_grid(&f.scaled(2.0), &k).unwrap();
        assert!(h2.sup_dist(&h1.scaled(8.0)) <= 1e-9 * h2.sup_norm());
    }

    #[test]
    fn plain_picard_collapses_or_diverges() {
        let k = unit_ab();
        let seed = GridFunction::constant(201, 0.5).unwrap();
        // 0.5 lies below the fixed point: the iterates shrink to θ
        assert!(picard(&k, &seed, 500, 1e-10).unwrap().is_none());
        assert!(picard(&k, &seed.scaled(1000.0), 500, 1e-10).unwrap().is_none());
        assert!(picard(&k, &seed.scaled(0.0), 10, 1e-10).is_err());
        let neg = GridFunction::constant(201, -1.0).unwrap();
        assert!(picard(&k, &neg, 10, 1e-10).is_err());
    }

    #[test]
    fn projective_picard_lands_on_fixed_point() {
        let k = unit_ab();
        let op = DiscreteOperator::new(&k, 201).unwrap();
        let seed = GridFunction::constant(201, 0.5).unwrap();
        let lim = op.picard_projective(&seed, 500, 1e-10).unwrap().unwrap();
        let report = solve(&k, &SolveOptions::default()).unwrap();
        let f = &report.fixed_points[0];
        for (j, v) in lim.limit.values.iter().enumerate() {
            let t = lim.limit.t(j);
            assert_abs_diff_eq!(*v, f.x0 + f.y0 * t, epsilon = 1e-4);
        }
    }

    #[test]
    fn cross_check_worked_kernel() {
        let report = solve(&unit_ab(), &SolveOptions::default()).unwrap();
        let oracle = cross_check(&report, &OracleOptions::default()).unwrap();
        assert!(oracle.matches, "{oracle:?}");
        assert!(oracle.picard.iter().any(|p| p.projective && p.outcome.is_some()));
    }
}
