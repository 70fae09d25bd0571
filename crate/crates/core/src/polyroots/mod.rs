//! The characteristic polynomial and its positive roots.
//!
//! For a coefficient set of degree `k` the polynomial is
//!
//! ```text
//! P(ξ) = a[k] ξ^{k+1} + Σ_{i=0}^{k-1} (a[k-1-i] - b[k-i]) ξ^{k-i} - b[0]
//! ```
//!
//! A positive root `ξ` is the ratio `y / x` of a positive fixed point of the
//! planar map. Counting is done with Sturm chains in exact integer
//! arithmetic, so root counts are certified for the float coefficients as
//! given.

mod exact;

use std::cmp::Ordering;

use thiserror::Error;

use crate::quad::CoefficientSet;
use exact::{Certified, IntPoly};

pub const DEFAULT_ROOT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolyError {
    #[error("polynomial is identically zero")]
    ZeroPolynomial,
    #[error("coefficient {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },
    #[error("invalid interval ({lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("distinct roots in ({lo}, {hi}] cannot be separated in double precision")]
    Unresolvable { lo: f64, hi: f64 },
}

/// Real polynomial, coefficients in descending degree.
#[derive(Debug, Clone, PartialEq)]
pub struct PolySpec {
    pub coeffs: Vec<f64>,
}

impl PolySpec {
    /// Leading zeros are dropped.
    pub fn new(coeffs: Vec<f64>) -> Result<Self, PolyError> {
        if let Some((index, &value)) = coeffs.iter().enumerate().find(|(_, c)| !c.is_finite()) {
            return Err(PolyError::NonFinite { index, value });
        }
        let first = coeffs
            .iter()
            .position(|&c| c != 0.0)
            .ok_or(PolyError::ZeroPolynomial)?;
        Ok(PolySpec {
            coeffs: coeffs[first..].to_vec(),
        })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Horner evaluation in floating point.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_derivative(&self, x: f64) -> f64 {
        let n = self.degree();
        self.coeffs[..n]
            .iter()
            .enumerate()
            .fold(0.0, |acc, (j, &c)| acc * x + c * (n - j) as f64)
    }

    /// `max |cᵢ|`.
    pub fn scale(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Exact sign of `P(x)` for the coefficients as stored.
    pub fn sign_at(&self, x: f64) -> Ordering {
        self.exact().sign_at(x)
    }

    fn exact(&self) -> IntPoly {
        let asc: Vec<f64> = self.coeffs.iter().rev().copied().collect();
        IntPoly::from_f64_ascending(&asc)
    }
}

/// A distinct positive root with its isolating enclosure.
#[derive(Debug, Clone, PartialEq)]
pub struct PositiveRoot {
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
    /// `|P(value)|` in floating point.
    pub poly_residual: f64,
    /// Exact signs of `P` differ at `lo` and `hi`, or the enclosure holds
    /// exactly one distinct root by a Sturm count.
    pub sign_confirmed: bool,
    pub multiplicity: usize,
}

/// Builds `P_{k+1}` from `c`. Middle coefficients with magnitude at or below
/// `10·quadrature_tol` are set to zero.
pub fn build_polynomial(c: &CoefficientSet) -> PolySpec {
    let k = c.k;
    let eps = c.zero_threshold();
    let mut coeffs = Vec::with_capacity(k + 2);
    coeffs.push(c.a[k]);
    for i in 0..k {
        let v = c.a[k - 1 - i] - c.b[k - i];
        coeffs.push(if v.abs() <= eps { 0.0 } else { v });
    }
    coeffs.push(-c.b[0]);
    PolySpec { coeffs }
}

/// Sign changes in the nonzero coefficient sequence.
pub fn descartes_positive_bound(p: &PolySpec) -> usize {
    let signs: Vec<bool> = p
        .coeffs
        .iter()
        .filter(|&&c| c != 0.0)
        .map(|&c| c > 0.0)
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Cauchy bound `1 + max |cᵢ / c₀|`; every real root lies in `(-B, B)`.
pub fn root_upper_bound(p: &PolySpec) -> f64 {
    let lead = p.coeffs[0].abs();
    1.0 + p.coeffs[1..]
        .iter()
        .fold(0.0f64, |m, c| m.max(c.abs() / lead))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SturmCount {
    pub count: usize,
    /// Endpoints actually used. They differ from the requested ones only when
    /// a requested endpoint was itself a root and had to be nudged.
    pub lo: f64,
    pub hi: f64,
    pub nudged: bool,
}

/// Number of distinct real roots of `p` in `(lo, hi]`.
///
/// Endpoints that are exact roots are moved to the next representable
/// double upward, which keeps the half-open convention, and `nudged` is set.
pub fn sturm_count(p: &PolySpec, lo: f64, hi: f64) -> Result<SturmCount, PolyError> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(PolyError::InvalidInterval { lo, hi });
    }
    let ip = p.exact();
    let nudge = |mut x: f64| {
        let mut moved = false;
        while ip.sign_at(x) == Ordering::Equal {
            x = x.next_up();
            moved = true;
        }
        (x, moved)
    };
    let (lo2, m1) = nudge(lo);
    let (hi2, m2) = nudge(hi);
    let cert = Certified::new(ip.clone());
    Ok(SturmCount {
        count: cert.chain.count(lo2, hi2),
        lo: lo2,
        hi: hi2,
        nudged: m1 || m2,
    })
}

/// All distinct roots in `(0, B]`, ascending, each refined to width `tol`
/// (relative above 1).
pub fn isolate_and_refine(p: &PolySpec, tol: f64) -> Result<Vec<PositiveRoot>, PolyError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(PolyError::InvalidTolerance(tol));
    }
    if p.degree() == 0 {
        return Ok(Vec::new());
    }
    let cert = Certified::new(p.exact());
    let bound = root_upper_bound(p);
    let total = cert.chain.count(0.0, bound);

    // depth-first, upper half pushed first so output comes out ascending
    let mut stack = vec![(0.0, bound, total)];
    let mut isolated = Vec::with_capacity(total);
    while let Some((lo, hi, n)) = stack.pop() {
        match n {
            0 => {}
            1 => isolated.push((lo, hi)),
            _ => {
                let mid = lo + 0.5 * (hi - lo);
                if mid <= lo || mid >= hi {
                    return Err(PolyError::Unresolvable { lo, hi });
                }
                let left = cert.chain.count(lo, mid);
                stack.push((mid, hi, n - left));
                stack.push((lo, mid, left));
            }
        }
    }

    Ok(isolated
        .into_iter()
        .map(|(lo, hi)| refine(p, &cert, lo, hi, tol))
        .collect())
}

fn refine(p: &PolySpec, cert: &Certified, mut lo: f64, mut hi: f64, tol: f64) -> PositiveRoot {
    let multiplicity = cert.multiplicity(lo, hi);
    let q = &cert.squarefree;
    let mut exact_hit = None;
    if q.sign_at(hi) == Ordering::Equal {
        exact_hit = Some(hi);
    }
    while exact_hit.is_none() && hi - lo > tol * hi.abs().max(1.0) {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        let s_mid = q.sign_at(mid);
        if s_mid == Ordering::Equal {
            exact_hit = Some(mid);
            break;
        }
        let s_lo = q.sign_at(lo);
        let root_in_left = if s_lo != Ordering::Equal {
            s_lo != s_mid
        } else {
            cert.chain.count(lo, mid) == 1
        };
        if root_in_left {
            hi = mid;
        } else {
            lo = mid;
        }
    }

    let value = match exact_hit {
        Some(x) => {
            lo = x;
            hi = x;
            x
        }
        None => polish(p, lo, hi),
    };
    let s_lo = cert.poly.sign_at(lo);
    let s_hi = cert.poly.sign_at(hi);
    let straddles = s_lo != Ordering::Equal && s_hi != Ordering::Equal && s_lo != s_hi;
    PositiveRoot {
        value,
        lo,
        hi,
        poly_residual: p.eval(value).abs(),
        // the enclosure came out of Sturm isolation, so it is certified either way
        sign_confirmed: straddles || cert.chain.count(lo.min(hi.next_down()), hi) == 1,
        multiplicity,
    }
}

/// One guarded Newton step from the midpoint; kept only if it stays inside
/// the enclosure and does not increase `|P|`.
fn polish(p: &PolySpec, lo: f64, hi: f64) -> f64 {
    let mid = lo + 0.5 * (hi - lo);
    let f = p.eval(mid);
    let df = p.eval_derivative(mid);
    if df == 0.0 || !df.is_finite() {
        return mid;
    }
    let next = mid - f / df;
    if next >= lo && next <= hi && p.eval(next).abs() <= f.abs() {
        next
    } else {
        mid
    }
}
