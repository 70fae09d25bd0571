//! Positive fixed points of Hammerstein integral operators
//!
//! ```text
//! (H_k f)(t) = ∫₀¹ (φ₁(t)ψ₁(u) + φ₂(t)ψ₂(u)) f(u)^k du
//! ```
//!
//! on the cone of nonnegative continuous functions on `[0, 1]`.
//!
//! A rank-2 kernel confines every fixed point to `f = x·φ₁ + y·φ₂`, so the
//! problem collapses to the positive fixed points of a homogeneous planar map
//! and, through the ratio `ξ = y / x`, to the positive roots of a single
//! polynomial of degree `k + 1`. The crate walks that reduction end to end:
//!
//! - [`expr`]: the kernel factors as parsed one-variable expressions.
//! - [`quad`]: adaptive Gauss–Kronrod quadrature and the coefficient vectors.
//! - [`polyroots`]: the characteristic polynomial, Descartes bound, and
//!   exact-arithmetic Sturm isolation of its positive roots.
//! - [`solver`]: reconstruction of fixed points, residual checks and
//!   classification by coefficient sign patterns.
//! - [`oracle`]: independent cross-checks (Newton scan of the planar map,
//!   discretized operator, Picard probes).
//! - [`gibbs`]: the closed-form `a + b·t·u` Cayley-tree model.

pub mod expr;
pub mod gibbs;
pub mod oracle;
pub mod polyroots;
pub mod quad;
pub mod solver;

pub use expr::{Expression, ExprError};
pub use quad::{CoefficientSet, KernelSpec};
pub use solver::{solve, SolveOptions, SolveReport};
