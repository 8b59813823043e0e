//! Centralized verification tolerances.
//!
//! Every residual threshold used by the checks lives here, with its
//! rationale. The ladder is ordered by how many derivative levels and
//! floating-point compositions feed the quantity being tested: each
//! derivative taken through chart functions, and each 4x4 solve, costs
//! roughly one decimal digit of f64 headroom.

/// Identities that hold in exact arithmetic after a short composition
/// chain (algebra relations of constant matrices, multiplication-table
/// consequences, Lemma-style roundtrips on constructed bases).
pub const EXACT: f64 = 1e-12;

/// Pointwise algebraic relations evaluated through field pipelines:
/// endomorphism squares, anticommutators, metric compatibility,
/// projector ranks. One 4x4 solve of headroom over `EXACT`.
pub const ALGEBRAIC: f64 = 1e-10;

/// Quantities containing one derivative of chart functions: exterior
/// derivatives, structure equations, Lee forms, conformal-factor and
/// pullback comparisons.
pub const FIRST_DERIVATIVE: f64 = 1e-9;

/// Quantities containing two derivatives: Riemann, Ricci, Weyl blocks,
/// covariant-constancy residuals, Bianchi sums.
pub const CURVATURE: f64 = 1e-8;

/// Conformal invariance of the (1,3) Weyl tensor: curvature of a
/// rescaled metric divided by exponentially amplified entries, the
/// loosest exact identity we check.
pub const WEYL_CONFORMAL: f64 = 1e-7;

/// Relative agreement between jet-propagated derivatives and central
/// finite differences (step 1e-4, truncation error O(h^2) = 1e-8 against
/// curvature magnitudes of order 1).
pub const FD_RELATIVE: f64 = 1e-5;

/// Floor that falsifiers must exceed: a structure that genuinely fails a
/// theorem hypothesis must produce residuals at least this large, far
/// above every pass threshold.
pub const FALSIFIER_FLOOR: f64 = 1e-4;

/// Rank decisions in pivoted orthogonalization and degeneracy reports:
/// a pivot below this multiple of the largest entry counts as zero.
pub const RANK_PIVOT: f64 = 1e-10;
