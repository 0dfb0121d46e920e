//! Numerical tolerances shared across modules.

/// Algebraic identities on 4x4 matrices (decomposition round trips, traces).
pub const ALGEBRAIC: f64 = 1e-12;

/// Physical checks (CHSH ranges, bound comparisons).
pub const PHYSICAL: f64 = 1e-9;

/// Acceptance tolerance when validating user-supplied matrices and vectors.
pub const INPUT: f64 = 1e-9;

/// Smallest eigenvalue accepted for a density matrix. Eigenvalues in
/// `[-PSD, 0)` are treated as zero.
pub const PSD: f64 = 1e-10;

/// Agreement between the two SDP certificates and the closed form.
pub const CERTIFICATE: f64 = 1e-10;

/// Agreement between the numeric max-entropy search and the closed form.
pub const ENTROPY_ORACLE: f64 = 1e-6;

/// Width of the final bracket in the inner golden-section search over `c_z`.
pub const GOLDEN_SECTION: f64 = 1e-12;

/// Bisection width when inverting the quantum bound.
pub const BISECTION: f64 = 1e-12;

/// Slack allowed above `2*sqrt(2)` before a CHSH value is called non-quantum.
pub const TSIRELSON_SLACK: f64 = 1e-12;

/// Primal feasibility and bound violations accepted in an optimal LP solution.
pub const LP_FEASIBILITY: f64 = 1e-9;
