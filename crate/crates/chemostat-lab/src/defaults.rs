//! Centralized numeric defaults. Every CLI artifact echoes the values it
//! actually used, so regression diffs stay self-describing.

/// Quadrature and candidate grid resolution per period. Smooth periodic
/// integrands converge fast; 512 keeps full-period scans O(microseconds).
pub const GRID_POINTS: usize = 512;

/// Simulation steps per forcing period before delay refinement.
pub const STEPS_PER_PERIOD: usize = 2048;

/// Fixed-point residual target for the periodic solver.
pub const SOLVER_TOL: f64 = 1e-8;

/// Margins inside this band around zero are reported as inconclusive: a
/// strict inequality cannot be certified closer to equality than roundoff.
pub const EQUALITY_BAND: f64 = 1e-12;

/// Samples per period when checking positivity of the forcing functions.
pub const VALIDATION_SAMPLES: usize = 4096;

/// Samples when checking monotonicity of a response function.
pub const MONOTONE_SAMPLES: usize = 1024;

/// Negative overshoots smaller than this are rounding noise: clamped to zero
/// and counted. Anything larger indicates an integrator bug.
pub const NEGATIVE_CLAMP: f64 = 1e-12;

/// A converged candidate with sup norm below `TRIVIAL_REL_THRESHOLD * max S_0`
/// is classified as the washout (zero) solution.
pub const TRIVIAL_REL_THRESHOLD: f64 = 1e-8;

/// Default damping for the fixed-point iteration.
pub const DAMPING: f64 = 0.5;

/// Depth of the residual-mixing acceleration (number of previous iterates).
pub const ANDERSON_DEPTH: usize = 3;

/// Iteration budget for one fixed-point start.
pub const MAX_ITERS: usize = 2000;

/// Scan resolution for locating the persistence root m0 before bisection.
pub const ROOT_SCAN_SAMPLES: usize = 4096;

/// Bisection tolerance for the persistence root m0.
pub const ROOT_TOL: f64 = 1e-12;
