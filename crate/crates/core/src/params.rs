//! Central tolerances and default grid parameters.
//!
//! Every numeric threshold used by the library lives here so that runs are
//! reproducible and the manifest can echo the exact values in force.

/// Endpoint decay required of a potential at x = ±L.
pub const DECAY_TOL: f64 = 1e-10;

/// Tolerance on exact spectral identities (determinant relation, symmetry).
pub const SPEC_TOL: f64 = 1e-8;

/// Floor on |a_j| along the real axis below which the data is rejected as a
/// spectral singularity.
pub const SING_FLOOR: f64 = 1e-6;

/// Relative determinant floor used for pole flags in soliton evaluation.
pub const DET_FLOOR: f64 = 1e-12;

/// Relative discriminant floor |g1 h2 - g2 h1| / (|g||h|) for blow-up flags.
pub const DISC_FLOOR: f64 = 1e-10;

/// Convergence tolerance of the Neumann iteration for the singular equation.
pub const NEUMANN_TOL: f64 = 1e-10;

/// Maximum Neumann iterations before giving up.
pub const NEUMANN_MAX_ITER: usize = 200;

/// Residual allowed on FFT-based Cauchy projector identities.
pub const FFT_TOL: f64 = 1e-9;

/// Amplitude guard of the direct PDE integrator.
pub const BLOWUP_GUARD: f64 = 1e6;

/// Overflow guard on Jost marching.
pub const JOST_GUARD: f64 = 1e12;

/// Margin kept between a zero-counting contour and any zero.
pub const ARG_MARGIN: f64 = 0.05;

/// Step for the central-difference derivative of a_j inside Newton.
pub const NEWTON_DIFF_STEP: f64 = 1e-5;

/// Convergence threshold (|a_j|) of the Newton zero search.
pub const NEWTON_TOL: f64 = 1e-10;

/// Maximum Newton iterations.
pub const NEWTON_MAX_ITER: usize = 100;

/// Distance below which two located zeros are considered duplicates.
pub const ZERO_DEDUPE: f64 = 1e-6;

/// Zeros closer than this to the real axis are rejected.
pub const ZERO_AXIS_MIN: f64 = 1e-3;

/// Radius of the four-point circle stencil for da/dk at a zero.
pub const ADOT_RADIUS: f64 = 1e-4;

/// |da/dk| below this marks a zero as non-simple.
pub const SIMPLE_FLOOR: f64 = 1e-8;

/// Componentwise agreement required of the two norming-constant ratios.
pub const NORMING_AGREE: f64 = 1e-6;

/// Offset used when probing boundary values from k ± i*eps.
pub const BOUNDARY_EPS: f64 = 1e-4;

/// Relative truncation threshold of the double series in the near-soliton
/// condition constants.
pub const SERIES_TOL: f64 = 1e-12;

/// Half-width of points excluded around a flagged blow-up location when
/// comparing fields.
pub const EXCLUDE_RADIUS: f64 = 0.1;

/// Condition-number estimate above which the direct RH solve errors out.
pub const COND_LIMIT: f64 = 1e12;

/// Default half-width of the x grid.
pub const DEFAULT_LX: f64 = 30.0;

/// Default x spacing (2^-7).
pub const DEFAULT_HX: f64 = 0.0078125;

/// Default half-width of the k grid.
pub const DEFAULT_KMAX: f64 = 24.0;

/// Default number of k samples (2^12).
pub const DEFAULT_NK: usize = 4096;

/// Default time step cap of the split-step integrator.
pub const DEFAULT_DT: f64 = 1e-3;

/// Fraction of the k grid tapered by the raised-cosine window on each end.
pub const WINDOW_FRACTION: f64 = 0.05;

/// Zero-padding factor applied to reflection data before RH solves. The
/// half-line spectral split behind the Cauchy projectors carries an
/// O((pi/K_solve)^2) endpoint term; padding widens K_solve cheaply since
/// admissible reflection data has decayed by the table edge.
pub const SOLVER_PAD: usize = 6;
