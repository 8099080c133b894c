use thiserror::Error;

/// Errors surfaced by the scattering, RH and evolution routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("potential does not decay at the grid ends: |q(±L)| = {max_end:.3e} exceeds {tol:.1e}")]
    NonDecayedPotential { max_end: f64, tol: f64 },
    #[error("Jost solution exceeded the overflow guard at x = {x:.3} (|psi| > {guard:.1e}); k is likely off the computable domain")]
    OverflowGuard { x: f64, guard: f64 },
    #[error("spectral singularity: min |a{which}| = {min_abs:.3e} on the real grid is below {floor:.1e}")]
    SpectralSingularity { which: u8, min_abs: f64, floor: f64 },
    #[error("zero of a{which} too close to the contour: min boundary |a| = {min_abs:.3e}")]
    BoundaryZero { which: u8, min_abs: f64 },
    #[error("Newton iteration for a zero of a{which} did not converge after {iters} steps (last |a| = {last:.3e})")]
    NewtonDivergence { which: u8, iters: usize, last: f64 },
    #[error("zero search found {found} zeros, argument principle predicts {expected}")]
    CountMismatch { found: usize, expected: usize },
    #[error("norming-constant ratio mismatch at zero {zero}: components differ by {diff:.3e}")]
    RatioInconsistent { zero: String, diff: f64 },
    #[error("zero at {zero} is not simple: |da/dk| = {adot_abs:.3e}")]
    ZeroNotSimple { zero: String, adot_abs: f64 },
    #[error("degenerate soliton amplitudes rho1 = -rho2 = {rho:.6}: blow-up times are undefined")]
    DegenerateAmplitudes { rho: f64 },
    #[error("soliton matrix assembly is singular: zeros k1[{s}] and k2[{m}] collide")]
    SingularAssembly { m: usize, s: usize },
    #[error("finite-difference stencil at (x,t) = ({x:.4}, {t:.4}) hits a flagged pole")]
    StencilHitsPole { x: f64, t: f64 },
    #[error("direct RH solve is ill-conditioned: estimated condition {cond:.3e}")]
    IllConditioned { cond: f64 },
    #[error("Neumann iteration not contractive: sup |r| = {sup_r:.4} >= 1")]
    NoContraction { sup_r: f64 },
    #[error("Cauchy-transform input does not decay at the grid ends: |f| = {max_end:.3e}")]
    NonDecayingInput { max_end: f64 },
    #[error("winding number of 1 + sigma r1 r2 is {winding}, integral representation diverges")]
    NonzeroWinding { winding: i32 },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("i/o failure: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
