use thiserror::Error;

/// Errors raised by the fractube pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("scaling ratio {0} is outside the open interval (0, 1)")]
    RatioOutOfRange(f64),
    #[error("a self-similar system needs at least two maps, got {0}")]
    TooFewMaps(usize),
    #[error("trivial attractor: sum of r_n^d = {moran_at_d} >= 1 in dimension {ambient_dim}")]
    TrivialAttractor { moran_at_d: f64, ambient_dim: usize },
    #[error("lattice classification is unstable (integer-relation residual {residual:e}); declare the lattice explicitly")]
    AmbiguousLattice { residual: f64 },
    #[error("declared lattice does not reproduce the ratios: {0}")]
    InvalidLattice(String),
    #[error("s = {re} + {im}i lies within the pole guard of the scaling zeta function")]
    NearPole { re: f64, im: f64 },
    #[error(
        "{re} + {im}i is not a pole of the scaling zeta function (|1 - sum r_n^s| = {residual:e})"
    )]
    NotAPole { re: f64, im: f64, residual: f64 },
    #[error("non-simple pole near {re} + {im}i (|f'| = {derivative:e})")]
    NonSimplePole { re: f64, im: f64, derivative: f64 },
    #[error("winding number did not settle to an integer: {0}")]
    WindingMismatch(String),
    #[error("cutoff {cutoff} would enumerate more than {budget} lengths")]
    CutoffTooSmall { cutoff: f64, budget: u64 },
    #[error("inner parallel volume is not positive on (0, g]: V({eps}) = {value}")]
    NonPositiveVolume { eps: f64, value: f64 },
    #[error("inner parallel volume decreases near eps = {eps} (V' = {slope})")]
    NonMonotone { eps: f64, slope: f64 },
    #[error("s = {re} + {im}i is too close to the integer pole {k} of Gamma_s(G)")]
    IntegerPole { re: f64, im: f64, k: usize },
    #[error("complex dimension {re} + {im}i collides with the integer dimension {k}")]
    IntegerCollision { re: f64, im: f64, k: usize },
    #[error("eps = {eps} is outside (0, g] with g = {inradius}")]
    EpsOutOfRange { eps: f64, inradius: f64 },
    #[error("operation requires a lattice system")]
    NotLattice,
    #[error("hypothesis d-1 < D violated: D = {dimension}, d = {ambient_dim}")]
    HypothesisViolation { dimension: f64, ambient_dim: usize },
    #[error(
        "compatibility condition (boundary of O inside F) not declared; fractal content refused"
    )]
    CompatibilityNotDeclared,
    #[error("word-tree frontier exceeded the node budget of {budget}")]
    BudgetExceeded { budget: u64 },
    #[error("invalid planar geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
