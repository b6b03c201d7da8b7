use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid subinterval [{a}, {b}]: need 0 <= a < b <= 1")]
    InvalidInterval { a: f64, b: f64 },

    #[error("panel count {0} is too small (need at least 2)")]
    TooFewPanels(usize),

    #[error("unsupported Gauss-Legendre order {0}")]
    UnsupportedOrder(usize),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("functions live on different grids")]
    GridMismatch,

    #[error("cone block [{cone_a}, {cone_b}] does not match the grid's marked block [{grid_a}, {grid_b}]")]
    ConeGridMismatch {
        cone_a: f64,
        cone_b: f64,
        grid_a: f64,
        grid_b: f64,
    },

    #[error("kernel entry ({i}, {j}) is negative: {value}")]
    NegativeKernel { i: usize, j: usize, value: f64 },

    #[error("kernel violates its envelope at ({i}, {j}): {detail}")]
    EnvelopeViolation { i: usize, j: usize, detail: String },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("function vanishes identically on the grid")]
    ZeroFunction,

    #[error("scaling parameter must be positive, got {0}")]
    NonPositiveSigma(f64),

    #[error("no sign change of the scaling profile on [{lo:e}, {hi:e}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("sup-norm of v ({norm}) exceeds the extended radius {rtilde}")]
    OutsideExtendedBall { norm: f64, rtilde: f64 },

    #[error("extended radius {rtilde} is below the required bound {required}")]
    ExtendedRadiusTooSmall { rtilde: f64, required: f64 },

    #[error("oracle grid has {0} nodes (at most 5 supported)")]
    OracleGridTooLarge(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
