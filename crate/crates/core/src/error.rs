use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degree mismatch: {left} vs {right}")]
    DegreeMismatch { left: usize, right: usize },

    #[error("{what} = {value} is outside its domain ({domain})")]
    OutOfDomain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("not a self-map of the disk: sup |phi| = {sup} on the validation grid")]
    NotSelfMap { sup: f64 },

    #[error("the zero symbol does not define a useful composition operator")]
    ZeroSymbol,

    #[error(
        "contour too close: w = {w} lies {distance:.3e} from the contour image; \
         try a contour radius of about {suggested_radius}"
    )]
    ContourTooClose {
        w: Complex64,
        distance: f64,
        suggested_radius: f64,
    },

    #[error("winding integral {raw} did not snap to an integer after {nodes} contour nodes")]
    QuadratureFailure { raw: Complex64, nodes: usize },

    #[error("{excluded} of {total} grid nodes could not be counted (limit {limit:.0}%)")]
    TooManyExcluded {
        excluded: usize,
        total: usize,
        limit: f64,
    },

    #[error("power iteration did not converge in {iterations} iterations (last estimate {last})")]
    NonConvergence { last: f64, iterations: usize },

    #[error("kernel at |w| = {modulus} needs truncation {needed}, above the limit {limit}")]
    KernelTruncation {
        modulus: f64,
        needed: usize,
        limit: usize,
    },

    #[error("cannot parse `{token}`: {reason}")]
    Parse { token: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(token: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Parse {
            token: token.into(),
            reason: reason.into(),
        }
    }
}
