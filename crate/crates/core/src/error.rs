use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("point {point:?} lies outside the domain closure (excess {excess:.3e})")]
    NotInDomain { point: [f64; 3], excess: f64 },

    #[error("ray crosses subdomain interfaces {found} times, partition allows at most {max}")]
    CrossingBoundExceeded { found: usize, max: usize },

    #[error("span {span} exceeds the backward chord length {chord}")]
    SpanExceedsChord { span: f64, chord: f64 },

    #[error("direction is not incoming at the boundary point (n . xi = {normal_dot:.3e})")]
    NotIncoming { normal_dot: f64 },

    #[error("direction is not outgoing at the boundary point (n . xi = {normal_dot:.3e})")]
    NotOutgoing { normal_dot: f64 },

    #[error("boundary source is continuous; it has no discontinuity set")]
    NoDiscontinuity,

    #[error("contraction constant M = {m} is not below 1; the Neumann series has no certified bound")]
    NotContractive { m: f64 },

    #[error("term {term} grew by ratio {ratio} above the contraction constant {bound}")]
    ContractionViolated { term: usize, ratio: f64, bound: f64 },

    #[error("certified tail bound needs {needed} terms but max_terms is {max}")]
    IterationBudget { needed: usize, max: usize },

    #[error("backtraced side test disagrees with the expected A/B assignment near {exit:?}")]
    SideMisclassification { exit: [f64; 3] },

    #[error("predicted jump {predicted:.3e} on line (theta={theta}, s={s}) is below measurable range")]
    DynamicRangeExhausted { theta: f64, s: f64, predicted: f64 },

    #[error("sinogram with {angles} angles x {offsets} offsets is too coarse (need >= 60 x 65)")]
    GridTooCoarse { angles: usize, offsets: usize },

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid medium: {0}")]
    InvalidMedium(String),

    #[error("invalid boundary source: {0}")]
    InvalidSource(String),

    #[error("invalid solver settings: {0}")]
    InvalidSolver(String),

    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("malformed artifact: {0}")]
    Format(String),
}

impl Error {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}
