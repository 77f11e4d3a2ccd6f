use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("non-positive street width {street:.3} m (alpha too high for beta)")]
    NonPositiveStreet { street: f64 },

    #[error("footprint cannot fit grid cell of pitch {pitch:.3} m")]
    CellOverflow { pitch: f64 },

    #[error("could not place building {index} (area {area:.1} m^2) after retry budget")]
    PlacementExhausted { index: usize, area: f64 },

    #[error("highway area {highway_area:.1} m^2 leaves no room (limit {limit:.1} m^2)")]
    HighwayTooLarge { highway_area: f64, limit: f64 },

    #[error("invalid highway: {0}")]
    InvalidHighway(String),

    #[error("degenerate link: ABS height {abs_z} m must exceed GU height {gu_z} m")]
    DegenerateLink { abs_z: f64, gu_z: f64 },

    #[error("link endpoint inside building {0}")]
    EndpointInsideBuilding(usize),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("no builtin parameters for {0}")]
    UnknownCombination(String),

    #[error("insufficient bins for fitting: {0}")]
    InsufficientBins(String),

    #[error("optimizer did not converge after {iters} iterations")]
    NonConvergence { iters: usize },

    #[error("height {0} m outside model range")]
    HeightOutOfRange(f64),

    #[error("insufficient log-distance spread: {spread:.3} decades")]
    InsufficientSpread { spread: f64 },

    #[error("too few samples: {got} < {need}")]
    TooFewSamples { got: usize, need: usize },

    #[error("{what}: {got} usable heights, need {need}")]
    TooFewHeights { what: String, got: usize, need: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("curve grids do not match")]
    GridMismatch,

    #[error("dataset has no path loss column")]
    MissingPathloss,

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable identifier used by the CLI's one-line diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParams(_) => "InvalidParams",
            Error::NonPositiveStreet { .. } => "NonPositiveStreet",
            Error::CellOverflow { .. } => "CellOverflow",
            Error::PlacementExhausted { .. } => "PlacementExhausted",
            Error::HighwayTooLarge { .. } => "HighwayTooLarge",
            Error::InvalidHighway(_) => "InvalidHighway",
            Error::DegenerateLink { .. } => "DegenerateLink",
            Error::EndpointInsideBuilding(_) => "EndpointInsideBuilding",
            Error::EmptyDataset => "EmptyDataset",
            Error::UnknownCombination(_) => "UnknownCombination",
            Error::InsufficientBins(_) => "InsufficientBins",
            Error::NonConvergence { .. } => "NonConvergence",
            Error::HeightOutOfRange(_) => "HeightOutOfRange",
            Error::InsufficientSpread { .. } => "InsufficientSpread",
            Error::TooFewSamples { .. } => "TooFewSamples",
            Error::TooFewHeights { .. } => "TooFewHeights",
            Error::EmptyInput => "EmptyInput",
            Error::GridMismatch => "GridMismatch",
            Error::MissingPathloss => "MissingPathloss",
            Error::Malformed(_) => "Malformed",
            Error::Io(_) => "Io",
            Error::Csv(_) => "Csv",
            Error::Json(_) => "Json",
        }
    }

    /// True for failures of the filesystem or of a file's encoding, as
    /// opposed to rejected parameters or data.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_) | Error::Csv(_) | Error::Json(_))
    }
}
