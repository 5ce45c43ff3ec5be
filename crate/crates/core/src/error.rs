use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown symbol `{0}` for this alphabet")]
    Alphabet(String),
    #[error("word reduces to the trivial class")]
    TrivialClass,
    #[error("invalid surface signature (g={genus}, n={punctures}): {reason}")]
    Signature {
        genus: u32,
        punctures: u32,
        reason: &'static str,
    },
    #[error("signature (g={genus}, n={punctures}) carries no filling curve systems")]
    NoFillingSystems { genus: u32, punctures: u32 },
    #[error("unsupported signature (g={genus}, n={punctures}) for {what}")]
    Unsupported {
        genus: u32,
        punctures: u32,
        what: &'static str,
    },
    #[error("invalid curve system: {0}")]
    CurveSystem(String),
    #[error("peripheral curve `{0}` is not allowed in a curve system")]
    Peripheral(String),
    #[error("presentation mismatch: {0}")]
    Mismatch(String),
    #[error("degenerate pants gluing: {0}")]
    Structure(String),
    #[error("holonomy construction failed: {0}")]
    ConstructionFailed(String),
    #[error("word `{word}` is not hyperbolic (|trace| = {trace})")]
    NotHyperbolic { word: String, trace: f64 },
    #[error("crossing test ambiguous at tolerance: {0}")]
    NeedsExact(String),
    #[error("invalid Dehn-Thurston coordinates: {0}")]
    Coordinates(String),
    #[error("functional is not positive: {0}")]
    NotPositive(String),
    #[error("curve system is not filling")]
    NotFilling,
    #[error("enumeration box saturated at bound {0}")]
    BoxSaturated(i64),
    #[error("exponent fit refused: {0}")]
    FitRefused(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("csv: {0}")]
    Csv(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
