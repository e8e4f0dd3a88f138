use thiserror::Error;

/// Errors across the crate. Validation failures of a map description are
/// reported through `ValidationReport`; these variants are for conditions
/// that prevent an operation from producing a result at all.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid map description: {0}")]
    InvalidMap(String),

    #[error("map is not expanding: {0}")]
    NotExpanding(String),

    #[error("no mixing horizon R <= {0} (transition structure not irreducible within the search bound)")]
    NoMixingHorizon(usize),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("structural error: {0}")]
    Structural(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("precision floor reached: {0}")]
    Precision(String),

    #[error("explicit itinerary exhausted at symbol {0}")]
    StreamExhausted(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
