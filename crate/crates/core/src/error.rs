use thiserror::Error;

/// Errors raised by pricing, expansion and inversion routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid quote: {0}")]
    InvalidQuote(String),

    #[error("price {price} outside the no-arbitrage band ({lower}, {upper})")]
    OutsideBand { price: f64, lower: f64, upper: f64 },

    #[error("ratio {0} outside no-arbitrage open band (0, 1)")]
    RatioOutsideBand(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("outside asymptotic regime: lambda = {lambda} (must lie in (0, 1))")]
    OutsideRegime { lambda: f64 },

    #[error("strike equals spot; use the at-the-money path")]
    RouteToAtm,

    #[error("strike differs from spot; use a wing expansion")]
    RouteToWings,

    #[error("series not invertible at this grading: {0}")]
    NotInvertible(String),

    #[error("truncation orders differ: {0} vs {1}")]
    OrderMismatch(u32, u32),

    #[error("no convergence after {iterations} iterations (last iterate {last})")]
    NonConvergence { iterations: usize, last: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Whether the error reflects the market data rather than the caller's usage.
    pub fn is_domain(&self) -> bool {
        !matches!(self, Error::InvalidArgument(_) | Error::OrderMismatch(..))
    }
}
