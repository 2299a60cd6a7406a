use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The requested constellation cannot be built.
    #[error("invalid constellation: {0}")]
    Constellation(String),

    /// A bit stream does not split into whole symbols.
    #[error("framing error: {len} bits is not a multiple of {bits_per_symbol} bits per symbol")]
    Framing { len: usize, bits_per_symbol: u32 },

    /// A bit value other than 0 or 1 was supplied.
    #[error("invalid bit value {value} at position {position}")]
    InvalidBit { position: usize, value: u8 },

    /// A symbol index outside `[0, M)`.
    #[error("symbol index {index} out of range for M = {m}")]
    SymbolOutOfRange { index: usize, m: usize },

    /// A channel, noise or stopping-rule parameter is out of its domain.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Every branch gain is exactly zero, so no decision statistic exists.
    #[error("degenerate channel: all diversity branch gains are zero")]
    DegenerateChannel,

    /// An error-rate estimate over zero trials.
    #[error("undefined estimate: no trials")]
    UndefinedEstimate,

    /// The modulation has no semi-analytic reference.
    #[error("unsupported modulation for semi-analytic reference: {0}")]
    UnsupportedModulation(String),

    /// A sweep grid is malformed; `cell` identifies the offending cell when known.
    #[error("configuration error{}: {message}", cell.as_ref().map(|c| format!(" in cell {c}")).unwrap_or_default())]
    Configuration {
        cell: Option<String>,
        message: String,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
