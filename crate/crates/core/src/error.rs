//! Error taxonomy shared by every module.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// Text could not be tokenized or parsed. `offset` is a byte offset
    /// into the source; unclosed delimiters report the opening byte.
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    /// An identifier is neither a declared chart variable nor a known
    /// function name.
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { offset: usize, name: String },

    /// A function was called with the wrong number of arguments.
    #[error("`{function}` takes {expected} argument(s), got {got} (byte {offset})")]
    Arity {
        offset: usize,
        function: String,
        expected: usize,
        got: usize,
    },

    /// `^` requires an integer exponent.
    #[error("non-integer exponent at byte {offset}")]
    NonIntegerExponent { offset: usize },

    /// Evaluation left the domain of a function (`ln`/`sqrt` of a
    /// non-positive value, division by zero, `0^negative`).
    #[error("domain error: {op}({value}) in `{expr}`")]
    Domain {
        op: &'static str,
        expr: String,
        value: f64,
    },

    /// A matrix that must be invertible failed pivoting.
    #[error("singular matrix in {what}")]
    Singular { what: String },

    /// A form or operator required to be nondegenerate was not.
    #[error("degenerate input: {what}")]
    Degenerate { what: String },

    /// A probe or frame vector was isotropic where a definite length is
    /// required.
    #[error("isotropic vector: {what}")]
    Isotropic { what: String },

    /// Inputs failed a compatibility precondition (metric vs triple,
    /// conformality cross-check, algebra relations).
    #[error("compatibility failure: {message}")]
    Incompatible { message: String },

    /// Structure-equation or Lee-form consistency failed beyond
    /// tolerance: the input is not para-hyperhermitian.
    #[error("not para-hyperhermitian: {message}")]
    NotParaHyperhermitian { message: String },

    /// Construction parameters violate a documented precondition.
    #[error("invalid parameters: {message}")]
    InvalidParams { message: String },

    /// A derivative was requested past the jet depth a closure-backed
    /// field carries.
    #[error("jet order exhausted: need {needed}, have {available}")]
    JetOrder { needed: u8, available: u8 },

    /// Wedge product would exceed the top degree of the chart.
    #[error("degree overflow: {left} + {right} > 4")]
    DegreeOverflow { left: u8, right: u8 },
}
