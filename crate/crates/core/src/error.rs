use alloc::string::String;
use alloc::vec::Vec;

use crate::ppxa::ParamViolation;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("non-finite input to {0}")]
    NonFinite(&'static str),
    #[error("unsupported exponent p = {0}; supported exponents are 1, 4/3, 3/2, 2 and 3")]
    UnsupportedExponent(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("size constraint violated: {0}")]
    SizeConstraint(String),
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("invalid solver parameters: {}", format_violations(.0))]
    InvalidParams(Vec<ParamViolation>),
    #[error("frame is not tight (residual {0:e})")]
    NotTight(f64),
    #[error("brute-force oracle failed: {0}")]
    Oracle(&'static str),
    #[error("iterate became non-finite at iteration {0}")]
    NonFiniteIterate(usize),
}

fn format_violations(v: &[ParamViolation]) -> String {
    use core::fmt::Write;
    let mut s = String::new();
    for (i, p) in v.iter().enumerate() {
        if i > 0 {
            s.push_str("; ");
        }
        let _ = write!(s, "{p}");
    }
    s
}
