use thiserror::Error;

/// Errors raised by the numerical and arithmetic routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{what} = {value} exceeds the supported limit {limit}")]
    OutOfRange {
        what: &'static str,
        value: f64,
        limit: f64,
    },

    #[error("pole at s = {re} + {im}i")]
    Pole { re: f64, im: f64 },

    #[error("arguments are not coprime: gcd({a}, {b}) = {gcd}")]
    NotCoprime { a: u64, b: u64, gcd: u64 },

    #[error("character {index} mod {modulus} is not primitive (conductor {conductor})")]
    NotPrimitive {
        modulus: u64,
        index: usize,
        conductor: u64,
    },

    #[error("{what}: {lhs} and {rhs} differ by more than {tol}")]
    Inconsistent {
        what: &'static str,
        lhs: f64,
        rhs: f64,
        tol: f64,
    },

    #[error("zero list for character {index} mod {modulus} is incomplete up to height {height}")]
    IncompleteZeros {
        modulus: u64,
        index: usize,
        height: f64,
    },

    #[error("quadrature did not converge on [{a}, {b}]: estimated error {error:e}")]
    Quadrature { a: f64, b: f64, error: f64 },

    #[error("factor vanishes in finite Euler product at p = {prime}")]
    VanishingFactor { prime: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
