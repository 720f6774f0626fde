//! Zeros of primitive Dirichlet L-functions and the statistics built on them: character-sum
//! identities, explicit-formula checks, q-analogue pair correlation, Euler-product constants
//! and the simple-zero proportion machinery.

// `!(x > y)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod arith;
pub mod characters;
pub mod constants;
pub mod error;
pub mod lfun;
pub mod quad;
pub mod simplezeros;
pub mod special;
pub mod stats;
pub mod testfn;

pub use arith::{build_tables, ArithmeticTables};
pub use characters::{character_group, CharacterGroup, CharacterId, DirichletCharacter};
pub use constants::{ozluk_constant, EulerProductValue, OzlukConstant, ProductSpec};
pub use error::{Error, Result};
pub use lfun::{
    find_zeros, lfunction_data, scan_family, LFunctionData, ZeroFamily, ZeroRecord, ZeroScan,
};
pub use simplezeros::{KernelSpec, PairingIdentity, SimpleZeroBound};
pub use stats::{ExplicitFormula, PairCorrConfig, StatKind, StatResult};
pub use testfn::{SmoothWeight, TestFunction};
