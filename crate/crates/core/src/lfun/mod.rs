//! Dirichlet L-functions: Hurwitz zeta, L-values, functional-equation data and zeros.

mod family;
mod hurwitz;
mod lfunction;
mod zeros;

pub use family::{family_moduli, scan_family, CharacterZeros, ModulusZeros, ZeroFamily};
pub use hurwitz::{hurwitz_zeta, zeta, LineEvaluator, MAX_HEIGHT};
pub use lfunction::{
    completed, dirichlet_l, gauss_sum, hardy_z, lfunction_data, rotate, theta_base, LFunctionData,
    ROTATION_TOLERANCE,
};
pub use zeros::{
    find_zeros, scan_modulus, zero_count_main_term, zero_count_slack, ModulusGrid, ZeroRecord,
    ZeroScan, BRACKET, MAX_GRID_STEP, MAX_REFINEMENTS,
};
