//! Shared fixtures for the benchmarks.

use dirichlet_core::lfun::{lfunction_data, LFunctionData};
use dirichlet_core::character_group;

/// L-function data for every primitive character mod q.
pub fn primitive_data(q: u64) -> Vec<LFunctionData> {
    character_group(q)
        .expect("valid modulus")
        .primitive()
        .map(|c| lfunction_data(c).expect("primitive"))
        .collect()
}
