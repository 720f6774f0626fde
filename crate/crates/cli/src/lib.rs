//! Zero cache, subcommands and output formatting behind the `dirichlet` binary.

pub mod cache;
pub mod commands;
pub mod output;

pub use cache::{CacheError, Envelope, ZeroCache};
pub use output::{write_rows, Format};
