//! File formats, batch pipeline and command-line front end for scoring how
//! well candidate satellite constellations sample storm statistics.

// Negated float comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod nrg;
pub mod pipeline;
pub mod report;
pub mod timefmt;

pub use eosample_core as core;
pub use error::CliError;
