//! Saturation-based unification for first-order and higher-order rational
//! pattern terms.

pub mod cli;
pub mod expansion;
pub mod fixtures;
pub mod flatten;
pub mod mgu_extract;
pub mod oracle_kit;
pub mod saturation;
pub mod surface;
pub mod term_core;
