//! File formats and command implementations behind the `wavelift` binary.

pub mod commands;
pub mod pgm;
pub mod subband;
