//! File formats and command logic behind the `fads` binary.

pub mod commands;
pub mod format;
