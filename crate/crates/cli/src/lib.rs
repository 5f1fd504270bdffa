//! Commands behind the `sset` binary.

pub mod commands;
pub mod echo;
pub mod oracle_spec;
pub mod render;
