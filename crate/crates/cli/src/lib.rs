//! Command-line front end and game service for the `fo2` library.

pub mod commands;
pub mod failure;
pub mod play;
pub mod service;
