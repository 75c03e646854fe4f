//! Library surface of the `hoplink` binary: argument types, command
//! implementations, the forgetting experiment, and summary statistics.
//! Split out so integration and acceptance tests can drive the same code
//! paths the binary does.

pub mod args;
pub mod commands;
pub mod experiment;
pub mod manifest;
pub mod stats;
