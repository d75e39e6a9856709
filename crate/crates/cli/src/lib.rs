//! Experiment drivers behind the `randqls` command-line tool.

pub mod experiments;
pub mod manifest;
pub mod matrix;
pub mod series;
pub mod solve;
