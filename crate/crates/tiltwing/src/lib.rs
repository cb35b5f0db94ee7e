//! File formats, parallel trim-map builds, reports and the CLI around
//! `tiltwing-core`.

pub mod build;
pub mod check;
pub mod config;
pub mod log_io;
pub mod report;
pub mod scenario;
pub mod trim_io;
