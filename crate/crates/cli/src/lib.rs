//! Command-line front end for `volspill-core`: loads a price panel, runs the
//! selected analyses and writes CSV tables, SVG plots and a manifest.

pub mod config;
pub mod format;
pub mod run;
pub mod svg;

pub use config::{from_args, Analysis, Options, RunConfig};
pub use run::run;
