//! Command-line front end for `udw-harvest`: configuration files, figure
//! presets, CSV tables and reproducibility manifests.
//!
//! Every table is written next to a manifest, `<stem>.manifest.toml`, that
//! holds the fully resolved configuration. Feeding the manifest back as the
//! configuration reproduces the table byte for byte, whatever the number of
//! worker threads.

pub mod config;
pub mod output;
pub mod presets;
pub mod run;

pub use config::{Config, ConfigError};
pub use run::{Completion, RunOptions};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/command-line.md")]
mod book {}
