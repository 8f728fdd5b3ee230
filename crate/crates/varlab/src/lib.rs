//! File formats, plotting, parallel drivers and the command-line interface
//! for the `varlab-core` experiments.
//!
//! Every subcommand writes CSV tables with a header row, optional SVG charts
//! and a `manifest.json` that records the exact parameters of the run.

pub mod cli;
pub mod drivers;
pub mod manifest;
pub mod output;
pub mod snapshot;
pub mod svg;
