//! Experiment runner behind the `orbitcount` binary.

pub mod config;
pub mod experiments;
pub mod manifest;

use std::path::PathBuf;

/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "ORBITCOUNT_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Subcommand {
    Length,
    Intersect,
    OrbitCount,
    MEstimate,
    Ratio,
    Exponent,
    ThurstonDistance,
    Validate,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Length => "length",
            Subcommand::Intersect => "intersect",
            Subcommand::OrbitCount => "orbit-count",
            Subcommand::MEstimate => "m-estimate",
            Subcommand::Ratio => "ratio",
            Subcommand::Exponent => "exponent",
            Subcommand::ThurstonDistance => "thurston-distance",
            Subcommand::Validate => "validate",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        use clap::ValueEnum;
        Subcommand::value_variants().iter().copied().find(|c| c.name() == name)
    }
}

/// Failures mapped to exit codes 1 (configuration) and 2 (runtime).
#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 1,
            Failure::Runtime(_) => 2,
        }
    }
}

impl From<orbitcount_core::Error> for Failure {
    fn from(e: orbitcount_core::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

#[derive(Debug, Clone)]
pub struct Invocation {
    pub command: Subcommand,
    pub config: PathBuf,
    pub resume: Option<PathBuf>,
    pub threads: Option<usize>,
    pub tolerance: Option<f64>,
}
