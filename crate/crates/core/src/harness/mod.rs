//! Experiment drivers.

pub mod config;
pub mod experiments;
pub mod families;
pub mod report;

use std::fmt;
use std::str::FromStr;

pub use config::Config;
pub use report::{ExperimentReport, Verdict};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Conditions,
    Pointwise,
    Bound,
    Representation,
    Embedding,
    Mushroom,
    Sharpness,
    Potential,
    Maximal,
}

impl Subcommand {
    pub const ALL: [Subcommand; 9] = [
        Subcommand::Conditions,
        Subcommand::Pointwise,
        Subcommand::Bound,
        Subcommand::Representation,
        Subcommand::Embedding,
        Subcommand::Mushroom,
        Subcommand::Sharpness,
        Subcommand::Potential,
        Subcommand::Maximal,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Subcommand::Conditions => "conditions",
            Subcommand::Pointwise => "pointwise",
            Subcommand::Bound => "bound",
            Subcommand::Representation => "representation",
            Subcommand::Embedding => "embedding",
            Subcommand::Mushroom => "mushroom",
            Subcommand::Sharpness => "sharpness",
            Subcommand::Potential => "potential",
            Subcommand::Maximal => "maximal",
        }
    }
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Subcommand {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown subcommand '{s}'")))
    }
}

pub fn run(sub: Subcommand, cfg: &Config) -> Result<ExperimentReport> {
    use experiments::*;
    match sub {
        Subcommand::Conditions => run_conditions(cfg),
        Subcommand::Pointwise => run_pointwise(cfg),
        Subcommand::Bound => run_bound(cfg),
        Subcommand::Representation => run_representation(cfg),
        Subcommand::Embedding => run_embedding(cfg),
        Subcommand::Mushroom => run_mushroom(cfg),
        Subcommand::Sharpness => run_sharpness(cfg),
        Subcommand::Potential => run_potential(cfg),
        Subcommand::Maximal => run_maximal(cfg),
    }
}
