//! Simulation of a robot team that shares observations of moving obstacles
//! through a central broker under a per-epoch bandwidth budget. The broker
//! picks the messages to relay by solving a 0/1 knapsack over candidate
//! pairwise transfers.

pub mod comms;
pub mod config;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod knapsack;
pub mod navigation;
pub mod oracle;
pub mod perception;
pub mod sim;
pub mod utility;
pub mod world;

pub use comms::{EpochLog, SchemeKind};
pub use config::ScenarioConfig;
pub use error::{Error, Result};
pub use sim::{run_trial, TrialResult};
