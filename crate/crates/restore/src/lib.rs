//! Poisson image restoration with a hybrid total-variation and tight-frame
//! criterion, on top of [`ppxa_core`].
//!
//! This crate holds everything that needs `std`: configuration files,
//! PGM and raw float images, the seeded Poisson degradation, quality
//! metrics, assembly of the restoration problem and the experiment drivers
//! behind the `ppxa-restore` binary.

pub mod config;
pub mod experiment;
pub mod metrics;
pub mod phantom;
pub mod pnm;
pub mod poisson;
pub mod problem;
pub mod selftest;
pub mod trace;

pub use config::Config;
pub use problem::{assemble, restore, Algorithm, Observation, RestorationProblem, Restored};
