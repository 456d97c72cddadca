//! A semantic-episodic memory agent that learns which object properties
//! cause water displacement, in a simulated jar-and-pebbles world.
//!
//! Start with [`runner::replay_fable`] or [`runner::run_scenario`].

pub mod causal;
pub mod episodic;
pub mod error;
pub mod features;
pub mod hubs;
pub mod report;
pub mod runner;
pub mod scenario;
pub mod world;

pub use error::{Error, Result};
