//! Occlusion-aware behavior planning with social perception.
//!
//! A robot car treats surrounding human drivers as sensors: their observed
//! actions update beliefs over occluded road users and latent traffic
//! conditions, and a receding-horizon planner optimizes the expected cost over
//! those beliefs. Human cost functions are learned from demonstrations with
//! maximum-entropy IRL.

pub mod ad;
pub mod costs;
pub mod error;
pub mod inference;
pub mod irl;
pub mod perception;
pub mod planner;
pub mod sim;
pub mod world;

pub use error::{Error, Result};
