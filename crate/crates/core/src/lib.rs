//! Receding-horizon motion planning for LTL tasks with hard and soft constraints.

pub mod dts;
pub mod energy;
pub mod environment;
pub mod error;
pub mod graph;
pub mod ltl;
pub mod planner;
pub mod product;
pub mod sensing;
pub mod sim;

pub use error::{Error, Result};
