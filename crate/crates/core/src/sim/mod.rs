//! Scenario files, the simulated world, the mission driver and its artifacts.

mod bench;
mod export;
mod mission;
mod scenario;
mod world;

pub use bench::*;
pub use export::*;
pub use mission::*;
pub use scenario::*;
pub use world::*;
