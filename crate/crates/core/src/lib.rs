//! Deterministic multi-agent simulation of need-driven agents on a hex map.
//!
//! Agents carry five need tanks, learn per-plan success rates and expected
//! need satisfaction, remember places and other agents, and pick motives by
//! strength with a small deadband. Every run is reproducible from its seeds.

pub mod agent;
pub mod config;
pub mod error;
pub mod hexgrid;
pub mod memory;
pub mod motive;
pub mod needs;
pub mod plans;
pub mod rng;
pub mod telemetry;
pub mod world;

pub use agent::{Agent, AgentId};
pub use config::{RunConfig, ScenarioId};
pub use error::{Error, Result};
pub use telemetry::RunLog;
pub use world::{run_scenario, World};
