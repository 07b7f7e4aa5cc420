//! Discrete-event simulation of a battery deposit service: UEs with spare
//! battery relay the uplink traffic of low-battery neighbours over D2D
//! links inside one LTE macro-cell.
//!
//! The modules follow the simulator's layers:
//!
//! * [`kernel`] owns the event queue, per-UE state and the main loop.
//! * [`mobility`] implements Random Duration movement with reflection at
//!   the cell edge.
//! * [`channel`] holds path-loss models, shadowing, open-loop uplink power
//!   and per-burst energy.
//! * [`traffic`] draws burst arrivals and sizes.
//! * [`protocol`] decides when to seek help, who helps, and who pays.
//! * [`metrics`] and [`experiment`] turn runs into outage and
//!   valueless-battery figures and files.

pub mod channel;
pub mod config;
pub mod energy;
pub mod error;
pub mod experiment;
pub mod kernel;
pub mod metrics;
pub mod mobility;
pub mod protocol;
pub mod rng;
pub mod traffic;

pub use config::{Range, ScenarioConfig, SelectionStrategy};
pub use energy::Energy;
pub use error::{Error, Result};
pub use kernel::{init_scenario, RunOutput, SimState, UeSetup, UsageRecord};
