//! Orchestration engine and simulator for RAN slice subnets that share gNB
//! components (CU, DU, RU) between slices.
//!
//! * [`descriptor`]: NSST / gNB NSD / VNFD / PNFD / auxiliary NSD templates,
//!   parsing and structural validation.
//! * [`topology`]: CU/DU/RU instance graph for the four sharing scenarios and
//!   DRB routing through it.
//! * [`resource`]: vCPU consumption and vNIC waiting-time models and the
//!   isolation predicate for shared instances.
//! * [`orchestrator`]: lifecycle state machine (instantiation, admission
//!   control, PRB allocation, CU and shared-DU scaling).
//! * [`sim`]: seeded time-stepped driver, scenario comparison and export.

pub mod descriptor;
pub mod orchestrator;
pub mod resource;
pub mod sim;
pub mod topology;

pub use descriptor::{DescriptorSet, ServiceType, Snssai};
pub use orchestrator::{Orchestrator, OrchestratorConfig, ScalingPolicy};
pub use resource::{CapacityBudget, Mcs, ResourceModelParams, SliceLoad};
pub use sim::{SimConfig, SimResult};
pub use topology::{Component, Drb, InstanceGraph, Qos, Scenario};
