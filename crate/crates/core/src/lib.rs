//! Simulation engine for trust-based task delegation among social IoT
//! devices.
//!
//! The core is generic over the scalar type ([`Scalar`], `f32` or `f64`);
//! the aliases at the crate root fix it to `f64`.

pub mod delegation;
pub mod domain;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod report;
pub mod scalar;
pub mod scenario;
pub mod trust;

pub use error::{Error, Result};
pub use graph::{NodeId, SocialGraph};
pub use scalar::Scalar;

pub type Task = domain::Task<f64>;
pub type TaskRegistry = domain::TaskRegistry<f64>;
pub type TrustRecord = domain::TrustRecord<f64>;
pub type TrustStore = domain::TrustStore<f64>;
pub type AgentProfile = domain::AgentProfile<f64>;
pub type Environment = domain::Environment<f64>;
pub type DelegationOutcome = domain::DelegationOutcome<f64>;
pub type TransitivityParams = trust::TransitivityParams<f64>;
pub type UpdateParams = trust::UpdateParams<f64>;
