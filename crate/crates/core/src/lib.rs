//! Multistage interconnection networks: construction, meta-flattening and
//! cycle-level wormhole simulation.

pub mod error;
pub mod experiment;
pub mod metrics;
pub mod routing;
pub mod sim;
pub mod topology;
pub mod workload;

pub use error::{Error, Result};
pub use experiment::{ExperimentConfig, NetworkSpec};
pub use metrics::{PowerProxyReport, SimStats};
pub use routing::{Policy, RoutingTable};
pub use sim::{MessageLog, SimConfig, SimOutput};
pub use topology::{ClosParams, DeltaKind, FlattenMethod, Network, NetworkKind};
pub use workload::{Pattern, TraceRecord, WorkloadSpec};
