//! Layout synthesis for dynamic quantum circuits on multi-controller
//! systems: feedforward-aware placement of logical qubits onto controllers
//! and SWAP routing that avoids splitting feedforward sets.

pub mod benchgen;
pub mod cidq;
pub mod circuit;
pub mod control;
pub mod oracle;
pub mod pipeline;
pub mod placement;
pub mod scheduler;
pub mod sweep;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] circuit::ParseError),
    #[error(transparent)]
    Circuit(#[from] circuit::CircuitError),
    #[error(transparent)]
    Topology(#[from] control::TopologyError),
    #[error(transparent)]
    Mapping(#[from] control::MappingError),
    #[error(transparent)]
    Placement(#[from] placement::PlacementError),
    #[error(transparent)]
    Routing(#[from] scheduler::RoutingError),
    #[error(transparent)]
    Oracle(#[from] oracle::OracleError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Invalid(String),
}
