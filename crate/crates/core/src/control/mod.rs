//! Control plane: controller hop distances, the device coupling map, and
//! the two mappings (physical qubit to controller, logical to physical).

mod device;
mod mapping;
mod topology;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use device::DeviceGraph;
pub use mapping::{controller_of, LayoutDocument, LogicalPhysicalMap, MappingError, QubitControllerMap};
pub use topology::ControllerTopology;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TopologyError {
    #[error("controller topology has no controllers")]
    NoControllers,
    #[error("hop matrix row {row} has length {len}, expected {k}")]
    NotSquare { row: usize, len: usize, k: usize },
    #[error("hop matrix diagonal entry for controller {controller} is not zero")]
    NonZeroDiagonal { controller: usize },
    #[error("hop matrix is asymmetric at ({i}, {j})")]
    Asymmetric { i: usize, j: usize },
    #[error("hop between distinct controllers {i} and {j} is zero")]
    ZeroHop { i: usize, j: usize },
    #[error("hop({i}, {j}) exceeds the route through controller {via}")]
    TriangleViolation { i: usize, j: usize, via: usize },
    #[error("device has no qubits")]
    EmptyDevice,
    #[error("device edge ({a}, {b}) out of range for {m} qubits")]
    EdgeOutOfRange { a: usize, b: usize, m: usize },
    #[error("device edge is a self loop on qubit {qubit}")]
    SelfLoop { qubit: usize },
    #[error("device is disconnected: no path from {a} to {b}")]
    Disconnected { a: usize, b: usize },
    #[error("edge list line {line}: expected `a b`, found `{text}`")]
    EdgeListSyntax { line: usize, text: String },
    #[error("physical qubit {qubit} assigned to controller {controller}, but only {k} exist")]
    ControllerOutOfRange { qubit: usize, controller: usize, k: usize },
    #[error("controller {controller} manages no physical qubits")]
    EmptyController { controller: usize },
    #[error("capacity mismatch: {detail}")]
    CapacityMismatch { detail: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("invalid topology document: {0}")]
    Document(String),
}

/// A validated control system: controllers, device and who controls what.
#[derive(Clone, Debug)]
pub struct Target {
    pub topology: ControllerTopology,
    pub device: DeviceGraph,
    pub controllers: QubitControllerMap,
}

impl Target {
    pub fn new(
        topology: ControllerTopology,
        device: DeviceGraph,
        controllers: QubitControllerMap,
    ) -> Result<Self, TopologyError> {
        if controllers.m() != device.m() {
            return Err(TopologyError::CapacityMismatch {
                detail: format!(
                    "controller assignment covers {} qubits, device has {}",
                    controllers.m(),
                    device.m()
                ),
            });
        }
        if controllers.k() != topology.k() {
            return Err(TopologyError::CapacityMismatch {
                detail: format!(
                    "assignment uses {} controllers, topology has {}",
                    controllers.k(),
                    topology.k()
                ),
            });
        }
        Ok(Target { topology, device, controllers })
    }

    /// Star of `k` controllers over the device with contiguous blocks.
    pub fn star(k: usize, device: DeviceGraph) -> Result<Self, TopologyError> {
        let mc = QubitControllerMap::contiguous(device.m(), k)?;
        Self::new(ControllerTopology::star(k), device, mc)
    }

    pub fn with_topology(topology: ControllerTopology, device: DeviceGraph) -> Result<Self, TopologyError> {
        let mc = QubitControllerMap::contiguous(device.m(), topology.k())?;
        Self::new(topology, device, mc)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ControllersSpec {
    Star { k: usize },
    StarViaRouter { k: usize },
    Line { k: usize },
    Matrix { hop: Vec<Vec<u32>> },
    Random { k: usize, max_hop: u32, seed: u64 },
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DeviceSpec {
    Line { m: usize },
    Grid { rows: usize, cols: usize },
    #[serde(rename = "heavy_hex_127")]
    HeavyHex127,
    EdgeList { path: PathBuf },
    Edges { m: usize, edges: Vec<(usize, usize)> },
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum AssignmentSpec {
    #[default]
    Contiguous,
    Explicit(Vec<usize>),
}

/// Topology configuration document, e.g.
/// `{"controllers": {"kind": "star", "k": 4}, "device": {"kind": "heavy_hex_127"}, "assignment": "contiguous"}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TopologyConfig {
    pub controllers: ControllersSpec,
    pub device: DeviceSpec,
    #[serde(default)]
    pub assignment: AssignmentSpec,
}

impl TopologyConfig {
    pub fn from_json(text: &str) -> Result<Self, TopologyError> {
        serde_json::from_str(text).map_err(|e| TopologyError::Document(e.to_string()))
    }

    /// Builds and validates the target. Relative edge-list paths resolve
    /// against `base_dir`.
    pub fn build(&self, base_dir: Option<&Path>) -> Result<Target, TopologyError> {
        let topology = match &self.controllers {
            ControllersSpec::Star { k } => nonzero(*k).map(ControllerTopology::star)?,
            ControllersSpec::StarViaRouter { k } => nonzero(*k).map(ControllerTopology::star_via_router)?,
            ControllersSpec::Line { k } => nonzero(*k).map(ControllerTopology::line)?,
            ControllersSpec::Matrix { hop } => ControllerTopology::new(hop.clone())?,
            ControllersSpec::Random { k, max_hop, seed } => {
                ControllerTopology::random_metric(nonzero(*k)?, *max_hop, *seed)
            }
        };
        let device = match &self.device {
            DeviceSpec::Line { m } => DeviceGraph::line(*m)?,
            DeviceSpec::Grid { rows, cols } => DeviceGraph::grid(*rows, *cols)?,
            DeviceSpec::HeavyHex127 => DeviceGraph::heavy_hex_127(),
            DeviceSpec::EdgeList { path } => {
                let full = match base_dir {
                    Some(dir) if path.is_relative() => dir.join(path),
                    _ => path.clone(),
                };
                DeviceGraph::load_edge_list(&full)?
            }
            DeviceSpec::Edges { m, edges } => DeviceGraph::from_edges(*m, edges)?,
        };
        let controllers = match &self.assignment {
            AssignmentSpec::Contiguous => QubitControllerMap::contiguous(device.m(), topology.k())?,
            AssignmentSpec::Explicit(a) => {
                if a.len() != device.m() {
                    return Err(TopologyError::CapacityMismatch {
                        detail: format!("assignment lists {} qubits, device has {}", a.len(), device.m()),
                    });
                }
                QubitControllerMap::new(a.clone(), topology.k())?
            }
        };
        Target::new(topology, device, controllers)
    }
}

fn nonzero(k: usize) -> Result<usize, TopologyError> {
    if k == 0 {
        Err(TopologyError::NoControllers)
    } else {
        Ok(k)
    }
}

/// Reads a topology document from disk and validates it.
pub fn load_topology(path: &Path) -> Result<(Target, TopologyConfig), TopologyError> {
    let text = std::fs::read_to_string(path).map_err(|e| TopologyError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let config = TopologyConfig::from_json(&text)?;
    let target = config.build(path.parent())?;
    Ok((target, config))
}
