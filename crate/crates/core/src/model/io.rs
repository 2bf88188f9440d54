//! JSON topology files.
//!
//! ```json
//! {
//!   "nodes": [{"id": "A", "x": 0, "y": 0, "radios": 1}, ...],
//!   "channels": 1,
//!   "comm_range": 250,
//!   "interference_range": 500,
//!   "commodities": [{"src": "A", "dst": "D", "demand": 1}],
//!   "bandwidth_mode": "per_channel" | {"per_channel": 1.0} | {"total": 4.0},
//!   "energy": {"e_tx": 0.5, "e_rx": 0.5, "p0_sleep": 0.01},
//!   "energy_overrides": [{"tx": "A", "rx": "M", "channel": 0, "e_tx": 0.6, "e_rx": 0.4}],
//!   "allow_endpoint_relay": false
//! }
//! ```
//!
//! `bandwidth_mode`, `energy`, `energy_overrides` and `allow_endpoint_relay`
//! are optional. Node ids may be strings or integers.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{BandwidthMode, Commodity, EnergyOverride, EnergyParams, NodeSpec, Topology};
use crate::error::{Error, Result};

/// What to do with object keys the schema does not know.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnknownFieldPolicy {
    #[default]
    Reject,
    Warn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum NodeId {
    Name(String),
    Number(u64),
}

impl NodeId {
    fn into_string(self) -> String {
        match self {
            NodeId::Name(s) => s,
            NodeId::Number(n) => n.to_string(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct FileNode {
    id: NodeId,
    x: f64,
    y: f64,
    radios: usize,
}

#[derive(Serialize, Deserialize)]
struct FileCommodity {
    src: NodeId,
    dst: NodeId,
    demand: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum FileBandwidth {
    Name(String),
    Detailed {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        per_channel: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        total: Option<f64>,
    },
}

#[derive(Serialize, Deserialize)]
struct FileEnergy {
    e_tx: f64,
    e_rx: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p0_sleep: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct FileOverride {
    tx: NodeId,
    rx: NodeId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    channel: Option<usize>,
    e_tx: f64,
    e_rx: f64,
}

#[derive(Serialize, Deserialize)]
struct FileTopology {
    nodes: Vec<FileNode>,
    channels: usize,
    comm_range: f64,
    interference_range: f64,
    commodities: Vec<FileCommodity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bandwidth_mode: Option<FileBandwidth>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    energy: Option<FileEnergy>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    energy_overrides: Vec<FileOverride>,
    #[serde(default)]
    allow_endpoint_relay: bool,
}

const TOP_KEYS: &[&str] = &[
    "nodes",
    "channels",
    "comm_range",
    "interference_range",
    "commodities",
    "bandwidth_mode",
    "energy",
    "energy_overrides",
    "allow_endpoint_relay",
];
const NODE_KEYS: &[&str] = &["id", "x", "y", "radios"];
const COMMODITY_KEYS: &[&str] = &["src", "dst", "demand"];
const ENERGY_KEYS: &[&str] = &["e_tx", "e_rx", "p0_sleep"];
const OVERRIDE_KEYS: &[&str] = &["tx", "rx", "channel", "e_tx", "e_rx"];
const BANDWIDTH_KEYS: &[&str] = &["per_channel", "total"];

fn unknown_keys(value: &Value) -> Vec<String> {
    fn check(path: &str, v: &Value, known: &[&str], out: &mut Vec<String>) {
        if let Value::Object(map) = v {
            for key in map.keys() {
                if !known.contains(&key.as_str()) {
                    out.push(format!("{path}{key}"));
                }
            }
        }
    }
    fn check_list(path: &str, v: Option<&Value>, known: &[&str], out: &mut Vec<String>) {
        if let Some(Value::Array(items)) = v {
            for (i, item) in items.iter().enumerate() {
                check(&format!("{path}[{i}]."), item, known, out);
            }
        }
    }

    let mut out = Vec::new();
    check("", value, TOP_KEYS, &mut out);
    check_list("nodes", value.get("nodes"), NODE_KEYS, &mut out);
    check_list("commodities", value.get("commodities"), COMMODITY_KEYS, &mut out);
    check_list("energy_overrides", value.get("energy_overrides"), OVERRIDE_KEYS, &mut out);
    if let Some(e) = value.get("energy") {
        check("energy.", e, ENERGY_KEYS, &mut out);
    }
    if let Some(b) = value.get("bandwidth_mode") {
        check("bandwidth_mode.", b, BANDWIDTH_KEYS, &mut out);
    }
    out
}

fn json_error(e: &serde_json::Error) -> Error {
    Error::Parse {
        context: format!("line {} column {}", e.line(), e.column()),
        message: e.to_string(),
    }
}

pub fn parse_topology(text: &str, policy: UnknownFieldPolicy) -> Result<Topology> {
    let value: Value = serde_json::from_str(text).map_err(|e| json_error(&e))?;
    let unknown = unknown_keys(&value);
    if !unknown.is_empty() {
        match policy {
            UnknownFieldPolicy::Reject => {
                return Err(Error::Parse {
                    context: unknown.join(", "),
                    message: "unknown field".into(),
                })
            }
            UnknownFieldPolicy::Warn => {
                for key in &unknown {
                    log::warn!("ignoring unknown topology field `{key}`");
                }
            }
        }
    }

    let mut de = serde_json::Deserializer::from_str(text);
    let file: FileTopology = serde_path_to_error::deserialize(&mut de).map_err(|e| Error::Parse {
        context: format!(
            "field `{}` (line {} column {})",
            e.path(),
            e.inner().line(),
            e.inner().column()
        ),
        message: e.inner().to_string(),
    })?;
    from_file(file)
}

fn from_file(file: FileTopology) -> Result<Topology> {
    let nodes: Vec<NodeSpec> = file
        .nodes
        .into_iter()
        .map(|n| NodeSpec {
            id: n.id.into_string(),
            x: n.x,
            y: n.y,
            radios: n.radios,
        })
        .collect();
    let lookup = |id: NodeId, field: &str| -> Result<usize> {
        let id = id.into_string();
        nodes
            .iter()
            .position(|n| n.id == id)
            .ok_or_else(|| Error::invalid(format!("{field} '{id}' is an existing node")))
    };

    let mut commodities = Vec::with_capacity(file.commodities.len());
    for c in file.commodities {
        commodities.push(Commodity {
            source: lookup(c.src, "commodity src")?,
            destination: lookup(c.dst, "commodity dst")?,
            demand: c.demand,
        });
    }

    let bandwidth_mode = match file.bandwidth_mode {
        None => BandwidthMode::default(),
        Some(FileBandwidth::Name(name)) => match name.as_str() {
            "per_channel" | "per-channel" => BandwidthMode::default(),
            other => {
                return Err(Error::Parse {
                    context: "field `bandwidth_mode`".into(),
                    message: format!("unknown mode '{other}' (a total-capacity mode needs {{\"total\": W}})"),
                })
            }
        },
        Some(FileBandwidth::Detailed {
            per_channel: Some(rate),
            total: None,
        }) => BandwidthMode::PerChannelFixed { rate },
        Some(FileBandwidth::Detailed {
            per_channel: None,
            total: Some(total_capacity),
        }) => BandwidthMode::TotalFixed { total_capacity },
        Some(FileBandwidth::Detailed { .. }) => {
            return Err(Error::Parse {
                context: "field `bandwidth_mode`".into(),
                message: "exactly one of `per_channel` or `total` is required".into(),
            })
        }
    };

    let energy = file
        .energy
        .map(|e| EnergyParams {
            e_tx: e.e_tx,
            e_rx: e.e_rx,
            p0_sleep: e.p0_sleep,
        })
        .unwrap_or_default();

    let mut energy_overrides = Vec::with_capacity(file.energy_overrides.len());
    for o in file.energy_overrides {
        energy_overrides.push(EnergyOverride {
            tx: lookup(o.tx, "energy override tx")?,
            rx: lookup(o.rx, "energy override rx")?,
            channel: o.channel,
            e_tx: o.e_tx,
            e_rx: o.e_rx,
        });
    }

    let topology = Topology {
        nodes,
        channels: file.channels,
        comm_range: file.comm_range,
        interference_range: file.interference_range,
        commodities,
        bandwidth_mode,
        energy,
        energy_overrides,
        allow_endpoint_relay: file.allow_endpoint_relay,
    };
    topology.validate()?;
    Ok(topology)
}

pub fn load_topology(path: impl AsRef<Path>, policy: UnknownFieldPolicy) -> Result<Topology> {
    let text = std::fs::read_to_string(path)?;
    parse_topology(&text, policy)
}

/// Serialize in the file format accepted by [`parse_topology`].
pub fn topology_to_json(topology: &Topology) -> String {
    let id = |i: usize| NodeId::Name(topology.nodes[i].id.clone());
    let file = FileTopology {
        nodes: topology
            .nodes
            .iter()
            .map(|n| FileNode {
                id: NodeId::Name(n.id.clone()),
                x: n.x,
                y: n.y,
                radios: n.radios,
            })
            .collect(),
        channels: topology.channels,
        comm_range: topology.comm_range,
        interference_range: topology.interference_range,
        commodities: topology
            .commodities
            .iter()
            .map(|c| FileCommodity {
                src: id(c.source),
                dst: id(c.destination),
                demand: c.demand,
            })
            .collect(),
        bandwidth_mode: Some(match topology.bandwidth_mode {
            BandwidthMode::PerChannelFixed { rate } => FileBandwidth::Detailed {
                per_channel: Some(rate),
                total: None,
            },
            BandwidthMode::TotalFixed { total_capacity } => FileBandwidth::Detailed {
                per_channel: None,
                total: Some(total_capacity),
            },
        }),
        energy: Some(FileEnergy {
            e_tx: topology.energy.e_tx,
            e_rx: topology.energy.e_rx,
            p0_sleep: topology.energy.p0_sleep,
        }),
        energy_overrides: topology
            .energy_overrides
            .iter()
            .map(|o| FileOverride {
                tx: id(o.tx),
                rx: id(o.rx),
                channel: o.channel,
                e_tx: o.e_tx,
                e_rx: o.e_rx,
            })
            .collect(),
        allow_endpoint_relay: topology.allow_endpoint_relay,
    };
    serde_json::to_string_pretty(&file).expect("topology serializes")
}
