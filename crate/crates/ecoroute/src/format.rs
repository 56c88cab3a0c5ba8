//! Network and parameter files.
//!
//! The JSON network format lists nodes by external integer id and links by
//! the ids of their endpoints, with one average speed per time slot. The
//! CSV variant carries one link per row and a single slot; nodes are
//! implied by the link endpoints.

use std::collections::BTreeSet;
use std::collections::HashMap;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use ecoroute_core::netmodel::LinkSpec;
use ecoroute_core::{EnergyParams, Network, NetworkBuilder, NodeId, PerCategory};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{path}: {field}: {message}")]
    Field {
        path: String,
        field: String,
        message: String,
    },
    #[error("{path}: {source}")]
    Network {
        path: String,
        #[source]
        source: ecoroute_core::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkFile {
    pub slot_count: usize,
    pub nodes: Vec<NodeRecord>,
    pub links: Vec<LinkRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lat: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lon: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkRecord {
    pub from: i64,
    pub to: i64,
    pub length_mi: f64,
    pub free_flow_mph: f64,
    pub avg_mph: Vec<f64>,
    /// Distinguishes parallel links between the same pair of nodes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<u64>,
}

#[derive(Debug, Deserialize)]
struct CsvLink {
    from: i64,
    to: i64,
    length_mi: f64,
    free_flow_mph: f64,
    avg_mph: f64,
    #[serde(default)]
    id: Option<u64>,
}

impl NetworkFile {
    /// Builds the network for one time slot.
    pub fn build(&self, slot: usize, origin: &str) -> Result<Network, FormatError> {
        let field = |field: String, message: String| FormatError::Field {
            path: origin.to_owned(),
            field,
            message,
        };
        let mut builder = NetworkBuilder::with_capacity(self.slot_count, self.nodes.len(), self.links.len());
        let mut index = HashMap::with_capacity(self.nodes.len());
        for (i, n) in self.nodes.iter().enumerate() {
            if index.insert(n.id, builder.add_node(n.id, n.lat, n.lon)).is_some() {
                return Err(field(format!("nodes[{i}].id"), format!("duplicate node id {}", n.id)));
            }
        }
        for (i, l) in self.links.iter().enumerate() {
            let lookup = |end: &str, id: i64| {
                index
                    .get(&id)
                    .copied()
                    .ok_or_else(|| field(format!("links[{i}].{end}"), format!("unknown node id {id}")))
            };
            let spec = LinkSpec {
                from: lookup("from", l.from)?,
                to: lookup("to", l.to)?,
                length: l.length_mi,
                free_flow_speed: l.free_flow_mph,
                avg_speeds: l.avg_mph.clone(),
                external_id: l.id,
            };
            builder.add_link(spec);
        }
        builder.build(slot).map_err(|source| FormatError::Network {
            path: origin.to_owned(),
            source,
        })
    }

    pub fn from_network(net: &Network) -> Self {
        let nodes = net
            .nodes()
            .iter()
            .map(|n| NodeRecord {
                id: n.external_id,
                lat: n.lat,
                lon: n.lon,
            })
            .collect();
        let ext = |id: NodeId| net.node(id).external_id;
        let links = net
            .links()
            .iter()
            .map(|l| LinkRecord {
                from: ext(l.from),
                to: ext(l.to),
                length_mi: l.length,
                free_flow_mph: l.free_flow_speed,
                avg_mph: l.avg_speeds.clone(),
                id: l.external_id,
            })
            .collect();
        Self {
            slot_count: net.slot_count(),
            nodes,
            links,
        }
    }

    pub fn from_json(text: &str, origin: &str) -> Result<Self, FormatError> {
        serde_json::from_str(text).map_err(|e| FormatError::Parse {
            path: origin.to_owned(),
            message: e.to_string(),
        })
    }

    pub fn from_csv(reader: impl Read, origin: &str) -> Result<Self, FormatError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut links = Vec::new();
        for row in rdr.deserialize::<CsvLink>() {
            let row = row.map_err(|e| FormatError::Parse {
                path: origin.to_owned(),
                message: e.to_string(),
            })?;
            links.push(LinkRecord {
                from: row.from,
                to: row.to,
                length_mi: row.length_mi,
                free_flow_mph: row.free_flow_mph,
                avg_mph: vec![row.avg_mph],
                id: row.id,
            });
        }
        let ids: BTreeSet<i64> = links.iter().flat_map(|l| [l.from, l.to]).collect();
        let nodes = ids
            .into_iter()
            .map(|id| NodeRecord {
                id,
                lat: None,
                lon: None,
            })
            .collect();
        Ok(Self {
            slot_count: 1,
            nodes,
            links,
        })
    }

    /// Pretty JSON with a trailing newline; stable for identical networks.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("network serializes");
        s.push('\n');
        s
    }
}

fn read(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Reads a `.json` or `.csv` network and builds it for `slot`. Clamped
/// speeds are reported through `log`.
pub fn load_network(path: &Path, slot: usize) -> Result<Network, FormatError> {
    let origin = path.display().to_string();
    let file = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        let f = fs::File::open(path).map_err(|source| FormatError::Io {
            path: origin.clone(),
            source,
        })?;
        NetworkFile::from_csv(f, &origin)?
    } else {
        NetworkFile::from_json(&read(path)?, &origin)?
    };
    let net = file.build(slot, &origin)?;
    for w in net.warnings() {
        log::warn!(
            "{origin}: link {} slot {}: average speed {} mph above free flow, clamped to {}",
            w.link,
            w.slot,
            w.original,
            w.clamped
        );
    }
    Ok(net)
}

pub fn save_network(net: &Network, path: &Path) -> Result<(), FormatError> {
    write_text(path, &NetworkFile::from_network(net).to_json())
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<(), FormatError> {
    let io = |source| FormatError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut f = fs::File::create(path).map_err(io)?;
    f.write_all(text.as_bytes()).map_err(io)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CategoryTable {
    pub high: f64,
    pub medium: f64,
    pub low: f64,
}

/// JSON form of [`EnergyParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamsFile {
    pub c_gas: f64,
    pub c_ele: f64,
    pub mu_cd: CategoryTable,
    pub mu_cs: CategoryTable,
}

impl From<ParamsFile> for EnergyParams {
    fn from(f: ParamsFile) -> Self {
        let table = |t: CategoryTable| PerCategory {
            high: t.high,
            medium: t.medium,
            low: t.low,
        };
        EnergyParams {
            c_gas: f.c_gas,
            c_ele: f.c_ele,
            mu_cd: table(f.mu_cd),
            mu_cs: table(f.mu_cs),
        }
    }
}

impl From<EnergyParams> for ParamsFile {
    fn from(p: EnergyParams) -> Self {
        let table = |t: PerCategory<f64>| CategoryTable {
            high: t.high,
            medium: t.medium,
            low: t.low,
        };
        ParamsFile {
            c_gas: p.c_gas,
            c_ele: p.c_ele,
            mu_cd: table(p.mu_cd),
            mu_cs: table(p.mu_cs),
        }
    }
}

/// Loads and validates energy parameters; `None` gives the defaults.
pub fn load_params(path: Option<&Path>) -> Result<EnergyParams, FormatError> {
    let Some(path) = path else {
        return Ok(EnergyParams::default());
    };
    let origin = path.display().to_string();
    let file: ParamsFile = serde_json::from_str(&read(path)?).map_err(|e| FormatError::Parse {
        path: origin.clone(),
        message: e.to_string(),
    })?;
    let params = EnergyParams::from(file);
    params
        .validate()
        .map_err(|source| FormatError::Network { path: origin, source })?;
    Ok(params)
}
