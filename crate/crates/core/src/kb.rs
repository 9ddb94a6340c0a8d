//! Capacity knowledge-base documents: the JSON wire format that names the
//! machines and VNFs and carries one measured capacity curve per pair.
//!
//! Version "1" layout:
//!
//! ```json
//! {
//!   "version": "1",
//!   "units": "kpps",
//!   "vnfs": [{"name": "snort"}],
//!   "machines": [{"name": "m1", "description": "edge box"}],
//!   "capacity": [
//!     {"machine": "m1", "vnf": "snort", "curve": [[0.0, 0.0], [1.0, 21.0]]}
//!   ]
//! }
//! ```
//!
//! Loading enforces the document invariants (names resolve, no duplicate
//! pairs, every curve well-formed); full grid coverage is checked only
//! when a model is built, so a document may legitimately be partial.

use crate::model::{CapacityCurve, CapacityModel, CurveError, ModelError};
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

pub const KB_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KbDocument {
    pub version: String,
    /// Unit the curve rates are measured in, e.g. "kpps". Echoed in
    /// reports; never interpreted.
    pub units: String,
    pub vnfs: Vec<KbVnf>,
    pub machines: Vec<KbMachine>,
    pub capacity: Vec<KbCapacity>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KbVnf {
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KbMachine {
    pub name: String,
    /// Free-form provenance notes (hardware config etc.); never interpreted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KbCapacity {
    pub machine: String,
    pub vnf: String,
    /// `[fraction, capacity]` sample pairs, from `[0, 0]` up to full
    /// allocation.
    pub curve: Vec<(f64, f64)>,
}

fn format_pairs(pairs: &[(String, String)]) -> String {
    pairs
        .iter()
        .map(|(machine, vnf)| format!("{machine}/{vnf}"))
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Debug, Error)]
pub enum KbError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("unsupported document version {found:?}; this build reads version \"1\"")]
    Version { found: String },
    #[error("machines[{index}]: duplicate machine name {name:?}")]
    DuplicateMachine { index: usize, name: String },
    #[error("vnfs[{index}]: duplicate vnf name {name:?}")]
    DuplicateVnf { index: usize, name: String },
    #[error("capacity[{index}]: unknown machine {name:?}")]
    UnknownMachine { index: usize, name: String },
    #[error("capacity[{index}]: unknown vnf {name:?}")]
    UnknownVnf { index: usize, name: String },
    #[error("capacity[{index}]: duplicate entry for machine {machine:?}, vnf {vnf:?}")]
    DuplicatePair {
        index: usize,
        machine: String,
        vnf: String,
    },
    #[error("capacity[{index}] (machine {machine:?}, vnf {vnf:?}): {source}")]
    Curve {
        index: usize,
        machine: String,
        vnf: String,
        source: CurveError,
    },
    #[error("{kind} subset names {name:?}, which is not in the document")]
    UnknownSubsetName { kind: &'static str, name: String },
    #[error("{kind} subset repeats {name:?}")]
    DuplicateSubsetName { kind: &'static str, name: String },
    #[error("{kind} subset is empty")]
    EmptySubset { kind: &'static str },
    #[error("no capacity entry for machine {machine:?}, vnf {vnf:?}")]
    UnknownPair { machine: String, vnf: String },
    #[error("fraction {fraction} is outside [0, 1]")]
    FractionRange { fraction: f64 },
    #[error("missing capacity for: {}", format_pairs(.0))]
    MissingCapacity(Vec<(String, String)>),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Checks every document invariant except grid coverage: names are unique,
/// capacity rows reference declared names, no pair repeats, every curve
/// parses. Errors carry the JSON path of the offending element.
pub fn validate_document(doc: &KbDocument) -> Result<(), KbError> {
    for (index, machine) in doc.machines.iter().enumerate() {
        if doc.machines[..index].iter().any(|m| m.name == machine.name) {
            return Err(KbError::DuplicateMachine {
                index,
                name: machine.name.clone(),
            });
        }
    }
    for (index, vnf) in doc.vnfs.iter().enumerate() {
        if doc.vnfs[..index].iter().any(|v| v.name == vnf.name) {
            return Err(KbError::DuplicateVnf {
                index,
                name: vnf.name.clone(),
            });
        }
    }
    for (index, row) in doc.capacity.iter().enumerate() {
        if !doc.machines.iter().any(|m| m.name == row.machine) {
            return Err(KbError::UnknownMachine {
                index,
                name: row.machine.clone(),
            });
        }
        if !doc.vnfs.iter().any(|v| v.name == row.vnf) {
            return Err(KbError::UnknownVnf {
                index,
                name: row.vnf.clone(),
            });
        }
        if doc.capacity[..index]
            .iter()
            .any(|prev| prev.machine == row.machine && prev.vnf == row.vnf)
        {
            return Err(KbError::DuplicatePair {
                index,
                machine: row.machine.clone(),
                vnf: row.vnf.clone(),
            });
        }
        CapacityCurve::from_samples(row.curve.clone()).map_err(|source| KbError::Curve {
            index,
            machine: row.machine.clone(),
            vnf: row.vnf.clone(),
            source,
        })?;
    }
    Ok(())
}

/// Parses, version-checks, and validates a document.
pub fn load_document(json: &str) -> Result<KbDocument, KbError> {
    let doc: KbDocument = serde_json::from_str(json)?;
    if doc.version != KB_VERSION {
        return Err(KbError::Version { found: doc.version });
    }
    validate_document(&doc)?;
    Ok(doc)
}

pub fn read_document(path: &Path) -> Result<KbDocument, KbError> {
    let text = std::fs::read_to_string(path).map_err(|source| KbError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_document(&text)
}

/// Pretty-printed JSON with a trailing newline. Field order is fixed, so
/// equal documents serialize byte-identically.
pub fn to_json(doc: &KbDocument) -> String {
    let mut out = serde_json::to_string_pretty(doc).expect("document serializes");
    out.push('\n');
    out
}

/// Interpolated capacity for one machine/VNF pair at a partial allocation.
pub fn query_capacity<S: AsRef<str>>(
    doc: &KbDocument,
    machine: S,
    vnf: S,
    fraction: f64,
) -> Result<f64, KbError> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(KbError::FractionRange { fraction });
    }
    let (index, row) = doc
        .capacity
        .iter()
        .enumerate()
        .find(|(_, row)| row.machine == machine.as_ref() && row.vnf == vnf.as_ref())
        .ok_or_else(|| KbError::UnknownPair {
            machine: machine.as_ref().to_string(),
            vnf: vnf.as_ref().to_string(),
        })?;
    let curve = CapacityCurve::from_samples(row.curve.clone()).map_err(|source| {
        KbError::Curve {
            index,
            machine: row.machine.clone(),
            vnf: row.vnf.clone(),
            source,
        }
    })?;
    Ok(curve.value_at(fraction))
}

fn resolve_subset<'a>(
    kind: &'static str,
    subset: Option<&'a [String]>,
    all: impl Iterator<Item = &'a str>,
) -> Result<Vec<String>, KbError> {
    let available: Vec<&str> = all.collect();
    let Some(subset) = subset else {
        return Ok(available.iter().map(|s| s.to_string()).collect());
    };
    if subset.is_empty() {
        return Err(KbError::EmptySubset { kind });
    }
    let mut names = Vec::with_capacity(subset.len());
    for name in subset {
        if !available.contains(&name.as_str()) {
            return Err(KbError::UnknownSubsetName {
                kind,
                name: name.clone(),
            });
        }
        if names.contains(name) {
            return Err(KbError::DuplicateSubsetName {
                kind,
                name: name.clone(),
            });
        }
        names.push(name.clone());
    }
    Ok(names)
}

/// Builds the capacity model over the whole document grid, machines and
/// VNFs in document order.
pub fn build_model(doc: &KbDocument) -> Result<CapacityModel, KbError> {
    build_model_subset(doc, None, None)
}

/// Builds a model restricted to the given machine and VNF names, in subset
/// order (`None` keeps the full document axis). The grid must be complete
/// over the selection; all absent pairs are reported together.
pub fn build_model_subset(
    doc: &KbDocument,
    machines: Option<&[String]>,
    vnfs: Option<&[String]>,
) -> Result<CapacityModel, KbError> {
    validate_document(doc)?;
    let machine_names = resolve_subset(
        "machine",
        machines,
        doc.machines.iter().map(|m| m.name.as_str()),
    )?;
    let vnf_names = resolve_subset("vnf", vnfs, doc.vnfs.iter().map(|v| v.name.as_str()))?;

    let mut grid: Vec<Vec<Option<CapacityCurve>>> =
        vec![vec![None; vnf_names.len()]; machine_names.len()];
    for (index, row) in doc.capacity.iter().enumerate() {
        let Some(i) = machine_names.iter().position(|n| *n == row.machine) else {
            continue;
        };
        let Some(j) = vnf_names.iter().position(|n| *n == row.vnf) else {
            continue;
        };
        let curve = CapacityCurve::from_samples(row.curve.clone()).map_err(|source| {
            KbError::Curve {
                index,
                machine: row.machine.clone(),
                vnf: row.vnf.clone(),
                source,
            }
        })?;
        grid[i][j] = Some(curve);
    }

    let mut missing = Vec::new();
    for (i, machine) in machine_names.iter().enumerate() {
        for (j, vnf) in vnf_names.iter().enumerate() {
            if grid[i][j].is_none() {
                missing.push((machine.clone(), vnf.clone()));
            }
        }
    }
    if !missing.is_empty() {
        return Err(KbError::MissingCapacity(missing));
    }

    let curves: Vec<Vec<CapacityCurve>> = grid
        .into_iter()
        .map(|row| row.into_iter().map(Option::unwrap).collect())
        .collect();
    Ok(CapacityModel::from_curves(machine_names, vnf_names, curves)?)
}

/// The inverse of [`build_model`]: a version-"1" document carrying the
/// model's curves verbatim.
pub fn document_from_model(model: &CapacityModel, units: &str) -> KbDocument {
    let mut capacity = Vec::new();
    for machine in model.machines() {
        for vnf in model.vnfs() {
            capacity.push(KbCapacity {
                machine: machine.name.clone(),
                vnf: vnf.name.clone(),
                curve: model.curve(machine.index, vnf.index).samples().to_vec(),
            });
        }
    }
    KbDocument {
        version: KB_VERSION.to_string(),
        units: units.to_string(),
        vnfs: model
            .vnfs()
            .iter()
            .map(|v| KbVnf {
                name: v.name.clone(),
            })
            .collect(),
        machines: model
            .machines()
            .iter()
            .map(|m| KbMachine {
                name: m.name.clone(),
                description: None,
            })
            .collect(),
        capacity,
    }
}
