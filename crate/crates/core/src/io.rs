//! JSON and CSV file formats.
//!
//! * Simplex: `{"id": "...", "vertices": [[x1, ..., xd], ...]}`; a simplex
//!   file holds one object or an array of them.
//! * Partition: `{"d", "nodes": [{"id", "parent", "generation",
//!   "vertex_ids", "children"}], "vertices": [[...], ...]}`. Leaves are
//!   derived from empty `children`.
//! * CSV reports write every float with 17 significant digits.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::audit::TheoremReport;
use crate::cone::FractionEstimate;
use crate::error::{Error, Result};
use crate::geometry::{Point, Simplex};
use crate::optimizer::TraceRow;
use crate::partition::{NodeId, Partition, VertexId};

/// Failure to read or write a file.
#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed JSON: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    /// The file parsed but describes an invalid object.
    #[error("{path}: {source}")]
    Invalid {
        path: String,
        #[source]
        source: Error,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimplexRecord {
    pub id: String,
    pub vertices: Vec<Vec<f64>>,
}

impl From<&Simplex> for SimplexRecord {
    fn from(s: &Simplex) -> Self {
        Self {
            id: s.id().to_string(),
            vertices: s.vertices().iter().map(|v| v.coords().to_vec()).collect(),
        }
    }
}

impl TryFrom<SimplexRecord> for Simplex {
    type Error = Error;

    fn try_from(r: SimplexRecord) -> Result<Self> {
        let vertices = r.vertices.into_iter().map(Point::new).collect::<Result<Vec<_>>>()?;
        Simplex::with_id(r.id, vertices)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(SimplexRecord),
    Many(Vec<SimplexRecord>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: NodeId,
    pub parent: Option<NodeId>,
    pub generation: u32,
    pub vertex_ids: Vec<VertexId>,
    pub children: Vec<NodeId>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionRecord {
    pub d: usize,
    pub nodes: Vec<NodeRecord>,
    pub vertices: Vec<Vec<f64>>,
}

impl From<&Partition> for PartitionRecord {
    fn from(p: &Partition) -> Self {
        Self {
            d: p.dim(),
            nodes: p
                .nodes()
                .iter()
                .map(|n| NodeRecord {
                    id: n.id,
                    parent: n.parent,
                    generation: n.generation,
                    vertex_ids: n.vertex_ids.clone(),
                    children: n.children.clone(),
                })
                .collect(),
            vertices: p.registry().points().iter().map(|v| v.coords().to_vec()).collect(),
        }
    }
}

impl TryFrom<PartitionRecord> for Partition {
    type Error = Error;

    fn try_from(r: PartitionRecord) -> Result<Self> {
        let vertices = r.vertices.into_iter().map(Point::new).collect::<Result<Vec<_>>>()?;
        let nodes = r
            .nodes
            .into_iter()
            .map(|n| (n.id, n.parent, n.generation, n.vertex_ids, n.children))
            .collect();
        Partition::from_parts(r.d, vertices, nodes)
    }
}

pub fn simplices_from_json(text: &str) -> std::result::Result<Result<Vec<Simplex>>, serde_json::Error> {
    let records = match serde_json::from_str::<OneOrMany>(text)? {
        OneOrMany::One(r) => vec![r],
        OneOrMany::Many(rs) => rs,
    };
    Ok(records.into_iter().map(Simplex::try_from).collect())
}

pub fn simplices_to_json(simplices: &[Simplex]) -> String {
    let records: Vec<SimplexRecord> = simplices.iter().map(SimplexRecord::from).collect();
    serde_json::to_string_pretty(&records).expect("simplex records serialize")
}

pub fn partition_to_json(p: &Partition) -> String {
    serde_json::to_string(&PartitionRecord::from(p)).expect("partition record serializes")
}

pub fn partition_from_json(text: &str) -> std::result::Result<Result<Partition>, serde_json::Error> {
    let record: PartitionRecord = serde_json::from_str(text)?;
    Ok(Partition::try_from(record))
}

fn read(path: &Path) -> std::result::Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_file(path: &Path, contents: &str) -> std::result::Result<(), IoError> {
    std::fs::write(path, contents).map_err(|source| IoError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parsed<T>(path: &Path, r: std::result::Result<Result<T>, serde_json::Error>) -> std::result::Result<T, IoError> {
    let name = || path.display().to_string();
    r.map_err(|source| IoError::Json { path: name(), source })?
        .map_err(|source| IoError::Invalid { path: name(), source })
}

pub fn read_partition(path: &Path) -> std::result::Result<Partition, IoError> {
    parsed(path, partition_from_json(&read(path)?))
}

pub fn read_simplices(path: &Path) -> std::result::Result<Vec<Simplex>, IoError> {
    parsed(path, simplices_from_json(&read(path)?))
}

/// Float with 17 significant digits, lossless for f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub const ESTIMATE_CSV_HEADER: &str = "cone_id,fraction,stderr,gaussian_integral,samples,seed";

pub fn estimates_csv<'a>(rows: impl IntoIterator<Item = (&'a str, &'a FractionEstimate)>) -> String {
    let mut out = String::from(ESTIMATE_CSV_HEADER);
    out.push('\n');
    for (id, e) in rows {
        writeln!(
            out,
            "{id},{},{},{},{},{}",
            fmt_f64(e.fraction),
            fmt_f64(e.stderr),
            fmt_f64(e.gaussian_integral),
            e.samples,
            e.seed
        )
        .unwrap();
    }
    out
}

pub const REPORT_CSV_HEADER: &str = "kind,leaf_id,vertex_id,value,stderr,threshold,uniform_threshold,interior,pass";

/// One row per vertex check, one per decomposition check, then a summary.
///
/// * `vertex`: value = fraction, threshold = `ρ(leaf)(d/2eπ)^{d/2}`,
///   uniform_threshold = `η_min(d/2eπ)^{d/2}`.
/// * `decomposition`: value = fraction sum, stderr = combined, threshold = 1.
/// * `summary`: vertex_id = witness, value = max valence, threshold = N,
///   uniform_threshold = η_min, pass = overall verdict.
pub fn report_csv(r: &TheoremReport) -> String {
    let mut out = String::from(REPORT_CSV_HEADER);
    out.push('\n');
    for c in &r.per_vertex_checks {
        writeln!(
            out,
            "vertex,{},{},{},{},{},{},,{}",
            c.leaf,
            c.vertex,
            fmt_f64(c.estimate.fraction),
            fmt_f64(c.estimate.stderr),
            fmt_f64(c.required_bound),
            fmt_f64(c.uniform_bound),
            c.passes()
        )
        .unwrap();
    }
    for c in &r.decomposition_checks {
        writeln!(
            out,
            "decomposition,,{},{},{},{},,{},{}",
            c.vertex,
            fmt_f64(c.fraction_sum),
            fmt_f64(c.combined_stderr),
            fmt_f64(1.0),
            c.interior,
            c.passes()
        )
        .unwrap();
    }
    writeln!(
        out,
        "summary,,{},{},,{},{},,{}",
        r.witness.0,
        r.max_observed_valence,
        fmt_f64(r.theoretical_bound),
        fmt_f64(r.eta_min),
        r.passes()
    )
    .unwrap();
    out
}

pub const TRACE_CSV_HEADER: &str = "iteration,node_id,lower_bound,incumbent,gap,eta_min";

pub fn trace_csv(rows: &[TraceRow]) -> String {
    let mut out = String::from(TRACE_CSV_HEADER);
    out.push('\n');
    for t in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            t.iteration,
            t.node_id,
            fmt_f64(t.lower_bound),
            fmt_f64(t.incumbent),
            fmt_f64(t.gap),
            fmt_f64(t.eta_min)
        )
        .unwrap();
    }
    out
}
