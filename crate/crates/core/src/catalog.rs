//! Catalog file handling.
//!
//! A catalog is a single human-readable JSON document carrying Bell
//! inequality descriptors and graph-family constants (critical efficiencies
//! and published `(eta, nu)` rows) for families whose graphs are too large
//! to store explicitly. Serialization is canonical: fixed key order and
//! shortest-round-trip float formatting, so that serialize -> load ->
//! serialize is byte-identical.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::GraphCatalogEntry;

/// Version this crate reads and writes.
pub const FORMAT_VERSION: u32 = 1;

/// The catalog shipped with the crate: the CHSH descriptor, the published
/// graph-family table, and a small explicit demo graph.
pub const DEFAULT_CATALOG_JSON: &str = include_str!("../data/catalog.json");

/// Descriptor of a Bell inequality family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityEntry {
    pub name: String,
    /// Family tag, e.g. "chsh" or "pnp-chsh".
    pub family: String,
    pub local_bound: f64,
    pub algebraic_bound: f64,
    pub num_contexts: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
}

impl InequalityEntry {
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::Catalog("inequality with empty name".into()));
        }
        if !self.local_bound.is_finite() || !self.algebraic_bound.is_finite() {
            return Err(Error::Catalog(format!(
                "{}: bounds must be finite",
                self.name
            )));
        }
        if self.local_bound > self.algebraic_bound {
            return Err(Error::Catalog(format!(
                "{}: local bound {} exceeds algebraic bound {}",
                self.name, self.local_bound, self.algebraic_bound
            )));
        }
        if self.num_contexts == 0 {
            return Err(Error::Catalog(format!("{}: no contexts", self.name)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Catalog {
    pub format_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
    pub inequalities: Vec<InequalityEntry>,
    pub graphs: Vec<GraphCatalogEntry>,
}

impl Catalog {
    /// Parses and validates a catalog from its JSON text.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let catalog: Catalog = serde_json::from_str(text)?;
        catalog.validate()?;
        Ok(catalog)
    }

    /// Canonical serialization: pretty two-space indentation, declaration
    /// key order, trailing newline.
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("catalog serializes");
        s.push('\n');
        s
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_json_string())?)
    }

    /// The catalog shipped with the crate.
    pub fn builtin() -> Self {
        Self::from_json_str(DEFAULT_CATALOG_JSON).expect("shipped catalog is valid")
    }

    /// Structural validation: format version, unique names, per-entry type
    /// invariants, and count consistency for explicit graphs.
    pub fn validate(&self) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Catalog(format!(
                "unsupported format_version {} (expected {FORMAT_VERSION})",
                self.format_version
            )));
        }
        let mut names = BTreeSet::new();
        for entry in &self.inequalities {
            entry.validate()?;
            if !names.insert(entry.name.clone()) {
                return Err(Error::Catalog(format!("duplicate name {}", entry.name)));
            }
        }
        for entry in &self.graphs {
            entry.validate()?;
            if !names.insert(entry.name.clone()) {
                return Err(Error::Catalog(format!("duplicate name {}", entry.name)));
            }
            if let (Some(v), Some(e)) = (entry.vertices, entry.edge_count) {
                let m = v as f64 + 2.0 * e as f64;
                if (m - entry.total_contexts).abs() > 1e-9 {
                    return Err(Error::Catalog(format!(
                        "{}: total_contexts {} does not match |V| + 2|E| = {m}",
                        entry.name, entry.total_contexts
                    )));
                }
            }
            if let (Some(c), Some(q)) = (entry.independence, entry.quantum) {
                if !(f64::from(c) < q) {
                    return Err(Error::Catalog(format!(
                        "{}: independence {c} must be below quantum value {q}",
                        entry.name
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn find_graph(&self, name: &str) -> Option<&GraphCatalogEntry> {
        self.graphs
            .iter()
            .find(|g| g.name.eq_ignore_ascii_case(name))
    }

    pub fn find_inequality(&self, name: &str) -> Option<&InequalityEntry> {
        self.inequalities
            .iter()
            .find(|g| g.name.eq_ignore_ascii_case(name))
    }
}
