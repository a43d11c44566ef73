//! Named cores, materials and the litz strand catalog.
//!
//! The bundled tables are compiled in; a scenario may point at its own files
//! instead.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::magnetics::{CoreGeometry, MaterialParams};

const BUNDLED_LIBRARY: &str = include_str!("../data/cores.json");
const BUNDLED_CATALOG: &str = include_str!("../data/strand_catalog.json");

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LibraryEntry {
    Core {
        source: String,
        params: CoreGeometry,
    },
    Material {
        source: String,
        params: MaterialParams,
    },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Library {
    pub entries: BTreeMap<String, LibraryEntry>,
}

impl Library {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_LIBRARY).expect("bundled library is valid")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let entries: BTreeMap<String, LibraryEntry> = serde_json::from_str(text)?;
        for (name, entry) in &entries {
            match entry {
                LibraryEntry::Core { params, .. } => {
                    params.validate(&format!("library[{name}]"))?
                }
                LibraryEntry::Material { params, .. } => {
                    params.validate(&format!("library[{name}]"))?
                }
            }
        }
        Ok(Library { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn core(&self, name: &str) -> Option<&CoreGeometry> {
        match self.entries.get(name) {
            Some(LibraryEntry::Core { params, .. }) => Some(params),
            _ => None,
        }
    }

    pub fn material(&self, name: &str) -> Option<&MaterialParams> {
        match self.entries.get(name) {
            Some(LibraryEntry::Material { params, .. }) => Some(params),
            _ => None,
        }
    }
}

/// Strand diameters in metres.
pub fn bundled_strand_catalog() -> Vec<f64> {
    parse_strand_catalog(BUNDLED_CATALOG).expect("bundled catalog is valid")
}

pub fn parse_strand_catalog(text: &str) -> Result<Vec<f64>> {
    let list: Vec<f64> = serde_json::from_str(text)?;
    if let Some(i) = list.iter().position(|d| !(*d > 0.0 && d.is_finite())) {
        return Err(Error::validation(
            format!("catalog[{i}]"),
            "diameter must be > 0",
        ));
    }
    Ok(list)
}

pub fn load_strand_catalog(path: &Path) -> Result<Vec<f64>> {
    parse_strand_catalog(&std::fs::read_to_string(path)?)
}
