use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use serde::Deserialize;

use super::{EntityKind, WORLD_ID};
use crate::error::DataError;

/// Environment variable pointing at a directory that overrides the bundled
/// `m49_to_iso3.csv` and `wpp_aggregates.csv`.
pub const DATA_DIR_ENV: &str = "POPCODA_DATA_DIR";

const BUNDLED_ISO3: &str = include_str!("../../data/m49_to_iso3.csv");
const BUNDLED_AGGREGATES: &str = include_str!("../../data/wpp_aggregates.csv");

#[derive(Debug, Deserialize)]
struct Iso3Row {
    m49: u32,
    iso3: String,
    name: String,
}

#[derive(Debug, Deserialize)]
struct AggregateRow {
    code: u32,
    name: String,
    kind: String,
}

/// Static lookup tables: M49 code to ISO3 and the UN aggregate codes.
#[derive(Debug, Clone, Default)]
pub struct ReferenceData {
    iso3: BTreeMap<u32, (String, String)>,
    aggregates: BTreeMap<u32, (String, EntityKind)>,
}

impl ReferenceData {
    /// The tables shipped with the crate.
    pub fn bundled() -> Self {
        Self::from_readers(BUNDLED_ISO3.as_bytes(), BUNDLED_AGGREGATES.as_bytes())
            .expect("bundled reference tables are well formed")
    }

    /// Reads `m49_to_iso3.csv` and `wpp_aggregates.csv` from `dir`; either
    /// file falls back to the bundled copy when absent.
    pub fn load(dir: &Path) -> Result<Self, DataError> {
        let iso3_path = dir.join("m49_to_iso3.csv");
        let agg_path = dir.join("wpp_aggregates.csv");
        let iso3: Box<dyn std::io::Read> = if iso3_path.exists() {
            Box::new(File::open(iso3_path)?)
        } else {
            Box::new(BUNDLED_ISO3.as_bytes())
        };
        let agg: Box<dyn std::io::Read> = if agg_path.exists() {
            Box::new(File::open(agg_path)?)
        } else {
            Box::new(BUNDLED_AGGREGATES.as_bytes())
        };
        Self::from_readers(iso3, agg)
    }

    /// Honors [`DATA_DIR_ENV`] when set.
    pub fn from_env() -> Result<Self, DataError> {
        match std::env::var_os(DATA_DIR_ENV) {
            Some(dir) => Self::load(Path::new(&dir)),
            None => Ok(Self::bundled()),
        }
    }

    pub fn from_readers<A: std::io::Read, B: std::io::Read>(iso3: A, aggregates: B) -> Result<Self, DataError> {
        let mut out = Self::default();
        for row in csv::Reader::from_reader(iso3).deserialize() {
            let row: Iso3Row = row?;
            out.iso3.insert(row.m49, (row.iso3, row.name));
        }
        for (i, row) in csv::Reader::from_reader(aggregates).deserialize().enumerate() {
            let row: AggregateRow = row?;
            let kind = EntityKind::parse(&row.kind).ok_or_else(|| DataError::Malformed {
                row: i + 2,
                message: format!("unknown entity kind {:?}", row.kind),
            })?;
            out.aggregates.insert(row.code, (row.name, kind));
        }
        Ok(out)
    }

    pub fn iso3(&self, m49: u32) -> Option<&str> {
        self.iso3.get(&m49).map(|(iso, _)| iso.as_str())
    }

    /// Kind implied by an area code: listed aggregates use their recorded
    /// kind, other codes from 900 up are treated as geographic regions, and
    /// everything else is a country.
    pub fn kind_of(&self, code: u32) -> EntityKind {
        if code == WORLD_ID {
            return EntityKind::World;
        }
        match self.aggregates.get(&code) {
            Some((_, kind)) => *kind,
            None if code >= 900 && !self.iso3.contains_key(&code) => EntityKind::GeographicRegion,
            None => EntityKind::Country,
        }
    }

    /// Finds an area code from a display name (countries and aggregates).
    pub fn code_for_name(&self, name: &str) -> Option<u32> {
        let name = name.trim();
        self.aggregates
            .iter()
            .find(|(_, (n, _))| n.eq_ignore_ascii_case(name))
            .map(|(c, _)| *c)
            .or_else(|| {
                self.iso3
                    .iter()
                    .find(|(_, (_, n))| n.eq_ignore_ascii_case(name))
                    .map(|(c, _)| *c)
            })
    }
}
