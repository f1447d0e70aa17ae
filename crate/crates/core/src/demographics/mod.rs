//! Population age structures and the entity catalog.
//!
//! Pyramids always carry 21 quinquennial bins, youngest first
//! (`0-4`, `5-9`, ..., `95-99`, `100+`).

mod fixture;
mod reference;
mod wpp;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::coda::{self, Composition};
use crate::error::{CodaError, DataError};

pub use fixture::{fixture_dataset, parse_fixture_table, parse_fixture_table_with, write_fixture_table};
pub use reference::{ReferenceData, DATA_DIR_ENV};
pub use wpp::{parse_wpp_csv, parse_wpp_csv_with, ColumnMap};

/// Number of five-year age groups.
pub const AGE_BIN_COUNT: usize = 21;

/// Minimum 2015 population for a country to be analysed.
pub const DEFAULT_MIN_POPULATION: f64 = 90_000.0;

pub const REFERENCE_YEAR: i32 = 2015;

/// Area code the UN uses for the world aggregate.
pub const WORLD_ID: u32 = 900;

/// Zero-replacement delta for two-decimal percent tables, in percentage points.
pub const FIXTURE_DELTA: f64 = 0.005;

const AGE_LABELS: [&str; AGE_BIN_COUNT] = [
    "0-4", "5-9", "10-14", "15-19", "20-24", "25-29", "30-34", "35-39", "40-44", "45-49", "50-54", "55-59", "60-64",
    "65-69", "70-74", "75-79", "80-84", "85-89", "90-94", "95-99", "100+",
];

/// One five-year age group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgeBin(u8);

impl AgeBin {
    pub fn new(index: usize) -> Option<Self> {
        (index < AGE_BIN_COUNT).then_some(Self(index as u8))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn label(self) -> &'static str {
        AGE_LABELS[self.index()]
    }

    /// Parses labels such as `0-4`, `00-04`, `05-09`, `100+` or `100 +`.
    pub fn from_label(label: &str) -> Option<Self> {
        let compact: String = label.chars().filter(|c| !c.is_whitespace()).collect();
        let compact = compact.replace(['\u{2013}', '\u{2014}'], "-");
        let normalize = |s: &str| -> Option<u32> { s.parse::<u32>().ok() };
        let index = if let Some(lo) = compact.strip_suffix('+') {
            (normalize(lo)? == 100).then_some(20)?
        } else {
            let (lo, hi) = compact.split_once('-')?;
            let (lo, hi) = (normalize(lo)?, normalize(hi)?);
            if lo % 5 != 0 || hi != lo + 4 || lo > 95 {
                return None;
            }
            (lo / 5) as usize
        };
        Self::new(index)
    }

    pub fn all() -> impl Iterator<Item = AgeBin> {
        (0..AGE_BIN_COUNT).map(|i| AgeBin(i as u8))
    }
}

impl fmt::Display for AgeBin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityKind {
    Country,
    GeographicRegion,
    UnDevelopmentCategory,
    IncomeCategory,
    World,
}

impl EntityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EntityKind::Country => "country",
            EntityKind::GeographicRegion => "geographic_region",
            EntityKind::UnDevelopmentCategory => "un_development_category",
            EntityKind::IncomeCategory => "income_category",
            EntityKind::World => "world",
        }
    }

    /// Accepts the snake_case names above and the location-type labels used
    /// in recent WPP files ("Country/Area", "Income Group", ...).
    pub fn parse(s: &str) -> Option<Self> {
        let key: String = s
            .trim()
            .to_ascii_lowercase()
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
            .collect();
        match key.as_str() {
            "country" | "country_area" | "countries" => Some(EntityKind::Country),
            "geographic_region" | "region" | "subregion" | "sdg_region" | "sdg_subregion" => {
                Some(EntityKind::GeographicRegion)
            }
            "un_development_category" | "development_group" => Some(EntityKind::UnDevelopmentCategory),
            "income_category" | "income_group" => Some(EntityKind::IncomeCategory),
            "world" => Some(EntityKind::World),
            _ => None,
        }
    }

    /// The four sections a similarity ranking is split into.
    pub fn sections() -> [EntityKind; 4] {
        [
            EntityKind::Country,
            EntityKind::GeographicRegion,
            EntityKind::UnDevelopmentCategory,
            EntityKind::IncomeCategory,
        ]
    }
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entity {
    pub id: u32,
    pub name: String,
    pub kind: EntityKind,
    pub iso3: Option<String>,
    /// Persons.
    pub population_2015: Option<f64>,
}

/// Unit of the raw values stored in a pyramid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueUnit {
    Persons,
    Thousands,
    Percent,
}

impl ValueUnit {
    /// Factor converting a value to persons, when the unit is a count.
    pub fn persons_factor(self) -> Option<f64> {
        match self {
            ValueUnit::Persons => Some(1.0),
            ValueUnit::Thousands => Some(1000.0),
            ValueUnit::Percent => None,
        }
    }
}

/// Age structure of one entity in one year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgePyramid {
    pub entity_id: u32,
    pub year: i32,
    pub variant: String,
    values: [f64; AGE_BIN_COUNT],
    pub unit: ValueUnit,
}

impl AgePyramid {
    pub fn new(
        entity_id: u32,
        year: i32,
        variant: impl Into<String>,
        values: [f64; AGE_BIN_COUNT],
        unit: ValueUnit,
    ) -> Result<Self, DataError> {
        let variant = variant.into();
        let key = PyramidKey::new(entity_id, year, &variant).to_string();
        if !(1950..=2100).contains(&year) {
            return Err(DataError::YearOutOfRange { row: 0, year });
        }
        if let Some(bad) = values.iter().position(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(DataError::Malformed {
                row: 0,
                message: format!("{key}: bin {} has invalid value {}", AGE_LABELS[bad], values[bad]),
            });
        }
        if !values.iter().any(|v| *v > 0.0) {
            return Err(DataError::AllZeroPyramid { key });
        }
        Ok(Self {
            entity_id,
            year,
            variant,
            values,
            unit,
        })
    }

    /// Raw values, youngest bin first.
    pub fn values(&self) -> &[f64; AGE_BIN_COUNT] {
        &self.values
    }

    pub fn value(&self, bin: AgeBin) -> f64 {
        self.values[bin.index()]
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Shares in percent, without zero replacement.
    pub fn percentages(&self) -> [f64; AGE_BIN_COUNT] {
        let total = self.total();
        self.values.map(|v| 100.0 * v / total)
    }

    /// Total in persons, when the unit is a count.
    pub fn persons(&self) -> Option<f64> {
        self.unit.persons_factor().map(|f| f * self.total())
    }

    pub fn has_zero(&self) -> bool {
        self.values.contains(&0.0)
    }

    pub fn key(&self) -> PyramidKey {
        PyramidKey::new(self.entity_id, self.year, &self.variant)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PyramidKey {
    pub entity_id: u32,
    pub year: i32,
    pub variant: String,
}

impl PyramidKey {
    pub fn new(entity_id: u32, year: i32, variant: &str) -> Self {
        Self {
            entity_id,
            year,
            variant: variant.to_string(),
        }
    }
}

impl fmt::Display for PyramidKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.entity_id, self.year, self.variant)
    }
}

/// Pyramids keyed by (entity, year, variant).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PyramidSeries {
    pyramids: BTreeMap<PyramidKey, AgePyramid>,
}

impl PyramidSeries {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a pyramid; a second pyramid for the same key is rejected.
    pub fn insert(&mut self, pyramid: AgePyramid) -> Result<(), DataError> {
        let key = pyramid.key();
        if self.pyramids.contains_key(&key) {
            return Err(DataError::DuplicateRow {
                row: 0,
                key: key.to_string(),
            });
        }
        self.pyramids.insert(key, pyramid);
        Ok(())
    }

    pub fn get(&self, entity_id: u32, year: i32, variant: &str) -> Option<&AgePyramid> {
        self.pyramids.get(&PyramidKey::new(entity_id, year, variant))
    }

    /// First pyramid for the entity-year in variant order.
    pub fn get_any_variant(&self, entity_id: u32, year: i32) -> Option<&AgePyramid> {
        self.pyramids
            .range(PyramidKey::new(entity_id, year, "")..)
            .next()
            .filter(|(k, _)| k.entity_id == entity_id && k.year == year)
            .map(|(_, p)| p)
    }

    pub fn iter(&self) -> impl Iterator<Item = &AgePyramid> {
        self.pyramids.values()
    }

    pub fn len(&self) -> usize {
        self.pyramids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pyramids.is_empty()
    }

    /// Years available for one entity, ascending and deduplicated.
    pub fn years(&self, entity_id: u32) -> Vec<i32> {
        let mut years: Vec<i32> = self
            .pyramids
            .keys()
            .filter(|k| k.entity_id == entity_id)
            .map(|k| k.year)
            .collect();
        years.dedup();
        years
    }
}

/// Entities keyed by area code.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Catalog {
    entities: BTreeMap<u32, Entity>,
}

impl Catalog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts or replaces the entity with the same id.
    pub fn upsert(&mut self, entity: Entity) {
        self.entities.insert(entity.id, entity);
    }

    pub fn get(&self, id: u32) -> Option<&Entity> {
        self.entities.get(&id)
    }

    pub fn by_name(&self, name: &str) -> Option<&Entity> {
        self.entities.values().find(|e| e.name == name)
    }

    /// Looks up by numeric id, falling back to an exact or case-insensitive name.
    pub fn resolve(&self, key: &str) -> Option<&Entity> {
        if let Ok(id) = key.trim().parse::<u32>() {
            if let Some(e) = self.get(id) {
                return Some(e);
            }
        }
        self.by_name(key)
            .or_else(|| self.entities.values().find(|e| e.name.eq_ignore_ascii_case(key.trim())))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Entity> {
        self.entities.values()
    }

    pub fn of_kind(&self, kind: EntityKind) -> impl Iterator<Item = &Entity> {
        self.entities.values().filter(move |e| e.kind == kind)
    }

    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    /// Keeps only the listed entities.
    pub fn restrict(&self, keep: &[Entity]) -> Catalog {
        let mut out = Catalog::new();
        for e in keep {
            if let Some(known) = self.get(e.id) {
                out.upsert(known.clone());
            }
        }
        out
    }
}

impl FromIterator<Entity> for Catalog {
    fn from_iter<T: IntoIterator<Item = Entity>>(iter: T) -> Self {
        let mut c = Catalog::new();
        for e in iter {
            c.upsert(e);
        }
        c
    }
}

/// An entity catalog plus the pyramids that belong to it.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    pub catalog: Catalog,
    pub series: PyramidSeries,
    /// Variant under which every pyramid is stored.
    pub variant: String,
}

impl Dataset {
    pub fn pyramid(&self, entity_id: u32, year: i32) -> Option<&AgePyramid> {
        self.series.get(entity_id, year, &self.variant)
    }

    /// Drops countries below `minimum` persons in 2015; see
    /// [`filter_population_threshold`].
    pub fn with_min_population(&self, minimum: f64) -> Dataset {
        let kept = filter_population_threshold(&self.catalog, &self.series, minimum);
        Dataset {
            catalog: self.catalog.restrict(&kept),
            series: self.series.clone(),
            variant: self.variant.clone(),
        }
    }
}

/// Removes countries with fewer than `minimum` inhabitants in 2015.
///
/// Aggregates are always kept. A missing `population_2015` is derived from
/// the 2015 pyramid when its unit is a count; countries whose population
/// cannot be established at all (percent-only tables) are kept.
pub fn filter_population_threshold(catalog: &Catalog, series: &PyramidSeries, minimum: f64) -> Vec<Entity> {
    catalog
        .iter()
        .filter(|e| {
            if e.kind != EntityKind::Country {
                return true;
            }
            let population = e.population_2015.or_else(|| {
                series
                    .get_any_variant(e.id, REFERENCE_YEAR)
                    .and_then(AgePyramid::persons)
            });
            population.is_none_or(|p| p >= minimum)
        })
        .cloned()
        .collect()
}

/// How the zero-replacement delta is chosen for a pyramid.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Delta {
    /// Half the last printed digit (0.005) for percent tables; half the
    /// smallest nonzero value for counts.
    #[default]
    Auto,
    /// A fixed delta in the pyramid's own units.
    Fixed(f64),
}

impl Delta {
    pub fn resolve(self, pyramid: &AgePyramid) -> f64 {
        match self {
            Delta::Fixed(d) => d,
            Delta::Auto => match pyramid.unit {
                ValueUnit::Percent => FIXTURE_DELTA,
                _ => {
                    let smallest = pyramid
                        .values()
                        .iter()
                        .copied()
                        .filter(|v| *v > 0.0)
                        .fold(f64::INFINITY, f64::min);
                    smallest / 2.0
                }
            },
        }
    }
}

impl fmt::Display for Delta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Delta::Auto => f.write_str("auto"),
            Delta::Fixed(d) => write!(f, "{d}"),
        }
    }
}

impl std::str::FromStr for Delta {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Delta::Auto);
        }
        match s.parse::<f64>() {
            Ok(d) if d > 0.0 && d.is_finite() => Ok(Delta::Fixed(d)),
            _ => Err(format!("delta must be \"auto\" or a positive number, got {s:?}")),
        }
    }
}

/// Zero replacement followed by closure to 100.
pub fn pyramid_to_composition(p: &AgePyramid, delta: f64) -> Result<Composition, CodaError> {
    let replaced = coda::zero_replace(p.values(), delta)?;
    coda::closure(&replaced, 100.0)
}

/// Like [`pyramid_to_composition`] with a delta policy; also reports whether
/// any zero was replaced.
pub fn pyramid_composition(p: &AgePyramid, delta: Delta) -> Result<(Composition, bool), CodaError> {
    let c = pyramid_to_composition(p, delta.resolve(p))?;
    Ok((c, p.has_zero()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pyramid(id: u32, values: [f64; AGE_BIN_COUNT], unit: ValueUnit) -> AgePyramid {
        AgePyramid::new(id, 2015, "Medium", values, unit).unwrap()
    }

    #[test]
    fn age_bin_labels_round_trip() {
        for bin in AgeBin::all() {
            assert_eq!(AgeBin::from_label(bin.label()), Some(bin));
        }
        assert_eq!(AgeBin::from_label("00-04").map(AgeBin::index), Some(0));
        assert_eq!(AgeBin::from_label("05-09").map(AgeBin::index), Some(1));
        assert_eq!(AgeBin::from_label("100 +").map(AgeBin::index), Some(20));
        assert_eq!(AgeBin::from_label("80+"), None);
        assert_eq!(AgeBin::from_label("0-5"), None);
        assert_eq!(AgeBin::from_label("100-104"), None);
        assert_eq!(AgeBin::from_label("total"), None);
    }

    #[test]
    fn pyramid_rejects_invalid() {
        assert!(matches!(
            AgePyramid::new(1, 2015, "Medium", [0.0; 21], ValueUnit::Persons),
            Err(DataError::AllZeroPyramid { .. })
        ));
        assert!(matches!(
            AgePyramid::new(1, 1949, "Medium", [1.0; 21], ValueUnit::Persons),
            Err(DataError::YearOutOfRange { year: 1949, .. })
        ));
        let mut v = [1.0; 21];
        v[3] = -1.0;
        assert!(AgePyramid::new(1, 2015, "Medium", v, ValueUnit::Persons).is_err());
    }

    #[test]
    fn series_rejects_duplicate_keys() {
        let mut s = PyramidSeries::new();
        s.insert(pyramid(4, [1.0; 21], ValueUnit::Persons)).unwrap();
        assert!(matches!(
            s.insert(pyramid(4, [2.0; 21], ValueUnit::Persons)),
            Err(DataError::DuplicateRow { .. })
        ));
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn uniform_pyramid_composition() {
        let c = pyramid_to_composition(&pyramid(1, [7.0; 21], ValueUnit::Persons), 0.5).unwrap();
        assert_eq!(c.dim(), 21);
        for p in c.parts() {
            assert_relative_eq!(*p, 100.0 / 21.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn persons_and_thousands_agree() {
        let mut v = [0.0; 21];
        for (i, x) in v.iter_mut().enumerate() {
            *x = 1000.0 + 37.0 * i as f64;
        }
        let persons = pyramid(1, v, ValueUnit::Persons);
        let thousands = pyramid(1, v.map(|x| x / 1000.0), ValueUnit::Thousands);
        let a = pyramid_composition(&persons, Delta::Auto).unwrap().0;
        let b = pyramid_composition(&thousands, Delta::Auto).unwrap().0;
        for (x, y) in a.parts().iter().zip(b.parts()) {
            assert_relative_eq!(x, y, max_relative = 1e-12);
        }
    }

    #[test]
    fn auto_delta_by_unit() {
        let mut v = [4.0; 21];
        v[20] = 0.0;
        v[19] = 1.0;
        assert_eq!(Delta::Auto.resolve(&pyramid(1, v, ValueUnit::Persons)), 0.5);
        assert_eq!(Delta::Auto.resolve(&pyramid(1, v, ValueUnit::Percent)), FIXTURE_DELTA);
        assert_eq!(Delta::Fixed(0.1).resolve(&pyramid(1, v, ValueUnit::Percent)), 0.1);
        let (c, replaced) = pyramid_composition(&pyramid(1, v, ValueUnit::Persons), Delta::Auto).unwrap();
        assert!(replaced);
        assert!(c.parts().iter().all(|p| *p > 0.0));
    }

    #[test]
    fn delta_parsing() {
        assert_eq!("auto".parse::<Delta>(), Ok(Delta::Auto));
        assert_eq!("0.005".parse::<Delta>(), Ok(Delta::Fixed(0.005)));
        assert!("-1".parse::<Delta>().is_err());
        assert!("x".parse::<Delta>().is_err());
    }

    fn catalog_with(pops: &[(u32, EntityKind, Option<f64>)]) -> Catalog {
        pops.iter()
            .map(|&(id, kind, population_2015)| Entity {
                id,
                name: format!("E{id}"),
                kind,
                iso3: None,
                population_2015,
            })
            .collect()
    }

    #[test]
    fn threshold_filter() {
        let catalog = catalog_with(&[
            (1, EntityKind::Country, Some(50_000.0)),
            (2, EntityKind::Country, Some(90_000.0)),
            (3, EntityKind::Country, None),
            (900, EntityKind::World, Some(7.3e9)),
            (903, EntityKind::GeographicRegion, Some(1.0)),
        ]);
        let mut series = PyramidSeries::new();
        // 21 * 4 thousand = 84,000 persons
        series.insert(pyramid(3, [4.0; 21], ValueUnit::Thousands)).unwrap();
        let ids = |m: f64| -> Vec<u32> {
            filter_population_threshold(&catalog, &series, m)
                .into_iter()
                .map(|e| e.id)
                .collect()
        };
        assert_eq!(ids(90_000.0), vec![2, 900, 903]);
        assert_eq!(ids(0.0), vec![1, 2, 3, 900, 903]);
        assert_eq!(ids(1e10), vec![900, 903]);
    }

    #[test]
    fn entity_kind_parsing() {
        assert_eq!(EntityKind::parse("Country/Area"), Some(EntityKind::Country));
        assert_eq!(EntityKind::parse("Income Group"), Some(EntityKind::IncomeCategory));
        assert_eq!(
            EntityKind::parse("Development Group"),
            Some(EntityKind::UnDevelopmentCategory)
        );
        assert_eq!(
            EntityKind::parse("geographic_region"),
            Some(EntityKind::GeographicRegion)
        );
        assert_eq!(EntityKind::parse("World"), Some(EntityKind::World));
        assert_eq!(EntityKind::parse("planet"), None);
    }
}
