//! Long-format WPP tables: one row per entity, year, variant and age group.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read};

use serde::{Deserialize, Serialize};

use super::{
    AgeBin, AgePyramid, Catalog, Dataset, Entity, EntityKind, PyramidKey, PyramidSeries, ReferenceData, ValueUnit,
    AGE_BIN_COUNT, REFERENCE_YEAR,
};
use crate::error::DataError;

/// Maps column roles to header names, plus the ingestion options that
/// depend on the file layout.
///
/// The default matches the `WPP20xx_PopulationByAgeSex_Medium.csv` layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ColumnMap {
    pub entity_id: String,
    pub entity_name: String,
    /// Projection variant column; when absent every row is taken.
    pub variant: Option<String>,
    pub year: String,
    pub age_group: String,
    pub value: String,
    /// Optional location-type column; otherwise kinds come from the area code.
    pub kind: Option<String>,
    pub unit: ValueUnit,
    /// Variant kept for projection years.
    pub target_variant: String,
    /// Years up to and including this one are estimates and may be labelled
    /// `Estimates` instead of the target variant.
    pub estimates_until: i32,
    /// `None` sniffs comma or tab from the header line.
    pub delimiter: Option<char>,
}

impl Default for ColumnMap {
    fn default() -> Self {
        Self {
            entity_id: "LocID".into(),
            entity_name: "Location".into(),
            variant: Some("Variant".into()),
            year: "Time".into(),
            age_group: "AgeGrp".into(),
            value: "PopTotal".into(),
            kind: None,
            unit: ValueUnit::Thousands,
            target_variant: "Medium".into(),
            estimates_until: REFERENCE_YEAR,
            delimiter: None,
        }
    }
}

struct Columns {
    id: usize,
    name: usize,
    variant: Option<usize>,
    year: usize,
    age: usize,
    value: usize,
    kind: Option<usize>,
}

impl Columns {
    fn locate(headers: &csv::StringRecord, map: &ColumnMap) -> Result<Self, DataError> {
        let find = |name: &str| -> Result<usize, DataError> {
            headers
                .iter()
                .position(|h| h.trim().trim_start_matches('\u{feff}') == name)
                .ok_or_else(|| DataError::MissingColumn(name.to_string()))
        };
        Ok(Self {
            id: find(&map.entity_id)?,
            name: find(&map.entity_name)?,
            variant: map.variant.as_deref().map(find).transpose()?,
            year: find(&map.year)?,
            age: find(&map.age_group)?,
            value: find(&map.value)?,
            kind: map.kind.as_deref().map(find).transpose()?,
        })
    }
}

/// Reads the header line without consuming it and guesses the delimiter.
pub(crate) fn sniff_delimiter<R: BufRead>(reader: &mut R) -> std::io::Result<u8> {
    let buf = reader.fill_buf()?;
    let line_end = buf.iter().position(|b| *b == b'\n').unwrap_or(buf.len());
    let line = &buf[..line_end];
    let tabs = line.iter().filter(|b| **b == b'\t').count();
    let commas = line.iter().filter(|b| **b == b',').count();
    Ok(if tabs > commas { b'\t' } else { b',' })
}

/// Parses a long-format table using the bundled reference data.
pub fn parse_wpp_csv<R: Read>(source: R, map: &ColumnMap) -> Result<Dataset, DataError> {
    parse_wpp_csv_with(source, map, &ReferenceData::bundled())
}

/// Parses a long-format table into one pyramid per (entity, year, variant).
pub fn parse_wpp_csv_with<R: Read>(
    source: R,
    map: &ColumnMap,
    reference: &ReferenceData,
) -> Result<Dataset, DataError> {
    let mut reader = BufReader::new(source);
    let delimiter = match map.delimiter {
        Some(c) => c as u8,
        None => sniff_delimiter(&mut reader)?,
    };
    let mut csv = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(true)
        .from_reader(reader);
    let cols = Columns::locate(csv.headers()?, map)?;

    let mut bins: BTreeMap<PyramidKey, [Option<f64>; AGE_BIN_COUNT]> = BTreeMap::new();
    let mut catalog = Catalog::new();
    let mut record = csv::StringRecord::new();
    let mut row = 1usize;
    while csv.read_record(&mut record)? {
        row += 1;
        let field = |i: usize| record.get(i).unwrap_or("").trim();
        if record.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        let year: i32 = parse_field(field(cols.year), row, &map.year)?;
        if let Some(vc) = cols.variant {
            let variant = field(vc);
            let accepted = variant.eq_ignore_ascii_case(&map.target_variant)
                || (year <= map.estimates_until && variant.eq_ignore_ascii_case("Estimates"));
            if !accepted {
                continue;
            }
        }
        if !(1950..=2100).contains(&year) {
            return Err(DataError::YearOutOfRange { row, year });
        }
        let id: u32 = parse_field(field(cols.id), row, &map.entity_id)?;
        let label = field(cols.age);
        let bin = AgeBin::from_label(label).ok_or_else(|| DataError::UnknownAgeLabel {
            row,
            label: label.to_string(),
        })?;
        let raw = field(cols.value).replace([' ', '\u{a0}'], "");
        let value: f64 = parse_field(&raw, row, &map.value)?;
        if !(value >= 0.0 && value.is_finite()) {
            return Err(DataError::UnparsableValue {
                row,
                column: map.value.clone(),
                value: raw,
            });
        }

        if catalog.get(id).is_none() {
            let kind = match cols.kind {
                Some(kc) => EntityKind::parse(field(kc)).ok_or_else(|| DataError::UnparsableValue {
                    row,
                    column: map.kind.clone().unwrap_or_default(),
                    value: field(kc).to_string(),
                })?,
                None => reference.kind_of(id),
            };
            catalog.upsert(Entity {
                id,
                name: field(cols.name).to_string(),
                kind,
                iso3: (kind == EntityKind::Country)
                    .then(|| reference.iso3(id).map(str::to_string))
                    .flatten(),
                population_2015: None,
            });
        }

        let key = PyramidKey::new(id, year, &map.target_variant);
        let slot = &mut bins.entry(key.clone()).or_insert([None; AGE_BIN_COUNT])[bin.index()];
        if slot.is_some() {
            return Err(DataError::DuplicateRow {
                row,
                key: format!("{key} bin {bin}"),
            });
        }
        *slot = Some(value);
    }

    if bins.is_empty() {
        return Err(DataError::Empty);
    }

    let mut series = PyramidSeries::new();
    for (key, values) in bins {
        let missing: Vec<String> = AgeBin::all()
            .filter(|b| values[b.index()].is_none())
            .map(|b| b.label().to_string())
            .collect();
        if !missing.is_empty() {
            let name = catalog.get(key.entity_id).map(|e| e.name.as_str()).unwrap_or("");
            return Err(DataError::MissingBin {
                key: format!("{name} {key}"),
                missing,
            });
        }
        let values = values.map(|v| v.unwrap_or_default());
        series.insert(AgePyramid::new(key.entity_id, key.year, key.variant, values, map.unit)?)?;
    }

    let ids: Vec<u32> = catalog.iter().map(|e| e.id).collect();
    for id in ids {
        let population = series
            .get(id, REFERENCE_YEAR, &map.target_variant)
            .and_then(AgePyramid::persons);
        if let Some(mut e) = catalog.get(id).cloned() {
            e.population_2015 = population;
            catalog.upsert(e);
        }
    }

    Ok(Dataset {
        catalog,
        series,
        variant: map.target_variant.clone(),
    })
}

fn parse_field<T: std::str::FromStr>(s: &str, row: usize, column: &str) -> Result<T, DataError> {
    s.parse().map_err(|_| DataError::UnparsableValue {
        row,
        column: column.to_string(),
        value: s.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str =
        "LocID,Location,VarID,Variant,Time,MidPeriod,AgeGrp,AgeGrpStart,AgeGrpSpan,PopMale,PopFemale,PopTotal\n";

    fn rows(id: u32, name: &str, variant: &str, year: i32, skip: Option<usize>) -> String {
        let mut out = String::new();
        for bin in AgeBin::all() {
            if Some(bin.index()) == skip {
                continue;
            }
            let start = bin.index() * 5;
            let total = 100.0 + bin.index() as f64;
            out.push_str(&format!(
                "{id},{name},2,{variant},{year},{year}.5,{},{start},5,0,0,{total}\n",
                bin.label()
            ));
        }
        out
    }

    #[test]
    fn minimal_slice_gives_one_pyramid() {
        let csv = format!("{HEADER}{}", rows(900, "World", "Medium", 2015, None));
        let ds = parse_wpp_csv(csv.as_bytes(), &ColumnMap::default()).unwrap();
        assert_eq!(ds.series.len(), 1);
        let p = ds.pyramid(900, 2015).unwrap();
        assert_eq!(p.values()[0], 100.0);
        assert_eq!(p.values()[20], 120.0);
        let world = ds.catalog.get(900).unwrap();
        assert_eq!(world.kind, EntityKind::World);
        assert_eq!(world.population_2015, Some(2310.0 * 1000.0));
    }

    #[test]
    fn missing_bin_names_the_key() {
        let csv = format!("{HEADER}{}", rows(170, "Colombia", "Medium", 2015, Some(20)));
        match parse_wpp_csv(csv.as_bytes(), &ColumnMap::default()) {
            Err(DataError::MissingBin { key, missing }) => {
                assert!(key.contains("Colombia"));
                assert!(key.contains("2015"));
                assert_eq!(missing, vec!["100+".to_string()]);
            }
            other => panic!("expected MissingBin, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_row_is_rejected() {
        let mut csv = format!("{HEADER}{}", rows(170, "Colombia", "Medium", 2015, None));
        csv.push_str("170,Colombia,2,Medium,2015,2015.5,0-4,0,5,0,0,1\n");
        assert!(matches!(
            parse_wpp_csv(csv.as_bytes(), &ColumnMap::default()),
            Err(DataError::DuplicateRow { row: 23, .. })
        ));
    }

    #[test]
    fn unparsable_value_reports_row() {
        let mut csv = format!("{HEADER}{}", rows(170, "Colombia", "Medium", 2015, Some(3)));
        csv.push_str("170,Colombia,2,Medium,2015,2015.5,15-19,15,5,0,0,abc\n");
        match parse_wpp_csv(csv.as_bytes(), &ColumnMap::default()) {
            Err(DataError::UnparsableValue { row, value, .. }) => {
                assert_eq!(row, 22);
                assert_eq!(value, "abc");
            }
            other => panic!("expected UnparsableValue, got {other:?}"),
        }
    }

    #[test]
    fn unknown_age_label_is_rejected() {
        let csv = format!("{HEADER}170,Colombia,2,Medium,2015,2015.5,80+,80,5,0,0,1\n");
        assert!(matches!(
            parse_wpp_csv(csv.as_bytes(), &ColumnMap::default()),
            Err(DataError::UnknownAgeLabel { row: 2, .. })
        ));
    }

    #[test]
    fn variants_are_filtered() {
        let csv = format!(
            "{HEADER}{}{}{}{}",
            rows(900, "World", "Estimates", 1990, None),
            rows(900, "World", "Medium", 2050, None),
            rows(900, "World", "High", 2050, None),
            rows(900, "World", "Estimates", 2050, None),
        );
        let ds = parse_wpp_csv(csv.as_bytes(), &ColumnMap::default()).unwrap();
        assert_eq!(ds.series.years(900), vec![1990, 2050]);
        assert!(ds.pyramid(900, 1990).is_some());
    }

    #[test]
    fn tab_delimited_with_custom_columns() {
        let mut csv = String::from("code\tarea\tyear\tage\tpersons\ttype\n");
        for bin in AgeBin::all() {
            csv.push_str(&format!(
                "1503\tHigh-income countries\t2015\t{}\t5\tIncome Group\n",
                bin.label()
            ));
        }
        let map = ColumnMap {
            entity_id: "code".into(),
            entity_name: "area".into(),
            variant: None,
            year: "year".into(),
            age_group: "age".into(),
            value: "persons".into(),
            kind: Some("type".into()),
            unit: ValueUnit::Persons,
            ..ColumnMap::default()
        };
        let ds = parse_wpp_csv(csv.as_bytes(), &map).unwrap();
        let e = ds.catalog.get(1503).unwrap();
        assert_eq!(e.kind, EntityKind::IncomeCategory);
        assert_eq!(e.population_2015, Some(105.0));
    }

    #[test]
    fn missing_column_is_reported() {
        let csv = "LocID,Location\n1,A\n";
        assert!(matches!(
            parse_wpp_csv(csv.as_bytes(), &ColumnMap::default()),
            Err(DataError::MissingColumn(_))
        ));
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(matches!(
            parse_wpp_csv(HEADER.as_bytes(), &ColumnMap::default()),
            Err(DataError::Empty)
        ));
    }

    #[test]
    fn countries_get_iso3() {
        let csv = format!("{HEADER}{}", rows(170, "Colombia", "Medium", 2015, None));
        let ds = parse_wpp_csv(csv.as_bytes(), &ColumnMap::default()).unwrap();
        assert_eq!(ds.catalog.get(170).unwrap().iso3.as_deref(), Some("COL"));
    }
}
