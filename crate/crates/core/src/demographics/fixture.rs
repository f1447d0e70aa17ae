//! Wide percent tables: one row per age class (oldest first), one column
//! per pyramid. This is the layout of the bundled sample tables and of the
//! centroid tables the CLI writes.

use std::collections::BTreeMap;
use std::io::{BufReader, Read, Write};

use super::wpp::sniff_delimiter;
use super::{
    AgeBin, AgePyramid, Catalog, Dataset, Entity, EntityKind, PyramidSeries, ReferenceData, ValueUnit, AGE_BIN_COUNT,
    REFERENCE_YEAR,
};
use crate::error::DataError;

const FIXTURE_VARIANT: &str = "Medium";

/// Splits `"Sri Lanka 2015"` into the name and a trailing year.
fn split_label(label: &str) -> (&str, Option<i32>) {
    let label = label.trim();
    if let Some((name, tail)) = label.rsplit_once(' ') {
        if tail.len() == 4 {
            if let Ok(year) = tail.parse::<i32>() {
                if (1950..=2100).contains(&year) {
                    return (name.trim(), Some(year));
                }
            }
        }
    }
    (label, None)
}

/// Fixed-width label used when writing tables (`00-04`, `05-09`, ...).
fn padded_label(bin: AgeBin) -> String {
    if bin.index() < 2 {
        let lo = bin.index() * 5;
        format!("{lo:02}-{:02}", lo + 4)
    } else {
        bin.label().to_string()
    }
}

/// Parses a wide table, resolving column names with the bundled reference data.
pub fn parse_fixture_table<R: Read>(source: R) -> Result<Vec<(String, AgePyramid)>, DataError> {
    parse_fixture_table_with(source, &ReferenceData::bundled())
}

/// Parses a wide table into percent pyramids, preserving column order.
///
/// Column labels ending in a year (`"Colombia 2015"`) set the pyramid year;
/// other labels default to 2015. Columns whose name matches a known area get
/// its code as entity id; the rest get `100_000 + column`.
pub fn parse_fixture_table_with<R: Read>(
    source: R,
    reference: &ReferenceData,
) -> Result<Vec<(String, AgePyramid)>, DataError> {
    let mut reader = BufReader::new(source);
    let delimiter = sniff_delimiter(&mut reader)?;
    let mut csv = csv::ReaderBuilder::new().delimiter(delimiter).from_reader(reader);
    let labels: Vec<String> = csv.headers()?.iter().skip(1).map(|h| h.trim().to_string()).collect();

    let mut table: BTreeMap<AgeBin, Vec<f64>> = BTreeMap::new();
    let mut record = csv::StringRecord::new();
    let mut row = 1usize;
    while csv.read_record(&mut record)? {
        row += 1;
        let class = record.get(0).unwrap_or("").trim();
        if class.is_empty() {
            continue;
        }
        let bin = AgeBin::from_label(class).ok_or_else(|| DataError::UnknownAgeLabel {
            row,
            label: class.to_string(),
        })?;
        if record.len() != labels.len() + 1 {
            return Err(DataError::Malformed {
                row,
                message: format!("expected {} columns, found {}", labels.len() + 1, record.len()),
            });
        }
        let values = record
            .iter()
            .skip(1)
            .enumerate()
            .map(|(col, v)| {
                v.trim().parse::<f64>().map_err(|_| DataError::UnparsableValue {
                    row,
                    column: labels[col].clone(),
                    value: v.to_string(),
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        if table.insert(bin, values).is_some() {
            return Err(DataError::DuplicateRow {
                row,
                key: format!("age class {bin}"),
            });
        }
    }

    if labels.is_empty() || table.is_empty() {
        return Err(DataError::Empty);
    }
    let missing: Vec<String> = AgeBin::all()
        .filter(|b| !table.contains_key(b))
        .map(|b| b.label().to_string())
        .collect();
    if !missing.is_empty() {
        return Err(DataError::MissingBin {
            key: labels.join(", "),
            missing,
        });
    }

    labels
        .iter()
        .enumerate()
        .map(|(col, label)| {
            let mut values = [0.0; AGE_BIN_COUNT];
            for (bin, row_values) in &table {
                values[bin.index()] = row_values[col];
            }
            let (name, year) = split_label(label);
            let id = reference.code_for_name(name).unwrap_or(100_000 + col as u32);
            let pyramid = AgePyramid::new(
                id,
                year.unwrap_or(REFERENCE_YEAR),
                FIXTURE_VARIANT,
                values,
                ValueUnit::Percent,
            )?;
            Ok((label.clone(), pyramid))
        })
        .collect()
}

/// Builds a catalog and series from parsed fixture columns.
pub fn fixture_dataset(columns: &[(String, AgePyramid)], reference: &ReferenceData) -> Result<Dataset, DataError> {
    let mut catalog = Catalog::new();
    let mut series = PyramidSeries::new();
    for (label, pyramid) in columns {
        let (name, _) = split_label(label);
        let id = pyramid.entity_id;
        let kind = if reference.code_for_name(name) == Some(id) {
            reference.kind_of(id)
        } else {
            EntityKind::Country
        };
        catalog.upsert(Entity {
            id,
            name: name.to_string(),
            kind,
            iso3: (kind == EntityKind::Country)
                .then(|| reference.iso3(id).map(str::to_string))
                .flatten(),
            population_2015: None,
        });
        series.insert(pyramid.clone())?;
    }
    Ok(Dataset {
        catalog,
        series,
        variant: FIXTURE_VARIANT.to_string(),
    })
}

/// Writes pyramids as a wide table, oldest class first, values to two
/// decimals.
pub fn write_fixture_table<W: Write>(sink: W, columns: &[(String, [f64; AGE_BIN_COUNT])]) -> Result<(), DataError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink);
    let mut header = vec!["Class".to_string()];
    header.extend(columns.iter().map(|(l, _)| l.clone()));
    w.write_record(&header)?;
    for bin in AgeBin::all().collect::<Vec<_>>().into_iter().rev() {
        let mut rec = vec![padded_label(bin)];
        rec.extend(columns.iter().map(|(_, v)| format!("{:.2}", v[bin.index()])));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
