//! Pipeline commands and their file outputs.
//!
//! Each `cmd_*` function loads data according to a [`RunConfig`], runs one
//! analysis and writes its tables into the output directory. Errors carry
//! the process exit status: 1 for data problems, 2 for configuration
//! problems.

mod svg;

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::cluster::{
    cluster_centroids, cut_tree, pairwise_distance_matrix, ward_linkage, CentroidMode, ClusterAssignment, Dendrogram,
    DendrogramNode, DEFAULT_CLUSTERS,
};
use crate::coda::Composition;
use crate::demographics::{
    fixture_dataset, parse_fixture_table_with, parse_wpp_csv_with, pyramid_composition, write_fixture_table,
    AgePyramid, ColumnMap, Dataset, Delta, Entity, EntityKind, ReferenceData, AGE_BIN_COUNT, DEFAULT_MIN_POPULATION,
    REFERENCE_YEAR,
};
use crate::epitome::{
    distance_trajectory, epitome_table, similarity_map_values, EpitomeOptions, EpitomeTable, TrajectoryPoint,
    APPENDIX_FROM_YEAR, APPENDIX_LEN, DEFAULT_THRESHOLD, DEFAULT_WORLD_YEARS,
};
use crate::error::{ClusterError, DataError, EpitomeError};

pub use svg::pyramid_svg;

const BUNDLED_SAMPLE: &str = include_str!("../../fixtures/sample_pyramids_2015.csv");

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Epitome(#[from] EpitomeError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Missing(String),
}

impl ReportError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            ReportError::Config(_) => 2,
            ReportError::Cluster(ClusterError::InvalidK { .. }) => 2,
            _ => 1,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ReportError + '_ {
    move |source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Csv,
    Json,
    GeojsonJoin,
    Svg,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "geojson-join" | "geojson" => Ok(OutputFormat::GeojsonJoin),
            "svg" => Ok(OutputFormat::Svg),
            other => Err(format!("unknown output format {other:?}")),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
            OutputFormat::GeojsonJoin => "geojson-join",
            OutputFormat::Svg => "svg",
        })
    }
}

/// Everything a command needs. Loadable from TOML; CLI flags override it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Long-format WPP table or wide percent table.
    pub input: Option<PathBuf>,
    /// Use the bundled 2015 sample table instead of `input`.
    pub fixtures_only: bool,
    pub columns: ColumnMap,
    pub variant: String,
    pub reference_year: i32,
    pub world_years: Vec<i32>,
    pub threshold: f64,
    pub delta: Delta,
    pub min_population: f64,
    pub clusters: usize,
    pub centroid_mode: CentroidMode,
    /// Cluster aggregates alongside countries.
    pub include_aggregates: bool,
    pub out: PathBuf,
    /// Empty means each command's default set.
    pub formats: Vec<OutputFormat>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: None,
            fixtures_only: false,
            columns: ColumnMap::default(),
            variant: "Medium".into(),
            reference_year: REFERENCE_YEAR,
            world_years: DEFAULT_WORLD_YEARS.to_vec(),
            threshold: DEFAULT_THRESHOLD,
            delta: Delta::Auto,
            min_population: DEFAULT_MIN_POPULATION,
            clusters: DEFAULT_CLUSTERS,
            centroid_mode: CentroidMode::Geometric,
            include_aggregates: false,
            out: PathBuf::from("out"),
            formats: Vec::new(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ReportError> {
        toml::from_str(text).map_err(|e| ReportError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ReportError> {
        let text = fs::read_to_string(path).map_err(|e| ReportError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), ReportError> {
        let bad = |m: String| Err(ReportError::Config(m));
        if !(self.threshold > 0.0 && self.threshold.is_finite()) {
            return bad(format!("threshold must be positive, got {}", self.threshold));
        }
        if let Delta::Fixed(d) = self.delta {
            if !(d > 0.0 && d.is_finite()) {
                return bad(format!("delta must be positive, got {d}"));
            }
        }
        if self.clusters < 1 {
            return bad("clusters must be at least 1".into());
        }
        if self.world_years.is_empty() {
            return bad("world_years must not be empty".into());
        }
        if self.min_population.is_nan() || self.min_population < 0.0 {
            return bad(format!(
                "min_population must be nonnegative, got {}",
                self.min_population
            ));
        }
        if !self.fixtures_only && self.input.is_none() {
            return bad("either an input file or fixtures-only mode is required".into());
        }
        Ok(())
    }

    fn epitome_options(&self) -> EpitomeOptions {
        EpitomeOptions {
            reference_year: self.reference_year,
            threshold: self.threshold,
            delta: self.delta,
            appendix_from_year: APPENDIX_FROM_YEAR,
            appendix_len: APPENDIX_LEN,
        }
    }

    fn formats_or(&self, defaults: &[OutputFormat]) -> BTreeSet<OutputFormat> {
        if self.formats.is_empty() {
            defaults.iter().copied().collect()
        } else {
            self.formats.iter().copied().collect()
        }
    }

    fn out_file(&self, name: &str) -> Result<PathBuf, ReportError> {
        fs::create_dir_all(&self.out).map_err(io_err(&self.out))?;
        Ok(self.out.join(name))
    }
}

/// Output of a command: files written and notes for the diagnostic stream.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct CommandOutput {
    pub files: Vec<PathBuf>,
    pub diagnostics: Vec<String>,
}

fn is_wide_table(path: &Path) -> Result<bool, ReportError> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    let mut first = String::new();
    BufReader::new(file).read_line(&mut first).map_err(io_err(path))?;
    let cell = first
        .trim_start_matches('\u{feff}')
        .split([',', '\t'])
        .next()
        .unwrap_or("")
        .trim()
        .trim_matches('"');
    Ok(cell.eq_ignore_ascii_case("class"))
}

/// Loads the dataset the config points at and applies the population filter.
pub fn load_dataset(config: &RunConfig) -> Result<Dataset, ReportError> {
    config.validate()?;
    let reference = ReferenceData::from_env()?;
    let dataset = if config.fixtures_only {
        let cols = parse_fixture_table_with(BUNDLED_SAMPLE.as_bytes(), &reference)?;
        fixture_dataset(&cols, &reference)?
    } else {
        let path = config.input.as_deref().expect("validated");
        if is_wide_table(path)? {
            let file = fs::File::open(path).map_err(io_err(path))?;
            let cols = parse_fixture_table_with(file, &reference)?;
            fixture_dataset(&cols, &reference)?
        } else {
            let file = fs::File::open(path).map_err(io_err(path))?;
            let map = ColumnMap {
                target_variant: config.variant.clone(),
                ..config.columns.clone()
            };
            parse_wpp_csv_with(file, &map, &reference)?
        }
    };
    Ok(dataset.with_min_population(config.min_population))
}

fn section_slug(kind: EntityKind) -> &'static str {
    match kind {
        EntityKind::Country => "countries",
        EntityKind::GeographicRegion => "geographic_regions",
        EntityKind::UnDevelopmentCategory => "un_development",
        EntityKind::IncomeCategory => "income",
        EntityKind::World => "world",
    }
}

fn write_text(path: PathBuf, text: &str, out: &mut CommandOutput) -> Result<(), ReportError> {
    fs::write(&path, text).map_err(io_err(&path))?;
    out.files.push(path);
    Ok(())
}

fn csv_string<F>(header: &[&str], fill: F) -> Result<String, ReportError>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> Result<(), csv::Error>,
{
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let to_err = |e: csv::Error| ReportError::Data(DataError::Csv(e));
    w.write_record(header).map_err(to_err)?;
    fill(&mut w).map_err(to_err)?;
    let bytes = w.into_inner().map_err(|e| ReportError::Missing(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// CSV rendering of one ranking table, distances to three decimals.
pub fn epitome_csv(table: &EpitomeTable) -> Result<String, ReportError> {
    csv_string(
        &[
            "rank",
            "entity_id",
            "entity",
            "kind",
            "distance",
            "beyond_threshold",
            "zero_replaced",
        ],
        |w| {
            for e in &table.entries {
                w.write_record([
                    e.rank.to_string(),
                    e.entity_id.to_string(),
                    e.name.clone(),
                    e.kind.to_string(),
                    format!("{:.3}", e.distance),
                    e.beyond_threshold.to_string(),
                    e.zero_replaced.to_string(),
                ])?;
            }
            Ok(())
        },
    )
}

/// Ranking tables for every target year and every non-empty section.
pub fn cmd_epitome(config: &RunConfig) -> Result<CommandOutput, ReportError> {
    let data = load_dataset(config)?;
    let formats = config.formats_or(&[OutputFormat::Csv, OutputFormat::Json]);
    let opts = config.epitome_options();
    let sections: Vec<EntityKind> = EntityKind::sections()
        .into_iter()
        .filter(|k| data.catalog.of_kind(*k).next().is_some())
        .collect();
    if sections.is_empty() {
        return Err(ReportError::Config("no entities to rank after filtering".into()));
    }

    let mut out = CommandOutput::default();
    for &year in &config.world_years {
        for &section in &sections {
            let table = epitome_table(&data, year, section, &opts)?;
            let stem = format!("epitome_{}_{year}", section_slug(section));
            if formats.contains(&OutputFormat::Csv) {
                write_text(
                    config.out_file(&format!("{stem}.csv"))?,
                    &epitome_csv(&table)?,
                    &mut out,
                )?;
            }
            if formats.contains(&OutputFormat::Json) {
                write_text(config.out_file(&format!("{stem}.json"))?, &to_json(&table), &mut out)?;
            }
            if table.entries.iter().any(|e| e.zero_replaced) {
                out.diagnostics
                    .push(format!("{stem}: zero age groups replaced (delta {})", config.delta));
            }
        }
    }
    Ok(out)
}

/// Join table of distances keyed by ISO3 for one target year.
pub fn cmd_map(config: &RunConfig, world_year: i32) -> Result<CommandOutput, ReportError> {
    let data = load_dataset(config)?;
    if data.catalog.of_kind(EntityKind::Country).next().is_none() {
        return Err(ReportError::Config("no countries left after filtering".into()));
    }
    let map = similarity_map_values(&data, world_year, &config.epitome_options())?;
    let formats = config.formats_or(&[OutputFormat::Csv, OutputFormat::GeojsonJoin]);
    let name_of = |iso: &str| {
        data.catalog
            .iter()
            .find(|e| e.iso3.as_deref() == Some(iso))
            .map(|e| e.name.clone())
            .unwrap_or_default()
    };

    let mut out = CommandOutput::default();
    if formats.contains(&OutputFormat::Csv) {
        let text = csv_string(&["iso3", "distance"], |w| {
            for (iso, d) in &map.values {
                w.write_record([iso.clone(), format!("{d:.3}")])?;
            }
            Ok(())
        })?;
        write_text(config.out_file(&format!("map_{world_year}.csv"))?, &text, &mut out)?;
    }
    if formats.contains(&OutputFormat::GeojsonJoin) {
        let properties: serde_json::Map<String, serde_json::Value> = map
            .values
            .iter()
            .map(|(iso, d)| (iso.clone(), json!({ "name": name_of(iso), "aitchison_distance": d })))
            .collect();
        let doc = json!({
            "join_key": "iso3",
            "world_year": world_year,
            "reference_year": config.reference_year,
            "properties": properties,
        });
        write_text(
            config.out_file(&format!("map_{world_year}.geojson-properties.json"))?,
            &to_json(&doc),
            &mut out,
        )?;
    }
    for e in &map.unmapped {
        out.diagnostics.push(format!("no ISO3 code for {} ({})", e.name, e.id));
    }
    Ok(out)
}

/// Reference-year compositions of the entities to cluster.
pub fn clustering_inputs(data: &Dataset, config: &RunConfig) -> Result<Vec<(u32, Composition)>, ReportError> {
    let wanted =
        |e: &&Entity| e.kind == EntityKind::Country || (config.include_aggregates && e.kind != EntityKind::World);
    data.catalog
        .iter()
        .filter(wanted)
        .map(|e| {
            let p = data
                .pyramid(e.id, config.reference_year)
                .ok_or_else(|| ReportError::Missing(format!("{} has no {} pyramid", e.name, config.reference_year)))?;
            let (c, _) = pyramid_composition(p, config.delta).map_err(DataError::from)?;
            Ok((e.id, c))
        })
        .collect()
}

/// Dendrogram, assignment and centroids from a prepared input list.
pub fn run_clustering(
    items: &[(u32, Composition)],
    k: usize,
    mode: CentroidMode,
) -> Result<(Dendrogram, ClusterAssignment, Vec<Composition>), ReportError> {
    if k > items.len() {
        return Err(ReportError::Config(format!(
            "{k} clusters requested but only {} entities available",
            items.len()
        )));
    }
    if items.len() < 2 {
        return Err(ReportError::Config("clustering needs at least 2 entities".into()));
    }
    let matrix = pairwise_distance_matrix(items)?;
    let dendrogram = ward_linkage(&matrix)?;
    let assignment = cut_tree(&dendrogram, k)?.relabel_by_youngest(items, mode)?;
    let centroids = cluster_centroids(&assignment, items, mode)?;
    Ok((dendrogram, assignment, centroids))
}

fn named_tree(node: &DendrogramNode, data: &Dataset) -> serde_json::Value {
    match node {
        DendrogramNode::Leaf { id } => {
            let e = data.catalog.get(*id);
            json!({
                "id": id,
                "name": e.map(|e| e.name.as_str()).unwrap_or(""),
                "iso3": e.and_then(|e| e.iso3.as_deref()),
            })
        }
        DendrogramNode::Node {
            cluster,
            height,
            size,
            children,
        } => json!({
            "cluster": cluster,
            "height": height,
            "size": size,
            "children": [named_tree(&children[0], data), named_tree(&children[1], data)],
        }),
    }
}

/// Ward clustering of reference-year structures.
pub fn cmd_cluster(config: &RunConfig) -> Result<CommandOutput, ReportError> {
    let data = load_dataset(config)?;
    let items = clustering_inputs(&data, config)?;
    let (dendrogram, assignment, centroids) = run_clustering(&items, config.clusters, config.centroid_mode)?;
    let formats = config.formats_or(&[OutputFormat::Csv, OutputFormat::Json]);

    let mut out = CommandOutput::default();
    if formats.contains(&OutputFormat::Csv) {
        let text = csv_string(&["entity_id", "entity", "iso3", "cluster"], |w| {
            for (id, c) in assignment.ids.iter().zip(&assignment.clusters) {
                let e = data.catalog.get(*id);
                w.write_record([
                    id.to_string(),
                    e.map(|e| e.name.clone()).unwrap_or_default(),
                    e.and_then(|e| e.iso3.clone()).unwrap_or_default(),
                    c.to_string(),
                ])?;
            }
            Ok(())
        })?;
        write_text(config.out_file("cluster_assignment.csv")?, &text, &mut out)?;

        let columns: Vec<(String, [f64; AGE_BIN_COUNT])> = centroids
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let mut v = [0.0; AGE_BIN_COUNT];
                v.copy_from_slice(c.parts());
                (format!("Cluster {}", i + 1), v)
            })
            .collect();
        let mut buf = Vec::new();
        write_fixture_table(&mut buf, &columns)?;
        write_text(
            config.out_file("cluster_centroids.csv")?,
            &String::from_utf8(buf).expect("utf-8"),
            &mut out,
        )?;
    }
    if formats.contains(&OutputFormat::Json) {
        let doc = json!({
            "method": "ward (Lance-Williams on squared Aitchison distances)",
            "reference_year": config.reference_year,
            "leaves": dendrogram.leaf_count(),
            "root": named_tree(&dendrogram.tree(), &data),
        });
        write_text(config.out_file("dendrogram.json")?, &to_json(&doc), &mut out)?;
        let centroid_doc: Vec<_> = centroids
            .iter()
            .enumerate()
            .map(|(i, c)| json!({ "cluster": i + 1, "members": assignment.members(i + 1), "centroid_percent": c.parts() }))
            .collect();
        let doc = json!({ "k": assignment.k, "centroid_mode": config.centroid_mode, "clusters": centroid_doc });
        write_text(config.out_file("clusters.json")?, &to_json(&doc), &mut out)?;
    }
    Ok(out)
}

/// SVG chart of one entity-year.
pub fn cmd_pyramid(config: &RunConfig, entity: &str, year: i32) -> Result<CommandOutput, ReportError> {
    let data = load_dataset(config)?;
    let e = data
        .catalog
        .resolve(entity)
        .ok_or_else(|| ReportError::Missing(format!("unknown entity {entity:?}")))?;
    let p: &AgePyramid = data
        .pyramid(e.id, year)
        .ok_or_else(|| ReportError::Missing(format!("no pyramid for {} in {year}", e.name)))?;
    let mut out = CommandOutput::default();
    let svg = pyramid_svg(p, &format!("{} {year}", e.name));
    write_text(
        config.out_file(&format!("pyramid_{}_{year}.svg", e.id))?,
        &svg,
        &mut out,
    )?;
    Ok(out)
}

/// Long-format distance trajectories for the listed entities.
pub fn cmd_trajectory(config: &RunConfig, entities: &[String]) -> Result<CommandOutput, ReportError> {
    if entities.is_empty() {
        return Err(ReportError::Config("no entities given".into()));
    }
    let data = load_dataset(config)?;
    let ids = entities
        .iter()
        .map(|key| {
            data.catalog
                .resolve(key)
                .map(|e| e.id)
                .ok_or_else(|| ReportError::Missing(format!("unknown entity {key:?}")))
        })
        .collect::<Result<Vec<u32>, _>>()?;
    let points: Vec<TrajectoryPoint> =
        distance_trajectory(&data, &ids, &config.world_years, &config.epitome_options())?;
    let text = csv_string(&["entity_id", "entity", "world_year", "distance"], |w| {
        for p in &points {
            w.write_record([
                p.entity_id.to_string(),
                p.name.clone(),
                p.world_year.to_string(),
                format!("{:.3}", p.distance),
            ])?;
        }
        Ok(())
    })?;
    let mut out = CommandOutput::default();
    write_text(config.out_file("trajectory.csv")?, &text, &mut out)?;
    Ok(out)
}
