use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use popcoda::cluster::CentroidMode;
use popcoda::demographics::Delta;
use popcoda::report::{self, CommandOutput, OutputFormat, ReportError, RunConfig};

/// Aitchison-distance similarity of population age structures.
#[derive(Parser)]
#[command(name = "popcoda", version)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// TOML file with run settings; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Long-format WPP table (or a wide percent table).
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Use the bundled 2015 sample table instead of --input.
    #[arg(long, global = true)]
    fixtures_only: bool,
    #[arg(long, global = true)]
    variant: Option<String>,
    #[arg(long, global = true)]
    reference_year: Option<i32>,
    /// Comma-separated target years.
    #[arg(long, global = true, value_delimiter = ',')]
    world_years: Option<Vec<i32>>,
    #[arg(long, global = true)]
    threshold: Option<f64>,
    /// Zero-replacement delta: "auto" or a value in the data's units.
    #[arg(long, global = true)]
    delta: Option<Delta>,
    #[arg(long, global = true)]
    min_population: Option<f64>,
    #[arg(long, global = true)]
    clusters: Option<usize>,
    #[arg(long, global = true, value_enum)]
    centroid_mode: Option<CentroidMode>,
    /// Cluster aggregates together with countries.
    #[arg(long, global = true)]
    include_aggregates: bool,
    /// Comma-separated subset of csv,json,geojson-join,svg.
    #[arg(long, global = true, value_delimiter = ',')]
    format: Option<Vec<OutputFormat>>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Ranking tables of entities most similar to the world per target year.
    Epitome,
    /// ISO3-keyed distance join table for one target year.
    Map {
        #[arg(long)]
        world_year: i32,
    },
    /// Ward clustering of reference-year structures.
    Cluster,
    /// SVG pyramid chart for one entity-year.
    Pyramid {
        /// Area code or name.
        #[arg(long)]
        entity: String,
        #[arg(long)]
        year: i32,
    },
    /// Distance to the world over the target years.
    Trajectory {
        /// Comma-separated area codes or names.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        entities: Vec<String>,
    },
}

fn build_config(g: GlobalArgs) -> Result<RunConfig, ReportError> {
    let mut c = match &g.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(v) = g.input {
        c.input = Some(v);
    }
    c.fixtures_only |= g.fixtures_only;
    if let Some(v) = g.variant {
        c.variant = v;
    }
    if let Some(v) = g.reference_year {
        c.reference_year = v;
    }
    if let Some(v) = g.world_years {
        c.world_years = v;
    }
    if let Some(v) = g.threshold {
        c.threshold = v;
    }
    if let Some(v) = g.delta {
        c.delta = v;
    }
    if let Some(v) = g.min_population {
        c.min_population = v;
    }
    if let Some(v) = g.clusters {
        c.clusters = v;
    }
    if let Some(v) = g.centroid_mode {
        c.centroid_mode = v;
    }
    c.include_aggregates |= g.include_aggregates;
    if let Some(v) = g.format {
        c.formats = v;
    }
    if let Some(v) = g.out {
        c.out = v;
    }
    Ok(c)
}

fn run(cli: Cli) -> Result<CommandOutput, ReportError> {
    let config = build_config(cli.global)?;
    match cli.command {
        Command::Epitome => report::cmd_epitome(&config),
        Command::Map { world_year } => report::cmd_map(&config, world_year),
        Command::Cluster => report::cmd_cluster(&config),
        Command::Pyramid { entity, year } => report::cmd_pyramid(&config, &entity, year),
        Command::Trajectory { entities } => report::cmd_trajectory(&config, &entities),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            for d in &out.diagnostics {
                eprintln!("note: {d}");
            }
            for f in &out.files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
