//! Ranking tables: which entity's reference-year structure is closest to the
//! World in each target year. Reads a WPP long-format file if given, else
//! the bundled 2015 sample (which only has a 2015 World).
//!
//!     cargo run --release --example epitome_tables [WPP_PopulationByAgeSex.csv]

use popcoda::demographics::EntityKind;
use popcoda::epitome::{epitome_table, EpitomeOptions};
use popcoda::report::{load_dataset, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = match std::env::args().nth(1) {
        Some(path) => RunConfig {
            input: Some(path.into()),
            ..RunConfig::default()
        },
        None => RunConfig {
            fixtures_only: true,
            world_years: vec![2015],
            ..RunConfig::default()
        },
    };
    let data = load_dataset(&config)?;
    let opts = EpitomeOptions::default();

    for &year in &config.world_years {
        for section in EntityKind::sections() {
            if data.catalog.of_kind(section).next().is_none() {
                continue;
            }
            let table = epitome_table(&data, year, section, &opts)?;
            println!("World {year} vs {section} in {}:", opts.reference_year);
            if table.entries.is_empty() {
                println!("  (nothing within {})", opts.threshold);
            }
            for e in table.entries.iter().take(10) {
                let mark = if e.beyond_threshold { "†" } else { "" };
                println!("  {:>2}. {:<32} {:.3}{mark}", e.rank, e.name, e.distance);
            }
        }
    }
    Ok(())
}
