//! ISO3-keyed distances ready to join onto country polygons in any GIS or
//! plotting tool.
//!
//!     cargo run --example similarity_map [WPP.csv] [world_year]

use popcoda::epitome::{similarity_map_values, EpitomeOptions};
use popcoda::report::{load_dataset, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let config = match args.next() {
        Some(path) => RunConfig {
            input: Some(path.into()),
            ..RunConfig::default()
        },
        None => RunConfig {
            fixtures_only: true,
            ..RunConfig::default()
        },
    };
    let year: i32 = args.next().map(|y| y.parse()).transpose()?.unwrap_or(2015);
    let data = load_dataset(&config)?;
    let map = similarity_map_values(&data, year, &EpitomeOptions::default())?;

    let properties: serde_json::Map<String, serde_json::Value> = map
        .values
        .iter()
        .map(|(iso, d)| (iso.clone(), serde_json::json!({ "aitchison_distance": d })))
        .collect();
    println!("{}", serde_json::to_string_pretty(&properties)?);
    for e in &map.unmapped {
        eprintln!("no ISO3 code for {} ({})", e.name, e.id);
    }
    Ok(())
}
