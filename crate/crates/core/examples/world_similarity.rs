//! Distance of each sample country to the 2015 World pyramid, using the
//! bundled percent table (or any wide table passed as an argument).
//!
//!     cargo run --example world_similarity [table.csv]

use std::fs::File;

use popcoda::coda::aitchison_distance;
use popcoda::demographics::{parse_fixture_table, pyramid_to_composition, AgePyramid, FIXTURE_DELTA};

const TABLE: &str = include_str!("../fixtures/sample_pyramids_2015.csv");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let columns: Vec<(String, AgePyramid)> = match std::env::args().nth(1) {
        Some(path) => parse_fixture_table(File::open(path)?)?,
        None => parse_fixture_table(TABLE.as_bytes())?,
    };
    let (world_label, world) = columns
        .iter()
        .find(|(l, _)| l.starts_with("World"))
        .ok_or("table has no World column")?;
    let world = pyramid_to_composition(world, FIXTURE_DELTA)?;

    let mut rows = Vec::new();
    for (label, p) in columns.iter().filter(|(l, _)| l != world_label) {
        let d = aitchison_distance(&world, &pyramid_to_composition(p, FIXTURE_DELTA)?)?;
        rows.push((d, label.as_str(), p.has_zero()));
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    println!("distance to {world_label} (delta {FIXTURE_DELTA}):");
    for (d, label, zeros) in rows {
        println!("  {label:<20} {d:.3}{}", if zeros { "  (zeros replaced)" } else { "" });
    }
    Ok(())
}
