//! Writes a mirrored SVG pyramid for each column of the bundled table.
//!
//!     cargo run --example pyramid_chart [out_dir]

use std::path::PathBuf;

use popcoda::demographics::parse_fixture_table;
use popcoda::report::pyramid_svg;

const TABLE: &str = include_str!("../fixtures/sample_pyramids_2015.csv");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "pyramids".into()));
    std::fs::create_dir_all(&out)?;
    for (label, pyramid) in parse_fixture_table(TABLE.as_bytes())? {
        let path = out.join(format!("{}.svg", label.to_lowercase().replace(' ', "_")));
        std::fs::write(&path, pyramid_svg(&pyramid, &label))?;
        println!("{}", path.display());
    }
    Ok(())
}
