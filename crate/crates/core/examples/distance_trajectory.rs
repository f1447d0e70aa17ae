//! Parses an in-memory long-format table and follows how far a few
//! countries sit from the World as the World ages.
//!
//!     cargo run --example distance_trajectory

use std::fmt::Write;

use popcoda::demographics::{parse_wpp_csv, AgeBin, ColumnMap};
use popcoda::epitome::{distance_trajectory, EpitomeOptions};

// geometric age profile: `first` thousand in 0-4, shrinking by `ratio` per bin
fn profile(first: f64, ratio: f64) -> Vec<f64> {
    (0..21).map(|i| first * ratio.powi(i)).collect()
}

fn long_table() -> String {
    let mut rows: Vec<(u32, &str, i32, Vec<f64>)> = Vec::new();
    for (i, year) in (1990..=2080).step_by(10).enumerate() {
        rows.push((900, "World", year, profile(600_000.0, 0.86 + 0.022 * i as f64)));
    }
    rows.push((356, "India", 2015, profile(120_000.0, 0.87)));
    rows.push((170, "Colombia", 2015, profile(3_800.0, 0.93)));
    rows.push((392, "Japan", 2015, profile(5_200.0, 1.06)));

    let mut csv = String::from("LocID,Location,Variant,Time,AgeGrp,PopTotal\n");
    for (id, name, year, values) in rows {
        for bin in AgeBin::all() {
            writeln!(csv, "{id},{name},Medium,{year},{},{}", bin.label(), values[bin.index()]).unwrap();
        }
    }
    csv
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = parse_wpp_csv(long_table().as_bytes(), &ColumnMap::default())?;
    let years: Vec<i32> = (1990..=2080).step_by(10).collect();
    let points = distance_trajectory(&data, &[356, 170, 392], &years, &EpitomeOptions::default())?;

    print!("{:<10}", "");
    for y in &years {
        print!("{y:>7}");
    }
    println!();
    for row in points.chunks(years.len()) {
        print!("{:<10}", row[0].name);
        for p in row {
            print!("{:>7.3}", p.distance);
        }
        let best = row.iter().min_by(|a, b| a.distance.total_cmp(&b.distance)).unwrap();
        println!("   closest in {}", best.world_year);
    }
    Ok(())
}
