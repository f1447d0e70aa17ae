//! How multiplicative zero replacement and the choice of delta move the
//! distance of a pyramid with empty age groups.
//!
//!     cargo run --example zero_replacement

use popcoda::coda::{aitchison_distance, zero_replace};
use popcoda::demographics::{parse_fixture_table, pyramid_to_composition, FIXTURE_DELTA};

const TABLE: &str = include_str!("../fixtures/sample_pyramids_2015.csv");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let v = [60.0, 25.0, 15.0, 0.0];
    println!("{v:?} -> {:?}", zero_replace(&v, 0.5)?);

    let columns = parse_fixture_table(TABLE.as_bytes())?;
    let find = |label: &str| columns.iter().find(|(l, _)| l == label).map(|(_, p)| p).unwrap();
    let world = find("World 2015");
    let pakistan = find("Pakistan 2015");
    let zeros: Vec<_> = popcoda::demographics::AgeBin::all()
        .filter(|b| pakistan.value(*b) == 0.0)
        .map(|b| b.label())
        .collect();
    println!("\nPakistan 2015 has printed zeros in {zeros:?}");
    println!("{:>8}  {:>8}", "delta", "d_A");
    for delta in [0.0005, 0.001, 0.002, FIXTURE_DELTA, 0.01, 0.05] {
        let d = aitchison_distance(
            &pyramid_to_composition(world, delta)?,
            &pyramid_to_composition(pakistan, delta)?,
        )?;
        println!("{delta:>8}  {d:>8.3}");
    }
    Ok(())
}
