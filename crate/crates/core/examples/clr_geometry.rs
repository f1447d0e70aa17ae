//! Aitchison geometry on small compositions: closure, clr, distances and
//! why perturbation leaves Aitchison distances alone but not Euclidean ones.
//!
//!     cargo run --example clr_geometry

use popcoda::coda::{
    aitchison_distance, aitchison_distance_log_ratio, closure, clr, clr_inverse, euclidean_distance, geometric_mean,
    perturbation,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let x = closure(&[0.8, 0.2], 1.0)?;
    let y = closure(&[0.5, 0.5], 1.0)?;
    println!("x = {:?}, y = {:?}", x.parts(), y.parts());
    println!("clr(x) = {:?}", clr(&x).coords());
    println!(
        "d_A(x, y) = {:.12} (sqrt2 * ln2 = {:.12})",
        aitchison_distance(&x, &y)?,
        2f64.sqrt() * 2f64.ln()
    );

    let a = closure(&[5.0, 15.0, 80.0], 100.0)?;
    let b = closure(&[30.0, 30.0, 40.0], 100.0)?;
    println!("\na = {:?}, b = {:?}", a.parts(), b.parts());
    println!("geometric mean of a = {:.4}", geometric_mean(&a));
    println!("clr form       = {:.12}", aitchison_distance(&a, &b)?);
    println!("log-ratio form = {:.12}", aitchison_distance_log_ratio(&a, &b)?);
    let back = clr_inverse(&clr(&a), 100.0)?;
    println!("clr round trip = {:?}", back.parts());

    let p = closure(&[90.0, 5.0, 5.0], 100.0)?;
    let (pa, pb) = (perturbation(&p, &a)?, perturbation(&p, &b)?);
    println!("\nafter perturbing both by {:?}:", p.parts());
    println!(
        "  aitchison {:.6} -> {:.6}",
        aitchison_distance(&a, &b)?,
        aitchison_distance(&pa, &pb)?
    );
    println!(
        "  euclidean {:.6} -> {:.6}",
        euclidean_distance(&a, &b)?,
        euclidean_distance(&pa, &pb)?
    );
    Ok(())
}
