//! Shared test helpers: seeded random compositions, a brute-force Ward
//! oracle, and a synthetic long-format WPP table.
#![allow(dead_code)]

use popcoda::cluster::Merge;
use popcoda::coda::{closure, clr, Composition};
use popcoda::demographics::AgeBin;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_composition(rng: &mut ChaCha8Rng, dim: usize, k: f64) -> Composition {
    // log-uniform parts spanning four orders of magnitude
    let v: Vec<f64> = (0..dim).map(|_| 10f64.powf(rng.gen_range(-2.0..2.0))).collect();
    closure(&v, k).unwrap()
}

/// Ward agglomeration by exhaustive search: at every step evaluate, for every
/// pair of current clusters, the increase in within-cluster sum of squares
/// computed directly from the clr points. Heights are `sqrt(2 * increase)`.
pub fn brute_force_ward(points: &[Composition]) -> Vec<Merge> {
    let coords: Vec<Vec<f64>> = points.iter().map(|p| clr(p).coords().to_vec()).collect();
    let n = coords.len();
    let ess = |members: &[usize]| -> f64 {
        let dim = coords[0].len();
        let mut centre = vec![0.0; dim];
        for &m in members {
            for (c, x) in centre.iter_mut().zip(&coords[m]) {
                *c += x / members.len() as f64;
            }
        }
        members
            .iter()
            .map(|&m| {
                coords[m]
                    .iter()
                    .zip(&centre)
                    .map(|(x, c)| (x - c) * (x - c))
                    .sum::<f64>()
            })
            .sum()
    };
    let mut clusters: Vec<(usize, Vec<usize>)> = (0..n).map(|i| (i, vec![i])).collect();
    let mut merges = Vec::new();
    for step in 0..n - 1 {
        let mut best: Option<(f64, (usize, usize), usize, usize)> = None;
        for i in 0..clusters.len() {
            for j in i + 1..clusters.len() {
                let mut union = clusters[i].1.clone();
                union.extend(&clusters[j].1);
                let increase = ess(&union) - ess(&clusters[i].1) - ess(&clusters[j].1);
                let (li, lj) = (clusters[i].0, clusters[j].0);
                let pair = (li.min(lj), li.max(lj));
                let better = match best {
                    None => true,
                    Some((b, bp, _, _)) => increase < b || (increase == b && pair < bp),
                };
                if better {
                    best = Some((increase, pair, i, j));
                }
            }
        }
        let (increase, (a, b), i, j) = best.unwrap();
        let mut union = clusters[i].1.clone();
        union.extend(&clusters[j].1);
        let size = union.len();
        clusters.remove(j);
        clusters[i] = (n + step, union);
        merges.push(Merge {
            a,
            b,
            height: (2.0 * increase.max(0.0)).sqrt(),
            size,
        });
    }
    merges
}

/// A long-format table in the default WPP layout (values in thousands).
///
/// Each entry is (id, name, year, variant, 21 values youngest first).
pub fn wpp_csv(rows: &[(u32, &str, i32, &str, [f64; 21])]) -> String {
    let mut out = String::from(
        "LocID,Location,VarID,Variant,Time,MidPeriod,AgeGrp,AgeGrpStart,AgeGrpSpan,PopMale,PopFemale,PopTotal\n",
    );
    for (id, name, year, variant, values) in rows {
        for bin in AgeBin::all() {
            out.push_str(&format!(
                "{id},\"{name}\",2,{variant},{year},{year}.5,{},{},5,0,0,{}\n",
                bin.label(),
                bin.index() * 5,
                values[bin.index()]
            ));
        }
    }
    out
}

/// Geometric age profile: `first` thousand persons in 0-4 shrinking by
/// `ratio` per bin.
pub fn profile(first: f64, ratio: f64) -> [f64; 21] {
    let mut v = [0.0; 21];
    for (i, x) in v.iter_mut().enumerate() {
        *x = first * ratio.powi(i as i32);
    }
    v
}
