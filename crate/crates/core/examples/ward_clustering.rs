//! Ward clustering of reference-year structures: merge sequence, a cut
//! into k groups relabeled youngest first, and the group centroids.
//!
//!     cargo run --release --example ward_clustering [WPP.csv] [k]

use popcoda::cluster::{CentroidMode, DendrogramNode};
use popcoda::report::{clustering_inputs, load_dataset, run_clustering, RunConfig};

fn print_tree(node: &DendrogramNode, names: &dyn Fn(u32) -> String, depth: usize) {
    let pad = "  ".repeat(depth);
    match node {
        DendrogramNode::Leaf { id } => println!("{pad}{}", names(*id)),
        DendrogramNode::Node { height, children, .. } => {
            println!("{pad}+ {height:.3}");
            for c in children.iter() {
                print_tree(c, names, depth + 1);
            }
        }
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let mut config = match args.next() {
        Some(path) => RunConfig {
            input: Some(path.into()),
            ..RunConfig::default()
        },
        None => RunConfig {
            fixtures_only: true,
            clusters: 3,
            ..RunConfig::default()
        },
    };
    if let Some(k) = args.next() {
        config.clusters = k.parse()?;
    }
    let data = load_dataset(&config)?;
    let items = clustering_inputs(&data, &config)?;
    let names = |id: u32| {
        data.catalog
            .get(id)
            .map(|e| e.name.clone())
            .unwrap_or_else(|| id.to_string())
    };

    let (dendrogram, assignment, centroids) = run_clustering(&items, config.clusters, CentroidMode::Geometric)?;
    if items.len() <= 30 {
        print_tree(&dendrogram.tree(), &names, 0);
    }
    for (i, c) in centroids.iter().enumerate() {
        let members: Vec<String> = assignment.members(i + 1).into_iter().map(names).collect();
        println!(
            "\ncluster {}: 0-4 {:.2}%, 100+ {:.3}%  ({} members)",
            i + 1,
            c.parts()[0],
            c.parts()[20],
            members.len()
        );
        println!("  {}", members.join(", "));
    }
    Ok(())
}
