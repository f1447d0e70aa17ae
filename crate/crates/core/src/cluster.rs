//! Ward hierarchical clustering under the Aitchison distance.
//!
//! The linkage runs the Lance–Williams recurrence on squared input
//! distances and reports square-rooted merge heights, which implements
//! Ward's minimum-variance criterion from a distance matrix. For two
//! clusters with centroids `a`, `b` in clr space the reported height is
//! `sqrt(2 * n_a * n_b / (n_a + n_b)) * |a - b|`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coda::{aitchison_distance, closure, clr, clr_inverse, ClrVector, Composition};
use crate::error::ClusterError;

pub const DEFAULT_CLUSTERS: usize = 7;

/// Symmetric matrix of pairwise distances with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    labels: Vec<u32>,
    values: Vec<f64>,
}

impl DistanceMatrix {
    /// Builds from a full row-major matrix, checking symmetry and the diagonal.
    pub fn new(labels: Vec<u32>, values: Vec<f64>) -> Result<Self, ClusterError> {
        let n = labels.len();
        if values.len() != n * n {
            return Err(ClusterError::MalformedMatrix(format!(
                "{} values for {n} labels",
                values.len()
            )));
        }
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(ClusterError::MalformedMatrix(format!("nonzero diagonal at {i}")));
            }
            for j in 0..i {
                let v = values[i * n + j];
                if v != values[j * n + i] || !(v >= 0.0 && v.is_finite()) {
                    return Err(ClusterError::MalformedMatrix(format!(
                        "entry ({i}, {j}) is asymmetric or invalid"
                    )));
                }
            }
        }
        Ok(Self { labels, values })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.len();
        &self.values[i * n..(i + 1) * n]
    }
}

/// Aitchison distances between all pairs. The upper triangle is computed
/// once (rows in parallel) and mirrored.
pub fn pairwise_distance_matrix(items: &[(u32, Composition)]) -> Result<DistanceMatrix, ClusterError> {
    let n = items.len();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            ((i + 1)..n)
                .map(|j| aitchison_distance(&items[i].1, &items[j].1))
                .collect::<Result<Vec<f64>, _>>()
        })
        .collect::<Result<_, _>>()?;
    let mut values = vec![0.0; n * n];
    for (i, row) in upper.iter().enumerate() {
        for (offset, &d) in row.iter().enumerate() {
            let j = i + 1 + offset;
            values[i * n + j] = d;
            values[j * n + i] = d;
        }
    }
    Ok(DistanceMatrix {
        labels: items.iter().map(|(id, _)| *id).collect(),
        values,
    })
}

/// One agglomeration step. Leaves are clusters `0..n`; the merge at step
/// `s` creates cluster `n + s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub leaf_labels: Vec<u32>,
    pub merges: Vec<Merge>,
}

/// Nested form of a dendrogram, root first.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum DendrogramNode {
    Leaf {
        id: u32,
    },
    Node {
        cluster: usize,
        height: f64,
        size: usize,
        children: [Box<DendrogramNode>; 2],
    },
}

impl Dendrogram {
    pub fn leaf_count(&self) -> usize {
        self.leaf_labels.len()
    }

    /// The tree rooted at the last merge.
    pub fn tree(&self) -> DendrogramNode {
        let n = self.leaf_count();
        self.node(if self.merges.is_empty() {
            0
        } else {
            n + self.merges.len() - 1
        })
    }

    fn node(&self, cluster: usize) -> DendrogramNode {
        let n = self.leaf_count();
        if cluster < n {
            return DendrogramNode::Leaf {
                id: self.leaf_labels[cluster],
            };
        }
        let m = self.merges[cluster - n];
        DendrogramNode::Node {
            cluster,
            height: m.height,
            size: m.size,
            children: [Box::new(self.node(m.a)), Box::new(self.node(m.b))],
        }
    }
}

/// Ward agglomeration via the Lance–Williams recurrence on squared distances.
///
/// At each step the active pair with the smallest dissimilarity merges;
/// exact ties go to the lexicographically smallest (label, label) pair.
pub fn ward_linkage(m: &DistanceMatrix) -> Result<Dendrogram, ClusterError> {
    let n = m.len();
    if n < 2 {
        return Err(ClusterError::DegenerateMatrix(n));
    }
    // Slot-indexed squared dissimilarities; a merged cluster reuses the
    // slot of its first member.
    let mut d2: Vec<f64> = m.values.iter().map(|d| d * d).collect();
    let mut label: Vec<usize> = (0..n).collect();
    let mut size = vec![1usize; n];
    let mut active: Vec<usize> = (0..n).collect();
    let mut merges = Vec::with_capacity(n - 1);

    for step in 0..n - 1 {
        let mut best: Option<(f64, (usize, usize), usize, usize)> = None;
        for (ai, &i) in active.iter().enumerate() {
            for &j in &active[ai + 1..] {
                let d = d2[i * n + j];
                let pair = (label[i].min(label[j]), label[i].max(label[j]));
                let better = match best {
                    None => true,
                    Some((bd, bp, _, _)) => d < bd || (d == bd && pair < bp),
                };
                if better {
                    best = Some((d, pair, i, j));
                }
            }
        }
        let (dij, (la, lb), i, j) = best.expect("at least two active clusters");
        let (ni, nj) = (size[i] as f64, size[j] as f64);
        for &q in &active {
            if q == i || q == j {
                continue;
            }
            let nq = size[q] as f64;
            let updated = ((ni + nq) * d2[i * n + q] + (nj + nq) * d2[j * n + q] - nq * dij) / (ni + nj + nq);
            d2[i * n + q] = updated;
            d2[q * n + i] = updated;
        }
        size[i] += size[j];
        label[i] = n + step;
        active.retain(|&s| s != j);
        merges.push(Merge {
            a: la,
            b: lb,
            height: dij.max(0.0).sqrt(),
            size: size[i],
        });
    }

    Ok(Dendrogram {
        leaf_labels: m.labels.clone(),
        merges,
    })
}

/// Cluster membership for each leaf, labels `1..=k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub k: usize,
    /// Entity ids in leaf order.
    pub ids: Vec<u32>,
    /// Cluster label of each entry in `ids`.
    pub clusters: Vec<usize>,
}

impl ClusterAssignment {
    pub fn cluster_of(&self, id: u32) -> Option<usize> {
        self.ids.iter().position(|x| *x == id).map(|i| self.clusters[i])
    }

    pub fn members(&self, cluster: usize) -> Vec<u32> {
        self.ids
            .iter()
            .zip(&self.clusters)
            .filter(|(_, c)| **c == cluster)
            .map(|(id, _)| *id)
            .collect()
    }

    /// Renumbers clusters so that cluster 1 has the largest centroid share
    /// in the first part (the youngest age group), cluster `k` the smallest.
    pub fn relabel_by_youngest(
        &self,
        compositions: &[(u32, Composition)],
        mode: CentroidMode,
    ) -> Result<Self, ClusterError> {
        let centroids = cluster_centroids(self, compositions, mode)?;
        let mut order: Vec<usize> = (1..=self.k).collect();
        order.sort_by(|&a, &b| {
            centroids[b - 1].parts()[0]
                .total_cmp(&centroids[a - 1].parts()[0])
                .then(a.cmp(&b))
        });
        let mut new_label = vec![0usize; self.k + 1];
        for (rank, old) in order.iter().enumerate() {
            new_label[*old] = rank + 1;
        }
        Ok(Self {
            k: self.k,
            ids: self.ids.clone(),
            clusters: self.clusters.iter().map(|c| new_label[*c]).collect(),
        })
    }
}

/// Cuts the tree into `k` clusters by undoing the `k - 1` highest merges.
///
/// Clusters are numbered in order of their first leaf; use
/// [`ClusterAssignment::relabel_by_youngest`] for age-ordered labels.
pub fn cut_tree(d: &Dendrogram, k: usize) -> Result<ClusterAssignment, ClusterError> {
    let n = d.leaf_count();
    if k < 1 || k > n {
        return Err(ClusterError::InvalidK { k, n });
    }
    // union-find over cluster ids 0..2n-1
    let mut parent: Vec<usize> = (0..2 * n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (step, m) in d.merges.iter().take(n - k).enumerate() {
        let c = n + step;
        let (ra, rb) = (find(&mut parent, m.a), find(&mut parent, m.b));
        parent[ra] = c;
        parent[rb] = c;
    }
    let mut root_label: Vec<Option<usize>> = vec![None; 2 * n];
    let mut next = 1;
    let clusters = (0..n)
        .map(|leaf| {
            let r = find(&mut parent, leaf);
            *root_label[r].get_or_insert_with(|| {
                next += 1;
                next - 1
            })
        })
        .collect();
    Ok(ClusterAssignment {
        k,
        ids: d.leaf_labels.clone(),
        clusters,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CentroidMode {
    /// Per-part mean of shares, re-closed.
    Arithmetic,
    /// Inverse clr of the mean clr vector (the compositional center).
    #[default]
    Geometric,
}

/// Centroid composition (closed to 100) of each cluster, in label order.
pub fn cluster_centroids(
    assignment: &ClusterAssignment,
    compositions: &[(u32, Composition)],
    mode: CentroidMode,
) -> Result<Vec<Composition>, ClusterError> {
    (1..=assignment.k)
        .map(|c| {
            let members: Vec<&Composition> = assignment
                .members(c)
                .into_iter()
                .filter_map(|id| compositions.iter().find(|(i, _)| *i == id).map(|(_, x)| x))
                .collect();
            if members.is_empty() {
                return Err(ClusterError::EmptyCluster(c));
            }
            Ok(match mode {
                CentroidMode::Arithmetic => {
                    let dim = members[0].dim();
                    let mut sum = vec![0.0; dim];
                    for m in &members {
                        let shares = m.reclose(100.0)?;
                        if shares.dim() != dim {
                            return Err(crate::error::CodaError::DimensionMismatch {
                                left: dim,
                                right: shares.dim(),
                            }
                            .into());
                        }
                        for (s, p) in sum.iter_mut().zip(shares.parts()) {
                            *s += p;
                        }
                    }
                    closure(&sum, 100.0)?
                }
                CentroidMode::Geometric => {
                    let clrs: Vec<ClrVector> = members.iter().map(|m| clr(m)).collect();
                    clr_inverse(&ClrVector::mean(&clrs)?, 100.0)?
                }
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn matrix(n: usize, v: &[f64]) -> DistanceMatrix {
        DistanceMatrix::new((0..n as u32).collect(), v.to_vec()).unwrap()
    }

    #[test]
    fn two_points_single_merge() {
        let d = ward_linkage(&matrix(2, &[0.0, 0.7, 0.7, 0.0])).unwrap();
        assert_eq!(
            d.merges,
            vec![Merge {
                a: 0,
                b: 1,
                height: 0.7,
                size: 2
            }]
        );
    }

    #[test]
    fn collinear_three_points() {
        #[rustfmt::skip]
        let m = matrix(3, &[
            0.0, 1.0, 2.0,
            1.0, 0.0, 1.0,
            2.0, 1.0, 0.0,
        ]);
        let d = ward_linkage(&m).unwrap();
        assert_eq!((d.merges[0].a, d.merges[0].b), (0, 1));
        assert_eq!(d.merges[0].height, 1.0);
        assert_eq!((d.merges[1].a, d.merges[1].b), (2, 3));
        assert_relative_eq!(d.merges[1].height, 3f64.sqrt(), epsilon = 1e-12);
        assert_eq!(d.merges[1].size, 3);
    }

    #[test]
    fn degenerate_matrix() {
        assert_eq!(ward_linkage(&matrix(1, &[0.0])), Err(ClusterError::DegenerateMatrix(1)));
    }

    #[test]
    fn malformed_matrices() {
        assert!(DistanceMatrix::new(vec![0, 1], vec![0.0, 1.0, 2.0, 0.0]).is_err());
        assert!(DistanceMatrix::new(vec![0, 1], vec![0.1, 1.0, 1.0, 0.0]).is_err());
        assert!(DistanceMatrix::new(vec![0, 1], vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn pairwise_small_cases() {
        let x = closure(&[1.0, 2.0, 3.0], 1.0).unwrap();
        let y = closure(&[3.0, 2.0, 1.0], 1.0).unwrap();
        let one = pairwise_distance_matrix(&[(7, x.clone())]).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one.get(0, 0), 0.0);
        let dup = pairwise_distance_matrix(&[(1, x.clone()), (2, y.clone()), (3, x.clone())]).unwrap();
        assert_eq!(dup.get(0, 2), 0.0);
        assert_eq!(dup.get(0, 1), dup.get(1, 0));
        assert_eq!(dup.get(0, 1), aitchison_distance(&x, &y).unwrap());
        let z = closure(&[1.0, 1.0], 1.0).unwrap();
        assert!(pairwise_distance_matrix(&[(1, x), (2, z)]).is_err());
    }

    #[test]
    fn cut_tree_extremes() {
        #[rustfmt::skip]
        let m = matrix(4, &[
            0.0, 1.0, 5.0, 6.0,
            1.0, 0.0, 5.5, 6.5,
            5.0, 5.5, 0.0, 1.5,
            6.0, 6.5, 1.5, 0.0,
        ]);
        let d = ward_linkage(&m).unwrap();
        assert_eq!(cut_tree(&d, 1).unwrap().clusters, vec![1, 1, 1, 1]);
        assert_eq!(cut_tree(&d, 2).unwrap().clusters, vec![1, 1, 2, 2]);
        assert_eq!(cut_tree(&d, 4).unwrap().clusters, vec![1, 2, 3, 4]);
        assert_eq!(cut_tree(&d, 0), Err(ClusterError::InvalidK { k: 0, n: 4 }));
        assert_eq!(cut_tree(&d, 5), Err(ClusterError::InvalidK { k: 5, n: 4 }));
    }

    #[test]
    fn centroid_of_singleton_is_itself() {
        let x = closure(&[0.8, 0.2], 1.0).unwrap();
        let a = ClusterAssignment {
            k: 1,
            ids: vec![5],
            clusters: vec![1],
        };
        for mode in [CentroidMode::Arithmetic, CentroidMode::Geometric] {
            let c = &cluster_centroids(&a, &[(5, x.clone())], mode).unwrap()[0];
            assert_relative_eq!(c.parts()[0], 80.0, max_relative = 1e-12);
            assert_relative_eq!(c.parts()[1], 20.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn geometric_center_of_mirror_pair() {
        let comps = vec![
            (1, closure(&[0.8, 0.2], 1.0).unwrap()),
            (2, closure(&[0.2, 0.8], 1.0).unwrap()),
        ];
        let a = ClusterAssignment {
            k: 1,
            ids: vec![1, 2],
            clusters: vec![1, 1],
        };
        let c = &cluster_centroids(&a, &comps, CentroidMode::Geometric).unwrap()[0];
        assert_relative_eq!(c.parts()[0], 50.0, max_relative = 1e-12);
        assert_relative_eq!(c.parts()[1], 50.0, max_relative = 1e-12);
    }

    #[test]
    fn empty_cluster_is_reported() {
        let a = ClusterAssignment {
            k: 2,
            ids: vec![1, 2],
            clusters: vec![1, 2],
        };
        let comps = vec![(1, closure(&[0.8, 0.2], 1.0).unwrap())];
        assert_eq!(
            cluster_centroids(&a, &comps, CentroidMode::Geometric),
            Err(ClusterError::EmptyCluster(2))
        );
    }

    #[test]
    fn relabel_puts_youngest_first() {
        let comps = vec![
            (1, closure(&[0.1, 0.9], 1.0).unwrap()),
            (2, closure(&[0.6, 0.4], 1.0).unwrap()),
            (3, closure(&[0.3, 0.7], 1.0).unwrap()),
        ];
        let a = ClusterAssignment {
            k: 3,
            ids: vec![1, 2, 3],
            clusters: vec![1, 2, 3],
        };
        let r = a.relabel_by_youngest(&comps, CentroidMode::Geometric).unwrap();
        assert_eq!(r.clusters, vec![3, 1, 2]);
    }

    #[test]
    fn nested_tree() {
        let d = ward_linkage(&matrix(3, &[0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0])).unwrap();
        let json = serde_json::to_value(d.tree()).unwrap();
        assert_eq!(json["size"], 3);
        assert_eq!(json["children"][0]["id"], 2);
        assert_eq!(json["children"][1]["children"][0]["id"], 0);
    }
}
