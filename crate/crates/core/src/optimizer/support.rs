use serde::Serialize;

use crate::polygons::AnyPolygon;

pub const DEFAULT_ANGLE_TOL: f64 = 1e-3;
pub const DEFAULT_LENGTH_TOL: f64 = 1e-3;

/// Edges sharing (approximately) one direction and one length.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupportCluster {
    /// Unit direction; all zeros for a cluster of collapsed edges.
    pub direction: Vec<f64>,
    pub length: f64,
    pub multiplicity: usize,
    /// Indices of the member edges in the input polygon.
    pub members: Vec<usize>,
}

fn angle_between(u: &[f64], v: &[f64]) -> f64 {
    let chord = u.iter().zip(v).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    2.0 * (0.5 * chord).min(1.0).asin()
}

/// Greedy clustering of edges by direction, then by length.
///
/// An edge joins the first direction group whose seed lies within `angle_tol`
/// radians. Each group is split where consecutive sorted lengths differ by more
/// than `length_tol` relatively. Clusters come back sorted by nonincreasing
/// multiplicity, ties in order of first member.
pub fn detect_support(polygon: &AnyPolygon, angle_tol: f64, length_tol: f64) -> Vec<SupportCluster> {
    let edges = polygon.edge_vecs();
    let floor = 1e-12 * polygon.perimeter();
    let dim = polygon.dim();

    let mut collapsed = Vec::new();
    let mut groups: Vec<(Vec<f64>, Vec<usize>)> = Vec::new();
    for (i, e) in edges.iter().enumerate() {
        let len = e.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len <= floor {
            collapsed.push(i);
            continue;
        }
        let u: Vec<f64> = e.iter().map(|x| x / len).collect();
        match groups.iter_mut().find(|(seed, _)| angle_between(seed, &u) <= angle_tol) {
            Some((_, members)) => members.push(i),
            None => groups.push((u, vec![i])),
        }
    }

    let length = |i: usize| edges[i].iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut clusters = Vec::new();
    for (_, mut members) in groups {
        members.sort_by(|&a, &b| length(a).total_cmp(&length(b)).then(a.cmp(&b)));
        let mut start = 0;
        for k in 1..=members.len() {
            let split = k == members.len() || {
                let (prev, cur) = (length(members[k - 1]), length(members[k]));
                (cur - prev) > length_tol * prev
            };
            if split {
                let mut part: Vec<usize> = members[start..k].to_vec();
                part.sort_unstable();
                clusters.push(summarize(&edges, part, dim));
                start = k;
            }
        }
    }
    if !collapsed.is_empty() {
        clusters.push(SupportCluster {
            direction: vec![0.0; dim],
            length: 0.0,
            multiplicity: collapsed.len(),
            members: collapsed,
        });
    }
    clusters.sort_by(|a, b| b.multiplicity.cmp(&a.multiplicity).then(a.members[0].cmp(&b.members[0])));
    clusters
}

fn summarize(edges: &[Vec<f64>], members: Vec<usize>, dim: usize) -> SupportCluster {
    let mut mean = vec![0.0; dim];
    for &i in &members {
        mean.iter_mut().zip(&edges[i]).for_each(|(m, x)| *m += x);
    }
    let k = members.len() as f64;
    mean.iter_mut().for_each(|m| *m /= k);
    let len = mean.iter().map(|x| x * x).sum::<f64>().sqrt();
    SupportCluster {
        direction: mean.iter().map(|x| x / len).collect(),
        length: len,
        multiplicity: members.len(),
        members,
    }
}

/// Multiplicities of a clustering, in cluster order.
pub fn multiplicities(clusters: &[SupportCluster]) -> Vec<usize> {
    clusters.iter().map(|c| c.multiplicity).collect()
}
