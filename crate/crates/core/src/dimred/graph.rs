//! Neighborhood graphs shared by the graph-based methods.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{rank_structure, ProximityMatrix};

/// Summary of a k-nearest-neighbor graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GraphReport {
    pub n_neighbors: usize,
    /// Undirected edges after symmetrization.
    pub edges: usize,
    /// Connected component sizes, largest first.
    pub components: Vec<usize>,
}

/// Undirected kNN graph: an edge joins `i` and `j` when either lists the
/// other among its `n_neighbors` nearest (ties broken by index).
#[derive(Debug, Clone)]
pub(crate) struct KnnGraph {
    pub adj: Vec<Vec<(usize, f64)>>,
    pub report: GraphReport,
}

pub(crate) fn knn_graph(dist: &ProximityMatrix, n_neighbors: usize) -> Result<KnnGraph> {
    let n = dist.n();
    if n_neighbors < 1 || n_neighbors >= n {
        return Err(Error::InvalidParameter(format!(
            "n_neighbors must lie in 1..={} for {n} items, got {n_neighbors}",
            n.saturating_sub(1)
        )));
    }
    let ranks = rank_structure(dist);
    let mut flags = vec![false; n * n];
    for i in 0..n {
        for &j in &ranks.neighbors_of(i)[..n_neighbors] {
            let j = j as usize;
            flags[i * n + j] = true;
            flags[j * n + i] = true;
        }
    }
    let mut adj = vec![Vec::new(); n];
    let mut edges = 0;
    for i in 0..n {
        for j in 0..n {
            if flags[i * n + j] {
                adj[i].push((j, dist.get(i, j)));
                if j > i {
                    edges += 1;
                }
            }
        }
    }
    let components = components_from_edges(n, (0..n).flat_map(|i| adj[i].iter().map(move |&(j, _)| (i, j))));
    Ok(KnnGraph { adj, report: GraphReport { n_neighbors, edges, components } })
}

/// Connected component sizes (largest first) of the graph on `n` nodes.
pub(crate) fn components_from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut sizes = vec![0usize; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        sizes[r] += 1;
    }
    let mut out: Vec<usize> = sizes.into_iter().filter(|&s| s > 0).collect();
    out.sort_unstable_by(|a, b| b.cmp(a));
    out
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

/// Shortest-path lengths from `source` (infinite when unreachable).
pub(crate) fn dijkstra(adj: &[Vec<(usize, f64)>], source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adj.len()];
    dist[source] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(Entry(0.0, source));
    while let Some(Entry(d, u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, w) in &adj[u] {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Entry(nd, v));
            }
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::MetricTag;

    fn line(n: usize) -> ProximityMatrix {
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                d[i * n + j] = (i as f64 - j as f64).abs();
            }
        }
        ProximityMatrix::from_distances(n, d, MetricTag::Precomputed).unwrap()
    }

    #[test]
    fn path_graph() {
        let g = knn_graph(&line(6), 1).unwrap();
        assert_eq!(g.report.edges, 5);
        assert_eq!(g.report.components, vec![6]);
        let d = dijkstra(&g.adj, 0);
        assert_eq!(d, vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn component_sizes() {
        assert_eq!(components_from_edges(6, [(0, 1), (2, 3), (3, 4)]), vec![3, 2, 1]);
        assert_eq!(components_from_edges(3, []), vec![1, 1, 1]);
    }

    #[test]
    fn neighbor_bounds() {
        assert!(knn_graph(&line(4), 0).is_err());
        assert!(knn_graph(&line(4), 4).is_err());
        assert!(knn_graph(&line(4), 3).is_ok());
    }
}
