use rayon::prelude::*;

use super::classical::classical_mds;
use super::graph::{dijkstra, knn_graph, GraphReport};
use super::{check_target_dim, Diagnostics, ReductionResult};
use crate::error::{Error, Result};
use crate::geometry::{euclidean_distances, Configuration, MetricTag, ProximityMatrix};

/// Shortest-path distances through the symmetrized kNN graph of `dist`.
///
/// Fails with [`Error::Disconnected`] when the graph has several components.
pub fn geodesic_distances(dist: &ProximityMatrix, n_neighbors: usize) -> Result<(ProximityMatrix, GraphReport)> {
    let dist = dist.to_distances();
    let n = dist.n();
    let graph = knn_graph(&dist, n_neighbors)?;
    if graph.report.components.len() > 1 {
        return Err(Error::Disconnected {
            context: format!("kNN graph with n_neighbors = {n_neighbors}"),
            sizes: graph.report.components.clone(),
        });
    }
    let rows: Vec<Vec<f64>> = (0..n).into_par_iter().map(|s| dijkstra(&graph.adj, s)).collect();
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..i {
            // both directions are the same path length up to rounding; keep the smaller
            let v = rows[i][j].min(rows[j][i]);
            values[i * n + j] = v;
            values[j * n + i] = v;
        }
    }
    let geo = ProximityMatrix::from_distances(n, values, MetricTag::Geodesic { n_neighbors })?;
    Ok((geo, graph.report))
}

/// Isomap: classical MDS of graph geodesic distances.
pub fn isomap(source: &Configuration, target_dim: usize, n_neighbors: usize) -> Result<ReductionResult> {
    check_target_dim(target_dim, source.n())?;
    let dist = euclidean_distances(source, 2.0)?;
    let (geo, report) = geodesic_distances(&dist, n_neighbors)?;
    let mut result = classical_mds(&geo, target_dim)?;
    if let Diagnostics::Spectral(s) = &mut result.diagnostics {
        s.graph = Some(report);
    }
    Ok(result)
}
