use super::graph::knn_graph;
use super::{check_target_dim, from_columns, Diagnostics, ReductionResult, SpectralDiagnostics};
use crate::error::{Error, Result};
use crate::geometry::{euclidean_distances, Configuration};
use crate::linalg::{fix_sign, sym_eigen};

/// Laplacian eigenmaps on the symmetrized kNN graph.
///
/// Edge weights are `exp(-d^2 / t)` for a heat-kernel width `t`, or 1 when
/// `t` is `None`. Solves `L f = lambda D f` through the normalized Laplacian
/// and returns the eigenvectors after the constant one.
pub fn laplacian_eigenmaps(
    source: &Configuration,
    target_dim: usize,
    n_neighbors: usize,
    t: Option<f64>,
) -> Result<ReductionResult> {
    let n = source.n();
    check_target_dim(target_dim, n)?;
    if target_dim + 1 >= n {
        return Err(Error::InvalidParameter("Laplacian eigenmaps need at least target_dim + 2 items".into()));
    }
    if let Some(t) = t {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidParameter(format!("heat-kernel width must be positive, got {t}")));
        }
    }
    let dist = euclidean_distances(source, 2.0)?;
    let graph = knn_graph(&dist, n_neighbors)?;
    if graph.report.components.len() > 1 {
        return Err(Error::Disconnected {
            context: format!("kNN graph with n_neighbors = {n_neighbors}"),
            sizes: graph.report.components.clone(),
        });
    }
    let weight = |d: f64| match t {
        Some(t) => (-d * d / t).exp(),
        None => 1.0,
    };
    let mut w = vec![0.0; n * n];
    for (i, nbrs) in graph.adj.iter().enumerate() {
        for &(j, d) in nbrs {
            w[i * n + j] = weight(d);
        }
    }
    let degree: Vec<f64> = w.chunks(n).map(|r| r.iter().sum()).collect();
    if let Some(i) = degree.iter().position(|&d| d <= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "item {i} has zero total edge weight; increase t"
        )));
    }
    let inv_sqrt: Vec<f64> = degree.iter().map(|d| 1.0 / d.sqrt()).collect();
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let v = -w[i * n + j] * inv_sqrt[i] * inv_sqrt[j];
            l[i * n + j] = if i == j { 1.0 + v } else { v };
        }
    }
    let eig = sym_eigen(n, &l)?;
    let mut cols = Vec::with_capacity(target_dim);
    for axis in 1..=target_dim {
        let g = eig.vector(axis);
        let mut f: Vec<f64> = g.iter().zip(&inv_sqrt).map(|(a, b)| a * b).collect();
        let norm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            f.iter_mut().for_each(|v| *v /= norm);
        }
        fix_sign(&mut f);
        cols.push(f);
    }
    Ok(ReductionResult {
        embedding: from_columns(&cols)?,
        diagnostics: Diagnostics::Spectral(SpectralDiagnostics {
            eigenvalues: eig.values.clone(),
            axis_eigenvalues: eig.values[1..=target_dim].to_vec(),
            explained_variance: None,
            graph: Some(graph.report),
            regularized_items: None,
            warnings: Vec::new(),
        }),
    })
}
