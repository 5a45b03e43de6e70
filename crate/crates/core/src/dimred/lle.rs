use rayon::prelude::*;

use super::graph::{components_from_edges, GraphReport};
use super::{check_target_dim, from_columns, Diagnostics, ReductionResult, SpectralDiagnostics};
use crate::error::{Error, Result};
use crate::geometry::{config_ranks, Configuration};
use crate::linalg::{solve_small, sym_eigen};

/// Default ridge, relative to the trace of the local Gram matrix.
pub const DEFAULT_LLE_REG: f64 = 1e-3;

/// Reconstruction weights of item `i` from its neighbors, and whether the
/// ridge was applied.
fn local_weights(config: &Configuration, i: usize, nbrs: &[u32], reg: f64) -> (Vec<f64>, bool) {
    let kk = nbrs.len();
    let m = config.dim();
    let xi = config.row(i);
    let z: Vec<f64> = nbrs
        .iter()
        .flat_map(|&j| config.row(j as usize).iter().zip(xi).map(|(a, b)| a - b))
        .collect();
    let mut g = vec![0.0; kk * kk];
    for a in 0..kk {
        for b in 0..=a {
            let v: f64 = (0..m).map(|l| z[a * m + l] * z[b * m + l]).sum();
            g[a * kk + b] = v;
            g[b * kk + a] = v;
        }
    }
    let trace: f64 = (0..kk).map(|a| g[a * kk + a]).sum();
    let solve = |ridge: f64| {
        let mut a = g.clone();
        for d in 0..kk {
            a[d * kk + d] += ridge;
        }
        let mut w = vec![1.0; kk];
        solve_small(kk, &mut a, &mut w, 1e-12).map(|_| w)
    };
    let ridge = reg * trace;
    let (w, regularized) = if kk > m {
        (solve(ridge), true)
    } else {
        match solve(0.0) {
            Some(w) => (Some(w), false),
            None => (solve(ridge), true),
        }
    };
    match w {
        Some(mut w) => {
            let s: f64 = w.iter().sum();
            if s.abs() > 0.0 && s.is_finite() {
                w.iter_mut().for_each(|v| *v /= s);
                (w, regularized)
            } else {
                (vec![1.0 / kk as f64; kk], true)
            }
        }
        // all neighbors coincide with the item
        None => (vec![1.0 / kk as f64; kk], true),
    }
}

/// Locally linear embedding with `n_neighbors` neighbors per item.
pub fn lle(source: &Configuration, target_dim: usize, n_neighbors: usize, reg: f64) -> Result<ReductionResult> {
    let n = source.n();
    check_target_dim(target_dim, n)?;
    if n_neighbors < 1 || n_neighbors >= n {
        return Err(Error::InvalidParameter(format!(
            "n_neighbors must lie in 1..={} for {n} items, got {n_neighbors}",
            n - 1
        )));
    }
    if !(reg >= 0.0 && reg.is_finite()) {
        return Err(Error::InvalidParameter(format!("reg must be finite and >= 0, got {reg}")));
    }
    if target_dim + 1 >= n {
        return Err(Error::InvalidParameter("LLE needs at least target_dim + 2 items".into()));
    }
    let ranks = config_ranks(source)?;
    let per_item: Vec<(Vec<f64>, bool)> = (0..n)
        .into_par_iter()
        .map(|i| local_weights(source, i, &ranks.neighbors_of(i)[..n_neighbors], reg))
        .collect();
    let regularized = per_item.iter().filter(|(_, r)| *r).count();

    // M = (I - W)^T (I - W), accumulated from the sparse rows of I - W
    let mut m = vec![0.0; n * n];
    for (i, (w, _)) in per_item.iter().enumerate() {
        let mut row: Vec<(usize, f64)> = vec![(i, 1.0)];
        row.extend(ranks.neighbors_of(i)[..n_neighbors].iter().zip(w).map(|(&j, &v)| (j as usize, -v)));
        for &(a, x) in &row {
            for &(b, y) in &row {
                m[a * n + b] += x * y;
            }
        }
    }
    let eig = sym_eigen(n, &m)?;

    let components = components_from_edges(
        n,
        (0..n).flat_map(|i| ranks.neighbors_of(i)[..n_neighbors].iter().map(move |&j| (i, j as usize))),
    );
    let mut warnings = Vec::new();
    if components.len() > 1 {
        warnings.push(format!("neighbor graph has {} components; embedding may be degenerate", components.len()));
    }
    let mut cols = Vec::with_capacity(target_dim);
    for axis in 1..=target_dim {
        cols.push(eig.vector(axis));
    }
    let edges = {
        let mut e = std::collections::BTreeSet::new();
        for i in 0..n {
            for &j in &ranks.neighbors_of(i)[..n_neighbors] {
                e.insert((i.min(j as usize), i.max(j as usize)));
            }
        }
        e.len()
    };
    Ok(ReductionResult {
        embedding: from_columns(&cols)?,
        diagnostics: Diagnostics::Spectral(SpectralDiagnostics {
            eigenvalues: eig.values.clone(),
            axis_eigenvalues: eig.values[1..=target_dim].to_vec(),
            explained_variance: None,
            graph: Some(GraphReport { n_neighbors, edges, components }),
            regularized_items: Some(regularized),
            warnings,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_reconstruct_interior_point() {
        // point at the centroid of a square of neighbors in the plane, K > m
        let c = Configuration::from_rows(&[
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![-1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.0, -1.0],
        ])
        .unwrap();
        let (w, reg) = local_weights(&c, 0, &[1, 2, 3, 4], DEFAULT_LLE_REG);
        assert!(reg);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for v in &w {
            assert!((v - 0.25).abs() < 1e-9);
        }
    }

    #[test]
    fn line_is_ordered() {
        let rows: Vec<Vec<f64>> = (0..30).map(|i| {
            let t = i as f64 / 29.0;
            vec![t, t * t]
        }).collect();
        let c = Configuration::from_rows(&rows).unwrap();
        let r = lle(&c, 1, 4, DEFAULT_LLE_REG).unwrap();
        let x: Vec<f64> = (0..30).map(|i| r.embedding.get(i, 0)).collect();
        let up = x.windows(2).all(|w| w[1] > w[0]);
        let down = x.windows(2).all(|w| w[1] < w[0]);
        assert!(up || down, "{x:?}");
        let ev = &r.diagnostics.spectral().unwrap().axis_eigenvalues;
        assert!(ev[0] >= -1e-10);
    }

    #[test]
    fn parameter_errors() {
        let c = Configuration::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0], vec![2.0, 2.0], vec![3.0, 1.0]]).unwrap();
        assert!(lle(&c, 1, 0, 1e-3).is_err());
        assert!(lle(&c, 1, 4, 1e-3).is_err());
        assert!(lle(&c, 1, 2, -1.0).is_err());
    }
}
