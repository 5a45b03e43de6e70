use super::{check_target_dim, from_columns, Diagnostics, ReductionResult, SpectralDiagnostics};
use crate::error::{Error, Result};
use crate::geometry::Configuration;
use crate::linalg::{fix_sign, sym_eigen};

/// Principal component scores for the top `target_dim` components of the
/// covariance (or correlation) matrix of the columns.
pub fn pca(config: &Configuration, target_dim: usize, use_correlation: bool) -> Result<ReductionResult> {
    let (n, m) = (config.n(), config.dim());
    check_target_dim(target_dim, n)?;
    if target_dim > m {
        return Err(Error::InvalidParameter(format!("cannot extract {target_dim} components from {m} columns")));
    }
    if !config.is_complete() {
        return Err(Error::MissingData("pca needs a fully observed configuration".into()));
    }

    let mut centered = config.values().to_vec();
    for l in 0..m {
        let mean = (0..n).map(|i| config.get(i, l)).sum::<f64>() / n as f64;
        let mut ss = 0.0;
        for i in 0..n {
            let v = centered[i * m + l] - mean;
            centered[i * m + l] = v;
            ss += v * v;
        }
        if use_correlation {
            if ss == 0.0 {
                return Err(Error::ZeroVarianceColumn { column: l });
            }
            let sd = (ss / (n - 1) as f64).sqrt();
            for i in 0..n {
                centered[i * m + l] /= sd;
            }
        }
    }

    let mut cov = vec![0.0; m * m];
    for row in centered.chunks(m) {
        for a in 0..m {
            for b in 0..=a {
                cov[a * m + b] += row[a] * row[b];
            }
        }
    }
    for a in 0..m {
        for b in 0..=a {
            let v = cov[a * m + b] / (n - 1) as f64;
            cov[a * m + b] = v;
            cov[b * m + a] = v;
        }
    }

    let eig = sym_eigen(m, &cov)?;
    let descending: Vec<f64> = eig.values.iter().rev().copied().collect();
    let total: f64 = descending.iter().map(|v| v.max(0.0)).sum();
    let mut cols = Vec::with_capacity(target_dim);
    for axis in 0..target_dim {
        let q = eig.vector(m - 1 - axis);
        let mut scores: Vec<f64> = centered
            .chunks(m)
            .map(|row| row.iter().zip(&q).map(|(x, w)| x * w).sum())
            .collect();
        fix_sign(&mut scores);
        cols.push(scores);
    }
    let axis_eigenvalues = descending[..target_dim].to_vec();
    let explained = axis_eigenvalues.iter().map(|v| if total > 0.0 { v / total } else { 0.0 }).collect();
    Ok(ReductionResult {
        embedding: from_columns(&cols)?,
        diagnostics: Diagnostics::Spectral(SpectralDiagnostics {
            eigenvalues: descending,
            axis_eigenvalues,
            explained_variance: Some(explained),
            graph: None,
            regularized_items: None,
            warnings: Vec::new(),
        }),
    })
}
