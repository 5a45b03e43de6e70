use super::{check_target_dim, from_columns, Diagnostics, ReductionResult, SpectralDiagnostics};
use crate::error::{Error, Result};
use crate::geometry::ProximityMatrix;
use crate::linalg::sym_eigen;

/// Torgerson scalar products `-1/2 J D^2 J`, row-major.
pub(crate) fn double_centered(dist: &ProximityMatrix) -> Vec<f64> {
    let n = dist.n();
    let sq: Vec<f64> = dist.values().iter().map(|d| d * d).collect();
    let row_means: Vec<f64> = sq.chunks(n).map(|r| r.iter().sum::<f64>() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    let mut b = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let v = -0.5 * (sq[i * n + j] - row_means[i] - row_means[j] + grand);
            b[i * n + j] = v;
            b[j * n + i] = v;
        }
    }
    b
}

/// Classical (Torgerson) MDS of a distance matrix.
///
/// Eigenvalues within a small tolerance of zero give all-zero axes; negative
/// eigenvalues are truncated and reported as warnings.
pub fn classical_mds(dist: &ProximityMatrix, target_dim: usize) -> Result<ReductionResult> {
    let dist = dist.to_distances();
    let n = dist.n();
    check_target_dim(target_dim, n)?;
    let b = double_centered(&dist);
    let eig = sym_eigen(n, &b)?;
    let descending: Vec<f64> = eig.values.iter().rev().copied().collect();
    let scale = descending.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let tol = 1e-10 * scale.max(f64::MIN_POSITIVE);

    // the constant vector always spans a null direction of the centered matrix
    let usable = descending.iter().filter(|&&v| v >= -tol).count().saturating_sub(1);
    if usable < target_dim {
        return Err(Error::InsufficientRank { available: usable, required: target_dim });
    }
    let mut warnings = Vec::new();
    let negative = descending.iter().filter(|&&v| v < -tol).count();
    if negative > 0 {
        warnings.push(format!("truncated {negative} negative eigenvalues to zero"));
    }
    let mut cols = Vec::with_capacity(target_dim);
    let mut axis_eigenvalues = Vec::with_capacity(target_dim);
    for axis in 0..target_dim {
        let lambda = descending[axis];
        if lambda <= tol {
            warnings.push(format!("axis {} has a zero eigenvalue; coordinates set to 0", axis + 1));
            cols.push(vec![0.0; n]);
            axis_eigenvalues.push(0.0);
        } else {
            let root = lambda.sqrt();
            cols.push(eig.vector(n - 1 - axis).into_iter().map(|v| v * root).collect());
            axis_eigenvalues.push(lambda);
        }
    }
    let positive_total: f64 = descending.iter().filter(|&&v| v > tol).sum();
    let explained = axis_eigenvalues
        .iter()
        .map(|v| if positive_total > 0.0 { v / positive_total } else { 0.0 })
        .collect();
    Ok(ReductionResult {
        embedding: from_columns(&cols)?,
        diagnostics: Diagnostics::Spectral(SpectralDiagnostics {
            eigenvalues: descending,
            axis_eigenvalues,
            explained_variance: Some(explained),
            graph: None,
            regularized_items: None,
            warnings,
        }),
    })
}
