//! Dimensionality-reduction methods producing low-dimensional configurations.
//!
//! Every method returns a [`ReductionResult`] whose embedding keeps the item
//! order (and labels) of its input. Spectral axes have their sign fixed so the
//! largest-magnitude coordinate is positive, which makes outputs comparable
//! across runs and platforms.

mod classical;
pub mod graph;
mod isomap;
mod laplacian;
mod lle;
mod pca;
mod smacof;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{euclidean_distances, Configuration};

pub use classical::classical_mds;
pub use graph::GraphReport;
pub use isomap::{geodesic_distances, isomap};
pub use laplacian::laplacian_eigenmaps;
pub use lle::{lle, DEFAULT_LLE_REG};
pub use pca::pca;
pub use smacof::{local_smacof, local_weights, smacof, stress, SmacofInit, SmacofParams, Transform};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum Method {
    Pca {
        #[serde(default)]
        use_correlation: bool,
    },
    ClassicalMds,
    Smacof(SmacofParams),
    LocalSmacof {
        #[serde(default = "default_quantile")]
        quantile: f64,
        #[serde(default, flatten)]
        smacof: SmacofParams,
    },
    Lle {
        #[serde(default = "default_neighbors")]
        n_neighbors: usize,
        #[serde(default = "default_reg")]
        reg: f64,
    },
    Isomap {
        #[serde(default = "default_neighbors")]
        n_neighbors: usize,
    },
    LaplacianEigenmaps {
        #[serde(default = "default_neighbors")]
        n_neighbors: usize,
        /// Heat-kernel width; `None` means binary weights.
        #[serde(default)]
        t: Option<f64>,
    },
}

fn default_quantile() -> f64 {
    0.10
}

fn default_neighbors() -> usize {
    10
}

fn default_reg() -> f64 {
    DEFAULT_LLE_REG
}

impl Method {
    pub const NAMES: [&'static str; 7] =
        ["pca", "classical_mds", "smacof", "local_smacof", "lle", "isomap", "laplacian_eigenmaps"];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Pca { .. } => "pca",
            Method::ClassicalMds => "classical_mds",
            Method::Smacof(_) => "smacof",
            Method::LocalSmacof { .. } => "local_smacof",
            Method::Lle { .. } => "lle",
            Method::Isomap { .. } => "isomap",
            Method::LaplacianEigenmaps { .. } => "laplacian_eigenmaps",
        }
    }

    /// The method with its default parameters.
    pub fn from_name(name: &str) -> Result<Method> {
        Ok(match name {
            "pca" => Method::Pca { use_correlation: false },
            "classical_mds" => Method::ClassicalMds,
            "smacof" => Method::Smacof(SmacofParams::default()),
            "local_smacof" => Method::LocalSmacof { quantile: default_quantile(), smacof: SmacofParams::default() },
            "lle" => Method::Lle { n_neighbors: default_neighbors(), reg: DEFAULT_LLE_REG },
            "isomap" => Method::Isomap { n_neighbors: default_neighbors() },
            "laplacian_eigenmaps" => Method::LaplacianEigenmaps { n_neighbors: default_neighbors(), t: None },
            other => return Err(Error::Unknown { what: "method", name: other.to_string() }),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionRequest {
    pub method: Method,
    pub target_dim: usize,
    #[serde(default)]
    pub seed: u64,
}

impl ReductionRequest {
    pub fn new(method: Method, target_dim: usize) -> Self {
        Self { method, target_dim, seed: 0 }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Method-specific fit information.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Diagnostics {
    Spectral(SpectralDiagnostics),
    Smacof(SmacofDiagnostics),
}

impl Diagnostics {
    pub fn warnings(&self) -> &[String] {
        match self {
            Diagnostics::Spectral(s) => &s.warnings,
            Diagnostics::Smacof(s) => &s.warnings,
        }
    }

    pub fn spectral(&self) -> Option<&SpectralDiagnostics> {
        match self {
            Diagnostics::Spectral(s) => Some(s),
            Diagnostics::Smacof(_) => None,
        }
    }

    pub fn smacof(&self) -> Option<&SmacofDiagnostics> {
        match self {
            Diagnostics::Smacof(s) => Some(s),
            Diagnostics::Spectral(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralDiagnostics {
    /// Full spectrum of the decomposed matrix, ordered from the most to the
    /// least significant axis.
    pub eigenvalues: Vec<f64>,
    /// Eigenvalues of the returned axes, in axis order. Non-increasing for
    /// PCA and classical MDS; non-decreasing for the bottom-spectrum methods
    /// (LLE, Laplacian eigenmaps).
    pub axis_eigenvalues: Vec<f64>,
    /// Fraction of total variance per returned axis (PCA and classical MDS).
    pub explained_variance: Option<Vec<f64>>,
    pub graph: Option<GraphReport>,
    /// LLE: number of items whose local Gram matrix was ridge-regularized.
    pub regularized_items: Option<usize>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmacofDiagnostics {
    pub stress: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Stress of the starting configuration followed by one entry per iteration.
    pub stress_history: Vec<f64>,
    pub init: String,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionResult {
    pub embedding: Configuration,
    pub diagnostics: Diagnostics,
}

fn require_complete(config: &Configuration, method: &str) -> Result<()> {
    if config.is_complete() {
        Ok(())
    } else {
        Err(Error::MissingData(format!("{method} needs a fully observed configuration; impute first")))
    }
}

pub(crate) fn check_target_dim(target_dim: usize, n: usize) -> Result<()> {
    if target_dim < 1 {
        return Err(Error::InvalidParameter("target dimensionality must be >= 1".into()));
    }
    if target_dim >= n {
        return Err(Error::InvalidParameter(format!(
            "target dimensionality {target_dim} must be below the item count {n}"
        )));
    }
    Ok(())
}

/// Runs a reduction of coordinate data.
///
/// Distance-based methods use the Euclidean distances of `source`.
pub fn reduce(source: &Configuration, request: &ReductionRequest) -> Result<ReductionResult> {
    let k = request.target_dim;
    if k >= source.dim() {
        return Err(Error::InvalidParameter(format!(
            "target dimensionality {k} must be below the source dimensionality {}",
            source.dim()
        )));
    }
    let name = request.method.name();
    require_complete(source, name)?;
    let result = match &request.method {
        Method::Pca { use_correlation } => pca(source, k, *use_correlation)?,
        Method::ClassicalMds => classical_mds(&euclidean_distances(source, 2.0)?, k)?,
        Method::Smacof(params) => smacof(&euclidean_distances(source, 2.0)?, k, None, params, request.seed)?,
        Method::LocalSmacof { quantile, smacof } => {
            local_smacof(&euclidean_distances(source, 2.0)?, k, *quantile, smacof, request.seed)?
        }
        Method::Lle { n_neighbors, reg } => lle(source, k, *n_neighbors, *reg)?,
        Method::Isomap { n_neighbors } => isomap(source, k, *n_neighbors)?,
        Method::LaplacianEigenmaps { n_neighbors, t } => laplacian_eigenmaps(source, k, *n_neighbors, *t)?,
    };
    Ok(ReductionResult { embedding: result.embedding.copy_labels_from(source), diagnostics: result.diagnostics })
}

/// Builds an `n x k` configuration from `k` columns of length `n`.
pub(crate) fn from_columns(cols: &[Vec<f64>]) -> Result<Configuration> {
    let k = cols.len();
    let n = cols.first().map_or(0, Vec::len);
    let mut values = Vec::with_capacity(n * k);
    for i in 0..n {
        for c in cols {
            values.push(c[i]);
        }
    }
    Configuration::from_flat(n, k, values)
}
