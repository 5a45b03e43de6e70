//! Pipeline configuration (JSON, schema version 1).
//!
//! ```json
//! {
//!   "version": 1,
//!   "seed": 7,
//!   "io": { "output_dir": "out", "score_table": "scores.csv" },
//!   "stages": [
//!     { "stage": "generate", "name": "roll", "shape": "swiss_roll", "n": 1000 },
//!     { "stage": "reduce", "source": "roll", "methods": [{ "method": "pca" }, { "method": "lle", "n_neighbors": [5, 10] }] },
//!     { "stage": "agree", "reference": "roll", "range_k": ["all", "1-10"] },
//!     { "stage": "plot", "type": "lift", "reference": "roll", "embeddings": ["roll/pca", "roll/lle(n_neighbors=5)"] }
//!   ]
//! }
//! ```
//!
//! A method parameter given as an array is swept: the reduce stage runs the
//! cartesian product of all swept parameters.

use std::path::{Path, PathBuf};

use drqa_core::dimred::Method;
use drqa_core::manifolds::{ManifoldShape, ShapeParams};
use drqa_core::viz::{PlotType, RenderSpec};
use drqa_core::{KRange, WeightFunction};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub version: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub imputation: ImputationPolicy,
    /// Reuse rank structures and reductions within a run.
    #[serde(default = "yes")]
    pub cache: bool,
    pub io: IoConfig,
    #[serde(default)]
    pub stages: Vec<Stage>,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImputationPolicy {
    None,
    #[default]
    ColumnMean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IoConfig {
    pub output_dir: PathBuf,
    /// Base for relative ingest paths; defaults to the config file's directory.
    #[serde(default)]
    pub input_dir: Option<PathBuf>,
    /// Score table file name inside `output_dir`; no table when absent.
    #[serde(default)]
    pub score_table: Option<String>,
    #[serde(default = "manifest_name")]
    pub manifest: String,
}

fn manifest_name() -> String {
    "manifest.json".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "snake_case", deny_unknown_fields)]
pub enum Stage {
    Generate {
        name: String,
        shape: ManifoldShape,
        n: usize,
        #[serde(default)]
        params: ShapeParams,
    },
    Ingest {
        name: String,
        path: PathBuf,
        #[serde(default = "yes")]
        has_header: bool,
        #[serde(default = "missing_token")]
        missing_token: String,
    },
    Reduce {
        source: String,
        #[serde(default = "two")]
        target_dim: usize,
        /// Method records, each `{"method": name, ...params}`.
        methods: Vec<Value>,
    },
    Agree {
        reference: String,
        /// Defaults to every embedding reduced from `reference`.
        #[serde(default)]
        embeddings: Option<Vec<String>>,
        /// Third configuration for partial agreement.
        #[serde(default)]
        z: Option<String>,
        #[serde(default = "all_k")]
        range_k: Vec<KRange>,
        #[serde(default = "taper")]
        weight: WeightFunction,
        #[serde(default)]
        per_item: bool,
        #[serde(default)]
        co_ranking: bool,
        /// Neighborhood sizes for intrusion/extrusion tallies.
        #[serde(default)]
        movements: Vec<usize>,
    },
    Plot {
        #[serde(rename = "type")]
        plot: PlotType,
        /// Output file stem.
        #[serde(default)]
        name: Option<String>,
        reference: String,
        embeddings: Vec<String>,
        #[serde(default)]
        labels: Option<Vec<String>>,
        #[serde(default)]
        render: RenderSpec,
        #[serde(default)]
        binary: bool,
    },
}

fn missing_token() -> String {
    "NA".into()
}

fn two() -> usize {
    2
}

fn all_k() -> Vec<KRange> {
    vec![KRange::All]
}

fn taper() -> WeightFunction {
    WeightFunction::LinearTaper
}

impl Stage {
    pub fn kind(&self) -> &'static str {
        match self {
            Stage::Generate { .. } => "generate",
            Stage::Ingest { .. } => "ingest",
            Stage::Reduce { .. } => "reduce",
            Stage::Agree { .. } => "agree",
            Stage::Plot { .. } => "plot",
        }
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: PipelineConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if config.version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "unsupported version {} (expected {SCHEMA_VERSION})",
                config.version
            )));
        }
        Ok(config)
    }

    /// Reads a config file. A relative `output_dir` (and the default input
    /// base) resolve against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut config = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        if config.io.output_dir.is_relative() {
            config.io.output_dir = base.join(&config.io.output_dir);
        }
        let input = config.io.input_dir.take().unwrap_or_default();
        config.io.input_dir = Some(if input.is_relative() { base.join(input) } else { input });
        Ok(config)
    }
}

/// One concrete parameter set of a (possibly swept) method record.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodSet {
    pub method: Method,
    /// The swept parameters and their values for this set, sorted by key.
    pub swept: Vec<(String, Value)>,
}

/// Expands array-valued parameters into their cartesian product and parses
/// each combination, rejecting parameters the method does not take.
pub fn expand_method(record: &Value) -> Result<Vec<MethodSet>> {
    let obj = record.as_object().ok_or_else(|| CliError::Config(format!("method record must be an object: {record}")))?;
    let mut fixed = Map::new();
    let mut swept: Vec<(String, Vec<Value>)> = Vec::new();
    for (k, v) in obj {
        match v {
            Value::Array(vs) if k != "method" => {
                if vs.is_empty() {
                    return Err(CliError::Config(format!("parameter `{k}` sweeps over no values")));
                }
                swept.push((k.clone(), vs.clone()));
            }
            _ => {
                fixed.insert(k.clone(), v.clone());
            }
        }
    }
    swept.sort_by(|a, b| a.0.cmp(&b.0));
    let mut combos: Vec<Vec<(String, Value)>> = vec![Vec::new()];
    for (k, vs) in &swept {
        combos = combos
            .into_iter()
            .flat_map(|c| {
                vs.iter().map(move |v| {
                    let mut c = c.clone();
                    c.push((k.clone(), v.clone()));
                    c
                })
            })
            .collect();
    }
    combos
        .into_iter()
        .map(|combo| {
            let mut obj = fixed.clone();
            obj.extend(combo.iter().cloned());
            let method = parse_method(&obj)?;
            Ok(MethodSet { method, swept: combo })
        })
        .collect()
}

/// Parses `{"method": name, ...}`. Unknown parameters are rejected by
/// checking every given key survives a serialization round trip.
pub fn parse_method(obj: &Map<String, Value>) -> Result<Method> {
    let value = Value::Object(obj.clone());
    let method: Method = serde_json::from_value(value).map_err(|e| CliError::Config(format!("method {obj:?}: {e}")))?;
    let back = serde_json::to_value(&method).expect("methods serialize");
    let known = back.as_object().expect("methods serialize to objects");
    if let Some(k) = obj.keys().find(|k| !known.contains_key(*k)) {
        return Err(CliError::Config(format!("{} takes no parameter `{k}`", method.name())));
    }
    Ok(method)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn zero_stages() {
        let c = PipelineConfig::from_json(r#"{"version": 1, "io": {"output_dir": "out"}}"#).unwrap();
        assert!(c.stages.is_empty());
        assert!(c.cache);
        assert_eq!(c.imputation, ImputationPolicy::ColumnMean);
    }

    #[test]
    fn unknown_keys_rejected() {
        for bad in [
            r#"{"version": 1, "io": {"output_dir": "o"}, "sead": 3}"#,
            r#"{"version": 1, "io": {"output_dir": "o", "x": 1}}"#,
            r#"{"version": 1, "io": {"output_dir": "o"}, "stages": [{"stage": "generate", "name": "a", "shape": "swiss_roll", "n": 10, "m": 3}]}"#,
            r#"{"version": 1, "io": {"output_dir": "o"}, "stages": [{"stage": "plot", "type": "lift", "reference": "a", "embeddings": [], "colour": 1}]}"#,
            r#"{"version": 2, "io": {"output_dir": "o"}}"#,
        ] {
            assert!(PipelineConfig::from_json(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn sweep_is_cartesian() {
        let sets = expand_method(&json!({"method": "laplacian_eigenmaps", "n_neighbors": [5, 10, 15], "t": [null, 2.0]})).unwrap();
        assert_eq!(sets.len(), 6);
        assert_eq!(sets[0].swept, vec![("n_neighbors".into(), json!(5)), ("t".into(), json!(null))]);
        assert_eq!(sets[5].method, Method::LaplacianEigenmaps { n_neighbors: 15, t: Some(2.0) });
        assert_eq!(expand_method(&json!({"method": "pca"})).unwrap().len(), 1);
    }

    #[test]
    fn method_parameters_checked() {
        assert!(expand_method(&json!({"method": "pca", "n_neighbors": 5})).is_err());
        assert!(expand_method(&json!({"method": "lle", "n_neighbors": []})).is_err());
        let sets = expand_method(&json!({"method": "local_smacof", "quantile": 0.2, "transform": "ordinal"})).unwrap();
        assert_eq!(sets.len(), 1);
    }
}
