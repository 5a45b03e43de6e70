//! Runs a [`PipelineConfig`] and records what it wrote.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use drqa_core::agreement::{agreement_profile, classify_rank_movements, co_ranking, mean_agreement, partial_agreement, psi, weighted_psi};
use drqa_core::dimred::{reduce, Method, ReductionRequest};
use drqa_core::geometry::config_ranks;
use drqa_core::manifolds::{generate, ManifoldSpec};
use drqa_core::{AgreementProfile, Configuration, Error as CoreError, RankStructure};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::{expand_method, ImputationPolicy, PipelineConfig, Stage};
use crate::error::{CliError, Result};
use crate::io::{self, Imputation};
use crate::plot::{self, Side};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifestEntry {
    /// Relative to the output directory, `/`-separated.
    pub path: String,
    pub kind: &'static str,
    pub stage: &'static str,
    /// Stage position; absent for the score table.
    pub index: Option<usize>,
    pub seed: u64,
    pub bytes: usize,
    pub sha256: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub imputation: Option<Imputation>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub version: u32,
    pub seed: u64,
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn count(&self, kind: &str) -> usize {
        self.entries.iter().filter(|e| e.kind == kind).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreRow {
    pub dataset: String,
    pub embedding: String,
    pub technique: String,
    /// Canonical JSON of the method parameters.
    pub params: String,
    pub k_range: String,
    pub mean_ar: f64,
    pub psi: f64,
    pub psi_f: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub manifest: Manifest,
    pub manifest_path: PathBuf,
    pub scores: Vec<ScoreRow>,
}

/// Seed of the stage at `index`.
pub fn stage_seed(global: u64, index: usize) -> u64 {
    global.wrapping_add(index as u64)
}

/// Per-k partial agreement of the adjusted rates `AR*` of A-B given Z.
pub fn partial_profile(ab: &AgreementProfile, az: &AgreementProfile, bz: &AgreementProfile) -> Result<Vec<f64>> {
    let n = ab.n();
    if az.n() != n || bz.n() != n {
        return Err(CoreError::ShapeMismatch("partial agreement needs three configurations of equal size".into()).into());
    }
    (1..n)
        .map(|k| Ok(partial_agreement(ab.ar_adjusted_at(k), az.ar_adjusted_at(k), bz.ar_adjusted_at(k))?))
        .collect()
}

#[derive(Debug, Clone)]
enum Origin {
    Data,
    Reduced { source: String, method: Method },
}

#[derive(Debug, Clone)]
struct Item {
    config: Arc<Configuration>,
    stem: String,
    origin: Origin,
}

struct Run<'a> {
    config: &'a PipelineConfig,
    out: PathBuf,
    items: HashMap<String, Item>,
    /// Names in creation order.
    order: Vec<String>,
    ranks: HashMap<String, Arc<RankStructure>>,
    reductions: HashMap<String, Arc<Configuration>>,
    written: Vec<PathBuf>,
    paths: HashSet<String>,
    entries: Vec<ManifestEntry>,
    scores: Vec<ScoreRow>,
}

/// Runs every stage in order. On failure, files written by this run are
/// removed and the error names the failing stage.
pub fn run_pipeline(config: &PipelineConfig) -> Result<RunOutput> {
    let out = config.io.output_dir.clone();
    let existed = out.exists();
    let mut run = Run {
        config,
        out: out.clone(),
        items: HashMap::new(),
        order: Vec::new(),
        ranks: HashMap::new(),
        reductions: HashMap::new(),
        written: Vec::new(),
        paths: HashSet::new(),
        entries: Vec::new(),
        scores: Vec::new(),
    };
    match run.execute() {
        Ok(manifest_path) => Ok(RunOutput {
            manifest: Manifest { version: 1, seed: config.seed, entries: run.entries },
            manifest_path,
            scores: run.scores,
        }),
        Err(e) => {
            for p in run.written.iter().rev() {
                let _ = fs::remove_file(p);
            }
            if !existed {
                let _ = remove_empty_dirs(&out);
            }
            Err(e)
        }
    }
}

fn remove_empty_dirs(dir: &Path) -> std::io::Result<()> {
    for entry in fs::read_dir(dir)? {
        let p = entry?.path();
        if p.is_dir() {
            remove_empty_dirs(&p)?;
        }
    }
    fs::remove_dir(dir)
}

fn sanitize(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || "._-".contains(c) { c } else { '_' }).collect()
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

impl Run<'_> {
    fn execute(&mut self) -> Result<PathBuf> {
        fs::create_dir_all(&self.out).map_err(|e| CliError::io(&self.out, e))?;
        for (index, stage) in self.config.stages.iter().enumerate() {
            self.stage(index, stage)
                .map_err(|e| CliError::Stage { index, stage: stage.kind(), source: Box::new(e) })?;
        }
        if let Some(name) = &self.config.io.score_table {
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in &self.scores {
                w.serialize(row).map_err(|e| CliError::csv(name, e.to_string()))?;
            }
            if self.scores.is_empty() {
                w.write_record(["dataset", "embedding", "technique", "params", "k_range", "mean_ar", "psi", "psi_f"])
                    .map_err(|e| CliError::csv(name, e.to_string()))?;
            }
            let bytes = w.into_inner().expect("in-memory write");
            self.emit(name, &bytes, "score_table", "score_table", None, self.config.seed)?;
        }
        let manifest = Manifest { version: 1, seed: self.config.seed, entries: self.entries.clone() };
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        let path = self.out.join(&self.config.io.manifest);
        io::write_file(&path, text.as_bytes())?;
        self.written.push(path.clone());
        Ok(path)
    }

    fn emit(
        &mut self,
        rel: &str,
        bytes: &[u8],
        kind: &'static str,
        stage: &'static str,
        index: Option<usize>,
        seed: u64,
    ) -> Result<&mut ManifestEntry> {
        if !self.paths.insert(rel.to_string()) {
            return Err(CliError::Config(format!("two outputs would be written to {rel}")));
        }
        let path = self.out.join(rel);
        io::write_file(&path, bytes)?;
        self.written.push(path);
        self.entries.push(ManifestEntry {
            path: rel.to_string(),
            kind,
            stage,
            index,
            seed,
            bytes: bytes.len(),
            sha256: hex(&Sha256::digest(bytes)),
            imputation: None,
            warnings: Vec::new(),
        });
        Ok(self.entries.last_mut().expect("just pushed"))
    }

    fn item(&self, name: &str) -> Result<&Item> {
        self.items.get(name).ok_or_else(|| CliError::Config(format!("no dataset or embedding named `{name}`")))
    }

    fn insert(&mut self, name: String, item: Item) -> Result<()> {
        if self.items.contains_key(&name) {
            return Err(CliError::Config(format!("name `{name}` is defined twice")));
        }
        self.order.push(name.clone());
        self.items.insert(name, item);
        Ok(())
    }

    fn ranks(&mut self, name: &str) -> Result<Arc<RankStructure>> {
        if let Some(r) = self.ranks.get(name) {
            return Ok(r.clone());
        }
        let r = Arc::new(config_ranks(&self.item(name)?.config)?);
        if self.config.cache {
            self.ranks.insert(name.to_string(), r.clone());
        }
        Ok(r)
    }

    fn stage(&mut self, index: usize, stage: &Stage) -> Result<()> {
        let seed = stage_seed(self.config.seed, index);
        let kind = stage.kind();
        match stage {
            Stage::Generate { name, shape, n, params } => {
                let spec = ManifoldSpec { shape: *shape, n: *n, seed, params: params.clone() };
                let c = generate(&spec)?;
                let stem = sanitize(name);
                let bytes = io::configuration_csv(&c, &io::numbered_columns("x", c.dim()));
                self.emit(&format!("{stem}.csv"), &bytes, "dataset", kind, Some(index), seed)?;
                self.insert(name.clone(), Item { config: Arc::new(c), stem, origin: Origin::Data })?;
            }
            Stage::Ingest { name, path, has_header, missing_token } => {
                let base = self.config.io.input_dir.clone().unwrap_or_default();
                let table = io::read_table(&base.join(path), *has_header, missing_token)?;
                let (c, imputation) = match self.config.imputation {
                    ImputationPolicy::ColumnMean => {
                        let (c, rec) = io::impute_column_mean(&table.config, Some(&table.columns))?;
                        (c, Some(rec))
                    }
                    ImputationPolicy::None => (table.config, None),
                };
                let stem = sanitize(name);
                let bytes = io::configuration_csv(&c, &table.columns);
                self.emit(&format!("{stem}.csv"), &bytes, "dataset", kind, Some(index), seed)?.imputation = imputation;
                self.insert(name.clone(), Item { config: Arc::new(c), stem, origin: Origin::Data })?;
            }
            Stage::Reduce { source, target_dim, methods } => self.reduce_stage(index, seed, source, *target_dim, methods)?,
            Stage::Agree { reference, embeddings, z, range_k, weight, per_item, co_ranking: with_omega, movements } => {
                let names = match embeddings {
                    Some(e) => e.clone(),
                    None => self
                        .order
                        .iter()
                        .filter(|n| matches!(&self.items[*n].origin, Origin::Reduced { source, .. } if source == reference))
                        .cloned()
                        .collect(),
                };
                if names.is_empty() {
                    return Err(CliError::Config(format!("nothing to compare with `{reference}`")));
                }
                let ra = self.ranks(reference)?;
                let rz = z.as_ref().map(|z| self.ranks(z)).transpose()?;
                let ref_item = self.item(reference)?.clone();
                let mut jobs = Vec::new();
                for name in &names {
                    jobs.push((name.clone(), self.item(name)?.clone(), self.ranks(name)?));
                }
                let n = ra.n();
                let ranges: Vec<(String, Vec<usize>)> =
                    range_k.iter().map(|r| Ok((r.to_string(), r.resolve(n)?))).collect::<Result<_>>()?;
                let az = rz.as_ref().map(|rz| agreement_profile(&ra, rz, false)).transpose()?;
                struct Done {
                    profile: AgreementProfile,
                    partial: Option<Vec<f64>>,
                    items: Option<Vec<u8>>,
                    omega: Option<Vec<u8>>,
                    movements: Option<Vec<u8>>,
                    rows: Vec<ScoreRow>,
                }
                let results: Vec<Result<Done>> = jobs
                    .par_iter()
                    .map(|(name, item, rb)| {
                        let p = agreement_profile(&ra, rb, *per_item)?;
                        let partial = match (&az, &rz) {
                            (Some(az), Some(rz)) => Some(partial_profile(&p, az, &agreement_profile(rb, rz, false)?)?),
                            _ => None,
                        };
                        let (technique, params) = match &item.origin {
                            Origin::Reduced { method, .. } => {
                                let mut v = serde_json::to_value(method).expect("methods serialize");
                                v.as_object_mut().expect("object").remove("method");
                                (method.name().to_string(), v.to_string())
                            }
                            Origin::Data => ("external".to_string(), "{}".to_string()),
                        };
                        let (psi_all, psi_f) = (psi(&p)?, weighted_psi(&p, weight)?);
                        let rows = ranges
                            .iter()
                            .map(|(label, ks)| {
                                Ok(ScoreRow {
                                    dataset: reference.clone(),
                                    embedding: name.clone(),
                                    technique: technique.clone(),
                                    params: params.clone(),
                                    k_range: label.clone(),
                                    mean_ar: mean_agreement(&p, ks, false)?,
                                    psi: psi_all,
                                    psi_f,
                                })
                            })
                            .collect::<Result<Vec<_>>>()?;
                        Ok(Done {
                            items: if *per_item { Some(io::item_csv(&p, &ref_item.config)?) } else { None },
                            omega: if *with_omega { Some(io::co_ranking_csv(&co_ranking(&ra, rb)?)) } else { None },
                            movements: if movements.is_empty() {
                                None
                            } else {
                                let t = movements.iter().map(|&k| classify_rank_movements(&ra, rb, k)).collect::<std::result::Result<Vec<_>, _>>()?;
                                Some(io::movements_csv(&t))
                            },
                            rows,
                            profile: p,
                            partial,
                        })
                    })
                    .collect();
                let results: Vec<Done> = results.into_iter().collect::<Result<_>>()?;
                let stacked: Vec<(&str, &AgreementProfile, Option<&[f64]>)> = jobs
                    .iter()
                    .zip(&results)
                    .map(|((name, _, _), d)| (name.as_str(), &d.profile, d.partial.as_deref()))
                    .collect();
                let bytes = io::profiles_csv(&stacked);
                self.emit(&format!("{}.profile-{index}.csv", ref_item.stem), &bytes, "profile", kind, Some(index), seed)?;
                for ((_, item, _), done) in jobs.iter().zip(results) {
                    let stem = match &item.origin {
                        Origin::Reduced { source, .. } if source == reference => item.stem.clone(),
                        _ => format!("{}.vs.{}", item.stem, ref_item.stem),
                    };
                    if let Some(b) = done.items {
                        self.emit(&format!("{stem}.items.csv"), &b, "items", kind, Some(index), seed)?;
                    }
                    if let Some(b) = done.omega {
                        self.emit(&format!("{stem}.co_ranking.csv"), &b, "co_ranking", kind, Some(index), seed)?;
                    }
                    if let Some(b) = done.movements {
                        self.emit(&format!("{stem}.movements.csv"), &b, "movements", kind, Some(index), seed)?;
                    }
                    self.scores.extend(done.rows);
                }
            }
            Stage::Plot { plot, name, reference, embeddings, labels, render, binary } => {
                if let Some(l) = labels {
                    if l.len() != embeddings.len() {
                        return Err(CliError::Config(format!("{} labels for {} embeddings", l.len(), embeddings.len())));
                    }
                }
                let ra = self.ranks(reference)?;
                let ref_item = self.item(reference)?.clone();
                let mut owned = Vec::new();
                for (u, e) in embeddings.iter().enumerate() {
                    let label = labels.as_ref().map_or_else(|| e.clone(), |l| l[u].clone());
                    owned.push((label, self.item(e)?.config.clone(), self.ranks(e)?));
                }
                let sides: Vec<Side> =
                    owned.iter().map(|(label, c, r)| Side { name: label.clone(), config: c, ranks: r }).collect();
                let reference_side = Side { name: reference.clone(), config: &ref_item.config, ranks: &ra };
                let svgs = plot::render(*plot, &reference_side, &sides, render, *binary)?;
                let stem = sanitize(&name.clone().unwrap_or_else(|| format!("{}-{index}", plot.name())));
                let many = svgs.len() > 1;
                for (j, svg) in svgs.iter().enumerate() {
                    let rel = if many { format!("{stem}.{}.svg", j + 1) } else { format!("{stem}.svg") };
                    self.emit(&rel, svg.as_bytes(), "plot", kind, Some(index), seed)?;
                }
            }
        }
        Ok(())
    }

    fn reduce_stage(&mut self, index: usize, seed: u64, source: &str, target_dim: usize, methods: &[Value]) -> Result<()> {
        let src = self.item(source)?.clone();
        let mut sets = Vec::new();
        for record in methods {
            sets.extend(expand_method(record)?);
        }
        let keyed: Vec<(String, ReductionRequest)> = sets
            .iter()
            .map(|s| {
                let req = ReductionRequest::new(s.method.clone(), target_dim).with_seed(seed);
                let key = format!("{source}|{}", serde_json::to_string(&req).expect("requests serialize"));
                (key, req)
            })
            .collect();
        let results: Vec<Result<(Arc<Configuration>, Vec<String>)>> = keyed
            .par_iter()
            .map(|(key, req)| {
                if let Some(c) = self.reductions.get(key) {
                    return Ok((c.clone(), Vec::new()));
                }
                let r = reduce(&src.config, req)?;
                Ok((Arc::new(r.embedding), r.diagnostics.warnings().to_vec()))
            })
            .collect();
        for ((set, (key, _)), result) in sets.iter().zip(&keyed).zip(results) {
            let (embedding, warnings) = result?;
            let method_name = set.method.name();
            let mut name = format!("{source}/{method_name}");
            let mut stem = format!("{}.{method_name}", src.stem);
            if !set.swept.is_empty() {
                let parts: Vec<String> = set.swept.iter().map(|(k, v)| format!("{k}={v}")).collect();
                name.push_str(&format!("({})", parts.join(",")));
                for (k, v) in &set.swept {
                    stem.push_str(&sanitize(&format!("-{k}-{v}")));
                }
            }
            let bytes = io::configuration_csv(&embedding, &io::numbered_columns("dim", embedding.dim()));
            self.emit(&format!("{stem}.csv"), &bytes, "embedding", "reduce", Some(index), seed)?.warnings = warnings;
            if self.config.cache {
                self.reductions.insert(key.clone(), embedding.clone());
            }
            let origin = Origin::Reduced { source: source.to_string(), method: set.method.clone() };
            self.insert(name, Item { config: embedding, stem, origin })?;
        }
        Ok(())
    }
}
