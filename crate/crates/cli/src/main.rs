use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use drqa::config::{parse_method, PipelineConfig};
use drqa::io::{self, configuration_csv, numbered_columns};
use drqa::pipeline::partial_profile;
use drqa::plot::{self, PlotInputs, Side};
use drqa::{CliError, Result};
use drqa_core::agreement::{agreement_profile, co_ranking, mean_agreement, partial_agreement, psi, weighted_psi};
use drqa_core::dimred::{reduce, ReductionRequest};
use drqa_core::geometry::config_ranks;
use drqa_core::manifolds::{generate, ManifoldShape, ManifoldSpec, ShapeParams};
use drqa_core::viz::PlotType;
use drqa_core::{Configuration, KRange, WeightFunction};
use serde_json::{json, Map, Value};

#[derive(Parser)]
#[command(name = "drqa", version, about = "Rank-based quality assessment of dimensionality reduction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Input {
    /// The input CSV has no header row.
    #[arg(long)]
    no_header: bool,
    /// Token marking a missing cell (empty cells are always missing).
    #[arg(long, default_value = "NA")]
    missing: String,
    /// Keep missing cells instead of imputing column means.
    #[arg(long)]
    no_impute: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run a JSON pipeline config.
    Pipeline {
        #[arg(long)]
        config: PathBuf,
    },
    /// Write a benchmark manifold as a dataset CSV.
    Generate {
        #[arg(long)]
        shape: ManifoldShape,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Shape parameters as JSON, e.g. '{"turns": 2}'.
        #[arg(long)]
        params: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Validate a CSV and write it in the normalized layout.
    Ingest {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        opts: Input,
    },
    /// Reduce a dataset CSV to an embedding CSV.
    Reduce {
        #[arg(long)]
        method: String,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// SMACOF transform: ratio or ordinal.
        #[arg(long)]
        transform: Option<String>,
        #[arg(long)]
        n_neighbors: Option<usize>,
        #[arg(long)]
        quantile: Option<f64>,
        /// Further method parameters as a JSON object.
        #[arg(long)]
        params: Option<String>,
        #[command(flatten)]
        opts: Input,
    },
    /// Agreement profile of two configurations.
    Agree {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Third configuration for partial agreement.
        #[arg(long)]
        z: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Also write per-item agreement next to the profile.
        #[arg(long)]
        per_item: bool,
        /// Neighborhood sizes for the reported mean: all, a-b or k1;k2.
        #[arg(long, default_value = "all")]
        range_k: KRange,
        /// Weight for psi_f: linear_taper or uniform.
        #[arg(long, default_value = "linear_taper")]
        weight: String,
        /// Also write the co-ranking matrix to this path.
        #[arg(long)]
        co_ranking: Option<PathBuf>,
        #[command(flatten)]
        opts: Input,
    },
    /// Render a plot from a JSON request.
    Plot {
        #[arg(long = "type")]
        plot: PlotType,
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        opts: Input,
    },
}

fn load(path: &Path, opts: &Input) -> Result<Configuration> {
    let table = io::read_table(path, !opts.no_header, &opts.missing)?;
    if opts.no_impute {
        Ok(table.config)
    } else {
        Ok(io::impute_column_mean(&table.config, Some(&table.columns))?.0)
    }
}

fn json_arg(text: &str, what: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| CliError::Config(format!("--{what}: {e}")))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io { path: dir.into(), source: e })?;
    }
    std::fs::write(path, bytes).map_err(|e| CliError::Io { path: path.into(), source: e })
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Pipeline { config } => {
            let config = PipelineConfig::load(&config)?;
            let out = drqa::run_pipeline(&config)?;
            println!("{}", out.manifest_path.display());
        }
        Command::Generate { shape, n, seed, params, out } => {
            let params: ShapeParams = match params {
                Some(p) => serde_json::from_value(json_arg(&p, "params")?).map_err(|e| CliError::Config(e.to_string()))?,
                None => ShapeParams::default(),
            };
            let c = generate(&ManifoldSpec { shape, n, seed, params })?;
            write(&out, &configuration_csv(&c, &numbered_columns("x", c.dim())))?;
        }
        Command::Ingest { input, out, opts } => {
            let table = io::read_table(&input, !opts.no_header, &opts.missing)?;
            let (c, columns) = if opts.no_impute {
                (table.config, table.columns)
            } else {
                let (c, rec) = io::impute_column_mean(&table.config, Some(&table.columns))?;
                println!("{}", serde_json::to_string(&rec).expect("record serializes"));
                (c, table.columns)
            };
            write(&out, &configuration_csv(&c, &columns))?;
        }
        Command::Reduce { method, dim, input, out, seed, transform, n_neighbors, quantile, params, opts } => {
            let mut obj = match params {
                Some(p) => match json_arg(&p, "params")? {
                    Value::Object(m) => m,
                    other => return Err(CliError::Config(format!("--params must be a JSON object, got {other}"))),
                },
                None => Map::new(),
            };
            obj.insert("method".into(), json!(method));
            if let Some(t) = transform {
                obj.insert("transform".into(), json!(t));
            }
            if let Some(k) = n_neighbors {
                obj.insert("n_neighbors".into(), json!(k));
            }
            if let Some(q) = quantile {
                obj.insert("quantile".into(), json!(q));
            }
            let request = ReductionRequest::new(parse_method(&obj)?, dim).with_seed(seed);
            let source = load(&input, &opts)?;
            let result = reduce(&source, &request)?;
            for w in result.diagnostics.warnings() {
                eprintln!("warning: {w}");
            }
            let e = &result.embedding;
            write(&out, &configuration_csv(e, &numbered_columns("dim", e.dim())))?;
        }
        Command::Agree { a, b, z, out, per_item, range_k, weight, co_ranking: omega_out, opts } => {
            let weight = match weight.as_str() {
                "linear_taper" => WeightFunction::LinearTaper,
                "uniform" => WeightFunction::Uniform,
                other => return Err(CliError::Config(format!("unknown weight `{other}`"))),
            };
            let (ca, cb) = (load(&a, &opts)?, load(&b, &opts)?);
            let (ra, rb) = (config_ranks(&ca)?, config_ranks(&cb)?);
            let p = agreement_profile(&ra, &rb, per_item)?;
            let ks = range_k.resolve(p.n())?;
            let mut summary = json!({
                "n": p.n(),
                "k_range": range_k.to_string(),
                "mean_ar": mean_agreement(&p, &ks, false)?,
                "psi": psi(&p)?,
                "psi_f": weighted_psi(&p, &weight)?,
            });
            let mut partial = None;
            if let Some(z) = z {
                let rz = config_ranks(&load(&z, &opts)?)?;
                let (az, bz) = (agreement_profile(&ra, &rz, false)?, agreement_profile(&rb, &rz, false)?);
                partial = Some(partial_profile(&p, &az, &bz)?);
                summary["partial_psi"] = match partial_agreement(psi(&p)?, psi(&az)?, psi(&bz)?) {
                    Ok(v) => json!(v),
                    Err(_) => Value::Null,
                };
            }
            write(&out, &io::profile_csv(&p, partial.as_deref()))?;
            if per_item {
                write(&sibling(&out, ".items.csv"), &io::item_csv(&p, &ca)?)?;
            }
            if let Some(path) = omega_out {
                write(&path, &io::co_ranking_csv(&co_ranking(&ra, &rb)?))?;
            }
            println!("{summary}");
        }
        Command::Plot { plot, spec, out, opts } => {
            let text = std::fs::read_to_string(&spec).map_err(|e| CliError::Io { path: spec.clone(), source: e })?;
            let inputs: PlotInputs =
                serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", spec.display())))?;
            let reference = load(Path::new(&inputs.reference), &opts)?;
            let ref_ranks = config_ranks(&reference)?;
            let mut loaded = Vec::new();
            for (u, path) in inputs.embeddings.iter().enumerate() {
                let c = load(Path::new(path), &opts)?;
                let r = config_ranks(&c)?;
                let name = inputs.labels.as_ref().and_then(|l| l.get(u).cloned()).unwrap_or_else(|| path.clone());
                loaded.push((name, c, r));
            }
            let sides: Vec<Side> = loaded.iter().map(|(name, c, r)| Side { name: name.clone(), config: c, ranks: r }).collect();
            let reference_side = Side { name: inputs.reference.clone(), config: &reference, ranks: &ref_ranks };
            let svgs = plot::render(plot, &reference_side, &sides, &inputs.render, inputs.binary)?;
            if svgs.len() == 1 {
                write(&out, svgs[0].as_bytes())?;
            } else {
                for (j, svg) in svgs.iter().enumerate() {
                    write(&sibling(&out, &format!(".{}.svg", j + 1)), svg.as_bytes())?;
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(v) = std::env::var("DRQA_THREADS") {
        match v.trim().parse::<usize>() {
            Ok(0) => {}
            Ok(t) => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
            }
            Err(_) => eprintln!("warning: ignoring DRQA_THREADS={v}"),
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
