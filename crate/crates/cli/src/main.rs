//! `dcmase` command-line tool: simulation sweeps, community detection on
//! multilayer networks, and plug-in parameter estimation.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use dcmase::estimation::{oos_mse_table, plugin_estimates};
use dcmase::io::{
    embedding_to_csv, labels_to_csv, read_edge_list, read_labels_csv, read_layer_csv,
};
use dcmase::sim::{records_to_csv, run_sweep, summarize, summary_svg, SimulationConfig};
use dcmase::{
    CommunityAssignment, DcMaseConfig, JointRank, KMeansConfig, LayerRanks, Matrix, Method,
};

/// Exit status for invalid configuration or arguments.
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(
    name = "dcmase",
    version,
    about = "Community detection for multilayer degree-corrected blockmodels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation sweep described by a JSON config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory for results.csv, summary.json and summary.svg.
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate community memberships from a set of layers.
    Fit {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        method: MethodArgs,
        /// Number of communities.
        #[arg(long)]
        k: usize,
        /// Output directory for labels.csv and embedding.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Plug-in degree corrections and block matrices for given memberships,
    /// optionally with the leave-one-layer-out error table.
    Estimate {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        method: MethodArgs,
        /// Community labels (`vertex,community` CSV or one label per line).
        #[arg(long)]
        labels: PathBuf,
        /// Also compute the out-of-sample error for every K in --k-grid.
        #[arg(long)]
        oos: bool,
        /// Comma-separated candidate community counts for --oos.
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
        k_grid: Vec<usize>,
        /// Output directory for params.json (and oos_mse.csv).
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct InputArgs {
    /// Layer files: `.csv` files hold one dense symmetric matrix each; any
    /// other file is read as a tab-separated layered edge list.
    #[arg(required = true)]
    layers: Vec<PathBuf>,
    /// Number of vertices for edge-list input (default: largest id + 1).
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args)]
struct MethodArgs {
    /// dcmase, mean_adj, sos or mase.
    #[arg(long, default_value = "dcmase")]
    method: String,
    /// Joint embedding dimension: a number or `auto` (default: K).
    #[arg(long)]
    k_tilde: Option<String>,
    /// Per-layer ranks: `k`, `auto`, one number, or one number per layer.
    #[arg(long, default_value = "k")]
    ranks: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Skip row normalization for the baseline methods.
    #[arg(long)]
    no_normalize: bool,
}

#[derive(Debug)]
struct ConfigError(String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config_err(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

impl MethodArgs {
    fn method(&self) -> Result<Method> {
        self.method
            .parse()
            .map_err(|e: dcmase::Error| config_err(e.to_string()))
    }

    fn config(&self) -> Result<DcMaseConfig> {
        let joint_rank = match self.k_tilde.as_deref() {
            None => JointRank::MatchK,
            Some("auto") => JointRank::Auto,
            Some(v) => JointRank::Fixed(
                v.parse()
                    .map_err(|_| config_err(format!("invalid --k-tilde `{v}`")))?,
            ),
        };
        let layer_ranks = match self.ranks.as_str() {
            "k" => LayerRanks::MatchK,
            "auto" => LayerRanks::Auto,
            v => {
                let parsed = v
                    .split(',')
                    .map(|x| x.trim().parse::<usize>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| config_err(format!("invalid --ranks `{v}`")))?;
                if parsed.len() == 1 {
                    LayerRanks::Uniform(parsed[0])
                } else {
                    LayerRanks::PerLayer(parsed)
                }
            }
        };
        Ok(DcMaseConfig {
            layer_ranks,
            joint_rank,
            kmeans: KMeansConfig::default().with_seed(self.seed),
            scree_len: None,
        })
    }
}

fn load_layers(input: &InputArgs) -> Result<Vec<Matrix>> {
    let mut layers = Vec::new();
    for path in &input.layers {
        if path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
        {
            layers.push(read_layer_csv(path)?);
        } else {
            layers.extend(read_edge_list(path, input.n)?);
        }
    }
    Ok(layers)
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}

fn simulate(config: &Path, out: &Path) -> Result<()> {
    let text =
        fs::read_to_string(config).with_context(|| format!("reading {}", config.display()))?;
    let cfg = SimulationConfig::from_json(&text)
        .map_err(|e| config_err(format!("{}: {e}", config.display())))?;
    let methods = cfg.methods().map_err(|e| config_err(e.to_string()))?;
    let records = run_sweep(&cfg.scenario, &methods)?;
    let summary = summarize(&cfg.scenario, &methods, &records);
    fs::create_dir_all(out)?;
    write(out, "results.csv", &records_to_csv(&records))?;
    write(
        out,
        "summary.json",
        &(serde_json::to_string_pretty(&summary)? + "\n"),
    )?;
    write(out, "summary.svg", &summary_svg(&summary))?;
    let failures = records.iter().filter(|r| r.error.is_some()).count();
    if failures > 0 {
        eprintln!("warning: {failures} runs failed; see the results file");
    }
    Ok(())
}

fn fit(input: &InputArgs, args: &MethodArgs, k: usize, out: &Path) -> Result<()> {
    let method = args.method()?;
    let cfg = args.config()?;
    let layers = load_layers(input)?;
    let (labels, embedding) = if method == Method::DcMase {
        let fit = dcmase::dcmase(&layers, k, &cfg)?;
        for w in &fit.warnings {
            eprintln!("warning: {w}");
        }
        (fit.labels, fit.joint.u)
    } else {
        let fit = method.fit(&layers, k, &cfg, !args.no_normalize)?;
        (fit.labels, fit.embedding)
    };
    fs::create_dir_all(out)?;
    write(out, "labels.csv", &labels_to_csv(&labels))?;
    write(out, "embedding.csv", &embedding_to_csv(&embedding))?;
    Ok(())
}

fn estimate(
    input: &InputArgs,
    args: &MethodArgs,
    labels: &Path,
    oos: bool,
    k_grid: &[usize],
    out: &Path,
) -> Result<()> {
    let layers = load_layers(input)?;
    let raw = read_labels_csv(labels)?;
    let n = layers.first().map_or(0, |a| a.nrows());
    if raw.len() != n {
        bail!("{} labels for {n} vertices", raw.len());
    }
    let assignment = CommunityAssignment::from_raw_labels(&raw)?;
    let params = plugin_estimates(&layers, &assignment)?;
    fs::create_dir_all(out)?;
    write(
        out,
        "params.json",
        &(serde_json::to_string_pretty(&params.to_json())? + "\n"),
    )?;
    if oos {
        let method = args.method()?;
        let table = oos_mse_table(&layers, method, k_grid, &args.config()?, !args.no_normalize)?;
        let mut csv = String::from("K,layer,mse\n");
        for r in table {
            csv.push_str(&format!("{},{},{}\n", r.k, r.layer, r.mse));
        }
        write(out, "oos_mse.csv", &csv)?;
    }
    Ok(())
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("DCMASE_THREADS") {
        let n: usize = v.parse().ok().filter(|n| *n > 0).ok_or_else(|| {
            config_err(format!(
                "DCMASE_THREADS must be a positive integer, got `{v}`"
            ))
        })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    init_threads()?;
    match cli.command {
        Command::Simulate { config, out } => simulate(&config, &out),
        Command::Fit {
            input,
            method,
            k,
            out,
        } => fit(&input, &method, k, &out),
        Command::Estimate {
            input,
            method,
            labels,
            oos,
            k_grid,
            out,
        } => estimate(&input, &method, &labels, oos, &k_grid, &out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<ConfigError>() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
