//! Command-line front end: experiment runs, baseline estimation,
//! criticality reports, validation suites, and plot-ready data extraction.
//!
//! Exit codes: 0 success, 1 runtime error, 2 usage/parse error,
//! 3 regime guard.

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::{Path, PathBuf};
use std::time::Instant;

use influmax::config::ExperimentConfig;
use influmax::error::Error;
use influmax::harness;
use influmax::validation;

/// Environment variable naming the default output root directory.
const OUT_ROOT_ENV: &str = "INFLUMAX_OUT_ROOT";

#[derive(Parser)]
#[command(name = "influmax", version, about = "Online influence maximization under local feedback")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct ConfigArgs {
    /// Path to the TOML experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (defaults to the config's out_dir, then
    /// $INFLUMAX_OUT_ROOT/run-<digest>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Cap on worker threads.
    #[arg(long)]
    threads: Option<usize>,
    /// Dotted-path overrides, e.g. --override algorithm.alpha=0.3.
    #[arg(long = "override")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured experiment and persist regret traces.
    Run(ConfigArgs),
    /// Estimate per-node component means only.
    Estimate(ConfigArgs),
    /// Report the model's criticality regime.
    Criticality(ConfigArgs),
    /// Run a named property suite (dominance, tails, oracles, klucb,
    /// monotonicity, all).
    Validate {
        suite: String,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
    /// Emit downsampled plot-ready files from a persisted run.
    PlotData {
        results: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. } | Error::InvalidInput(_) => 2,
        Error::RegimeMismatch(_) => 3,
        _ => 1,
    }
}

fn main() {
    let cli = Cli::parse();
    let status = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Estimate(args) => cmd_estimate(args),
        Command::Criticality(args) => cmd_criticality(args),
        Command::Validate { suite, seed } => cmd_validate(&suite, seed),
        Command::PlotData { results, out } => cmd_plot_data(&results, out),
    };
    match status {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(exit_code(&err));
        }
    }
}

fn setup(args: &ConfigArgs) -> Result<ExperimentConfig, Error> {
    if let Some(t) = args.threads {
        // Ignore failure if a pool was already installed.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let mut config = ExperimentConfig::load(&args.config, &args.overrides)?;
    if let Some(seed) = args.seed {
        config.experiment.seed = seed;
    }
    Ok(config)
}

fn out_dir(args: &ConfigArgs, config: &ExperimentConfig) -> PathBuf {
    if let Some(out) = &args.out {
        return out.clone();
    }
    if let Some(dir) = &config.experiment.out_dir {
        return PathBuf::from(dir);
    }
    let root = std::env::var(OUT_ROOT_ENV).unwrap_or_else(|_| "results".into());
    PathBuf::from(root).join(format!("run-{}", &config.digest()[..12]))
}

fn cmd_run(args: ConfigArgs) -> Result<i32, Error> {
    let start = Instant::now();
    let config = setup(&args)?;
    let out = out_dir(&args, &config);
    let result = harness::run_experiment(&config)?;
    harness::persist_results(&result, &out)?;
    let final_mean = if result.traces.is_empty() {
        0.0
    } else {
        result
            .traces
            .iter()
            .map(|t| *t.cum_regret.last().unwrap_or(&0.0))
            .sum::<f64>()
            / result.traces.len() as f64
    };
    println!(
        "status=ok algorithm={} rounds={} replications={} final_mean_cum_regret={:.6} c_star={:.6} out={} wall_s={:.2}",
        result.algorithm.name(),
        config.algorithm.t_horizon,
        result.traces.len(),
        final_mean,
        result.c_star,
        out.display(),
        start.elapsed().as_secs_f64()
    );
    Ok(0)
}

fn cmd_estimate(args: ConfigArgs) -> Result<i32, Error> {
    let start = Instant::now();
    let config = setup(&args)?;
    let out = out_dir(&args, &config);
    let model = config.model.build()?;
    let nodes: Vec<usize> = (0..model.n()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.experiment.seed);
    rng.set_stream(0);
    let estimates = harness::estimate_component_means(
        &model,
        &nodes,
        config.experiment.estimate_samples(),
        &mut rng,
    )?;
    let (c_star, v_star) = harness::quantile_baseline(&estimates, config.algorithm.alpha)?;
    std::fs::create_dir_all(&out).map_err(|e| Error::io(out.display().to_string(), e))?;
    let mut csv = String::from("vertex,c_hat,stderr\n");
    for v in 0..model.n() {
        csv.push_str(&format!(
            "{v},{},{}\n",
            estimates.mean(v).unwrap(),
            estimates.stderr(v).unwrap()
        ));
    }
    let path = out.join("estimates.csv");
    std::fs::write(&path, csv).map_err(|e| Error::io(path.display().to_string(), e))?;
    println!(
        "status=ok n={} c_star={:.6} v_star_size={} out={} wall_s={:.2}",
        model.n(),
        c_star,
        v_star.len(),
        out.display(),
        start.elapsed().as_secs_f64()
    );
    Ok(0)
}

fn cmd_criticality(args: ConfigArgs) -> Result<i32, Error> {
    let config = setup(&args)?;
    let model = config.model.build()?;
    let crit = model.criticality(config.experiment.criticality_tolerance())?;
    println!(
        "status=ok kind={} n={} regime={:?} operator_norm={:.6} tolerance={}",
        model.kind(),
        model.n(),
        crit.regime,
        crit.operator_norm,
        crit.tolerance
    );
    Ok(0)
}

fn cmd_validate(suite: &str, seed: u64) -> Result<i32, Error> {
    let checks = validation::run_suite(suite, seed)?;
    let mut all_pass = true;
    for c in &checks {
        all_pass &= c.pass;
        println!(
            "check={} pass={} measured={:.6e} bound={:.6e}",
            c.name, c.pass, c.measured, c.bound
        );
    }
    Ok(if all_pass { 0 } else { 1 })
}

fn cmd_plot_data(results: &Path, out: Option<PathBuf>) -> Result<i32, Error> {
    let out = out.unwrap_or_else(|| results.to_path_buf());
    let regret_path = results.join("regret.csv");
    let text = std::fs::read_to_string(&regret_path)
        .map_err(|e| Error::io(regret_path.display().to_string(), e))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Numerical("regret.csv is empty".into()))?;
    let rows: Vec<&str> = lines.collect();
    let total = rows.len();
    if total == 0 {
        return Err(Error::Numerical("regret.csv has no data rows".into()));
    }
    let stride = total.div_ceil(1000);
    let mut plot = String::from(header);
    plot.push('\n');
    for (i, row) in rows.iter().enumerate() {
        // Keep every stride-th round, counting rounds from 1.
        if (i + 1) % stride == 0 {
            plot.push_str(row);
            plot.push('\n');
        }
    }
    std::fs::create_dir_all(&out).map_err(|e| Error::io(out.display().to_string(), e))?;
    let plot_path = out.join("plot_regret.csv");
    std::fs::write(&plot_path, &plot).map_err(|e| Error::io(plot_path.display().to_string(), e))?;

    let pulls_path = results.join("pulls.csv");
    let pulls = std::fs::read_to_string(&pulls_path)
        .map_err(|e| Error::io(pulls_path.display().to_string(), e))?;
    let hist_path = out.join("plot_pulls.csv");
    std::fs::write(&hist_path, &pulls).map_err(|e| Error::io(hist_path.display().to_string(), e))?;
    println!(
        "status=ok rows={} stride={} out={}",
        plot.lines().count() - 1,
        stride,
        out.display()
    );
    Ok(0)
}
