//! `vodsim`: analytic tables, topology exports, single-shot searches,
//! simulation runs, adjacency sweeps, and analytic-vs-simulation
//! validation for the hybrid VOD delivery model.
//!
//! Exit codes: 0 on success, 1 on configuration or usage errors, 2 when a
//! validation row fails.

mod config;
mod report;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use vodsim_core::analytic::{
    active_peer_tail, admission_limit, erlang_b, khintchine_bounds, p_norm, rademacher_mean_abs,
    tier_capacity_closed, tier_capacity_iterative, AdmissionPolicy, TierCapacityParams,
};
use vodsim_core::content::AssetId;
use vodsim_core::engine::{self, Environment, SimConfig};
use vodsim_core::search::{search_with_stats, SearchOutcome, SearchQuery, SessionWindow};
use vodsim_core::topology::{export_topology, ExportFormat};

use config::load_config;
use report::{format_sig, RunManifest};

#[derive(Parser)]
#[command(name = "vodsim", version, about = "Hybrid P2P/mesh VOD delivery simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Shared config-selection options for simulation-backed commands.
#[derive(Args, Clone)]
struct ConfigArgs {
    /// Plain-text key=value config file ('#' comments allowed)
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override one key, e.g. --set seed=7 (repeatable, wins over the file)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl ConfigArgs {
    fn load(&self) -> Result<SimConfig, config::ConfigError> {
        load_config(self.config.as_deref(), &self.set)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the closed-form models
    Analytic {
        #[command(subcommand)]
        model: AnalyticCommand,
    },
    /// Build the topology and export it as DOT or JSON
    Topology {
        #[command(flatten)]
        config: ConfigArgs,
        /// Output format: dot | json
        #[arg(long, default_value = "json")]
        format: String,
        /// Write to a file instead of stdout
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run one content search from a proxy and print the outcome
    Search {
        #[command(flatten)]
        config: ConfigArgs,
        /// Asset id to look up
        #[arg(long)]
        asset: u32,
        /// Chunk index within the asset
        #[arg(long)]
        chunk: u32,
        /// Index of the issuing proxy (0-based)
        #[arg(long, default_value_t = 0)]
        proxy: usize,
    },
    /// Run the simulation and emit CSV artifacts plus a manifest
    Run {
        #[command(flatten)]
        config: ConfigArgs,
        /// Output directory (created if missing)
        #[arg(long, default_value = "vodsim-out")]
        out_dir: PathBuf,
        /// Also write the initial placement map (node id -> chunk list)
        /// as placement.json for reproducibility audits
        #[arg(long)]
        placement: bool,
    },
    /// Sweep adjacency sizes with fresh per-trial adjacencies
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        /// Comma-separated adjacency sizes in [1,6]
        #[arg(long, default_value = "1,2,3,4,5,6")]
        sizes: String,
        /// Cache-miss searches per size
        #[arg(long, default_value_t = 10_000)]
        trials: u32,
        /// Output directory (created if missing)
        #[arg(long, default_value = "vodsim-out")]
        out_dir: PathBuf,
    },
    /// Compare simulation against the analytic models; exit 2 on failure
    Validate {
        #[command(flatten)]
        config: ConfigArgs,
        /// Relative tolerance for the stochastic rows
        #[arg(long, default_value_t = 0.10)]
        tolerance: f64,
    },
}

#[derive(Subcommand)]
enum AnalyticCommand {
    /// Erlang-B blocking probability
    Erlang {
        #[arg(long)]
        load: f64,
        #[arg(long)]
        ports: u32,
    },
    /// Tier streaming capacity P(l)
    Capacity {
        #[arg(long)]
        p0: f64,
        #[arg(long)]
        c1: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        level: u32,
    },
    /// Tail probability that more than k of n peers are active
    ActivePeers {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        rho: f64,
    },
    /// Two-sided signed-sum bounds for a rate vector
    Khintchine {
        /// Comma-separated rates in kbps
        #[arg(long)]
        rates: String,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
    },
    /// Admission limit from disk bandwidth and threshold
    Admission {
        #[arg(long)]
        disk: f64,
        #[arg(long)]
        eta: u32,
        #[arg(long)]
        playback: f64,
    },
}

fn fail(message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(1)
}

fn print_value(label: &str, value: f64) {
    println!("{label} = {}", format_sig(value, 6));
}

fn cmd_analytic(model: AnalyticCommand) -> ExitCode {
    let result = (|| -> vodsim_core::Result<()> {
        match model {
            AnalyticCommand::Erlang { load, ports } => {
                print_value("blocking_probability", erlang_b(load, ports)?);
            }
            AnalyticCommand::Capacity { p0, c1, lambda, level } => {
                let params = TierCapacityParams {
                    archive_streaming: p0,
                    level1_sharing: c1,
                    share_fraction: lambda,
                    levels: level,
                    equivalent_capacity: 0.0,
                };
                print_value("capacity_closed", tier_capacity_closed(&params)?);
                print_value("capacity_iterative", tier_capacity_iterative(&params)?);
            }
            AnalyticCommand::ActivePeers { n, k, rho } => {
                print_value("activity_tail", active_peer_tail(n, k, rho)?);
            }
            AnalyticCommand::Khintchine { rates, p } => {
                let rates: Vec<f64> = rates
                    .split(',')
                    .map(|v| v.trim().parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| {
                        vodsim_core::Error::InvalidArgument(format!("bad rates list: {e}"))
                    })?;
                let (lower, upper) = khintchine_bounds(&rates, p)?;
                print_value("lower_bound", lower);
                print_value("upper_bound", upper);
                print_value("l2_norm", p_norm(&rates, 2.0)?);
                if rates.len() <= 20 {
                    print_value("enumerated_mean_abs", rademacher_mean_abs(&rates)?);
                }
            }
            AnalyticCommand::Admission { disk, eta, playback } => {
                let policy = AdmissionPolicy::new(disk, eta)?;
                println!("max_streams = {}", admission_limit(policy, playback)?);
            }
        }
        Ok(())
    })();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}

fn cmd_topology(config: &ConfigArgs, format: &str, out: Option<&PathBuf>) -> ExitCode {
    let sim_config = match config.load() {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let format: ExportFormat = match format.parse() {
        Ok(f) => f,
        Err(e) => return fail(e),
    };
    let env = match Environment::build(&sim_config) {
        Ok(env) => env,
        Err(e) => return fail(e),
    };
    let text = match export_topology(&env.topology, &env.clusters, format) {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    match out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                return fail(format!("cannot write {}: {e}", path.display()));
            }
        }
        None => print!("{text}"),
    }
    ExitCode::SUCCESS
}

fn cmd_search(config: &ConfigArgs, asset: u32, chunk: u32, proxy: usize) -> ExitCode {
    let sim_config = match config.load() {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    if asset >= sim_config.asset_count {
        return fail(format!(
            "asset {asset} outside the catalog (asset_count = {})",
            sim_config.asset_count
        ));
    }
    let env = match Environment::build(&sim_config) {
        Ok(env) => env,
        Err(e) => return fail(e),
    };
    if chunk as usize >= env.chunk_table[asset as usize].len() {
        return fail(format!(
            "chunk {chunk} outside asset {asset} ({} chunks)",
            env.chunk_table[asset as usize].len()
        ));
    }
    let proxies: Vec<_> = env.topology.proxies().map(|n| n.id).collect();
    let Some(&origin) = proxies.get(proxy) else {
        return fail(format!("proxy index {proxy} outside [0,{})", proxies.len()));
    };
    let query = SearchQuery { target: (AssetId(asset), chunk), origin };
    let window = match SessionWindow::new(0.0, sim_config.session_duration_s) {
        Ok(w) => w,
        Err(e) => return fail(e),
    };
    let outcome = search_with_stats(
        &env.topology,
        &env.adjacency,
        &env.index,
        &env.placement,
        &query,
        &window,
        sim_config.probe_latency_s,
    );
    match outcome {
        Ok((SearchOutcome::Found { hop_count, source, path }, stats)) => {
            let path: Vec<String> = path.iter().map(|n| n.to_string()).collect();
            println!(
                "found hop_count={hop_count} source={source} path={} elapsed={}",
                path.join("->"),
                stats.elapsed
            );
            ExitCode::SUCCESS
        }
        Ok((SearchOutcome::NotFound { elapsed }, _)) => {
            println!("not_found elapsed={elapsed}");
            ExitCode::SUCCESS
        }
        Err(e) => fail(e),
    }
}

fn cmd_run(config: &ConfigArgs, out_dir: &PathBuf, placement: bool) -> ExitCode {
    let sim_config = match config.load() {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    if let Err(e) = std::fs::create_dir_all(out_dir) {
        return fail(format!("cannot create {}: {e}", out_dir.display()));
    }
    let report = match engine::run(&sim_config) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    let mut manifest = RunManifest::new("run", &sim_config);
    let written = report::write_requests_csv(out_dir, &report, &mut manifest)
        .and_then(|_| report::write_throughput_csv(out_dir, &report, &mut manifest))
        .and_then(|_| report::write_blocking_csv(out_dir, &report, &mut manifest))
        .and_then(|_| report::write_hops_csv(out_dir, &report, &mut manifest));
    if let Err(e) = written {
        return fail(format!("cannot write outputs under {}: {e}", out_dir.display()));
    }
    if placement {
        // Rebuilt from the same seed, so it matches what the run used.
        let env = match Environment::build(&sim_config) {
            Ok(env) => env,
            Err(e) => return fail(e),
        };
        if let Err(e) = std::fs::write(out_dir.join("placement.json"), env.placement.to_json()) {
            return fail(format!("cannot write placement.json: {e}"));
        }
        manifest.outputs.push("placement.json".into());
    }
    if let Err(e) = manifest.write(out_dir) {
        return fail(format!("cannot write manifest under {}: {e}", out_dir.display()));
    }
    println!(
        "run complete: {} arrivals, {} admitted, {} blocked, {} cache hits, {} misses ({} unresolved at horizon)",
        report.total_arrivals(),
        report.total_admitted(),
        report.total_blocked(),
        report.cache_hits,
        report.cache_miss_searches,
        report.cache_miss_searches - report.found_searches() - report.failed_searches,
    );
    println!("outputs in {}", out_dir.display());
    ExitCode::SUCCESS
}

fn cmd_sweep(config: &ConfigArgs, sizes: &str, trials: u32, out_dir: &PathBuf) -> ExitCode {
    let sim_config = match config.load() {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let sizes: Vec<u32> = match sizes
        .split(',')
        .map(|v| v.trim().parse::<u32>())
        .collect::<Result<_, _>>()
    {
        Ok(s) => s,
        Err(e) => return fail(format!("bad sizes list: {e}")),
    };
    if let Err(e) = std::fs::create_dir_all(out_dir) {
        return fail(format!("cannot create {}: {e}", out_dir.display()));
    }
    let result = match engine::sweep_adjacency(&sim_config, &sizes, trials) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    let mut manifest = RunManifest::new("sweep", &sim_config);
    manifest.trials = Some(trials);
    manifest.sizes = Some(sizes.clone());
    let written = report::write_sweep_hops_csv(out_dir, &result, &mut manifest)
        .and_then(|_| report::write_hops_summary_csv(out_dir, &result, &mut manifest))
        .and_then(|_| manifest.write(out_dir));
    if let Err(e) = written {
        return fail(format!("cannot write outputs under {}: {e}", out_dir.display()));
    }
    for (size, hist) in &result.per_size {
        let mean = hist.mean().map(|m| format_sig(m, 6)).unwrap_or_else(|| "-".into());
        println!(
            "size {size}: trials {} found {} not_found {} mean_hops {mean}",
            hist.trials, hist.found, hist.not_found
        );
    }
    println!("outputs in {}", out_dir.display());
    ExitCode::SUCCESS
}

fn cmd_validate(config: &ConfigArgs, tolerance: f64) -> ExitCode {
    let sim_config = match config.load() {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    if tolerance.is_nan() || tolerance <= 0.0 {
        return fail("tolerance must be > 0");
    }
    let rows = match validate::run_validation(&sim_config, tolerance) {
        Ok(rows) => rows,
        Err(e) => return fail(e),
    };
    println!(
        "{:<24} {:>14} {:>14} {:>12} {:>6}",
        "quantity", "analytic", "measured", "deviation", "pass"
    );
    let mut all_pass = true;
    for row in &rows {
        all_pass &= row.pass;
        println!(
            "{:<24} {:>14} {:>14} {:>12} {:>6}",
            row.quantity,
            format_sig(row.analytic, 6),
            format_sig(row.measured, 6),
            format_sig(row.deviation, 6),
            if row.pass { "ok" } else { "FAIL" }
        );
    }
    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not usage errors.
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match cli.command {
        Command::Analytic { model } => cmd_analytic(model),
        Command::Topology { config, format, out } => cmd_topology(&config, &format, out.as_ref()),
        Command::Search { config, asset, chunk, proxy } => {
            cmd_search(&config, asset, chunk, proxy)
        }
        Command::Run { config, out_dir, placement } => cmd_run(&config, &out_dir, placement),
        Command::Sweep { config, sizes, trials, out_dir } => {
            cmd_sweep(&config, &sizes, trials, &out_dir)
        }
        Command::Validate { config, tolerance } => cmd_validate(&config, tolerance),
    }
}
