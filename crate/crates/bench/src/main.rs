use std::path::PathBuf;
use std::process::ExitCode;

use bench::{run_experiment, write_csv, ExperimentConfig, Preset};
use clap::Parser;

/// Sweeps splitting weights and polynomial order over random LQR instances
/// and writes averaged PCG iterations and condition numbers as CSV.
#[derive(Debug, Parser)]
#[command(name = "bench", version)]
struct Cli {
    /// Number of diagonal blocks.
    #[arg(long = "N", default_value_t = 20)]
    num_blocks: usize,
    /// Block size.
    #[arg(long = "n", default_value_t = 15)]
    block_size: usize,
    #[arg(long, default_value_t = 50)]
    matrices: usize,
    #[arg(long, default_value_t = 100)]
    rhs: usize,
    /// Polynomial orders, comma separated.
    #[arg(long = "m", value_delimiter = ',', default_value = "1,2,3,4")]
    m_list: Vec<usize>,
    /// Any of diag, stairs, equal, optimal.
    #[arg(long, value_delimiter = ',', default_value = "diag,stairs,equal,optimal")]
    presets: Vec<String>,
    /// Extra preset (a, 1 - 2a); repeatable.
    #[arg(long = "custom-a", allow_negative_numbers = true)]
    custom_a: Vec<f64>,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Compute exact condition numbers (only when N n <= 600).
    #[arg(long)]
    spectra: bool,
    #[arg(long, default_value = "results.csv")]
    out: PathBuf,
    /// Write each instance and its generator sidecar into this directory.
    #[arg(long = "dump-instances")]
    dump_instances: Option<PathBuf>,
}

fn threads_from_env() -> Result<usize, String> {
    match std::env::var("BENCH_THREADS") {
        Ok(v) => v.trim().parse().map_err(|_| format!("BENCH_THREADS: not a number: {v}")),
        Err(_) => Ok(0),
    }
}

fn build_config(cli: Cli) -> Result<(ExperimentConfig, PathBuf), String> {
    let mut presets = Vec::new();
    for name in &cli.presets {
        presets.push(Preset::from_short_name(name).ok_or_else(|| format!("unknown preset: {name}"))?);
    }
    presets.extend(cli.custom_a.iter().map(|&a| Preset::custom(a)));

    let mut cfg = ExperimentConfig::new(cli.num_blocks, cli.block_size, cli.seed);
    cfg.num_matrices = cli.matrices;
    cfg.num_rhs = cli.rhs;
    cfg.m_list = cli.m_list;
    cfg.presets = presets;
    cfg.tol = cli.tol;
    cfg.with_spectra = cli.spectra;
    cfg.threads = threads_from_env()?;
    cfg.dump_instances = cli.dump_instances;
    Ok((cfg, cli.out))
}

fn main() -> ExitCode {
    let (cfg, out) = match build_config(Cli::parse()) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let outcome = match run_experiment(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = write_csv(&outcome.rows, &out) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    for r in &outcome.rows {
        println!(
            "{:<24} m={} iters={:.2} cond={} failures={}",
            r.preset,
            r.m,
            r.mean_iterations,
            r.mean_cond.map_or("-".into(), |c| format!("{c:.4e}")),
            r.num_failures
        );
    }
    if outcome.spd_rejections > 0 {
        eprintln!(
            "warning: {} instance(s) failed the s.p.d. check and were re-drawn",
            outcome.spd_rejections
        );
        return ExitCode::from(2);
    }
    ExitCode::SUCCESS
}
