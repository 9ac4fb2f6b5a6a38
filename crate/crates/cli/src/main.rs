//! Command-line front end: run scenario sweeps, record convergence traces and
//! check configuration files.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use irs_ofdm::sim::{self, Scenario};
use irs_ofdm::system::linear_to_db;

#[derive(Parser)]
#[command(name = "irs-ofdm", version, about = "IRS-assisted OFDM link simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario sweep and write one CSV row per scheme and realization.
    Run(RunArgs),
    /// Record the per-iteration rate of the alternating design.
    Trace(RunArgs),
    /// Check a configuration file and print the resolved settings.
    Validate(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Scenario file (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Override the seed from the configuration.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Output CSV path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

fn load(args: &CommonArgs) -> Result<Scenario> {
    let mut sc = sim::load_config(&args.config)?;
    if let Some(seed) = args.seed {
        sc.base.seed = seed;
    }
    Ok(sc)
}

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        anyhow::ensure!(j > 0, "--jobs must be at least 1");
        b = b.num_threads(j);
    }
    b.build().context("cannot start worker pool")
}

fn run(args: &RunArgs) -> Result<()> {
    let sc = load(&args.common)?;
    let rows = pool(args.jobs)?.install(|| sim::run_scenario(&sc))?;
    match &args.out {
        Some(path) => sim::emit_csv(&rows, path)?,
        None => sim::write_csv(&rows, std::io::stdout().lock()).context("cannot write to standard output")?,
    }
    Ok(())
}

fn trace(args: &RunArgs) -> Result<()> {
    let sc = load(&args.common)?;
    let rows = pool(args.jobs)?.install(|| sim::run_trace(&sc))?;
    match &args.out {
        Some(path) => sim::emit_trace_csv(&rows, path)?,
        None => sim::write_trace_csv(&rows, std::io::stdout().lock()).context("cannot write to standard output")?,
    }
    Ok(())
}

fn validate(args: &CommonArgs) -> Result<()> {
    let sc = load(args)?;
    sc.validate()?;
    let c = &sc.base;
    println!("configuration OK: {}", args.config.display());
    println!(
        "N={}, N_CP={}, L={}, L1={}, L2={} (L0={})",
        c.n,
        c.n_cp,
        c.l,
        c.l1,
        c.l2,
        c.l0()
    );
    println!(
        "M={} ({}x{}), groups K={} of {}x{}",
        c.m(),
        c.m_x,
        c.m_y,
        c.groups(),
        c.b_x,
        c.b_y
    );
    println!(
        "Γ={} dB, σ²={}, γ_d={} dB, P={}, P_t={}P",
        round(linear_to_db(c.gamma)),
        c.sigma2,
        c.snr_db,
        c.power(),
        c.pilot_power_ratio
    );
    println!(
        "initializer: successive alignment, I_SA={}; Q-free (SDR excluded)",
        c.i_sa
    );
    println!();
    print!("{}", sim::render_config(&sc));
    Ok(())
}

fn round(x: f64) -> f64 {
    (x * 1e9).round() / 1e9
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => run(a),
        Command::Trace(a) => trace(a),
        Command::Validate(a) => validate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let config = e
                .downcast_ref::<irs_ofdm::Error>()
                .is_some_and(irs_ofdm::Error::is_config);
            ExitCode::from(if config { 2 } else { 1 })
        }
    }
}
