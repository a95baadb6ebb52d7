//! Command-line front end. Exit codes: 0 pass (or no verdict), 2 verdict fail, 1 error.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use antvote::cli::{parse_config, run, Command, FileConfig, PriorConfig, RunOptions, SignalConfig};

#[derive(Parser)]
#[command(name = "antvote", version, about = "Equilibrium thresholds for majority voting with an antagonistic minority")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Tabulate ξ*(α) (closed form plus numeric bounds) as CSV.
    Curve(Common),
    /// Construct (or load) a profile and check it against coalition deviations.
    Check(Common),
    /// Compare the closed-form curve to the numeric optimisation.
    Verify(Common),
    /// Monte Carlo estimate of fidelity against the exact value.
    Simulate(Common),
    /// Exhaustive search over small deviation spaces.
    Bruteforce(Common),
}

#[derive(Args)]
struct Common {
    /// JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    /// Prior probability of state H.
    #[arg(long)]
    p_h: Option<f64>,
    /// P(h | H).
    #[arg(long)]
    phh: Option<f64>,
    /// P(h | L).
    #[arg(long)]
    phl: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    xi: Option<f64>,
    /// ξ as a fraction of the regime cap (default 0.8).
    #[arg(long)]
    xi_factor: Option<f64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Strategy grid resolution of the numeric optimisation.
    #[arg(long)]
    resolution: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    /// α grid step.
    #[arg(long)]
    grid: Option<f64>,
    /// Output CSV (stdout when omitted for `curve`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// SVG plot of the curve.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// JSON report.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Check the config's profile instead of constructing one.
    #[arg(long)]
    use_config_profile: bool,
    /// Build the profile at this ξ instead of the checked one.
    #[arg(long)]
    construct_xi: Option<f64>,
    /// Override the ε of the equilibrium check.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Deviator count for `bruteforce` (default floor(ξ n)).
    #[arg(long)]
    k: Option<usize>,
    /// Strategy grid step for `bruteforce`.
    #[arg(long)]
    bf_grid: Option<f64>,
    /// Let majority agents deviate too in `bruteforce`.
    #[arg(long)]
    include_majority: bool,
    /// Skip the numeric columns of `curve`.
    #[arg(long)]
    skip_numeric: bool,
}

impl Common {
    fn split(self) -> anyhow::Result<(Option<PathBuf>, FileConfig, RunOptions)> {
        let signal = match (self.phh, self.phl) {
            (Some(p_hh), Some(p_hl)) => Some(SignalConfig { p_hh, p_hl }),
            (None, None) => None,
            _ => anyhow::bail!("--phh and --phl must be given together"),
        };
        let flags = FileConfig {
            n: self.n,
            prior: self.p_h.map(|p_h| PriorConfig { p_h, p_l: 1.0 - p_h }),
            signal,
            groups: None,
            alpha: self.alpha,
            xi: self.xi,
            xi_factor: self.xi_factor,
            trials: self.trials,
            seed: self.seed,
            resolution: self.resolution,
            tol: self.tol,
            grid: self.grid,
        };
        let options = RunOptions {
            out: self.out,
            svg: self.svg,
            report: self.report,
            use_config_profile: self.use_config_profile,
            construct_xi: self.construct_xi,
            epsilon: self.epsilon,
            k: self.k,
            bf_grid: self.bf_grid,
            include_majority: self.include_majority,
            skip_numeric: self.skip_numeric,
        };
        Ok((self.config, flags, options))
    }
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("ANTVOTE_THREADS") {
        let n: usize = v.parse().with_context(|| format!("ANTVOTE_THREADS = {v:?} is not a count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main_inner() -> anyhow::Result<i32> {
    let cli = Cli::parse();
    configure_threads()?;
    let (command, common) = match cli.command {
        Sub::Curve(c) => (Command::Curve, c),
        Sub::Check(c) => (Command::Check, c),
        Sub::Verify(c) => (Command::Verify, c),
        Sub::Simulate(c) => (Command::Simulate, c),
        Sub::Bruteforce(c) => (Command::Bruteforce, c),
    };
    let (file, flags, options) = common.split()?;
    let config = parse_config(command, file.as_deref(), flags, options)?;
    let outcome = run(&config)?;
    if command == Command::Curve && config.options.out.is_none() {
        eprintln!("{}", outcome.summary);
    } else {
        println!("{}", outcome.summary);
    }
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
