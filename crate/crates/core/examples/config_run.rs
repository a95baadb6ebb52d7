//! Load a JSON environment and run the same driver as `antvote check`.
//!
//! cargo run --example config_run [-- path/to/config.json]

use std::path::PathBuf;

use antvote::cli::{parse_config, run, Command, FileConfig, RunOptions};

fn main() -> anyhow::Result<()> {
    let path = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/example2.json"));
    let flags = FileConfig { xi_factor: Some(0.8), ..FileConfig::default() };
    let config = parse_config(Command::Check, Some(&path), flags, RunOptions::default())?;
    let env = config.env.as_ref().expect("check builds an environment");
    println!("{}: n = {}, α = {}", path.display(), env.n, env.alpha);
    let outcome = run(&config)?;
    println!("{}", outcome.summary);
    println!("exit code {}", outcome.exit_code());
    Ok(())
}
