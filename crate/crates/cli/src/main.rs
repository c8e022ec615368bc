use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};

use clap::{Parser, Subcommand};
use iscap_core::config::Config;
use iscap_core::experiment::{run_experiment, ExperimentError, ExperimentKind, ExperimentSpec};
use iscap_core::oracle::run_oracles;

const CONFIG_ERROR: u8 = 1;
const RUNTIME_ERROR: u8 = 2;

#[derive(Parser)]
#[command(
    name = "iscap",
    version,
    about = "Monte-Carlo experiments for joint sensing, communication and powering beamforming"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its table and manifest.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// One of feasibility-vs-nodes, feasibility-vs-gamma, convergence,
        /// tradeoff, mrt-compare, feasibility-heights-vs-gamma.
        #[arg(long)]
        experiment: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Monte-Carlo drops per point.
        #[arg(long)]
        drops: Option<usize>,
        /// Worker threads; 0 uses every available core.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Check a configuration file without running anything.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the worked-example oracle suite.
    Oracle,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { CONFIG_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Run {
            config,
            experiment,
            out,
            seed,
            drops,
            threads,
        } => run(config, &experiment, out, seed, drops, threads),
        Command::Validate { config } => validate(config),
        Command::Oracle => oracle(),
    }
}

fn load(path: &Path) -> Result<Config, ExitCode> {
    Config::load(path).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        ExitCode::from(CONFIG_ERROR)
    })
}

fn run(
    config_path: PathBuf,
    experiment: &str,
    out: PathBuf,
    seed: Option<u64>,
    drops: Option<usize>,
    threads: Option<usize>,
) -> ExitCode {
    let mut config = match load(&config_path) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let kind: ExperimentKind = match experiment.parse() {
        Ok(k) => k,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(CONFIG_ERROR);
        }
    };
    if let Some(s) = seed {
        config.seed = s;
    }
    if let Some(d) = drops {
        config.drops = d;
    }
    if let Err(e) = config.validate() {
        eprintln!("error: {e}");
        return ExitCode::from(CONFIG_ERROR);
    }
    let mut spec = ExperimentSpec::standard(kind, &config);
    spec.threads = threads.unwrap_or(0);
    if let Err(e) = spec.validate() {
        eprintln!("error: {e}");
        return ExitCode::from(CONFIG_ERROR);
    }

    eprintln!(
        "{}: {} points x {} curves x {} drops, seed {}",
        kind.name(),
        spec.x.len(),
        spec.curves.len(),
        spec.drops,
        spec.seed
    );
    let shown = AtomicUsize::new(0);
    let progress = |done: usize, total: usize| {
        let pct = done * 100 / total;
        if pct / 5 > shown.fetch_max(pct / 5, Ordering::Relaxed) || done == total {
            eprintln!("  {done}/{total} drops ({pct}%)");
        }
    };
    let result = match run_experiment(&spec, &config, Some(&progress)) {
        Ok(r) => r,
        Err(e) => return failure(e),
    };
    match result.write(&config, &out) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            eprintln!("done in {:.1} s", result.wall_time);
            ExitCode::SUCCESS
        }
        Err(e) => failure(e),
    }
}

fn failure(e: ExperimentError) -> ExitCode {
    eprintln!("error: {e}");
    match e {
        ExperimentError::Spec(_) => ExitCode::from(CONFIG_ERROR),
        _ => ExitCode::from(RUNTIME_ERROR),
    }
}

fn validate(config_path: PathBuf) -> ExitCode {
    let config = match load(&config_path) {
        Ok(c) => c,
        Err(code) => return code,
    };
    for kind in ExperimentKind::ALL {
        if let Err(e) = ExperimentSpec::standard(kind, &config).validate() {
            eprintln!("error: {}: {e}", kind.name());
            return ExitCode::from(CONFIG_ERROR);
        }
    }
    print!("{}", config.to_text());
    eprintln!("{}: ok", config_path.display());
    ExitCode::SUCCESS
}

fn oracle() -> ExitCode {
    let checks = run_oracles();
    let failed = checks.iter().filter(|c| !c.passed).count();
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    println!("{} of {} checks passed", checks.len() - failed, checks.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(RUNTIME_ERROR)
    }
}
