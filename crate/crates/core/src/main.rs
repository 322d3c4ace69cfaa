use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use knapnav::comms::SchemeKind;
use knapnav::config::ScenarioConfig;
use knapnav::harness::{run_sweep, write_results, SweepSpec, FAST_TRIALS};
use knapnav::sim::{calibrate_kappa_scale, run_trial};
use knapnav::{oracle, Error, Result};

/// Bandwidth-constrained observation sharing for multi-robot navigation.
///
/// Any scenario field can be overridden with `--<field> <value>`, e.g.
/// `--n-agents 8 --alpha 0.1`.
#[derive(Debug, Parser)]
#[command(name = "knapnav", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one trial and print its result.
    Run {
        /// Scenario TOML file; missing fields take their defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// iknap, broadcast, no_comm or all.
        #[arg(long, default_value = "iknap")]
        scheme: String,
    },
    /// Run a sweep described by a TOML file and write CSV results.
    Sweep {
        spec: PathBuf,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Use the reduced trial count per value.
        #[arg(long)]
        fast: bool,
        #[arg(long)]
        trials: Option<u64>,
        /// Base seed for the trial seed sequence.
        #[arg(long = "base-seed")]
        base_seed: Option<u64>,
        /// Restrict to one scheme.
        #[arg(long)]
        scheme: Option<String>,
        /// Also write makespan.svg.
        #[arg(long)]
        svg: bool,
    },
    /// Run the brute-force and quadrature verification suites.
    Oracle {
        #[arg(long = "oracle-seed", default_value_t = 0)]
        oracle_seed: u64,
    },
    /// Estimate the kappa normalization from default trials.
    Calibrate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        trials: u64,
        #[arg(long = "base-seed", default_value_t = 0)]
        base_seed: u64,
    },
}

/// Splits `--<field> <value>` and `--<field>=<value>` scenario overrides
/// out of the raw arguments.
fn split_overrides(args: Vec<String>) -> (Vec<String>, Vec<(String, String)>) {
    let fields = ScenarioConfig::field_names();
    let mut rest = Vec::new();
    let mut overrides = Vec::new();
    let mut it = args.into_iter();
    while let Some(arg) = it.next() {
        let Some(flag) = arg.strip_prefix("--") else {
            rest.push(arg);
            continue;
        };
        let (name, inline) = match flag.split_once('=') {
            Some((n, v)) => (n.replace('-', "_"), Some(v.to_string())),
            None => (flag.replace('-', "_"), None),
        };
        if !fields.contains(&name) {
            rest.push(arg);
            continue;
        }
        match inline.or_else(|| it.next()) {
            Some(value) => overrides.push((name, value)),
            None => rest.push(arg),
        }
    }
    (rest, overrides)
}

fn load_config(path: Option<&PathBuf>, overrides: &[(String, String)]) -> Result<ScenarioConfig> {
    let mut config = match path {
        Some(p) => ScenarioConfig::load(p)?,
        None => ScenarioConfig::default(),
    };
    for (k, v) in overrides {
        config.set_field(k, v)?;
    }
    config.validate()?;
    Ok(config)
}

fn parse_schemes(s: &str) -> Result<Vec<SchemeKind>> {
    if s == "all" {
        return Ok(SchemeKind::ALL.to_vec());
    }
    s.parse::<SchemeKind>().map(|k| vec![k]).map_err(Error::InvalidConfig)
}

fn run(cli: Cli, overrides: Vec<(String, String)>) -> Result<bool> {
    match cli.command {
        Command::Run { config, scheme } => {
            let config = load_config(config.as_ref(), &overrides)?;
            for scheme in parse_schemes(&scheme)? {
                let result = run_trial(&config, scheme)?;
                println!("[{scheme}]");
                print!("{}", toml::to_string(&result).expect("trial result serializes"));
            }
            Ok(true)
        }
        Command::Sweep {
            spec,
            out,
            fast,
            trials,
            base_seed,
            scheme,
            svg,
        } => {
            let mut spec = SweepSpec::load(&spec)?;
            for (k, v) in &overrides {
                spec.base.set_field(k, v)?;
            }
            if fast {
                spec.trials_per_value = FAST_TRIALS;
            }
            if let Some(t) = trials {
                spec.trials_per_value = t;
            }
            if let Some(s) = base_seed {
                spec.base_seed = s;
            }
            if let Some(s) = scheme {
                spec.schemes = parse_schemes(&s)?;
            }
            let results = run_sweep(&spec)?;
            let files = write_results(&results, &out, svg)?;
            println!(
                "{} trials, {} failures -> {}",
                results.trials.len(),
                results.failures.len(),
                files.trials.parent().unwrap_or(&out).display()
            );
            Ok(true)
        }
        Command::Oracle { oracle_seed } => {
            let reports = oracle::run_all(oracle_seed);
            for r in &reports {
                println!("{r}");
            }
            Ok(reports.iter().all(|r| r.passed()))
        }
        Command::Calibrate {
            config,
            trials,
            base_seed,
        } => {
            let config = load_config(config.as_ref(), &overrides)?;
            let scale = calibrate_kappa_scale(&config, trials, base_seed)?;
            println!("kappa_scale = {scale}");
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let (args, overrides) = split_overrides(std::env::args().collect());
    let cli = Cli::parse_from(args);
    match run(cli, overrides) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
