use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::ExitCode;

use clap::{Arg, ArgMatches, Command};
use permlab_cli::config::{normalize_key, parse_config, Subcommand, COMMON_KEYS};
use permlab_cli::error::usage;
use permlab_cli::output::{write_atomic, write_record};
use permlab_cli::{run_experiment, CliError, ExperimentConfig, Params};

fn cli() -> Command {
    let mut cmd = Command::new("lab-cli")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Experiments on permanents of random symmetric sign matrices")
        .subcommand_required(true)
        .arg_required_else_help(true);
    for sub in Subcommand::ALL {
        let mut sc = Command::new(sub.name()).about(sub.about()).arg(
            Arg::new("config")
                .long("config")
                .value_name("PATH")
                .help("key=value config file; flags override it"),
        );
        for (key, help) in COMMON_KEYS.iter().chain(sub.keys()) {
            sc = sc.arg(Arg::new(*key).long(*key).value_name("VALUE").help(*help));
        }
        cmd = cmd.subcommand(sc);
    }
    cmd
}

fn flags(sub: Subcommand, m: &ArgMatches) -> BTreeMap<String, String> {
    COMMON_KEYS
        .iter()
        .chain(sub.keys())
        .filter_map(|(k, _)| {
            m.get_one::<String>(k)
                .map(|v| (normalize_key(k), v.clone()))
        })
        .collect()
}

fn run(name: &str, m: &ArgMatches) -> Result<bool, CliError> {
    let sub: Subcommand = name.parse()?;
    let file = match m.get_one::<String>("config") {
        Some(path) => {
            parse_config(&fs::read_to_string(path).map_err(|e| usage(format!("{path}: {e}")))?)?
        }
        None => BTreeMap::new(),
    };
    let params = Params::merged(file, flags(sub, m));
    let env_threads = std::env::var("PERMLAB_THREADS").ok();
    let cfg = ExperimentConfig::new(sub, params, sub.default_trials(), env_threads.as_deref())?;
    let rec = run_experiment(&cfg)?;
    write_record(&rec, cfg.params.get("out").map(Path::new), cfg.format)?;
    if let (Some(chart), Some(path)) = (&rec.chart, cfg.params.get("svg")) {
        write_atomic(Path::new(path), chart.as_bytes())?;
    }
    for (k, v) in &rec.summary {
        eprintln!("{k} = {v}");
    }
    for w in &rec.warnings {
        eprintln!("warning: {w}");
    }
    for v in &rec.violations {
        eprintln!("violation: {v}");
    }
    Ok(rec.violations.is_empty())
}

fn main() -> ExitCode {
    let matches = cli().get_matches();
    let Some((name, m)) = matches.subcommand() else {
        return ExitCode::from(2);
    };
    match run(name, m) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
