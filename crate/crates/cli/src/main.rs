//! `fkcorr` command-line driver.
//!
//! Exit codes: 0 success, 1 residual or tolerance failure, 2 usage or
//! config error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use fkcorr::campaign::{load_measurements, parse_estimates_csv, write_campaign, RunManifest};
use fkcorr::continuum::CorrelationFormula;
use fkcorr::estimator::{fit_window, parse_column, ExperimentConfig, FitPoint, FitSpec};
use fkcorr::exact::sha256_hex;
use fkcorr::verify::{run_suite, Suite};
use fkcorr::Exec;

#[derive(Parser)]
#[command(name = "fkcorr", version, about = "Critical FK-Ising sampling, exact oracles and continuum checks")]
struct Cli {
    /// Input file: campaign config, fit spec or formula list
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads
    #[arg(long, global = true, env = "FKCORR_THREADS")]
    threads: Option<usize>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Run everything on the calling thread
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a named exact or continuum suite
    Verify {
        /// es-coupling, pfaffian, high-temp, observable or continuum
        suite: Suite,
        /// Print the JSON report instead of the table
        #[arg(long)]
        json: bool,
    },
    /// Run a sampling campaign from --config
    Sample,
    /// Fit log-log slopes to the ladders in an estimates file
    Fit {
        /// estimates.csv from a campaign
        estimates: PathBuf,
    },
    /// Evaluate continuum formulas listed in --config, or print the check tables
    Continuum,
    /// Summarize a campaign directory and check its manifest
    Report {
        /// Campaign output directory (defaults to --out)
        dir: Option<PathBuf>,
    },
}

/// Error tagged with its exit code.
struct Failure {
    code: u8,
    err: anyhow::Error,
}

fn usage(err: impl Into<anyhow::Error>) -> Failure {
    Failure { code: 2, err: err.into() }
}

fn classify(err: fkcorr::Error) -> Failure {
    use fkcorr::Error::*;
    let code = match err {
        Config(_) | Json(_) | InvalidGeometry(_) | InvalidMarking(_) | InvalidPoint(_) | Ordering(_) | Io(_) => 2,
        _ => 1,
    };
    Failure { code, err: err.into() }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(usage)
}

fn write(path: &Path, body: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| usage(anyhow!(e)))?;
    }
    fs::write(path, body).with_context(|| format!("writing {}", path.display())).map_err(|e| Failure { code: 1, err: e })
}

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| PathBuf::from("."))
}

fn run(cli: &Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(usage(anyhow!("--threads must be at least 1")));
        }
        fkcorr::exec::init_threads(n).map_err(|e| usage(anyhow!(e)))?;
    }
    let exec = if cli.sequential { Exec::Sequential } else { Exec::Parallel };
    match &cli.command {
        Command::Verify { suite, json } => {
            let report = run_suite(*suite, exec).map_err(classify)?;
            let body = serde_json::to_string_pretty(&report).map_err(|e| usage(anyhow!(e)))?;
            if *json {
                println!("{body}");
            } else {
                print!("{}", report.render());
            }
            if let Some(dir) = &cli.out {
                write(&dir.join(format!("verify_{}.json", suite.name())), &body)?;
            }
            if report.pass {
                Ok(())
            } else {
                Err(Failure { code: 1, err: anyhow!("suite {} has rows outside tolerance", suite.name()) })
            }
        }
        Command::Sample => {
            let path = cli.config.as_ref().ok_or_else(|| usage(anyhow!("sample needs --config")))?;
            let mut config = ExperimentConfig::from_json(&read(path)?).map_err(classify)?;
            if let Some(s) = cli.seed {
                config.seed = s;
            }
            let manifest = write_campaign(&config, &out_dir(cli), exec).map_err(classify)?;
            println!("run {}", manifest.run_id);
            for f in &manifest.outputs {
                println!("  {} {}", f.sha256, f.path);
            }
            Ok(())
        }
        Command::Fit { estimates } => {
            let records = parse_estimates_csv(&read(estimates)?).map_err(classify)?;
            let spec: FitSpec = match &cli.config {
                Some(p) => serde_json::from_str(&read(p)?).map_err(usage)?,
                None => FitSpec::default(),
            };
            let mut ids: Vec<&str> = records.iter().filter_map(|r| parse_column(&r.observable).map(|c| c.0)).collect();
            ids.dedup();
            let mut fits = serde_json::Map::new();
            for id in ids {
                let pts: Vec<FitPoint> = records
                    .iter()
                    .filter_map(|r| match parse_column(&r.observable) {
                        Some((i, s)) if i == id => Some(FitPoint::new(s, r.value, r.stderr)),
                        _ => None,
                    })
                    .collect();
                let v = match fit_window(&pts, &spec) {
                    Ok(f) => {
                        println!("{id}: slope {:.5} ± {:.5} over {:?}, chi2 {:.2}/{} (p = {:.3})", f.slope, f.slope_error, f.window, f.chi2, f.dof, f.p_value);
                        serde_json::to_value(f).map_err(|e| usage(anyhow!(e)))?
                    }
                    Err(e) => {
                        println!("{id}: {e}");
                        serde_json::json!({ "error": e.to_string() })
                    }
                };
                fits.insert(id.to_string(), v);
            }
            let body = serde_json::to_string_pretty(&fits).map_err(|e| usage(anyhow!(e)))?;
            write(&out_dir(cli).join("fits.json"), &body)
        }
        Command::Continuum => match &cli.config {
            Some(p) => {
                let formulas: Vec<CorrelationFormula> = serde_json::from_str(&read(p)?).map_err(usage)?;
                let mut csv = String::from("#schema=1\nindex,family,value\n");
                for (i, f) in formulas.iter().enumerate() {
                    let v = f.eval().map_err(classify)?;
                    csv.push_str(&format!("{i},{},{v}\n", f.family()));
                }
                print!("{csv}");
                if let Some(dir) = &cli.out {
                    write(&dir.join("continuum.csv"), &csv)?;
                }
                Ok(())
            }
            None => {
                let report = run_suite(Suite::Continuum, exec).map_err(classify)?;
                print!("{}", report.render());
                Ok(())
            }
        },
        Command::Report { dir } => {
            let dir = dir.clone().unwrap_or_else(|| out_dir(cli));
            let manifest: RunManifest =
                serde_json::from_str(&read(&dir.join("manifest.json"))?).context("parsing manifest.json").map_err(usage)?;
            println!("run {} (config {}, seed {}, version {})", manifest.run_id, manifest.config_hash, manifest.seed, manifest.code_version);
            let mut bad = 0;
            for f in &manifest.outputs {
                let ok = fs::read(dir.join(&f.path)).map(|b| sha256_hex(&b) == f.sha256).unwrap_or(false);
                println!("  {} {}", if ok { "ok      " } else { "MISMATCH" }, f.path);
                bad += usize::from(!ok);
            }
            let data = load_measurements(&dir).map_err(classify)?;
            if data.run_id != manifest.run_id {
                return Err(Failure { code: 1, err: anyhow!("measurement files carry run {}", data.run_id) });
            }
            let batches = fkcorr::estimator::DEFAULT_BATCHES;
            println!("{:<24} {:>12} {:>12} {:>10} {:>8}", "observable", "value", "stderr", "n", "tau_int");
            for r in data.records(batches).map_err(classify)? {
                println!("{:<24} {:>12.6} {:>12.6} {:>10} {:>8.2}", r.observable, r.value, r.stderr, r.n, r.tau_int);
            }
            if bad > 0 {
                return Err(Failure { code: 1, err: anyhow!("{bad} output files differ from the manifest") });
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.err);
            ExitCode::from(f.code)
        }
    }
}
