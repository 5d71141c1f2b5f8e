//! Config-driven sampling runs: chains, measurement CSVs, manifests.
//!
//! Measurement files are plain CSV with a leading `#schema=1` comment line
//! that also carries the run id. Their bytes depend only on the config and
//! the seed.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{records_from_chains, EstimateRecord, ExperimentConfig, Probe};
use crate::exact::sha256_hex;
use crate::exec::Exec;
use crate::model::ModelGraph;
use crate::sampler::{ChainOptions, FkChain};

pub const SCHEMA: &str = "#schema=1";

/// Per-sweep measurements of one chain.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainMeasurements {
    pub chain: u64,
    pub sweeps: Vec<u64>,
    /// rows[i][j]: column j at sweep i
    pub rows: Vec<Vec<f64>>,
}

impl ChainMeasurements {
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }
}

#[derive(Clone, Debug)]
pub struct CampaignOutput {
    pub config_hash: String,
    pub run_id: String,
    pub columns: Vec<String>,
    pub chains: Vec<ChainMeasurements>,
}

/// Identifies a run: config hash, seed and code version.
pub fn run_id(config_hash: &str, seed: u64) -> String {
    sha256_hex(format!("{config_hash}:{seed}:{}", crate::VERSION).as_bytes())
}

pub fn run_chain(config: &ExperimentConfig, chain: u64, exec: Exec) -> Result<ChainMeasurements> {
    let (domain, probes) = config.compile()?;
    run_compiled(config, &domain, &probes, chain, exec)
}

fn run_compiled(
    config: &ExperimentConfig,
    domain: &crate::lattice::LatticeDomain,
    probes: &[Probe],
    chain: u64,
    exec: Exec,
) -> Result<ChainMeasurements> {
    let graph = ModelGraph::new(domain, &config.bc)?;
    let opts = ChainOptions { n_sweeps: config.sweeps, burn_in: config.burn_in, thin: config.thin, seed: config.seed, chain };
    let mut fk = FkChain::new(graph, config.model_params()?, opts, exec)?;
    let width: usize = probes.iter().map(|p| p.num_columns()).sum();
    let mut out = ChainMeasurements { chain, sweeps: Vec::new(), rows: Vec::new() };
    while let Some(s) = fk.advance() {
        let mut row = Vec::with_capacity(width);
        for p in probes {
            p.measure(fk.labels(), fk.bonds(), &mut row);
        }
        out.sweeps.push(s);
        out.rows.push(row);
    }
    Ok(out)
}

/// Run every chain of the config. Chains run concurrently under a parallel
/// executor; the output does not depend on the executor.
pub fn run_campaign(config: &ExperimentConfig, exec: Exec) -> Result<CampaignOutput> {
    let (domain, probes) = config.compile()?;
    let chains = exec
        .map(config.chains as usize, |c| run_compiled(config, &domain, &probes, c as u64, exec))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let config_hash = config.hash();
    Ok(CampaignOutput { run_id: run_id(&config_hash, config.seed), config_hash, columns: config.columns(), chains })
}

impl CampaignOutput {
    pub fn records(&self, batches: usize) -> Result<Vec<EstimateRecord>> {
        records_from_chains(&self.columns, &self.chains, batches, &self.config_hash)
    }

    pub fn record(&self, column: &str, batches: usize) -> Result<EstimateRecord> {
        self.records(batches)?
            .into_iter()
            .find(|r| r.observable == column)
            .ok_or_else(|| Error::Config(format!("no column {column}")))
    }
}

pub fn measurement_csv(run_id: &str, columns: &[String], m: &ChainMeasurements) -> String {
    let mut s = format!("{SCHEMA} run={run_id} chain={}\nsweep", m.chain);
    for c in columns {
        s.push(',');
        s.push_str(c);
    }
    s.push('\n');
    for (sweep, row) in m.sweeps.iter().zip(&m.rows) {
        s.push_str(&sweep.to_string());
        for v in row {
            s.push(',');
            s.push_str(&v.to_string());
        }
        s.push('\n');
    }
    s
}

fn malformed(what: &str, line: usize) -> Error {
    Error::Config(format!("malformed CSV at line {line}: {what}"))
}

/// Header comment fields `key=value` after the schema tag.
fn header_fields(line: &str) -> Result<Vec<(&str, &str)>> {
    let rest = line.strip_prefix(SCHEMA).ok_or_else(|| malformed("missing #schema=1 header", 1))?;
    rest.split_whitespace()
        .map(|kv| kv.split_once('=').ok_or_else(|| malformed("bad header field", 1)))
        .collect()
}

/// Parse a measurement file; returns the run id, columns and data.
pub fn parse_measurement_csv(text: &str) -> Result<(String, Vec<String>, ChainMeasurements)> {
    let mut lines = text.lines();
    let fields = header_fields(lines.next().unwrap_or(""))?;
    let get = |k: &str| fields.iter().find(|f| f.0 == k).map(|f| f.1).ok_or_else(|| malformed(k, 1));
    let run = get("run")?.to_string();
    let chain: u64 = get("chain")?.parse().map_err(|_| malformed("chain", 1))?;
    let head = lines.next().ok_or_else(|| malformed("missing column line", 2))?;
    let mut cols = head.split(',');
    if cols.next() != Some("sweep") {
        return Err(malformed("first column must be sweep", 2));
    }
    let columns: Vec<String> = cols.map(str::to_string).collect();
    let mut m = ChainMeasurements { chain, sweeps: Vec::new(), rows: Vec::new() };
    for (i, line) in lines.enumerate() {
        let mut it = line.split(',');
        let sweep = it.next().and_then(|s| s.parse().ok()).ok_or_else(|| malformed("sweep", i + 3))?;
        let row = it.map(|v| v.parse::<f64>().map_err(|_| malformed(v, i + 3))).collect::<Result<Vec<_>>>()?;
        if row.len() != columns.len() {
            return Err(malformed("wrong number of fields", i + 3));
        }
        m.sweeps.push(sweep);
        m.rows.push(row);
    }
    Ok((run, columns, m))
}

pub fn estimates_csv(run_id: &str, records: &[EstimateRecord]) -> String {
    let mut s = format!("{SCHEMA} run={run_id}\nobservable,value,stderr,n,tau_int,config_hash\n");
    for r in records {
        s.push_str(&format!("{},{},{},{},{},{}\n", r.observable, r.value, r.stderr, r.n, r.tau_int, r.config_hash));
    }
    s
}

pub fn parse_estimates_csv(text: &str) -> Result<Vec<EstimateRecord>> {
    let mut lines = text.lines();
    header_fields(lines.next().unwrap_or(""))?;
    if lines.next() != Some("observable,value,stderr,n,tau_int,config_hash") {
        return Err(malformed("unexpected column line", 2));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 6 {
                return Err(malformed("wrong number of fields", i + 3));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| malformed(s, i + 3));
            Ok(EstimateRecord {
                observable: f[0].to_string(),
                value: num(f[1])?,
                stderr: num(f[2])?,
                n: f[3].parse().map_err(|_| malformed(f[3], i + 3))?,
                tau_int: num(f[4])?,
                config_hash: f[5].to_string(),
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub config_hash: String,
    pub seed: u64,
    pub code_version: String,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub outputs: Vec<OutputFile>,
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Run the campaign and write `measurements_chainK.csv`, `estimates.csv`
/// and `manifest.json` into `out`.
pub fn write_campaign(config: &ExperimentConfig, out: &Path, exec: Exec) -> Result<RunManifest> {
    let started = unix_now();
    let result = run_campaign(config, exec)?;
    fs::create_dir_all(out)?;
    let mut files: Vec<(PathBuf, String)> = result
        .chains
        .iter()
        .map(|m| {
            (out.join(format!("measurements_chain{}.csv", m.chain)), measurement_csv(&result.run_id, &result.columns, m))
        })
        .collect();
    files.push((out.join("estimates.csv"), estimates_csv(&result.run_id, &result.records(config.batches)?)));
    let mut outputs = Vec::new();
    for (path, body) in files {
        fs::write(&path, &body)?;
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        outputs.push(OutputFile { path: name, sha256: sha256_hex(body.as_bytes()) });
    }
    let manifest = RunManifest {
        run_id: result.run_id,
        config_hash: result.config_hash,
        seed: config.seed,
        code_version: crate::VERSION.to_string(),
        started_unix: started,
        finished_unix: unix_now(),
        outputs,
    };
    fs::write(out.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}

/// Read every `measurements_chain*.csv` in `dir` and merge them.
pub fn load_measurements(dir: &Path) -> Result<CampaignOutput> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("measurements_chain") && n.ends_with(".csv"))
        })
        .collect();
    entries.sort();
    let mut run: Option<String> = None;
    let mut columns: Option<Vec<String>> = None;
    let mut chains = Vec::new();
    for p in entries {
        let (r, c, m) = parse_measurement_csv(&fs::read_to_string(&p)?)?;
        if run.as_ref().is_some_and(|x| *x != r) || columns.as_ref().is_some_and(|x| *x != c) {
            return Err(Error::Config(format!("{} belongs to a different run", p.display())));
        }
        run = Some(r);
        columns = Some(c);
        chains.push(m);
    }
    let (Some(run_id), Some(columns)) = (run, columns) else {
        return Err(Error::InsufficientData(format!("no measurement files in {}", dir.display())));
    };
    let manifest: Option<RunManifest> =
        fs::read_to_string(dir.join("manifest.json")).ok().and_then(|t| serde_json::from_str(&t).ok());
    let config_hash = manifest.map(|m| m.config_hash).unwrap_or_default();
    Ok(CampaignOutput { config_hash, run_id, columns, chains })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        ExperimentConfig::from_json(
            r#"{
            "domain": {"shape_tag": "box", "mesh": 1.0, "corners": [[0, 0], [15, 15]]},
            "observables": [
                {"kind": "one_arm", "id": "arm", "centers": [[8, 8]], "radii": [2, 3]},
                {"kind": "two_point", "id": "tp", "bases": [[4, 8]], "directions": [[1, 0]], "separations": [1, 2, 4]}
            ],
            "sweeps": 64, "burn_in": 4, "seed": 3, "chains": 2
        }"#,
        )
        .unwrap()
    }

    #[test]
    fn csv_round_trip() {
        let out = run_campaign(&small(), Exec::default()).unwrap();
        assert_eq!(out.chains.len(), 2);
        let text = measurement_csv(&out.run_id, &out.columns, &out.chains[1]);
        assert!(text.starts_with("#schema=1 run="));
        let (run, cols, m) = parse_measurement_csv(&text).unwrap();
        assert_eq!((run, cols), (out.run_id.clone(), out.columns.clone()));
        assert_eq!(m, out.chains[1]);
        let recs = out.records(32).unwrap();
        assert_eq!(parse_estimates_csv(&estimates_csv(&out.run_id, &recs)).unwrap(), recs);
    }

    #[test]
    fn executors_agree() {
        let a = run_campaign(&small(), Exec::Sequential).unwrap();
        let b = run_campaign(&small(), Exec::Parallel).unwrap();
        assert_eq!(a.chains, b.chains);
    }

    #[test]
    fn malformed_rows_rejected() {
        assert!(parse_measurement_csv("sweep,a\n1,0\n").is_err());
        let bad = "#schema=1 run=x chain=0\nsweep,a\n1,0,3\n";
        assert!(matches!(parse_measurement_csv(bad), Err(Error::Config(m)) if m.contains("line 3")));
    }
}
