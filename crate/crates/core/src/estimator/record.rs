//! Estimate records and event probabilities.

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ObservableSpec};
use super::stats::pooled_batch_means;
use crate::campaign::{run_campaign, ChainMeasurements};
use crate::error::{Error, Result};
use crate::exec::Exec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub observable: String,
    pub value: f64,
    pub stderr: f64,
    pub n: u64,
    pub tau_int: f64,
    pub config_hash: String,
}

impl EstimateRecord {
    pub fn measured(&self) -> (f64, f64) {
        (self.value, self.stderr)
    }
}

/// One record per column, pooling chains in chain order whatever the order
/// of `chains`.
pub fn records_from_chains(
    columns: &[String],
    chains: &[ChainMeasurements],
    batches: usize,
    config_hash: &str,
) -> Result<Vec<EstimateRecord>> {
    let mut sorted: Vec<&ChainMeasurements> = chains.iter().collect();
    sorted.sort_by_key(|c| c.chain);
    if sorted.windows(2).any(|w| w[0].chain == w[1].chain) {
        return Err(Error::Config("duplicate chain ids".into()));
    }
    columns
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let cols: Vec<Vec<f64>> = sorted.iter().map(|c| c.column(j)).collect();
            let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
            let s = pooled_batch_means(&refs, batches)?;
            Ok(EstimateRecord {
                observable: name.clone(),
                value: s.mean,
                stderr: s.stderr,
                n: s.n,
                tau_int: s.tau_int,
                config_hash: config_hash.to_string(),
            })
        })
        .collect()
}

/// Probability of a single-column event under the config's chains.
pub fn estimate_event_probability(config: &ExperimentConfig, event: &ObservableSpec) -> Result<EstimateRecord> {
    if event.columns().len() != 1 {
        return Err(Error::Config(format!("{} expands to several columns", event.id())));
    }
    let mut cfg = config.clone();
    cfg.observables = vec![event.clone()];
    let out = run_campaign(&cfg, Exec::default())?;
    out.records(cfg.batches)?
        .pop()
        .ok_or_else(|| Error::InsufficientData("no retained samples".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(id: u64, xs: &[f64]) -> ChainMeasurements {
        ChainMeasurements { chain: id, sweeps: (0..xs.len() as u64).collect(), rows: xs.iter().map(|&x| vec![x]).collect() }
    }

    #[test]
    fn merge_is_order_independent() {
        let a = chain(0, &(0..64).map(|i| (i % 3) as f64 * 0.1).collect::<Vec<_>>());
        let b = chain(1, &(0..80).map(|i| (i % 7) as f64 * 0.3).collect::<Vec<_>>());
        let c = chain(2, &(0..40).map(|i| (i % 2) as f64).collect::<Vec<_>>());
        let cols = vec!["x".to_string()];
        let r1 = records_from_chains(&cols, &[a.clone(), b.clone(), c.clone()], 20, "h").unwrap();
        let r2 = records_from_chains(&cols, &[c, a, b], 20, "h").unwrap();
        assert_eq!(r1, r2);
        assert_eq!(r1[0].n, 184);
    }

    #[test]
    fn certain_event() {
        let cfg = ExperimentConfig::from_json(
            r#"{"domain": {"shape_tag": "box", "mesh": 1.0, "corners": [[0, 0], [3, 3]]},
                "observables": [], "sweeps": 40}"#,
        )
        .unwrap();
        let ev = ObservableSpec::Link {
            id: "same".into(),
            placements: vec![vec![[1, 1], [1, 1]]],
            pattern: crate::patterns::LinkPattern::full(2),
        };
        let r = estimate_event_probability(&cfg, &ev).unwrap();
        assert_eq!((r.value, r.stderr, r.n), (1.0, 0.0, 40));
    }
}
