//! Parameter sweeps: one scenario run per (value, replication), aggregated
//! into mean and standard deviation per sweep point.

use hcsnet_core::metrics::{mean_std, quantile};
use serde_json::Value;

use crate::config::ScenarioConfig;
use crate::error::{SimError, SimResult};
use crate::scenario::{run_scenario, ScenarioOutput};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Dotted key into the scenario, e.g. `mobility.mean_session_s`.
    pub param: String,
    /// Values as written on the command line; parsed as JSON where possible,
    /// otherwise taken as strings.
    pub values: Vec<String>,
    pub replications: usize,
}

/// One aggregated metric at one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: String,
    pub scheme: String,
    pub metric: String,
    pub mean: f64,
    pub std: f64,
    pub reps: usize,
}

fn parse_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

/// Returns a copy of `cfg` with the dotted `key` replaced by `raw`.
pub fn apply_override(cfg: &ScenarioConfig, key: &str, raw: &str) -> SimResult<ScenarioConfig> {
    let bad = |message: String| SimError::Config {
        key: key.to_string(),
        message,
    };
    let mut tree = serde_json::to_value(cfg).map_err(|e| bad(e.to_string()))?;
    let mut node = &mut tree;
    for part in key.split('.') {
        node = node
            .as_object_mut()
            .and_then(|m| m.get_mut(part))
            .ok_or_else(|| bad("no such parameter".to_string()))?;
    }
    if node.is_object() {
        return Err(bad("names a section, not a parameter".to_string()));
    }
    *node = parse_value(raw);
    let out: ScenarioConfig = serde_path_to_error::deserialize(tree).map_err(|e| SimError::Config {
        key: e.path().to_string(),
        message: e.into_inner().to_string(),
    })?;
    out.validate()?;
    Ok(out)
}

/// FNV-1a over the base seed and the replication index. Every sweep point
/// reuses the same seeds (common random numbers), so differences between
/// points reflect the parameter rather than sampling noise.
pub fn derived_seed(base: u64, rep: usize) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let bytes = base.to_le_bytes().into_iter().chain((rep as u64).to_le_bytes());
    for b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Scalar metrics of one run as `(scheme, metric, value)`.
pub fn run_metrics(out: &ScenarioOutput) -> SimResult<Vec<(String, String, f64)>> {
    let mut m = Vec::new();
    for run in &out.handover {
        let s = run.scheme.name().to_string();
        m.push((s.clone(), "overhead".into(), run.overhead()));
        m.push((s.clone(), "overhead_to_srrh".into(), run.overhead_to_srrh()));
        m.push((s.clone(), "overhead_per_session".into(), run.overhead_per_session()));
        m.push((s.clone(), "handovers".into(), run.handovers.len() as f64));
        m.push((s.clone(), "suppressed".into(), run.suppressed.len() as f64));
        m.push((s, "rlf".into(), run.rlfs.len() as f64));
    }
    for samples in &out.comp.samples {
        if !samples.spectral_efficiency.is_empty() {
            let med = quantile(&samples.spectral_efficiency, 0.5)?;
            m.push((samples.scheme.name().to_string(), "edge_se_median".into(), med));
        }
    }
    Ok(m)
}

pub fn run_sweep(cfg: &ScenarioConfig, spec: &SweepSpec) -> SimResult<Vec<SweepRow>> {
    if spec.replications == 0 {
        return Err(SimError::Config {
            key: "reps".into(),
            message: "must be at least 1".into(),
        });
    }
    if spec.values.is_empty() {
        return Err(SimError::Config {
            key: "values".into(),
            message: "need at least one value".into(),
        });
    }
    let mut rows = Vec::new();
    for value in &spec.values {
        let point = apply_override(cfg, &spec.param, value)?;
        let mut collected: Vec<(String, String, Vec<f64>)> = Vec::new();
        for rep in 0..spec.replications {
            let mut run_cfg = point.clone();
            run_cfg.sim.seed = derived_seed(cfg.sim.seed, rep);
            for (scheme, metric, v) in run_metrics(&run_scenario(&run_cfg)?)? {
                match collected.iter_mut().find(|c| c.0 == scheme && c.1 == metric) {
                    Some(c) => c.2.push(v),
                    None => collected.push((scheme, metric, vec![v])),
                }
            }
        }
        for (scheme, metric, values) in collected {
            let (mean, std) = mean_std(&values)?;
            rows.push(SweepRow {
                value: value.clone(),
                scheme,
                metric,
                mean,
                std,
                reps: values.len(),
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_resolve_dotted_keys() {
        let cfg = ScenarioConfig::default();
        let out = apply_override(&cfg, "mobility.mean_session_s", "45").unwrap();
        assert_eq!(out.mobility.mean_session_s, 45.0);
        let out = apply_override(&cfg, "handover.scheme", "optimized").unwrap();
        assert_eq!(out.handover.scheme, crate::config::HandoverSelection::Optimized);
        let out = apply_override(&cfg, "handover.count_suppressed_reports", "false").unwrap();
        assert!(!out.handover.count_suppressed_reports);
    }

    #[test]
    fn bad_overrides_name_the_key() {
        let cfg = ScenarioConfig::default();
        for (key, value) in [
            ("mobility.speed", "3"),
            ("mobility", "3"),
            ("mobility.alpha", "2.0"),
            ("sim.ue_count", "\"lots\""),
        ] {
            let err = apply_override(&cfg, key, value).unwrap_err().to_string();
            assert!(err.contains(key), "{err}");
        }
    }

    #[test]
    fn seeds_differ_per_rep_and_base() {
        let a = derived_seed(1, 0);
        assert_eq!(a, derived_seed(1, 0));
        assert_ne!(a, derived_seed(1, 1));
        assert_ne!(a, derived_seed(2, 0));
    }
}
