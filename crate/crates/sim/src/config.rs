//! Scenario configuration: TOML in, validated structs out.
//!
//! Every section has defaults, so an empty document is a complete scenario.
//! Unknown keys are rejected and every error names the offending key path.

use hcsnet_core::channel::ChannelModel;
use hcsnet_core::clustering::{ApParams, ApbcConfig, ClusteringScheme};
use hcsnet_core::handover::{CostTable, HandoverPolicy, HandoverScheme, RlfParams};
use hcsnet_core::mobility::MobilityConfig;
use hcsnet_core::topology::LayoutConfig;
use serde::{Deserialize, Serialize};

use crate::error::{SimError, SimResult};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub layout: LayoutConfig,
    pub channel: ChannelModel<f64>,
    pub clustering: ClusteringConfig,
    pub mobility: MobilityConfig,
    pub handover: HandoverConfig,
    pub sim: SimConfig,
}

/// Which clustering schemes a run evaluates. `all` runs every scheme; a
/// single scheme is always compared against the non-CoMP baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeSelection {
    None,
    Static,
    Sim,
    Apbc,
    #[default]
    All,
}

impl SchemeSelection {
    pub fn schemes(&self) -> Vec<ClusteringScheme> {
        let one = |s| vec![ClusteringScheme::None, s];
        match self {
            SchemeSelection::None => vec![ClusteringScheme::None],
            SchemeSelection::Static => one(ClusteringScheme::Static),
            SchemeSelection::Sim => one(ClusteringScheme::Sim),
            SchemeSelection::Apbc => one(ClusteringScheme::Apbc),
            SchemeSelection::All => ClusteringScheme::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusteringConfig {
    pub scheme: SchemeSelection,
    /// AP preference; the median off-diagonal similarity when absent.
    pub preference: Option<f64>,
    pub damping: f64,
    pub max_iter: usize,
    pub stable_window: usize,
    pub rsrp_threshold_db: f64,
    pub max_measurement_size: usize,
    pub probe_neighbors: usize,
    pub shadow_realizations: usize,
    /// UEs whose non-CoMP SINR is strictly below this join CoMP.
    pub trigger_threshold_db: f64,
    pub static_size: usize,
    pub sim_size: usize,
    /// Share of UEs, by lowest non-CoMP SINR, counted as edge UEs.
    pub edge_fraction: f64,
    pub timing_repetitions: usize,
    /// RRH counts at which clustering run time is measured.
    pub timing_sizes: Vec<usize>,
}

impl Default for ClusteringConfig {
    fn default() -> Self {
        let apbc = ApbcConfig::default();
        Self {
            scheme: SchemeSelection::All,
            preference: None,
            damping: apbc.ap.damping,
            max_iter: apbc.ap.max_iter,
            stable_window: apbc.ap.stable_window,
            rsrp_threshold_db: apbc.rsrp_threshold_db,
            max_measurement_size: apbc.max_measurement_size,
            probe_neighbors: apbc.probe_neighbors,
            shadow_realizations: apbc.shadow_realizations,
            trigger_threshold_db: 0.0,
            static_size: 3,
            sim_size: 3,
            edge_fraction: 0.2,
            timing_repetitions: 5,
            timing_sizes: vec![8, 16, 32, 64],
        }
    }
}

impl ClusteringConfig {
    pub fn apbc(&self) -> ApbcConfig {
        ApbcConfig {
            rsrp_threshold_db: self.rsrp_threshold_db,
            max_measurement_size: self.max_measurement_size,
            probe_neighbors: self.probe_neighbors,
            shadow_realizations: self.shadow_realizations,
            preference: self.preference,
            ap: ApParams {
                damping: self.damping,
                max_iter: self.max_iter,
                stable_window: self.stable_window,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HandoverSelection {
    Traditional,
    Optimized,
    #[default]
    Both,
}

impl HandoverSelection {
    pub fn schemes(&self) -> Vec<HandoverScheme> {
        match self {
            HandoverSelection::Traditional => vec![HandoverScheme::Traditional],
            HandoverSelection::Optimized => vec![HandoverScheme::Optimized],
            HandoverSelection::Both => vec![HandoverScheme::Traditional, HandoverScheme::Optimized],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HandoverConfig {
    pub scheme: HandoverSelection,
    pub hysteresis_db: f64,
    pub ttt_s: f64,
    pub t_crit_s: f64,
    pub costs: CostTable,
    /// Whether a suppressed handover still pays for its report and decision.
    pub count_suppressed_reports: bool,
    pub rlf: RlfParams,
    /// Decorrelation distance of the shadowing seen by a moving UE.
    pub shadow_decorrelation_m: f64,
}

impl Default for HandoverConfig {
    fn default() -> Self {
        Self {
            scheme: HandoverSelection::Both,
            hysteresis_db: 3.0,
            ttt_s: 0.16,
            t_crit_s: 1.0,
            costs: CostTable::default(),
            count_suppressed_reports: true,
            rlf: RlfParams::default(),
            shadow_decorrelation_m: 50.0,
        }
    }
}

impl HandoverConfig {
    pub fn policy(&self, scheme: HandoverScheme) -> HandoverPolicy {
        HandoverPolicy {
            scheme,
            hysteresis_db: self.hysteresis_db,
            ttt_s: self.ttt_s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub duration_s: f64,
    pub step_s: f64,
    pub ue_count: usize,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            duration_s: 300.0,
            step_s: 0.1,
            ue_count: 500,
            seed: 1,
        }
    }
}

fn invalid(key: &str, message: impl Into<String>) -> SimError {
    SimError::Config {
        key: key.to_string(),
        message: message.into(),
    }
}

fn finite_non_negative(key: &str, v: f64) -> SimResult<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(key, format!("must be a finite non-negative number, got {v}")))
    }
}

fn positive(key: &str, v: f64) -> SimResult<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(key, format!("must be a finite positive number, got {v}")))
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> SimResult<()> {
        self.layout
            .validate()
            .map_err(|e| invalid("layout", e.to_string()))?;
        self.channel
            .validate()
            .map_err(|e| invalid("channel", e.to_string()))?;

        let c = &self.clustering;
        if let Some(p) = c.preference {
            if !p.is_finite() {
                return Err(invalid("clustering.preference", "must be finite"));
            }
        }
        if !(0.0..1.0).contains(&c.damping) {
            return Err(invalid("clustering.damping", format!("must lie in [0, 1), got {}", c.damping)));
        }
        for (key, v) in [
            ("clustering.max_iter", c.max_iter),
            ("clustering.stable_window", c.stable_window),
            ("clustering.max_measurement_size", c.max_measurement_size),
            ("clustering.static_size", c.static_size),
            ("clustering.sim_size", c.sim_size),
            ("clustering.timing_repetitions", c.timing_repetitions),
        ] {
            if v == 0 {
                return Err(invalid(key, "must be at least 1"));
            }
        }
        if let Some(&n) = c.timing_sizes.iter().find(|&&n| n < 2) {
            return Err(invalid("clustering.timing_sizes", format!("sizes must be at least 2, got {n}")));
        }
        finite_non_negative("clustering.rsrp_threshold_db", c.rsrp_threshold_db)?;
        if !c.trigger_threshold_db.is_finite() {
            return Err(invalid("clustering.trigger_threshold_db", "must be finite"));
        }
        if !(c.edge_fraction > 0.0 && c.edge_fraction <= 1.0) {
            return Err(invalid(
                "clustering.edge_fraction",
                format!("must lie in (0, 1], got {}", c.edge_fraction),
            ));
        }

        self.mobility
            .validate()
            .map_err(|(key, msg)| invalid(&format!("mobility.{key}"), msg))?;

        let h = &self.handover;
        finite_non_negative("handover.hysteresis_db", h.hysteresis_db)?;
        finite_non_negative("handover.ttt_s", h.ttt_s)?;
        positive("handover.t_crit_s", h.t_crit_s)?;
        positive("handover.shadow_decorrelation_m", h.shadow_decorrelation_m)?;
        h.costs
            .validate()
            .map_err(|m| invalid("handover.costs", m))?;
        if !(h.rlf.qout_db.is_finite() && h.rlf.qin_db.is_finite()) {
            return Err(invalid("handover.rlf", "thresholds must be finite"));
        }
        if h.rlf.qin_db < h.rlf.qout_db {
            return Err(invalid("handover.rlf.qin_db", "must not lie below qout_db"));
        }
        positive("handover.rlf.t_rlf_s", h.rlf.t_rlf_s)?;
        finite_non_negative("handover.rlf.t_reconnect_s", h.rlf.t_reconnect_s)?;

        let s = &self.sim;
        finite_non_negative("sim.duration_s", s.duration_s)?;
        positive("sim.step_s", s.step_s)?;
        if s.ue_count == 0 {
            return Err(invalid("sim.ue_count", "must be at least 1"));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> SimResult<String> {
        toml::to_string(self).map_err(|e| invalid("", e.to_string()))
    }
}

/// Parses and validates a TOML scenario. Missing keys take their defaults.
pub fn parse_config(text: &str) -> SimResult<ScenarioConfig> {
    let de = toml::Deserializer::new(text);
    let cfg: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let key = e.path().to_string();
        invalid(if key == "." { "" } else { &key }, e.into_inner().message().trim().to_string())
    })?;
    cfg.validate()?;
    Ok(cfg)
}
