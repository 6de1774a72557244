//! Handover machinery hosted in the BBU pool: A3-style triggering, the
//! speed-aware admission policy, signaling flows with overhead accounting,
//! radio link failure detection and the undesirable-handover classifier.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mobility::{ServiceType, SpeedClass, UeState};
use crate::topology::{NetworkLayout, Rrh, RrhId, RrhKind};

// Absorbs float drift in accumulated sample times when testing window ends.
const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HandoverScheme {
    Traditional,
    Optimized,
}

impl HandoverScheme {
    pub fn name(&self) -> &'static str {
        match self {
            HandoverScheme::Traditional => "traditional",
            HandoverScheme::Optimized => "optimized",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HandoverPolicy {
    pub scheme: HandoverScheme,
    pub hysteresis_db: f64,
    pub ttt_s: f64,
}

impl HandoverPolicy {
    pub fn new(scheme: HandoverScheme) -> Self {
        Self {
            scheme,
            hysteresis_db: 3.0,
            ttt_s: 0.16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementReport {
    pub ue: usize,
    pub t: f64,
    pub serving: RrhId,
    pub serving_rsrp: f64,
    pub best_neighbor: RrhId,
    pub neighbor_rsrp: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trigger {
    pub ue: usize,
    pub t: f64,
    pub source: RrhId,
    pub target: RrhId,
}

/// Incremental A3 evaluation: the best neighbor must beat the serving cell by
/// the hysteresis for `ttt` seconds without interruption. A change of best
/// neighbor restarts the window.
#[derive(Debug, Clone, Default)]
pub struct A3Tracker {
    window: Option<(RrhId, f64)>,
    last_t: Option<f64>,
}

impl A3Tracker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn reset(&mut self) {
        self.window = None;
    }

    pub fn push(&mut self, report: &MeasurementReport, policy: &HandoverPolicy) -> Result<Option<Trigger>> {
        if let Some(last) = self.last_t {
            if report.t < last {
                return Err(Error::Sequencing(format!(
                    "measurement report at t={} after t={last}",
                    report.t
                )));
            }
        }
        self.last_t = Some(report.t);
        if report.best_neighbor == report.serving {
            return Err(Error::Sequencing(format!(
                "best neighbor equals serving RRH {}",
                report.serving
            )));
        }
        if report.neighbor_rsrp <= report.serving_rsrp + policy.hysteresis_db {
            self.window = None;
            return Ok(None);
        }
        let start = match self.window {
            Some((target, start)) if target == report.best_neighbor => start,
            _ => report.t,
        };
        self.window = Some((report.best_neighbor, start));
        if report.t - start + TIME_EPS >= policy.ttt_s {
            self.window = None;
            return Ok(Some(Trigger {
                ue: report.ue,
                t: report.t,
                source: report.serving,
                target: report.best_neighbor,
            }));
        }
        Ok(None)
    }
}

/// First trigger in a time-ordered report stream, if any.
pub fn evaluate_a3(reports: &[MeasurementReport], policy: &HandoverPolicy) -> Result<Option<Trigger>> {
    let mut tracker = A3Tracker::new();
    for r in reports {
        if let Some(t) = tracker.push(r, policy)? {
            return Ok(Some(t));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Proceed,
    Suppress,
}

/// Speed-aware admission. Under the optimized scheme, handovers towards a
/// small cell are refused for high-speed users and for medium-speed users
/// without real-time traffic; everything else proceeds.
pub fn decide(_trigger: &Trigger, ue: &UeState, target: &Rrh, policy: &HandoverPolicy) -> Decision {
    match (policy.scheme, target.kind) {
        (HandoverScheme::Traditional, _) | (HandoverScheme::Optimized, RrhKind::Mrrh) => Decision::Proceed,
        (HandoverScheme::Optimized, RrhKind::Srrh) => match (ue.speed_class, ue.service) {
            (SpeedClass::High, _) => Decision::Suppress,
            (SpeedClass::Medium, ServiceType::NonRealTime) => Decision::Suppress,
            (SpeedClass::Medium, ServiceType::RealTime) | (SpeedClass::Low, _) => Decision::Proceed,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hop {
    Air,
    IntraPool,
    InterPoolX2,
    Core,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MessageName {
    MeasurementReport,
    HandoverDecision,
    HandoverRequest,
    AdmissionControl,
    HandoverRequestAck,
    RrcReconfiguration,
    HandoverCompletion,
    PathSwitch,
    UeContextRelease,
}

/// Unitless cost per hop class, proportional to the delay of carrying or
/// processing one message there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostTable {
    pub air: f64,
    pub intra: f64,
    pub x2: f64,
    pub core: f64,
}

impl Default for CostTable {
    fn default() -> Self {
        Self {
            air: 1.0,
            intra: 1.0,
            x2: 3.0,
            core: 5.0,
        }
    }
}

impl CostTable {
    pub fn cost(&self, hop: Hop) -> f64 {
        match hop {
            Hop::Air => self.air,
            Hop::IntraPool => self.intra,
            Hop::InterPoolX2 => self.x2,
            Hop::Core => self.core,
        }
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        for (k, v) in [("air", self.air), ("intra", self.intra), ("x2", self.x2), ("core", self.core)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(format!("costs.{k} must be a finite non-negative number"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalingMessage {
    pub name: MessageName,
    pub hop: Hop,
    pub cost: f64,
}

const INTER_POOL_FLOW: [(MessageName, Hop); 9] = [
    (MessageName::MeasurementReport, Hop::Air),
    (MessageName::HandoverDecision, Hop::IntraPool),
    (MessageName::HandoverRequest, Hop::InterPoolX2),
    (MessageName::AdmissionControl, Hop::IntraPool),
    (MessageName::HandoverRequestAck, Hop::InterPoolX2),
    (MessageName::RrcReconfiguration, Hop::Air),
    (MessageName::HandoverCompletion, Hop::Air),
    (MessageName::PathSwitch, Hop::Core),
    (MessageName::UeContextRelease, Hop::InterPoolX2),
];

/// Message sequence of one handover. Crossing pools uses X2 between the two
/// BBU pools and a core path switch; inside one pool the same exchange stays
/// internal and no path switch is needed.
pub fn signaling_flow(
    source: RrhId,
    target: RrhId,
    layout: &NetworkLayout,
    costs: &CostTable,
) -> Result<Vec<SignalingMessage>> {
    if source == target {
        return Err(Error::domain(format!("handover from RRH {source} to itself")));
    }
    let inter_pool = !layout.same_pool(source, target)?;
    Ok(INTER_POOL_FLOW
        .iter()
        .filter(|(name, _)| inter_pool || *name != MessageName::PathSwitch)
        .map(|&(name, hop)| {
            let hop = if !inter_pool && hop == Hop::InterPoolX2 {
                Hop::IntraPool
            } else {
                hop
            };
            SignalingMessage {
                name,
                hop,
                cost: costs.cost(hop),
            }
        })
        .collect())
}

/// What a refused handover still costs: the report and the pool's decision,
/// or nothing when suppressed reports are not counted.
pub fn suppressed_flow(costs: &CostTable, count_reports: bool) -> Vec<SignalingMessage> {
    if !count_reports {
        return Vec::new();
    }
    INTER_POOL_FLOW[..2]
        .iter()
        .map(|&(name, hop)| SignalingMessage {
            name,
            hop,
            cost: costs.cost(hop),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Normal,
    PingPong,
    ContinueHo,
    LateHo,
    EarlyHo,
    WrongHo,
    CallDrop,
}

impl Label {
    pub const ALL: [Label; 7] = [
        Label::Normal,
        Label::PingPong,
        Label::ContinueHo,
        Label::LateHo,
        Label::EarlyHo,
        Label::WrongHo,
        Label::CallDrop,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Label::Normal => "normal",
            Label::PingPong => "ping_pong",
            Label::ContinueHo => "continue_ho",
            Label::LateHo => "late_ho",
            Label::EarlyHo => "early_ho",
            Label::WrongHo => "wrong_ho",
            Label::CallDrop => "call_drop",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Anything that carries a list of signaling messages.
/// Sums start from +0.0 so that an empty list prints as `0`, not `-0`.
pub trait Signaled {
    fn messages(&self) -> &[SignalingMessage];

    fn overhead(&self) -> f64 {
        self.messages().iter().fold(0.0, |acc, m| acc + m.cost)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HandoverRecord {
    pub ue: usize,
    pub t_complete: f64,
    pub source: RrhId,
    pub target: RrhId,
    pub target_kind: RrhKind,
    pub inter_pool: bool,
    pub messages: Vec<SignalingMessage>,
    pub label: Label,
}

impl Signaled for HandoverRecord {
    fn messages(&self) -> &[SignalingMessage] {
        &self.messages
    }
}

/// A trigger the policy refused.
#[derive(Debug, Clone, PartialEq)]
pub struct SuppressedHandover {
    pub ue: usize,
    pub t: f64,
    pub source: RrhId,
    pub target: RrhId,
    pub target_kind: RrhKind,
    pub messages: Vec<SignalingMessage>,
}

impl Signaled for SuppressedHandover {
    fn messages(&self) -> &[SignalingMessage] {
        &self.messages
    }
}

pub fn overhead_of<R: Signaled>(records: &[R]) -> f64 {
    records.iter().fold(0.0, |acc, r| acc + r.overhead())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RlfParams {
    pub qout_db: f64,
    pub qin_db: f64,
    pub t_rlf_s: f64,
    pub t_reconnect_s: f64,
}

impl Default for RlfParams {
    fn default() -> Self {
        Self {
            qout_db: -8.0,
            qin_db: -6.0,
            t_rlf_s: 0.5,
            t_reconnect_s: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reconnect {
    pub rrh: RrhId,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RlfEvent {
    pub ue: usize,
    pub t: f64,
    pub rrh_at_failure: RrhId,
    /// `None` when the UE found no usable cell within the reconnect window.
    pub reconnect: Option<Reconnect>,
}

/// Declares a radio link failure once SINR has stayed below `qout` for
/// `t_rlf` seconds.
#[derive(Debug, Clone, Default)]
pub struct RlfMonitor {
    below_since: Option<f64>,
}

impl RlfMonitor {
    pub fn reset(&mut self) {
        self.below_since = None;
    }

    pub fn push(&mut self, t: f64, sinr_db: f64, params: &RlfParams) -> bool {
        if sinr_db >= params.qout_db {
            self.below_since = None;
            return false;
        }
        let since = *self.below_since.get_or_insert(t);
        if t - since + TIME_EPS >= params.t_rlf_s {
            self.below_since = None;
            return true;
        }
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSample {
    pub t: f64,
    pub serving: RrhId,
    pub serving_sinr_db: f64,
    /// Strongest-RSRP RRH and the SINR the UE would see if it served.
    pub strongest: RrhId,
    pub strongest_sinr_db: f64,
}

/// Scans a time-ordered SINR trace for the first radio link failure, then
/// looks for a reconnection to the strongest cell (SINR at least `qin`) within
/// `t_reconnect`.
pub fn detect_rlf(ue: usize, samples: &[LinkSample], params: &RlfParams) -> Result<Option<RlfEvent>> {
    if let Some(w) = samples.windows(2).find(|w| w[1].t < w[0].t) {
        return Err(Error::Sequencing(format!("SINR sample at t={} after t={}", w[1].t, w[0].t)));
    }
    let mut monitor = RlfMonitor::default();
    let Some(idx) = samples
        .iter()
        .position(|s| monitor.push(s.t, s.serving_sinr_db, params))
    else {
        return Ok(None);
    };
    let failed = samples[idx];
    let reconnect = samples[idx + 1..]
        .iter()
        .take_while(|s| s.t <= failed.t + params.t_reconnect_s + TIME_EPS)
        .find(|s| s.strongest_sinr_db >= params.qin_db)
        .map(|s| Reconnect {
            rrh: s.strongest,
            t: s.t,
        });
    Ok(Some(RlfEvent {
        ue,
        t: failed.t,
        rrh_at_failure: failed.serving,
        reconnect,
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub enum UeEvent {
    Handover(HandoverRecord),
    Rlf(RlfEvent),
}

impl UeEvent {
    pub fn ue(&self) -> usize {
        match self {
            UeEvent::Handover(h) => h.ue,
            UeEvent::Rlf(r) => r.ue,
        }
    }

    pub fn t(&self) -> f64 {
        match self {
            UeEvent::Handover(h) => h.t_complete,
            UeEvent::Rlf(r) => r.t,
        }
    }
}

fn check_sequence(events: &[&UeEvent]) -> Result<()> {
    let mut serving: Option<RrhId> = None;
    let mut last_t = f64::NEG_INFINITY;
    for e in events {
        if e.t() < last_t {
            return Err(Error::Sequencing(format!(
                "UE {} event at t={} precedes t={last_t}",
                e.ue(),
                e.t()
            )));
        }
        last_t = e.t();
        match e {
            UeEvent::Handover(h) => {
                if h.source == h.target || serving.is_some_and(|s| s != h.source) {
                    return Err(Error::Sequencing(format!(
                        "UE {} handover {}->{} at t={} overlaps an unfinished handover",
                        h.ue, h.source, h.target, h.t_complete
                    )));
                }
                serving = Some(h.target);
            }
            UeEvent::Rlf(r) => {
                if serving.is_some_and(|s| s != r.rrh_at_failure) {
                    return Err(Error::Sequencing(format!(
                        "UE {} fails on RRH {} at t={} while served elsewhere",
                        r.ue, r.rrh_at_failure, r.t
                    )));
                }
                if r.reconnect.is_some_and(|c| c.t < r.t) {
                    return Err(Error::Sequencing(format!("UE {} reconnects before failing", r.ue)));
                }
                serving = r.reconnect.map(|c| c.rrh);
            }
        }
    }
    Ok(())
}

fn rlf_outcome(rlf: &RlfEvent, prior: Option<&HandoverRecord>, t_crit: f64) -> Label {
    let Some(back) = rlf.reconnect else {
        return Label::CallDrop;
    };
    match prior {
        Some(h) if rlf.t - h.t_complete <= t_crit + TIME_EPS => {
            if back.rrh == h.source {
                Label::EarlyHo
            } else if back.rrh != h.target {
                Label::WrongHo
            } else {
                Label::Normal
            }
        }
        _ if back.rrh != rlf.rrh_at_failure => Label::LateHo,
        _ => Label::Normal,
    }
}

/// Labels one UE's time-ordered handovers and RLFs.
///
/// A timer starts at each handover completion and stops at the next event.
/// If that event falls within `t_crit`: a handover back to the source is a
/// ping-pong, a handover onwards is a continue handover, an RLF that
/// reconnects to the source makes the handover early and one that reconnects
/// to a third RRH makes it wrong. RLFs are labelled by the same rules, except
/// that an RLF with no recent handover whose UE reconnects elsewhere is a late
/// handover, and one with no reconnection is a call drop.
pub fn classify_handovers(events: &[UeEvent], t_crit: f64) -> Result<Vec<Label>> {
    if !(t_crit > 0.0) {
        return Err(Error::domain(format!("t_crit must be positive, got {t_crit}")));
    }
    if let Some(w) = events.windows(2).find(|w| w[0].ue() != w[1].ue()) {
        return Err(Error::Sequencing(format!(
            "events of UEs {} and {} mixed in one stream",
            w[0].ue(),
            w[1].ue()
        )));
    }
    check_sequence(&events.iter().collect::<Vec<_>>())?;

    Ok(events
        .iter()
        .enumerate()
        .map(|(idx, e)| match e {
            UeEvent::Handover(h) => {
                let next = events
                    .get(idx + 1)
                    .filter(|n| n.t() - h.t_complete <= t_crit + TIME_EPS);
                match next {
                    None => Label::Normal,
                    Some(UeEvent::Handover(n)) if n.target == h.source => Label::PingPong,
                    Some(UeEvent::Handover(_)) => Label::ContinueHo,
                    Some(UeEvent::Rlf(r)) => rlf_outcome(r, Some(h), t_crit),
                }
            }
            UeEvent::Rlf(r) => {
                let prior = idx
                    .checked_sub(1)
                    .and_then(|p| match &events[p] {
                        UeEvent::Handover(h) => Some(h),
                        UeEvent::Rlf(_) => None,
                    });
                rlf_outcome(r, prior, t_crit)
            }
        })
        .collect())
}

/// Classifies an interleaved multi-UE stream. Labels come back aligned with
/// the input; each UE's label depends only on its own events.
pub fn classify_all(events: &[UeEvent], t_crit: f64) -> Result<Vec<Label>> {
    let mut per_ue: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, e) in events.iter().enumerate() {
        per_ue.entry(e.ue()).or_default().push(i);
    }
    let mut labels = vec![Label::Normal; events.len()];
    for idx in per_ue.values() {
        let stream: Vec<UeEvent> = idx.iter().map(|&i| events[i].clone()).collect();
        for (&i, l) in idx.iter().zip(classify_handovers(&stream, t_crit)?) {
            labels[i] = l;
        }
    }
    Ok(labels)
}
