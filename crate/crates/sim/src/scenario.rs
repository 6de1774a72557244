//! One simulation run: a CoMP snapshot of dropped UEs, clustering run times,
//! and a mobility loop driving the handover machinery of every configured
//! scheme over the same trajectories.

use std::time::Instant;

use hcsnet_core::channel::{sinr_joint, LinkBudget};
use hcsnet_core::clustering::{
    ap_cluster, apbc_clusters, build_similarity, measurement_cluster, pair_gains,
    sim_interference_cluster, static_cluster, ClusterAssignment, ClusteringScheme, PairGains,
    Preference,
};
use hcsnet_core::handover::{
    classify_handovers, decide, overhead_of, signaling_flow, suppressed_flow, A3Tracker, Decision,
    HandoverPolicy, HandoverRecord, HandoverScheme, Label, MeasurementReport, Reconnect, RlfEvent,
    RlfMonitor, Signaled, SuppressedHandover, Trigger, UeEvent,
};
use hcsnet_core::metrics::{edge_mask, spectral_efficiency};
use hcsnet_core::mobility::{advance, next_phase, sample_population, SessionChange, UeState};
use hcsnet_core::rng::{keyed_rng, stream};
use hcsnet_core::scalar::{db_to_linear, linear_to_db};
use hcsnet_core::topology::{generate_layout, LayoutConfig, NetworkLayout, Point, RrhId, RrhKind};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::config::ScenarioConfig;
use crate::error::{SimError, SimResult};

/// Spectral efficiency of the edge UEs under one clustering scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSamples {
    pub scheme: ClusteringScheme,
    pub spectral_efficiency: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompSnapshot {
    pub ue_count: usize,
    pub edge_count: usize,
    /// Edge UEs whose SINR fell below the CoMP trigger.
    pub comp_users: usize,
    pub samples: Vec<EdgeSamples>,
}

impl CompSnapshot {
    pub fn samples_of(&self, scheme: ClusteringScheme) -> Option<&[f64]> {
        self.samples
            .iter()
            .find(|s| s.scheme == scheme)
            .map(|s| s.spectral_efficiency.as_slice())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingRow {
    pub scheme: ClusteringScheme,
    pub n_rrhs: usize,
    pub wall_time_s: f64,
    pub iterations: usize,
}

/// Everything one handover scheme produced over the mobility run.
#[derive(Debug, Clone, PartialEq)]
pub struct HandoverRun {
    pub scheme: HandoverScheme,
    /// Executed handovers, labelled, ordered by time then UE.
    pub handovers: Vec<HandoverRecord>,
    pub suppressed: Vec<SuppressedHandover>,
    pub rlfs: Vec<(RlfEvent, Label)>,
    pub sessions: usize,
}

impl HandoverRun {
    pub fn overhead(&self) -> f64 {
        overhead_of(&self.handovers) + overhead_of(&self.suppressed)
    }

    /// Overhead of handovers aimed at small cells, suppressed ones included.
    pub fn overhead_to_srrh(&self) -> f64 {
        let executed: f64 = self
            .handovers
            .iter()
            .filter(|h| h.target_kind == RrhKind::Srrh)
            .fold(0.0, |acc, r| acc + r.overhead());
        let refused: f64 = self
            .suppressed
            .iter()
            .filter(|s| s.target_kind == RrhKind::Srrh)
            .fold(0.0, |acc, r| acc + r.overhead());
        executed + refused
    }

    pub fn overhead_per_session(&self) -> f64 {
        if self.sessions == 0 {
            0.0
        } else {
            self.overhead() / self.sessions as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOutput {
    pub layout: NetworkLayout,
    pub comp: CompSnapshot,
    pub timings: Vec<TimingRow>,
    pub handover: Vec<HandoverRun>,
}

impl ScenarioOutput {
    pub fn run_of(&self, scheme: HandoverScheme) -> Option<&HandoverRun> {
        self.handover.iter().find(|r| r.scheme == scheme)
    }
}

pub fn run_scenario(cfg: &ScenarioConfig) -> SimResult<ScenarioOutput> {
    cfg.validate()?;
    let seed = cfg.sim.seed;
    let layout = generate_layout(&cfg.layout, seed)?;
    let comp = comp_snapshot(cfg, &layout, seed)?;
    let timings = clustering_timings(cfg, seed)?;
    let handover = simulate_handovers(cfg, &layout, seed)?;
    Ok(ScenarioOutput {
        layout,
        comp,
        timings,
        handover,
    })
}

/// Coordinated cluster used for a UE served by each RRH, indexed by RRH id.
fn cluster_table(
    cfg: &ScenarioConfig,
    layout: &NetworkLayout,
    scheme: ClusteringScheme,
    seed: u64,
) -> SimResult<Vec<Vec<RrhId>>> {
    let from_groups = |groups: Vec<ClusterAssignment>| {
        let mut table = vec![Vec::new(); layout.len()];
        for g in groups {
            for &m in &g.members {
                table[m] = g.members.clone();
            }
        }
        table
    };
    Ok(match scheme {
        ClusteringScheme::None => (0..layout.len()).map(|id| vec![id]).collect(),
        ClusteringScheme::Static => from_groups(static_cluster(layout, cfg.clustering.static_size)?),
        ClusteringScheme::Sim => from_groups(sim_interference_cluster(
            layout,
            &cfg.channel,
            cfg.clustering.sim_size,
        )?),
        ClusteringScheme::Apbc => apbc_clusters(layout, &cfg.channel, &cfg.clustering.apbc(), seed)?
            .into_iter()
            .map(|out| {
                let anchor = out.measurement.anchor;
                out.assignment
                    .cluster_of(anchor)
                    .map_or_else(|| vec![anchor], <[RrhId]>::to_vec)
            })
            .collect(),
    })
}

/// Drops `sim.ue_count` UEs uniformly, serves each from its strongest RRH and
/// evaluates the edge UEs under every selected clustering scheme. UEs below
/// the CoMP trigger are served jointly by the cluster of their serving RRH.
pub fn comp_snapshot(cfg: &ScenarioConfig, layout: &NetworkLayout, seed: u64) -> SimResult<CompSnapshot> {
    let model = &cfg.channel;
    let region = layout.region;
    let mut rng = keyed_rng(seed, &[stream::UE_DROP]);
    let budgets: Vec<LinkBudget<f64>> = (0..cfg.sim.ue_count)
        .map(|ue| {
            let p = Point::new(
                rng.gen_range(0.0..=region.width_m),
                rng.gen_range(0.0..=region.height_m),
            );
            model.link_budget(layout, ue, p, seed)
        })
        .collect::<hcsnet_core::Result<_>>()?;
    let sinr: Vec<f64> = budgets
        .iter()
        .map(|b| b.sinr_noncomp(model.noise_dbm))
        .collect::<hcsnet_core::Result<_>>()?;
    let edge = edge_mask(&sinr, cfg.clustering.edge_fraction)?;
    let triggered: Vec<bool> = sinr
        .iter()
        .map(|&s| linear_to_db(s) < cfg.clustering.trigger_threshold_db)
        .collect();

    let mut samples = Vec::new();
    for scheme in cfg.clustering.scheme.schemes() {
        let table = cluster_table(cfg, layout, scheme, seed)?;
        let mut se = Vec::new();
        for (ue, b) in budgets.iter().enumerate() {
            if !edge[ue] {
                continue;
            }
            let s = if triggered[ue] {
                sinr_joint(&b.rsrp_dbm, &table[b.serving], model.noise_dbm)?
            } else {
                sinr[ue]
            };
            se.push(spectral_efficiency(s)?);
        }
        samples.push(EdgeSamples {
            scheme,
            spectral_efficiency: se,
        });
    }
    Ok(CompSnapshot {
        ue_count: budgets.len(),
        edge_count: edge.iter().filter(|&&e| e).count(),
        comp_users: edge.iter().zip(&triggered).filter(|(&e, &t)| e && t).count(),
        samples,
    })
}

/// A layout of `n` sites, one macro and `n - 1` small cells, at a density
/// that keeps their measurement sets overlapping.
fn timing_layout(cfg: &ScenarioConfig, n: usize, seed: u64) -> SimResult<NetworkLayout> {
    let side = 250.0 * (n as f64).sqrt().ceil().max(2.0);
    let lc = LayoutConfig {
        width_m: side,
        height_m: side,
        mrrh_count: 1,
        srrh_count: n.saturating_sub(1),
        pools_x: 1,
        pools_y: 1,
        ..cfg.layout.clone()
    };
    Ok(generate_layout(&lc, seed)?)
}

fn median_time(reps: usize, mut f: impl FnMut() -> SimResult<usize>) -> SimResult<(f64, usize)> {
    let mut times = Vec::with_capacity(reps);
    let mut iterations = 0;
    for _ in 0..reps {
        let start = Instant::now();
        iterations = f()?;
        times.push(start.elapsed().as_secs_f64());
    }
    times.sort_by(f64::total_cmp);
    Ok((times[times.len() / 2], iterations))
}

/// Wall time of the clustering call alone (channel work excluded), median of
/// the configured repetitions, for each size in `clustering.timing_sizes`.
/// APBC is timed on one measurement set spanning all `n` sites.
pub fn clustering_timings(cfg: &ScenarioConfig, seed: u64) -> SimResult<Vec<TimingRow>> {
    let reps = cfg.clustering.timing_repetitions;
    let mut rows = Vec::new();
    for &n in &cfg.clustering.timing_sizes {
        let layout = timing_layout(cfg, n, seed)?;
        for scheme in cfg.clustering.scheme.schemes() {
            let (wall_time_s, iterations) = match scheme {
                ClusteringScheme::None => continue,
                ClusteringScheme::Static => median_time(reps, || {
                    static_cluster(&layout, cfg.clustering.static_size)?;
                    Ok(1)
                })?,
                ClusteringScheme::Sim => median_time(reps, || {
                    sim_interference_cluster(&layout, &cfg.channel, cfg.clustering.sim_size)?;
                    Ok(1)
                })?,
                ClusteringScheme::Apbc => {
                    let apbc = cfg.clustering.apbc();
                    let mc = measurement_cluster(&layout, &cfg.channel, 0, f64::MAX, n, n - 1)?;
                    let mut gains = PairGains::new();
                    pair_gains(&cfg.channel, &layout, &mc.members, seed, apbc.shadow_realizations, &mut gains)?;
                    let preference = apbc.preference.map_or(Preference::Median, Preference::Value);
                    let s = build_similarity(&mc, &gains, preference)?;
                    median_time(reps, || Ok(ap_cluster(&s, &apbc.ap)?.iterations_used))?
                }
            };
            rows.push(TimingRow {
                scheme,
                n_rrhs: n,
                wall_time_s,
                iterations,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy)]
struct Outage {
    t: f64,
    rrh: RrhId,
}

/// Connection state of one UE under one handover scheme.
#[derive(Debug, Default)]
struct Link {
    serving: Option<RrhId>,
    a3: A3Tracker,
    /// Target of a refused trigger, ignored until its A3 condition breaks.
    latched: Option<RrhId>,
    rlf: RlfMonitor,
    outage: Option<Outage>,
    /// The call dropped; the UE stays silent until its next session.
    dropped: bool,
    /// Events since the UE last (re)entered a session.
    segment: Vec<UeEvent>,
}

impl Link {
    fn connect(&mut self, rrh: RrhId) {
        self.serving = Some(rrh);
        self.a3.reset();
        self.rlf.reset();
        self.latched = None;
    }
}

struct SchemeState<'a> {
    policy: HandoverPolicy,
    links: Vec<Link>,
    run: HandoverRun,
    layout: &'a NetworkLayout,
    cfg: &'a ScenarioConfig,
}

/// Received powers at one UE position.
struct Powers {
    rsrp_dbm: Vec<f64>,
    mw: Vec<f64>,
    total_mw: f64,
    noise_mw: f64,
}

impl Powers {
    fn sinr_db(&self, rrh: RrhId) -> f64 {
        let s = self.mw[rrh];
        linear_to_db(s / (self.total_mw - s + self.noise_mw))
    }
}

impl<'a> SchemeState<'a> {
    fn admissible(&self, ue: &UeState, rrh: RrhId) -> bool {
        let trigger = Trigger {
            ue: ue.id,
            t: 0.0,
            source: rrh,
            target: rrh,
        };
        decide(&trigger, ue, &self.layout.rrhs[rrh], &self.policy) == Decision::Proceed
    }

    /// Strongest RRH the pool would admit this UE to, ties to the lower id.
    fn best_admissible(&self, ue: &UeState, p: &Powers) -> Option<RrhId> {
        let mut best: Option<RrhId> = None;
        for k in 0..p.rsrp_dbm.len() {
            if self.admissible(ue, k) && best.is_none_or(|b| p.rsrp_dbm[k] > p.rsrp_dbm[b]) {
                best = Some(k);
            }
        }
        best
    }

    fn flush(&mut self, ue: usize) -> SimResult<()> {
        let events = std::mem::take(&mut self.links[ue].segment);
        if events.is_empty() {
            return Ok(());
        }
        let t_last = events.last().map_or(0.0, UeEvent::t);
        let labels = classify_handovers(&events, self.cfg.handover.t_crit_s).map_err(SimError::at(t_last))?;
        for (event, label) in events.into_iter().zip(labels) {
            match event {
                UeEvent::Handover(mut h) => {
                    h.label = label;
                    self.run.handovers.push(h);
                }
                UeEvent::Rlf(r) => self.run.rlfs.push((r, label)),
            }
        }
        Ok(())
    }

    /// Closes a pending outage without a reconnection.
    fn drop_call(&mut self, ue: usize) {
        let link = &mut self.links[ue];
        if let Some(o) = link.outage.take() {
            link.segment.push(UeEvent::Rlf(RlfEvent {
                ue,
                t: o.t,
                rrh_at_failure: o.rrh,
                reconnect: None,
            }));
        }
        link.serving = None;
    }

    fn end_session(&mut self, ue: usize) -> SimResult<()> {
        self.drop_call(ue);
        self.links[ue].dropped = false;
        self.flush(ue)
    }

    fn attach(&mut self, ue: &UeState, p: &Powers) {
        if let Some(best) = self.best_admissible(ue, p) {
            self.links[ue.id].connect(best);
        }
    }

    fn step(&mut self, t: f64, ue: &UeState, p: &Powers) -> SimResult<()> {
        let id = ue.id;
        let h = &self.cfg.handover;
        if self.links[id].dropped {
            return Ok(());
        }
        if let Some(o) = self.links[id].outage {
            let candidate = self.best_admissible(ue, p);
            match candidate {
                Some(c) if p.sinr_db(c) >= h.rlf.qin_db => {
                    let link = &mut self.links[id];
                    link.segment.push(UeEvent::Rlf(RlfEvent {
                        ue: id,
                        t: o.t,
                        rrh_at_failure: o.rrh,
                        reconnect: Some(Reconnect { rrh: c, t }),
                    }));
                    link.outage = None;
                    link.connect(c);
                }
                _ if t - o.t > h.rlf.t_reconnect_s + 1e-9 => {
                    self.drop_call(id);
                    self.links[id].dropped = true;
                    self.flush(id)?;
                }
                _ => {}
            }
            return Ok(());
        }
        let Some(serving) = self.links[id].serving else {
            self.attach(ue, p);
            return Ok(());
        };

        if self.links[id].rlf.push(t, p.sinr_db(serving), &h.rlf) {
            let link = &mut self.links[id];
            link.outage = Some(Outage { t, rrh: serving });
            link.serving = None;
            link.a3.reset();
            link.latched = None;
            return Ok(());
        }

        let mut best: Option<RrhId> = None;
        for k in (0..p.rsrp_dbm.len()).filter(|&k| k != serving) {
            if best.is_none_or(|b| p.rsrp_dbm[k] > p.rsrp_dbm[b]) {
                best = Some(k);
            }
        }
        let Some(neighbor) = best else {
            return Ok(());
        };
        let report = MeasurementReport {
            ue: id,
            t,
            serving,
            serving_rsrp: p.rsrp_dbm[serving],
            best_neighbor: neighbor,
            neighbor_rsrp: p.rsrp_dbm[neighbor],
        };
        let policy = self.policy;
        let link = &mut self.links[id];
        if let Some(l) = link.latched {
            if l != neighbor || report.neighbor_rsrp <= report.serving_rsrp + policy.hysteresis_db {
                link.latched = None;
            }
        }
        let Some(trigger) = link.a3.push(&report, &policy).map_err(SimError::at(t))? else {
            return Ok(());
        };
        if link.latched == Some(trigger.target) {
            return Ok(());
        }
        let target = &self.layout.rrhs[trigger.target];
        match decide(&trigger, ue, target, &policy) {
            Decision::Proceed => {
                let messages =
                    signaling_flow(serving, trigger.target, self.layout, &h.costs).map_err(SimError::at(t))?;
                let record = HandoverRecord {
                    ue: id,
                    t_complete: t,
                    source: serving,
                    target: trigger.target,
                    target_kind: target.kind,
                    inter_pool: !self.layout.same_pool(serving, trigger.target)?,
                    messages,
                    label: Label::Normal,
                };
                let link = &mut self.links[id];
                link.segment.push(UeEvent::Handover(record));
                link.connect(trigger.target);
            }
            Decision::Suppress => {
                self.run.suppressed.push(SuppressedHandover {
                    ue: id,
                    t,
                    source: serving,
                    target: trigger.target,
                    target_kind: target.kind,
                    messages: suppressed_flow(&h.costs, h.count_suppressed_reports),
                });
                self.links[id].latched = Some(trigger.target);
            }
        }
        Ok(())
    }
}

fn powers(cfg: &ScenarioConfig, layout: &NetworkLayout, ue: &UeState, shadow: &[f64]) -> SimResult<Powers> {
    let rsrp_dbm = cfg.channel.rsrp_vector(layout, ue.position, Some(shadow))?;
    let mw: Vec<f64> = rsrp_dbm.iter().map(|&r| db_to_linear(r)).collect();
    Ok(Powers {
        total_mw: mw.iter().sum(),
        rsrp_dbm,
        mw,
        noise_mw: cfg.channel.noise_mw(),
    })
}

/// Moves the population for `sim.duration_s` and runs every selected
/// handover scheme on the same trajectories and shadowing.
///
/// Shadowing seen by a moving UE follows a first-order autoregressive process
/// whose correlation decays with the distance travelled. Sessions alternate
/// with idle gaps; only UEs in a session measure, hand over or fail.
pub fn simulate_handovers(
    cfg: &ScenarioConfig,
    layout: &NetworkLayout,
    seed: u64,
) -> SimResult<Vec<HandoverRun>> {
    let region = layout.region;
    let mut ues = sample_population(&cfg.mobility, cfg.sim.ue_count, seed, &region)?;
    let mut rngs: Vec<_> = (0..ues.len())
        .map(|u| keyed_rng(seed, &[stream::UE_MOTION, u as u64]))
        .collect();
    let sigma: Vec<f64> = layout
        .rrhs
        .iter()
        .map(|r| cfg.channel.shadowing_sigma(r.kind))
        .collect();
    let mut shadow: Vec<Vec<f64>> = (0..ues.len())
        .map(|u| {
            layout
                .rrhs
                .iter()
                .map(|r| cfg.channel.shadow(seed, stream::MOBILITY_SHADOW, r, u as u64))
                .collect()
        })
        .collect();

    let mut schemes: Vec<SchemeState> = cfg
        .handover
        .scheme
        .schemes()
        .into_iter()
        .map(|scheme| SchemeState {
            policy: cfg.handover.policy(scheme),
            links: (0..ues.len()).map(|_| Link::default()).collect(),
            run: HandoverRun {
                scheme,
                handovers: Vec::new(),
                suppressed: Vec::new(),
                rlfs: Vec::new(),
                sessions: ues.len(),
            },
            layout,
            cfg,
        })
        .collect();

    for ue in &ues {
        let p = powers(cfg, layout, ue, &shadow[ue.id])?;
        for s in &mut schemes {
            s.attach(ue, &p);
        }
    }

    let dt = cfg.sim.step_s;
    let steps = (cfg.sim.duration_s / dt).round() as usize;
    for step in 1..=steps {
        let t = step as f64 * dt;
        for u in 0..ues.len() {
            let rng = &mut rngs[u];
            let moved = advance(&ues[u], dt, &region, rng).map_err(SimError::at(t))?;
            let travelled = moved.position.distance(&ues[u].position);
            ues[u] = moved;
            let rho = (-travelled / cfg.handover.shadow_decorrelation_m).exp();
            let innovation = (1.0 - rho * rho).sqrt();
            for (x, &sd) in shadow[u].iter_mut().zip(&sigma) {
                let z: f64 = rng.sample(StandardNormal);
                *x = rho * *x + innovation * sd * z;
            }
            let change = next_phase(&mut ues[u], &cfg.mobility, rng);

            if change == Some(SessionChange::Ended) {
                for s in &mut schemes {
                    s.end_session(u)?;
                }
                continue;
            }
            if !ues[u].active {
                continue;
            }
            let p = powers(cfg, layout, &ues[u], &shadow[u]).map_err(|e| match e {
                SimError::Model(source) => SimError::AtTime { t_s: t, source },
                other => other,
            })?;
            for s in &mut schemes {
                if change == Some(SessionChange::Started) {
                    s.run.sessions += 1;
                    s.attach(&ues[u], &p);
                } else {
                    s.step(t, &ues[u], &p)?;
                }
            }
        }
    }

    let mut runs = Vec::with_capacity(schemes.len());
    for mut s in schemes {
        for u in 0..ues.len() {
            s.drop_call(u);
            s.flush(u)?;
        }
        s.run
            .handovers
            .sort_by(|a, b| a.t_complete.total_cmp(&b.t_complete).then(a.ue.cmp(&b.ue)));
        s.run
            .rlfs
            .sort_by(|a, b| a.0.t.total_cmp(&b.0.t).then(a.0.ue.cmp(&b.0.ue)));
        runs.push(s.run);
    }
    Ok(runs)
}
