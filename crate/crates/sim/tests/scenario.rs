//! Consistency of a full scenario run.

use hcsnet_core::handover::{HandoverScheme, Signaled};
use hcsnet_sim::config::HandoverSelection;
use hcsnet_sim::{run_scenario, ScenarioConfig};

fn small() -> ScenarioConfig {
    let mut cfg = ScenarioConfig::default();
    cfg.sim.ue_count = 80;
    cfg.sim.duration_s = 60.0;
    cfg.clustering.timing_sizes = vec![8];
    cfg.clustering.timing_repetitions = 1;
    cfg
}

#[test]
fn handover_logs_are_time_ordered_and_well_formed() {
    let out = run_scenario(&small()).unwrap();
    assert_eq!(out.handover.len(), 2);
    for run in &out.handover {
        for w in run.handovers.windows(2) {
            assert!((w[0].t_complete, w[0].ue) <= (w[1].t_complete, w[1].ue));
        }
        for h in &run.handovers {
            assert_ne!(h.source, h.target);
            let pool = |id| out.layout.rrh(id).unwrap().bbu_pool;
            assert_eq!(h.inter_pool, pool(h.source) != pool(h.target));
            assert!(h.overhead() > 0.0);
        }
    }
}

#[test]
fn both_schemes_see_the_same_sessions() {
    let out = run_scenario(&small()).unwrap();
    let trad = out.run_of(HandoverScheme::Traditional).unwrap();
    let opt = out.run_of(HandoverScheme::Optimized).unwrap();
    assert_eq!(trad.sessions, opt.sessions);
    assert!(trad.suppressed.is_empty());
}

#[test]
fn single_scheme_selection_runs_only_that_scheme() {
    let mut cfg = small();
    cfg.handover.scheme = HandoverSelection::Optimized;
    let out = run_scenario(&cfg).unwrap();
    assert_eq!(out.handover.len(), 1);
    assert_eq!(out.handover[0].scheme, HandoverScheme::Optimized);
}

#[test]
fn comp_never_lowers_edge_spectral_efficiency() {
    let out = run_scenario(&small()).unwrap();
    let base = out.comp.samples_of(hcsnet_core::clustering::ClusteringScheme::None).unwrap();
    for s in &out.comp.samples {
        assert_eq!(s.spectral_efficiency.len(), base.len());
        for (c, b) in s.spectral_efficiency.iter().zip(base) {
            assert!(*c >= b * (1.0 - 1e-12));
        }
    }
}
