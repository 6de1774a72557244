//! Offline measurement clusters and the online APBC similarity pipeline.

use std::collections::BTreeMap;

use super::ap::{ap_cluster, ApParams, SimilarityMatrix};
use super::matrix::SquareMatrix;
use super::ClusterAssignment;
use crate::channel::{pcg, ChannelModel};
use crate::error::{Error, Result};
use crate::rng::{mix_seed, stream};
use crate::scalar::{cmp_real, Real};
use crate::topology::{NetworkLayout, Point, RrhId};

/// Candidate set sharing measurements around one anchor RRH.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementCluster {
    pub anchor: RrhId,
    /// Ascending ids, anchor included.
    pub members: Vec<RrhId>,
    pub probes: Vec<Point>,
    pub rsrp_threshold_db: f64,
}

/// The anchor's edge-UE probe points: midpoints towards its `k` nearest sites.
pub fn edge_probes(layout: &NetworkLayout, anchor: RrhId, k: usize) -> Result<Vec<Point>> {
    let center = layout.rrh(anchor)?.position;
    Ok(layout
        .nearest(anchor, k)?
        .into_iter()
        .map(|id| center.midpoint(&layout.rrhs[id].position))
        .collect())
}

/// Mean (unshadowed) RSRP from every RRH at each probe point.
pub fn probe_links<T: Real>(
    model: &ChannelModel<T>,
    layout: &NetworkLayout,
    probes: &[Point],
) -> Result<Vec<Vec<T>>> {
    probes
        .iter()
        .map(|&p| model.rsrp_vector(layout, p, None))
        .collect()
}

/// Picks the RRHs whose best probe RSRP is within `rsrp_threshold_db` of the
/// strongest, keeping at most `max_size` (anchor first, then by strength,
/// ties to the lower id). Returns ascending ids.
pub fn select_measurement_members<T: Real>(
    anchor: RrhId,
    probe_rsrp: &[Vec<T>],
    rsrp_threshold_db: T,
    max_size: usize,
) -> Result<Vec<RrhId>> {
    if max_size == 0 {
        return Err(Error::domain("measurement cluster size must be at least 1"));
    }
    let n = probe_rsrp.first().map_or(0, Vec::len);
    if anchor >= n.max(1) || probe_rsrp.iter().any(|p| p.len() != n) {
        return Err(Error::UnknownRrh(anchor));
    }
    if probe_rsrp.is_empty() {
        return Ok(vec![anchor]);
    }
    let score: Vec<T> = (0..n)
        .map(|k| {
            probe_rsrp
                .iter()
                .map(|p| p[k])
                .fold(T::neg_infinity(), T::max)
        })
        .collect();
    let strongest = score.iter().copied().fold(T::neg_infinity(), T::max);
    let mut candidates: Vec<RrhId> = (0..n)
        .filter(|&k| k != anchor && score[k] >= strongest - rsrp_threshold_db)
        .collect();
    candidates.sort_by(|&a, &b| cmp_real(&score[b], &score[a]).then(a.cmp(&b)));
    candidates.truncate(max_size - 1);
    candidates.push(anchor);
    candidates.sort_unstable();
    Ok(candidates)
}

pub fn measurement_cluster<T: Real>(
    layout: &NetworkLayout,
    model: &ChannelModel<T>,
    anchor: RrhId,
    rsrp_threshold_db: T,
    max_size: usize,
    probe_neighbors: usize,
) -> Result<MeasurementCluster> {
    let probes = edge_probes(layout, anchor, probe_neighbors)?;
    let links = probe_links(model, layout, &probes)?;
    let members = if links.is_empty() {
        if max_size == 0 {
            return Err(Error::domain("measurement cluster size must be at least 1"));
        }
        vec![anchor]
    } else {
        select_measurement_members(anchor, &links, rsrp_threshold_db, max_size)?
    };
    Ok(MeasurementCluster {
        anchor,
        members,
        probes,
        rsrp_threshold_db: rsrp_threshold_db.to_f64_lossy(),
    })
}

/// A UE whose sounding SINR falls strictly below the threshold becomes a
/// CoMP user.
pub fn comp_trigger<T: Real>(sounding_sinr: T, threshold: T) -> bool {
    sounding_sinr < threshold
}

/// Pair gains keyed `(k, i)`: the gain for a UE served by `i` when `k` joins.
pub type PairGains<T> = BTreeMap<(RrhId, RrhId), T>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preference<T> {
    Value(T),
    /// Median of the off-diagonal similarities.
    Median,
}

pub fn median<T: Real>(values: &[T]) -> Option<T> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(cmp_real);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / T::lit(2.0)
    })
}

/// `s(i, k) = ln pcg(k, i)` over the cluster members, preferences on the
/// diagonal.
pub fn build_similarity<T: Real>(
    cluster: &MeasurementCluster,
    gains: &PairGains<T>,
    preference: Preference<T>,
) -> Result<SimilarityMatrix<T>> {
    let members = cluster.members.clone();
    let n = members.len();
    let mut s = SquareMatrix::zeros(n);
    for i in 0..n {
        for k in 0..n {
            if i == k {
                continue;
            }
            let key = (members[k], members[i]);
            let g = *gains.get(&key).ok_or_else(|| {
                Error::IncompleteInput(format!("no pair gain for (k={}, i={})", key.0, key.1))
            })?;
            if !(g > T::zero()) || !g.is_finite() {
                return Err(Error::domain(format!("pair gain {g} for {key:?} is not positive")));
            }
            s[(i, k)] = g.ln();
        }
    }
    let mut sim = SimilarityMatrix { members, s };
    let p = match preference {
        Preference::Value(v) => v,
        Preference::Median => median(&sim.off_diagonal()).unwrap_or_else(T::zero),
    };
    sim.set_preference(p);
    Ok(sim)
}

/// Shadow-averaged pair gains for every ordered pair of `members`, probed at
/// the midpoint of each site pair. Already known pairs in `cache` are reused.
pub fn pair_gains<T: Real>(
    model: &ChannelModel<T>,
    layout: &NetworkLayout,
    members: &[RrhId],
    seed: u64,
    realizations: usize,
    cache: &mut PairGains<T>,
) -> Result<()> {
    let noise = model.noise_dbm;
    for (x, &i) in members.iter().enumerate() {
        for &k in &members[x + 1..] {
            if cache.contains_key(&(k, i)) && cache.contains_key(&(i, k)) {
                continue;
            }
            let (lo, hi) = (i.min(k), i.max(k));
            let probe = layout.rrh(lo)?.position.midpoint(&layout.rrh(hi)?.position);
            let draws = realizations.max(1);
            let mut g_ik = T::zero();
            let mut g_ki = T::zero();
            for r in 0..draws {
                let links = if realizations == 0 {
                    model.rsrp_vector(layout, probe, None)?
                } else {
                    let key = mix_seed(lo as u64, &[hi as u64, r as u64]);
                    let shadows: Vec<T> = layout
                        .rrhs
                        .iter()
                        .map(|rrh| model.shadow(seed, stream::PROBE_SHADOW, rrh, key))
                        .collect();
                    model.rsrp_vector(layout, probe, Some(&shadows))?
                };
                g_ik += pcg(&links, i, k, noise)?;
                g_ki += pcg(&links, k, i, noise)?;
            }
            let d = T::lit(draws as f64);
            cache.insert((k, i), g_ik / d);
            cache.insert((i, k), g_ki / d);
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApbcConfig {
    pub rsrp_threshold_db: f64,
    pub max_measurement_size: usize,
    pub probe_neighbors: usize,
    pub shadow_realizations: usize,
    /// `None` selects the median of the off-diagonal similarities.
    pub preference: Option<f64>,
    pub ap: ApParams,
}

impl Default for ApbcConfig {
    fn default() -> Self {
        Self {
            rsrp_threshold_db: 20.0,
            max_measurement_size: 7,
            probe_neighbors: 6,
            shadow_realizations: 10,
            preference: None,
            ap: ApParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApbcOutcome<T> {
    pub measurement: MeasurementCluster,
    pub similarity: SimilarityMatrix<T>,
    pub assignment: ClusterAssignment,
}

/// Offline phase plus similarity construction for every anchor RRH.
pub fn apbc_similarities<T: Real>(
    layout: &NetworkLayout,
    model: &ChannelModel<T>,
    cfg: &ApbcConfig,
    seed: u64,
) -> Result<Vec<(MeasurementCluster, SimilarityMatrix<T>)>> {
    let mut cache = PairGains::new();
    let preference = cfg
        .preference
        .map_or(Preference::Median, |p| Preference::Value(T::lit(p)));
    layout
        .rrhs
        .iter()
        .map(|anchor| {
            let mc = measurement_cluster(
                layout,
                model,
                anchor.id,
                T::lit(cfg.rsrp_threshold_db),
                cfg.max_measurement_size,
                cfg.probe_neighbors,
            )?;
            pair_gains(model, layout, &mc.members, seed, cfg.shadow_realizations, &mut cache)?;
            let sim = build_similarity(&mc, &cache, preference)?;
            Ok((mc, sim))
        })
        .collect()
}

/// Online phase: affinity propagation inside each measurement cluster.
pub fn apbc_assign<T: Real>(
    similarities: &[(MeasurementCluster, SimilarityMatrix<T>)],
    params: &ApParams,
) -> Result<Vec<ClusterAssignment>> {
    similarities
        .iter()
        .map(|(_, s)| ap_cluster(s, params))
        .collect()
}

pub fn apbc_clusters<T: Real>(
    layout: &NetworkLayout,
    model: &ChannelModel<T>,
    cfg: &ApbcConfig,
    seed: u64,
) -> Result<Vec<ApbcOutcome<T>>> {
    let sims = apbc_similarities(layout, model, cfg, seed)?;
    let assignments = apbc_assign(&sims, &cfg.ap)?;
    Ok(sims
        .into_iter()
        .zip(assignments)
        .map(|((measurement, similarity), assignment)| ApbcOutcome {
            measurement,
            similarity,
            assignment,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{generate_layout, LayoutConfig};

    #[test]
    fn trigger_boundary_is_strict() {
        assert!(!comp_trigger(1.0, 1.0));
        assert!(comp_trigger(0.5, 1.0));
        assert!(!comp_trigger(3.0, 1.0));
    }

    #[test]
    fn max_size_one_keeps_anchor_only() {
        let links = vec![vec![-60.0, -50.0, -55.0]];
        assert_eq!(select_measurement_members(2, &links, 20.0, 1).unwrap(), vec![2]);
        assert!(select_measurement_members(2, &links, 20.0, 0).is_err());
        assert_eq!(
            select_measurement_members(5, &links, 20.0, 3),
            Err(Error::UnknownRrh(5))
        );
    }

    #[test]
    fn isolated_anchor() {
        let links = vec![vec![-50.0, -90.0, -95.0], vec![-52.0, -99.0, -91.0]];
        assert_eq!(select_measurement_members(0, &links, 20.0, 5).unwrap(), vec![0]);
    }

    #[test]
    fn strongest_within_threshold_truncated() {
        let links = vec![vec![-70.0, -50.0, -65.0, -55.0, -80.0]];
        // within 20 dB of -50: ids 1, 2, 3; keep the two strongest others
        assert_eq!(select_measurement_members(4, &links, 20.0, 3).unwrap(), vec![1, 3, 4]);
        assert_eq!(select_measurement_members(0, &links, 20.0, 9).unwrap(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn similarity_from_unit_gains() {
        let mc = MeasurementCluster {
            anchor: 3,
            members: vec![1, 3, 8],
            probes: vec![],
            rsrp_threshold_db: 20.0,
        };
        let mut gains = PairGains::new();
        for &a in &mc.members {
            for &b in &mc.members {
                if a != b {
                    gains.insert((a, b), 1.0);
                }
            }
        }
        let s = build_similarity(&mc, &gains, Preference::Value(-2.5)).unwrap();
        assert_eq!(s.off_diagonal(), vec![0.0; 6]);
        assert_eq!(s.get(1, 1), -2.5);

        gains.remove(&(8, 1));
        assert!(matches!(
            build_similarity(&mc, &gains, Preference::Median),
            Err(Error::IncompleteInput(_))
        ));
    }

    #[test]
    fn single_member_similarity() {
        let mc = MeasurementCluster {
            anchor: 0,
            members: vec![0],
            probes: vec![],
            rsrp_threshold_db: 20.0,
        };
        let s = build_similarity(&mc, &PairGains::<f64>::new(), Preference::Value(-1.0)).unwrap();
        assert_eq!(s.n(), 1);
        assert_eq!(s.get(0, 0), -1.0);
    }

    #[test]
    fn median_values() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median::<f64>(&[]), None);
    }

    #[test]
    fn gains_are_at_least_one_and_cached() {
        let layout = generate_layout(&LayoutConfig::default(), 9).unwrap();
        let model = ChannelModel::<f64>::default();
        let mut cache = PairGains::new();
        pair_gains(&model, &layout, &[0, 1, 7, 12], 9, 4, &mut cache).unwrap();
        assert_eq!(cache.len(), 12);
        assert!(cache.values().all(|&g| g >= 1.0));
        let before = cache.clone();
        pair_gains(&model, &layout, &[0, 1], 9, 4, &mut cache).unwrap();
        assert_eq!(before, cache);
    }

    #[test]
    fn apbc_clusters_stay_inside_measurement_clusters() {
        let layout = generate_layout(&LayoutConfig::default(), 4).unwrap();
        let model = ChannelModel::<f64>::default();
        let out = apbc_clusters(&layout, &model, &ApbcConfig::default(), 4).unwrap();
        assert_eq!(out.len(), layout.len());
        for o in &out {
            assert!(o.measurement.members.contains(&o.measurement.anchor));
            assert!(o.measurement.members.len() <= 7);
            for c in &o.assignment.clusters {
                assert!(c.iter().all(|m| o.measurement.members.contains(m)));
            }
        }
    }
}
