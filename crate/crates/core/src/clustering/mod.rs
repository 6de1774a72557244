//! CoMP clustering: offline measurement clusters, online coordinated clusters
//! by affinity propagation (APBC), and the static and signal-interference
//! baselines.

mod ap;
mod baseline;
mod matrix;
mod measurement;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use ap::{
    ap_cluster, brute_force_exemplars, extract_exemplars, run_iterations, update_availabilities,
    update_responsibilities, ApParams, ApState, BruteForceResult, SimilarityMatrix,
    BRUTE_FORCE_LIMIT,
};
pub use baseline::{greedy_coupling_groups, interference_coupling, sim_interference_cluster, static_cluster};
pub use matrix::SquareMatrix;
pub use measurement::{
    apbc_clusters, build_similarity, comp_trigger, edge_probes, measurement_cluster, median,
    pair_gains, probe_links, select_measurement_members, apbc_similarities, apbc_assign, ApbcConfig, ApbcOutcome, MeasurementCluster, PairGains, Preference,
};

use crate::topology::RrhId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusteringScheme {
    None,
    Static,
    Sim,
    Apbc,
}

impl ClusteringScheme {
    pub const ALL: [ClusteringScheme; 4] = [Self::None, Self::Static, Self::Sim, Self::Apbc];

    pub fn name(&self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Static => "static",
            Self::Sim => "sim",
            Self::Apbc => "apbc",
        }
    }
}

/// Partition of a node set into exemplar-headed clusters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAssignment {
    pub members: Vec<RrhId>,
    /// Exemplar RRH id of each entry of `members`.
    pub exemplar_of: Vec<RrhId>,
    /// One entry per exemplar, ascending by exemplar id; members ascending.
    pub clusters: Vec<Vec<RrhId>>,
    pub converged: bool,
    pub iterations_used: usize,
}

impl ClusterAssignment {
    /// Builds an assignment from matrix-index exemplars.
    pub fn from_indices(
        members: &[RrhId],
        exemplar_idx: &[usize],
        converged: bool,
        iterations_used: usize,
    ) -> Self {
        let exemplar_of: Vec<RrhId> = exemplar_idx.iter().map(|&e| members[e]).collect();
        Self::from_exemplars(members.to_vec(), exemplar_of, converged, iterations_used)
    }

    pub fn from_exemplars(
        members: Vec<RrhId>,
        exemplar_of: Vec<RrhId>,
        converged: bool,
        iterations_used: usize,
    ) -> Self {
        let mut groups: BTreeMap<RrhId, Vec<RrhId>> = BTreeMap::new();
        for (&m, &e) in members.iter().zip(&exemplar_of) {
            groups.entry(e).or_default().push(m);
        }
        let clusters = groups
            .into_values()
            .map(|mut g| {
                g.sort_unstable();
                g
            })
            .collect();
        Self {
            members,
            exemplar_of,
            clusters,
            converged,
            iterations_used,
        }
    }

    /// A single group headed by `exemplar`.
    pub fn single_group(mut members: Vec<RrhId>, exemplar: RrhId) -> Self {
        members.sort_unstable();
        let exemplar_of = vec![exemplar; members.len()];
        Self::from_exemplars(members, exemplar_of, true, 0)
    }

    pub fn exemplars(&self) -> Vec<RrhId> {
        let mut e: Vec<RrhId> = self
            .members
            .iter()
            .zip(&self.exemplar_of)
            .filter(|(m, e)| m == e)
            .map(|(m, _)| *m)
            .collect();
        e.sort_unstable();
        e
    }

    pub fn exemplar_for(&self, rrh: RrhId) -> Option<RrhId> {
        self.members
            .iter()
            .position(|&m| m == rrh)
            .map(|i| self.exemplar_of[i])
    }

    /// The coordinated cluster containing `rrh`.
    pub fn cluster_of(&self, rrh: RrhId) -> Option<&[RrhId]> {
        self.clusters
            .iter()
            .find(|c| c.contains(&rrh))
            .map(Vec::as_slice)
    }
}
