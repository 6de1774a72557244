//! Channel-agnostic static clusters and the greedy signal-interference
//! (sim-CoMP) baseline.

use super::matrix::SquareMatrix;
use super::ClusterAssignment;
use crate::channel::ChannelModel;
use crate::error::{Error, Result};
use crate::scalar::{cmp_real, db_to_linear, Real};
use crate::topology::{NetworkLayout, RrhId};

/// Fixed geographic groups: the lowest unassigned id seeds a group and pulls
/// in its `cluster_size - 1` nearest unassigned sites. The seed is the head.
pub fn static_cluster(layout: &NetworkLayout, cluster_size: usize) -> Result<Vec<ClusterAssignment>> {
    if cluster_size == 0 {
        return Err(Error::domain("cluster size must be at least 1"));
    }
    let mut assigned = vec![false; layout.len()];
    let mut out = Vec::new();
    for seed in 0..layout.len() {
        if assigned[seed] {
            continue;
        }
        let origin = layout.rrhs[seed].position;
        let mut free: Vec<(f64, RrhId)> = layout
            .rrhs
            .iter()
            .filter(|r| r.id != seed && !assigned[r.id])
            .map(|r| (r.position.distance(&origin), r.id))
            .collect();
        free.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut group = vec![seed];
        group.extend(free.iter().take(cluster_size - 1).map(|&(_, id)| id));
        for &g in &group {
            assigned[g] = true;
        }
        out.push(ClusterAssignment::single_group(group, seed));
    }
    Ok(out)
}

/// Symmetric coupling `C(a, b) = P_a(at b) + P_b(at a)` in mW, from mean
/// path loss between the two sites.
pub fn interference_coupling<T: Real>(
    layout: &NetworkLayout,
    model: &ChannelModel<T>,
) -> Result<SquareMatrix<T>> {
    let n = layout.len();
    let mut c = SquareMatrix::zeros(n);
    for a in 0..n {
        for b in (a + 1)..n {
            let ra = &layout.rrhs[a];
            let rb = &layout.rrhs[b];
            let p_ab = db_to_linear(model.rsrp(ra, rb.position, T::zero())?);
            let p_ba = db_to_linear(model.rsrp(rb, ra.position, T::zero())?);
            c[(a, b)] = p_ab + p_ba;
            c[(b, a)] = p_ab + p_ba;
        }
    }
    Ok(c)
}

/// Greedy merge: visit site pairs by decreasing coupling (ties by
/// lexicographic pair order) and join their groups when the union stays within
/// `cluster_size`. Groups come back ascending, ordered by their lowest id.
pub fn greedy_coupling_groups<T: Real>(coupling: &SquareMatrix<T>, cluster_size: usize) -> Vec<Vec<RrhId>> {
    let n = coupling.n();
    let mut pairs: Vec<(RrhId, RrhId)> = (0..n)
        .flat_map(|a| ((a + 1)..n).map(move |b| (a, b)))
        .collect();
    pairs.sort_by(|x, y| cmp_real(&coupling[*y], &coupling[*x]).then(x.cmp(y)));

    let mut group_of: Vec<usize> = (0..n).collect();
    let mut groups: Vec<Vec<RrhId>> = (0..n).map(|i| vec![i]).collect();
    for (a, b) in pairs {
        let (ga, gb) = (group_of[a], group_of[b]);
        if ga == gb || groups[ga].len() + groups[gb].len() > cluster_size {
            continue;
        }
        let moved = std::mem::take(&mut groups[gb]);
        for &m in &moved {
            group_of[m] = ga;
        }
        groups[ga].extend(moved);
    }
    let mut out: Vec<Vec<RrhId>> = groups
        .into_iter()
        .filter(|g| !g.is_empty())
        .map(|mut g| {
            g.sort_unstable();
            g
        })
        .collect();
    out.sort();
    out
}

pub fn sim_interference_cluster<T: Real>(
    layout: &NetworkLayout,
    model: &ChannelModel<T>,
    cluster_size: usize,
) -> Result<Vec<ClusterAssignment>> {
    if cluster_size == 0 {
        return Err(Error::domain("cluster size must be at least 1"));
    }
    let coupling = interference_coupling(layout, model)?;
    Ok(greedy_coupling_groups(&coupling, cluster_size)
        .into_iter()
        .map(|g| {
            let head = g[0];
            ClusterAssignment::single_group(g, head)
        })
        .collect())
}
