//! Exemplar-based clustering by affinity propagation.
//!
//! Every responsibility and availability message is evaluated from its own
//! inputs, the way each RRH would compute it locally: a responsibility scans
//! the `n - 1` competing candidates of its row, an availability sums the
//! `n - 2` supporting responsibilities of its column. One iteration therefore
//! costs `O(n^3)`.

use serde::{Deserialize, Serialize};

use super::matrix::SquareMatrix;
use super::ClusterAssignment;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::topology::RrhId;

/// Input similarities. `s(i, k)` says how well `k` would serve as exemplar of
/// `i`; the diagonal holds the preferences.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix<T> {
    pub members: Vec<RrhId>,
    pub s: SquareMatrix<T>,
}

impl<T: Real> SimilarityMatrix<T> {
    /// Similarities over anonymous nodes `0..n`.
    pub fn from_matrix(s: SquareMatrix<T>) -> Self {
        Self {
            members: (0..s.n()).collect(),
            s,
        }
    }

    pub fn n(&self) -> usize {
        self.s.n()
    }

    pub fn get(&self, i: usize, k: usize) -> T {
        self.s[(i, k)]
    }

    pub fn set_preference(&mut self, preference: T) {
        for k in 0..self.n() {
            self.s[(k, k)] = preference;
        }
    }

    pub fn off_diagonal(&self) -> Vec<T> {
        let n = self.n();
        (0..n)
            .flat_map(|i| (0..n).filter(move |&k| k != i).map(move |k| (i, k)))
            .map(|(i, k)| self.s[(i, k)])
            .collect()
    }

    /// Sum of `s(i, exemplar(i))` over all nodes, preferences included for
    /// the exemplars themselves. `exemplar_idx[i]` is a matrix index.
    pub fn net_similarity(&self, exemplar_idx: &[usize]) -> T {
        exemplar_idx
            .iter()
            .enumerate()
            .map(|(i, &e)| self.s[(i, e)])
            .sum()
    }

    fn check_finite(&self) -> Result<()> {
        if self.s.as_slice().iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::domain("similarity matrix has non-finite entries"))
        }
    }
}

/// Message state between iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct ApState<T> {
    pub r: SquareMatrix<T>,
    pub a: SquareMatrix<T>,
    pub damping: T,
    pub iteration: usize,
}

impl<T: Real> ApState<T> {
    pub fn new(n: usize, damping: T) -> Result<Self> {
        check_damping(damping)?;
        Ok(Self {
            r: SquareMatrix::zeros(n),
            a: SquareMatrix::zeros(n),
            damping,
            iteration: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.r.n()
    }

    /// `r(k, k) + a(k, k)`, positive for exemplars.
    pub fn self_evidence(&self, k: usize) -> T {
        self.r[(k, k)] + self.a[(k, k)]
    }

    fn check_shapes(&self, n: usize) -> Result<()> {
        for got in [self.r.n(), self.a.n()] {
            if got != n {
                return Err(Error::Shape { expected: n, got });
            }
        }
        Ok(())
    }

    /// One full iteration in place: all responsibilities from the previous
    /// availabilities, then all availabilities from the new responsibilities.
    pub fn step(&mut self, s: &SimilarityMatrix<T>, scratch: &mut SquareMatrix<T>) {
        responsibilities_into(&s.s, &self.r, &self.a, self.damping, scratch);
        std::mem::swap(&mut self.r, scratch);
        availabilities_into(&self.r, &self.a, self.damping, scratch);
        std::mem::swap(&mut self.a, scratch);
        self.iteration += 1;
    }
}

fn check_damping<T: Real>(damping: T) -> Result<()> {
    if damping >= T::zero() && damping < T::one() {
        Ok(())
    } else {
        Err(Error::domain(format!("damping must lie in [0, 1), got {damping}")))
    }
}

fn responsibilities_into<T: Real>(
    s: &SquareMatrix<T>,
    r_old: &SquareMatrix<T>,
    a: &SquareMatrix<T>,
    damping: T,
    out: &mut SquareMatrix<T>,
) {
    let n = s.n();
    let keep = T::one() - damping;
    for i in 0..n {
        for k in 0..n {
            let mut competitor: Option<T> = None;
            for kk in (0..n).filter(|&kk| kk != k) {
                let v = a[(i, kk)] + s[(i, kk)];
                competitor = Some(competitor.map_or(v, |c| c.max(v)));
            }
            // A lone node has no competitor and keeps its raw similarity.
            let raw = s[(i, k)] - competitor.unwrap_or_else(T::zero);
            out[(i, k)] = keep * raw + damping * r_old[(i, k)];
        }
    }
}

fn availabilities_into<T: Real>(
    r: &SquareMatrix<T>,
    a_old: &SquareMatrix<T>,
    damping: T,
    out: &mut SquareMatrix<T>,
) {
    let n = r.n();
    let keep = T::one() - damping;
    for i in 0..n {
        for k in 0..n {
            let support: T = (0..n)
                .filter(|&ip| ip != i && ip != k)
                .map(|ip| r[(ip, k)].max(T::zero()))
                .sum();
            let raw = if i == k {
                support
            } else {
                (r[(k, k)] + support).min(T::zero())
            };
            out[(i, k)] = keep * raw + damping * a_old[(i, k)];
        }
    }
}

/// Damped responsibility update for every pair, read from the old state only.
pub fn update_responsibilities<T: Real>(
    s: &SimilarityMatrix<T>,
    state: &ApState<T>,
) -> Result<ApState<T>> {
    state.check_shapes(s.n())?;
    check_damping(state.damping)?;
    let mut next = state.clone();
    responsibilities_into(&s.s, &state.r, &state.a, state.damping, &mut next.r);
    Ok(next)
}

/// Damped availability update from the (already updated) responsibilities.
/// Completes an iteration.
pub fn update_availabilities<T: Real>(state: &ApState<T>) -> Result<ApState<T>> {
    state.check_shapes(state.r.n())?;
    check_damping(state.damping)?;
    let mut next = state.clone();
    availabilities_into(&state.r, &state.a, state.damping, &mut next.a);
    next.iteration += 1;
    Ok(next)
}

fn exemplar_mask<T: Real>(state: &ApState<T>) -> Vec<bool> {
    (0..state.n())
        .map(|k| state.self_evidence(k) > T::zero())
        .collect()
}

/// Assigns every node to its best exemplar by similarity, ties to the lower
/// index. Exemplars are their own exemplar.
fn assign<T: Real>(s: &SimilarityMatrix<T>, exemplars: &[usize]) -> Vec<usize> {
    (0..s.n())
        .map(|i| {
            if exemplars.contains(&i) {
                return i;
            }
            let mut best = exemplars[0];
            for &e in &exemplars[1..] {
                if s.get(i, e) > s.get(i, best) {
                    best = e;
                }
            }
            best
        })
        .collect()
}

/// Reads the exemplar set off the state: `k` is an exemplar iff
/// `r(k,k) + a(k,k) > 0`. If nothing qualifies, the node with the largest
/// self-evidence becomes the sole exemplar.
pub fn extract_exemplars<T: Real>(state: &ApState<T>, s: &SimilarityMatrix<T>) -> ClusterAssignment {
    let n = s.n();
    let mut exemplars: Vec<usize> = exemplar_mask(state)
        .iter()
        .enumerate()
        .filter_map(|(k, &e)| e.then_some(k))
        .collect();
    if exemplars.is_empty() && n > 0 {
        let mut best = 0;
        for k in 1..n {
            if state.self_evidence(k) > state.self_evidence(best) {
                best = k;
            }
        }
        exemplars.push(best);
    }
    let idx = assign(s, &exemplars);
    ClusterAssignment::from_indices(&s.members, &idx, false, state.iteration)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ApParams {
    pub damping: f64,
    pub max_iter: usize,
    pub stable_window: usize,
}

impl Default for ApParams {
    fn default() -> Self {
        Self {
            damping: 0.5,
            max_iter: 200,
            stable_window: 10,
        }
    }
}

/// Runs affinity propagation until the exemplar set has been the same for
/// `stable_window` consecutive iterations, or `max_iter` is reached.
pub fn ap_cluster<T: Real>(s: &SimilarityMatrix<T>, params: &ApParams) -> Result<ClusterAssignment> {
    let n = s.n();
    if n == 0 {
        return Err(Error::domain("empty similarity matrix"));
    }
    if params.max_iter == 0 {
        return Err(Error::domain("max_iter must be at least 1"));
    }
    s.check_finite()?;
    let mut state = ApState::new(n, T::lit(params.damping))?;
    let mut scratch = SquareMatrix::zeros(n);

    if n == 1 {
        state.step(s, &mut scratch);
        let mut out = extract_exemplars(&state, s);
        out.converged = true;
        return Ok(out);
    }

    let mut previous: Option<Vec<bool>> = None;
    let mut unchanged = 0usize;
    let mut converged = false;
    while state.iteration < params.max_iter {
        state.step(s, &mut scratch);
        let mask = exemplar_mask(&state);
        if previous.as_ref() == Some(&mask) {
            unchanged += 1;
        } else {
            unchanged = 1;
        }
        let any = mask.iter().any(|&e| e);
        previous = Some(mask);
        if any && unchanged >= params.stable_window {
            converged = true;
            break;
        }
    }
    let mut out = extract_exemplars(&state, s);
    out.converged = converged;
    Ok(out)
}

/// Runs exactly `iterations` message-passing iterations without any
/// convergence bookkeeping. Used for per-iteration cost measurements.
pub fn run_iterations<T: Real>(
    s: &SimilarityMatrix<T>,
    damping: T,
    iterations: usize,
) -> Result<ApState<T>> {
    let mut state = ApState::new(s.n(), damping)?;
    let mut scratch = SquareMatrix::zeros(s.n());
    for _ in 0..iterations {
        state.step(s, &mut scratch);
    }
    Ok(state)
}

pub const BRUTE_FORCE_LIMIT: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceResult<T> {
    pub assignment: ClusterAssignment,
    pub net_similarity: T,
}

/// Exhaustive search over every non-empty exemplar subset. Subsets are visited
/// in increasing bitmask order and only a strictly better one replaces the
/// incumbent, so ties go to the lowest-id subset.
pub fn brute_force_exemplars<T: Real>(s: &SimilarityMatrix<T>) -> Result<BruteForceResult<T>> {
    let n = s.n();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::SizeGuard {
            n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    if n == 0 {
        return Err(Error::domain("empty similarity matrix"));
    }
    let mut best: Option<(T, Vec<usize>)> = None;
    for mask in 1u32..(1u32 << n) {
        let exemplars: Vec<usize> = (0..n).filter(|&k| mask & (1 << k) != 0).collect();
        let idx = assign(s, &exemplars);
        let net = s.net_similarity(&idx);
        if best.as_ref().is_none_or(|(b, _)| net > *b) {
            best = Some((net, idx));
        }
    }
    let (net_similarity, idx) = best.expect("at least one subset");
    Ok(BruteForceResult {
        assignment: ClusterAssignment::from_indices(&s.members, &idx, true, 0),
        net_similarity,
    })
}
