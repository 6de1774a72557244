//! Affinity propagation checked against a straight-line reference evaluation
//! and against exhaustive search.

use hcsnet_core::clustering::{
    ap_cluster, brute_force_exemplars, update_availabilities, update_responsibilities, ApParams,
    ApState, SimilarityMatrix, SquareMatrix,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Grid = Vec<Vec<f64>>;

/// Responsibilities from the two largest `a + s` entries of each row.
fn reference_r(s: &Grid, a: &Grid, r_old: &Grid, damping: f64) -> Grid {
    let n = s.len();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        let mut first = (f64::NEG_INFINITY, usize::MAX);
        let mut second = f64::NEG_INFINITY;
        for k in 0..n {
            let v = a[i][k] + s[i][k];
            if v > first.0 {
                second = first.0;
                first = (v, k);
            } else if v > second {
                second = v;
            }
        }
        for k in 0..n {
            let competitor = if k == first.1 { second } else { first.0 };
            let competitor = if competitor.is_finite() { competitor } else { 0.0 };
            out[i][k] = (1.0 - damping) * (s[i][k] - competitor) + damping * r_old[i][k];
        }
    }
    out
}

/// Availabilities from the column sums of positive responsibilities.
fn reference_a(r: &Grid, a_old: &Grid, damping: f64) -> Grid {
    let n = r.len();
    let mut out = vec![vec![0.0; n]; n];
    for k in 0..n {
        let column: f64 = (0..n).filter(|&i| i != k).map(|i| r[i][k].max(0.0)).sum();
        for i in 0..n {
            let raw = if i == k {
                column
            } else {
                (r[k][k] + column - r[i][k].max(0.0)).min(0.0)
            };
            out[i][k] = (1.0 - damping) * raw + damping * a_old[i][k];
        }
    }
    out
}

fn grid(m: &SquareMatrix<f64>) -> Grid {
    (0..m.n()).map(|i| m.row(i).to_vec()).collect()
}

fn max_diff(a: &Grid, b: &Grid) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Positive log-gain similarities of random sites, like the ones built from
/// pair CoMP gains, with the median as preference.
fn random_similarity(rng: &mut ChaCha8Rng, n: usize) -> SimilarityMatrix<f64> {
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0))).collect();
    let m = SquareMatrix::from_fn(n, |i, k| {
        let d2 = (pts[i].0 - pts[k].0).powi(2) + (pts[i].1 - pts[k].1).powi(2);
        (1.0 + 20.0 / (1.0 + d2)).ln() * rng.gen_range(0.8..1.25)
    });
    let mut s = SimilarityMatrix::from_matrix(m);
    let mut off = s.off_diagonal();
    off.sort_by(f64::total_cmp);
    let pref = if off.is_empty() {
        0.0
    } else if off.len() % 2 == 1 {
        off[off.len() / 2]
    } else {
        0.5 * (off[off.len() / 2 - 1] + off[off.len() / 2])
    };
    s.set_preference(pref);
    s
}

#[test]
fn message_updates_match_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for case in 0..200 {
        let n = 1 + case % 8;
        let s = random_similarity(&mut rng, n);
        let damping = [0.0, 0.5, 0.9][case % 3];
        let mut state = ApState::new(n, damping).unwrap();
        let (mut r, mut a) = (vec![vec![0.0; n]; n], vec![vec![0.0; n]; n]);
        let sg = grid(&s.s);
        for _ in 0..15 {
            let after_r = update_responsibilities(&s, &state).unwrap();
            r = reference_r(&sg, &a, &r, damping);
            assert!(max_diff(&grid(&after_r.r), &r) <= 1e-12, "case {case} r");
            state = update_availabilities(&after_r).unwrap();
            a = reference_a(&r, &a, damping);
            assert!(max_diff(&grid(&state.a), &a) <= 1e-12, "case {case} a");
        }
    }
}

#[test]
fn ap_close_to_exhaustive_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut good = 0;
    let total = 200;
    for case in 0..total {
        let n = 2 + case % 7;
        let s = random_similarity(&mut rng, n);
        let ap = ap_cluster(&s, &ApParams::default()).unwrap();
        let idx: Vec<usize> = ap.exemplar_of.iter().map(|&e| s.members.iter().position(|&m| m == e).unwrap()).collect();
        let net = s.net_similarity(&idx);
        let best = brute_force_exemplars(&s).unwrap().net_similarity;
        assert!(net <= best + 1e-9);
        if net >= 0.95 * best {
            good += 1;
        }
    }
    assert!(good * 100 >= 95 * total, "{good}/{total}");
}

#[test]
fn single_node_takes_its_preference() {
    let s = SimilarityMatrix::from_matrix(SquareMatrix::from_rows(&[vec![-2.5]]));
    let out = ap_cluster(&s, &ApParams::default()).unwrap();
    assert!(out.converged);
    assert_eq!(out.iterations_used, 1);
    assert_eq!(out.exemplars(), vec![0]);
    let bf = brute_force_exemplars(&s).unwrap();
    assert_eq!(bf.net_similarity, -2.5);
}
