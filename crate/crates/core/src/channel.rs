//! Received power and SINR under non-CoMP and joint-transmission hypotheses.
//!
//! Link vectors are dense: `rsrp_dbm[k]` is the power received from RRH `k`.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{keyed_rng, stream};
use crate::scalar::{cmp_real, db_to_linear, Real};
use crate::topology::{NetworkLayout, Point, Rrh, RrhId, RrhKind};

/// `intercept + slope * log10(d / 1 km)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathLossParams<T> {
    pub intercept_db: T,
    pub slope_db: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound = "T: Real + Serialize + for<'a> Deserialize<'a>")]
pub struct ChannelModel<T> {
    pub macro_pl: PathLossParams<T>,
    pub small_pl: PathLossParams<T>,
    pub shadowing_sigma_macro_db: T,
    pub shadowing_sigma_small_db: T,
    pub noise_dbm: T,
    pub min_distance_m: T,
}

impl<T: Real> Default for ChannelModel<T> {
    fn default() -> Self {
        Self {
            macro_pl: PathLossParams {
                intercept_db: T::lit(128.1),
                slope_db: T::lit(37.6),
            },
            small_pl: PathLossParams {
                intercept_db: T::lit(140.7),
                slope_db: T::lit(36.7),
            },
            shadowing_sigma_macro_db: T::lit(8.0),
            shadowing_sigma_small_db: T::lit(10.0),
            noise_dbm: T::lit(-104.0),
            min_distance_m: T::lit(10.0),
        }
    }
}

impl<T: Real> ChannelModel<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.macro_pl.slope_db > T::zero() && self.small_pl.slope_db > T::zero()) {
            return bad("path-loss slopes must be positive");
        }
        if !(self.shadowing_sigma_macro_db >= T::zero() && self.shadowing_sigma_small_db >= T::zero())
        {
            return bad("shadowing sigma must be non-negative");
        }
        if !(self.min_distance_m > T::zero()) {
            return bad("min_distance must be positive");
        }
        if self.noise_dbm.is_nan() {
            return bad("noise power must be a number");
        }
        Ok(())
    }

    pub fn params(&self, kind: RrhKind) -> &PathLossParams<T> {
        match kind {
            RrhKind::Mrrh => &self.macro_pl,
            RrhKind::Srrh => &self.small_pl,
        }
    }

    pub fn shadowing_sigma(&self, kind: RrhKind) -> T {
        match kind {
            RrhKind::Mrrh => self.shadowing_sigma_macro_db,
            RrhKind::Srrh => self.shadowing_sigma_small_db,
        }
    }

    pub fn path_loss(&self, kind: RrhKind, distance_m: T) -> Result<T> {
        if !distance_m.is_finite() {
            return Err(Error::domain(format!("non-finite distance {distance_m}")));
        }
        let d = distance_m.max(self.min_distance_m);
        let p = self.params(kind);
        Ok(p.intercept_db + p.slope_db * (d / T::lit(1000.0)).log10())
    }

    pub fn rsrp(&self, rrh: &Rrh, ue_position: Point, shadow_db: T) -> Result<T> {
        let d = T::lit(rrh.position.distance(&ue_position));
        Ok(T::lit(rrh.tx_power_dbm) - self.path_loss(rrh.kind, d)? + shadow_db)
    }

    pub fn noise_mw(&self) -> T {
        db_to_linear(self.noise_dbm)
    }

    /// Log-normal shadowing for one (RRH, UE) pair, keyed so that evaluation
    /// order does not matter.
    pub fn shadow(&self, seed: u64, namespace: u64, rrh: &Rrh, ue_key: u64) -> T {
        let mut rng = keyed_rng(seed, &[namespace, rrh.id as u64, ue_key]);
        let z: f64 = StandardNormal.sample(&mut rng);
        T::lit(z) * self.shadowing_sigma(rrh.kind)
    }

    /// RSRP from every RRH at `point`, with optional per-RRH shadowing.
    pub fn rsrp_vector(
        &self,
        layout: &NetworkLayout,
        point: Point,
        shadow_db: Option<&[T]>,
    ) -> Result<Vec<T>> {
        layout
            .rrhs
            .iter()
            .map(|r| {
                let s = shadow_db.map_or(T::zero(), |s| s[r.id]);
                self.rsrp(r, point, s)
            })
            .collect()
    }

    /// Snapshot link budget for a dropped UE with shadowing keyed by
    /// `(seed, rrh id, ue id)`.
    pub fn link_budget(
        &self,
        layout: &NetworkLayout,
        ue: usize,
        position: Point,
        seed: u64,
    ) -> Result<LinkBudget<T>> {
        let shadows: Vec<T> = layout
            .rrhs
            .iter()
            .map(|r| self.shadow(seed, stream::SHADOW, r, ue as u64))
            .collect();
        let rsrp_dbm = self.rsrp_vector(layout, position, Some(&shadows))?;
        let serving = strongest(&rsrp_dbm)?;
        Ok(LinkBudget {
            ue,
            position,
            rsrp_dbm,
            serving,
        })
    }
}

/// Per-UE received powers plus the serving (strongest) RRH.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkBudget<T> {
    pub ue: usize,
    pub position: Point,
    pub rsrp_dbm: Vec<T>,
    pub serving: RrhId,
}

impl<T: Real> LinkBudget<T> {
    pub fn sinr_noncomp(&self, noise_dbm: T) -> Result<T> {
        sinr_noncomp(&self.rsrp_dbm, self.serving, noise_dbm)
    }

    pub fn sinr_joint(&self, cluster: &[RrhId], noise_dbm: T) -> Result<T> {
        sinr_joint(&self.rsrp_dbm, cluster, noise_dbm)
    }
}

/// Index of the strongest link, ties to the lowest id.
pub fn strongest<T: Real>(rsrp_dbm: &[T]) -> Result<RrhId> {
    rsrp_dbm
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, T)>, (k, &p)| match best {
            Some((_, bp)) if cmp_real(&p, &bp).is_le() => best,
            _ => Some((k, p)),
        })
        .map(|(k, _)| k)
        .ok_or_else(|| Error::domain("empty link set"))
}

fn check_links<T: Real>(rsrp_dbm: &[T], ids: &[RrhId]) -> Result<()> {
    if rsrp_dbm.is_empty() {
        return Err(Error::domain("empty link set"));
    }
    match ids.iter().find(|&&k| k >= rsrp_dbm.len()) {
        Some(&k) => Err(Error::UnknownRrh(k)),
        None => Ok(()),
    }
}

pub fn sinr_noncomp<T: Real>(rsrp_dbm: &[T], serving: RrhId, noise_dbm: T) -> Result<T> {
    sinr_joint(rsrp_dbm, &[serving], noise_dbm)
}

/// Joint transmission: cluster members contribute signal, everyone else
/// interference.
pub fn sinr_joint<T: Real>(rsrp_dbm: &[T], cluster: &[RrhId], noise_dbm: T) -> Result<T> {
    if cluster.is_empty() {
        return Err(Error::domain("empty CoMP cluster"));
    }
    check_links(rsrp_dbm, cluster)?;
    let (signal, interference) = split_power(rsrp_dbm, cluster);
    Ok(signal / (interference + db_to_linear(noise_dbm)))
}

/// Partitions total received power (mW) into cluster signal and interference.
pub fn split_power<T: Real>(rsrp_dbm: &[T], cluster: &[RrhId]) -> (T, T) {
    let mut signal = T::zero();
    let mut interference = T::zero();
    for (k, &p) in rsrp_dbm.iter().enumerate() {
        if cluster.contains(&k) {
            signal += db_to_linear(p);
        } else {
            interference += db_to_linear(p);
        }
    }
    (signal, interference)
}

/// Pair CoMP SINR gain: SINR with `{serving, candidate}` jointly transmitting,
/// over the non-CoMP SINR of `serving`.
pub fn pcg<T: Real>(rsrp_dbm: &[T], serving: RrhId, candidate: RrhId, noise_dbm: T) -> Result<T> {
    if serving == candidate {
        return Err(Error::domain(format!(
            "pcg needs two distinct RRHs, got {serving} twice"
        )));
    }
    let joint = sinr_joint(rsrp_dbm, &[serving, candidate], noise_dbm)?;
    let single = sinr_noncomp(rsrp_dbm, serving, noise_dbm)?;
    Ok(joint / single)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::linear_to_db;
    use crate::topology::{generate_layout, LayoutConfig};

    fn model() -> ChannelModel<f64> {
        ChannelModel::default()
    }

    #[test]
    fn path_loss_reference_points() {
        let m = model();
        assert!((m.path_loss(RrhKind::Mrrh, 1000.0).unwrap() - 128.1).abs() < 1e-12);
        assert!((m.path_loss(RrhKind::Mrrh, 10_000.0).unwrap() - 165.7).abs() < 1e-12);
        // 140.7 + 36.7 * log10(0.1)
        assert!((m.path_loss(RrhKind::Srrh, 100.0).unwrap() - 104.0).abs() < 1e-12);
    }

    #[test]
    fn path_loss_clamps_and_rejects_non_finite() {
        let m = model();
        let at_min = m.path_loss(RrhKind::Mrrh, 10.0).unwrap();
        assert_eq!(m.path_loss(RrhKind::Mrrh, 0.0).unwrap(), at_min);
        assert_eq!(m.path_loss(RrhKind::Mrrh, 3.0).unwrap(), at_min);
        assert!(m.path_loss(RrhKind::Srrh, f64::NAN).is_err());
        assert!(m.path_loss(RrhKind::Srrh, f64::INFINITY).is_err());
        let mut prev = f64::NEG_INFINITY;
        for d in (1..200).map(|i| i as f64 * 17.0) {
            let pl = m.path_loss(RrhKind::Srrh, d).unwrap();
            assert!(pl >= prev);
            prev = pl;
        }
    }

    #[test]
    fn rsrp_arithmetic() {
        let layout = generate_layout(&LayoutConfig::default(), 0).unwrap();
        let mut r = layout.rrhs[0].clone();
        r.position = Point::new(0.0, 0.0);
        let ue = Point::new(1000.0, 0.0);
        let m = model();
        assert!((m.rsrp(&r, ue, 0.0).unwrap() + 82.1).abs() < 1e-12);
        let diff = m.rsrp(&r, ue, 8.0).unwrap() - m.rsrp(&r, ue, 0.0).unwrap();
        assert!((diff - 8.0).abs() < 1e-12);
    }

    #[test]
    fn rsrp_ranking_matches_recomputation() {
        let cfg = LayoutConfig {
            mrrh_count: 1,
            srrh_count: 2,
            ..LayoutConfig::default()
        };
        let layout = generate_layout(&cfg, 4).unwrap();
        let m = model();
        let ue = Point::new(300.0, 900.0);
        let lb = m.link_budget(&layout, 0, ue, 4).unwrap();
        let mut expected: Vec<(f64, usize)> = layout
            .rrhs
            .iter()
            .map(|r| {
                let d = r.position.distance(&ue).max(10.0) / 1000.0;
                let (a, b) = if r.kind == RrhKind::Mrrh { (128.1, 37.6) } else { (140.7, 36.7) };
                (r.tx_power_dbm - (a + b * d.log10()) + m.shadow(4, stream::SHADOW, r, 0), r.id)
            })
            .collect();
        expected.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut got: Vec<(f64, usize)> = lb.rsrp_dbm.iter().copied().zip(0..).collect();
        got.sort_by(|a, b| b.0.total_cmp(&a.0));
        assert_eq!(
            got.iter().map(|g| g.1).collect::<Vec<_>>(),
            expected.iter().map(|e| e.1).collect::<Vec<_>>()
        );
        assert_eq!(lb.serving, expected[0].1);
        for (g, e) in got.iter().zip(&expected) {
            assert!((g.0 - e.0).abs() < 1e-9);
        }
    }

    #[test]
    fn sinr_basics() {
        // one RRH at noise level
        assert!((sinr_noncomp(&[-104.0f64], 0, -104.0).unwrap() - 1.0).abs() < 1e-12);
        // two equal RRHs, vanishing noise
        let s = sinr_noncomp(&[-60.0f64, -60.0], 0, -400.0).unwrap();
        assert!((s - 1.0).abs() < 1e-12);
        assert!(sinr_noncomp::<f64>(&[], 0, -104.0).is_err());
        assert_eq!(sinr_noncomp(&[-60.0], 3, -104.0), Err(Error::UnknownRrh(3)));
    }

    #[test]
    fn sinr_noncomp_matches_power_sum() {
        let links: [f64; 5] = [-71.3, -80.2, -65.9, -99.0, -88.8];
        let noise = -104.0;
        for serving in 0..links.len() {
            let mw = |db: f64| 10f64.powf(db / 10.0);
            let mut interf = 0.0;
            for (k, &p) in links.iter().enumerate() {
                if k != serving {
                    interf += mw(p);
                }
            }
            let oracle = mw(links[serving]) / (interf + mw(noise));
            let got = sinr_noncomp(&links, serving, noise).unwrap();
            assert!(((got - oracle) / oracle).abs() < 1e-12);
        }
    }

    #[test]
    fn joint_reductions() {
        let links = [-70.0, -75.0, -80.0];
        let noise = -104.0;
        assert_eq!(
            sinr_joint(&links, &[1], noise).unwrap(),
            sinr_noncomp(&links, 1, noise).unwrap()
        );
        let all = sinr_joint(&links, &[0, 1, 2], noise).unwrap();
        let snr = links.iter().map(|&p| db_to_linear(p)).sum::<f64>() / db_to_linear(noise);
        assert!(((all - snr) / snr).abs() < 1e-12);
        assert!(sinr_joint(&links, &[], noise).is_err());
    }

    #[test]
    fn equidistant_pair_doubles_signal() {
        // UE halfway between two identical sites plus a third far away
        let links: [f64; 3] = [-80.0, -80.0, -95.0];
        let noise = -104.0;
        let single = sinr_noncomp(&links, 0, noise).unwrap();
        let joint = sinr_joint(&links, &[0, 1], noise).unwrap();
        let p = db_to_linear(-80.0);
        let far = db_to_linear(-95.0);
        let n = db_to_linear(noise);
        assert!((single - p / (p + far + n)).abs() / single < 1e-12);
        assert!((joint - 2.0 * p / (far + n)).abs() / joint < 1e-12);
    }

    #[test]
    fn pcg_cases() {
        let noise = -104.0;
        assert!(pcg(&[-70.0, -60.0], 0, 0, noise).is_err());
        let weak = pcg(&[-70.0f64, -400.0, -80.0], 0, 1, noise).unwrap();
        assert!((weak - 1.0).abs() < 1e-12);
        let strong = pcg(&[-70.0, -72.0, -85.0], 0, 1, noise).unwrap();
        assert!(strong > 1.0);

        // three sites on a line at x = 0, 500, 1000 m; UE at x = 250 m
        let m = model();
        let rrh_at = |x: f64| Rrh {
            id: 0,
            kind: RrhKind::Mrrh,
            position: Point::new(x, 0.0),
            tx_power_dbm: 46.0,
            bbu_pool: 0,
        };
        let ue = Point::new(250.0, 0.0);
        let links: Vec<f64> = [0.0, 500.0, 1000.0]
            .iter()
            .map(|&x| m.rsrp(&rrh_at(x), ue, 0.0).unwrap())
            .collect();
        // hand evaluation: PL(250) = 128.1 + 37.6 log10(0.25), PL(750) = 128.1 + 37.6 log10(0.75)
        let p_near = 10f64.powf((46.0 - (128.1 + 37.6 * 0.25f64.log10())) / 10.0);
        let p_far = 10f64.powf((46.0 - (128.1 + 37.6 * 0.75f64.log10())) / 10.0);
        let n = 10f64.powf(-10.4);
        let expected = ((2.0 * p_near) / (p_far + n)) / (p_near / (p_near + p_far + n));
        let got = pcg(&links, 0, 1, noise).unwrap();
        assert!((got - expected).abs() / expected < 1e-12);
    }

    #[test]
    fn generic_over_f32() {
        let m = ChannelModel::<f32>::default();
        assert!((m.path_loss(RrhKind::Mrrh, 1000.0).unwrap() - 128.1).abs() < 1e-4);
        let g = pcg(&[-70.0f32, -72.0, -85.0], 0, 1, -104.0).unwrap();
        assert!(g > 1.0);
        assert!((linear_to_db(db_to_linear(-3.0f32)) + 3.0).abs() < 1e-5);
    }
}
