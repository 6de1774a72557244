//! UE movement, speed classes, service mix and ON/OFF sessions.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{keyed_rng, stream, SimRng};
use crate::topology::{Point, Region, RrhId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpeedClass {
    Low,
    Medium,
    High,
}

impl SpeedClass {
    pub fn name(&self) -> &'static str {
        match self {
            SpeedClass::Low => "low",
            SpeedClass::Medium => "medium",
            SpeedClass::High => "high",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ServiceType {
    RealTime,
    NonRealTime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MobilityModel {
    #[default]
    StraightLine,
    RandomWaypoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpeedThresholds {
    pub low_max: f64,
    pub medium_max: f64,
}

impl Default for SpeedThresholds {
    fn default() -> Self {
        // 30 km/h and 60 km/h
        Self {
            low_max: 8.3,
            medium_max: 16.7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassSpeeds {
    pub low: f64,
    pub medium: f64,
    pub high: f64,
}

impl Default for ClassSpeeds {
    fn default() -> Self {
        Self {
            low: 3.0,
            medium: 12.0,
            high: 25.0,
        }
    }
}

impl ClassSpeeds {
    pub fn of(&self, class: SpeedClass) -> f64 {
        match class {
            SpeedClass::Low => self.low,
            SpeedClass::Medium => self.medium,
            SpeedClass::High => self.high,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MobilityConfig {
    /// Fraction of high-mobility users.
    pub alpha: f64,
    pub speeds_mps: ClassSpeeds,
    pub thresholds: SpeedThresholds,
    pub mean_session_s: f64,
    /// Mean gap between sessions; a UE only signals while a session runs.
    pub mean_idle_s: f64,
    pub model: MobilityModel,
}

impl Default for MobilityConfig {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            speeds_mps: ClassSpeeds::default(),
            thresholds: SpeedThresholds::default(),
            mean_session_s: 120.0,
            mean_idle_s: 60.0,
            model: MobilityModel::StraightLine,
        }
    }
}

impl MobilityConfig {
    /// Returns the offending key (relative to the mobility section) and reason.
    pub fn validate(&self) -> std::result::Result<(), (&'static str, String)> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(("alpha", format!("must lie in [0, 1], got {}", self.alpha)));
        }
        let s = &self.speeds_mps;
        if !(s.low >= 0.0 && s.low < s.medium && s.medium < s.high) {
            return Err(("speeds_mps", "speeds must satisfy 0 <= low < medium < high".into()));
        }
        let t = &self.thresholds;
        if !(t.low_max >= 0.0 && t.low_max < t.medium_max) {
            return Err(("thresholds", "need 0 <= low_max < medium_max".into()));
        }
        for class in [SpeedClass::Low, SpeedClass::Medium, SpeedClass::High] {
            if classify_speed(s.of(class), t) != Ok(class) {
                return Err((
                    "speeds_mps",
                    format!("{} speed {} falls outside its class thresholds", class.name(), s.of(class)),
                ));
            }
        }
        if !(self.mean_session_s > 0.0 && self.mean_session_s.is_finite()) {
            return Err(("mean_session_s", "must be positive".into()));
        }
        if !(self.mean_idle_s >= 0.0 && self.mean_idle_s.is_finite()) {
            return Err(("mean_idle_s", "must be non-negative".into()));
        }
        Ok(())
    }
}

pub fn classify_speed(speed: f64, thresholds: &SpeedThresholds) -> Result<SpeedClass> {
    if !(speed >= 0.0) {
        return Err(Error::domain(format!("speed must be >= 0, got {speed}")));
    }
    Ok(if speed <= thresholds.low_max {
        SpeedClass::Low
    } else if speed <= thresholds.medium_max {
        SpeedClass::Medium
    } else {
        SpeedClass::High
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct UeState {
    pub id: usize,
    pub position: Point,
    /// Velocity vector in m/s.
    pub velocity: Point,
    pub speed_class: SpeedClass,
    pub service: ServiceType,
    /// `None` while idle or after a radio link failure.
    pub serving_rrh: Option<RrhId>,
    pub active: bool,
    pub session_remaining: f64,
    pub idle_remaining: f64,
    pub waypoint: Option<Point>,
}

impl UeState {
    pub fn speed(&self) -> f64 {
        self.velocity.x.hypot(self.velocity.y)
    }
}

/// Folds a coordinate back into `[0, len]` as if it bounced off both walls.
/// Returns the folded value and whether the direction ended up reversed.
fn reflect(x: f64, len: f64) -> (f64, bool) {
    if len <= 0.0 {
        return (0.0, false);
    }
    let period = 2.0 * len;
    let m = x.rem_euclid(period);
    if m > len {
        (period - m, true)
    } else {
        (m, false)
    }
}

fn random_point(region: &Region, rng: &mut SimRng) -> Point {
    Point::new(
        rng.gen_range(0.0..=region.width_m),
        rng.gen_range(0.0..=region.height_m),
    )
}

/// Moves the UE by `dt` seconds and runs down whichever session timer is live.
///
/// Straight-line UEs bounce off the region walls; random-waypoint UEs draw a
/// new waypoint from `rng` whenever they arrive.
pub fn advance(ue: &UeState, dt: f64, region: &Region, rng: &mut SimRng) -> Result<UeState> {
    if !(dt > 0.0) {
        return Err(Error::domain(format!("time step must be positive, got {dt}")));
    }
    let mut next = ue.clone();
    match ue.waypoint {
        None => {
            let (x, flip_x) = reflect(ue.position.x + ue.velocity.x * dt, region.width_m);
            let (y, flip_y) = reflect(ue.position.y + ue.velocity.y * dt, region.height_m);
            next.position = Point::new(x, y);
            if flip_x {
                next.velocity.x = -next.velocity.x;
            }
            if flip_y {
                next.velocity.y = -next.velocity.y;
            }
        }
        Some(_) => {
            let speed = ue.speed();
            let mut budget = speed * dt;
            let mut pos = ue.position;
            let mut target = ue.waypoint.expect("waypoint");
            // bounded: each pass either ends the step or consumes a full leg
            for _ in 0..64 {
                let d = pos.distance(&target);
                if d > budget {
                    pos = Point::new(
                        pos.x + (target.x - pos.x) * budget / d,
                        pos.y + (target.y - pos.y) * budget / d,
                    );
                    break;
                }
                budget -= d;
                pos = target;
                target = random_point(region, rng);
            }
            let d = pos.distance(&target);
            if d > 0.0 {
                next.velocity = Point::new(
                    speed * (target.x - pos.x) / d,
                    speed * (target.y - pos.y) / d,
                );
            }
            next.position = pos;
            next.waypoint = Some(target);
        }
    }
    if ue.active {
        next.session_remaining = (ue.session_remaining - dt).max(0.0);
    } else {
        next.idle_remaining = (ue.idle_remaining - dt).max(0.0);
    }
    Ok(next)
}

pub fn draw_exponential(mean: f64, rng: &mut SimRng) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    Exp::new(1.0 / mean).expect("positive rate").sample(rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SessionChange {
    Started,
    Ended,
}

/// Flips between session and idle phases once the live timer has run out.
/// A new session starts with a fresh exponential holding time.
pub fn next_phase(ue: &mut UeState, cfg: &MobilityConfig, rng: &mut SimRng) -> Option<SessionChange> {
    if ue.active && ue.session_remaining <= 0.0 {
        ue.active = false;
        ue.idle_remaining = draw_exponential(cfg.mean_idle_s, rng);
        Some(SessionChange::Ended)
    } else if !ue.active && ue.idle_remaining <= 0.0 {
        ue.active = true;
        ue.session_remaining = draw_exponential(cfg.mean_session_s, rng);
        Some(SessionChange::Started)
    } else {
        None
    }
}

/// Draws `count` UEs: exactly `round(alpha * count)` high-speed users, the rest
/// alternating low/medium, services alternating within each class, all in a
/// seeded random order. Every UE starts inside a session.
pub fn sample_population(
    cfg: &MobilityConfig,
    count: usize,
    seed: u64,
    region: &Region,
) -> Result<Vec<UeState>> {
    if count == 0 {
        return Err(Error::domain("population needs at least one UE"));
    }
    cfg.validate()
        .map_err(|(k, m)| Error::Config(format!("mobility.{k}: {m}")))?;

    let mut order: Vec<usize> = (0..count).collect();
    order.shuffle(&mut keyed_rng(seed, &[stream::POPULATION]));
    let n_high = (cfg.alpha * count as f64).round() as usize;
    let mut classes = vec![SpeedClass::Low; count];
    let mut services = vec![ServiceType::RealTime; count];
    let mut seen = [0usize; 3];
    for (rank, &ue) in order.iter().enumerate() {
        let class = if rank < n_high {
            SpeedClass::High
        } else if (rank - n_high).is_multiple_of(2) {
            SpeedClass::Low
        } else {
            SpeedClass::Medium
        };
        let slot = &mut seen[class as usize];
        services[ue] = if *slot % 2 == 0 {
            ServiceType::RealTime
        } else {
            ServiceType::NonRealTime
        };
        *slot += 1;
        classes[ue] = class;
    }

    Ok((0..count)
        .map(|id| {
            let mut rng = keyed_rng(seed, &[stream::POPULATION, id as u64]);
            let speed = cfg.speeds_mps.of(classes[id]);
            let heading = rng.gen_range(0.0..std::f64::consts::TAU);
            let position = random_point(region, &mut rng);
            let session_remaining = draw_exponential(cfg.mean_session_s, &mut rng);
            let waypoint = match cfg.model {
                MobilityModel::StraightLine => None,
                MobilityModel::RandomWaypoint => Some(random_point(region, &mut rng)),
            };
            let velocity = match waypoint {
                Some(w) if w.distance(&position) > 0.0 => {
                    let d = w.distance(&position);
                    Point::new(speed * (w.x - position.x) / d, speed * (w.y - position.y) / d)
                }
                _ => Point::new(speed * heading.cos(), speed * heading.sin()),
            };
            UeState {
                id,
                position,
                velocity,
                speed_class: classes[id],
                service: services[id],
                serving_rrh: None,
                active: true,
                session_remaining,
                idle_remaining: 0.0,
                waypoint,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn region() -> Region {
        Region {
            width_m: 1000.0,
            height_m: 800.0,
        }
    }

    fn ue(position: Point, velocity: Point) -> UeState {
        UeState {
            id: 0,
            position,
            velocity,
            speed_class: SpeedClass::Low,
            service: ServiceType::RealTime,
            serving_rrh: None,
            active: true,
            session_remaining: 10.0,
            idle_remaining: 0.0,
            waypoint: None,
        }
    }

    #[test]
    fn kinematics() {
        let mut rng = keyed_rng(0, &[]);
        let still = ue(Point::new(5.0, 5.0), Point::default());
        assert_eq!(advance(&still, 1.0, &region(), &mut rng).unwrap().position, still.position);

        let east = ue(Point::new(100.0, 100.0), Point::new(10.0, 0.0));
        let moved = advance(&east, 5.0, &region(), &mut rng).unwrap();
        assert_eq!(moved.position, Point::new(150.0, 100.0));
        assert_eq!(moved.session_remaining, 5.0);
        assert!(advance(&east, 0.0, &region(), &mut rng).is_err());
    }

    #[test]
    fn reflects_at_walls() {
        let mut rng = keyed_rng(0, &[]);
        let u = ue(Point::new(990.0, 400.0), Point::new(20.0, 0.0));
        let next = advance(&u, 1.0, &region(), &mut rng).unwrap();
        assert!((next.position.x - 990.0).abs() < 1e-9);
        assert_eq!(next.velocity.x, -20.0);
        // several bounces in one step: 2 full widths keeps the heading
        let far = ue(Point::new(100.0, 400.0), Point::new(2000.0, 0.0));
        let next = advance(&far, 1.0, &region(), &mut rng).unwrap();
        assert!((next.position.x - 100.0).abs() < 1e-9);
        assert_eq!(next.velocity.x, 2000.0);
    }

    #[test]
    fn random_steps_stay_inside() {
        for model in [MobilityModel::StraightLine, MobilityModel::RandomWaypoint] {
            let cfg = MobilityConfig {
                alpha: 0.5,
                model,
                ..MobilityConfig::default()
            };
            let pop = sample_population(&cfg, 20, 3, &region()).unwrap();
            for mut u in pop {
                let mut rng = keyed_rng(3, &[stream::UE_MOTION, u.id as u64]);
                for _ in 0..1000 {
                    u = advance(&u, 0.7, &region(), &mut rng).unwrap();
                    assert!(region().contains(&u.position), "{:?}", u.position);
                }
            }
        }
    }

    #[test]
    fn speed_classes() {
        let t = SpeedThresholds::default();
        assert_eq!(classify_speed(0.0, &t), Ok(SpeedClass::Low));
        assert_eq!(classify_speed(8.3, &t), Ok(SpeedClass::Low));
        assert_eq!(classify_speed(8.31, &t), Ok(SpeedClass::Medium));
        assert_eq!(classify_speed(16.7, &t), Ok(SpeedClass::Medium));
        assert_eq!(classify_speed(20.0, &t), Ok(SpeedClass::High));
        assert!(classify_speed(-1.0, &t).is_err());
    }

    #[test]
    fn population_mix() {
        let all_high = MobilityConfig {
            alpha: 1.0,
            ..MobilityConfig::default()
        };
        let pop = sample_population(&all_high, 50, 1, &region()).unwrap();
        assert!(pop.iter().all(|u| u.speed_class == SpeedClass::High));
        assert!(pop.iter().all(|u| (u.speed() - 25.0).abs() < 1e-9));

        let cfg = MobilityConfig::default();
        let pop = sample_population(&cfg, 1000, 2, &region()).unwrap();
        let high = pop.iter().filter(|u| u.speed_class == SpeedClass::High).count();
        // binomial(1000, 0.1) 99% interval is roughly [76, 124]
        assert!((76..=124).contains(&high), "{high}");
        let low = pop.iter().filter(|u| u.speed_class == SpeedClass::Low).count();
        assert!(low.abs_diff(1000 - high - low) <= 1);
        let rt = pop.iter().filter(|u| u.service == ServiceType::RealTime).count();
        assert!(rt.abs_diff(500) <= 3);
        assert!(sample_population(&cfg, 0, 2, &region()).is_err());
    }

    #[test]
    fn exponential_sessions() {
        let mut rng = keyed_rng(17, &[]);
        let draws: Vec<f64> = (0..100_000).map(|_| draw_exponential(60.0, &mut rng)).collect();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        assert!((mean - 60.0).abs() / 60.0 < 0.02, "{mean}");

        // memorylessness: P(T > a + b | T > a) ~ P(T > b)
        let (a, b) = (30.0, 45.0);
        let beyond_a = draws.iter().filter(|&&t| t > a).count() as f64;
        let beyond_ab = draws.iter().filter(|&&t| t > a + b).count() as f64;
        let beyond_b = draws.iter().filter(|&&t| t > b).count() as f64 / draws.len() as f64;
        assert!((beyond_ab / beyond_a - beyond_b).abs() < 0.01);
    }

    #[test]
    fn phase_flips() {
        let cfg = MobilityConfig::default();
        let mut rng = keyed_rng(0, &[]);
        let mut u = ue(Point::default(), Point::default());
        assert_eq!(next_phase(&mut u, &cfg, &mut rng), None);
        u.session_remaining = 0.0;
        assert_eq!(next_phase(&mut u, &cfg, &mut rng), Some(SessionChange::Ended));
        assert!(!u.active);
        u.idle_remaining = 0.0;
        assert_eq!(next_phase(&mut u, &cfg, &mut rng), Some(SessionChange::Started));
        assert!(u.active && u.session_remaining > 0.0);
    }

    #[test]
    fn config_validation() {
        let bad = MobilityConfig {
            alpha: 1.5,
            ..MobilityConfig::default()
        };
        assert_eq!(bad.validate().unwrap_err().0, "alpha");
        let wrong_class = MobilityConfig {
            speeds_mps: ClassSpeeds {
                low: 9.0,
                medium: 12.0,
                high: 25.0,
            },
            ..MobilityConfig::default()
        };
        assert_eq!(wrong_class.validate().unwrap_err().0, "speeds_mps");
    }
}
