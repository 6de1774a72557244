//! HCSNet layout: macro and small RRHs, their BBU-pool membership and
//! neighbor queries.

use std::collections::BTreeSet;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{keyed_rng, stream};

pub type RrhId = usize;
pub type PoolId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn midpoint(&self, other: &Point) -> Point {
        Point::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RrhKind {
    Mrrh,
    Srrh,
}

impl fmt::Display for RrhKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RrhKind::Mrrh => "MRRH",
            RrhKind::Srrh => "SRRH",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rrh {
    pub id: RrhId,
    pub kind: RrhKind,
    pub position: Point,
    pub tx_power_dbm: f64,
    pub bbu_pool: PoolId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BbuPool {
    pub id: PoolId,
    pub member_rrhs: BTreeSet<RrhId>,
}

/// Axis-aligned deployment rectangle anchored at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub width_m: f64,
    pub height_m: f64,
}

impl Region {
    pub fn contains(&self, p: &Point) -> bool {
        (0.0..=self.width_m).contains(&p.x) && (0.0..=self.height_m).contains(&p.y)
    }

    pub fn center(&self) -> Point {
        Point::new(0.5 * self.width_m, 0.5 * self.height_m)
    }

    pub fn diagonal(&self) -> f64 {
        self.width_m.hypot(self.height_m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MacroGrid {
    /// Row-major square grid centered in the region.
    #[default]
    Square,
    /// Hexagonal rings around the region center (1, 7, 19, ... sites).
    Hex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LayoutConfig {
    pub width_m: f64,
    pub height_m: f64,
    pub mrrh_count: usize,
    pub grid: MacroGrid,
    pub inter_site_distance_m: f64,
    pub srrh_count: usize,
    pub mrrh_tx_dbm: f64,
    pub srrh_tx_dbm: f64,
    pub srrh_min_macro_distance_m: f64,
    pub pools_x: usize,
    pub pools_y: usize,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        Self {
            width_m: 1500.0,
            height_m: 1500.0,
            mrrh_count: 7,
            grid: MacroGrid::Square,
            inter_site_distance_m: 500.0,
            srrh_count: 20,
            mrrh_tx_dbm: 46.0,
            srrh_tx_dbm: 30.0,
            srrh_min_macro_distance_m: 40.0,
            pools_x: 1,
            pools_y: 1,
        }
    }
}

impl LayoutConfig {
    pub fn region(&self) -> Region {
        Region {
            width_m: self.width_m,
            height_m: self.height_m,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.width_m > 0.0 && self.height_m > 0.0) {
            return bad("region dimensions must be positive");
        }
        if self.mrrh_count + self.srrh_count == 0 {
            return bad("layout needs at least one RRH");
        }
        if !(self.inter_site_distance_m > 0.0) {
            return bad("inter-site distance must be positive");
        }
        if self.srrh_min_macro_distance_m < 0.0 {
            return bad("SRRH exclusion radius must be non-negative");
        }
        if self.pools_x == 0 || self.pools_y == 0 {
            return bad("pool tiling needs at least one tile per axis");
        }
        Ok(())
    }
}

const MAX_PLACEMENT_ATTEMPTS: usize = 10_000;
const MIN_SITE_SEPARATION_M: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkLayout {
    pub rrhs: Vec<Rrh>,
    pub pools: Vec<BbuPool>,
    pub region: Region,
    pub seed: u64,
}

fn square_grid(n: usize, isd: f64, center: Point) -> Vec<Point> {
    let cols = (n as f64).sqrt().ceil() as usize;
    let rows = n.div_ceil(cols.max(1));
    let x0 = center.x - 0.5 * (cols as f64 - 1.0) * isd;
    let y0 = center.y - 0.5 * (rows as f64 - 1.0) * isd;
    (0..n)
        .map(|i| Point::new(x0 + (i % cols) as f64 * isd, y0 + (i / cols) as f64 * isd))
        .collect()
}

fn hex_rings(n: usize, isd: f64, center: Point) -> Vec<Point> {
    // Axial directions, walked counter-clockwise.
    const DIRS: [(i64, i64); 6] = [(1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1), (0, 1)];
    let to_point = |q: i64, r: i64| {
        Point::new(
            center.x + isd * (q as f64 + 0.5 * r as f64),
            center.y + isd * (0.75_f64.sqrt() * r as f64),
        )
    };
    let mut out = vec![to_point(0, 0)];
    let mut ring = 1i64;
    while out.len() < n {
        let (mut q, mut r) = (DIRS[4].0 * ring, DIRS[4].1 * ring);
        for dir in DIRS {
            for _ in 0..ring {
                out.push(to_point(q, r));
                q += dir.0;
                r += dir.1;
            }
        }
        ring += 1;
    }
    out.truncate(n);
    out
}

/// Builds a layout that is a pure function of `(config, seed)`.
///
/// MRRHs get ids `0..mrrh_count`, SRRHs follow. Pools are the non-empty tiles
/// of a `pools_x` by `pools_y` tiling, numbered in row-major tile order.
pub fn generate_layout(config: &LayoutConfig, seed: u64) -> Result<NetworkLayout> {
    config.validate()?;
    let region = config.region();
    let macros = match config.grid {
        MacroGrid::Square => {
            square_grid(config.mrrh_count, config.inter_site_distance_m, region.center())
        }
        MacroGrid::Hex => hex_rings(config.mrrh_count, config.inter_site_distance_m, region.center()),
    };
    if let Some(p) = macros.iter().find(|p| !region.contains(p)) {
        return Err(Error::Config(format!(
            "region {}x{} m too small for {} MRRHs at {} m spacing (site at ({:.1}, {:.1}))",
            config.width_m,
            config.height_m,
            config.mrrh_count,
            config.inter_site_distance_m,
            p.x,
            p.y
        )));
    }

    let mut rng = keyed_rng(seed, &[stream::LAYOUT]);
    let mut positions = macros.clone();
    for s in 0..config.srrh_count {
        let mut placed = false;
        for _ in 0..MAX_PLACEMENT_ATTEMPTS {
            let p = Point::new(
                rng.gen_range(0.0..=config.width_m),
                rng.gen_range(0.0..=config.height_m),
            );
            let near_macro = macros
                .iter()
                .any(|m| m.distance(&p) < config.srrh_min_macro_distance_m);
            let collides = positions
                .iter()
                .any(|q| q.distance(&p) < MIN_SITE_SEPARATION_M);
            if !near_macro && !collides {
                positions.push(p);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::Config(format!(
                "region too small to place SRRH #{s} outside the {} m macro exclusion zones",
                config.srrh_min_macro_distance_m
            )));
        }
    }

    let tile_w = config.width_m / config.pools_x as f64;
    let tile_h = config.height_m / config.pools_y as f64;
    let tile_of = |p: &Point| {
        let tx = ((p.x / tile_w) as usize).min(config.pools_x - 1);
        let ty = ((p.y / tile_h) as usize).min(config.pools_y - 1);
        ty * config.pools_x + tx
    };
    let mut tile_members = vec![BTreeSet::new(); config.pools_x * config.pools_y];
    for (id, p) in positions.iter().enumerate() {
        tile_members[tile_of(p)].insert(id);
    }
    let mut pool_of = vec![0; positions.len()];
    let pools: Vec<BbuPool> = tile_members
        .into_iter()
        .filter(|m| !m.is_empty())
        .enumerate()
        .map(|(pid, member_rrhs)| {
            for &id in &member_rrhs {
                pool_of[id] = pid;
            }
            BbuPool { id: pid, member_rrhs }
        })
        .collect();

    let rrhs = positions
        .into_iter()
        .enumerate()
        .map(|(id, position)| {
            let is_macro = id < config.mrrh_count;
            Rrh {
                id,
                kind: if is_macro { RrhKind::Mrrh } else { RrhKind::Srrh },
                position,
                tx_power_dbm: if is_macro {
                    config.mrrh_tx_dbm
                } else {
                    config.srrh_tx_dbm
                },
                bbu_pool: pool_of[id],
            }
        })
        .collect();

    Ok(NetworkLayout {
        rrhs,
        pools,
        region,
        seed,
    })
}

impl NetworkLayout {
    pub fn len(&self) -> usize {
        self.rrhs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rrhs.is_empty()
    }

    pub fn rrh(&self, id: RrhId) -> Result<&Rrh> {
        self.rrhs.get(id).ok_or(Error::UnknownRrh(id))
    }

    pub fn ids_of_kind(&self, kind: RrhKind) -> impl Iterator<Item = RrhId> + '_ {
        self.rrhs.iter().filter(move |r| r.kind == kind).map(|r| r.id)
    }

    /// All other RRHs within `radius` meters (inclusive).
    pub fn neighbors_within(&self, rrh: RrhId, radius: f64) -> Result<BTreeSet<RrhId>> {
        let center = self.rrh(rrh)?.position;
        if !(radius >= 0.0) {
            return Err(Error::domain(format!("radius must be >= 0, got {radius}")));
        }
        Ok(self
            .rrhs
            .iter()
            .filter(|r| r.id != rrh && r.position.distance(&center) <= radius)
            .map(|r| r.id)
            .collect())
    }

    /// Ids of the `k` closest other RRHs, nearest first, ties to the lower id.
    pub fn nearest(&self, rrh: RrhId, k: usize) -> Result<Vec<RrhId>> {
        let center = self.rrh(rrh)?.position;
        let mut others: Vec<(f64, RrhId)> = self
            .rrhs
            .iter()
            .filter(|r| r.id != rrh)
            .map(|r| (r.position.distance(&center), r.id))
            .collect();
        others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        Ok(others.into_iter().take(k).map(|(_, id)| id).collect())
    }

    pub fn same_pool(&self, a: RrhId, b: RrhId) -> Result<bool> {
        Ok(self.rrh(a)?.bbu_pool == self.rrh(b)?.bbu_pool)
    }

    /// CSV dump: `rrh_id,kind,x_m,y_m,tx_power_dbm,pool_id`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rrh_id,kind,x_m,y_m,tx_power_dbm,pool_id\n");
        for r in &self.rrhs {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.id, r.kind, r.position.x, r.position.y, r.tx_power_dbm, r.bbu_pool
            ));
        }
        out
    }
}
