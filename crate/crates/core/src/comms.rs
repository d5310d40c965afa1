//! Downlink architectures: which entities an edge server can offer an ego,
//! and how `k` of them are chosen.
//!
//! * sensor-gna: roadside sensors see every entity in the ego's vicinity.
//! * single-zone-gna: one server pools the FOV uploads of every agent.
//! * multi-zone-lna: the grid is tiled into zones; a zone's server pools
//!   only the uploads of agents currently inside it.
//!
//! In all three the pool is filtered to the ego's vicinity and stripped of
//! whatever the ego already sees in its own FOV.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logic::{EvidenceItem, Hypothesis, SlotMap};
use crate::selection::{select_random, select_semantic};
use crate::sim::observe::{fov_entities, observe_entities, vicinity_entities, ObservationConfig};
use crate::sim::world::{Cell, WorldState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArchitectureKind {
    SensorGna,
    SingleZoneGna,
    MultiZoneLna,
}

impl ArchitectureKind {
    pub fn name(self) -> &'static str {
        match self {
            ArchitectureKind::SensorGna => "sensor-gna",
            ArchitectureKind::SingleZoneGna => "single-zone-gna",
            ArchitectureKind::MultiZoneLna => "multi-zone-lna",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Architecture {
    pub kind: ArchitectureKind,
    /// Zone grid `(columns, rows)`; only meaningful for multi-zone.
    #[serde(default = "one_zone")]
    pub zones: (u32, u32),
}

fn one_zone() -> (u32, u32) {
    (1, 1)
}

impl Architecture {
    pub fn sensor() -> Self {
        Self {
            kind: ArchitectureKind::SensorGna,
            zones: one_zone(),
        }
    }

    pub fn single_zone() -> Self {
        Self {
            kind: ArchitectureKind::SingleZoneGna,
            zones: one_zone(),
        }
    }

    pub fn multi_zone(columns: u32, rows: u32) -> Self {
        Self {
            kind: ArchitectureKind::MultiZoneLna,
            zones: (columns, rows),
        }
    }

    pub fn validate(&self, grid_size: u32) -> Result<()> {
        let (zx, zy) = self.zones;
        if zx == 0 || zy == 0 || zx > grid_size || zy > grid_size {
            return Err(Error::config(format!(
                "zone grid {zx}x{zy} does not tile a {grid_size}x{grid_size} grid"
            )));
        }
        if self.kind != ArchitectureKind::MultiZoneLna && self.zones != one_zone() {
            return Err(Error::config(format!(
                "{} takes no zone grid",
                self.kind.name()
            )));
        }
        Ok(())
    }

    /// Zone of a cell. Zones are half-open rectangles, so every cell lies in
    /// exactly one.
    pub fn zone_of(&self, grid_size: i32, c: Cell) -> (u32, u32) {
        let (zx, zy) = self.zones;
        let idx = |v: i32, z: u32| {
            ((v.clamp(0, grid_size - 1) as i64 * z as i64) / grid_size as i64) as u32
        };
        (idx(c.x, zx), idx(c.y, zy))
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ArchitectureKind::MultiZoneLna => {
                write!(f, "{}-{}x{}", self.kind.name(), self.zones.0, self.zones.1)
            }
            _ => f.write_str(self.kind.name()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Semantic,
    Random,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Semantic => "semantic",
            Strategy::Random => "random",
        }
    }
}

/// FOV and vicinity sets of every agent for one world snapshot.
#[derive(Debug, Clone)]
pub struct Observations {
    pub fov: Vec<Vec<u32>>,
    pub vicinity: Vec<Vec<u32>>,
}

impl Observations {
    pub fn new(world: &WorldState, obs: &ObservationConfig) -> Result<Self> {
        let mut fov = Vec::with_capacity(world.agents.len());
        let mut vicinity = Vec::with_capacity(world.agents.len());
        for a in &world.agents {
            fov.push(fov_entities(world, a.id, obs)?);
            vicinity.push(vicinity_entities(world, a.id, obs)?);
        }
        Ok(Self { fov, vicinity })
    }
}

/// Entity ids a server can offer `ego`, sorted.
pub fn pool_entities(
    world: &WorldState,
    seen: &Observations,
    ego: u32,
    arch: &Architecture,
) -> Result<Vec<u32>> {
    let e = world
        .agent(ego)
        .ok_or_else(|| Error::config(format!("no agent with id {ego}")))?;
    let own_fov: BTreeSet<u32> = seen.fov[ego as usize].iter().copied().collect();
    let vicinity = &seen.vicinity[ego as usize];
    let available: BTreeSet<u32> = match arch.kind {
        ArchitectureKind::SensorGna => vicinity.iter().copied().collect(),
        ArchitectureKind::SingleZoneGna => seen.fov.iter().flatten().copied().collect(),
        ArchitectureKind::MultiZoneLna => {
            let zone = arch.zone_of(world.roads.grid_size, e.pos);
            world
                .agents
                .iter()
                .filter(|a| arch.zone_of(world.roads.grid_size, a.pos) == zone)
                .flat_map(|a| seen.fov[a.id as usize].iter().copied())
                .collect()
        }
    };
    Ok(vicinity
        .iter()
        .copied()
        .filter(|id| available.contains(id) && !own_fov.contains(id))
        .collect())
}

/// Pool for `ego`, grounded against it.
pub fn build_pool(
    world: &WorldState,
    ego: u32,
    arch: &Architecture,
    obs: &ObservationConfig,
    slots: &SlotMap,
) -> Result<Vec<EvidenceItem>> {
    let seen = Observations::new(world, obs)?;
    let ids = pool_entities(world, &seen, ego, arch)?;
    observe_entities(world, ego, &ids, slots)
}

/// Picks at most `k` items from the pool. `k = 0` is the no-communication
/// baseline.
pub fn downlink(
    pool: &[EvidenceItem],
    hypotheses: &[Hypothesis],
    k: usize,
    strategy: Strategy,
    t: usize,
    rng_seed: u64,
    cap: u64,
) -> Result<Vec<EvidenceItem>> {
    if k == 0 {
        return Ok(Vec::new());
    }
    match strategy {
        Strategy::Semantic => select_semantic(pool, hypotheses, k, t, cap),
        Strategy::Random => Ok(select_random(pool, k, rng_seed)),
    }
}
