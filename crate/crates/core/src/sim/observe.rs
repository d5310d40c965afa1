//! Ground-truth grounding of (ego, entity) pairs and radius queries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logic::{ground_with, Action, EvidenceItem, PredicateCategory, QSentence, SlotMap};

use super::world::{Agent, AgentKind, Cell, WorldState};

/// Chebyshev radius of `Near`.
pub const NEAR_RADIUS: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservationConfig {
    pub r_fov: u32,
    pub r_vic: u32,
}

impl ObservationConfig {
    pub fn new(r_fov: u32, r_vic: u32) -> Result<Self> {
        let cfg = Self { r_fov, r_vic };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.r_fov == 0 || self.r_fov > self.r_vic {
            return Err(Error::config(format!(
                "need 0 < r_fov <= r_vic, got r_fov = {} and r_vic = {}",
                self.r_fov, self.r_vic
            )));
        }
        Ok(())
    }
}

/// Signed (forward, lateral) offset of `target` in `agent`'s frame.
fn frame(agent: &Agent, target: Cell) -> (i32, i32) {
    let (hx, hy) = agent.heading.delta();
    let (dx, dy) = (target.x - agent.pos.x, target.y - agent.pos.y);
    (dx * hx + dy * hy, (dx * hy - dy * hx).abs())
}

/// Truth value of one predicate occurrence for the pair `(ego, x)`, or
/// `None` if the vocabulary names a predicate the simulator cannot ground.
pub fn predicate_value(
    world: &WorldState,
    ego: &Agent,
    x: &Agent,
    category: PredicateCategory,
    name: &str,
) -> Option<bool> {
    use PredicateCategory::*;
    let roads = &world.roads;
    let value = match (category, name) {
        (MonadicOnEntity, "IsPedestrian") => x.kind == AgentKind::Pedestrian,
        (MonadicOnEntity, "IsCar") => x.kind == AgentKind::Car,
        (MonadicOnEntity, "IsStopped") => x.last_action == Action::Stop,
        (MonadicOnEntity, "IsFast") => x.last_action == Action::Fast,
        (DyadicEgoEntity, "InIntersection") => roads
            .target_intersection(ego.pos, ego.heading)
            .is_some_and(|centre| centre.chebyshev(x.pos) <= 1),
        (DyadicEgoEntity, "Ahead") => {
            let (fwd, lat) = frame(ego, x.pos);
            fwd > 0 && lat <= 1
        }
        (DyadicEgoEntity, "Near") => ego.pos.chebyshev(x.pos) <= NEAR_RADIUS,
        (DyadicEgoEntity, "SameRoad") => {
            if ego.heading.is_horizontal() {
                x.pos.y == ego.pos.y
            } else {
                x.pos.x == ego.pos.x
            }
        }
        (DyadicEntityEgo, "Approaching") => {
            x.pos.offset(x.heading, 1).manhattan(ego.pos) < x.pos.manhattan(ego.pos)
        }
        (DyadicEntityEgo, "Following") => {
            let (fwd, lat) = frame(ego, x.pos);
            x.heading == ego.heading && fwd < 0 && lat <= 1
        }
        _ => return None,
    };
    Some(value)
}

pub fn ground_entity(
    world: &WorldState,
    ego: &Agent,
    x: &Agent,
    slots: &SlotMap,
) -> Result<QSentence> {
    ground_with(slots, |category, name| {
        predicate_value(world, ego, x, category, name)
    })
}

fn ego_agent(world: &WorldState, ego: u32) -> Result<&Agent> {
    world
        .agent(ego)
        .ok_or_else(|| Error::config(format!("no agent with id {ego}")))
}

fn within(world: &WorldState, ego: u32, radius: u32) -> Result<Vec<u32>> {
    let e = ego_agent(world, ego)?;
    Ok(world
        .agents
        .iter()
        .filter(|a| a.id != ego && e.pos.chebyshev(a.pos) <= radius as i32)
        .map(|a| a.id)
        .collect())
}

/// Entities within the closed Chebyshev ball of radius `r_fov`.
pub fn fov_entities(world: &WorldState, ego: u32, obs: &ObservationConfig) -> Result<Vec<u32>> {
    within(world, ego, obs.r_fov)
}

/// Entities within the closed Chebyshev ball of radius `r_vic`.
pub fn vicinity_entities(
    world: &WorldState,
    ego: u32,
    obs: &ObservationConfig,
) -> Result<Vec<u32>> {
    within(world, ego, obs.r_vic)
}

/// Grounds the given entities against `ego`.
pub fn observe_entities(
    world: &WorldState,
    ego: u32,
    entities: &[u32],
    slots: &SlotMap,
) -> Result<Vec<EvidenceItem>> {
    let e = ego_agent(world, ego)?;
    entities
        .iter()
        .map(|&id| {
            let x = ego_agent(world, id)?;
            Ok(EvidenceItem {
                entity_id: id,
                q: ground_entity(world, e, x, slots)?,
            })
        })
        .collect()
}

pub fn observe_fov(
    world: &WorldState,
    ego: u32,
    obs: &ObservationConfig,
    slots: &SlotMap,
) -> Result<Vec<EvidenceItem>> {
    observe_entities(world, ego, &fov_entities(world, ego, obs)?, slots)
}
