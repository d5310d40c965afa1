use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logic::Action;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentKind {
    Car,
    Pedestrian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Heading {
    North,
    East,
    South,
    West,
}

impl Heading {
    /// Unit step; `y` grows southwards.
    pub fn delta(self) -> (i32, i32) {
        match self {
            Heading::North => (0, -1),
            Heading::East => (1, 0),
            Heading::South => (0, 1),
            Heading::West => (-1, 0),
        }
    }

    pub fn reverse(self) -> Self {
        match self {
            Heading::North => Heading::South,
            Heading::East => Heading::West,
            Heading::South => Heading::North,
            Heading::West => Heading::East,
        }
    }

    pub fn left(self) -> Self {
        match self {
            Heading::North => Heading::West,
            Heading::East => Heading::North,
            Heading::South => Heading::East,
            Heading::West => Heading::South,
        }
    }

    pub fn right(self) -> Self {
        self.left().reverse()
    }

    pub fn is_horizontal(self) -> bool {
        matches!(self, Heading::East | Heading::West)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub x: i32,
    pub y: i32,
}

impl Cell {
    pub fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    pub fn chebyshev(self, other: Cell) -> i32 {
        (self.x - other.x).abs().max((self.y - other.y).abs())
    }

    pub fn manhattan(self, other: Cell) -> i32 {
        (self.x - other.x).abs() + (self.y - other.y).abs()
    }

    pub fn offset(self, h: Heading, n: i32) -> Cell {
        let (dx, dy) = h.delta();
        Cell::new(self.x + dx * n, self.y + dy * n)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Agent {
    pub id: u32,
    pub kind: AgentKind,
    pub pos: Cell,
    pub heading: Heading,
    /// Action decided at the previous step (`Normal` before the first).
    pub last_action: Action,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub grid_size: u32,
    /// Distance between parallel roads; road lines sit at
    /// `spacing/2 + m*spacing`.
    #[serde(default = "default_spacing")]
    pub road_spacing: u32,
    pub cars: u32,
    pub pedestrians: u32,
}

fn default_spacing() -> u32 {
    10
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.road_spacing < 2 {
            return Err(Error::config("road_spacing must be at least 2"));
        }
        if self.grid_size <= self.road_spacing / 2 {
            return Err(Error::config(format!(
                "grid of size {} holds no road with spacing {}",
                self.grid_size, self.road_spacing
            )));
        }
        Ok(())
    }
}

/// Road lattice and intersections of a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoadNetwork {
    pub grid_size: i32,
    pub spacing: i32,
}

impl RoadNetwork {
    pub fn is_road_line(&self, c: i32) -> bool {
        c >= 0 && c < self.grid_size && c % self.spacing == self.spacing / 2
    }

    pub fn lines(&self) -> impl Iterator<Item = i32> + '_ {
        (0..self.grid_size).filter(|&c| self.is_road_line(c))
    }

    pub fn in_grid(&self, c: Cell) -> bool {
        c.x >= 0 && c.y >= 0 && c.x < self.grid_size && c.y < self.grid_size
    }

    pub fn is_road(&self, c: Cell) -> bool {
        self.in_grid(c) && (self.is_road_line(c.x) || self.is_road_line(c.y))
    }

    pub fn is_crossing(&self, c: Cell) -> bool {
        self.is_road_line(c.x) && self.is_road_line(c.y)
    }

    pub fn crossings(&self) -> Vec<Cell> {
        let lines: Vec<_> = self.lines().collect();
        lines
            .iter()
            .flat_map(|&x| lines.iter().map(move |&y| Cell::new(x, y)))
            .collect()
    }

    /// Centre of the intersection region (3x3 around a crossing) holding `c`.
    pub fn intersection_of(&self, c: Cell) -> Option<Cell> {
        let snap =
            |v: i32| -> Option<i32> { (-1..=1).map(|d| v + d).find(|&w| self.is_road_line(w)) };
        let centre = Cell::new(snap(c.x)?, snap(c.y)?);
        (centre.chebyshev(c) <= 1).then_some(centre)
    }

    /// Intersection the agent is in, or else the next crossing along its
    /// heading within one road spacing.
    pub fn target_intersection(&self, pos: Cell, heading: Heading) -> Option<Cell> {
        if let Some(c) = self.intersection_of(pos) {
            return Some(c);
        }
        (1..=self.spacing)
            .map(|n| pos.offset(heading, n))
            .take_while(|c| self.in_grid(*c))
            .find(|c| self.is_crossing(*c))
    }

    pub fn road_cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for y in 0..self.grid_size {
            for x in 0..self.grid_size {
                let c = Cell::new(x, y);
                if self.is_road(c) {
                    out.push(c);
                }
            }
        }
        out
    }

    /// Headings that stay on the road from `c`.
    fn road_headings(&self, c: Cell) -> Vec<Heading> {
        let mut hs = Vec::new();
        if self.is_road_line(c.y) {
            hs.extend([Heading::East, Heading::West]);
        }
        if self.is_road_line(c.x) {
            hs.extend([Heading::North, Heading::South]);
        }
        hs
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorldState {
    pub roads: RoadNetwork,
    /// Sorted by id; ids are `0..agents.len()`.
    pub agents: Vec<Agent>,
    pub step: u64,
    pub seed: u64,
}

/// Places agents on distinct road cells, cars first, reproducibly from `seed`.
pub fn init_world(config: &SimConfig, seed: u64) -> Result<WorldState> {
    config.validate()?;
    let roads = RoadNetwork {
        grid_size: config.grid_size as i32,
        spacing: config.road_spacing as i32,
    };
    let cells = roads.road_cells();
    let total = (config.cars + config.pedestrians) as usize;
    if total > cells.len() {
        return Err(Error::config(format!(
            "{total} agents do not fit on {} road cells",
            cells.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chosen = rand::seq::index::sample(&mut rng, cells.len(), total);
    let agents = chosen
        .into_iter()
        .enumerate()
        .map(|(id, idx)| {
            let pos = cells[idx];
            let headings = roads.road_headings(pos);
            let heading = headings[rng.random_range(0..headings.len())];
            let kind = if (id as u32) < config.cars {
                AgentKind::Car
            } else {
                AgentKind::Pedestrian
            };
            Agent {
                id: id as u32,
                kind,
                pos,
                heading,
                last_action: Action::Normal,
            }
        })
        .collect();
    Ok(WorldState {
        roads,
        agents,
        step: 0,
        seed,
    })
}

/// Stateless seed mixing (splitmix64 finaliser over the folded inputs).
pub fn mix_seed(parts: &[u64]) -> u64 {
    let mut h: u64 = 0x9E37_79B9_7F4A_7C15;
    for &p in parts {
        h ^= p
            .wrapping_add(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(h << 6)
            .wrapping_add(h >> 2);
        let mut z = h;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        h = z ^ (z >> 31);
    }
    h
}

/// Advances every agent by its action's speed along the road lattice.
/// Agents pick straight/left/right at crossings and turn back at the grid
/// edge. Turn choices depend only on `(seed, step, agent id, move index)`.
pub fn step(world: &WorldState, actions: &[Action]) -> WorldState {
    assert_eq!(
        actions.len(),
        world.agents.len(),
        "one action per agent required"
    );
    let roads = world.roads;
    let agents = world
        .agents
        .iter()
        .zip(actions)
        .map(|(agent, &action)| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(mix_seed(&[world.seed, world.step, u64::from(agent.id)]));
            let mut pos = agent.pos;
            let mut heading = agent.heading;
            for _ in 0..action.speed() {
                let mut next = pos.offset(heading, 1);
                if !roads.is_road(next) {
                    heading = heading.reverse();
                    next = pos.offset(heading, 1);
                    if !roads.is_road(next) {
                        break;
                    }
                }
                pos = next;
                if roads.is_crossing(pos) {
                    let roll: u32 = rng.random_range(0..4);
                    heading = match roll {
                        0 => heading.left(),
                        1 => heading.right(),
                        _ => heading,
                    };
                }
            }
            Agent {
                pos,
                heading,
                last_action: action,
                ..agent.clone()
            }
        })
        .collect();
    WorldState {
        roads,
        agents,
        step: world.step + 1,
        seed: world.seed,
    }
}

impl WorldState {
    pub fn agent(&self, id: u32) -> Option<&Agent> {
        self.agents.get(id as usize).filter(|a| a.id == id)
    }

    pub fn intersections(&self) -> Vec<Cell> {
        self.roads.crossings()
    }

    pub fn occupied_cells(&self) -> BTreeSet<Cell> {
        self.agents.iter().map(|a| a.pos).collect()
    }
}
