//! Grid-world traffic simulator: roads, agents, grounding and rule sets.

pub mod observe;
pub mod rules;
pub mod world;

pub use observe::{
    fov_entities, ground_entity, observe_entities, observe_fov, predicate_value, vicinity_entities,
    ObservationConfig, NEAR_RADIUS,
};
pub use rules::{decide_action, evaluate_hypotheses, RuleSet, BUILTIN_RULE_SETS};
pub use world::{
    init_world, mix_seed, step, Agent, AgentKind, Cell, Heading, RoadNetwork, SimConfig, WorldState,
};
