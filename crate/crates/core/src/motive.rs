//! Motive strength and selection with a flutter deadband.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::agent::AgentId;
use crate::hexgrid::HexCoord;
use crate::needs::NeedVec;
use crate::plans::PlanId;

/// What a motive is directed at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Target {
    None,
    Agent(AgentId),
    Tile(HexCoord),
    /// A food cluster, identified by its center tile.
    Cluster(HexCoord),
    /// The agent's own food storage.
    Storage,
}

impl Target {
    pub fn agent(self) -> Option<AgentId> {
        match self {
            Target::Agent(a) => Some(a),
            _ => None,
        }
    }

    pub fn tile(self) -> Option<HexCoord> {
        match self {
            Target::Tile(c) | Target::Cluster(c) => Some(c),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Motive {
    pub plan: PlanId,
    pub target: Target,
    pub strength: f64,
}

impl Motive {
    pub fn new(plan: PlanId, target: Target, strength: f64) -> Self {
        Self {
            plan,
            target,
            strength,
        }
    }

    /// Same plan aimed at the same target.
    pub fn same_as(&self, other: &Motive) -> bool {
        self.plan == other.plan && self.target == other.target
    }
}

/// `m' = sum_i n_i * E_i`
pub fn preliminary_strength(indicators: &NeedVec, expected: &NeedVec) -> f64 {
    indicators.dot(expected)
}

/// `c = (1 - alpha_c) * is_competence + alpha_c * Pr`
pub fn competence_indicator(is_competence: f64, pr: f64, alpha_c: f64) -> f64 {
    (1.0 - alpha_c) * is_competence + alpha_c * pr
}

/// `m = (m' + urgency) * c`
pub fn motive_strength(preliminary: f64, urgency: f64, competence: f64) -> f64 {
    (preliminary + urgency) * competence
}

/// Total order used to rank candidates: stronger first, then plan order,
/// then target order.
pub fn rank(a: &Motive, b: &Motive) -> Ordering {
    b.strength
        .total_cmp(&a.strength)
        .then(a.plan.cmp(&b.plan))
        .then(a.target.cmp(&b.target))
}

/// Best candidate under [`rank`].
pub fn best_candidate(candidates: &[Motive]) -> Option<Motive> {
    candidates.iter().min_by(|a, b| rank(a, b)).copied()
}

/// Keeps `current` unless some candidate beats its strength by more than
/// `tau`. `current.strength` must be the freshly recomputed value.
pub fn select_motive(current: Option<&Motive>, candidates: &[Motive], tau: f64) -> Option<Motive> {
    let best = best_candidate(candidates);
    match (current, best) {
        (Some(cur), Some(best)) if best.strength <= cur.strength + tau => Some(*cur),
        (Some(cur), None) => Some(*cur),
        (_, best) => best,
    }
}
