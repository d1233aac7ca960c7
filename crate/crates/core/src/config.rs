//! Run configuration. Every tunable lives here; defaults reproduce the
//! published parameter tables, with behavioral knobs the model leaves open
//! set to the values checked in with the simulator.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::memory::{ExchangeDiscounts, ForgettingRates};
use crate::needs::{NeedVec, NeedWeights};
use crate::plans::SignalTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioId {
    S1,
    S2,
    S3,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 3] = [ScenarioId::S1, ScenarioId::S2, ScenarioId::S3];

    pub fn groups(self) -> u8 {
        match self {
            ScenarioId::S1 => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScenarioId::S1 => "s1",
            ScenarioId::S2 => "s2",
            ScenarioId::S3 => "s3",
        })
    }
}

impl FromStr for ScenarioId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "s1" | "1" => Ok(ScenarioId::S1),
            "s2" | "2" => Ok(ScenarioId::S2),
            "s3" | "3" => Ok(ScenarioId::S3),
            _ => Err(Error::Config(format!("unknown scenario {s:?}"))),
        }
    }
}

/// Normal distribution parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gaussian {
    pub mu: f64,
    pub sigma: f64,
}

impl Gaussian {
    pub const fn new(mu: f64, sigma: f64) -> Self {
        Self { mu, sigma }
    }

    pub const fn fixed(v: f64) -> Self {
        Self { mu: v, sigma: 0.0 }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.sigma == 0.0 {
            return self.mu;
        }
        Normal::new(self.mu, self.sigma)
            .expect("sigma validated non-negative")
            .sample(rng)
    }

    fn check(&self, what: &str) -> Result<()> {
        if !self.mu.is_finite() || !self.sigma.is_finite() || self.sigma < 0.0 {
            return Err(Error::Config(format!(
                "{what}: invalid normal({}, {})",
                self.mu, self.sigma
            )));
        }
        Ok(())
    }
}

/// One distribution per need.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeedDists {
    pub pain_avoidance: Gaussian,
    pub energy: Gaussian,
    pub affiliation: Gaussian,
    pub certainty: Gaussian,
    pub competence: Gaussian,
}

impl NeedDists {
    pub fn as_array(&self) -> [Gaussian; 5] {
        [
            self.pain_avoidance,
            self.energy,
            self.affiliation,
            self.certainty,
            self.competence,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PersonalitySource {
    /// Published rosters for group seeds that have one, generated otherwise.
    Fixtures,
    Generated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioId,
    pub group_seed: u64,
    pub sim_seed: u64,
    pub ticks: u64,
    pub agents_per_group: usize,
    /// Map file; the built-in map when absent.
    pub map: Option<PathBuf>,
    pub personality: PersonalitySource,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioId::S1,
            group_seed: 1,
            sim_seed: 1,
            ticks: 5000,
            agents_per_group: 10,
            map: None,
            personality: PersonalitySource::Fixtures,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorldParams {
    /// Per-tick spawn probability at each food spawn point.
    pub food_rate: f64,
    /// Units a spawn point can hold; spawning pauses while full.
    pub max_food_per_tile: u32,
    /// Sensing and shout range in tiles.
    pub view_range: u32,
    /// Chance that a blocked mover sidesteps instead of waiting.
    pub sidestep_probability: f64,
}

impl Default for WorldParams {
    fn default() -> Self {
        Self {
            food_rate: 0.02,
            max_food_per_tile: 3,
            view_range: 4,
            sidestep_probability: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HealthParams {
    pub max: i32,
    pub damage: Gaussian,
    pub heal: Gaussian,
    /// Pain-avoidance displeasure per point of damage taken.
    pub pain_per_damage: f64,
    /// Victims below this health flee rather than fight.
    pub flee_below: i32,
    /// Visible agents below this health are candidates for healing.
    pub heal_below: i32,
    /// Food units an agent can carry.
    pub storage_capacity: u32,
}

impl Default for HealthParams {
    fn default() -> Self {
        Self {
            max: 100,
            damage: Gaussian::new(11.0 / 6.0, 6.5),
            heal: Gaussian::new(5.0 / 3.0, 10.0),
            pain_per_damage: 0.01,
            flee_below: 50,
            heal_below: 80,
            storage_capacity: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NeedParams {
    pub weights: NeedWeights,
    /// Initial tank level as a fraction of the set value.
    pub initial_fill: NeedVec,
}

impl Default for NeedParams {
    fn default() -> Self {
        Self {
            weights: NeedWeights::default(),
            initial_fill: NeedVec::new(1.0, 1.0, 1.0, 0.5, 0.5),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PersonalityParams {
    pub set_values: NeedDists,
    pub leakage: NeedDists,
    /// Learning rate for success probability and expected satisfaction.
    pub alpha_pr: Gaussian,
}

impl Default for PersonalityParams {
    fn default() -> Self {
        Self {
            set_values: NeedDists {
                pain_avoidance: Gaussian::new(0.85, 0.03),
                energy: Gaussian::new(0.8, 0.005),
                affiliation: Gaussian::new(0.8, 0.005),
                certainty: Gaussian::new(0.8, 0.005),
                competence: Gaussian::fixed(1.0),
            },
            leakage: NeedDists {
                pain_avoidance: Gaussian::fixed(0.0),
                energy: Gaussian::new(0.005, 0.00033),
                affiliation: Gaussian::new(0.005, 0.00033),
                certainty: Gaussian::new(0.005, 0.00033),
                competence: Gaussian::new(0.005, 0.00033),
            },
            alpha_pr: Gaussian::new(0.3, 0.05),
        }
    }
}

/// First-impression score distributions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SocialInit {
    pub same_group: Gaussian,
    pub opposing_s2: Gaussian,
    pub opposing_s3: Gaussian,
}

impl Default for SocialInit {
    fn default() -> Self {
        Self {
            same_group: Gaussian::new(0.75, 0.05),
            opposing_s2: Gaussian::new(-0.9, 0.05),
            opposing_s3: Gaussian::new(-0.5, 0.05),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SocialParams {
    pub init: SocialInit,
    /// Score change after a successful cooperative plan.
    pub reward: f64,
    /// Score change between attacker and victim per hit.
    pub attack_penalty: f64,
}

impl Default for SocialParams {
    fn default() -> Self {
        Self {
            init: SocialInit::default(),
            reward: 0.1,
            attack_penalty: -0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MemoryParams {
    pub forgetting: ForgettingRates,
    pub exchange: ExchangeDiscounts,
    /// Tiles each side shares in a location exchange.
    pub tiles_per_exchange: usize,
}

impl Default for MemoryParams {
    fn default() -> Self {
        Self {
            forgetting: ForgettingRates::default(),
            exchange: ExchangeDiscounts::default(),
            tiles_per_exchange: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MotiveParams {
    /// Deadband protecting the current motive.
    pub tau: f64,
    /// Weight of success probability in the competence indicator.
    pub alpha_c: f64,
}

impl Default for MotiveParams {
    fn default() -> Self {
        Self {
            tau: 0.02,
            alpha_c: 0.5,
        }
    }
}

/// Situational urgency bonuses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UrgencyParams {
    /// CollectFood while food is in view.
    pub food: f64,
    /// Flee while under attack and deciding not to fight.
    pub flee: f64,
    /// GiveFood, GoHeal or assisting, for requests from friends.
    pub help: f64,
    /// Engage toward an attacker when fighting back.
    pub retaliate: f64,
    /// Answering an exchange request.
    pub exchange: f64,
}

impl Default for UrgencyParams {
    fn default() -> Self {
        Self {
            food: 0.2,
            flee: 0.6,
            help: 0.15,
            retaliate: 0.3,
            exchange: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlanParams {
    /// Ticks a caller waits for food or healing.
    pub request_wait: u32,
    /// Ticks an incoming request stays actionable.
    pub request_ttl: u64,
    /// Ticks an agent counts as under attack after a hit.
    pub attack_memory: u64,
    /// Upper bound on the duration of any plan.
    pub max_plan_ticks: u64,
    /// Random destinations tried by SearchFood before giving up.
    pub search_legs: u32,
    /// Food tiles within this distance belong to one cluster.
    pub cluster_radius: u32,
    /// Nearest known clusters offered as food targets.
    pub nearest_clusters: usize,
    /// Ticks a cluster is skipped after it was found empty.
    pub cluster_cooldown: u64,
    /// Minimum distance between a flee destination and the attacker.
    pub flee_distance: u32,
}

impl Default for PlanParams {
    fn default() -> Self {
        Self {
            request_wait: 5,
            request_ttl: 5,
            attack_memory: 10,
            max_plan_ticks: 60,
            search_legs: 3,
            cluster_radius: 2,
            nearest_clusters: 5,
            cluster_cooldown: 100,
            flee_distance: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    pub world: WorldParams,
    pub health: HealthParams,
    pub needs: NeedParams,
    pub personality: PersonalityParams,
    pub social: SocialParams,
    pub memory: MemoryParams,
    pub motive: MotiveParams,
    pub urgency: UrgencyParams,
    pub plans: PlanParams,
    pub signals: SignalTable,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        // Relative map paths resolve against the config file's directory.
        if let Some(map) = &cfg.scenario.map {
            if map.is_relative() {
                if let Some(dir) = path.parent() {
                    cfg.scenario.map = Some(dir.join(map));
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        let s = &self.scenario;
        if s.agents_per_group == 0 {
            return bad("agents_per_group must be positive".into());
        }
        let w = &self.world;
        if !(0.0..=1.0).contains(&w.food_rate) {
            return bad(format!("food_rate {} outside [0, 1]", w.food_rate));
        }
        if !(0.0..=1.0).contains(&w.sidestep_probability) {
            return bad(format!(
                "sidestep_probability {} outside [0, 1]",
                w.sidestep_probability
            ));
        }
        if w.view_range == 0 {
            return bad("view_range must be positive".into());
        }
        let h = &self.health;
        if h.max <= 0 {
            return bad("health.max must be positive".into());
        }
        h.damage.check("health.damage")?;
        h.heal.check("health.heal")?;
        for g in self.personality.set_values.as_array() {
            g.check("personality.set_values")?;
        }
        for g in self.personality.leakage.as_array() {
            g.check("personality.leakage")?;
        }
        self.personality.alpha_pr.check("personality.alpha_pr")?;
        let si = &self.social.init;
        si.same_group.check("social.init.same_group")?;
        si.opposing_s2.check("social.init.opposing_s2")?;
        si.opposing_s3.check("social.init.opposing_s3")?;
        let f = &self.memory.forgetting;
        for (name, v) in [
            ("location_positive", f.location_positive),
            ("location_negative", f.location_negative),
            ("social_positive", f.social_positive),
            ("social_negative", f.social_negative),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("forgetting.{name} {v} outside [0, 1]"));
            }
        }
        let x = &self.memory.exchange;
        for v in x
            .location
            .0
            .iter()
            .chain([x.social_known, x.social_unknown].iter())
        {
            if !(0.0..=1.0).contains(v) {
                return bad(format!("exchange discount {v} outside [0, 1]"));
            }
        }
        let m = &self.motive;
        if m.tau < 0.0 || !(0.0..=1.0).contains(&m.alpha_c) {
            return bad("motive.tau must be >= 0 and alpha_c in [0, 1]".into());
        }
        let u = &self.urgency;
        for v in [u.food, u.flee, u.help, u.retaliate, u.exchange] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("urgency {v} must be finite and >= 0"));
            }
        }
        if self.plans.max_plan_ticks == 0 {
            return bad("plans.max_plan_ticks must be positive".into());
        }
        for v in self
            .needs
            .weights
            .0
             .0
            .iter()
            .chain(self.needs.initial_fill.0.iter())
        {
            if !(*v >= 0.0 && v.is_finite()) {
                return bad(format!("need parameter {v} must be finite and >= 0"));
            }
        }
        self.signals.validate()
    }
}
