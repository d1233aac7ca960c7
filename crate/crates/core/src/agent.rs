//! Agents: identity, personality, the per-tick cognitive loop and plan
//! execution.
//!
//! An agent mutates only its own state during its tick. Anything that touches
//! another agent or the map is returned as an [`Effect`] and resolved by the
//! world after all agents have ticked, which then reports back through the
//! `on_*` callbacks.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{PersonalityParams, PersonalitySource, RunConfig};
use crate::error::{Error, Result};
use crate::hexgrid::{find_path, HexCoord, WorldMap};
use crate::memory::{init_social_score, LocationMemory, SocialMemory};
use crate::motive::{
    competence_indicator, motive_strength, preliminary_strength, select_motive, Motive, Target,
};
use crate::needs::{NeedId, NeedState, NeedVec};
use crate::plans::{PlanBook, PlanId};
use crate::rng::{group_stream, SimRng};
use crate::telemetry::{EndReason, Event, EventKind, FoodSource};
use crate::world::{AgentPublic, WorldView};

/// Group (1 or 2) and position within the group's roster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct AgentId {
    pub group: u8,
    pub index: u32,
}

impl AgentId {
    pub const fn new(group: u8, index: u32) -> Self {
        Self { group, index }
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.group, self.index)
    }
}

impl FromStr for AgentId {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (g, i) = s
            .split_once(':')
            .ok_or_else(|| format!("bad agent id {s:?}"))?;
        Ok(AgentId::new(
            g.parse().map_err(|_| format!("bad agent group in {s:?}"))?,
            i.parse().map_err(|_| format!("bad agent index in {s:?}"))?,
        ))
    }
}

impl From<AgentId> for String {
    fn from(id: AgentId) -> String {
        id.to_string()
    }
}

impl TryFrom<String> for AgentId {
    type Error = String;
    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Personality {
    pub name: String,
    pub set_value: NeedVec,
    pub leakage: NeedVec,
    pub alpha_pr: f64,
}

fn sample_alpha<R: Rng + ?Sized>(rng: &mut R, params: &PersonalityParams) -> f64 {
    params.alpha_pr.sample(rng).clamp(0.01, 0.99)
}

/// Draws a personality: set values clamped to [0, 1], leakages to >= 0.
pub fn generate_personality<R: Rng + ?Sized>(
    rng: &mut R,
    params: &PersonalityParams,
    name: String,
) -> Personality {
    let mut set_value = NeedVec::ZERO;
    for (n, g) in NeedId::ALL.into_iter().zip(params.set_values.as_array()) {
        set_value[n] = g.sample(rng).clamp(0.0, 1.0);
    }
    let mut leakage = NeedVec::ZERO;
    for (n, g) in NeedId::ALL.into_iter().zip(params.leakage.as_array()) {
        leakage[n] = g.sample(rng).max(0.0);
    }
    let alpha_pr = sample_alpha(rng, params);
    Personality {
        name,
        set_value,
        leakage,
        alpha_pr,
    }
}

const FIXTURES: [[&str; 2]; 3] = [
    [
        include_str!("../data/personalities/seed1_team1.csv"),
        include_str!("../data/personalities/seed1_team2.csv"),
    ],
    [
        include_str!("../data/personalities/seed2_team1.csv"),
        include_str!("../data/personalities/seed2_team2.csv"),
    ],
    [
        include_str!("../data/personalities/seed3_team1.csv"),
        include_str!("../data/personalities/seed3_team2.csv"),
    ],
];

/// Published roster for a group seed and team (1 or 2), if one exists.
pub fn fixture_text(group_seed: u64, team: u8) -> Option<&'static str> {
    let s = usize::try_from(group_seed).ok()?.checked_sub(1)?;
    let t = usize::from(team).checked_sub(1)?;
    FIXTURES.get(s)?.get(t).copied()
}

/// One roster row: pain, energy, affiliation and certainty set values, then
/// energy, affiliation, certainty and competence leakages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureRow {
    pub name: String,
    pub set_p: f64,
    pub set_e: f64,
    pub set_a: f64,
    pub set_ce: f64,
    pub leak_e: f64,
    pub leak_a: f64,
    pub leak_ce: f64,
    pub leak_co: f64,
}

impl FixtureRow {
    /// Competence set value is 1 and pain leakage 0 for every agent.
    pub fn set_value(&self) -> NeedVec {
        NeedVec::new(self.set_p, self.set_e, self.set_a, self.set_ce, 1.0)
    }

    pub fn leakage(&self) -> NeedVec {
        NeedVec::new(0.0, self.leak_e, self.leak_a, self.leak_ce, self.leak_co)
    }
}

pub fn parse_fixture(text: &str) -> Result<Vec<FixtureRow>> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let rows: std::result::Result<Vec<FixtureRow>, _> = rd.deserialize().collect();
    rows.map_err(|e| Error::Fixture(e.to_string()))
}

/// Personalities for one team. Fixture rows are used first when the source
/// allows it; any shortfall is generated from the group seed.
pub fn roster(
    group_seed: u64,
    team: u8,
    count: usize,
    params: &PersonalityParams,
    source: PersonalitySource,
) -> Result<Vec<Personality>> {
    let mut out = Vec::with_capacity(count);
    let mut alpha_rng = group_stream(group_seed, "alpha_pr", u64::from(team));
    if source == PersonalitySource::Fixtures {
        if let Some(text) = fixture_text(group_seed, team) {
            for row in parse_fixture(text)?.into_iter().take(count) {
                out.push(Personality {
                    set_value: row.set_value(),
                    leakage: row.leakage(),
                    alpha_pr: sample_alpha(&mut alpha_rng, params),
                    name: row.name,
                });
            }
        }
    }
    let mut rng = group_stream(group_seed, "personality", u64::from(team));
    while out.len() < count {
        let name = format!("T{team}-{:02}", out.len());
        out.push(generate_personality(&mut rng, params, name));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShoutKind {
    HelpAttacked,
    FoodRequest,
    HealRequest,
    SocialInfoExchange,
    LocationInfoExchange,
}

impl ShoutKind {
    pub fn exchange_plan(self) -> Option<PlanId> {
        match self {
            ShoutKind::SocialInfoExchange => Some(PlanId::ExchangeSocialInfo),
            ShoutKind::LocationInfoExchange => Some(PlanId::ExchangeLocationInfo),
            _ => None,
        }
    }

    fn for_exchange(plan: PlanId) -> ShoutKind {
        if plan == PlanId::ExchangeSocialInfo {
            ShoutKind::SocialInfoExchange
        } else {
            ShoutKind::LocationInfoExchange
        }
    }
}

/// A broadcast heard by every agent within view range of `origin`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShoutOut {
    pub kind: ShoutKind,
    pub sender: AgentId,
    /// The attacker for help calls, the addressee for exchange requests.
    pub subject: Option<AgentId>,
    pub tick: u64,
    pub origin: HexCoord,
}

/// Inter-agent actions resolved by the world after every agent has ticked.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Effect {
    Move {
        agent: AgentId,
        to: HexCoord,
    },
    /// Take one unit from the tile; `eat` consumes it instead of storing it.
    Collect {
        agent: AgentId,
        tile: HexCoord,
        eat: bool,
    },
    Hit {
        attacker: AgentId,
        victim: AgentId,
        damage: i32,
        assist: Option<AgentId>,
    },
    Heal {
        healer: AgentId,
        patient: AgentId,
        amount: i32,
    },
    Give {
        giver: AgentId,
        receiver: AgentId,
    },
    Shout(ShoutOut),
    /// The responder has adopted the matching exchange plan.
    ExchangeReply {
        responder: AgentId,
        initiator: AgentId,
        plan: PlanId,
    },
}

/// Per-tick context shared by all agents.
pub struct Ctx<'a> {
    pub config: &'a RunConfig,
    pub tick: u64,
}

/// Sinks for one agent tick.
#[derive(Debug, Default)]
pub struct TickOutput {
    pub effects: Vec<Effect>,
    pub events: Vec<Event>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Request {
    kind: ShoutKind,
    sender: AgentId,
    subject: Option<AgentId>,
    tick: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Threat {
    attacker: AgentId,
    since: u64,
    flee: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoodCluster {
    pub center: HexCoord,
    pub members: Vec<HexCoord>,
    pub failed_at: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Phase {
    Active,
    /// Waiting for help after a shout.
    Waiting {
        until: u64,
    },
    /// Initiator of an exchange waiting for the answer.
    AwaitReply {
        since: u64,
    },
    /// Responder of an exchange waiting for the world to complete it.
    Responding {
        since: u64,
    },
}

#[derive(Debug, Clone)]
struct Exec {
    motive: Motive,
    started: u64,
    phase: Phase,
    goal: Option<HexCoord>,
    /// Remaining steps, next step last.
    path: Vec<HexCoord>,
    legs: u32,
    /// Outcome decided by the world during effect resolution.
    awaiting_effect: bool,
}

impl Exec {
    fn new(motive: Motive, tick: u64) -> Self {
        Self {
            motive,
            started: tick,
            phase: Phase::Active,
            goal: None,
            path: Vec::new(),
            legs: 0,
            awaiting_effect: false,
        }
    }
}

enum Step {
    Arrived,
    Moving,
    Blocked,
}

#[derive(Debug, Clone)]
pub struct Agent {
    pub id: AgentId,
    pub name: String,
    pub pos: HexCoord,
    pub health: i32,
    pub storage: u32,
    pub alive: bool,
    pub needs: NeedState,
    pub alpha_pr: f64,
    pub location: LocationMemory,
    pub social: SocialMemory,
    pub plans: PlanBook,
    pub food_seen: BTreeSet<HexCoord>,
    pub clusters: Vec<FoodCluster>,
    pub current: Option<Motive>,
    exec: Option<Exec>,
    pub inbox: Vec<ShoutOut>,
    requests: Vec<Request>,
    threat: Option<Threat>,
    last_cluster_failure: Option<u64>,
    pub rng: SimRng,
}

impl Agent {
    pub fn new(
        id: AgentId,
        personality: &Personality,
        pos: HexCoord,
        map: &WorldMap,
        config: &RunConfig,
        rng: SimRng,
    ) -> Self {
        Self {
            id,
            name: personality.name.clone(),
            pos,
            health: config.health.max,
            storage: 0,
            alive: true,
            needs: NeedState::with_fill(
                personality.set_value,
                personality.leakage,
                config.needs.initial_fill,
            ),
            alpha_pr: personality.alpha_pr,
            location: LocationMemory::for_map(map),
            social: SocialMemory::new(),
            plans: PlanBook::new(&config.signals),
            food_seen: BTreeSet::new(),
            clusters: Vec::new(),
            current: None,
            exec: None,
            inbox: Vec::new(),
            requests: Vec::new(),
            threat: None,
            last_cluster_failure: None,
            rng,
        }
    }

    pub fn public(&self) -> AgentPublic {
        AgentPublic {
            id: self.id,
            pos: self.pos,
            health: self.health,
            alive: self.alive,
        }
    }

    fn event(&self, ctx: &Ctx, kind: EventKind) -> Event {
        Event {
            tick: ctx.tick,
            actor: self.id,
            kind,
        }
    }

    /// The six-step cognitive loop followed by one basic action.
    pub fn tick(&mut self, view: &WorldView, ctx: &Ctx, out: &mut TickOutput) {
        if !self.alive {
            return;
        }
        let cfg = ctx.config;
        self.needs.apply_leakage();
        self.location.decay(&cfg.memory.forgetting);
        self.social.decay(&cfg.memory.forgetting);
        self.sense(view, ctx, out);
        self.process_requests(view, ctx);
        self.select(view, ctx, out);
        self.answer_exchanges(ctx, out);
        if self.storage == 0 && self.needs.current(NeedId::Energy) <= 0.0 {
            self.health = (self.health - 1).max(0);
        }
        self.execute(view, ctx, out);
    }

    fn sense(&mut self, view: &WorldView, ctx: &Ctx, out: &mut TickOutput) {
        let range = ctx.config.world.view_range;
        for c in view.map.tiles_within(self.pos, range) {
            self.location.discover(c, ctx.tick);
        }
        for other in view.agents_within(self.pos, range) {
            if other.id == self.id || self.social.knows(other.id) {
                continue;
            }
            let same = other.id.group == self.id.group;
            // A second group in a single-group scenario is a setup error;
            // treat the stranger neutrally.
            let score =
                init_social_score(&mut self.rng, same, view.scenario, &ctx.config.social.init)
                    .unwrap_or(0.0);
            self.social.meet(other.id, score, ctx.tick);
            out.events.push(self.event(
                ctx,
                EventKind::Contact {
                    other: other.id,
                    score,
                },
            ));
        }
        let mut new_food = false;
        for c in view.visible_food(self.pos, range) {
            new_food |= self.food_seen.insert(c);
        }
        if new_food {
            self.rebuild_clusters(ctx.config.plans.cluster_radius);
        }
    }

    /// Groups remembered food tiles into clusters of tiles linked within
    /// `radius`; each center is the member nearest the centroid.
    fn rebuild_clusters(&mut self, radius: u32) {
        let tiles: Vec<HexCoord> = self.food_seen.iter().copied().collect();
        let mut comp = vec![usize::MAX; tiles.len()];
        let mut clusters = Vec::new();
        for start in 0..tiles.len() {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = clusters.len();
            comp[start] = id;
            let mut stack = vec![start];
            let mut members = Vec::new();
            while let Some(i) = stack.pop() {
                members.push(tiles[i]);
                for j in 0..tiles.len() {
                    if comp[j] == usize::MAX && tiles[i].distance(tiles[j]) <= radius {
                        comp[j] = id;
                        stack.push(j);
                    }
                }
            }
            members.sort();
            let n = members.len() as f64;
            let (cq, cr) = members.iter().fold((0.0, 0.0), |(q, r), c| {
                (q + c.q as f64 / n, r + c.r as f64 / n)
            });
            let center = *members
                .iter()
                .min_by(|a, b| {
                    let da = cube_dist(a, cq, cr);
                    let db = cube_dist(b, cq, cr);
                    da.total_cmp(&db).then(a.cmp(b))
                })
                .expect("non-empty component");
            let failed_at = self
                .clusters
                .iter()
                .find(|c| c.center == center)
                .and_then(|c| c.failed_at);
            clusters.push(FoodCluster {
                center,
                members,
                failed_at,
            });
        }
        self.clusters = clusters;
    }

    /// Moves fresh shouts into the request list and drops stale ones.
    fn process_requests(&mut self, view: &WorldView, ctx: &Ctx) {
        let ttl = ctx.config.plans.request_ttl;
        self.requests
            .retain(|r| ctx.tick.saturating_sub(r.tick) <= ttl);
        if let Some(t) = self.threat {
            let attacker_gone = view.agent(t.attacker).is_none_or(|a| !a.alive);
            if attacker_gone || ctx.tick.saturating_sub(t.since) > ctx.config.plans.attack_memory {
                self.threat = None;
            }
        }
        for shout in std::mem::take(&mut self.inbox) {
            if shout.sender == self.id {
                continue;
            }
            let req = Request {
                kind: shout.kind,
                sender: shout.sender,
                subject: shout.subject,
                tick: shout.tick,
            };
            match shout.kind {
                ShoutKind::SocialInfoExchange | ShoutKind::LocationInfoExchange
                    if shout.subject != Some(self.id) => {}
                ShoutKind::HelpAttacked
                    if shout.subject.is_none() || shout.subject == Some(self.id) => {}
                _ => {
                    self.requests
                        .retain(|r| !(r.kind == req.kind && r.sender == req.sender));
                    self.requests.push(req);
                }
            }
        }
    }

    fn has_request(&self, kind: ShoutKind, sender: AgentId) -> bool {
        self.requests
            .iter()
            .any(|r| r.kind == kind && r.sender == sender)
    }

    fn friendly(&self, other: AgentId) -> bool {
        self.social.score(other).is_some_and(|s| s > 0.0)
    }

    /// Situational urgency for a plan aimed at `target`.
    pub fn urgency(&self, plan: PlanId, target: Target, view: &WorldView, ctx: &Ctx) -> f64 {
        let u = &ctx.config.urgency;
        let other = target.agent();
        match plan {
            PlanId::CollectFood => {
                let visible = target.tile().is_some_and(|t| {
                    view.food_at(t) > 0 && t.distance(self.pos) <= ctx.config.world.view_range
                });
                if visible {
                    u.food
                } else {
                    0.0
                }
            }
            PlanId::Flee => match (self.threat, other) {
                (Some(t), Some(o)) if t.flee && t.attacker == o => u.flee,
                _ => 0.0,
            },
            PlanId::Engage => {
                let Some(o) = other else { return 0.0 };
                let mut v = 0.0;
                if let Some(t) = self.threat {
                    if !t.flee && t.attacker == o {
                        v = u.retaliate;
                    }
                }
                let asked = self.requests.iter().any(|r| {
                    r.kind == ShoutKind::HelpAttacked
                        && r.subject == Some(o)
                        && self.friendly(r.sender)
                });
                if asked {
                    v = f64::max(v, u.help);
                }
                v
            }
            PlanId::GiveFood => match other {
                Some(o) if self.has_request(ShoutKind::FoodRequest, o) && self.friendly(o) => {
                    u.help
                }
                _ => 0.0,
            },
            PlanId::GoHeal => match other {
                Some(o) if self.has_request(ShoutKind::HealRequest, o) && self.friendly(o) => {
                    u.help
                }
                _ => 0.0,
            },
            PlanId::ExchangeSocialInfo | PlanId::ExchangeLocationInfo => match other {
                Some(o)
                    if self.has_request(ShoutKind::for_exchange(plan), o) && self.friendly(o) =>
                {
                    u.exchange
                }
                _ => 0.0,
            },
            _ => 0.0,
        }
    }

    /// Final motive strength of `plan` aimed at `target`.
    pub fn strength(&self, plan: PlanId, target: Target, view: &WorldView, ctx: &Ctx) -> f64 {
        let indicators = self.needs.indicators(&ctx.config.needs.weights);
        let state = self.plans.get(plan);
        let s = target.agent().and_then(|a| self.social.score(a));
        let expected = state.expected_for(s);
        let m = preliminary_strength(&indicators, &expected);
        let c = competence_indicator(
            self.needs.current(NeedId::Competence),
            state.pr,
            ctx.config.motive.alpha_c,
        );
        motive_strength(m, self.urgency(plan, target, view, ctx), c)
    }

    fn under_attack_by(&self, other: AgentId) -> bool {
        self.threat.is_some_and(|t| t.attacker == other)
    }

    /// Every motive currently available, with strengths.
    pub fn candidates(&self, view: &WorldView, ctx: &Ctx) -> Vec<Motive> {
        let cfg = ctx.config;
        let range = cfg.world.view_range;
        let mut targets: Vec<(PlanId, Target)> = vec![(PlanId::Explore, Target::None)];
        let visible: Vec<&AgentPublic> = view
            .agents_within(self.pos, range)
            .filter(|a| a.id != self.id && self.social.knows(a.id))
            .collect();
        for a in &visible {
            targets.push((PlanId::Engage, Target::Agent(a.id)));
            targets.push((PlanId::ExchangeSocialInfo, Target::Agent(a.id)));
            targets.push((PlanId::ExchangeLocationInfo, Target::Agent(a.id)));
            let asked_heal = self.has_request(ShoutKind::HealRequest, a.id);
            if a.health < cfg.health.heal_below || asked_heal {
                targets.push((PlanId::GoHeal, Target::Agent(a.id)));
            }
            if self.storage > 0 && self.has_request(ShoutKind::FoodRequest, a.id) {
                targets.push((PlanId::GiveFood, Target::Agent(a.id)));
            }
            if self.under_attack_by(a.id) {
                targets.push((PlanId::Flee, Target::Agent(a.id)));
            }
        }
        if let Some(t) = self.threat {
            // Being hit reveals the hitter even when out of view.
            if !visible.iter().any(|a| a.id == t.attacker) {
                targets.push((PlanId::Flee, Target::Agent(t.attacker)));
            }
        }
        let recent_failure = self
            .last_cluster_failure
            .is_some_and(|t| ctx.tick.saturating_sub(t) <= cfg.plans.cluster_cooldown);
        if self.clusters.is_empty() || recent_failure {
            targets.push((PlanId::SearchFood, Target::None));
        }
        if self.storage == 0 {
            targets.push((PlanId::CallForFood, Target::None));
        }
        if self.storage < cfg.health.storage_capacity {
            if let Some(&f) = view.visible_food(self.pos, range).first() {
                targets.push((PlanId::CollectFood, Target::Tile(f)));
            }
        }
        if self.storage > 0 {
            targets.push((PlanId::GeneralFood, Target::Storage));
        }
        for c in self.nearest_clusters(ctx) {
            targets.push((PlanId::GeneralFood, Target::Cluster(c)));
        }
        if self.health < cfg.health.max {
            targets.push((PlanId::SelfHeal, Target::None));
            targets.push((PlanId::RequestHeal, Target::None));
        }
        targets
            .into_iter()
            .map(|(p, t)| Motive::new(p, t, self.strength(p, t, view, ctx)))
            .collect()
    }

    fn nearest_clusters(&self, ctx: &Ctx) -> Vec<HexCoord> {
        let cfg = &ctx.config.plans;
        let mut cs: Vec<HexCoord> = self
            .clusters
            .iter()
            .filter(|c| {
                c.failed_at
                    .is_none_or(|t| ctx.tick.saturating_sub(t) > cfg.cluster_cooldown)
            })
            .map(|c| c.center)
            .collect();
        cs.sort_by_key(|c| (c.distance(self.pos), *c));
        cs.truncate(cfg.nearest_clusters);
        cs
    }

    fn select(&mut self, view: &WorldView, ctx: &Ctx, out: &mut TickOutput) {
        let candidates = self.candidates(view, ctx);
        let current = self
            .current
            .map(|m| Motive::new(m.plan, m.target, self.strength(m.plan, m.target, view, ctx)));
        // A motive that is mid-resolution cannot be dropped.
        if matches!(
            self.exec.as_ref().map(|e| e.phase),
            Some(Phase::AwaitReply { .. } | Phase::Responding { .. })
        ) {
            return;
        }
        let Some(chosen) = select_motive(current.as_ref(), &candidates, ctx.config.motive.tau)
        else {
            return;
        };
        if current.is_some_and(|c| c.same_as(&chosen)) {
            return;
        }
        if chosen.strength <= 0.0 {
            if let Some(cur) = current {
                if cur.strength <= 0.0 {
                    self.end_plan(EndReason::Interrupted, None, ctx, out);
                }
            }
            return;
        }
        if self.current.is_some() {
            self.end_plan(EndReason::Interrupted, None, ctx, out);
        }
        self.current = Some(chosen);
        self.exec = Some(Exec::new(chosen, ctx.tick));
        out.events.push(self.event(
            ctx,
            EventKind::PlanStart {
                plan: chosen.plan,
                target: chosen.target,
                strength: chosen.strength,
            },
        ));
    }

    /// Accepts a pending exchange request once the matching plan is the
    /// current motive. Unanswered requests simply expire.
    fn answer_exchanges(&mut self, ctx: &Ctx, out: &mut TickOutput) {
        let Some(m) = self.current else { return };
        let Some(plan) = [PlanId::ExchangeSocialInfo, PlanId::ExchangeLocationInfo]
            .into_iter()
            .find(|&p| p == m.plan)
        else {
            return;
        };
        let Some(partner) = m.target.agent() else {
            return;
        };
        let kind = ShoutKind::for_exchange(plan);
        let ready = self.exec.as_ref().is_some_and(|e| {
            matches!(e.phase, Phase::Active | Phase::AwaitReply { .. }) && !e.awaiting_effect
        });
        if !ready || !self.has_request(kind, partner) {
            return;
        }
        if let Some(e) = self.exec.as_mut() {
            e.phase = Phase::Responding { since: ctx.tick };
        }
        self.requests
            .retain(|q| !(q.kind == kind && q.sender == partner));
        out.effects.push(Effect::ExchangeReply {
            responder: self.id,
            initiator: partner,
            plan,
        });
    }

    /// Ends the current plan. Success and failure apply need signals, write
    /// them into location memory and update the plan's learned state.
    fn end_plan(
        &mut self,
        reason: EndReason,
        counterpart: Option<AgentId>,
        ctx: &Ctx,
        out: &mut TickOutput,
    ) {
        let Some(m) = self.current.take() else { return };
        self.exec = None;
        let signals = match reason.outcome() {
            Some(outcome) => {
                let table = &ctx.config.signals;
                let s = counterpart
                    .and_then(|a| self.social.score(a))
                    .unwrap_or(0.0);
                let signals = table
                    .effective_signal(m.plan, outcome, Some(s))
                    .expect("score supplied");
                self.needs.apply_signals(&signals);
                let _ = self.location.record_signals(self.pos, &signals);
                let alpha = self.alpha_pr;
                self.plans.get_mut(m.plan).learn(outcome, table, alpha);
                signals
            }
            None => NeedVec::ZERO,
        };
        out.events.push(self.event(
            ctx,
            EventKind::PlanEnd {
                plan: m.plan,
                target: m.target,
                reason,
                signals,
            },
        ));
    }

    fn finish(&mut self, ok: bool, counterpart: Option<AgentId>, ctx: &Ctx, out: &mut TickOutput) {
        let reason = if ok {
            EndReason::Success
        } else {
            EndReason::Failure
        };
        self.end_plan(reason, counterpart, ctx, out);
    }

    /// Moves one step toward `goal`, stopping once within `within` tiles.
    fn step_toward(
        &mut self,
        goal: HexCoord,
        within: u32,
        view: &WorldView,
        out: &mut TickOutput,
    ) -> Step {
        if self.pos.distance(goal) <= within {
            return Step::Arrived;
        }
        let pos = self.pos;
        let exec = self.exec.as_mut().expect("executing plan");
        let valid = exec.goal == Some(goal)
            && exec
                .path
                .last()
                .is_some_and(|&n| n.distance(pos) == 1 && view.map.is_accessible(n));
        if !valid {
            match find_path(view.map, &self.location, pos, goal) {
                Ok(mut p) => {
                    p.reverse();
                    p.pop();
                    exec.path = p;
                    exec.goal = Some(goal);
                }
                Err(_) => return Step::Blocked,
            }
        }
        let Some(next) = exec.path.pop() else {
            return Step::Arrived;
        };
        out.effects.push(Effect::Move {
            agent: self.id,
            to: next,
        });
        Step::Moving
    }

    /// Called by the world after a move; keeps the cached path aligned.
    pub fn on_moved(&mut self, to: HexCoord, intended: HexCoord) {
        self.pos = to;
        if to != intended {
            if let Some(e) = self.exec.as_mut() {
                e.path.clear();
            }
        }
    }

    /// Path step that was planned but not taken; re-queues it.
    pub fn on_move_blocked(&mut self, intended: HexCoord) {
        if let Some(e) = self.exec.as_mut() {
            e.path.push(intended);
        }
    }

    fn sample_amount(&mut self, g: crate::config::Gaussian) -> i32 {
        g.sample(&mut self.rng).max(0.0).round() as i32
    }

    fn execute(&mut self, view: &WorldView, ctx: &Ctx, out: &mut TickOutput) {
        let Some(exec) = self.exec.as_ref() else {
            return;
        };
        if exec.awaiting_effect {
            return;
        }
        let cfg = ctx.config;
        let m = exec.motive;
        if ctx.tick.saturating_sub(exec.started) >= cfg.plans.max_plan_ticks {
            let counterpart = m.target.agent();
            self.finish(false, counterpart, ctx, out);
            return;
        }
        match m.plan {
            PlanId::Explore => self.exec_explore(view, ctx, out),
            PlanId::Engage => self.exec_engage(m.target, view, ctx, out),
            PlanId::Flee => self.exec_flee(m.target, view, ctx, out),
            PlanId::SearchFood => self.exec_search_food(view, ctx, out),
            PlanId::CollectFood => self.exec_collect(m.target, view, ctx, out),
            PlanId::GeneralFood => self.exec_general_food(m.target, view, ctx, out),
            PlanId::CallForFood => self.exec_call(ShoutKind::FoodRequest, ctx, out),
            PlanId::RequestHeal => self.exec_call(ShoutKind::HealRequest, ctx, out),
            PlanId::SelfHeal => {
                let amount = self
                    .sample_amount(cfg.health.heal)
                    .min(cfg.health.max - self.health);
                self.health += amount.max(0);
                if amount > 0 {
                    out.events.push(self.event(
                        ctx,
                        EventKind::Heal {
                            target: self.id,
                            amount,
                        },
                    ));
                }
                self.finish(amount > 0, None, ctx, out);
            }
            PlanId::GiveFood | PlanId::GoHeal => {
                self.exec_deliver(m.plan, m.target, view, ctx, out)
            }
            PlanId::ExchangeSocialInfo | PlanId::ExchangeLocationInfo => {
                self.exec_exchange(m.plan, m.target, view, ctx, out)
            }
        }
    }

    fn exec_explore(&mut self, view: &WorldView, ctx: &Ctx, out: &mut TickOutput) {
        let goal = match self.exec.as_ref().and_then(|e| e.goal) {
            Some(g) => g,
            None => match self.pick_explore_goal(view.map) {
                Some(g) => g,
                None => return self.finish(false, None, ctx, out),
            },
        };
        match self.step_toward(goal, 0, view, out) {
            Step::Arrived => self.finish(true, None, ctx, out),
            Step::Moving => {}
            Step::Blocked => self.finish(false, None, ctx, out),
        }
    }

    /// A random frontier tile, or once the map is fully known, a known tile
    /// weighted toward low certainty association.
    fn pick_explore_goal(&mut self, map: &WorldMap) -> Option<HexCoord> {
        let pos = self.pos;
        let frontier: Vec<HexCoord> = self
            .location
            .cells()
            .iter()
            .map(|c| c.coord)
            .filter(|&c| {
                c != pos
                    && map.is_accessible(c)
                    && c.neighbors()
                        .iter()
                        .any(|&n| map.contains(n) && !self.location.contains(n))
            })
            .collect();
        if let Some(&g) = frontier.choose(&mut self.rng) {
            return Some(g);
        }
        let (tiles, weights): (Vec<HexCoord>, Vec<f64>) = self
            .location
            .cells()
            .iter()
            .filter(|c| c.coord != pos && map.is_accessible(c.coord))
            .map(|c| (c.coord, (1.0 - c.assoc[NeedId::Certainty]) / 2.0 + 1e-3))
            .unzip();
        let dist = WeightedIndex::new(&weights).ok()?;
        Some(tiles[dist.sample(&mut self.rng)])
    }

    fn exec_engage(&mut self, target: Target, view: &WorldView, ctx: &Ctx, out: &mut TickOutput) {
        let Some(other) = target.agent().and_then(|a| view.agent(a)).copied() else {
            return self.finish(false, target.agent(), ctx, out);
        };
        if !other.alive || other.pos.distance(self.pos) > ctx.config.world.view_range {
            return self.finish(false, Some(other.id), ctx, out);
        }
        if other.pos.distance(self.pos) <= 1 {
            let damage = self.sample_amount(ctx.config.health.damage);
            let assist = self
                .requests
                .iter()
                .find(|r| r.kind == ShoutKind::HelpAttacked && r.subject == Some(other.id))
                .map(|r| r.sender);
            out.effects.push(Effect::Hit {
                attacker: self.id,
                victim: other.id,
                damage,
                assist,
            });
            if let Some(e) = self.exec.as_mut() {
                e.awaiting_effect = true;
            }
            return;
        }
        if let Step::Blocked = self.step_toward(other.pos, 1, view, out) {
            self.finish(false, Some(other.id), ctx, out);
        }
    }

    fn exec_flee(&mut self, target: Target, view: &WorldView, ctx: &Ctx, out: &mut TickOutput) {
        let range = ctx.config.world.view_range;
        let attacker = target.agent().and_then(|a| view.agent(a)).copied();
        let Some(attacker) = attacker.filter(|a| a.alive && a.pos.distance(self.pos) <= range)
        else {
            return self.finish(true, target.agent(), ctx, out);
        };
        let goal = match self.exec.as_ref().and_then(|e| e.goal) {
            Some(g) => g,
            None => match self.pick_safe_tile(attacker.pos, view.map, ctx) {
                Some(g) => {
                    if let Some(e) = self.exec.as_mut() {
                        e.goal = Some(g);
                        e.legs += 1;
                    }
                    g
                }
                None => return self.finish(false, Some(attacker.id), ctx, out),
            },
        };
        match self.step_toward(goal, 0, view, out) {
            Step::Moving => {}
            Step::Arrived | Step::Blocked => {
                let legs = self.exec.as_ref().map_or(0, |e| e.legs);
                if legs >= 3 {
                    self.finish(false, Some(attacker.id), ctx, out);
                } else if let Some(e) = self.exec.as_mut() {
                    e.goal = None;
                    e.path.clear();
                }
            }
        }
    }

    /// Random remembered tile without pain association, far enough from the
    /// attacker, among the closest few such tiles.
    fn pick_safe_tile(
        &mut self,
        attacker: HexCoord,
        map: &WorldMap,
        ctx: &Ctx,
    ) -> Option<HexCoord> {
        let min = ctx.config.plans.flee_distance;
        let pos = self.pos;
        let mut safe: Vec<HexCoord> = self
            .location
            .cells()
            .iter()
            .filter(|c| {
                c.assoc[NeedId::PainAvoidance] >= 0.0
                    && c.coord.distance(attacker) >= min
                    && map.is_accessible(c.coord)
            })
            .map(|c| c.coord)
            .collect();
        safe.sort_by_key(|c| (c.distance(pos), *c));
        safe.truncate(8);
        safe.choose(&mut self.rng).copied()
    }

    fn nearest_food(
        &self,
        view: &WorldView,
        ctx: &Ctx,
        within: Option<(HexCoord, u32)>,
    ) -> Option<HexCoord> {
        view.visible_food(self.pos, ctx.config.world.view_range)
            .into_iter()
            .find(|f| within.is_none_or(|(c, r)| f.distance(c) <= r))
    }

    fn collect_here(&mut self, tile: HexCoord, eat: bool, out: &mut TickOutput) {
        out.effects.push(Effect::Collect {
            agent: self.id,
            tile,
            eat,
        });
        if let Some(e) = self.exec.as_mut() {
            e.awaiting_effect = true;
        }
    }

    fn exec_search_food(&mut self, view: &WorldView, ctx: &Ctx, out: &mut TickOutput) {
        if let Some(f) = self.nearest_food(view, ctx, None) {
            match self.step_toward(f, 0, view, out) {
                Step::Arrived => self.collect_here(f, true, out),
                Step::Moving => {}
                Step::Blocked => self.finish(false, None, ctx, out),
            }
            return;
        }
        let goal = match self.exec.as_ref().and_then(|e| e.goal) {
            Some(g) => g,
            None => {
                let legs = self.exec.as_ref().map_or(0, |e| e.legs);
                if legs >= ctx.config.plans.search_legs {
                    return self.finish(false, None, ctx, out);
                }
                let map = view.map;
                let pos = self.pos;
                let known: Vec<HexCoord> = self
                    .location
                    .cells()
                    .iter()
                    .map(|c| c.coord)
                    .filter(|&c| c != pos && map.is_accessible(c))
                    .collect();
                let Some(&g) = known.choose(&mut self.rng) else {
                    return self.finish(false, None, ctx, out);
                };
                if let Some(e) = self.exec.as_mut() {
                    e.legs += 1;
                }
                g
            }
        };
        match self.step_toward(goal, 0, view, out) {
            Step::Moving => {}
            Step::Arrived | Step::Blocked => {
                if let Some(e) = self.exec.as_mut() {
                    e.goal = None;
                    e.path.clear();
                }
            }
        }
    }

    fn exec_collect(&mut self, target: Target, view: &WorldView, ctx: &Ctx, out: &mut TickOutput) {
        let Some(tile) = target.tile() else {
            return self.finish(false, None, ctx, out);
        };
        if view.food_at(tile) == 0 || self.storage >= ctx.config.health.storage_capacity {
            return self.finish(false, None, ctx, out);
        }
        match self.step_toward(tile, 0, view, out) {
            Step::Arrived => self.collect_here(tile, false, out),
            Step::Moving => {}
            Step::Blocked => self.finish(false, None, ctx, out),
        }
    }

    fn exec_general_food(
        &mut self,
        target: Target,
        view: &WorldView,
        ctx: &Ctx,
        out: &mut TickOutput,
    ) {
        match target {
            Target::Storage => {
                if self.storage == 0 {
                    return self.finish(false, None, ctx, out);
                }
                self.storage -= 1;
                out.events.push(self.event(
                    ctx,
                    EventKind::Eat {
                        source: FoodSource::Storage,
                    },
                ));
                self.finish(true, None, ctx, out);
            }
            Target::Cluster(center) => {
                let r = ctx.config.plans.cluster_radius;
                if let Some(f) = self.nearest_food(view, ctx, Some((center, r))) {
                    match self.step_toward(f, 0, view, out) {
                        Step::Arrived => self.collect_here(f, true, out),
                        Step::Moving => {}
                        Step::Blocked => self.fail_cluster(center, ctx, out),
                    }
                    return;
                }
                match self.step_toward(center, 1, view, out) {
                    Step::Moving => {}
                    Step::Arrived | Step::Blocked => self.fail_cluster(center, ctx, out),
                }
            }
            _ => self.finish(false, None, ctx, out),
        }
    }

    fn fail_cluster(&mut self, center: HexCoord, ctx: &Ctx, out: &mut TickOutput) {
        for c in &mut self.clusters {
            if c.center == center {
                c.failed_at = Some(ctx.tick);
            }
        }
        self.last_cluster_failure = Some(ctx.tick);
        self.finish(false, None, ctx, out);
    }

    fn exec_call(&mut self, kind: ShoutKind, ctx: &Ctx, out: &mut TickOutput) {
        let wait = u64::from(ctx.config.plans.request_wait);
        let pos = self.pos;
        let id = self.id;
        let exec = self.exec.as_mut().expect("executing plan");
        match exec.phase {
            Phase::Active => {
                exec.phase = Phase::Waiting {
                    until: ctx.tick + wait,
                };
                let shout = ShoutOut {
                    kind,
                    sender: id,
                    subject: None,
                    tick: ctx.tick,
                    origin: pos,
                };
                out.effects.push(Effect::Shout(shout));
                out.events.push(self.event(
                    ctx,
                    EventKind::Shout {
                        kind,
                        subject: None,
                    },
                ));
            }
            Phase::Waiting { until } if ctx.tick >= until => self.finish(false, None, ctx, out),
            _ => {}
        }
    }

    fn exec_deliver(
        &mut self,
        plan: PlanId,
        target: Target,
        view: &WorldView,
        ctx: &Ctx,
        out: &mut TickOutput,
    ) {
        let Some(other) = target.agent().and_then(|a| view.agent(a)).copied() else {
            return self.finish(false, target.agent(), ctx, out);
        };
        let gone = !other.alive || other.pos.distance(self.pos) > ctx.config.world.view_range;
        let pointless = match plan {
            PlanId::GiveFood => self.storage == 0,
            _ => other.health >= ctx.config.health.max,
        };
        if gone || pointless {
            return self.finish(false, Some(other.id), ctx, out);
        }
        if other.pos.distance(self.pos) <= 1 {
            let effect = if plan == PlanId::GiveFood {
                Effect::Give {
                    giver: self.id,
                    receiver: other.id,
                }
            } else {
                Effect::Heal {
                    healer: self.id,
                    patient: other.id,
                    amount: self.sample_amount(ctx.config.health.heal),
                }
            };
            out.effects.push(effect);
            if let Some(e) = self.exec.as_mut() {
                e.awaiting_effect = true;
            }
            return;
        }
        if let Step::Blocked = self.step_toward(other.pos, 1, view, out) {
            self.finish(false, Some(other.id), ctx, out);
        }
    }

    fn exec_exchange(
        &mut self,
        plan: PlanId,
        target: Target,
        view: &WorldView,
        ctx: &Ctx,
        out: &mut TickOutput,
    ) {
        let Some(other) = target.agent().and_then(|a| view.agent(a)).copied() else {
            return self.finish(false, target.agent(), ctx, out);
        };
        let phase = self.exec.as_ref().map(|e| e.phase).expect("executing plan");
        match phase {
            Phase::AwaitReply { since } | Phase::Responding { since } => {
                if ctx.tick.saturating_sub(since) >= u64::from(ctx.config.plans.request_wait) {
                    self.finish(false, Some(other.id), ctx, out);
                }
                return;
            }
            _ => {}
        }
        if !other.alive || other.pos.distance(self.pos) > ctx.config.world.view_range {
            return self.finish(false, Some(other.id), ctx, out);
        }
        if other.pos.distance(self.pos) <= 1 {
            let kind = ShoutKind::for_exchange(plan);
            out.effects.push(Effect::Shout(ShoutOut {
                kind,
                sender: self.id,
                subject: Some(other.id),
                tick: ctx.tick,
                origin: self.pos,
            }));
            out.events.push(self.event(
                ctx,
                EventKind::Shout {
                    kind,
                    subject: Some(other.id),
                },
            ));
            if let Some(e) = self.exec.as_mut() {
                e.phase = Phase::AwaitReply { since: ctx.tick };
            }
            return;
        }
        if let Step::Blocked = self.step_toward(other.pos, 1, view, out) {
            self.finish(false, Some(other.id), ctx, out);
        }
    }

    // ----- callbacks from effect resolution -----

    fn current_is(&self, plan: PlanId) -> bool {
        self.current.is_some_and(|m| m.plan == plan)
    }

    /// Result of a [`Effect::Collect`]. `taken` is false when the tile was
    /// already empty.
    pub fn on_collect(
        &mut self,
        tile: HexCoord,
        eat: bool,
        taken: bool,
        ctx: &Ctx,
        out: &mut TickOutput,
    ) {
        if let Some(e) = self.exec.as_mut() {
            e.awaiting_effect = false;
        }
        let Some(m) = self.current else { return };
        if taken {
            out.events
                .push(self.event(ctx, EventKind::Collect { tile }));
            if eat {
                out.events.push(self.event(
                    ctx,
                    EventKind::Eat {
                        source: FoodSource::Tile,
                    },
                ));
            } else {
                self.storage += 1;
            }
            self.finish(true, None, ctx, out);
        } else if m.plan == PlanId::CollectFood {
            self.finish(false, None, ctx, out);
        }
    }

    /// Attacker side of a resolved hit. `landed` is false when the victim
    /// moved out of reach.
    pub fn on_hit_delivered(
        &mut self,
        victim: AgentId,
        damage: i32,
        landed: bool,
        ctx: &Ctx,
        out: &mut TickOutput,
    ) {
        if let Some(e) = self.exec.as_mut() {
            e.awaiting_effect = false;
        }
        if !landed {
            return;
        }
        let ok = damage >= 1;
        if self.current_is(PlanId::Engage) {
            self.finish(ok, Some(victim), ctx, out);
        }
        let delta = ctx.config.social.attack_penalty;
        let score = self.social.feedback(victim, delta, ctx.tick);
        out.events.push(self.event(
            ctx,
            EventKind::Score {
                other: victim,
                score,
            },
        ));
    }

    /// Victim side of a hit. Returns the help call to broadcast.
    pub fn on_attacked(
        &mut self,
        attacker: AgentId,
        damage: i32,
        ctx: &Ctx,
        out: &mut TickOutput,
    ) -> ShoutOut {
        let cfg = ctx.config;
        self.health = (self.health - damage).max(0);
        self.needs.apply_signal(
            NeedId::PainAvoidance,
            -(damage as f64) * cfg.health.pain_per_damage,
        );
        let s_before = self.social.score(attacker).unwrap_or(0.0);
        // Being attacked confirms or contradicts beliefs about the attacker.
        let ce = cfg.signals.engage.success[NeedId::Certainty]
            * crate::plans::certainty_modifier(s_before);
        self.needs.apply_signal(NeedId::Certainty, ce);
        let mut pain = NeedVec::ZERO;
        pain[NeedId::PainAvoidance] = -(damage as f64) * cfg.health.pain_per_damage;
        let _ = self.location.record_signals(self.pos, &pain);
        let score = self
            .social
            .feedback(attacker, cfg.social.attack_penalty, ctx.tick);
        out.events.push(self.event(
            ctx,
            EventKind::Score {
                other: attacker,
                score,
            },
        ));
        let engage = self.plans.get(PlanId::Engage);
        let c = competence_indicator(
            self.needs.current(NeedId::Competence),
            engage.pr,
            cfg.motive.alpha_c,
        );
        let flee = self.health < cfg.health.flee_below || c < 0.5;
        self.threat = Some(Threat {
            attacker,
            since: ctx.tick,
            flee,
        });
        let shout = ShoutOut {
            kind: ShoutKind::HelpAttacked,
            sender: self.id,
            subject: Some(attacker),
            tick: ctx.tick,
            origin: self.pos,
        };
        out.events.push(self.event(
            ctx,
            EventKind::Shout {
                kind: ShoutKind::HelpAttacked,
                subject: Some(attacker),
            },
        ));
        shout
    }

    /// An ally landed a hit on our attacker.
    pub fn on_assisted(&mut self, helper: AgentId, ctx: &Ctx, out: &mut TickOutput) {
        let score = self
            .social
            .feedback(helper, ctx.config.social.reward, ctx.tick);
        out.events.push(self.event(
            ctx,
            EventKind::Score {
                other: helper,
                score,
            },
        ));
    }

    /// Healer side. Succeeds when at least one point was restored.
    pub fn on_heal_delivered(
        &mut self,
        patient: AgentId,
        restored: i32,
        ctx: &Ctx,
        out: &mut TickOutput,
    ) {
        if let Some(e) = self.exec.as_mut() {
            e.awaiting_effect = false;
        }
        let ok = restored > 0;
        if ok {
            out.events.push(self.event(
                ctx,
                EventKind::Heal {
                    target: patient,
                    amount: restored,
                },
            ));
        }
        if self.current_is(PlanId::GoHeal) {
            self.finish(ok, Some(patient), ctx, out);
        }
        if ok {
            let score = self
                .social
                .feedback(patient, ctx.config.social.reward, ctx.tick);
            out.events.push(self.event(
                ctx,
                EventKind::Score {
                    other: patient,
                    score,
                },
            ));
        }
    }

    /// Patient side; `restored` is already capped at max health.
    pub fn on_healed(&mut self, healer: AgentId, restored: i32, ctx: &Ctx, out: &mut TickOutput) {
        if restored <= 0 {
            return;
        }
        self.health += restored;
        if self.current_is(PlanId::RequestHeal) {
            self.finish(true, Some(healer), ctx, out);
        }
        let score = self
            .social
            .feedback(healer, ctx.config.social.reward, ctx.tick);
        out.events.push(self.event(
            ctx,
            EventKind::Score {
                other: healer,
                score,
            },
        ));
    }

    /// Whether this agent can take a gift right now.
    pub fn can_receive_food(&self, cap: u32) -> bool {
        self.alive && (self.current_is(PlanId::CallForFood) || self.storage < cap)
    }

    /// Receiver side of a gift: a caller eats it, anyone else stores it.
    pub fn on_gift_received(&mut self, giver: AgentId, ctx: &Ctx, out: &mut TickOutput) -> bool {
        let eaten = self.current_is(PlanId::CallForFood);
        if eaten {
            out.events.push(self.event(
                ctx,
                EventKind::Eat {
                    source: FoodSource::Gift,
                },
            ));
            self.finish(true, Some(giver), ctx, out);
        } else {
            self.storage += 1;
        }
        let score = self
            .social
            .feedback(giver, ctx.config.social.reward, ctx.tick);
        out.events.push(self.event(
            ctx,
            EventKind::Score {
                other: giver,
                score,
            },
        ));
        eaten
    }

    pub fn on_gift_delivered(
        &mut self,
        receiver: AgentId,
        ok: bool,
        ctx: &Ctx,
        out: &mut TickOutput,
    ) {
        if let Some(e) = self.exec.as_mut() {
            e.awaiting_effect = false;
        }
        if ok {
            self.storage -= 1;
            out.events
                .push(self.event(ctx, EventKind::Give { target: receiver }));
        }
        if self.current_is(PlanId::GiveFood) {
            self.finish(ok, Some(receiver), ctx, out);
        }
        if ok {
            self.requests
                .retain(|r| !(r.kind == ShoutKind::FoodRequest && r.sender == receiver));
            let score = self
                .social
                .feedback(receiver, ctx.config.social.reward, ctx.tick);
            out.events.push(self.event(
                ctx,
                EventKind::Score {
                    other: receiver,
                    score,
                },
            ));
        }
    }

    /// Whether this agent is the initiator waiting on `responder`. When two
    /// agents open the same exchange with each other at once, each is both
    /// initiator and responder, so answering counts as waiting too.
    pub fn awaits_reply(&self, responder: AgentId, plan: PlanId) -> bool {
        self.current
            .is_some_and(|m| m.plan == plan && m.target == Target::Agent(responder))
            && self.exec.as_ref().is_some_and(|e| {
                matches!(e.phase, Phase::AwaitReply { .. } | Phase::Responding { .. })
            })
    }

    /// Whether this agent is answering an exchange with `initiator`.
    pub fn is_responding(&self, initiator: AgentId, plan: PlanId) -> bool {
        self.current
            .is_some_and(|m| m.plan == plan && m.target == Target::Agent(initiator))
            && self
                .exec
                .as_ref()
                .is_some_and(|e| matches!(e.phase, Phase::Responding { .. }))
    }

    /// Ends an exchange plan aimed at `partner`, if it is current.
    pub fn on_exchange_done(
        &mut self,
        partner: AgentId,
        plan: PlanId,
        ok: bool,
        ctx: &Ctx,
        out: &mut TickOutput,
    ) {
        let matches = self
            .current
            .is_some_and(|m| m.plan == plan && m.target == Target::Agent(partner));
        if matches {
            self.finish(ok, Some(partner), ctx, out);
        }
        if ok {
            let score = self
                .social
                .feedback(partner, ctx.config.social.reward, ctx.tick);
            out.events.push(self.event(
                ctx,
                EventKind::Score {
                    other: partner,
                    score,
                },
            ));
        }
    }

    /// Associations of up to `n` random known tiles.
    pub fn sample_tiles(&mut self, n: usize) -> Vec<(HexCoord, NeedVec)> {
        let cells = self.location.cells();
        let idx = rand::seq::index::sample(&mut self.rng, cells.len(), n.min(cells.len()));
        let mut picked: Vec<usize> = idx.into_iter().collect();
        picked.sort_unstable();
        picked
            .into_iter()
            .map(|i| (cells[i].coord, cells[i].assoc))
            .collect()
    }

    /// A random agent this agent has an opinion about, other than `partner`.
    pub fn sample_subject(&mut self, partner: AgentId) -> Option<(AgentId, f64)> {
        let known: Vec<(AgentId, f64)> = self
            .social
            .records()
            .filter(|r| r.other != partner && r.other != self.id)
            .map(|r| (r.other, r.score))
            .collect();
        known.choose(&mut self.rng).copied()
    }

    /// Drops everything in flight when the agent dies.
    pub fn kill(&mut self) {
        self.alive = false;
        self.health = 0;
        self.current = None;
        self.exec = None;
        self.inbox.clear();
        self.requests.clear();
        self.threat = None;
    }

    pub fn is_calling_for_food(&self) -> bool {
        self.current_is(PlanId::CallForFood)
    }

    /// Motive that would be adopted by a fresh selection from scratch.
    pub fn best_motive(&self, view: &WorldView, ctx: &Ctx) -> Option<Motive> {
        crate::motive::best_candidate(&self.candidates(view, ctx))
    }
}

fn cube_dist(c: &HexCoord, q: f64, r: f64) -> f64 {
    let dq = c.q as f64 - q;
    let dr = c.r as f64 - r;
    dq.abs().max(dr.abs()).max((dq + dr).abs())
}
