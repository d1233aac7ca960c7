//! Environment stepping, food spawning and scenario construction.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::agent::{roster, Agent, AgentId, Ctx, Effect, ShoutOut, TickOutput};
use crate::config::{RunConfig, ScenarioId};
use crate::error::{Error, Result};
use crate::hexgrid::{HexCoord, Region, WorldMap};
use crate::rng::{stream, SimRng};
use crate::telemetry::{
    Edge, Event, EventKind, Node, RosterEntry, RunHeader, RunLog, SocialNetworkSnapshot,
    LOG_FORMAT, LOG_VERSION,
};

/// What other agents can observe about an agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentPublic {
    pub id: AgentId,
    pub pos: HexCoord,
    pub health: i32,
    pub alive: bool,
}

/// Read-only world state as of the start of a tick.
pub struct WorldView<'a> {
    pub tick: u64,
    pub map: &'a WorldMap,
    /// Food units per tile, indexed like the map.
    pub food: &'a [u32],
    /// Sorted by id.
    pub agents: &'a [AgentPublic],
    pub scenario: ScenarioId,
}

impl<'a> WorldView<'a> {
    pub fn agent(&self, id: AgentId) -> Option<&'a AgentPublic> {
        self.agents
            .binary_search_by_key(&id, |a| a.id)
            .ok()
            .map(|i| &self.agents[i])
    }

    /// Living agents within `range` of `pos`, in id order.
    pub fn agents_within(
        &self,
        pos: HexCoord,
        range: u32,
    ) -> impl Iterator<Item = &'a AgentPublic> {
        self.agents
            .iter()
            .filter(move |a| a.alive && a.pos.distance(pos) <= range)
    }

    pub fn food_at(&self, c: HexCoord) -> u32 {
        self.map.index(c).map_or(0, |i| self.food[i])
    }

    /// Tiles holding food within `range`, nearest first, ties by coordinate.
    pub fn visible_food(&self, pos: HexCoord, range: u32) -> Vec<HexCoord> {
        let mut v: Vec<HexCoord> = self
            .map
            .food_spawn_points()
            .iter()
            .copied()
            .filter(|&c| c.distance(pos) <= range && self.food_at(c) > 0)
            .collect();
        v.sort_by_key(|c| (c.distance(pos), *c));
        v
    }
}

/// Running totals for the food conservation check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FoodLedger {
    pub spawned: u64,
    pub consumed: u64,
}

pub struct World {
    pub config: RunConfig,
    pub map: WorldMap,
    pub food: Vec<u32>,
    /// Sorted by id.
    pub agents: Vec<Agent>,
    pub tick: u64,
    pub ledger: FoodLedger,
    food_rng: SimRng,
    roster: Vec<RosterEntry>,
}

impl World {
    /// Builds the scenario's groups and places them on their spawn regions.
    pub fn new(config: RunConfig) -> Result<Self> {
        config.validate()?;
        let map = match &config.scenario.map {
            Some(p) => WorldMap::load(p)?,
            None => WorldMap::default_map(),
        };
        Self::with_map(config, map)
    }

    pub fn with_map(config: RunConfig, map: WorldMap) -> Result<Self> {
        let sc = &config.scenario;
        let mut agents = Vec::new();
        let mut entries = Vec::new();
        for group in 1..=sc.scenario.groups() {
            let people = roster(
                sc.group_seed,
                group,
                sc.agents_per_group,
                &config.personality,
                sc.personality,
            )?;
            let region = if group == 1 {
                Region::Spawn1
            } else {
                Region::Spawn2
            };
            let tiles = map.region_tiles(region);
            if tiles.len() < people.len() {
                return Err(Error::Map(format!(
                    "spawn region {group} has {} tiles for {} agents",
                    tiles.len(),
                    people.len()
                )));
            }
            let n = people.len();
            for (i, p) in people.iter().enumerate() {
                let id = AgentId::new(group, i as u32);
                let pos = tiles[i * tiles.len() / n];
                let slot = agents.len() as u64;
                let rng = stream(sc.group_seed, sc.sim_seed, "agent", slot);
                agents.push(Agent::new(id, p, pos, &map, &config, rng));
                entries.push(RosterEntry {
                    id,
                    name: p.name.clone(),
                    set_value: p.set_value,
                    leakage: p.leakage,
                    alpha_pr: p.alpha_pr,
                    start: pos,
                });
            }
        }
        let food_rng = stream(sc.group_seed, sc.sim_seed, "food", 0);
        Ok(Self {
            food: vec![0; map.len()],
            map,
            agents,
            tick: 0,
            ledger: FoodLedger::default(),
            food_rng,
            roster: entries,
            config,
        })
    }

    pub fn header(&self) -> RunHeader {
        RunHeader {
            format: LOG_FORMAT.into(),
            version: LOG_VERSION,
            config: self.config.clone(),
            map_width: self.map.width(),
            map_height: self.map.height(),
            roster: self.roster.clone(),
        }
    }

    pub fn agent(&self, id: AgentId) -> Option<&Agent> {
        self.index_of(id).map(|i| &self.agents[i])
    }

    fn index_of(&self, id: AgentId) -> Option<usize> {
        self.agents.binary_search_by_key(&id, |a| a.id).ok()
    }

    pub fn food_on_map(&self) -> u64 {
        self.food.iter().map(|&f| u64::from(f)).sum()
    }

    pub fn food_in_storage(&self) -> u64 {
        self.agents.iter().map(|a| u64::from(a.storage)).sum()
    }

    /// Spawned food equals food on the map, in storage, and eaten.
    pub fn food_balanced(&self) -> bool {
        self.food_on_map() + self.food_in_storage() + self.ledger.consumed == self.ledger.spawned
    }

    /// Each spawn point below capacity gains one unit with probability
    /// `food_rate`.
    pub fn spawn_food(&mut self) {
        let rate = self.config.world.food_rate;
        let cap = self.config.world.max_food_per_tile;
        for &c in self.map.food_spawn_points() {
            // One draw per point per tick keeps the stream aligned with the
            // point list regardless of fill state.
            let hit = self.food_rng.gen_bool(rate.clamp(0.0, 1.0));
            let i = self.map.index(c).expect("spawn point on map");
            if hit && self.food[i] < cap {
                self.food[i] += 1;
                self.ledger.spawned += 1;
            }
        }
    }

    /// Advances one tick and returns its events sorted by actor.
    pub fn step(&mut self) -> Vec<Event> {
        self.spawn_food();
        let publics: Vec<AgentPublic> = self.agents.iter().map(Agent::public).collect();
        let tick = self.tick;
        let mut out = TickOutput::default();
        {
            let view = WorldView {
                tick,
                map: &self.map,
                food: &self.food,
                agents: &publics,
                scenario: self.config.scenario.scenario,
            };
            let ctx = Ctx {
                config: &self.config,
                tick,
            };
            for a in self.agents.iter_mut().filter(|a| a.alive) {
                a.tick(&view, &ctx, &mut out);
            }
        }
        let effects = std::mem::take(&mut out.effects);
        self.resolve(effects, &mut out);
        for a in self.agents.iter_mut() {
            if a.alive && a.health <= 0 {
                a.kill();
                out.events.push(Event {
                    tick,
                    actor: a.id,
                    kind: EventKind::Death,
                });
            }
        }
        self.ledger.consumed += out
            .events
            .iter()
            .filter(|e| matches!(e.kind, EventKind::Eat { .. }))
            .count() as u64;
        let mut events = out.events;
        events.sort_by_key(|e| e.actor);
        self.tick += 1;
        events
    }

    /// Applies effects phase by phase, each phase in agent order.
    fn resolve(&mut self, effects: Vec<Effect>, out: &mut TickOutput) {
        let mut shouts: Vec<ShoutOut> = Vec::new();
        for e in &effects {
            if let Effect::Move { agent, to } = *e {
                self.resolve_move(agent, to);
            }
        }
        let ctx_tick = self.tick;
        for e in effects.iter().filter(|e| !matches!(e, Effect::Move { .. })) {
            match *e {
                Effect::Collect { agent, tile, eat } => {
                    let Some(i) = self.index_of(agent) else {
                        continue;
                    };
                    let ti = self.map.index(tile);
                    let taken = self.agents[i].pos == tile && ti.is_some_and(|t| self.food[t] > 0);
                    if taken {
                        self.food[ti.expect("tile on map")] -= 1;
                    }
                    let ctx = Ctx {
                        config: &self.config,
                        tick: ctx_tick,
                    };
                    self.agents[i].on_collect(tile, eat, taken, &ctx, out);
                }
                Effect::Hit {
                    attacker,
                    victim,
                    damage,
                    assist,
                } => self.resolve_hit(attacker, victim, damage, assist, &mut shouts, out),
                Effect::Heal {
                    healer,
                    patient,
                    amount,
                } => {
                    let (Some(h), Some(p)) = (self.index_of(healer), self.index_of(patient)) else {
                        continue;
                    };
                    let reachable = self.agents[p].alive
                        && self.agents[h].pos.distance(self.agents[p].pos) <= 1;
                    let restored = if reachable {
                        amount
                            .min(self.config.health.max - self.agents[p].health)
                            .max(0)
                    } else {
                        0
                    };
                    let ctx = Ctx {
                        config: &self.config,
                        tick: ctx_tick,
                    };
                    self.agents[h].on_heal_delivered(patient, restored, &ctx, out);
                    self.agents[p].on_healed(healer, restored, &ctx, out);
                }
                Effect::Give { giver, receiver } => {
                    let (Some(g), Some(r)) = (self.index_of(giver), self.index_of(receiver)) else {
                        continue;
                    };
                    let cap = self.config.health.storage_capacity;
                    let ok = self.agents[g].storage > 0
                        && self.agents[g].pos.distance(self.agents[r].pos) <= 1
                        && self.agents[r].can_receive_food(cap);
                    let ctx = Ctx {
                        config: &self.config,
                        tick: ctx_tick,
                    };
                    self.agents[g].on_gift_delivered(receiver, ok, &ctx, out);
                    if ok {
                        self.agents[r].on_gift_received(giver, &ctx, out);
                    }
                }
                Effect::Shout(s) => shouts.push(s),
                Effect::ExchangeReply {
                    responder,
                    initiator,
                    plan,
                } => self.resolve_exchange(responder, initiator, plan, out),
                Effect::Move { .. } => unreachable!("moves resolved first"),
            }
        }
        let range = self.config.world.view_range;
        for s in shouts {
            for a in self.agents.iter_mut() {
                if a.alive && a.id != s.sender && a.pos.distance(s.origin) <= range {
                    a.inbox.push(s);
                }
            }
        }
    }

    fn occupied(&self, c: HexCoord, except: usize) -> bool {
        self.agents
            .iter()
            .enumerate()
            .any(|(j, a)| j != except && a.alive && a.pos == c)
    }

    /// Steps into a free tile; a blocked mover sidesteps to a random free
    /// neighbor with the configured probability, otherwise waits.
    fn resolve_move(&mut self, agent: AgentId, to: HexCoord) {
        let Some(i) = self.index_of(agent) else {
            return;
        };
        let from = self.agents[i].pos;
        if from.distance(to) == 1 && self.map.is_accessible(to) && !self.occupied(to, i) {
            self.agents[i].on_moved(to, to);
            return;
        }
        let p = self.config.world.sidestep_probability.clamp(0.0, 1.0);
        if self.agents[i].rng.gen_bool(p) {
            let free: Vec<HexCoord> = from
                .neighbors()
                .into_iter()
                .filter(|&n| self.map.is_accessible(n) && !self.occupied(n, i))
                .collect();
            if let Some(&n) = free.choose(&mut self.agents[i].rng) {
                self.agents[i].on_moved(n, to);
                return;
            }
        }
        self.agents[i].on_move_blocked(to);
    }

    fn resolve_hit(
        &mut self,
        attacker: AgentId,
        victim: AgentId,
        damage: i32,
        assist: Option<AgentId>,
        shouts: &mut Vec<ShoutOut>,
        out: &mut TickOutput,
    ) {
        let (Some(a), Some(v)) = (self.index_of(attacker), self.index_of(victim)) else {
            return;
        };
        let landed = self.agents[v].alive && self.agents[a].pos.distance(self.agents[v].pos) <= 1;
        let ctx = Ctx {
            config: &self.config,
            tick: self.tick,
        };
        if landed {
            out.events.push(Event {
                tick: self.tick,
                actor: attacker,
                kind: EventKind::Hit {
                    target: victim,
                    damage,
                },
            });
        }
        self.agents[a].on_hit_delivered(victim, damage, landed, &ctx, out);
        if !landed {
            return;
        }
        shouts.push(self.agents[v].on_attacked(attacker, damage, &ctx, out));
        if let Some(h) = assist.and_then(|h| self.index_of(h)) {
            if self.agents[h].alive && h != v {
                self.agents[h].on_assisted(attacker, &ctx, out);
            }
        }
    }

    fn resolve_exchange(
        &mut self,
        responder: AgentId,
        initiator: AgentId,
        plan: crate::plans::PlanId,
        out: &mut TickOutput,
    ) {
        let (Some(r), Some(i)) = (self.index_of(responder), self.index_of(initiator)) else {
            return;
        };
        let ctx = Ctx {
            config: &self.config,
            tick: self.tick,
        };
        let waiting = self.agents[i].alive && self.agents[i].awaits_reply(responder, plan);
        let answering = self.agents[r].is_responding(initiator, plan);
        let close = self.agents[i].pos.distance(self.agents[r].pos) <= 2;
        if !(waiting && answering && close) {
            // The initiator gave up or walked off; its own timeout covers it.
            if answering {
                self.agents[r].on_exchange_done(initiator, plan, false, &ctx, out);
            }
            return;
        }
        let mem = &self.config.memory;
        let tick = self.tick;
        if plan == crate::plans::PlanId::ExchangeLocationInfo {
            let from_i = self.agents[i].sample_tiles(mem.tiles_per_exchange);
            let from_r = self.agents[r].sample_tiles(mem.tiles_per_exchange);
            for (c, assoc) in &from_i {
                self.agents[r]
                    .location
                    .receive(*c, assoc, &mem.exchange.location, tick);
            }
            for (c, assoc) in &from_r {
                self.agents[i]
                    .location
                    .receive(*c, assoc, &mem.exchange.location, tick);
            }
        } else {
            let from_i = self.agents[i].sample_subject(responder);
            let from_r = self.agents[r].sample_subject(initiator);
            if let Some((subject, heard)) = from_i {
                self.agents[r]
                    .social
                    .receive(subject, heard, &mem.exchange, tick);
            }
            if let Some((subject, heard)) = from_r {
                self.agents[i]
                    .social
                    .receive(subject, heard, &mem.exchange, tick);
            }
        }
        out.events.push(Event {
            tick,
            actor: initiator,
            kind: EventKind::Exchange {
                plan,
                partner: responder,
            },
        });
        self.agents[i].on_exchange_done(responder, plan, true, &ctx, out);
        self.agents[r].on_exchange_done(initiator, plan, true, &ctx, out);
    }

    /// Directed opinion graph over every agent, dead ones included.
    pub fn social_snapshot(&self) -> SocialNetworkSnapshot {
        let nodes = self
            .agents
            .iter()
            .map(|a| Node {
                id: a.id,
                name: a.name.clone(),
                group: a.id.group,
                alive: a.alive,
            })
            .collect();
        let edges = self
            .agents
            .iter()
            .flat_map(|a| {
                a.social.records().map(move |r| Edge {
                    from: a.id,
                    to: r.other,
                    score: r.score,
                })
            })
            .collect();
        SocialNetworkSnapshot {
            tick: self.tick,
            nodes,
            edges,
        }
    }

    /// Steps to the configured tick count, collecting every event.
    pub fn run(&mut self) -> RunLog {
        let mut events = Vec::new();
        while self.tick < self.config.scenario.ticks {
            events.extend(self.step());
        }
        RunLog {
            header: self.header(),
            events,
            snapshot: Some(self.social_snapshot()),
        }
    }
}

/// Builds the configured scenario and runs it to completion.
pub fn run_scenario(config: &RunConfig) -> Result<RunLog> {
    Ok(World::new(config.clone())?.run())
}
