//! Location memory (Memory-World-Cells) and social memory (opinion scores).

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::agent::AgentId;
use crate::config::{ScenarioId, SocialInit};
use crate::error::{Error, Result};
use crate::hexgrid::{disc, HexCoord, KnownTiles, WorldMap};
use crate::needs::{NeedId, NeedVec};

/// Signals spread to tiles closer than this many steps from their origin.
pub const SIGNAL_REACH: u32 = 4;

/// Per-tick forgetting factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForgettingRates {
    pub location_positive: f64,
    pub location_negative: f64,
    pub social_positive: f64,
    pub social_negative: f64,
}

impl Default for ForgettingRates {
    fn default() -> Self {
        Self {
            location_positive: 0.9995,
            location_negative: 0.9985,
            social_positive: 0.9995,
            social_negative: 0.9992,
        }
    }
}

/// Discount factors applied to information received from another agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExchangeDiscounts {
    /// Per-need factor for location associations.
    pub location: NeedVec,
    /// Factor for an agent the receiver already has an opinion about.
    pub social_known: f64,
    /// Factor for an agent the receiver has never met.
    pub social_unknown: f64,
}

impl Default for ExchangeDiscounts {
    fn default() -> Self {
        Self {
            location: NeedVec::splat(0.1),
            social_known: 0.8,
            social_unknown: 0.4,
        }
    }
}

fn clip(v: f64) -> f64 {
    v.clamp(-1.0, 1.0)
}

/// Sign-dependent decay of a single association or score.
pub fn decay_value(v: f64, positive: f64, negative: f64) -> f64 {
    if v >= 0.0 {
        v * positive
    } else {
        v * negative
    }
}

/// Weight of a signal at hex distance `d` from its origin.
pub fn spread_weight(d: u32) -> f64 {
    ((SIGNAL_REACH as f64 - d as f64) / SIGNAL_REACH as f64).max(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryWorldCell {
    pub coord: HexCoord,
    /// Need satisfaction associations, each in [-1, 1].
    pub assoc: NeedVec,
    pub discovered_at: u64,
}

/// The agent's mental map: one cell per discovered tile.
///
/// Cells are kept in discovery order; a dense slot table keyed by the map's
/// tile index makes membership checks cheap during pathfinding.
#[derive(Debug, Clone)]
pub struct LocationMemory {
    width: i32,
    height: i32,
    slots: Vec<u32>,
    cells: Vec<MemoryWorldCell>,
}

const NO_SLOT: u32 = u32::MAX;

impl LocationMemory {
    pub fn for_map(map: &WorldMap) -> Self {
        Self {
            width: map.width(),
            height: map.height(),
            slots: vec![NO_SLOT; map.len()],
            cells: Vec::new(),
        }
    }

    fn slot_index(&self, c: HexCoord) -> Option<usize> {
        let (col, row) = c.to_offset();
        if col < 0 || row < 0 || col >= self.width || row >= self.height {
            None
        } else {
            Some((row * self.width + col) as usize)
        }
    }

    fn position(&self, c: HexCoord) -> Option<usize> {
        let slot = *self.slots.get(self.slot_index(c)?)?;
        (slot != NO_SLOT).then_some(slot as usize)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, c: HexCoord) -> bool {
        self.position(c).is_some()
    }

    pub fn cell(&self, c: HexCoord) -> Option<&MemoryWorldCell> {
        self.position(c).map(|i| &self.cells[i])
    }

    /// Cells in discovery order.
    pub fn cells(&self) -> &[MemoryWorldCell] {
        &self.cells
    }

    /// Adds a cell with neutral associations. Returns false if the tile was
    /// already known or lies outside the map.
    pub fn discover(&mut self, c: HexCoord, tick: u64) -> bool {
        self.insert(c, NeedVec::ZERO, tick)
    }

    fn insert(&mut self, c: HexCoord, assoc: NeedVec, tick: u64) -> bool {
        let Some(slot) = self.slot_index(c) else {
            return false;
        };
        if self.slots[slot] != NO_SLOT {
            return false;
        }
        self.slots[slot] = self.cells.len() as u32;
        self.cells.push(MemoryWorldCell {
            coord: c,
            assoc: assoc.map(clip),
            discovered_at: tick,
        });
        true
    }

    /// Spreads a need signal from `origin` to every discovered cell closer
    /// than [`SIGNAL_REACH`], attenuated linearly with distance and clipped
    /// to [-1, 1].
    pub fn record_signal(&mut self, origin: HexCoord, need: NeedId, signal: f64) -> Result<()> {
        if !self.contains(origin) {
            return Err(Error::UnknownTile(origin));
        }
        for c in disc(origin, SIGNAL_REACH - 1) {
            if let Some(i) = self.position(c) {
                let w = spread_weight(origin.distance(c));
                let v = &mut self.cells[i].assoc[need];
                *v = clip(*v + signal * w);
            }
        }
        Ok(())
    }

    /// Records every non-zero component of a signal vector.
    pub fn record_signals(&mut self, origin: HexCoord, signals: &NeedVec) -> Result<()> {
        for (n, s) in signals.iter() {
            if s != 0.0 {
                self.record_signal(origin, n, s)?;
            }
        }
        Ok(())
    }

    /// One tick of forgetting.
    pub fn decay(&mut self, rates: &ForgettingRates) {
        let (p, n) = (rates.location_positive, rates.location_negative);
        for cell in &mut self.cells {
            for v in cell.assoc.0.iter_mut() {
                *v = decay_value(*v, p, n);
            }
        }
    }

    /// Merges associations received from another agent for one tile.
    pub fn receive(&mut self, c: HexCoord, incoming: &NeedVec, discount: &NeedVec, tick: u64) {
        match self.position(c) {
            Some(i) => {
                let cell = &mut self.cells[i];
                for n in NeedId::ALL {
                    cell.assoc[n] = merge_location_info(cell.assoc[n], incoming[n], discount[n]);
                }
            }
            None => {
                let mut assoc = NeedVec::ZERO;
                for n in NeedId::ALL {
                    assoc[n] = merge_location_info(0.0, incoming[n], discount[n]);
                }
                self.insert(c, assoc, tick);
            }
        }
    }
}

impl KnownTiles for LocationMemory {
    fn knows(&self, c: HexCoord) -> bool {
        self.contains(c)
    }
}

/// `(1 - alpha) * nu + alpha * incoming`, clipped. An unknown tile enters
/// with `nu = 0`, i.e. `alpha * incoming`.
pub fn merge_location_info(nu: f64, incoming: f64, alpha: f64) -> f64 {
    clip((1.0 - alpha) * nu + alpha * incoming)
}

/// Merge rule for a score heard from another agent.
///
/// Unknown agents get `alpha_unknown * heard`; known agents blend
/// `(1 - alpha_known) * own + alpha_known * heard`.
pub fn merge_social_info(
    own: Option<f64>,
    heard: f64,
    alpha_unknown: f64,
    alpha_known: f64,
) -> f64 {
    clip(match own {
        None => alpha_unknown * heard,
        Some(s) => (1.0 - alpha_known) * s + alpha_known * heard,
    })
}

/// Draws the first-impression score for a newly met agent.
pub fn init_social_score<R: Rng + ?Sized>(
    rng: &mut R,
    same_group: bool,
    scenario: ScenarioId,
    params: &SocialInit,
) -> Result<f64> {
    let dist = match (same_group, scenario) {
        (true, _) => params.same_group,
        (false, ScenarioId::S1) => return Err(Error::NoOpposingGroup),
        (false, ScenarioId::S2) => params.opposing_s2,
        (false, ScenarioId::S3) => params.opposing_s3,
    };
    Ok(clip(dist.sample(rng)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SocialRecord {
    pub other: AgentId,
    pub score: f64,
    pub last_interaction: u64,
}

impl SocialRecord {
    pub fn apply_feedback(&mut self, delta: f64, tick: u64) {
        self.score = clip(self.score + delta);
        self.last_interaction = tick;
    }
}

/// Opinion scores toward every agent met so far, ordered by id.
#[derive(Debug, Clone, Default)]
pub struct SocialMemory {
    records: BTreeMap<AgentId, SocialRecord>,
}

impl SocialMemory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn score(&self, other: AgentId) -> Option<f64> {
        self.records.get(&other).map(|r| r.score)
    }

    pub fn knows(&self, other: AgentId) -> bool {
        self.records.contains_key(&other)
    }

    pub fn get(&self, other: AgentId) -> Option<&SocialRecord> {
        self.records.get(&other)
    }

    pub fn records(&self) -> impl Iterator<Item = &SocialRecord> {
        self.records.values()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Inserts a first impression; existing records are left untouched.
    pub fn meet(&mut self, other: AgentId, score: f64, tick: u64) -> bool {
        if self.records.contains_key(&other) {
            return false;
        }
        self.records.insert(
            other,
            SocialRecord {
                other,
                score: clip(score),
                last_interaction: tick,
            },
        );
        true
    }

    /// Adds `delta` to the score toward `other`, creating a neutral record if
    /// needed. Returns the new score.
    pub fn feedback(&mut self, other: AgentId, delta: f64, tick: u64) -> f64 {
        let rec = self.records.entry(other).or_insert(SocialRecord {
            other,
            score: 0.0,
            last_interaction: tick,
        });
        rec.apply_feedback(delta, tick);
        rec.score
    }

    /// Merges a score heard about `subject`.
    pub fn receive(
        &mut self,
        subject: AgentId,
        heard: f64,
        discounts: &ExchangeDiscounts,
        tick: u64,
    ) -> f64 {
        let merged = merge_social_info(
            self.score(subject),
            heard,
            discounts.social_unknown,
            discounts.social_known,
        );
        let rec = self.records.entry(subject).or_insert(SocialRecord {
            other: subject,
            score: 0.0,
            last_interaction: tick,
        });
        rec.score = merged;
        merged
    }

    pub fn decay(&mut self, rates: &ForgettingRates) {
        for rec in self.records.values_mut() {
            rec.score = decay_value(rec.score, rates.social_positive, rates.social_negative);
        }
    }
}
