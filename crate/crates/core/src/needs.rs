//! The five need tanks.
//!
//! Each tank has a current value, a set value and a per-tick leakage. Action
//! outcomes push pleasure (positive) or displeasure (negative) signals into
//! the tanks; the weighted deviation below the set value is what drives
//! motive selection.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeedId {
    PainAvoidance,
    Energy,
    Affiliation,
    Certainty,
    Competence,
}

impl NeedId {
    /// Fixed iteration order.
    pub const ALL: [NeedId; 5] = [
        NeedId::PainAvoidance,
        NeedId::Energy,
        NeedId::Affiliation,
        NeedId::Certainty,
        NeedId::Competence,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Short label used in tables and logs.
    pub fn short(self) -> &'static str {
        match self {
            NeedId::PainAvoidance => "p",
            NeedId::Energy => "e",
            NeedId::Affiliation => "a",
            NeedId::Certainty => "ce",
            NeedId::Competence => "co",
        }
    }
}

impl fmt::Display for NeedId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short())
    }
}

/// One real value per need, indexed by [`NeedId`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NeedVec(pub [f64; 5]);

impl NeedVec {
    pub const ZERO: NeedVec = NeedVec([0.0; 5]);

    pub fn new(p: f64, e: f64, a: f64, ce: f64, co: f64) -> Self {
        NeedVec([p, e, a, ce, co])
    }

    pub fn splat(v: f64) -> Self {
        NeedVec([v; 5])
    }

    pub fn dot(&self, other: &NeedVec) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn map(self, f: impl Fn(f64) -> f64) -> Self {
        NeedVec(self.0.map(f))
    }

    pub fn iter(&self) -> impl Iterator<Item = (NeedId, f64)> + '_ {
        NeedId::ALL.iter().map(move |&n| (n, self[n]))
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|v| *v == 0.0)
    }
}

impl Index<NeedId> for NeedVec {
    type Output = f64;
    fn index(&self, n: NeedId) -> &f64 {
        &self.0[n.index()]
    }
}

impl IndexMut<NeedId> for NeedVec {
    fn index_mut(&mut self, n: NeedId) -> &mut f64 {
        &mut self.0[n.index()]
    }
}

/// Need weights for the indicator. Defaults model the need hierarchy:
/// pain 3, energy 2, everything else 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeedWeights(pub NeedVec);

impl Default for NeedWeights {
    fn default() -> Self {
        NeedWeights(NeedVec::new(3.0, 2.0, 1.0, 1.0, 1.0))
    }
}

/// Current, set and leakage values of all five tanks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeedState {
    pub current: NeedVec,
    pub set_value: NeedVec,
    pub leakage: NeedVec,
}

impl NeedState {
    /// Tanks filled to `fill[n] * set[n]`, clamped into [0, 1].
    pub fn with_fill(set_value: NeedVec, leakage: NeedVec, fill: NeedVec) -> Self {
        let mut current = NeedVec::ZERO;
        for n in NeedId::ALL {
            current[n] = (set_value[n] * fill[n]).clamp(0.0, 1.0);
        }
        Self {
            current,
            set_value,
            leakage,
        }
    }

    pub fn current(&self, n: NeedId) -> f64 {
        self.current[n]
    }

    /// One tick of leakage on every tank.
    pub fn apply_leakage(&mut self) {
        for n in NeedId::ALL {
            self.current[n] = (self.current[n] - self.leakage[n]).clamp(0.0, 1.0);
        }
    }

    /// Adds a pleasure (> 0) or displeasure (< 0) signal to one tank.
    pub fn apply_signal(&mut self, need: NeedId, signal: f64) {
        self.current[need] = (self.current[need] + signal).clamp(0.0, 1.0);
    }

    /// Applies a whole signal vector.
    pub fn apply_signals(&mut self, signals: &NeedVec) {
        for (n, s) in signals.iter() {
            if s != 0.0 {
                self.apply_signal(n, s);
            }
        }
    }

    pub fn indicator(&self, weights: &NeedWeights, need: NeedId) -> f64 {
        need_indicator(self.set_value[need], self.current[need], weights.0[need])
    }

    /// All five weighted need indicators.
    pub fn indicators(&self, weights: &NeedWeights) -> NeedVec {
        let mut out = NeedVec::ZERO;
        for n in NeedId::ALL {
            out[n] = self.indicator(weights, n);
        }
        out
    }
}

/// `max(0, set - current) * weight`
pub fn need_indicator(set_value: f64, current: f64, weight: f64) -> f64 {
    (set_value - current).max(0.0) * weight
}
