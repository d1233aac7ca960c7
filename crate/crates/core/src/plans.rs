//! Action plan catalog, need satisfaction signals and plan learning.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::needs::{NeedId, NeedVec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PlanId {
    Explore,
    Engage,
    Flee,
    SearchFood,
    CallForFood,
    GiveFood,
    CollectFood,
    GeneralFood,
    SelfHeal,
    RequestHeal,
    GoHeal,
    ExchangeSocialInfo,
    ExchangeLocationInfo,
}

impl PlanId {
    pub const ALL: [PlanId; 13] = [
        PlanId::Explore,
        PlanId::Engage,
        PlanId::Flee,
        PlanId::SearchFood,
        PlanId::CallForFood,
        PlanId::GiveFood,
        PlanId::CollectFood,
        PlanId::GeneralFood,
        PlanId::SelfHeal,
        PlanId::RequestHeal,
        PlanId::GoHeal,
        PlanId::ExchangeSocialInfo,
        PlanId::ExchangeLocationInfo,
    ];

    /// Plans that involve another agent in a cooperative way.
    pub const SOCIAL: [PlanId; 6] = [
        PlanId::CallForFood,
        PlanId::GiveFood,
        PlanId::RequestHeal,
        PlanId::GoHeal,
        PlanId::ExchangeSocialInfo,
        PlanId::ExchangeLocationInfo,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_social(self) -> bool {
        Self::SOCIAL.contains(&self)
    }

    pub fn is_exchange(self) -> bool {
        matches!(
            self,
            PlanId::ExchangeSocialInfo | PlanId::ExchangeLocationInfo
        )
    }

    /// Whether the signals depend on the social score toward a counterpart.
    pub fn is_relational(self) -> bool {
        self == PlanId::Engage || self.is_social()
    }

    pub fn signal_row(self) -> SignalRow {
        match self {
            PlanId::Explore => SignalRow::Explore,
            PlanId::Engage => SignalRow::Engage,
            PlanId::Flee => SignalRow::Flee,
            PlanId::SearchFood => SignalRow::SearchFood,
            PlanId::CallForFood => SignalRow::CallForFood,
            PlanId::GiveFood => SignalRow::GiveFood,
            PlanId::CollectFood => SignalRow::CollectFood,
            PlanId::GeneralFood => SignalRow::GeneralFood,
            PlanId::SelfHeal => SignalRow::SelfHeal,
            PlanId::RequestHeal => SignalRow::RequestHeal,
            PlanId::GoHeal => SignalRow::GoHeal,
            PlanId::ExchangeSocialInfo | PlanId::ExchangeLocationInfo => SignalRow::ExchangeInfo,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PlanId::Explore => "Explore",
            PlanId::Engage => "Engage",
            PlanId::Flee => "Flee",
            PlanId::SearchFood => "SearchFood",
            PlanId::CallForFood => "CallForFood",
            PlanId::GiveFood => "GiveFood",
            PlanId::CollectFood => "CollectFood",
            PlanId::GeneralFood => "GeneralFood",
            PlanId::SelfHeal => "SelfHeal",
            PlanId::RequestHeal => "RequestHeal",
            PlanId::GoHeal => "GoHeal",
            PlanId::ExchangeSocialInfo => "ExchangeSocialInfo",
            PlanId::ExchangeLocationInfo => "ExchangeLocationInfo",
        }
    }

    pub fn from_name(s: &str) -> Option<PlanId> {
        PlanId::ALL.into_iter().find(|p| p.name() == s)
    }
}

impl fmt::Display for PlanId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Rows of the signal table. Both exchange plans share one row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SignalRow {
    Explore,
    Engage,
    Flee,
    SearchFood,
    CallForFood,
    GiveFood,
    CollectFood,
    GeneralFood,
    SelfHeal,
    RequestHeal,
    GoHeal,
    ExchangeInfo,
}

impl SignalRow {
    pub const ALL: [SignalRow; 12] = [
        SignalRow::Explore,
        SignalRow::Engage,
        SignalRow::Flee,
        SignalRow::SearchFood,
        SignalRow::CallForFood,
        SignalRow::GiveFood,
        SignalRow::CollectFood,
        SignalRow::GeneralFood,
        SignalRow::SelfHeal,
        SignalRow::RequestHeal,
        SignalRow::GoHeal,
        SignalRow::ExchangeInfo,
    ];

    pub fn key(self) -> &'static str {
        match self {
            SignalRow::Explore => "explore",
            SignalRow::Engage => "engage",
            SignalRow::Flee => "flee",
            SignalRow::SearchFood => "search_food",
            SignalRow::CallForFood => "call_for_food",
            SignalRow::GiveFood => "give_food",
            SignalRow::CollectFood => "collect_food",
            SignalRow::GeneralFood => "general_food",
            SignalRow::SelfHeal => "self_heal",
            SignalRow::RequestHeal => "request_heal",
            SignalRow::GoHeal => "go_heal",
            SignalRow::ExchangeInfo => "exchange_info",
        }
    }

    pub fn from_key(s: &str) -> Option<SignalRow> {
        SignalRow::ALL.into_iter().find(|r| r.key() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    Failure,
}

impl Outcome {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Outcome::Success
        } else {
            Outcome::Failure
        }
    }

    pub fn is_success(self) -> bool {
        self == Outcome::Success
    }

    pub fn key(self) -> &'static str {
        match self {
            Outcome::Success => "success",
            Outcome::Failure => "failure",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalPair {
    pub success: NeedVec,
    pub failure: NeedVec,
}

impl SignalPair {
    const fn new(success: [f64; 5], failure: [f64; 5]) -> Self {
        Self {
            success: NeedVec(success),
            failure: NeedVec(failure),
        }
    }

    pub fn get(&self, outcome: Outcome) -> &NeedVec {
        match outcome {
            Outcome::Success => &self.success,
            Outcome::Failure => &self.failure,
        }
    }
}

/// Success and failure signal vectors for every row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignalTable {
    pub explore: SignalPair,
    pub engage: SignalPair,
    pub flee: SignalPair,
    pub search_food: SignalPair,
    pub call_for_food: SignalPair,
    pub give_food: SignalPair,
    pub collect_food: SignalPair,
    pub general_food: SignalPair,
    pub self_heal: SignalPair,
    pub request_heal: SignalPair,
    pub go_heal: SignalPair,
    pub exchange_info: SignalPair,
}

impl Default for SignalTable {
    fn default() -> Self {
        Self {
            explore: SignalPair::new([0.0, 0.0, 0.0, 0.3, 0.25], [0.0; 5]),
            engage: SignalPair::new([0.0, 0.0, -0.25, 0.35, 0.35], [0.0, 0.0, -0.25, -0.3, -0.4]),
            flee: SignalPair::new([0.1, 0.0, 0.0, 0.1, 0.05], [-0.15, 0.0, 0.0, -0.2, -0.2]),
            search_food: SignalPair::new([0.0, 0.2, 0.0, 0.2, 0.2], [0.0, 0.0, 0.0, -0.2, -0.3]),
            call_for_food: SignalPair::new(
                [0.0, 0.2, 0.1, 0.0, 0.05],
                [0.0, 0.0, -0.2, -0.2, -0.2],
            ),
            give_food: SignalPair::new([0.0, 0.0, 0.2, 0.05, 0.1], [0.0, 0.0, -0.22, -0.1, -0.2]),
            collect_food: SignalPair::new([0.0, 0.0, 0.0, 0.1, 0.1], [0.0, 0.0, 0.0, -0.2, -0.2]),
            general_food: SignalPair::new([0.0, 0.2, 0.0, 0.0, 0.25], [0.0, 0.0, 0.0, -0.25, -0.3]),
            self_heal: SignalPair::new([0.1, 0.0, 0.0, 0.0, 0.2], [0.0, 0.0, 0.0, -0.05, -0.2]),
            request_heal: SignalPair::new(
                [0.1, 0.0, 0.2, 0.0, 0.05],
                [0.0, 0.0, -0.2, -0.05, -0.2],
            ),
            go_heal: SignalPair::new([0.0, 0.0, 0.2, 0.05, 0.1], [0.0, 0.0, -0.2, -0.1, -0.2]),
            exchange_info: SignalPair::new(
                [0.0, 0.0, 0.2, 0.05, 0.05],
                [0.0, 0.0, -0.2, -0.15, -0.2],
            ),
        }
    }
}

impl SignalTable {
    pub fn row(&self, row: SignalRow) -> &SignalPair {
        match row {
            SignalRow::Explore => &self.explore,
            SignalRow::Engage => &self.engage,
            SignalRow::Flee => &self.flee,
            SignalRow::SearchFood => &self.search_food,
            SignalRow::CallForFood => &self.call_for_food,
            SignalRow::GiveFood => &self.give_food,
            SignalRow::CollectFood => &self.collect_food,
            SignalRow::GeneralFood => &self.general_food,
            SignalRow::SelfHeal => &self.self_heal,
            SignalRow::RequestHeal => &self.request_heal,
            SignalRow::GoHeal => &self.go_heal,
            SignalRow::ExchangeInfo => &self.exchange_info,
        }
    }

    fn row_mut(&mut self, row: SignalRow) -> &mut SignalPair {
        match row {
            SignalRow::Explore => &mut self.explore,
            SignalRow::Engage => &mut self.engage,
            SignalRow::Flee => &mut self.flee,
            SignalRow::SearchFood => &mut self.search_food,
            SignalRow::CallForFood => &mut self.call_for_food,
            SignalRow::GiveFood => &mut self.give_food,
            SignalRow::CollectFood => &mut self.collect_food,
            SignalRow::GeneralFood => &mut self.general_food,
            SignalRow::SelfHeal => &mut self.self_heal,
            SignalRow::RequestHeal => &mut self.request_heal,
            SignalRow::GoHeal => &mut self.go_heal,
            SignalRow::ExchangeInfo => &mut self.exchange_info,
        }
    }

    /// Unmodified signal vector for a plan outcome.
    pub fn base(&self, plan: PlanId, outcome: Outcome) -> &NeedVec {
        self.row(plan.signal_row()).get(outcome)
    }

    pub fn validate(&self) -> Result<()> {
        for row in SignalRow::ALL {
            let pair = self.row(row);
            for v in pair.success.0.iter().chain(pair.failure.0.iter()) {
                if !(-1.0..=1.0).contains(v) {
                    return Err(Error::SignalTable(format!(
                        "{}: value {v} outside [-1, 1]",
                        row.key()
                    )));
                }
            }
        }
        Ok(())
    }

    /// CSV with columns `row,outcome,p,e,a,ce,co`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["row", "outcome", "p", "e", "a", "ce", "co"])
            .expect("in-memory write");
        for row in SignalRow::ALL {
            for outcome in [Outcome::Success, Outcome::Failure] {
                let v = self.row(row).get(outcome);
                let mut rec = vec![row.key().to_string(), outcome.key().to_string()];
                rec.extend(v.0.iter().map(|x| x.to_string()));
                w.write_record(&rec).expect("in-memory write");
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii")
    }

    /// Parses [`SignalTable::to_csv`] output. Every row and outcome must
    /// appear exactly once.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut table = SignalTable::default();
        let mut seen = std::collections::HashSet::new();
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        for rec in rd.records() {
            let rec = rec.map_err(|e| Error::SignalTable(e.to_string()))?;
            if rec.len() != 7 {
                return Err(Error::SignalTable(format!(
                    "expected 7 columns, got {}",
                    rec.len()
                )));
            }
            let row = SignalRow::from_key(&rec[0])
                .ok_or_else(|| Error::SignalTable(format!("unknown row {:?}", &rec[0])))?;
            let outcome = match &rec[1] {
                "success" => Outcome::Success,
                "failure" => Outcome::Failure,
                other => return Err(Error::SignalTable(format!("unknown outcome {other:?}"))),
            };
            if !seen.insert((row, outcome)) {
                return Err(Error::SignalTable(format!(
                    "duplicate {} {}",
                    row.key(),
                    outcome.key()
                )));
            }
            let mut v = NeedVec::ZERO;
            for (i, n) in NeedId::ALL.into_iter().enumerate() {
                v[n] = rec[i + 2]
                    .trim()
                    .parse()
                    .map_err(|_| Error::SignalTable(format!("bad number {:?}", &rec[i + 2])))?;
            }
            let pair = table.row_mut(row);
            match outcome {
                Outcome::Success => pair.success = v,
                Outcome::Failure => pair.failure = v,
            }
        }
        if seen.len() != SignalRow::ALL.len() * 2 {
            return Err(Error::SignalTable("missing rows".into()));
        }
        table.validate()?;
        Ok(table)
    }

    /// Signal actually applied for an outcome, adjusted by the social score
    /// toward the counterpart for relational plans.
    pub fn effective_signal(
        &self,
        plan: PlanId,
        outcome: Outcome,
        s: Option<f64>,
    ) -> Result<NeedVec> {
        let base = *self.base(plan, outcome);
        if !plan.is_relational() {
            return Ok(base);
        }
        let s = s.ok_or(Error::MissingSocialScore(plan))?;
        Ok(modulate(plan, &base, s))
    }
}

/// Applies the relationship modifiers to a vector in table units.
pub fn modulate(plan: PlanId, v: &NeedVec, s: f64) -> NeedVec {
    let mut out = *v;
    if plan.is_relational() {
        out[NeedId::Affiliation] *= affiliation_modifier(s);
    }
    if plan == PlanId::Engage {
        out[NeedId::Certainty] *= certainty_modifier(s);
    }
    out
}

/// `s + 1`
pub fn affiliation_modifier(s: f64) -> f64 {
    s + 1.0
}

/// `-s^3`
pub fn certainty_modifier(s: f64) -> f64 {
    -(s * s * s)
}

/// Exponential moving average of the success indicator.
pub fn update_success_probability(pr: f64, succeeded: bool, alpha: f64) -> f64 {
    let hit = if succeeded { 1.0 } else { 0.0 };
    ((1.0 - alpha) * pr + alpha * hit).clamp(0.0, 1.0)
}

/// Componentwise moving average, clipped to [-1, 1].
pub fn update_expected_satisfaction(e: &NeedVec, observed: &NeedVec, alpha: f64) -> NeedVec {
    let mut out = NeedVec::ZERO;
    for n in NeedId::ALL {
        out[n] = ((1.0 - alpha) * e[n] + alpha * observed[n]).clamp(-1.0, 1.0);
    }
    out
}

/// Learned state of one plan.
///
/// `expected` is kept in table units; relationship modifiers are applied per
/// counterpart when the plan is evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionPlanState {
    pub plan: PlanId,
    pub pr: f64,
    pub expected: NeedVec,
    pub urgency: f64,
}

impl ActionPlanState {
    /// Fresh plan: `Pr = 1`, expectation equal to the success row.
    pub fn new(plan: PlanId, table: &SignalTable) -> Self {
        Self {
            plan,
            pr: 1.0,
            expected: *table.base(plan, Outcome::Success),
            urgency: 0.0,
        }
    }

    pub fn learn(&mut self, outcome: Outcome, table: &SignalTable, alpha: f64) {
        self.pr = update_success_probability(self.pr, outcome.is_success(), alpha);
        self.expected =
            update_expected_satisfaction(&self.expected, table.base(self.plan, outcome), alpha);
    }

    /// Expectation toward a counterpart with social score `s`.
    pub fn expected_for(&self, s: Option<f64>) -> NeedVec {
        match s {
            Some(s) => modulate(self.plan, &self.expected, s),
            None => self.expected,
        }
    }
}

/// One learned state per plan, indexed by [`PlanId`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanBook(Vec<ActionPlanState>);

impl PlanBook {
    pub fn new(table: &SignalTable) -> Self {
        PlanBook(
            PlanId::ALL
                .iter()
                .map(|&p| ActionPlanState::new(p, table))
                .collect(),
        )
    }

    pub fn get(&self, plan: PlanId) -> &ActionPlanState {
        &self.0[plan.index()]
    }

    pub fn get_mut(&mut self, plan: PlanId) -> &mut ActionPlanState {
        &mut self.0[plan.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = &ActionPlanState> {
        self.0.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const EPS: f64 = 1e-12;

    #[test]
    fn affiliation_modifier_examples() {
        assert_eq!(affiliation_modifier(-1.0), 0.0);
        assert_eq!(affiliation_modifier(0.0), 1.0);
        assert!((affiliation_modifier(0.75) - 1.75).abs() < EPS);
    }

    #[test]
    fn certainty_modifier_examples() {
        assert_eq!(certainty_modifier(0.0), 0.0);
        assert_eq!(certainty_modifier(-1.0), 1.0);
        assert!((certainty_modifier(0.5) + 0.125).abs() < EPS);
    }

    #[test]
    fn effective_signal_examples() {
        let t = SignalTable::default();
        let v = t
            .effective_signal(PlanId::Engage, Outcome::Success, Some(-0.9))
            .unwrap();
        assert!((v[NeedId::Affiliation] + 0.025).abs() < EPS);
        assert!((v[NeedId::Certainty] - 0.35 * 0.729).abs() < EPS);
        assert_eq!(v[NeedId::Competence], 0.35);

        for plan in [PlanId::ExchangeSocialInfo, PlanId::ExchangeLocationInfo] {
            let v = t
                .effective_signal(plan, Outcome::Success, Some(0.0))
                .unwrap();
            assert!((v[NeedId::Affiliation] - 0.2).abs() < EPS);
        }

        let v = t
            .effective_signal(PlanId::Explore, Outcome::Success, None)
            .unwrap();
        assert_eq!(v, NeedVec::new(0.0, 0.0, 0.0, 0.3, 0.25));
    }

    #[test]
    fn relational_plans_require_a_score() {
        let t = SignalTable::default();
        assert!(matches!(
            t.effective_signal(PlanId::GiveFood, Outcome::Success, None),
            Err(Error::MissingSocialScore(PlanId::GiveFood))
        ));
    }

    #[test]
    fn certainty_modifier_only_applies_to_engage() {
        let t = SignalTable::default();
        let v = t
            .effective_signal(PlanId::GoHeal, Outcome::Success, Some(-0.5))
            .unwrap();
        assert_eq!(v[NeedId::Certainty], 0.05);
        assert!((v[NeedId::Affiliation] - 0.1).abs() < EPS);
    }

    #[test]
    fn shared_rows() {
        let t = SignalTable::default();
        assert_eq!(
            t.base(PlanId::ExchangeSocialInfo, Outcome::Failure),
            t.base(PlanId::ExchangeLocationInfo, Outcome::Failure)
        );
    }

    #[test]
    fn success_probability_examples() {
        assert!((update_success_probability(1.0, false, 0.3) - 0.7).abs() < EPS);
        assert!((update_success_probability(0.7, true, 0.3) - 0.79).abs() < EPS);
        assert_eq!(update_success_probability(0.42, true, 0.0), 0.42);
    }

    #[test]
    fn expected_satisfaction_examples() {
        let e = update_expected_satisfaction(&NeedVec::ZERO, &NeedVec::splat(0.3), 0.3);
        assert!((e[NeedId::Energy] - 0.09).abs() < EPS);
        let v = NeedVec::new(0.1, -0.2, 0.3, -0.4, 0.5);
        let same = update_expected_satisfaction(&v, &v, 0.3);
        assert!(NeedId::ALL.iter().all(|&n| (same[n] - v[n]).abs() < EPS));
        let e = update_expected_satisfaction(&NeedVec::splat(0.2), &NeedVec::splat(-0.4), 0.3);
        assert!((e[NeedId::Certainty] - 0.02).abs() < EPS);
    }

    #[test]
    fn fresh_plan_state() {
        let t = SignalTable::default();
        let s = ActionPlanState::new(PlanId::Explore, &t);
        assert_eq!(s.pr, 1.0);
        assert_eq!(s.expected, *t.base(PlanId::Explore, Outcome::Success));
    }

    #[test]
    fn default_table_matches_fixture() {
        let fixture = include_str!("../data/signal_table.csv");
        assert_eq!(SignalTable::default().to_csv(), fixture);
        assert_eq!(
            SignalTable::from_csv(fixture).unwrap(),
            SignalTable::default()
        );
    }

    #[test]
    fn csv_rejects_bad_input() {
        assert!(
            SignalTable::from_csv("row,outcome,p,e,a,ce,co\nexplore,success,0,0,0,0.3,0.25\n")
                .is_err()
        );
        let bad = SignalTable::default()
            .to_csv()
            .replace("0.35,0.35", "1.5,0.35");
        assert!(SignalTable::from_csv(&bad).is_err());
    }

    #[test]
    fn partial_toml_override_keeps_other_rows() {
        let t: SignalTable = toml::from_str(
            "engage = { success = [0, 0, -0.1, 0.5, 0.5], failure = [0, 0, 0, 0, 0] }",
        )
        .unwrap();
        assert_eq!(t.engage.success[NeedId::Certainty], 0.5);
        assert_eq!(t.explore, SignalTable::default().explore);
    }

    proptest! {
        #[test]
        fn pr_stays_in_unit_interval(
            start in 0.0f64..=1.0,
            alpha in 0.001f64..0.999,
            seq in prop::collection::vec(any::<bool>(), 0..300),
        ) {
            let mut pr = start;
            for ok in seq {
                pr = update_success_probability(pr, ok, alpha);
                prop_assert!((0.0..=1.0).contains(&pr));
            }
        }

        #[test]
        fn pr_tracks_constant_outcome(alpha in 0.05f64..0.9, ok in any::<bool>()) {
            let mut pr = 0.5;
            for _ in 0..400 {
                pr = update_success_probability(pr, ok, alpha);
            }
            let target = if ok { 1.0 } else { 0.0 };
            prop_assert!((pr - target).abs() < 1e-6);
        }

        #[test]
        fn modifier_ranges(s in -1.0f64..=1.0) {
            let la = affiliation_modifier(s);
            let lce = certainty_modifier(s);
            prop_assert!((0.0..=2.0).contains(&la));
            prop_assert!((-1.0..=1.0).contains(&lce));
            if s != 0.0 && lce != 0.0 {
                prop_assert!(lce.signum() != s.signum());
            }
        }

        #[test]
        fn engaging_enemies_pays_more_than_friends(s in 0.01f64..=1.0) {
            let t = SignalTable::default();
            let enemy = t.effective_signal(PlanId::Engage, Outcome::Success, Some(-s)).unwrap();
            let friend = t.effective_signal(PlanId::Engage, Outcome::Success, Some(s)).unwrap();
            prop_assert!(enemy[NeedId::Certainty] > friend[NeedId::Certainty]);
            prop_assert!(enemy[NeedId::Affiliation] > friend[NeedId::Affiliation]);
        }
    }
}
