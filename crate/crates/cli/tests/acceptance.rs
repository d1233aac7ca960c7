//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria 1-3, 5 and 6 are enforced and make the target fail. The
//! qualitative scenario checks of criterion 4 are reported per run and by
//! median over the nine runs of each scenario; they do not fail the target.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use psi_sim::agent::{roster, AgentId};
use psi_sim::config::{Gaussian, PersonalityParams, PersonalitySource, ScenarioId};
use psi_sim::hexgrid::{HexCoord, WorldMap};
use psi_sim::memory::{
    decay_value, merge_location_info, merge_social_info, ForgettingRates, LocationMemory,
};
use psi_sim::motive::{
    competence_indicator, motive_strength, preliminary_strength, select_motive, Motive, Target,
};
use psi_sim::needs::{need_indicator, NeedId, NeedState, NeedVec};
use psi_sim::plans::{
    affiliation_modifier, certainty_modifier, update_success_probability, PlanId,
};
use psi_sim::rng::stream;
use psi_sim::telemetry::{
    bin_engage_counts, count_actions, engage_split_since, first_inter_contact, mean_intra_score,
    positive_inter_edges, EventKind, PlanFamily, RunLog,
};
use psi_sim::{RunConfig, World};
use rand::Rng;

include!("../../core/tests/support/seed1.rs");

const GRID_BUDGET: Duration = Duration::from_secs(600);

struct Report {
    enforced_failures: usize,
}

impl Report {
    fn line(&mut self, id: &str, pass: bool, enforced: bool, detail: &str) {
        let status = if pass { "PASS" } else { "FAIL" };
        println!("{status} criterion {id}: {detail}");
        if enforced && !pass {
            self.enforced_failures += 1;
        }
    }
}

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_psi-sim"));
    c.env_remove("PSI_SIM_OUT_DIR");
    c
}

// ---------------------------------------------------------------- 1

fn formulas() -> (bool, String) {
    let mut tank = NeedState {
        current: NeedVec::splat(0.8),
        set_value: NeedVec::splat(1.0),
        leakage: NeedVec::splat(0.005),
    };
    tank.apply_leakage();
    let leak = tank.current(NeedId::Energy);
    tank.apply_signal(NeedId::Energy, 0.35);

    let map = WorldMap::open(12, 12);
    let origin = HexCoord::from_offset(5, 5);
    let far = HexCoord {
        q: origin.q + 2,
        r: origin.r,
    };
    let mut mem = LocationMemory::for_map(&map);
    mem.discover(origin, 0);
    mem.discover(far, 0);
    mem.record_signal(origin, NeedId::Certainty, 0.6).unwrap();
    let spread = mem.cell(far).unwrap().assoc[NeedId::Certainty];

    let r = ForgettingRates::default();
    let cases: [(&str, f64, f64); 17] = [
        ("tank leakage", leak, 0.795),
        ("tank signal", tank.current(NeedId::Energy), 1.0),
        ("need indicator", need_indicator(0.8, 0.6, 2.0), 0.4),
        ("signal spread", spread, 0.3),
        (
            "location decay +",
            decay_value(0.5, r.location_positive, r.location_negative),
            0.49975,
        ),
        (
            "location decay -",
            decay_value(-0.5, r.location_positive, r.location_negative),
            -0.49925,
        ),
        (
            "social decay +",
            decay_value(0.8, r.social_positive, r.social_negative),
            0.7996,
        ),
        (
            "social decay -",
            decay_value(-0.8, r.social_positive, r.social_negative),
            -0.79936,
        ),
        (
            "social merge unknown",
            merge_social_info(None, 0.5, 0.4, 0.8),
            0.2,
        ),
        (
            "social merge known",
            merge_social_info(Some(0.2), -0.5, 0.4, 0.8),
            -0.36,
        ),
        ("location merge", merge_location_info(0.5, -0.5, 0.1), 0.4),
        ("affiliation modifier", affiliation_modifier(0.75), 1.75),
        ("certainty modifier", certainty_modifier(0.5), -0.125),
        (
            "preliminary strength",
            preliminary_strength(
                &NeedVec::new(0.0, 0.0, 0.0, 0.3, 0.5),
                &NeedVec::new(0.0, 0.0, 0.0, 0.3, 0.25),
            ),
            0.215,
        ),
        (
            "competence indicator",
            competence_indicator(0.4, 1.0, 0.5),
            0.7,
        ),
        ("motive strength", motive_strength(0.08, 0.5, 0.5), 0.29),
        (
            "success probability",
            update_success_probability(0.7, true, 0.3),
            0.79,
        ),
    ];
    let bad: Vec<String> = cases
        .iter()
        .filter(|(_, got, want)| (got - want).abs() > 1e-12)
        .map(|(name, got, want)| format!("{name} got {got} want {want}"))
        .collect();
    if bad.is_empty() {
        (
            true,
            format!("{} worked examples within 1e-12", cases.len()),
        )
    } else {
        (false, bad.join("; "))
    }
}

// ---------------------------------------------------------------- 2

fn determinism(scratch: &Path) -> (bool, String) {
    let mut logs = Vec::new();
    for i in 0..2 {
        let dir = scratch.join(format!("det{i}"));
        let status = bin()
            .args([
                "run",
                "--scenario",
                "s2",
                "--group-seed",
                "1",
                "--sim-seed",
                "1",
                "--out-dir",
            ])
            .arg(&dir)
            .output()
            .expect("binary runs");
        if !status.status.success() {
            return (false, format!("run exited with {:?}", status.status.code()));
        }
        logs.push(fs::read(dir.join("run.jsonl")).expect("run log written"));
    }
    let same = logs[0] == logs[1];
    (
        same,
        format!(
            "two s2 g1 s1 runs, {} bytes each, identical: {same}",
            logs[0].len()
        ),
    )
}

fn grid(dir: &Path) -> (bool, String) {
    let start = Instant::now();
    let out = bin()
        .arg("grid")
        .arg("--out-dir")
        .arg(dir)
        .output()
        .expect("binary runs");
    let took = start.elapsed();
    let ok = out.status.success() && took < GRID_BUDGET;
    (
        ok,
        format!(
            "27-run grid finished in {:.1}s (budget {}s)",
            took.as_secs_f64(),
            GRID_BUDGET.as_secs()
        ),
    )
}

// ---------------------------------------------------------------- 3

fn bounds_violation(w: &World, deep: bool) -> Option<String> {
    let mut occupied = BTreeSet::new();
    for a in &w.agents {
        if !(0..=w.config.health.max).contains(&a.health) {
            return Some(format!("{} health {}", a.id, a.health));
        }
        if a.needs
            .current
            .iter()
            .any(|(_, v)| !(0.0..=1.0).contains(&v))
        {
            return Some(format!("{} tank out of range", a.id));
        }
        if a.social.records().any(|r| !(-1.0..=1.0).contains(&r.score)) {
            return Some(format!("{} score out of range", a.id));
        }
        if deep
            && a.location
                .cells()
                .iter()
                .any(|c| c.assoc.iter().any(|(_, v)| !(-1.0..=1.0).contains(&v)))
        {
            return Some(format!("{} association out of range", a.id));
        }
        if a.alive && (!w.map.is_accessible(a.pos) || !occupied.insert(a.pos)) {
            return Some(format!("{} on bad or shared tile {:?}", a.id, a.pos));
        }
    }
    None
}

/// Returns (bounds ok, ledger ok, detail).
fn fuzzed_runs() -> (bool, bool, String) {
    let mut rng = stream(0, 0, "acceptance-fuzz", 0);
    let mut ticks = 0u64;
    for scenario in [ScenarioId::S1, ScenarioId::S2, ScenarioId::S3] {
        let mut c = RunConfig::default();
        c.scenario.scenario = scenario;
        c.scenario.group_seed = rng.gen_range(1..=5);
        c.scenario.sim_seed = rng.gen_range(0..10_000);
        let label = format!(
            "{scenario} g{} s{}",
            c.scenario.group_seed, c.scenario.sim_seed
        );
        let mut w = World::new(c).expect("default config builds");
        for t in 0..5000u64 {
            w.step();
            ticks += 1;
            if let Some(v) = bounds_violation(&w, t % 25 == 0) {
                return (false, true, format!("{label} tick {t}: {v}"));
            }
            if !w.food_balanced() {
                return (
                    true,
                    false,
                    format!("{label} tick {t}: ledger {:?}", w.ledger),
                );
            }
        }
    }
    (
        true,
        true,
        format!("{ticks} fuzzed ticks over three 5000-tick runs"),
    )
}

fn hysteresis() -> (bool, String) {
    let mut rng = stream(0, 0, "acceptance-hysteresis", 0);
    let trials = 5000;
    for trial in 0..trials {
        let motive = |rng: &mut psi_sim::rng::SimRng| {
            Motive::new(
                PlanId::ALL[rng.gen_range(0..13)],
                Target::Agent(AgentId::new(1, rng.gen_range(0..5))),
                rng.gen_range(-1.0..2.0),
            )
        };
        let n = rng.gen_range(1..20);
        let cands: Vec<Motive> = (0..n).map(|_| motive(&mut rng)).collect();
        let current = if rng.gen_bool(0.7) {
            Some(motive(&mut rng))
        } else {
            None
        };
        let tau = rng.gen_range(0.0..0.1);
        let mut best = cands[0];
        for c in &cands[1..] {
            if c.strength > best.strength
                || (c.strength == best.strength && (c.plan, c.target) < (best.plan, best.target))
            {
                best = *c;
            }
        }
        let expected = match current {
            Some(cur) if best.strength <= cur.strength + tau => cur,
            _ => best,
        };
        if select_motive(current.as_ref(), &cands, tau) != Some(expected) {
            return (
                false,
                format!("trial {trial} disagrees with the deadband oracle"),
            );
        }
    }
    (
        true,
        format!("{trials} random candidate sets match argmax with deadband"),
    )
}

fn footprint() -> (bool, String) {
    let mut rng = stream(0, 0, "acceptance-footprint", 0);
    let trials = 500;
    for trial in 0..trials {
        let (w, h) = (rng.gen_range(3..16), rng.gen_range(3..16));
        let map = WorldMap::open(w, h);
        let mut mem = LocationMemory::for_map(&map);
        for c in map.coords() {
            if rng.gen_bool(0.6) {
                mem.discover(c, 0);
            }
        }
        let origin = HexCoord::from_offset(rng.gen_range(0..w), rng.gen_range(0..h));
        mem.discover(origin, 0);
        let before = mem.cells().to_vec();
        let signal = rng.gen_range(-1.0..=1.0);
        mem.record_signal(origin, NeedId::Energy, signal).unwrap();
        for (old, new) in before.iter().zip(mem.cells()) {
            let d = origin.distance(old.coord);
            let weight = if d < 4 { (4 - d) as f64 / 4.0 } else { 0.0 };
            let want = (old.assoc[NeedId::Energy] + signal * weight).clamp(-1.0, 1.0);
            if (new.assoc[NeedId::Energy] - want).abs() > 1e-12 {
                return (
                    false,
                    format!("trial {trial}: cell {:?} at distance {d}", old.coord),
                );
            }
        }
    }
    (
        true,
        format!("{trials} random maps match the distance scan"),
    )
}

// ---------------------------------------------------------------- 4

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn load(dir: &Path, s: &str, g: u64, r: u64) -> RunLog {
    let path = dir.join(format!("{s}_g{g}_s{r}")).join("run.jsonl");
    let text = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    RunLog::from_jsonl(&text).expect("grid log parses")
}

fn hits(log: &RunLog) -> (u64, u64) {
    let bins = bin_engage_counts(log, 1000).expect("positive bin");
    let total: u64 = bins.iter().map(|b| b.intra + b.inter).sum();
    let early = bins.first().map_or(0, |b| b.intra + b.inter);
    (early, total)
}

fn inter_exchanges(log: &RunLog) -> u64 {
    count_actions(log, PlanFamily::InformationExchange)
        .values()
        .map(|c| c.split.inter)
        .sum()
}

const SOCIAL: [PlanId; 6] = [
    PlanId::CallForFood,
    PlanId::GiveFood,
    PlanId::RequestHeal,
    PlanId::GoHeal,
    PlanId::ExchangeSocialInfo,
    PlanId::ExchangeLocationInfo,
];

fn scenarios(dir: &Path, report: &mut Report) {
    let cells: Vec<(u64, u64)> = (1..=3).flat_map(|g| (1..=3).map(move |r| (g, r))).collect();
    let mut early = Vec::new();
    let mut plan_counts: Vec<Vec<f64>> = vec![Vec::new(); SOCIAL.len()];
    let mut redirect = Vec::new();
    let mut cohesion = Vec::new();
    let mut exch = Vec::new();
    let mut eng = Vec::new();
    let mut positive = 0;
    for &(g, r) in &cells {
        let s1 = load(dir, "s1", g, r);
        let s2 = load(dir, "s2", g, r);
        let s3 = load(dir, "s3", g, r);

        let (e, total) = hits(&s1);
        let frac = if total == 0 {
            1.0
        } else {
            e as f64 / total as f64
        };
        early.push(frac);
        let social = count_actions(&s1, PlanFamily::Social);
        let counts: Vec<f64> = SOCIAL
            .iter()
            .map(|p| social.get(p).map_or(0, |c| c.total) as f64)
            .collect();
        for (acc, c) in plan_counts.iter_mut().zip(&counts) {
            acc.push(*c);
        }
        let eli = counts[5];
        let modal = counts[..5].iter().all(|&c| eli > c);

        let after = first_inter_contact(&s2).map(|t| engage_split_since(&s2, t));
        let diff = after.map_or(0.0, |s| s.inter as f64 - s.intra as f64);
        redirect.push(diff);

        let c1 = mean_intra_score(s1.snapshot.as_ref().unwrap(), Some(1)).unwrap_or(0.0);
        let c2 = mean_intra_score(s2.snapshot.as_ref().unwrap(), Some(1)).unwrap_or(0.0);
        cohesion.push(c2 - c1);

        let x = inter_exchanges(&s3) as f64 - inter_exchanges(&s2) as f64;
        exch.push(x);
        let i2 = engage_split_since(&s2, 0).inter as f64;
        let i3 = engage_split_since(&s3, 0).inter as f64;
        eng.push(i2 - i3);

        let edges = positive_inter_edges(s3.snapshot.as_ref().unwrap());
        if edges > 0 {
            positive += 1;
        }
        let mark = |b: bool| if b { "pass" } else { "fail" };
        println!(
            "    g{g} s{r}: early {:.2} {} | ELI modal {} | redirect {:+} {} | cohesion {:.3} vs {:.3} {} | \
             exchanges {:+} {} | engages {:+} {} | positive inter edges {} {}",
            frac,
            mark(frac >= 0.6),
            mark(modal),
            diff,
            mark(diff > 0.0),
            c2,
            c1,
            mark(c2 > c1),
            x,
            mark(x > 0.0),
            i2 - i3,
            mark(i2 > i3),
            edges,
            mark(edges > 0),
        );
    }
    let m_early = median(early);
    report.line(
        "4(i) s1 early engages",
        m_early >= 0.6,
        false,
        &format!("median share in the first 1000 ticks {m_early:.2} (need >= 0.60)"),
    );
    let medians: Vec<f64> = plan_counts.into_iter().map(median).collect();
    let eli = medians[5];
    let rival = medians[..5].iter().copied().fold(f64::MIN, f64::max);
    report.line(
        "4(i) s1 modal social plan",
        eli > rival,
        false,
        &format!("median ExchangeLocationInfo starts {eli} vs next social plan {rival}"),
    );
    let m = median(redirect);
    report.line(
        "4(ii) s2 redirected engages",
        m > 0.0,
        false,
        &format!("median inter minus intra engages after first contact {m:+}"),
    );
    let m = median(cohesion);
    report.line(
        "4(ii) s2 cohesion",
        m > 0.0,
        false,
        &format!("median group-1 intra score, s2 minus s1, {m:+.4}"),
    );
    let m = median(exch);
    report.line(
        "4(iii) s3 inter exchanges",
        m > 0.0,
        false,
        &format!("median s3 minus s2 inter-group exchange starts {m:+}"),
    );
    let m = median(eng);
    report.line(
        "4(iii) s3 inter engages",
        m > 0.0,
        false,
        &format!("median s2 minus s3 inter-group engages {m:+}"),
    );
    report.line(
        "4(iv) s3 positive inter edge",
        positive == cells.len(),
        false,
        &format!("{positive} of {} runs", cells.len()),
    );
}

// ---------------------------------------------------------------- 5

fn starvation() -> (bool, String) {
    let mut rows = vec![vec!['.'; 14]; 10];
    rows[0][0] = '1';
    let text: Vec<String> = rows.into_iter().map(|r| r.into_iter().collect()).collect();
    let map = WorldMap::parse(&text.join("\n")).unwrap();
    let mut c = RunConfig::default();
    c.scenario.agents_per_group = 1;
    c.world.food_rate = 0.0;
    c.health.heal = Gaussian::fixed(0.0);
    let mut w = World::with_map(c, map).unwrap();
    let initial = w.agents[0].needs.current(NeedId::Energy);
    let leak = w.agents[0].needs.leakage[NeedId::Energy];
    // Ticks the tank stays positive; the next tick empties it and, in the
    // same tick, takes the first health point.
    let full_ticks = (initial / leak).floor() as u64;
    let max = w.config.health.max as u64;
    let expected = full_ticks + max;
    for t in 1..=expected + 10 {
        let events = w.step();
        if events.iter().any(|e| e.kind == EventKind::Death) {
            let ok = t == expected;
            return (
                ok,
                format!("died after {t} ticks; {initial}/{leak} rounds down to {full_ticks}, plus {max}"),
            );
        }
    }
    (false, format!("still alive after {} ticks", expected + 10))
}

// ---------------------------------------------------------------- 6

fn fixtures() -> (bool, String) {
    let params = PersonalityParams::default();
    let set_needs = [
        NeedId::PainAvoidance,
        NeedId::Energy,
        NeedId::Affiliation,
        NeedId::Certainty,
    ];
    let leak_needs = [
        NeedId::Energy,
        NeedId::Affiliation,
        NeedId::Certainty,
        NeedId::Competence,
    ];
    let mut checked = 0;
    for team in 1..=2u8 {
        let people = roster(1, team, 10, &params, PersonalitySource::Fixtures).unwrap();
        let expected = &SEED1[usize::from(team - 1) * 10..][..10];
        for (p, (name, set, leak)) in people.iter().zip(expected) {
            let values = set_needs
                .iter()
                .map(|&n| p.set_value[n])
                .chain(leak_needs.iter().map(|&n| p.leakage[n]));
            for (v, lit) in values.zip(set.iter().chain(leak)) {
                if p.name != *name || v.to_string() != *lit {
                    return (false, format!("{name}: {v} vs printed {lit}"));
                }
                checked += 1;
            }
        }
    }
    (
        checked == 160,
        format!("{checked} printed values across 20 agents"),
    )
}

fn main() {
    let scratch = tempfile::tempdir().expect("temp dir");
    let grid_dir: PathBuf = scratch.path().join("grid");
    let mut report = Report {
        enforced_failures: 0,
    };

    let (ok, d) = formulas();
    report.line("1 formulas", ok, true, &d);
    let (ok, d) = determinism(scratch.path());
    report.line("2 determinism", ok, true, &d);
    let (ok, d) = grid(&grid_dir);
    report.line("2 grid runtime", ok, true, &d);
    let (bounds, ledger, d) = fuzzed_runs();
    report.line("3(a) bounds", bounds, true, &d);
    report.line("3(b) food ledger", ledger, true, &d);
    let (ok, d) = hysteresis();
    report.line("3(c) hysteresis", ok, true, &d);
    let (ok, d) = footprint();
    report.line("3(d) signal footprint", ok, true, &d);
    println!("criterion 4 per run (group seed, sim seed):");
    scenarios(&grid_dir, &mut report);
    let (ok, d) = starvation();
    report.line("5 starvation", ok, true, &d);
    let (ok, d) = fixtures();
    report.line("6 fixtures", ok, true, &d);

    if report.enforced_failures > 0 {
        eprintln!("{} enforced criteria failed", report.enforced_failures);
        std::process::exit(1);
    }
}
