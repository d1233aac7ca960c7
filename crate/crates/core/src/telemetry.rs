//! Run logs and the measurements computed from them.
//!
//! A run log is line-delimited JSON: a versioned header echoing the effective
//! configuration, one line per event, and a closing social network snapshot.
//! Every metric here is a pure function of a log.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use quick_xml::events::Event as XmlEvent;
use serde::{Deserialize, Serialize};

use crate::agent::{AgentId, ShoutKind};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::hexgrid::HexCoord;
use crate::motive::Target;
use crate::needs::NeedVec;
use crate::plans::{Outcome, PlanId};

pub const LOG_FORMAT: &str = "psi-sim-runlog";
pub const LOG_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndReason {
    Success,
    Failure,
    /// Displaced by a stronger motive; no signals, no learning.
    Interrupted,
}

impl EndReason {
    pub fn outcome(self) -> Option<Outcome> {
        match self {
            EndReason::Success => Some(Outcome::Success),
            EndReason::Failure => Some(Outcome::Failure),
            EndReason::Interrupted => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FoodSource {
    Storage,
    Tile,
    Gift,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    PlanStart {
        plan: PlanId,
        target: Target,
        strength: f64,
    },
    PlanEnd {
        plan: PlanId,
        target: Target,
        reason: EndReason,
        signals: NeedVec,
    },
    /// A landed Engage hit.
    Hit {
        target: AgentId,
        damage: i32,
    },
    Heal {
        target: AgentId,
        amount: i32,
    },
    Eat {
        source: FoodSource,
    },
    Collect {
        tile: HexCoord,
    },
    Give {
        target: AgentId,
    },
    Shout {
        kind: ShoutKind,
        subject: Option<AgentId>,
    },
    /// A completed information exchange, logged by the initiator.
    Exchange {
        plan: PlanId,
        partner: AgentId,
    },
    /// First sighting of another agent.
    Contact {
        other: AgentId,
        score: f64,
    },
    /// Social score after a feedback step.
    Score {
        other: AgentId,
        score: f64,
    },
    Death,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub tick: u64,
    pub actor: AgentId,
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RosterEntry {
    pub id: AgentId,
    pub name: String,
    pub set_value: NeedVec,
    pub leakage: NeedVec,
    pub alpha_pr: f64,
    pub start: HexCoord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunHeader {
    pub format: String,
    pub version: u32,
    pub config: RunConfig,
    pub map_width: i32,
    pub map_height: i32,
    pub roster: Vec<RosterEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: AgentId,
    pub name: String,
    pub group: u8,
    pub alive: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub from: AgentId,
    pub to: AgentId,
    pub score: f64,
}

/// Directed opinion graph at one tick. Nodes sorted by id, edges by
/// (from, to).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SocialNetworkSnapshot {
    pub tick: u64,
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
enum Record {
    Header(RunHeader),
    Event(Event),
    Snapshot(SocialNetworkSnapshot),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunLog {
    pub header: RunHeader,
    pub events: Vec<Event>,
    pub snapshot: Option<SocialNetworkSnapshot>,
}

impl RunLog {
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let mut line = |r: &Record| -> std::io::Result<()> {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")
        };
        line(&Record::Header(self.header.clone()))?;
        for e in &self.events {
            line(&Record::Event(e.clone()))?;
        }
        if let Some(s) = &self.snapshot {
            line(&Record::Snapshot(s.clone()))?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("json is utf-8")
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Self> {
        let corrupt = |line: usize, reason: String| Error::CorruptLog { line, reason };
        let mut header = None;
        let mut events = Vec::new();
        let mut snapshot = None;
        for (i, line) in r.lines().enumerate() {
            let n = i + 1;
            let line = line.map_err(|e| corrupt(n, e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: Record = serde_json::from_str(&line).map_err(|e| corrupt(n, e.to_string()))?;
            match rec {
                Record::Header(h) => {
                    if header.is_some() || n != 1 {
                        return Err(corrupt(n, "header must be the first line".into()));
                    }
                    if h.format != LOG_FORMAT || h.version != LOG_VERSION {
                        return Err(corrupt(
                            n,
                            format!("unsupported log {} v{}", h.format, h.version),
                        ));
                    }
                    header = Some(h);
                }
                Record::Event(e) => {
                    if header.is_none() || snapshot.is_some() {
                        return Err(corrupt(n, "event outside the log body".into()));
                    }
                    if events.last().is_some_and(|p: &Event| p.tick > e.tick) {
                        return Err(corrupt(n, "events out of tick order".into()));
                    }
                    events.push(e);
                }
                Record::Snapshot(s) => {
                    if header.is_none() || snapshot.is_some() {
                        return Err(corrupt(n, "unexpected snapshot".into()));
                    }
                    snapshot = Some(s);
                }
            }
        }
        let header = header.ok_or_else(|| corrupt(0, "missing header".into()))?;
        Ok(RunLog {
            header,
            events,
            snapshot,
        })
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        Self::read_jsonl(text.as_bytes())
    }

    pub fn ticks(&self) -> u64 {
        self.header.config.scenario.ticks
    }
}

/// Counts split by whether both parties belong to the same group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GroupSplit {
    pub intra: u64,
    pub inter: u64,
}

impl GroupSplit {
    pub fn total(&self) -> u64 {
        self.intra + self.inter
    }

    fn add(&mut self, a: AgentId, b: AgentId) {
        if a.group == b.group {
            self.intra += 1;
        } else {
            self.inter += 1;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngageBin {
    pub bin: u64,
    pub start: u64,
    pub intra: u64,
    pub inter: u64,
}

/// Landed Engage hits per `bin`-tick window, split intra/inter group.
pub fn bin_engage_counts(log: &RunLog, bin: u64) -> Result<Vec<EngageBin>> {
    if bin == 0 {
        return Err(Error::Config("bin width must be positive".into()));
    }
    let last = log.events.last().map_or(0, |e| e.tick + 1);
    let span = log.ticks().max(last);
    let n = span.div_ceil(bin).max(1);
    let mut bins: Vec<EngageBin> = (0..n)
        .map(|i| EngageBin {
            bin: i,
            start: i * bin,
            intra: 0,
            inter: 0,
        })
        .collect();
    for e in &log.events {
        if let EventKind::Hit { target, .. } = e.kind {
            let b = &mut bins[(e.tick / bin) as usize];
            if e.actor.group == target.group {
                b.intra += 1;
            } else {
                b.inter += 1;
            }
        }
    }
    Ok(bins)
}

/// Landed hits at or after `from`, split intra/inter group.
pub fn engage_split_since(log: &RunLog, from: u64) -> GroupSplit {
    let mut s = GroupSplit::default();
    for e in log.events.iter().filter(|e| e.tick >= from) {
        if let EventKind::Hit { target, .. } = e.kind {
            s.add(e.actor, target);
        }
    }
    s
}

/// Tick of the first sighting between members of different groups.
pub fn first_inter_contact(log: &RunLog) -> Option<u64> {
    log.events.iter().find_map(|e| match e.kind {
        EventKind::Contact { other, .. } if other.group != e.actor.group => Some(e.tick),
        _ => None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanFamily {
    /// Cooperative plans involving another agent.
    Social,
    InformationExchange,
    All,
}

impl PlanFamily {
    pub fn plans(self) -> Vec<PlanId> {
        match self {
            PlanFamily::Social => PlanId::SOCIAL.to_vec(),
            PlanFamily::InformationExchange => {
                vec![PlanId::ExchangeSocialInfo, PlanId::ExchangeLocationInfo]
            }
            PlanFamily::All => PlanId::ALL.to_vec(),
        }
    }
}

impl FromStr for PlanFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "social" => Ok(PlanFamily::Social),
            "exchange" | "information-exchange" => Ok(PlanFamily::InformationExchange),
            "all" => Ok(PlanFamily::All),
            _ => Err(Error::UnsupportedFormat(format!("plan family {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PlanCount {
    pub total: u64,
    /// Only plans aimed at another agent contribute to the split.
    pub split: GroupSplit,
}

/// How often each plan in `family` was adopted.
pub fn count_actions(log: &RunLog, family: PlanFamily) -> BTreeMap<PlanId, PlanCount> {
    let mut out: BTreeMap<PlanId, PlanCount> = family
        .plans()
        .into_iter()
        .map(|p| (p, PlanCount::default()))
        .collect();
    for e in &log.events {
        if let EventKind::PlanStart { plan, target, .. } = e.kind {
            if let Some(c) = out.get_mut(&plan) {
                c.total += 1;
                if let Target::Agent(other) = target {
                    c.split.add(e.actor, other);
                }
            }
        }
    }
    out
}

/// Adopted information exchange plans, split intra/inter group.
pub fn exchange_split(log: &RunLog) -> GroupSplit {
    let counts = count_actions(log, PlanFamily::InformationExchange);
    counts
        .values()
        .fold(GroupSplit::default(), |acc, c| GroupSplit {
            intra: acc.intra + c.split.intra,
            inter: acc.inter + c.split.inter,
        })
}

/// Mean score over edges whose endpoints share a group, optionally
/// restricted to one group.
pub fn mean_intra_score(snap: &SocialNetworkSnapshot, group: Option<u8>) -> Option<f64> {
    let v: Vec<f64> = snap
        .edges
        .iter()
        .filter(|e| e.from.group == e.to.group && group.is_none_or(|g| e.from.group == g))
        .map(|e| e.score)
        .collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Number of inter-group edges with a positive score.
pub fn positive_inter_edges(snap: &SocialNetworkSnapshot) -> usize {
    snap.edges
        .iter()
        .filter(|e| e.from.group != e.to.group && e.score > 0.0)
        .count()
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NetworkOptions {
    /// Drop edges with `|score|` below this value.
    pub prune_below: f64,
    /// Replace each direction by the mean of both directions.
    pub symmetrize: bool,
}

impl SocialNetworkSnapshot {
    pub fn transformed(&self, opts: &NetworkOptions) -> SocialNetworkSnapshot {
        let mut edges = self.edges.clone();
        if opts.symmetrize {
            let mut pairs: BTreeMap<(AgentId, AgentId), Vec<f64>> = BTreeMap::new();
            for e in &edges {
                let key = if e.from <= e.to {
                    (e.from, e.to)
                } else {
                    (e.to, e.from)
                };
                pairs.entry(key).or_default().push(e.score);
            }
            edges = pairs
                .into_iter()
                .flat_map(|((a, b), v)| {
                    let score = v.iter().sum::<f64>() / v.len() as f64;
                    [
                        Edge {
                            from: a,
                            to: b,
                            score,
                        },
                        Edge {
                            from: b,
                            to: a,
                            score,
                        },
                    ]
                })
                .filter(|e| e.from != e.to)
                .collect();
            edges.sort_by_key(|e| (e.from, e.to));
        }
        edges.retain(|e| e.score.abs() >= opts.prune_below);
        SocialNetworkSnapshot {
            tick: self.tick,
            nodes: self.nodes.clone(),
            edges,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetworkFormat {
    GraphMl,
    Csv,
}

impl NetworkFormat {
    pub fn extension(self) -> &'static str {
        match self {
            NetworkFormat::GraphMl => "graphml",
            NetworkFormat::Csv => "csv",
        }
    }
}

impl FromStr for NetworkFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "graphml" => Ok(NetworkFormat::GraphMl),
            "csv" => Ok(NetworkFormat::Csv),
            _ => Err(Error::UnsupportedFormat(s.to_string())),
        }
    }
}

impl fmt::Display for NetworkFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

pub fn export_network(snap: &SocialNetworkSnapshot, format: NetworkFormat) -> String {
    match format {
        NetworkFormat::GraphMl => to_graphml(snap),
        NetworkFormat::Csv => network_to_csv(snap),
    }
}

pub fn parse_network(text: &str, format: NetworkFormat) -> Result<SocialNetworkSnapshot> {
    match format {
        NetworkFormat::GraphMl => parse_graphml(text),
        NetworkFormat::Csv => network_from_csv(text),
    }
}

pub fn to_graphml(snap: &SocialNetworkSnapshot) -> String {
    use quick_xml::escape::escape;
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    s.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    s.push_str("  <key id=\"tick\" for=\"graph\" attr.name=\"tick\" attr.type=\"long\"/>\n");
    s.push_str("  <key id=\"name\" for=\"node\" attr.name=\"name\" attr.type=\"string\"/>\n");
    s.push_str("  <key id=\"group\" for=\"node\" attr.name=\"group\" attr.type=\"int\"/>\n");
    s.push_str("  <key id=\"alive\" for=\"node\" attr.name=\"alive\" attr.type=\"boolean\"/>\n");
    s.push_str("  <key id=\"score\" for=\"edge\" attr.name=\"score\" attr.type=\"double\"/>\n");
    s.push_str("  <graph id=\"social\" edgedefault=\"directed\">\n");
    s.push_str(&format!("    <data key=\"tick\">{}</data>\n", snap.tick));
    for n in &snap.nodes {
        s.push_str(&format!(
            "    <node id=\"{}\"><data key=\"name\">{}</data><data key=\"group\">{}</data><data key=\"alive\">{}</data></node>\n",
            n.id,
            escape(n.name.as_str()),
            n.group,
            n.alive
        ));
    }
    for e in &snap.edges {
        s.push_str(&format!(
            "    <edge source=\"{}\" target=\"{}\"><data key=\"score\">{}</data></edge>\n",
            e.from, e.to, e.score
        ));
    }
    s.push_str("  </graph>\n</graphml>\n");
    s
}

pub fn parse_graphml(text: &str) -> Result<SocialNetworkSnapshot> {
    let bad = |m: String| Error::UnsupportedFormat(format!("graphml: {m}"));
    let mut reader = quick_xml::Reader::from_str(text);
    let mut tick = None;
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    let mut node: Option<(AgentId, String, u8, bool)> = None;
    let mut edge: Option<(AgentId, AgentId, f64)> = None;
    let mut key: Option<String> = None;
    let parse_id = |s: &str| s.parse::<AgentId>().map_err(bad);
    loop {
        let ev = reader.read_event().map_err(|e| bad(e.to_string()))?;
        match ev {
            XmlEvent::Start(e) | XmlEvent::Empty(e) => {
                let mut attrs = BTreeMap::new();
                for a in e.attributes() {
                    let a = a.map_err(|e| bad(e.to_string()))?;
                    let k = String::from_utf8_lossy(a.key.as_ref()).into_owned();
                    let v = a
                        .unescape_value()
                        .map_err(|e| bad(e.to_string()))?
                        .into_owned();
                    attrs.insert(k, v);
                }
                let get = |k: &str| {
                    attrs
                        .get(k)
                        .cloned()
                        .ok_or_else(|| bad(format!("missing attribute {k}")))
                };
                match e.name().as_ref() {
                    b"node" => node = Some((parse_id(&get("id")?)?, String::new(), 0, true)),
                    b"edge" => {
                        edge = Some((parse_id(&get("source")?)?, parse_id(&get("target")?)?, 0.0))
                    }
                    b"data" => key = Some(get("key")?),
                    _ => {}
                }
            }
            XmlEvent::Text(t) => {
                let Some(k) = key.as_deref() else { continue };
                let v = t.unescape().map_err(|e| bad(e.to_string()))?.into_owned();
                let num = |v: &str| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| bad(format!("bad number {v:?}")))
                };
                match (k, node.as_mut(), edge.as_mut()) {
                    ("name", Some(n), _) => n.1 = v,
                    ("group", Some(n), _) => {
                        n.2 = v
                            .trim()
                            .parse()
                            .map_err(|_| bad(format!("bad group {v:?}")))?
                    }
                    ("alive", Some(n), _) => n.3 = v.trim() == "true",
                    ("score", _, Some(e)) => e.2 = num(&v)?,
                    ("tick", None, None) => {
                        tick = Some(
                            v.trim()
                                .parse()
                                .map_err(|_| bad(format!("bad tick {v:?}")))?,
                        )
                    }
                    _ => {}
                }
            }
            XmlEvent::End(e) => match e.name().as_ref() {
                b"node" => {
                    let (id, name, group, alive) =
                        node.take().ok_or_else(|| bad("stray </node>".into()))?;
                    nodes.push(Node {
                        id,
                        name,
                        group,
                        alive,
                    });
                }
                b"edge" => {
                    let (from, to, score) =
                        edge.take().ok_or_else(|| bad("stray </edge>".into()))?;
                    edges.push(Edge { from, to, score });
                }
                b"data" => key = None,
                _ => {}
            },
            XmlEvent::Eof => break,
            _ => {}
        }
    }
    Ok(SocialNetworkSnapshot {
        tick: tick.ok_or_else(|| bad("missing tick".into()))?,
        nodes,
        edges,
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct NetworkRow {
    kind: String,
    tick: u64,
    id: String,
    name: String,
    group: String,
    alive: String,
    target: String,
    score: String,
}

/// Columns `kind,tick,id,name,group,alive,target,score`; node rows leave
/// `target` and `score` empty, edge rows leave `name`, `group` and `alive`
/// empty.
pub fn network_to_csv(snap: &SocialNetworkSnapshot) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for n in &snap.nodes {
        w.serialize(NetworkRow {
            kind: "node".into(),
            tick: snap.tick,
            id: n.id.to_string(),
            name: n.name.clone(),
            group: n.group.to_string(),
            alive: n.alive.to_string(),
            target: String::new(),
            score: String::new(),
        })
        .expect("in-memory write");
    }
    for e in &snap.edges {
        w.serialize(NetworkRow {
            kind: "edge".into(),
            tick: snap.tick,
            id: e.from.to_string(),
            name: String::new(),
            group: String::new(),
            alive: String::new(),
            target: e.to.to_string(),
            score: e.score.to_string(),
        })
        .expect("in-memory write");
    }
    if snap.nodes.is_empty() && snap.edges.is_empty() {
        w.write_record([
            "kind", "tick", "id", "name", "group", "alive", "target", "score",
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

pub fn network_from_csv(text: &str) -> Result<SocialNetworkSnapshot> {
    let bad = |m: String| Error::UnsupportedFormat(format!("network csv: {m}"));
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let mut tick = None;
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    for row in rd.deserialize::<NetworkRow>() {
        let row = row.map_err(|e| bad(e.to_string()))?;
        if tick.is_some_and(|t| t != row.tick) {
            return Err(bad("mixed ticks".into()));
        }
        tick = Some(row.tick);
        let id: AgentId = row.id.parse().map_err(bad)?;
        match row.kind.as_str() {
            "node" => nodes.push(Node {
                id,
                name: row.name,
                group: row
                    .group
                    .parse()
                    .map_err(|_| bad(format!("bad group {:?}", row.group)))?,
                alive: row.alive == "true",
            }),
            "edge" => edges.push(Edge {
                from: id,
                to: row.target.parse().map_err(bad)?,
                score: row
                    .score
                    .parse()
                    .map_err(|_| bad(format!("bad score {:?}", row.score)))?,
            }),
            k => return Err(bad(format!("unknown row kind {k:?}"))),
        }
    }
    Ok(SocialNetworkSnapshot {
        tick: tick.unwrap_or(0),
        nodes,
        edges,
    })
}

/// Columns `bin,start,intra,inter`.
pub fn engage_bins_csv(bins: &[EngageBin]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["bin", "start", "intra", "inter"])
        .expect("in-memory write");
    for b in bins {
        w.write_record([b.bin, b.start, b.intra, b.inter].map(|v| v.to_string()))
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

/// Columns `plan,total,intra,inter`.
pub fn action_counts_csv(counts: &BTreeMap<PlanId, PlanCount>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["plan", "total", "intra", "inter"])
        .expect("in-memory write");
    for (p, c) in counts {
        w.write_record([
            p.name().to_string(),
            c.total.to_string(),
            c.split.intra.to_string(),
            c.split.inter.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}
