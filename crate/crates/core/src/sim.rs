//! Synchronous round simulator with broadcast messages and set or multiset
//! delivery, the full-information program, and the view-correspondence checker.

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::graph::{Adjacency, Color, ColorAssignment, ColoredGraph};
use crate::view::{Delivery, View, ViewInterner};

/// Parameters every node knows at start-up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NetParams {
    pub m: u32,
    pub delta: usize,
    pub n: usize,
}

impl NetParams {
    pub fn of(g: &ColoredGraph) -> Self {
        Self { m: g.m(), delta: g.delta_cap(), n: g.n() }
    }
}

pub struct InitContext<'a> {
    pub color: Color,
    pub params: &'a NetParams,
    /// Position of the node in the simulator's arrays. Honest programs ignore
    /// it; it exists so tests can build programs that are not view functions.
    pub node_index: usize,
}

/// Messages received in one round, sorted by bytes. Under `Set` every count is 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Inbox {
    kind: Delivery,
    messages: Vec<(Vec<u8>, u32)>,
}

impl Inbox {
    pub fn collect(kind: Delivery, mut raw: Vec<Vec<u8>>) -> Self {
        raw.sort_unstable();
        let mut messages: Vec<(Vec<u8>, u32)> = Vec::with_capacity(raw.len());
        for msg in raw {
            match messages.last_mut() {
                Some(last) if last.0 == msg => {
                    if kind == Delivery::Multiset {
                        last.1 += 1;
                    }
                }
                _ => messages.push((msg, 1)),
            }
        }
        Self { kind, messages }
    }

    pub fn kind(&self) -> Delivery {
        self.kind
    }

    pub fn messages(&self) -> &[(Vec<u8>, u32)] {
        &self.messages
    }

    pub fn distinct(&self) -> impl Iterator<Item = &[u8]> {
        self.messages.iter().map(|(m, _)| m.as_slice())
    }

    /// Count with multiplicity; equals the number of distinct messages under `Set`.
    pub fn total(&self) -> usize {
        self.messages.iter().map(|&(_, k)| k as usize).sum()
    }

    /// The same messages with multiplicities forgotten.
    pub fn as_set(&self) -> Inbox {
        Inbox { kind: Delivery::Set, messages: self.messages.iter().map(|(m, _)| (m.clone(), 1)).collect() }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{0}")]
pub struct StepError(pub String);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("node {node} failed in round {round}: {source}")]
    Step { node: usize, round: usize, source: StepError },
    #[error("program runs {actual} rounds, expected {expected}")]
    BudgetMismatch { expected: usize, actual: usize },
    #[error("instance {index} has (m, delta) = ({m}, {delta}), expected ({want_m}, {want_delta})")]
    InstanceParams { index: usize, m: u32, delta: usize, want_m: u32, want_delta: usize },
}

/// A deterministic per-node state machine. Each round a node first broadcasts
/// one message computed from its state, then steps on the collection it
/// received; after `round_budget` rounds `finalize` gives its output color.
pub trait NodeProgram: Sync {
    type State: Clone + Send + Sync;

    fn name(&self) -> String;
    fn round_budget(&self, params: &NetParams) -> usize;
    /// Declared output palette `c`: outputs are claimed to lie in `[1, c]`.
    fn output_palette(&self, params: &NetParams) -> u32;
    fn init(&self, ctx: &InitContext<'_>) -> Self::State;
    fn broadcast(&self, state: &Self::State, round: usize) -> Vec<u8>;
    fn step(&self, state: &Self::State, inbox: &Inbox, round: usize) -> Result<Self::State, StepError>;
    fn finalize(&self, state: &Self::State) -> Color;
    /// Canonical bytes of a state, used for trace digests.
    fn state_bytes(&self, state: &Self::State) -> Vec<u8>;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NodeRecord {
    pub round: usize,
    pub node: usize,
    #[serde(with = "hex_bytes")]
    pub sent: Vec<u8>,
    #[serde(serialize_with = "hex_counted")]
    pub received: Vec<(Vec<u8>, u32)>,
    #[serde(with = "hex_bytes")]
    pub state: Vec<u8>,
}

mod hex_bytes {
    pub fn serialize<S: serde::Serializer>(b: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(b))
    }
}

fn hex_counted<S: serde::Serializer>(v: &[(Vec<u8>, u32)], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for (m, k) in v {
        seq.serialize_element(&(hex::encode(m), k))?;
    }
    seq.end()
}

/// Per-round, per-node record of the sent message, the received collection and
/// a SHA-256 digest of the state after the step.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SimTrace {
    pub rounds: Vec<Vec<NodeRecord>>,
}

impl SimTrace {
    pub fn round_count(&self) -> usize {
        self.rounds.len()
    }

    /// One JSON object per line, ordered by round then node.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for rec in self.rounds.iter().flatten() {
            out.push_str(&serde_json::to_string(rec).expect("records serialize"));
            out.push('\n');
        }
        out
    }

    /// Message each node sent in `round` (1-based).
    pub fn sent_in(&self, round: usize) -> Vec<&[u8]> {
        self.rounds[round - 1].iter().map(|r| r.sent.as_slice()).collect()
    }
}

pub struct RunResult<S> {
    pub assignment: ColorAssignment,
    pub states: Vec<S>,
    pub trace: Option<SimTrace>,
}

/// Runs `prog` on `g` and records a trace.
pub fn run<P: NodeProgram>(g: &ColoredGraph, prog: &P, kind: Delivery) -> Result<(ColorAssignment, SimTrace), SimError> {
    let res = run_with(g, prog, kind, true)?;
    Ok((res.assignment, res.trace.expect("trace requested")))
}

type Stepped<S> = Result<(S, Option<NodeRecord>), SimError>;

/// Runs `prog` on `g`. Node steps within a round are evaluated in parallel; the
/// result equals sequential evaluation in node order.
pub fn run_with<P: NodeProgram>(
    g: &ColoredGraph,
    prog: &P,
    kind: Delivery,
    record: bool,
) -> Result<RunResult<P::State>, SimError> {
    let params = NetParams::of(g);
    let rounds = prog.round_budget(&params);
    let mut states: Vec<P::State> = (0..g.n())
        .map(|v| prog.init(&InitContext { color: g.psi()[v], params: &params, node_index: v }))
        .collect();
    let mut trace = record.then(SimTrace::default);
    for round in 1..=rounds {
        let sent: Vec<Vec<u8>> = states.par_iter().map(|s| prog.broadcast(s, round)).collect();
        let stepped: Vec<Stepped<P::State>> = (0..g.n())
            .into_par_iter()
            .map(|v| {
                let raw = g.neighbors(v).iter().map(|&u| sent[u].clone()).collect();
                let inbox = Inbox::collect(kind, raw);
                let next = prog
                    .step(&states[v], &inbox, round)
                    .map_err(|source| SimError::Step { node: v, round, source })?;
                let rec = record.then(|| NodeRecord {
                    round,
                    node: v,
                    sent: sent[v].clone(),
                    received: inbox.messages,
                    state: Sha256::digest(prog.state_bytes(&next)).to_vec(),
                });
                Ok((next, rec))
            })
            .collect();
        let mut recs = Vec::new();
        states = Vec::with_capacity(g.n());
        for r in stepped {
            let (s, rec) = r?;
            states.push(s);
            recs.extend(rec);
        }
        if let Some(t) = trace.as_mut() {
            t.rounds.push(recs);
        }
    }
    let colors = states.iter().map(|s| prog.finalize(s)).collect();
    let assignment = ColorAssignment { colors, palette: prog.output_palette(&params) };
    Ok(RunResult { assignment, states, trace })
}

/// Wraps a program so that its step only ever sees the set of distinct messages.
pub struct EraseMultiplicity<P>(pub P);

impl<P: NodeProgram> NodeProgram for EraseMultiplicity<P> {
    type State = P::State;

    fn name(&self) -> String {
        format!("erase({})", self.0.name())
    }
    fn round_budget(&self, params: &NetParams) -> usize {
        self.0.round_budget(params)
    }
    fn output_palette(&self, params: &NetParams) -> u32 {
        self.0.output_palette(params)
    }
    fn init(&self, ctx: &InitContext<'_>) -> Self::State {
        self.0.init(ctx)
    }
    fn broadcast(&self, state: &Self::State, round: usize) -> Vec<u8> {
        self.0.broadcast(state, round)
    }
    fn step(&self, state: &Self::State, inbox: &Inbox, round: usize) -> Result<Self::State, StepError> {
        self.0.step(state, &inbox.as_set(), round)
    }
    fn finalize(&self, state: &Self::State) -> Color {
        self.0.finalize(state)
    }
    fn state_bytes(&self, state: &Self::State) -> Vec<u8> {
        self.0.state_bytes(state)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FullInfoState {
    Color(Color),
    View(View),
}

impl FullInfoState {
    /// The gathered view; the initial state is read as a `Set` 0-view.
    pub fn view(&self, kind: Delivery) -> View {
        match self {
            FullInfoState::Color(c) => View::leaf(kind, *c),
            FullInfoState::View(v) => v.clone(),
        }
    }
}

type Decision = Arc<dyn Fn(&View) -> Color + Send + Sync>;

/// Every node forwards everything it knows in every round. After `r` rounds its
/// state is its `r`-view under the run's delivery semantics.
#[derive(Clone)]
pub struct FullInformation {
    rounds: usize,
    palette: Option<u32>,
    decide: Option<Decision>,
}

pub fn full_information_program(r: usize) -> FullInformation {
    FullInformation { rounds: r, palette: None, decide: None }
}

impl FullInformation {
    /// Output `decide(view)` with declared palette `palette` instead of the own color.
    pub fn with_decision(mut self, palette: u32, decide: impl Fn(&View) -> Color + Send + Sync + 'static) -> Self {
        self.palette = Some(palette);
        self.decide = Some(Arc::new(decide));
        self
    }
}

fn decode_color(bytes: &[u8]) -> Result<Color, StepError> {
    let arr: [u8; 4] = bytes.try_into().map_err(|_| StepError(format!("expected a 4-byte color, got {} bytes", bytes.len())))?;
    Ok(Color::from_be_bytes(arr))
}

impl NodeProgram for FullInformation {
    type State = FullInfoState;

    fn name(&self) -> String {
        format!("full-information(r={})", self.rounds)
    }
    fn round_budget(&self, _: &NetParams) -> usize {
        self.rounds
    }
    fn output_palette(&self, params: &NetParams) -> u32 {
        self.palette.unwrap_or(params.m)
    }
    fn init(&self, ctx: &InitContext<'_>) -> Self::State {
        FullInfoState::Color(ctx.color)
    }
    fn broadcast(&self, state: &Self::State, _: usize) -> Vec<u8> {
        match state {
            FullInfoState::Color(c) => c.to_be_bytes().to_vec(),
            FullInfoState::View(v) => v.encode(),
        }
    }
    fn step(&self, state: &Self::State, inbox: &Inbox, _: usize) -> Result<Self::State, StepError> {
        let kind = inbox.kind();
        let own = state.view(kind);
        let mut kids = Vec::with_capacity(inbox.messages().len());
        for (msg, k) in inbox.messages() {
            let child = match state {
                FullInfoState::Color(_) => View::leaf(kind, decode_color(msg)?),
                FullInfoState::View(_) => View::decode(msg).map_err(|e| StepError(e.to_string()))?,
            };
            kids.push((child, *k));
        }
        View::node_counted(kind, own, kids, true).map(FullInfoState::View).map_err(|e| StepError(e.to_string()))
    }
    fn finalize(&self, state: &Self::State) -> Color {
        match (&self.decide, state) {
            (Some(f), s) => f(&s.view(Delivery::Set)),
            (None, FullInfoState::Color(c)) => *c,
            (None, FullInfoState::View(v)) => v.base_color(),
        }
    }
    fn state_bytes(&self, state: &Self::State) -> Vec<u8> {
        match state {
            FullInfoState::Color(c) => c.to_be_bytes().to_vec(),
            FullInfoState::View(v) => v.encode(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeterminismViolation {
    pub view_id: u32,
    pub first: (usize, usize),
    pub first_color: Color,
    pub other: (usize, usize),
    pub other_color: Color,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PropernessViolation {
    pub instance: usize,
    pub edge: (usize, usize),
    pub views: (u32, u32),
    pub color: Color,
}

/// Outcome of [`check_correspondence`]. Node positions are `(instance, node)`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CorrespondenceReport {
    pub program: String,
    pub rounds: usize,
    pub instances: usize,
    pub distinct_views: usize,
    pub realized_edges: usize,
    pub determinism: Vec<DeterminismViolation>,
    pub properness: Vec<PropernessViolation>,
}

impl CorrespondenceReport {
    pub fn is_clean(&self) -> bool {
        self.determinism.is_empty() && self.properness.is_empty()
    }
}

/// Checks on the given instances that `prog` behaves as a function of the
/// `r`-view, and that the labeling it induces on the observed views is proper on
/// every realized view adjacency.
pub fn check_correspondence<P: NodeProgram>(
    prog: &P,
    r: usize,
    m: u32,
    delta: usize,
    instances: &[ColoredGraph],
    kind: Delivery,
) -> Result<CorrespondenceReport, SimError> {
    let mut interner = ViewInterner::new(kind);
    let mut label: HashMap<u32, (Color, (usize, usize))> = HashMap::new();
    let mut edges: HashMap<(u32, u32), (usize, (usize, usize))> = HashMap::new();
    let mut report = CorrespondenceReport {
        program: prog.name(),
        rounds: r,
        instances: instances.len(),
        ..Default::default()
    };
    for (i, g) in instances.iter().enumerate() {
        if g.m() != m || g.delta_cap() != delta {
            return Err(SimError::InstanceParams { index: i, m: g.m(), delta: g.delta_cap(), want_m: m, want_delta: delta });
        }
        let budget = prog.round_budget(&NetParams::of(g));
        if budget != r {
            return Err(SimError::BudgetMismatch { expected: r, actual: budget });
        }
        let out = run_with(g, prog, kind, false)?.assignment.colors;
        let ids = interner.ids(g, g.psi(), r as u32);
        for v in 0..g.n() {
            let (c0, at) = *label.entry(ids[v]).or_insert((out[v], (i, v)));
            if c0 != out[v] {
                report.determinism.push(DeterminismViolation {
                    view_id: ids[v],
                    first: at,
                    first_color: c0,
                    other: (i, v),
                    other_color: out[v],
                });
            }
        }
        for (u, v) in g.edges() {
            let key = (ids[u].min(ids[v]), ids[u].max(ids[v]));
            edges.entry(key).or_insert((i, (u, v)));
        }
    }
    report.distinct_views = label.len();
    report.realized_edges = edges.len();
    let mut sorted: Vec<_> = edges.into_iter().collect();
    sorted.sort_unstable();
    for ((a, b), (instance, edge)) in sorted {
        let (ca, cb) = (label[&a].0, label[&b].0);
        if ca == cb {
            report.properness.push(PropernessViolation { instance, edge, views: (a, b), color: ca });
        }
    }
    Ok(report)
}
