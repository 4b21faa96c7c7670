//! Constructive lower bounds. Given color classes of a neighborhood graph
//! that are too few, each refuter builds a vertex lying in none of them and
//! checks every intermediate claim it relies on along the way.
//!
//! Classes are stored as [`Pair`]s over the level below, so the top level of
//! a host never has to be materialized: `NH1(72, 6)` or `NT_2(5, 4)` only need
//! `K_m` or `NT_1(5, 4)` in memory.

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::graph::Adjacency;
use crate::nbhd::{Family, NbhdError, NbhdGraph, Pair};
use crate::view::{Delivery, View};

pub mod families;

#[derive(Debug, Error)]
pub enum BoundError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid family: {0}")]
    InvalidFamily(String),
    /// A step that the proof guarantees did not go through.
    #[error("construction failed: {0}")]
    Construction(String),
    #[error(transparent)]
    Nbhd(#[from] NbhdError),
}

pub type Result<T> = std::result::Result<T, BoundError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Proper,
    Defective(usize),
}

/// A set of level-`i+1` vertices given as pairs over the level-`i` graph.
#[derive(Debug, Clone, Default)]
pub struct PairSet {
    pairs: Vec<Pair>,
    by_center: HashMap<usize, Vec<usize>>,
}

impl PairSet {
    pub fn new(mut pairs: Vec<Pair>) -> Self {
        pairs.sort();
        pairs.dedup();
        let mut by_center: HashMap<usize, Vec<usize>> = HashMap::new();
        for (i, p) in pairs.iter().enumerate() {
            by_center.entry(p.center).or_default().push(i);
        }
        Self { pairs, by_center }
    }

    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, p: &Pair) -> bool {
        self.pairs.binary_search(p).is_ok()
    }

    pub fn centered_at(&self, x: usize) -> impl Iterator<Item = &Pair> {
        self.by_center.get(&x).into_iter().flatten().map(|&i| &self.pairs[i])
    }

    /// Union of the member sets of all pairs centered at `x`.
    pub fn covered(&self, x: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.centered_at(x).flat_map(|p| p.members.iter().copied()).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Whether `x` is a `W`-source: every neighbor of `x` in `W` lies in the
    /// member set of some pair centered at `x`. `None` means `W` is everything.
    pub fn is_w_source<G: Adjacency + ?Sized>(&self, g: &G, x: usize, w: Option<&[usize]>) -> bool {
        let covered = self.covered(x);
        g.neighbors(x)
            .iter()
            .filter(|y| w.is_none_or(|w| w.binary_search(y).is_ok()))
            .all(|y| covered.binary_search(y).is_ok())
    }

    /// Number of pairs in the set adjacent to `p`.
    fn degree_of(&self, p: &Pair) -> usize {
        p.distinct()
            .into_iter()
            .flat_map(|y| self.centered_at(y))
            .filter(|q| q.contains(p.center))
            .count()
    }
}

/// Color classes `I_1..I_c` of the level-`base.level() + 1` graph over `base`.
pub struct IndSetFamily {
    base: Arc<NbhdGraph>,
    bound: usize,
    mode: Mode,
    classes: Vec<PairSet>,
}

impl IndSetFamily {
    /// Validates every pair as a vertex (members inside `Γ(center)`, at most
    /// `bound` of them, repeats only over a multiset base) and every class as
    /// independent, or of maximum induced degree `d` in defective mode.
    pub fn new(base: Arc<NbhdGraph>, bound: usize, classes: Vec<Vec<Pair>>, mode: Mode) -> Result<Self> {
        let n = base.node_count();
        let repeats = base.kind() == Delivery::Multiset && base.level() == 0;
        let classes: Vec<PairSet> = classes.into_iter().map(PairSet::new).collect();
        for (k, class) in classes.iter().enumerate() {
            for p in class.pairs() {
                if p.center >= n {
                    return Err(BoundError::InvalidFamily(format!("class {k}: center {} out of range", p.center)));
                }
                if p.members.len() > bound {
                    return Err(BoundError::InvalidFamily(format!("class {k}: {p:?} has more than {bound} members")));
                }
                if !p.members.windows(2).all(|w| w[0] < w[1] || (repeats && w[0] == w[1])) {
                    return Err(BoundError::InvalidFamily(format!("class {k}: {p:?} is not a sorted set")));
                }
                let nb = base.neighbors(p.center);
                if let Some(y) = p.members.iter().find(|y| nb.binary_search(y).is_err()) {
                    return Err(BoundError::InvalidFamily(format!("class {k}: {y} is not a neighbor of {}", p.center)));
                }
                let limit = match mode {
                    Mode::Proper => 0,
                    Mode::Defective(d) => d,
                };
                let deg = class.degree_of(p);
                if deg > limit {
                    return Err(BoundError::InvalidFamily(format!(
                        "class {k}: {p:?} has {deg} neighbors inside its class (allowed {limit})"
                    )));
                }
            }
        }
        Ok(Self { base, bound, mode, classes })
    }

    /// Classes given as vertex ids of an explicit graph.
    pub fn on_graph(top: &NbhdGraph, classes: &[Vec<usize>], mode: Mode) -> Result<Self> {
        let base = top
            .below()
            .cloned()
            .ok_or_else(|| BoundError::InvalidFamily("classes must live above level 0".into()))?;
        let mut out = Vec::with_capacity(classes.len());
        for class in classes {
            let mut pairs = Vec::with_capacity(class.len());
            for &v in class {
                let p = top
                    .part(v)
                    .ok_or_else(|| BoundError::InvalidFamily(format!("vertex {v} out of range")))?;
                pairs.push(p.clone());
            }
            out.push(pairs);
        }
        Self::new(base, top.bound(), out, mode)
    }

    pub fn base(&self) -> &Arc<NbhdGraph> {
        &self.base
    }
    pub fn bound(&self) -> usize {
        self.bound
    }
    pub fn mode(&self) -> Mode {
        self.mode
    }
    pub fn classes(&self) -> &[PairSet] {
        &self.classes
    }
    /// Level of the vertices in the classes.
    pub fn level(&self) -> u32 {
        self.base.level() + 1
    }
    pub fn m(&self) -> usize {
        self.base.m() as usize
    }
}

/// Counters of the intermediate claims checked while refuting, plus a readable log.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Transcript {
    pub steps: Vec<String>,
    /// Independence checks of source sets.
    pub independence_checks: usize,
    /// Witnesses found for non-sources.
    pub witnesses: usize,
    /// "At most one `W`-source per class inside a clique `W`" checks.
    pub unique_source_checks: usize,
    /// "At most `d + 1` defective sources per class" checks.
    pub defect_source_checks: usize,
    /// Classes the final vertex was re-verified against.
    pub classes_verified: usize,
}

impl Transcript {
    fn log(&mut self, s: impl Into<String>) {
        self.steps.push(s.into());
    }
}

/// A vertex of the host lying in no class.
#[derive(Debug, Clone)]
pub struct Refutation {
    pub level: u32,
    pub pair: Pair,
    pub view: View,
    pub transcript: Transcript,
}

impl Refutation {
    pub fn to_json(&self) -> Value {
        json!({
            "level": self.level,
            "pair": self.pair,
            "view": self.view.to_json(),
            "display": self.view.to_string(),
            "transcript": self.transcript,
        })
    }
}

/// A tournament on `[m]` (0-based ids).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orientation {
    m: usize,
    toward: Vec<bool>,
}

impl Orientation {
    pub fn m(&self) -> usize {
        self.m
    }

    /// Whether the edge `{x, y}` points from `x` to `y`.
    pub fn directed(&self, x: usize, y: usize) -> bool {
        self.toward[x * self.m + y]
    }

    pub fn is_w_source(&self, x: usize, w: &[usize]) -> bool {
        w.iter().all(|&y| y == x || self.directed(x, y))
    }

    pub fn sources(&self) -> Vec<usize> {
        let all: Vec<usize> = (0..self.m).collect();
        (0..self.m).filter(|&x| self.is_w_source(x, &all)).collect()
    }

    /// `(x, A)` is covered if every edge `{x, y}`, `y ∈ A`, points away from `x`.
    pub fn covers(&self, p: &Pair) -> bool {
        p.members.iter().all(|&y| self.directed(p.center, y))
    }
}

/// The orientation of `K_m` induced by an independent set of `NH1`:
/// `x → y` whenever some `(x, A)` in the set has `y ∈ A`, and `x → y` for
/// `x < y` on pairs nobody orients.
pub fn orientation_of(class: &PairSet, m: usize) -> Result<Orientation> {
    let mut demand = vec![false; m * m];
    for p in class.pairs() {
        for &y in &p.members {
            if p.center >= m || y >= m {
                return Err(BoundError::InvalidFamily(format!("{p:?} is not over K_{m}")));
            }
            demand[p.center * m + y] = true;
        }
    }
    let mut toward = vec![false; m * m];
    for x in 0..m {
        for y in 0..m {
            if x == y {
                continue;
            }
            let (xy, yx) = (demand[x * m + y], demand[y * m + x]);
            if xy && yx {
                return Err(BoundError::InvalidFamily(format!(
                    "edge {{{}, {}}} is demanded in both directions",
                    x + 1,
                    y + 1
                )));
            }
            toward[x * m + y] = xy || (!yx && x < y);
        }
    }
    Ok(Orientation { m, toward })
}

/// `W`-sources of `class` inside `W` (every vertex of `g` when `w` is `None`).
pub fn w_sources<G: Adjacency + ?Sized>(g: &G, class: &PairSet, w: Option<&[usize]>) -> Vec<usize> {
    match w {
        Some(w) => w.iter().copied().filter(|&x| class.is_w_source(g, x, Some(w))).collect(),
        None => (0..g.node_count()).filter(|&x| class.is_w_source(g, x, None)).collect(),
    }
}

/// The sets `S_r(I) = I, S_{r-1}(I), ..., S_0(I)`.
#[derive(Debug, Clone)]
pub struct SourceChain {
    /// `ids[i]`: `S_i(I)` as sorted vertex ids of the level-`i` graph, `i < r`.
    pub ids: Vec<Vec<usize>>,
    /// `pairs[i]`: `S_{i+1}(I)` as pairs over the level-`i` graph.
    pub pairs: Vec<PairSet>,
}

impl SourceChain {
    pub fn top(&self) -> u32 {
        self.pairs.len() as u32
    }

    /// `|S_r|, |S_{r-1}|, ..., |S_0|`.
    pub fn sizes(&self) -> Vec<usize> {
        let mut out = vec![self.pairs.last().map_or(0, PairSet::len)];
        out.extend(self.ids.iter().rev().map(Vec::len));
        out
    }
}

fn check_independent(g: &NbhdGraph, set: &[usize]) -> Option<(usize, usize)> {
    set.iter()
        .flat_map(|&u| g.neighbors(u).iter().map(move |&v| (u, v)))
        .find(|(_, v)| set.binary_search(v).is_ok())
}

/// Source chain of class `k`, with every `S_i` checked to be independent.
pub fn source_chain(family: &IndSetFamily, k: usize) -> Result<SourceChain> {
    source_chain_counted(family, k, &mut Transcript::default())
}

fn source_chain_counted(family: &IndSetFamily, k: usize, tr: &mut Transcript) -> Result<SourceChain> {
    let r = family.level();
    let mut pairs = vec![PairSet::default(); r as usize];
    let mut ids = vec![Vec::new(); r as usize];
    pairs[r as usize - 1] = family.classes[k].clone();
    for i in (0..r).rev() {
        let g = family.base.level_graph(i).expect("the base carries its whole chain");
        let s = w_sources(&*g, &pairs[i as usize], None);
        tr.independence_checks += 1;
        if let Some((u, v)) = check_independent(&g, &s) {
            return Err(BoundError::Construction(format!(
                "class {k}: S_{i} contains the edge {} - {}",
                g.vertex(u),
                g.vertex(v)
            )));
        }
        if i > 0 {
            pairs[i as usize - 1] = PairSet::new(s.iter().map(|&v| g.part(v).expect("level >= 1").clone()).collect());
        }
        ids[i as usize] = s;
    }
    Ok(SourceChain { ids, pairs })
}

fn vertex_name(g: &NbhdGraph, v: usize) -> String {
    g.vertex(v).to_string()
}

fn names(g: &NbhdGraph, vs: &[usize]) -> String {
    let parts: Vec<String> = vs.iter().map(|&v| vertex_name(g, v)).collect();
    format!("{{{}}}", parts.join(", "))
}

fn refutation(family: &IndSetFamily, pair: Pair, tr: Transcript) -> Refutation {
    let view = family.base.pair_view(&pair);
    Refutation { level: family.level(), pair, view, transcript: tr }
}

/// A vertex of `NH1(m, Δ)` that no class covers, built from the orientations
/// the classes induce on `K_m`.
///
/// Requires `c <= Δ²/4` and `m >= Δ²/4 + Δ/2 + 1`.
pub fn uncovered_node_nh1(family: &IndSetFamily) -> Result<Refutation> {
    let base = &family.base;
    if base.level() != 0 || family.mode != Mode::Proper {
        return Err(BoundError::Precondition("needs proper classes over K_m".into()));
    }
    let (m, delta, c) = (family.m(), family.bound, family.classes.len());
    if delta < 2 {
        return Err(BoundError::Precondition(format!("delta = {delta} < 2")));
    }
    if 4 * c > delta * delta {
        return Err(BoundError::Precondition(format!("c = {c} exceeds delta^2/4 = {}", delta * delta / 4)));
    }
    if 4 * m < delta * delta + 2 * delta + 4 {
        return Err(BoundError::Precondition(format!("m = {m} is below delta^2/4 + delta/2 + 1")));
    }
    let mut tr = Transcript::default();
    let orientations = family
        .classes
        .iter()
        .map(|class| orientation_of(class, m))
        .collect::<Result<Vec<_>>>()?;
    let mut sources: Vec<usize> = Vec::new();
    for (k, o) in orientations.iter().enumerate() {
        let s = o.sources();
        tr.unique_source_checks += 1;
        if s.len() > 1 {
            return Err(BoundError::Construction(format!("orientation {k} has {} sources", s.len())));
        }
        sources.extend(s);
    }
    sources.sort_unstable();
    sources.dedup();
    let t: Vec<usize> = (0..m).filter(|x| sources.binary_search(x).is_err()).take(delta / 2 + 1).collect();
    if t.len() < delta / 2 + 1 {
        return Err(BoundError::Construction(format!("only {} non-sources", t.len())));
    }
    tr.log(format!("sources {} excluded, T = {}", names(base, &sources), names(base, &t)));

    let mut count = vec![0usize; t.len()];
    for (k, o) in orientations.iter().enumerate() {
        let hits: Vec<usize> = (0..t.len()).filter(|&j| o.is_w_source(t[j], &t)).collect();
        tr.unique_source_checks += 1;
        if hits.len() > 1 {
            return Err(BoundError::Construction(format!("orientation {k} has {} T-sources", hits.len())));
        }
        for j in hits {
            count[j] += 1;
        }
    }
    let j = (0..t.len()).min_by_key(|&j| count[j]).expect("T is nonempty");
    let x = t[j];
    let mut a: Vec<usize> = t.iter().copied().filter(|&y| y != x).collect();
    for (k, o) in orientations.iter().enumerate() {
        if !o.is_w_source(x, &t) {
            continue;
        }
        let y = (0..m)
            .find(|&y| y != x && o.directed(y, x))
            .ok_or_else(|| BoundError::Construction(format!("{} is a source of orientation {k}", x + 1)))?;
        tr.witnesses += 1;
        tr.log(format!("class {k}: {} is a T-source, add {}", vertex_name(base, x), vertex_name(base, y)));
        a.push(y);
    }
    a.sort_unstable();
    a.dedup();
    if a.len() >= delta {
        return Err(BoundError::Construction(format!("|A| = {} is not below delta = {delta}", a.len())));
    }
    let pair = Pair { center: x, members: a };
    for (k, (o, class)) in orientations.iter().zip(&family.classes).enumerate() {
        if o.covers(&pair) || class.contains(&pair) {
            return Err(BoundError::Construction(format!("class {k} covers the constructed vertex")));
        }
        tr.classes_verified += 1;
    }
    tr.log(format!("x = {} is a T-source of {} classes", vertex_name(base, x), count[j]));
    Ok(refutation(family, pair, tr))
}

/// One application of the clique construction: from an uncolored clique `t`
/// of size `p + d` in the level-`level` graph, builds an uncolored clique of
/// size `p` one level up, returned as pairs over the level-`level` graph.
pub fn uncolored_clique_step(
    family: &IndSetFamily,
    chains: &[SourceChain],
    level: u32,
    t: &[usize],
    p: usize,
    d: usize,
) -> Result<(Vec<Pair>, Transcript)> {
    let mut tr = Transcript::default();
    let out = clique_step(family, chains, level, t, p, d, &mut tr)?;
    Ok((out, tr))
}

fn clique_step(
    family: &IndSetFamily,
    chains: &[SourceChain],
    level: u32,
    t: &[usize],
    p: usize,
    d: usize,
    tr: &mut Transcript,
) -> Result<Vec<Pair>> {
    let c = family.classes.len();
    let big_d = family.bound;
    if level >= family.level() || chains.len() != c {
        return Err(BoundError::Precondition("level or chains do not match the family".into()));
    }
    if p == 0 || d == 0 || t.len() != p + d {
        return Err(BoundError::Precondition(format!("|T| = {} but p + d = {}", t.len(), p + d)));
    }
    if (p + d - 1) * d + c > big_d * d {
        return Err(BoundError::Precondition(format!("p + d - 1 + c/d exceeds D = {big_d}")));
    }
    let g = family.base.level_graph(level).expect("the base carries its whole chain");
    let mut t: Vec<usize> = t.to_vec();
    t.sort_unstable();
    for (a, &u) in t.iter().enumerate() {
        if let Some(&v) = t[a + 1..].iter().find(|&&v| !g.has_edge(u, v)) {
            return Err(BoundError::Precondition(format!("T is not a clique: {} - {}", g.vertex(u), g.vertex(v))));
        }
        if let Some(k) = chains.iter().position(|ch| ch.ids[level as usize].binary_search(&u).is_ok()) {
            return Err(BoundError::Precondition(format!("{} is colored by class {k}", g.vertex(u))));
        }
    }
    let classes: Vec<&PairSet> = chains.iter().map(|ch| &ch.pairs[level as usize]).collect();

    let mut chosen: Vec<usize> = Vec::with_capacity(p);
    let mut source_of: Vec<Vec<usize>> = Vec::with_capacity(p);
    for _ in 0..p {
        let tj: Vec<usize> = t.iter().copied().filter(|x| !chosen.contains(x)).take(d).collect();
        let mut hits: Vec<Vec<usize>> = vec![Vec::new(); tj.len()];
        for (k, class) in classes.iter().enumerate() {
            let s = w_sources(&*g, class, Some(&tj));
            tr.unique_source_checks += 1;
            if s.len() > 1 {
                return Err(BoundError::Construction(format!("class {k} has {} sources in {}", s.len(), names(&g, &tj))));
            }
            for x in s {
                hits[tj.iter().position(|&y| y == x).expect("sources lie in W")].push(k);
            }
        }
        let j = (0..tj.len()).min_by_key(|&j| hits[j].len()).expect("T_j is nonempty");
        chosen.push(tj[j]);
        source_of.push(std::mem::take(&mut hits[j]));
    }

    let mut out = Vec::with_capacity(p);
    for (&tj, ks) in chosen.iter().zip(&source_of) {
        let mut a: Vec<usize> = t.iter().copied().filter(|&y| y != tj).collect();
        for &k in ks {
            let covered = classes[k].covered(tj);
            let w = g
                .neighbors(tj)
                .iter()
                .copied()
                .find(|y| covered.binary_search(y).is_err())
                .ok_or_else(|| BoundError::Construction(format!("{} has no witness against class {k}", g.vertex(tj))))?;
            tr.witnesses += 1;
            a.push(w);
        }
        a.sort_unstable();
        a.dedup();
        if a.len() > big_d {
            return Err(BoundError::Construction(format!("|A| = {} exceeds D = {big_d}", a.len())));
        }
        let pair = Pair { center: tj, members: a };
        if let Some(k) = classes.iter().position(|class| class.contains(&pair)) {
            return Err(BoundError::Construction(format!("class {k} contains the constructed vertex")));
        }
        tr.log(format!(
            "level {}: center {} dodges {} classes via witnesses",
            level + 1,
            g.vertex(tj),
            ks.len()
        ));
        out.push(pair);
    }
    for (a, x) in out.iter().enumerate() {
        if out[a + 1..].iter().any(|y| !x.adjacent(y)) {
            return Err(BoundError::Construction("constructed vertices do not form a clique".into()));
        }
    }
    Ok(out)
}

/// A vertex of `NT_r(m, D)` in no class, following the inductive clique
/// construction with `d = D / 2r`.
///
/// Requires `2r | D`, `c <= D²/4r` and `m >= D²/4r + D/2 + 1`.
pub fn refute_nt(family: &IndSetFamily) -> Result<Refutation> {
    let base = family.base.clone();
    let r = family.level() as usize;
    let ok_family = match base.family() {
        Family::Nt => true,
        Family::Nh1 => r == 1,
        _ => false,
    };
    if !ok_family || base.kind() != Delivery::Set || family.mode != Mode::Proper {
        return Err(BoundError::Precondition("needs proper classes of NT_r".into()));
    }
    let (m, big_d, c) = (family.m(), family.bound, family.classes.len());
    if big_d % (2 * r) != 0 {
        return Err(BoundError::Precondition(format!("D = {big_d} is not divisible by 2r = {}", 2 * r)));
    }
    let d = big_d / (2 * r);
    if 4 * r * c > big_d * big_d {
        return Err(BoundError::Precondition(format!("c = {c} exceeds D^2/4r")));
    }
    if 4 * r * m < big_d * big_d + 2 * r * big_d + 4 * r {
        return Err(BoundError::Precondition(format!("m = {m} is below D^2/4r + D/2 + 1")));
    }
    let mut tr = Transcript::default();
    let chains = (0..c).map(|k| source_chain_counted(family, k, &mut tr)).collect::<Result<Vec<_>>>()?;

    let k0 = base.level_graph(0).expect("chain reaches K_m");
    let mut colored: Vec<usize> = Vec::new();
    for (k, ch) in chains.iter().enumerate() {
        tr.unique_source_checks += 1;
        if ch.ids[0].len() > 1 {
            return Err(BoundError::Construction(format!("class {k} has {} sources in K_m", ch.ids[0].len())));
        }
        colored.extend(&ch.ids[0]);
    }
    colored.sort_unstable();
    colored.dedup();
    let mut t: Vec<usize> = (0..m).filter(|x| colored.binary_search(x).is_err()).take(r * d + 1).collect();
    if t.len() < r * d + 1 {
        return Err(BoundError::Construction(format!("only {} uncolored colors", t.len())));
    }
    tr.log(format!("level 0: uncolored clique {}", names(&k0, &t)));
    for i in 0..r {
        let p = r * d - (i + 1) * d + 1;
        let pairs = clique_step(family, &chains, i as u32, &t, p, d, &mut tr)?;
        if i + 1 == r {
            let pair = pairs.into_iter().next().expect("p = 1 at the top");
            tr.classes_verified = c;
            return Ok(refutation(family, pair, tr));
        }
        let up = base.level_graph(i as u32 + 1).expect("chain is complete");
        t = pairs
            .iter()
            .map(|q| up.find_pair(q).ok_or_else(|| BoundError::Construction(format!("{q:?} is not a vertex"))))
            .collect::<Result<Vec<_>>>()?;
        t.sort_unstable();
        tr.log(format!("level {}: uncolored clique of size {}", i + 1, t.len()));
    }
    unreachable!("r >= 1")
}

/// Bitset of member sets of a class's pairs centered at one vertex.
fn member_masks(class: &PairSet, x: usize, words: usize) -> Vec<Vec<u64>> {
    class
        .centered_at(x)
        .map(|p| {
            let mut mask = vec![0u64; words];
            for &y in &p.members {
                mask[y / 64] |= 1 << (y % 64);
            }
            mask
        })
        .collect()
}

fn some_mask_holds(masks: &[Vec<u64>], b: &[usize]) -> bool {
    masks.iter().any(|mask| b.iter().all(|&y| mask[y / 64] >> (y % 64) & 1 == 1))
}

/// Smallest nonempty `B ⊆ items` with `|B| <= max`, by size and then
/// lexicographically, contained in no mask.
fn first_unheld(items: &[usize], max: usize, masks: &[Vec<u64>]) -> Option<Vec<usize>> {
    fn rec(items: &[usize], start: usize, size: usize, cur: &mut Vec<usize>, masks: &[Vec<u64>]) -> bool {
        if cur.len() == size {
            return !some_mask_holds(masks, cur);
        }
        for i in start..items.len() {
            cur.push(items[i]);
            if rec(items, i + 1, size, cur, masks) {
                return true;
            }
            cur.pop();
        }
        false
    }
    for size in 1..=max.min(items.len()) {
        let mut cur = Vec::with_capacity(size);
        if rec(items, 0, size, &mut cur, masks) {
            return Some(cur);
        }
    }
    None
}

/// Whether `x` is a `(d, W)`-source: every nonempty `B ⊆ Γ(x) ∩ W` with
/// `|B| <= d + 1` is contained in the member set of some pair centered at `x`.
fn is_d_source<G: Adjacency + ?Sized>(g: &G, class: &PairSet, x: usize, w: Option<&[usize]>, d: usize) -> bool {
    let items: Vec<usize> = g
        .neighbors(x)
        .iter()
        .copied()
        .filter(|y| w.is_none_or(|w| w.binary_search(y).is_ok()))
        .collect();
    let words = g.node_count().div_ceil(64).max(1);
    first_unheld(&items, d + 1, &member_masks(class, x, words)).is_none()
}

/// `S^d_W(I)`: the `(d, W)`-sources of `class` inside `W` (everything when
/// `w` is `None`). `d = 0` gives [`w_sources`].
pub fn d_sources<G: Adjacency + ?Sized>(g: &G, class: &PairSet, w: Option<&[usize]>, d: usize) -> Vec<usize> {
    let domain: Vec<usize> = match w {
        Some(w) => w.to_vec(),
        None => (0..g.node_count()).collect(),
    };
    domain.into_iter().filter(|&x| is_d_source(g, class, x, w, d)).collect()
}

/// A vertex of `NH1(m, Δ)` in no class of a `d`-defective family.
///
/// Requires `c <= Δ²/(4(d+1)²)` and `m >= 2Δ²`.
pub fn uncovered_node_defective(family: &IndSetFamily) -> Result<Refutation> {
    let base = &family.base;
    let Mode::Defective(d) = family.mode else {
        return Err(BoundError::Precondition("needs a defective family".into()));
    };
    if base.level() != 0 {
        return Err(BoundError::Precondition("needs classes over K_m".into()));
    }
    let (m, delta, c) = (family.m(), family.bound, family.classes.len());
    if 4 * (d + 1) * (d + 1) * c > delta * delta {
        return Err(BoundError::Precondition(format!("c = {c} exceeds delta^2/(4(d+1)^2)")));
    }
    if m < 2 * delta * delta {
        return Err(BoundError::Precondition(format!("m = {m} is below 2 delta^2")));
    }
    let mut tr = Transcript::default();
    let mut global: Vec<usize> = Vec::new();
    for (k, class) in family.classes.iter().enumerate() {
        let s = d_sources(&**base, class, None, d);
        tr.defect_source_checks += 1;
        if s.len() > d + 1 {
            return Err(BoundError::Construction(format!("class {k} has {} defective sources", s.len())));
        }
        global.extend(s);
    }
    global.sort_unstable();
    global.dedup();
    let size = delta / 2 + 1;
    let t: Vec<usize> = (0..m).filter(|x| global.binary_search(x).is_err()).take(size).collect();
    if t.len() < size {
        return Err(BoundError::Construction(format!("only {} non-sources", t.len())));
    }
    tr.log(format!("defective sources {} excluded, T = {}", names(base, &global), names(base, &t)));
    let mut hits: Vec<Vec<usize>> = vec![Vec::new(); t.len()];
    for (k, class) in family.classes.iter().enumerate() {
        let s = d_sources(&**base, class, Some(&t), d);
        tr.defect_source_checks += 1;
        if s.len() > d + 1 {
            return Err(BoundError::Construction(format!("class {k} has {} defective T-sources", s.len())));
        }
        for x in s {
            hits[t.iter().position(|&y| y == x).expect("sources lie in T")].push(k);
        }
    }
    let j = (0..t.len()).min_by_key(|&j| hits[j].len()).expect("T is nonempty");
    let x = t[j];
    let words = m.div_ceil(64).max(1);
    let mut a: Vec<usize> = t.iter().copied().filter(|&y| y != x).collect();
    for &k in &hits[j] {
        let masks = member_masks(&family.classes[k], x, words);
        let b = first_unheld(base.neighbors(x), d + 1, &masks).ok_or_else(|| {
            BoundError::Construction(format!("{} is a defective source of class {k}", vertex_name(base, x)))
        })?;
        tr.witnesses += 1;
        tr.log(format!("class {k}: add blocker {}", names(base, &b)));
        a.extend(b);
    }
    a.sort_unstable();
    a.dedup();
    if a.len() >= delta {
        return Err(BoundError::Construction(format!("|A| = {} is not below delta = {delta}", a.len())));
    }
    let pair = Pair { center: x, members: a };
    if let Some(k) = family.classes.iter().position(|class| class.contains(&pair)) {
        return Err(BoundError::Construction(format!("class {k} contains the constructed vertex")));
    }
    tr.classes_verified = c;
    Ok(refutation(family, pair, tr))
}

/// Parameters and derived quantities of the round lower bound for
/// `CΔ^{1+η}`-coloring.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub delta: f64,
    pub c: f64,
    pub eta: f64,
    /// `⌊(Δ^{1-η} / 16C)^{1/3}⌋`.
    pub rounds: u64,
    pub r_real: f64,
    /// `(2CΔ^{2+η})^{1/3}`.
    pub d_real: f64,
    /// `CΔ^{1+η}`, the number of colors ruled out.
    pub colors: f64,
    /// `D²/4r + D/2 + 1` at the real-valued `r`.
    pub m_threshold: f64,
    /// `2CΔ^{1+η}`.
    pub m_reference: f64,
    /// Whether `m >= 2CΔ^{1+η}` already implies `m >= m_threshold`.
    pub threshold_implied: bool,
}

/// Floor of a cube root, robust to rounding just below an exact cube.
fn floor_cbrt(x: f64) -> u64 {
    let mut r = x.cbrt().floor().max(0.0) as u64;
    while ((r + 1) as f64).powi(3) <= x * (1.0 + 1e-12) {
        r += 1;
    }
    while r > 0 && (r as f64).powi(3) > x * (1.0 + 1e-12) {
        r -= 1;
    }
    r
}

/// Round count below which `CΔ^{1+η}` colors are out of reach. The value is
/// not clamped: it is 0 when `Δ^{1-η} < 16C`.
pub fn lower_bound_rounds(delta: f64, c: f64, eta: f64) -> Result<BoundReport> {
    if !(0.0..1.0).contains(&eta) {
        return Err(BoundError::Precondition(format!("eta = {eta} is outside [0, 1)")));
    }
    if !c.is_finite() || c <= 0.0 {
        return Err(BoundError::Precondition(format!("C = {c} must be positive")));
    }
    if !delta.is_finite() || delta < 1.0 {
        return Err(BoundError::Precondition(format!("delta = {delta} must be at least 1")));
    }
    let inner = delta.powf(1.0 - eta) / (16.0 * c);
    let r_real = inner.cbrt();
    let d_real = (2.0 * c * delta.powf(2.0 + eta)).cbrt();
    let colors = c * delta.powf(1.0 + eta);
    let m_threshold = d_real * d_real / (4.0 * r_real) + d_real / 2.0 + 1.0;
    let m_reference = 2.0 * colors;
    Ok(BoundReport {
        delta,
        c,
        eta,
        rounds: floor_cbrt(inner),
        r_real,
        d_real,
        colors,
        m_threshold,
        m_reference,
        threshold_implied: m_threshold <= m_reference,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nbhd::{build_nh1, build_nt, level_zero, BuildLimits};

    fn k(m: u32) -> Arc<NbhdGraph> {
        Arc::new(level_zero(Family::Nt, m, 2, Delivery::Set))
    }

    fn pair(x: usize, a: &[usize]) -> Pair {
        Pair::new(x, a.to_vec())
    }

    #[test]
    fn orientation_rules() {
        let o = orientation_of(&PairSet::new(vec![pair(0, &[1])]), 3).unwrap();
        assert!(o.directed(0, 1) && o.directed(0, 2) && o.directed(1, 2));
        assert_eq!(o.sources(), vec![0]);
        let all = orientation_of(&PairSet::default(), 4).unwrap();
        assert_eq!(all.sources(), vec![0]);
        let bad = PairSet::new(vec![pair(0, &[1]), pair(1, &[0])]);
        assert!(orientation_of(&bad, 3).is_err());
        let back = orientation_of(&PairSet::new(vec![pair(2, &[0])]), 3).unwrap();
        assert!(back.directed(2, 0) && !back.directed(0, 2));
    }

    #[test]
    fn w_source_examples() {
        let g = k(3);
        let i = PairSet::new(vec![pair(0, &[1]), pair(0, &[2])]);
        assert_eq!(w_sources(&*g, &i, None), vec![0]);
        let j = PairSet::new(vec![pair(0, &[1])]);
        assert!(w_sources(&*g, &j, None).is_empty());
        assert_eq!(w_sources(&*g, &PairSet::default(), Some(&[1])), vec![1]);
    }

    #[test]
    fn chain_of_small_class() {
        let nt = build_nt(1, 3, 2, BuildLimits::default()).unwrap();
        let ids: Vec<usize> = [pair(0, &[1]), pair(0, &[2])].iter().map(|p| nt.find_pair(p).unwrap()).collect();
        let fam = IndSetFamily::on_graph(&nt, &[ids], Mode::Proper).unwrap();
        let ch = source_chain(&fam, 0).unwrap();
        assert_eq!(ch.ids[0], vec![0]);
        assert_eq!(ch.sizes(), vec![2, 1]);
        let empty = IndSetFamily::on_graph(&nt, &[vec![]], Mode::Proper).unwrap();
        assert_eq!(source_chain(&empty, 0).unwrap().sizes(), vec![0, 0]);
    }

    #[test]
    fn family_validation() {
        let g = k(3);
        let adjacent = vec![vec![pair(0, &[1]), pair(1, &[0])]];
        assert!(IndSetFamily::new(g.clone(), 2, adjacent.clone(), Mode::Proper).is_err());
        assert!(IndSetFamily::new(g.clone(), 2, adjacent, Mode::Defective(1)).is_ok());
        assert!(IndSetFamily::new(g.clone(), 1, vec![vec![pair(0, &[1, 2])]], Mode::Proper).is_err());
        assert!(IndSetFamily::new(g.clone(), 2, vec![vec![pair(0, &[0])]], Mode::Proper).is_err());
        assert!(IndSetFamily::new(g, 2, vec![vec![Pair { center: 0, members: vec![1, 1] }]], Mode::Proper).is_err());
    }

    #[test]
    fn nh1_smallest_case() {
        let nh = build_nh1(3, 2, Delivery::Multiset, BuildLimits::default()).unwrap();
        let base = nh.below().unwrap().clone();
        let fam = IndSetFamily::new(base, 2, vec![vec![pair(0, &[1, 2])]], Mode::Proper).unwrap();
        let r = uncovered_node_nh1(&fam).unwrap();
        assert_ne!(r.pair.center, 0);
        assert!(nh.find_pair(&r.pair).is_some());
    }

    #[test]
    fn trivial_clique_step() {
        let nt = build_nt(1, 3, 2, BuildLimits::default()).unwrap();
        let fam = IndSetFamily::on_graph(&nt, &[], Mode::Proper).unwrap();
        let (out, _) = uncolored_clique_step(&fam, &[], 0, &[0, 1], 1, 1).unwrap();
        assert_eq!(out, vec![pair(0, &[1])]);
    }

    #[test]
    fn d_sources_match_at_zero() {
        let g = k(4);
        let class = PairSet::new(vec![pair(0, &[1, 2]), pair(0, &[3]), pair(1, &[2])]);
        for w in [None, Some(&[0usize, 1, 2][..]), Some(&[1usize][..])] {
            assert_eq!(d_sources(&*g, &class, w, 0), w_sources(&*g, &class, w));
        }
        assert!(d_sources(&*g, &class, None, 1).is_empty());
        let pairs = PairSet::new(vec![pair(0, &[1, 2]), pair(0, &[1, 3]), pair(0, &[2, 3])]);
        assert_eq!(d_sources(&*g, &pairs, None, 1), vec![0]);
    }

    #[test]
    fn first_unheld_order() {
        let masks = vec![vec![0b0110u64]];
        assert_eq!(first_unheld(&[1, 2, 3], 2, &masks), Some(vec![3]));
        assert_eq!(first_unheld(&[1, 2], 2, &masks), None);
    }

    #[test]
    fn lower_bound_values() {
        assert_eq!(lower_bound_rounds(1024.0, 1.0, 0.0).unwrap().rounds, 4);
        assert_eq!(lower_bound_rounds(16.0, 1.0, 0.0).unwrap().rounds, 1);
        assert!(lower_bound_rounds(16.0, 1.0, 1.0).is_err());
        assert!(lower_bound_rounds(16.0, 0.0, 0.5).is_err());
        let r = lower_bound_rounds(4096.0, 2.0, 0.25).unwrap();
        assert!((r.d_real * r.d_real / (4.0 * r.r_real) - r.colors).abs() < 1e-6 * r.colors);
        assert!((2.0 * r.r_real * r.d_real - 4096.0).abs() < 1e-6);
    }
}
