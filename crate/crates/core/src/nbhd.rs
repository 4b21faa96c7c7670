//! Neighborhood graphs: the one-round graph `NH1(m, Δ)`, the set-model graph
//! `NSL_r(m, Δ)` of realizable views, and the recursive families `NT_r(m, D)`
//! and `Ñ_r(m, D)`, plus the homomorphisms `h_r` and `f_r` between them.
//!
//! Every vertex is stored as a [`View`]: a level-`i+1` vertex `(x, A)` is the
//! view with inner view `x` and children `A`. Canonical encodings give one
//! total order for vertex lists, dedup and tie-breaking.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::graph::{Adjacency, Color, ColoredGraph};
use crate::view::{extract_view, Delivery, View};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Nh1,
    Nsl,
    Nt,
    Ntilde,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Nh1 => "NH1",
            Family::Nsl => "NSL",
            Family::Nt => "NT",
            Family::Ntilde => "Ntilde",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NbhdError {
    #[error("{family} level {level}: projected {projected} vertices exceeds the cap of {cap}")]
    CapExceeded { family: Family, level: u32, projected: u128, cap: usize },
    #[error("invalid parameters: {0}")]
    Invalid(String),
    #[error("homomorphism {name} failed verification: {missing} missing images, {broken} broken edges")]
    HomFailed { name: String, missing: usize, broken: usize },
    #[error("fill-up impossible for {0}")]
    FillUp(String),
}

pub type Result<T> = std::result::Result<T, NbhdError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildLimits {
    pub max_vertices: usize,
}

impl Default for BuildLimits {
    fn default() -> Self {
        Self { max_vertices: 2_000_000 }
    }
}

/// A vertex `(center, members)` of a level-`i+1` graph, with indices into the
/// level-`i` graph. `members` is sorted; repeats only occur in multiset `NH1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pair {
    pub center: usize,
    pub members: Vec<usize>,
}

impl Pair {
    pub fn new(center: usize, mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        Self { center, members }
    }

    pub fn contains(&self, x: usize) -> bool {
        self.members.binary_search(&x).is_ok()
    }

    /// Members with repeats removed.
    pub fn distinct(&self) -> Vec<usize> {
        let mut d = self.members.clone();
        d.dedup();
        d
    }

    /// The mutual-membership edge rule.
    pub fn adjacent(&self, other: &Pair) -> bool {
        self.contains(other.center) && other.contains(self.center)
    }
}

/// An explicit neighborhood graph. Vertices are sorted by canonical encoding.
pub struct NbhdGraph {
    family: Family,
    m: u32,
    bound: usize,
    level: u32,
    kind: Delivery,
    vertices: Vec<View>,
    index: HashMap<View, usize>,
    parts: Vec<Pair>,
    adjacency: Vec<Vec<usize>>,
    below: Option<Arc<NbhdGraph>>,
}

impl fmt::Debug for NbhdGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}_{}(m={}, bound={}, {}): {} vertices, {} edges",
            self.family,
            self.level,
            self.m,
            self.bound,
            self.kind,
            self.vertices.len(),
            self.edge_count()
        )
    }
}

impl Adjacency for NbhdGraph {
    fn node_count(&self) -> usize {
        self.vertices.len()
    }
    fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }
}

impl NbhdGraph {
    pub fn family(&self) -> Family {
        self.family
    }
    pub fn m(&self) -> u32 {
        self.m
    }
    /// Δ for `NH1`/`NSL`, `D` for `NT`/`Ñ`.
    pub fn bound(&self) -> usize {
        self.bound
    }
    pub fn level(&self) -> u32 {
        self.level
    }
    pub fn kind(&self) -> Delivery {
        self.kind
    }
    pub fn vertices(&self) -> &[View] {
        &self.vertices
    }
    pub fn vertex(&self, i: usize) -> &View {
        &self.vertices[i]
    }
    pub fn index_of(&self, v: &View) -> Option<usize> {
        self.index.get(v).copied()
    }
    /// `(center, members)` of vertex `i`, indexing into [`Self::below`]; `None` at level 0.
    pub fn part(&self, i: usize) -> Option<&Pair> {
        self.parts.get(i)
    }
    pub fn parts(&self) -> &[Pair] {
        &self.parts
    }
    pub fn below(&self) -> Option<&Arc<NbhdGraph>> {
        self.below.as_ref()
    }

    /// The graph of level `i <= self.level` in this graph's chain.
    pub fn level_graph(self: &Arc<Self>, i: u32) -> Option<Arc<NbhdGraph>> {
        let mut g = self.clone();
        while g.level > i {
            g = g.below.clone()?;
        }
        (g.level == i).then_some(g)
    }

    /// View of the level-`i+1` vertex `(center, members)` over this graph.
    pub fn pair_view(&self, p: &Pair) -> View {
        let kids = p.members.iter().map(|&a| self.vertices[a].clone());
        View::node(self.kind, self.vertices[p.center].clone(), kids).expect("members come from one level")
    }

    /// Vertex with the given view in this graph, looked up through its parts.
    pub fn find_pair(&self, p: &Pair) -> Option<usize> {
        let below = self.below.as_ref()?;
        self.index_of(&below.pair_view(p))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "family": self.family,
            "level": self.level,
            "m": self.m,
            "bound": self.bound,
            "kind": self.kind,
            "vertices": self.vertices.iter().map(View::to_json).collect::<Vec<_>>(),
            "edges": self.edges().into_iter().map(|(u, v)| [u, v]).collect::<Vec<_>>(),
        })
    }
}

/// `z(v)`: the center of a vertex, `None` (⊥) at level 0.
pub fn center(v: &View) -> Option<View> {
    v.inner().cloned()
}

/// `R(v)`: the types of a vertex, `{⊥}` at level 0.
pub fn types(v: &View) -> Vec<Option<View>> {
    if v.depth() == 0 {
        vec![None]
    } else {
        v.child_views().map(|c| Some(c.clone())).collect()
    }
}

/// `z(A)` for a set of vertices, as a sorted duplicate-free list.
pub fn centers_of<'a>(a: impl IntoIterator<Item = &'a View>) -> Vec<Option<View>> {
    let mut out: Vec<Option<View>> = a.into_iter().map(center).collect();
    out.sort();
    out.dedup();
    out
}

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i + 1) as u128;
    }
    acc
}

fn count_subsets(n: usize, k: usize) -> u128 {
    (0..=k.min(n)).map(|j| binomial(n, j)).fold(0u128, u128::saturating_add)
}

fn count_multisets(n: usize, k: usize) -> u128 {
    if n == 0 {
        return 1;
    }
    (0..=k).map(|j| binomial(n + j - 1, j)).fold(0u128, u128::saturating_add)
}

/// Calls `f` on every sorted subset of `items` with at most `k` elements.
pub(crate) fn for_each_subset(items: &[usize], k: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(items: &[usize], start: usize, k: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        f(cur);
        if cur.len() == k {
            return;
        }
        for i in start..items.len() {
            cur.push(items[i]);
            rec(items, i + 1, k, cur, f);
            cur.pop();
        }
    }
    rec(items, 0, k, &mut Vec::new(), f);
}

/// Calls `f` on every nondecreasing multiset over `items` with at most `k` elements.
fn for_each_multiset(items: &[usize], k: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(items: &[usize], start: usize, k: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        f(cur);
        if cur.len() == k {
            return;
        }
        for i in start..items.len() {
            cur.push(items[i]);
            rec(items, i, k, cur, f);
            cur.pop();
        }
    }
    rec(items, 0, k, &mut Vec::new(), f);
}

/// The level-0 graph `K_m` of a family, used as the base of implicit hosts.
pub fn level_zero(family: Family, m: u32, bound: usize, kind: Delivery) -> NbhdGraph {
    let vertices: Vec<View> = (1..=m).map(|c| View::leaf(kind, c)).collect();
    let index = vertices.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
    let n = m as usize;
    let adjacency = (0..n).map(|u| (0..n).filter(|&v| v != u).collect()).collect();
    NbhdGraph { family, m, bound, level: 0, kind, vertices, index, parts: Vec::new(), adjacency, below: None }
}

/// Assembles a level-`i+1` graph from candidate pairs over `below`, with edges
/// by mutual membership.
fn assemble(family: Family, bound: usize, below: Arc<NbhdGraph>, pairs: Vec<Pair>) -> NbhdGraph {
    let mut tagged: Vec<(View, Pair)> = pairs.into_iter().map(|p| (below.pair_view(&p), p)).collect();
    tagged.sort_by(|a, b| a.0.cmp(&b.0));
    tagged.dedup_by(|a, b| a.0 == b.0);
    let (vertices, parts): (Vec<View>, Vec<Pair>) = tagged.into_iter().unzip();
    let index: HashMap<View, usize> = vertices.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
    // (center, member) -> vertices with that center containing that member
    let mut holding: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (i, p) in parts.iter().enumerate() {
        for y in p.distinct() {
            holding.entry((p.center, y)).or_default().push(i);
        }
    }
    let adjacency: Vec<Vec<usize>> = parts
        .iter()
        .map(|p| {
            let mut adj: Vec<usize> = p
                .distinct()
                .into_iter()
                .flat_map(|y| holding.get(&(y, p.center)).into_iter().flatten().copied())
                .collect();
            adj.sort_unstable();
            adj.dedup();
            adj
        })
        .collect();
    NbhdGraph {
        family,
        m: below.m,
        bound,
        level: below.level + 1,
        kind: below.kind,
        vertices,
        index,
        parts,
        adjacency,
        below: Some(below),
    }
}

fn guard(family: Family, level: u32, projected: u128, limits: BuildLimits) -> Result<()> {
    if projected > limits.max_vertices as u128 {
        return Err(NbhdError::CapExceeded { family, level, projected, cap: limits.max_vertices });
    }
    Ok(())
}

/// `NH1(m, Δ)`: all `(x, A)` with `A` a multiset (or set) over `[m] \ {x}`, `|A| <= Δ`.
pub fn build_nh1(m: u32, delta: usize, variant: Delivery, limits: BuildLimits) -> Result<NbhdGraph> {
    if delta < 2 || (m as usize) <= delta {
        return Err(NbhdError::Invalid(format!("NH1 needs m > delta >= 2, got m = {m}, delta = {delta}")));
    }
    let per = match variant {
        Delivery::Set => count_subsets(m as usize - 1, delta),
        Delivery::Multiset => count_multisets(m as usize - 1, delta),
    };
    guard(Family::Nh1, 1, per.saturating_mul(m as u128), limits)?;
    let base = Arc::new(level_zero(Family::Nh1, m, delta, variant));
    let mut pairs = Vec::new();
    for x in 0..m as usize {
        let others = base.neighbors(x);
        let mut push = |a: &[usize]| pairs.push(Pair { center: x, members: a.to_vec() });
        match variant {
            Delivery::Set => for_each_subset(others, delta, &mut push),
            Delivery::Multiset => for_each_multiset(others, delta, &mut push),
        }
    }
    Ok(assemble(Family::Nh1, delta, base, pairs))
}

fn build_recursive(family: Family, r: u32, m: u32, d: usize, limits: BuildLimits) -> Result<NbhdGraph> {
    if m < 1 {
        return Err(NbhdError::Invalid("m must be at least 1".into()));
    }
    let mut g = level_zero(family, m, d, Delivery::Set);
    for level in 1..=r {
        let below = Arc::new(g);
        let projected = (0..below.node_count())
            .map(|x| count_subsets(below.degree(x), d))
            .fold(0u128, u128::saturating_add);
        guard(family, level, projected, limits)?;
        let mut pairs = Vec::new();
        for x in 0..below.node_count() {
            let want: Vec<Option<usize>> = match below.part(x) {
                None => vec![None],
                Some(p) => p.members.iter().map(|&a| Some(a)).collect(),
            };
            let mut push = |a: &[usize]| {
                if family == Family::Ntilde {
                    let mut have: Vec<Option<usize>> = a.iter().map(|&y| below.part(y).map(|p| p.center)).collect();
                    have.sort_unstable();
                    have.dedup();
                    if have != want {
                        return;
                    }
                }
                pairs.push(Pair { center: x, members: a.to_vec() });
            };
            for_each_subset(below.neighbors(x), d, &mut push);
        }
        g = assemble(family, d, below, pairs);
    }
    Ok(g)
}

/// `NT_r(m, D)`: level 0 is `K_m`; level `i+1` has every `(x, A)` with
/// `A ⊆ Γ(x)` and `|A| <= D`.
pub fn build_nt(r: u32, m: u32, d: usize, limits: BuildLimits) -> Result<NbhdGraph> {
    build_recursive(Family::Nt, r, m, d, limits)
}

/// `Ñ_r(m, D)`: as `NT_r` with the additional type condition `R(x) = z(A)`.
pub fn build_ntilde(r: u32, m: u32, d: usize, limits: BuildLimits) -> Result<NbhdGraph> {
    build_recursive(Family::Ntilde, r, m, d, limits)
}

/// Rooted trees with distinct child subtrees, stored in an arena.
struct TreeArena {
    color: Vec<Color>,
    kids: Vec<Vec<u32>>,
}

impl TreeArena {
    fn add(&mut self, color: Color, kids: Vec<u32>) -> u32 {
        self.color.push(color);
        self.kids.push(kids);
        (self.color.len() - 1) as u32
    }

    /// Expands tree `t` into `edges`/`psi`, returning the node index of its root.
    fn expand(&self, t: u32, edges: &mut Vec<(usize, usize)>, psi: &mut Vec<Color>) -> usize {
        let root = psi.len();
        psi.push(self.color[t as usize]);
        for &k in &self.kids[t as usize] {
            let c = self.expand(k, edges, psi);
            edges.push((root, c));
        }
        root
    }
}

/// `NSL_r(m, Δ)`: every `r`-view (set delivery) realizable at a node of a
/// properly `m`-colored tree of maximum degree `Δ`, with an edge for every pair
/// of views realized at adjacent nodes.
///
/// Two children of one node whose subtrees are identical have identical views,
/// and dropping one of them changes no view; so it suffices to enumerate trees
/// whose sibling subtrees are pairwise distinct.
pub fn build_nsl(r: u32, m: u32, delta: usize, limits: BuildLimits) -> Result<NbhdGraph> {
    if m < 1 || delta < 1 {
        return Err(NbhdError::Invalid(format!("NSL needs m >= 1 and delta >= 1, got m = {m}, delta = {delta}")));
    }
    if r == 0 {
        return Ok(level_zero(Family::Nsl, m, delta, Delivery::Set));
    }
    let below = Arc::new(build_nsl(r - 1, m, delta, limits)?);
    let mut arena = TreeArena { color: Vec::new(), kids: Vec::new() };
    let colors: Vec<Color> = (1..=m).collect();
    // hanging[c]: subtrees of height <= k hanging below a parent, root color c,
    // at most Δ-1 children
    let mut hanging: Vec<Vec<u32>> = colors.iter().map(|&c| vec![arena.add(c, Vec::new())]).collect();
    let pool = |hanging: &Vec<Vec<u32>>, c: Color| -> Vec<usize> {
        colors
            .iter()
            .filter(|&&o| o != c)
            .flat_map(|&o| hanging[o as usize - 1].iter().map(|&t| t as usize))
            .collect()
    };
    for _ in 1..r {
        let mut next = Vec::with_capacity(m as usize);
        let mut projected = 0u128;
        for &c in &colors {
            projected = projected.saturating_add(count_subsets(pool(&hanging, c).len(), delta - 1));
        }
        guard(Family::Nsl, r, projected, limits)?;
        for &c in &colors {
            let items = pool(&hanging, c);
            let mut trees = Vec::new();
            for_each_subset(&items, delta - 1, &mut |s| trees.push(s.iter().map(|&t| t as u32).collect::<Vec<_>>()));
            next.push(trees.into_iter().map(|kids| arena.add(c, kids)).collect::<Vec<_>>());
        }
        hanging = next;
    }
    let view_of = |arena: &TreeArena, root_color: Color, kids: &[u32], extra: Option<&[u32]>| -> (View, Option<View>) {
        let mut edges = Vec::new();
        let mut psi = vec![root_color];
        for &k in kids {
            let c = arena.expand(k, &mut edges, &mut psi);
            edges.push((0, c));
        }
        let mut other = None;
        if let Some(ext) = extra {
            let c = arena.expand(ext[0], &mut edges, &mut psi);
            edges.push((0, c));
            other = Some(c);
        }
        let n = psi.len();
        let g = ColoredGraph::from_edges(n, &edges, psi, m, n).expect("set-trees are properly colored");
        let v = extract_view(&g, 0, r, Delivery::Set);
        (v, other.map(|o| extract_view(&g, o, r, Delivery::Set)))
    };

    let mut projected = 0u128;
    for &c in &colors {
        projected = projected.saturating_add(count_subsets(pool(&hanging, c).len(), delta));
    }
    guard(Family::Nsl, r, projected, limits)?;
    let mut views: HashMap<View, ()> = HashMap::new();
    for &c in &colors {
        let items = pool(&hanging, c);
        for_each_subset(&items, delta, &mut |s| {
            let kids: Vec<u32> = s.iter().map(|&t| t as u32).collect();
            views.insert(view_of(&arena, c, &kids, None).0, ());
        });
    }
    // adjacent pairs: u with hanging subtree U (height <= r, <= Δ-1 children)
    // next to v with hanging subtree V
    let mut tall: Vec<Vec<u32>> = Vec::with_capacity(m as usize);
    let mut projected = 0u128;
    for &c in &colors {
        projected = projected.saturating_add(count_subsets(pool(&hanging, c).len(), delta - 1));
    }
    guard(Family::Nsl, r, projected, limits)?;
    for &c in &colors {
        let items = pool(&hanging, c);
        let mut trees = Vec::new();
        for_each_subset(&items, delta - 1, &mut |s| trees.push(s.iter().map(|&t| t as u32).collect::<Vec<_>>()));
        tall.push(trees.into_iter().map(|kids| arena.add(c, kids)).collect());
    }
    let mut edge_views: Vec<(View, View)> = Vec::new();
    for (ci, us) in tall.iter().enumerate() {
        for vs in &tall[ci + 1..] {
            for &u in us {
                let kids = arena.kids[u as usize].clone();
                for &v in vs {
                    let (a, b) = view_of(&arena, colors[ci], &kids, Some(&[v]));
                    edge_views.push((a, b.expect("joined tree has a partner")));
                }
            }
        }
    }
    let mut vertices: Vec<View> = views.into_keys().collect();
    vertices.sort();
    let index: HashMap<View, usize> = vertices.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
    let mut adjacency = vec![Vec::new(); vertices.len()];
    for (a, b) in edge_views {
        let (i, j) = (index[&a], index[&b]);
        adjacency[i].push(j);
        adjacency[j].push(i);
    }
    for list in &mut adjacency {
        list.sort_unstable();
        list.dedup();
    }
    let parts = vertices
        .iter()
        .map(|v| {
            let center = below.index_of(v.inner().expect("level >= 1")).expect("inner views are realizable");
            let members = v.child_views().map(|c| below.index_of(c).expect("child views are realizable")).collect();
            Pair::new(center, members)
        })
        .collect();
    Ok(NbhdGraph { family: Family::Nsl, m, bound: delta, level: r, kind: Delivery::Set, vertices, index, parts, adjacency, below: Some(below) })
}

/// A vertex map between two neighborhood graphs. `verified` is set only by
/// [`verify_homomorphism`] with an empty report.
pub struct HomMap {
    pub name: String,
    pub domain: Arc<NbhdGraph>,
    pub codomain: Arc<NbhdGraph>,
    pub images: Vec<View>,
    verified: bool,
}

impl HomMap {
    pub fn new(name: impl Into<String>, domain: Arc<NbhdGraph>, codomain: Arc<NbhdGraph>, images: Vec<View>) -> Self {
        Self { name: name.into(), domain, codomain, images, verified: false }
    }

    pub fn verified(&self) -> bool {
        self.verified
    }

    pub fn image_index(&self, v: usize) -> Option<usize> {
        self.codomain.index_of(&self.images[v])
    }

    /// Codomain indices of all images, or `None` if some image is missing.
    pub fn image_indices(&self) -> Option<Vec<usize>> {
        (0..self.images.len()).map(|v| self.image_index(v)).collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct HomReport {
    pub checked_vertices: usize,
    pub checked_edges: usize,
    /// Domain vertices whose image is not a codomain vertex.
    pub missing: Vec<usize>,
    /// Domain edges whose images do not form a codomain edge.
    pub broken_edges: Vec<(usize, usize)>,
}

impl HomReport {
    pub fn is_empty(&self) -> bool {
        self.missing.is_empty() && self.broken_edges.is_empty()
    }
}

pub fn verify_homomorphism(map: &mut HomMap) -> HomReport {
    let mut report = HomReport { checked_vertices: map.images.len(), ..Default::default() };
    if map.images.len() != map.domain.node_count() {
        report.missing = (map.images.len()..map.domain.node_count()).collect();
    }
    let idx: Vec<Option<usize>> = (0..map.images.len()).map(|v| map.image_index(v)).collect();
    report.missing.extend(idx.iter().enumerate().filter(|(_, i)| i.is_none()).map(|(v, _)| v));
    report.missing.sort_unstable();
    for (u, v) in map.domain.edges() {
        report.checked_edges += 1;
        let ok = match (idx.get(u).copied().flatten(), idx.get(v).copied().flatten()) {
            (Some(a), Some(b)) => map.codomain.has_edge(a, b),
            _ => false,
        };
        if !ok {
            report.broken_edges.push((u, v));
        }
    }
    map.verified = report.is_empty();
    report
}

fn finish(mut map: HomMap) -> Result<HomMap> {
    let report = verify_homomorphism(&mut map);
    if !report.is_empty() {
        return Err(NbhdError::HomFailed { name: map.name, missing: report.missing.len(), broken: report.broken_edges.len() });
    }
    Ok(map)
}

/// `h_r: Ñ_r(m, D) → NSL_r(m, D)`, `h_0 = id`,
/// `h_{i+1}((x, A)) = (h_i(x), {h_i(a) : a ∈ A})`.
pub fn hom_h(r: u32, m: u32, d: usize, limits: BuildLimits) -> Result<HomMap> {
    let domain = Arc::new(build_ntilde(r, m, d, limits)?);
    let codomain = Arc::new(build_nsl(r, m, d, limits)?);
    let mut images: Vec<View> = (1..=m).map(|c| View::leaf(Delivery::Set, c)).collect();
    for i in 1..=r {
        let g = domain.level_graph(i).expect("chain is complete");
        images = g
            .parts()
            .iter()
            .map(|p| {
                let kids = p.members.iter().map(|&a| images[a].clone());
                View::node(Delivery::Set, images[p.center].clone(), kids).expect("images share a level")
            })
            .collect();
    }
    finish(HomMap::new(format!("h_{r}(m={m}, D={d})"), domain, codomain, images))
}

/// `f_r: NT_r(m, D) → Ñ_r(m, (r+1)D)`, `f_0 = id`,
/// `f_{i+1}((x, A)) = (f_i(x), {f_i(a) : a ∈ A} ∪ A')` where `A'` holds, for
/// each type of `f_i(x)` not yet met, the canonically smallest neighbor of
/// `f_i(x)` in `Ñ_i(m, (i+1)D)` with that center.
pub fn hom_f(r: u32, m: u32, d: usize, limits: BuildLimits) -> Result<HomMap> {
    let domain = Arc::new(build_nt(r, m, d, limits)?);
    let codomain = Arc::new(build_ntilde(r, m, (r as usize + 1) * d, limits)?);
    let mut images: Vec<View> = (1..=m).map(|c| View::leaf(Delivery::Set, c)).collect();
    for i in 1..=r {
        // images so far live in Ñ_{i-1}(m, i*D)
        let host = build_ntilde(i - 1, m, i as usize * d, limits)?;
        let g = domain.level_graph(i).expect("chain is complete");
        let mut next = Vec::with_capacity(g.node_count());
        for p in g.parts() {
            let fx = &images[p.center];
            let mut kids: Vec<View> = p.members.iter().map(|&a| images[a].clone()).collect();
            let met = centers_of(kids.iter());
            let hx = host
                .index_of(fx)
                .ok_or_else(|| NbhdError::FillUp(format!("{fx} is not a vertex of the host")))?;
            for t in types(fx) {
                if met.binary_search(&t).is_ok() {
                    continue;
                }
                let pick = host
                    .neighbors(hx)
                    .iter()
                    .map(|&w| host.vertex(w))
                    .find(|w| center(w) == t)
                    .ok_or_else(|| NbhdError::FillUp(format!("no neighbor of {fx} has center {t:?}")))?;
                kids.push(pick.clone());
            }
            let view = View::node(Delivery::Set, fx.clone(), kids).expect("images share a level");
            if view.child_total() as usize > (i as usize + 1) * d {
                return Err(NbhdError::FillUp(format!("{view} has more than {} neighbors", (i as usize + 1) * d)));
            }
            next.push(view);
        }
        images = next;
    }
    finish(HomMap::new(format!("f_{r}(m={m}, D={d})"), domain, codomain, images))
}
