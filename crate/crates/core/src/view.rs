//! Recursive `r`-round views and their canonical byte encoding.
//!
//! A 0-view is a color. An `(r+1)`-view is the pair of the node's own `r`-view and
//! the collection of its neighbors' `r`-views. Under [`Delivery::Set`] equal child
//! views collapse; under [`Delivery::Multiset`] they carry a multiplicity.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::graph::{Adjacency, Color, ColoredGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Delivery {
    Set,
    Multiset,
}

impl Delivery {
    fn tag(self) -> u8 {
        match self {
            Delivery::Set => b'S',
            Delivery::Multiset => b'M',
        }
    }

    fn from_tag(t: u8) -> Option<Self> {
        match t {
            b'S' => Some(Delivery::Set),
            b'M' => Some(Delivery::Multiset),
            _ => None,
        }
    }
}

impl fmt::Display for Delivery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Delivery::Set => "set",
            Delivery::Multiset => "multiset",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ViewError {
    #[error("cannot truncate a depth-{depth} view to depth {target}")]
    TruncateTooDeep { depth: u32, target: u32 },
    #[error("child of depth {child} under a view of depth {parent}")]
    DepthMismatch { parent: u32, child: u32 },
    #[error("mixed delivery kinds in one view")]
    KindMismatch,
    #[error("zero multiplicity")]
    ZeroCount,
    #[error("multiplicity > 1 in a set view")]
    SetMultiplicity,
    #[error("malformed encoding at byte {0}")]
    Malformed(usize),
    #[error("children are not in canonical order at byte {0}")]
    NonCanonical(usize),
    #[error("trailing bytes after view encoding")]
    Trailing,
    #[error("invalid view JSON: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, ViewError>;

struct ViewNode {
    kind: Delivery,
    depth: u32,
    base: Color,
    inner: Option<View>,
    children: Vec<(View, u32)>,
    enc: Box<[u8]>,
}

/// An immutable, cheaply clonable view. Equality, hashing and ordering use the
/// canonical encoding.
#[derive(Clone)]
pub struct View(Arc<ViewNode>);

impl View {
    pub fn leaf(kind: Delivery, color: Color) -> View {
        let mut enc = Vec::with_capacity(6);
        enc.extend_from_slice(&[kind.tag(), 0]);
        enc.extend_from_slice(&color.to_be_bytes());
        View(Arc::new(ViewNode {
            kind,
            depth: 0,
            base: color,
            inner: None,
            children: Vec::new(),
            enc: enc.into_boxed_slice(),
        }))
    }

    /// Builds `(inner, children)`. Under `Set` duplicates collapse; under
    /// `Multiset` each occurrence counts once.
    pub fn node(kind: Delivery, inner: View, children: impl IntoIterator<Item = View>) -> Result<View> {
        Self::node_counted(kind, inner, children.into_iter().map(|c| (c, 1)), true)
    }

    /// Builds `(inner, children)` from `(child, multiplicity)` pairs. With
    /// `merge = true` repeated children are merged (counts add up under
    /// `Multiset`, collapse under `Set`); otherwise repeats are an error.
    pub fn node_counted(
        kind: Delivery,
        inner: View,
        children: impl IntoIterator<Item = (View, u32)>,
        merge: bool,
    ) -> Result<View> {
        if inner.kind() != kind {
            return Err(ViewError::KindMismatch);
        }
        let depth = inner.depth() + 1;
        let mut list: Vec<(View, u32)> = Vec::new();
        for (c, k) in children {
            if c.kind() != kind {
                return Err(ViewError::KindMismatch);
            }
            if c.depth() + 1 != depth {
                return Err(ViewError::DepthMismatch { parent: depth, child: c.depth() });
            }
            if k == 0 {
                return Err(ViewError::ZeroCount);
            }
            if kind == Delivery::Set && k != 1 && !merge {
                return Err(ViewError::SetMultiplicity);
            }
            list.push((c, k));
        }
        list.sort_by(|a, b| a.0.encoding().cmp(b.0.encoding()));
        let mut merged: Vec<(View, u32)> = Vec::with_capacity(list.len());
        for (c, k) in list {
            match merged.last_mut() {
                Some(last) if last.0 == c => {
                    if !merge {
                        return Err(ViewError::NonCanonical(0));
                    }
                    if kind == Delivery::Multiset {
                        last.1 += k;
                    }
                }
                _ => merged.push((c, if kind == Delivery::Set { 1 } else { k })),
            }
        }
        Ok(Self::assemble(kind, inner, merged))
    }

    fn assemble(kind: Delivery, inner: View, children: Vec<(View, u32)>) -> View {
        let len = 2
            + inner.encoding().len()
            + 4
            + children
                .iter()
                .map(|(c, _)| c.encoding().len() + if kind == Delivery::Multiset { 4 } else { 0 })
                .sum::<usize>();
        let mut enc = Vec::with_capacity(len);
        enc.extend_from_slice(&[kind.tag(), 1]);
        enc.extend_from_slice(inner.encoding());
        enc.extend_from_slice(&(children.len() as u32).to_be_bytes());
        for (c, k) in &children {
            enc.extend_from_slice(c.encoding());
            if kind == Delivery::Multiset {
                enc.extend_from_slice(&k.to_be_bytes());
            }
        }
        View(Arc::new(ViewNode {
            kind,
            depth: inner.depth() + 1,
            base: inner.base_color(),
            inner: Some(inner),
            children,
            enc: enc.into_boxed_slice(),
        }))
    }

    pub fn kind(&self) -> Delivery {
        self.0.kind
    }

    pub fn depth(&self) -> u32 {
        self.0.depth
    }

    /// The node's own initial color (the 0-view at the bottom of the inner chain).
    pub fn base_color(&self) -> Color {
        self.0.base
    }

    pub fn inner(&self) -> Option<&View> {
        self.0.inner.as_ref()
    }

    /// Children in canonical order with multiplicities (always 1 under `Set`).
    pub fn children(&self) -> &[(View, u32)] {
        &self.0.children
    }

    pub fn child_views(&self) -> impl Iterator<Item = &View> {
        self.0.children.iter().map(|(c, _)| c)
    }

    /// Number of children counted with multiplicity.
    pub fn child_total(&self) -> u64 {
        self.0.children.iter().map(|&(_, k)| k as u64).sum()
    }

    pub fn encoding(&self) -> &[u8] {
        &self.0.enc
    }

    pub fn encode(&self) -> Vec<u8> {
        self.0.enc.to_vec()
    }

    pub fn decode(bytes: &[u8]) -> Result<View> {
        let mut pos = 0;
        let v = decode_at(bytes, &mut pos, None)?;
        if pos != bytes.len() {
            return Err(ViewError::Trailing);
        }
        Ok(v)
    }

    /// The view of the same node after `r` rounds, `r <= depth`.
    pub fn truncate(&self, r: u32) -> Result<View> {
        if r > self.depth() {
            return Err(ViewError::TruncateTooDeep { depth: self.depth(), target: r });
        }
        let mut v = self;
        while v.depth() > r {
            v = v.inner().expect("depth > 0 has an inner view");
        }
        Ok(v.clone())
    }

    /// The `Set` view obtained by forgetting all multiplicities recursively.
    pub fn erase_multiplicities(&self) -> View {
        let mut memo = HashMap::new();
        self.erase_memo(&mut memo)
    }

    fn erase_memo(&self, memo: &mut HashMap<View, View>) -> View {
        if let Some(v) = memo.get(self) {
            return v.clone();
        }
        let out = match self.inner() {
            None => View::leaf(Delivery::Set, self.base_color()),
            Some(inner) => {
                let inner = inner.erase_memo(memo);
                let kids: Vec<View> = self.child_views().map(|c| c.erase_memo(memo)).collect();
                View::node(Delivery::Set, inner, kids).expect("erasure keeps depths consistent")
            }
        };
        memo.insert(self.clone(), out.clone());
        out
    }

    pub fn to_json(&self) -> Value {
        match self.inner() {
            None => Value::from(self.base_color()),
            Some(inner) => {
                let children: Vec<Value> = self
                    .children()
                    .iter()
                    .map(|(c, k)| match self.kind() {
                        Delivery::Set => c.to_json(),
                        Delivery::Multiset => Value::Array(vec![c.to_json(), Value::from(*k)]),
                    })
                    .collect();
                serde_json::json!({ "inner": inner.to_json(), "children": children })
            }
        }
    }

    pub fn from_json(kind: Delivery, value: &Value) -> Result<View> {
        match value {
            Value::Number(n) => {
                let c = n.as_u64().filter(|&c| c <= u32::MAX as u64).ok_or_else(|| ViewError::Json(format!("bad color {n}")))?;
                Ok(View::leaf(kind, c as Color))
            }
            Value::Object(map) => {
                let inner = map.get("inner").ok_or_else(|| ViewError::Json("missing \"inner\"".into()))?;
                let inner = View::from_json(kind, inner)?;
                let children = map
                    .get("children")
                    .and_then(Value::as_array)
                    .ok_or_else(|| ViewError::Json("missing \"children\" array".into()))?;
                let mut kids = Vec::with_capacity(children.len());
                for c in children {
                    match kind {
                        Delivery::Set => kids.push((View::from_json(kind, c)?, 1)),
                        Delivery::Multiset => {
                            let pair = c
                                .as_array()
                                .filter(|p| p.len() == 2)
                                .ok_or_else(|| ViewError::Json("multiset child must be [view, count]".into()))?;
                            let k = pair[1]
                                .as_u64()
                                .filter(|&k| k <= u32::MAX as u64)
                                .ok_or_else(|| ViewError::Json("bad multiplicity".into()))?;
                            kids.push((View::from_json(kind, &pair[0])?, k as u32));
                        }
                    }
                }
                View::node_counted(kind, inner, kids, false)
            }
            other => Err(ViewError::Json(format!("unexpected {other}"))),
        }
    }
}

fn read_u32(bytes: &[u8], pos: &mut usize) -> Result<u32> {
    let end = *pos + 4;
    let chunk = bytes.get(*pos..end).ok_or(ViewError::Malformed(*pos))?;
    *pos = end;
    Ok(u32::from_be_bytes(chunk.try_into().expect("4 bytes")))
}

fn decode_at(bytes: &[u8], pos: &mut usize, expect: Option<Delivery>) -> Result<View> {
    let start = *pos;
    let head = bytes.get(*pos..*pos + 2).ok_or(ViewError::Malformed(start))?;
    let kind = Delivery::from_tag(head[0]).ok_or(ViewError::Malformed(start))?;
    if expect.is_some_and(|k| k != kind) {
        return Err(ViewError::KindMismatch);
    }
    *pos += 2;
    match head[1] {
        0 => Ok(View::leaf(kind, read_u32(bytes, pos)?)),
        1 => {
            let inner = decode_at(bytes, pos, Some(kind))?;
            let count = read_u32(bytes, pos)? as usize;
            let mut children: Vec<(View, u32)> = Vec::with_capacity(count.min(1 << 16));
            for _ in 0..count {
                let at = *pos;
                let c = decode_at(bytes, pos, Some(kind))?;
                if c.depth() != inner.depth() {
                    return Err(ViewError::DepthMismatch { parent: inner.depth() + 1, child: c.depth() });
                }
                if let Some((prev, _)) = children.last() {
                    if prev.encoding() >= c.encoding() {
                        return Err(ViewError::NonCanonical(at));
                    }
                }
                let k = match kind {
                    Delivery::Set => 1,
                    Delivery::Multiset => read_u32(bytes, pos)?,
                };
                if k == 0 {
                    return Err(ViewError::ZeroCount);
                }
                children.push((c, k));
            }
            Ok(View::assemble(kind, inner, children))
        }
        _ => Err(ViewError::Malformed(start + 1)),
    }
}

impl PartialEq for View {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.enc == other.0.enc
    }
}

impl Eq for View {}

impl std::hash::Hash for View {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.enc.hash(state)
    }
}

impl PartialOrd for View {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for View {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.enc.cmp(&other.0.enc)
    }
}

/// Renders `(own, {children})`, e.g. `(2,{1,3})`; multiset children repeat.
impl fmt::Display for View {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.inner() {
            None => write!(f, "{}", self.base_color()),
            Some(inner) => {
                write!(f, "({inner},{{")?;
                let mut first = true;
                for (c, k) in self.children() {
                    for _ in 0..*k {
                        if !first {
                            f.write_str(",")?;
                        }
                        first = false;
                        write!(f, "{c}")?;
                    }
                }
                f.write_str("})")
            }
        }
    }
}

impl fmt::Debug for View {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "View[{}]{}", self.kind(), self)
    }
}

/// Views of every node after `r` rounds.
pub fn extract_all<G: Adjacency + ?Sized>(g: &G, psi: &[Color], r: u32, kind: Delivery) -> Vec<View> {
    let mut cur: Vec<View> = psi.iter().map(|&c| View::leaf(kind, c)).collect();
    for _ in 0..r {
        cur = (0..g.node_count())
            .map(|v| {
                let kids = g.neighbors(v).iter().map(|&u| cur[u].clone());
                View::node(kind, cur[v].clone(), kids).expect("levels are built uniformly")
            })
            .collect();
    }
    cur
}

/// The `r`-view of node `v`. Only the radius-`r` ball around `v` is evaluated.
pub fn extract_view(g: &ColoredGraph, v: usize, r: u32, kind: Delivery) -> View {
    let n = g.n();
    let mut dist = vec![u32::MAX; n];
    let mut order = vec![v];
    dist[v] = 0;
    let mut head = 0;
    while head < order.len() {
        let u = order[head];
        head += 1;
        if dist[u] == r {
            continue;
        }
        for &w in g.neighbors(u) {
            if dist[w] == u32::MAX {
                dist[w] = dist[u] + 1;
                order.push(w);
            }
        }
    }
    // views at level k are needed for nodes with dist <= r - k
    let mut cur: HashMap<usize, View> = order.iter().map(|&u| (u, View::leaf(kind, g.psi()[u]))).collect();
    for k in 1..=r {
        let mut next = HashMap::new();
        for &u in order.iter().filter(|&&u| dist[u] <= r - k) {
            let kids = g.neighbors(u).iter().map(|w| cur[w].clone());
            next.insert(u, View::node(kind, cur[&u].clone(), kids).expect("levels are built uniformly"));
        }
        cur = next;
    }
    cur.remove(&v).expect("root is always present")
}

/// Interned key of a view: id of its inner view and `(child id, count)` pairs.
type InternKey = (u32, Vec<(u32, u32)>);

/// Hash-consing of views level by level: two nodes get the same id at level `r`
/// iff their `r`-views are equal, without materializing the (exponentially
/// large) views themselves.
#[derive(Debug, Default, Clone)]
pub struct ViewInterner {
    kind: Option<Delivery>,
    levels: Vec<HashMap<InternKey, u32>>,
    leaves: HashMap<Color, u32>,
}

impl ViewInterner {
    pub fn new(kind: Delivery) -> Self {
        Self { kind: Some(kind), ..Default::default() }
    }

    pub fn kind(&self) -> Delivery {
        self.kind.unwrap_or(Delivery::Set)
    }

    /// Ids of every node's `r`-view in `g`.
    pub fn ids<G: Adjacency + ?Sized>(&mut self, g: &G, psi: &[Color], r: u32) -> Vec<u32> {
        let mut cur: Vec<u32> = psi
            .iter()
            .map(|&c| {
                let next = self.leaves.len() as u32;
                *self.leaves.entry(c).or_insert(next)
            })
            .collect();
        let kind = self.kind();
        for level in 0..r as usize {
            if self.levels.len() <= level {
                self.levels.push(HashMap::new());
            }
            let table = &mut self.levels[level];
            let mut next = Vec::with_capacity(cur.len());
            for v in 0..g.node_count() {
                let mut kids: Vec<u32> = g.neighbors(v).iter().map(|&u| cur[u]).collect();
                kids.sort_unstable();
                let mut counted: Vec<(u32, u32)> = Vec::with_capacity(kids.len());
                for k in kids {
                    match counted.last_mut() {
                        Some(last) if last.0 == k => {
                            if kind == Delivery::Multiset {
                                last.1 += 1
                            }
                        }
                        _ => counted.push((k, 1)),
                    }
                }
                let fresh = table.len() as u32;
                next.push(*table.entry((cur[v], counted)).or_insert(fresh));
            }
            cur = next;
        }
        cur
    }

    /// Number of distinct views seen at level `r`.
    pub fn distinct(&self, r: u32) -> usize {
        if r == 0 {
            self.leaves.len()
        } else {
            self.levels.get(r as usize - 1).map_or(0, HashMap::len)
        }
    }
}
