//! Graphs with an initial coloring, color assignments, validators and seeded
//! instance generators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Colors are 1-based.
pub type Color = u32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("node {node} out of range (n = {n})")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {{{0}, {1}}}")]
    DuplicateEdge(usize, usize),
    #[error("adjacency is not symmetric: {0} lists {1} but not vice versa")]
    Asymmetric(usize, usize),
    #[error("node {node} has degree {degree} > cap {cap}")]
    DegreeExceeded { node: usize, degree: usize, cap: usize },
    #[error("initial color {color} of node {node} is outside [1, {m}]")]
    ColorOutOfRange { node: usize, color: Color, m: u32 },
    #[error("initial coloring is not proper: edge {{{u}, {v}}} has color {color} twice")]
    ImproperInitial { u: usize, v: usize, color: Color },
    #[error("expected {expected} entries, got {got}")]
    CoverageMismatch { expected: usize, got: usize },
    #[error("node {node} has color {color} outside the declared palette [1, {palette}]")]
    PaletteMismatch { node: usize, color: Color, palette: u32 },
    #[error("infeasible parameters: {0}")]
    Infeasible(String),
}

pub type Result<T> = std::result::Result<T, GraphError>;

/// Read-only adjacency access shared by every graph type in the crate.
pub trait Adjacency {
    fn node_count(&self) -> usize;
    /// Sorted, duplicate-free neighbor list.
    fn neighbors(&self, v: usize) -> &[usize];

    fn degree(&self, v: usize) -> usize {
        self.neighbors(v).len()
    }

    fn max_degree(&self) -> usize {
        (0..self.node_count()).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    fn edge_count(&self) -> usize {
        (0..self.node_count()).map(|v| self.degree(v)).sum::<usize>() / 2
    }

    fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`, in lexicographic order.
    fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for u in 0..self.node_count() {
            for &v in self.neighbors(u) {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }
}

fn build_adjacency(n: usize, edges: &[(usize, usize)]) -> Result<Vec<Vec<usize>>> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        for w in [u, v] {
            if w >= n {
                return Err(GraphError::NodeOutOfRange { node: w, n });
            }
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        adj[u].push(v);
        adj[v].push(u);
    }
    for (u, list) in adj.iter_mut().enumerate() {
        list.sort_unstable();
        if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
            return Err(GraphError::DuplicateEdge(u.min(w[0]), u.max(w[0])));
        }
    }
    Ok(adj)
}

fn check_adjacency(adj: &[Vec<usize>]) -> Result<()> {
    let n = adj.len();
    for (u, list) in adj.iter().enumerate() {
        for (i, &v) in list.iter().enumerate() {
            if v >= n {
                return Err(GraphError::NodeOutOfRange { node: v, n });
            }
            if v == u {
                return Err(GraphError::SelfLoop(u));
            }
            if i > 0 && list[i - 1] >= v {
                return Err(GraphError::DuplicateEdge(u.min(v), u.max(v)));
            }
            if adj[v].binary_search(&u).is_err() {
                return Err(GraphError::Asymmetric(u, v));
            }
        }
    }
    Ok(())
}

/// A plain undirected simple graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleGraph {
    adjacency: Vec<Vec<usize>>,
}

impl SimpleGraph {
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Ok(Self { adjacency: build_adjacency(n, edges)? })
    }

    /// Takes sorted per-node neighbor lists; symmetry and simplicity are checked.
    pub fn from_adjacency(adjacency: Vec<Vec<usize>>) -> Result<Self> {
        check_adjacency(&adjacency)?;
        Ok(Self { adjacency })
    }

    pub fn complete(n: usize) -> Self {
        let adjacency = (0..n).map(|u| (0..n).filter(|&v| v != u).collect()).collect();
        Self { adjacency }
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
        Self::from_edges(n, &edges).expect("path edges are valid")
    }

    pub fn cycle(n: usize) -> Self {
        let mut edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
        if n >= 3 {
            edges.push((0, n - 1));
        }
        Self::from_edges(n, &edges).expect("cycle edges are valid")
    }

    /// Copy of any adjacency structure.
    pub fn copy_of<G: Adjacency + ?Sized>(g: &G) -> Self {
        let adjacency = (0..g.node_count()).map(|v| g.neighbors(v).to_vec()).collect();
        Self { adjacency }
    }
}

impl Adjacency for SimpleGraph {
    fn node_count(&self) -> usize {
        self.adjacency.len()
    }
    fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }
}

/// A simple graph with a declared degree cap and a proper initial `m`-coloring `psi`.
/// Immutable once constructed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphWire", into = "GraphWire")]
pub struct ColoredGraph {
    adjacency: Vec<Vec<usize>>,
    psi: Vec<Color>,
    m: u32,
    delta_cap: usize,
}

impl ColoredGraph {
    pub fn from_edges(
        n: usize,
        edges: &[(usize, usize)],
        psi: Vec<Color>,
        m: u32,
        delta_cap: usize,
    ) -> Result<Self> {
        Self::new(build_adjacency(n, edges)?, psi, m, delta_cap)
    }

    pub fn new(adjacency: Vec<Vec<usize>>, psi: Vec<Color>, m: u32, delta_cap: usize) -> Result<Self> {
        check_adjacency(&adjacency)?;
        let n = adjacency.len();
        if psi.len() != n {
            return Err(GraphError::CoverageMismatch { expected: n, got: psi.len() });
        }
        for (v, list) in adjacency.iter().enumerate() {
            if list.len() > delta_cap {
                return Err(GraphError::DegreeExceeded { node: v, degree: list.len(), cap: delta_cap });
            }
            if psi[v] == 0 || psi[v] > m {
                return Err(GraphError::ColorOutOfRange { node: v, color: psi[v], m });
            }
        }
        for (u, list) in adjacency.iter().enumerate() {
            for &v in list {
                if u < v && psi[u] == psi[v] {
                    return Err(GraphError::ImproperInitial { u, v, color: psi[u] });
                }
            }
        }
        Ok(Self { adjacency, psi, m, delta_cap })
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn psi(&self) -> &[Color] {
        &self.psi
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn delta_cap(&self) -> usize {
        self.delta_cap
    }

    /// The initial coloring as an assignment with palette `m`.
    pub fn psi_assignment(&self) -> ColorAssignment {
        ColorAssignment { colors: self.psi.clone(), palette: self.m }
    }
}

impl Adjacency for ColoredGraph {
    fn node_count(&self) -> usize {
        self.adjacency.len()
    }
    fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }
}

#[derive(Serialize, Deserialize)]
struct GraphWire {
    n: usize,
    edges: Vec<[usize; 2]>,
    psi: Vec<Color>,
    m: u32,
    delta: usize,
}

impl TryFrom<GraphWire> for ColoredGraph {
    type Error = GraphError;
    fn try_from(w: GraphWire) -> Result<Self> {
        let edges: Vec<_> = w.edges.iter().map(|e| (e[0], e[1])).collect();
        ColoredGraph::from_edges(w.n, &edges, w.psi, w.m, w.delta)
    }
}

impl From<ColoredGraph> for GraphWire {
    fn from(g: ColoredGraph) -> Self {
        GraphWire {
            n: g.n(),
            edges: g.edges().into_iter().map(|(u, v)| [u, v]).collect(),
            psi: g.psi,
            m: g.m,
            delta: g.delta_cap,
        }
    }
}

/// Output colors per node and the palette bound they are claimed to respect.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColorAssignment {
    pub colors: Vec<Color>,
    pub palette: u32,
}

impl ColorAssignment {
    pub fn new(colors: Vec<Color>, palette: u32) -> Self {
        Self { colors, palette }
    }

    /// Number of distinct colors actually used.
    pub fn distinct_colors(&self) -> usize {
        let mut c = self.colors.clone();
        c.sort_unstable();
        c.dedup();
        c.len()
    }
}

fn check_coverage<G: Adjacency + ?Sized>(g: &G, phi: &ColorAssignment) -> Result<()> {
    if phi.colors.len() != g.node_count() {
        return Err(GraphError::CoverageMismatch { expected: g.node_count(), got: phi.colors.len() });
    }
    Ok(())
}

/// `Ok(true)` iff no edge is monochromatic. Colors outside `[1, palette]` are an
/// error rather than `Ok(false)`.
pub fn validate_proper<G: Adjacency + ?Sized>(g: &G, phi: &ColorAssignment) -> Result<bool> {
    check_coverage(g, phi)?;
    for (node, &color) in phi.colors.iter().enumerate() {
        if color == 0 || color > phi.palette {
            return Err(GraphError::PaletteMismatch { node, color, palette: phi.palette });
        }
    }
    Ok(first_monochromatic_edge(g, &phi.colors).is_none())
}

pub fn first_monochromatic_edge<G: Adjacency + ?Sized>(g: &G, colors: &[Color]) -> Option<(usize, usize)> {
    (0..g.node_count()).find_map(|u| {
        g.neighbors(u).iter().find(|&&v| u < v && colors[u] == colors[v]).map(|&v| (u, v))
    })
}

/// `Ok(true)` iff every color class induces a subgraph of maximum degree at most `d`.
pub fn validate_defective<G: Adjacency + ?Sized>(g: &G, phi: &ColorAssignment, d: usize) -> Result<bool> {
    check_coverage(g, phi)?;
    Ok((0..g.node_count()).all(|u| {
        g.neighbors(u).iter().filter(|&&v| phi.colors[v] == phi.colors[u]).count() <= d
    }))
}

/// Random tree on `n` nodes with maximum degree at most `delta_cap` and a proper
/// coloring drawn from `[1, m]`. Identical arguments give identical graphs on
/// every platform.
pub fn random_colored_tree(n: usize, delta_cap: usize, m: u32, seed: u64) -> Result<ColoredGraph> {
    if n == 0 {
        return Err(GraphError::Infeasible("n must be at least 1".into()));
    }
    if delta_cap < 2 {
        return Err(GraphError::Infeasible(format!("delta_cap = {delta_cap} < 2")));
    }
    if m == 0 || (n >= 2 && m < 2) {
        return Err(GraphError::Infeasible(format!("m = {m} colors cannot properly color a tree on {n} nodes")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut adjacency = vec![Vec::new(); n];
    let mut psi = vec![0; n];
    psi[0] = rng.gen_range(1..=m as u64) as Color;
    // nodes that can still take a child
    let mut open = vec![0usize];
    for v in 1..n {
        let slot = rng.gen_range(0..open.len() as u64) as usize;
        let parent = open[slot];
        adjacency[parent].push(v);
        adjacency[v].push(parent);
        if adjacency[parent].len() == delta_cap {
            open.swap_remove(slot);
        }
        let k = rng.gen_range(1..m as u64) as Color;
        psi[v] = if k >= psi[parent] { k + 1 } else { k };
        open.push(v);
    }
    for list in &mut adjacency {
        list.sort_unstable();
    }
    ColoredGraph::new(adjacency, psi, m, delta_cap)
}

/// Sequential greedy coloring in node order; each node takes the smallest color
/// not used by an earlier neighbor.
pub fn greedy_coloring<G: Adjacency + ?Sized>(g: &G) -> ColorAssignment {
    let n = g.node_count();
    let mut colors = vec![0 as Color; n];
    let mut used = Vec::new();
    for v in 0..n {
        used.clear();
        used.resize(g.degree(v) + 2, false);
        for &u in g.neighbors(v) {
            let c = colors[u] as usize;
            if c != 0 && c < used.len() {
                used[c] = true;
            }
        }
        colors[v] = (1..used.len()).find(|&c| !used[c]).unwrap_or(used.len()) as Color;
    }
    let palette = colors.iter().copied().max().unwrap_or(1).max(1);
    ColorAssignment { colors, palette }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> SimpleGraph {
        SimpleGraph::path(3)
    }

    #[test]
    fn proper_examples() {
        assert!(validate_proper(&path3(), &ColorAssignment::new(vec![1, 2, 1], 2)).unwrap());
        let tri = SimpleGraph::complete(3);
        assert!(!validate_proper(&tri, &ColorAssignment::new(vec![1, 2, 1], 2)).unwrap());
        let star = SimpleGraph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        assert!(validate_proper(&star, &ColorAssignment::new(vec![1, 2, 2, 2, 2], 2)).unwrap());
    }

    #[test]
    fn palette_mismatch_is_an_error_not_improper() {
        let err = validate_proper(&path3(), &ColorAssignment::new(vec![1, 3, 1], 2)).unwrap_err();
        assert!(matches!(err, GraphError::PaletteMismatch { node: 1, color: 3, palette: 2 }));
        let err = validate_proper(&path3(), &ColorAssignment::new(vec![1, 2], 2)).unwrap_err();
        assert!(matches!(err, GraphError::CoverageMismatch { .. }));
    }

    #[test]
    fn defective_examples() {
        assert!(validate_defective(&path3(), &ColorAssignment::new(vec![1, 1, 1], 1), 2).unwrap());
        let star = SimpleGraph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        assert!(!validate_defective(&star, &ColorAssignment::new(vec![1; 5], 1), 3).unwrap());
    }

    #[test]
    fn constructor_rejects_bad_input() {
        assert!(matches!(
            ColoredGraph::from_edges(2, &[(0, 1)], vec![1, 1], 2, 2),
            Err(GraphError::ImproperInitial { .. })
        ));
        assert!(matches!(
            ColoredGraph::from_edges(2, &[(0, 1)], vec![1, 3], 2, 2),
            Err(GraphError::ColorOutOfRange { .. })
        ));
        assert!(matches!(
            ColoredGraph::from_edges(3, &[(0, 1), (0, 2)], vec![1, 2, 2], 2, 1),
            Err(GraphError::DegreeExceeded { .. })
        ));
        assert!(matches!(
            ColoredGraph::from_edges(2, &[(0, 1), (1, 0)], vec![1, 2], 2, 2),
            Err(GraphError::DuplicateEdge(0, 1))
        ));
        assert!(matches!(SimpleGraph::from_adjacency(vec![vec![1], vec![]]), Err(GraphError::Asymmetric(0, 1))));
    }

    #[test]
    fn random_tree_small_cases() {
        let g = random_colored_tree(1, 2, 3, 99).unwrap();
        assert_eq!(g.n(), 1);
        assert!((1..=3).contains(&g.psi()[0]));

        for seed in 0..20 {
            let g = random_colored_tree(5, 2, 3, seed).unwrap();
            assert_eq!(g.edge_count(), 4);
            assert!(g.max_degree() <= 2);
            // a tree with max degree 2 is a path: exactly two leaves
            assert_eq!((0..5).filter(|&v| g.degree(v) == 1).count(), 2);
            assert!(validate_proper(&g, &g.psi_assignment()).unwrap());
        }
        assert_eq!(random_colored_tree(40, 3, 4, 7).unwrap(), random_colored_tree(40, 3, 4, 7).unwrap());
        assert!(random_colored_tree(2, 2, 1, 0).is_err());
        assert!(random_colored_tree(0, 2, 3, 0).is_err());
        assert!(random_colored_tree(3, 1, 3, 0).is_err());
    }

    #[test]
    fn greedy_examples() {
        let tri = SimpleGraph::complete(3);
        let a = greedy_coloring(&tri);
        assert_eq!(a.distinct_colors(), 3);
        let p = SimpleGraph::path(4);
        let a = greedy_coloring(&p);
        assert!(a.palette <= 3);
        assert!(validate_proper(&p, &a).unwrap());
    }

    #[test]
    fn json_round_trip_uses_zero_based_edges() {
        let g = ColoredGraph::from_edges(3, &[(0, 1), (1, 2)], vec![1, 2, 3], 3, 2).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"n":3,"edges":[[0,1],[1,2]],"psi":[1,2,3],"m":3,"delta":2}"#);
        let back: ColoredGraph = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<ColoredGraph>(r#"{"n":2,"edges":[[0,1]],"psi":[1,1],"m":2,"delta":1}"#).is_err());
        let a = ColorAssignment::new(vec![1, 2], 2);
        assert_eq!(serde_json::to_string(&a).unwrap(), r#"{"colors":[1,2],"palette":2}"#);
    }
}
