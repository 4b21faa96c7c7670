//! Chromatic numbers of desk-scale graphs: a greedy clique for lower bounds,
//! DSATUR for upper bounds, a budgeted exact search, and DIMACS `col` files
//! for handing larger instances to external solvers.

use std::io::{self, BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::json;

use crate::graph::{first_monochromatic_edge, Adjacency, Color, SimpleGraph};
use crate::nbhd::NbhdGraph;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Colorability {
    /// A proper coloring with colors in `1..=k`.
    Yes(Vec<Color>),
    No,
    /// The node budget ran out first.
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChiResult {
    pub lower: usize,
    pub upper: usize,
    pub exact: bool,
    /// A proper coloring using `upper` colors.
    pub witness: Option<Vec<Color>>,
    pub clique: Vec<usize>,
    pub expansions: u64,
    pub budget: u64,
    /// Wall time; left out of serialized output so artifacts are reproducible.
    #[serde(skip)]
    pub elapsed_ms: u128,
}

/// A large clique found greedily from every start vertex; ties go to the
/// lower index.
pub fn greedy_clique<G: Adjacency + ?Sized>(g: &G) -> Vec<usize> {
    let n = g.node_count();
    let mut best: Vec<usize> = Vec::new();
    let mut mark = vec![0u32; n];
    let mut stamp = 0u32;
    for start in 0..n {
        if g.degree(start) < best.len() {
            continue;
        }
        let mut clique = vec![start];
        let mut cand: Vec<usize> = g.neighbors(start).to_vec();
        while !cand.is_empty() {
            // candidate with most neighbors inside the candidate set
            stamp += 1;
            for &c in &cand {
                mark[c] = stamp;
            }
            let pick = *cand
                .iter()
                .max_by_key(|&&c| (g.neighbors(c).iter().filter(|&&w| mark[w] == stamp).count(), std::cmp::Reverse(c)))
                .unwrap();
            clique.push(pick);
            let nb = g.neighbors(pick);
            cand.retain(|&c| c != pick && nb.binary_search(&c).is_ok());
        }
        if clique.len() > best.len() {
            best = clique;
        }
    }
    best.sort_unstable();
    best
}

/// DSATUR: colors (1-based) assigned in order of saturation, then degree,
/// then index.
pub fn dsatur<G: Adjacency + ?Sized>(g: &G) -> Vec<Color> {
    let n = g.node_count();
    let mut colors = vec![0 as Color; n];
    let mut seen: Vec<Vec<bool>> = vec![Vec::new(); n];
    let mut sat = vec![0usize; n];
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| colors[v] == 0)
            .max_by_key(|&v| (sat[v], g.degree(v), std::cmp::Reverse(v)))
            .unwrap();
        let c = (1..).find(|&c: &usize| !seen[v].get(c).copied().unwrap_or(false)).unwrap();
        colors[v] = c as Color;
        for &w in g.neighbors(v) {
            if seen[w].len() <= c {
                seen[w].resize(c + 1, false);
            }
            if !seen[w][c] {
                seen[w][c] = true;
                sat[w] += 1;
            }
        }
    }
    colors
}

struct Search<'a, G: Adjacency + ?Sized> {
    g: &'a G,
    k: usize,
    colors: Vec<usize>,
    // forbidden[v * k + c]: number of neighbors of v colored c+1
    forbidden: Vec<u32>,
    sat: Vec<usize>,
    expansions: u64,
    budget: u64,
}

enum Outcome {
    Found,
    Exhausted,
    OutOfBudget,
}

impl<G: Adjacency + ?Sized> Search<'_, G> {
    fn assign(&mut self, v: usize, c: usize) {
        self.colors[v] = c;
        for &w in self.g.neighbors(v) {
            let slot = &mut self.forbidden[w * self.k + c - 1];
            *slot += 1;
            if *slot == 1 {
                self.sat[w] += 1;
            }
        }
    }

    fn unassign(&mut self, v: usize, c: usize) {
        self.colors[v] = 0;
        for &w in self.g.neighbors(v) {
            let slot = &mut self.forbidden[w * self.k + c - 1];
            *slot -= 1;
            if *slot == 0 {
                self.sat[w] -= 1;
            }
        }
    }

    fn solve(&mut self, used: usize) -> Outcome {
        let n = self.g.node_count();
        let mut pick: Option<usize> = None;
        for v in 0..n {
            if self.colors[v] != 0 {
                continue;
            }
            if self.sat[v] == self.k {
                return Outcome::Exhausted;
            }
            let better = match pick {
                None => true,
                Some(p) => (self.sat[v], self.g.degree(v)) > (self.sat[p], self.g.degree(p)),
            };
            if better {
                pick = Some(v);
            }
        }
        let Some(v) = pick else { return Outcome::Found };
        // colors above `used + 1` are symmetric to `used + 1`
        for c in 1..=self.k.min(used + 1) {
            if self.forbidden[v * self.k + c - 1] != 0 {
                continue;
            }
            if self.expansions >= self.budget {
                return Outcome::OutOfBudget;
            }
            self.expansions += 1;
            self.assign(v, c);
            match self.solve(used.max(c)) {
                Outcome::Exhausted => self.unassign(v, c),
                other => return other,
            }
        }
        Outcome::Exhausted
    }
}

fn decide<G: Adjacency + ?Sized>(g: &G, k: usize, clique: &[usize], budget: u64) -> (Colorability, u64) {
    if k == 0 {
        return (if g.node_count() == 0 { Colorability::Yes(Vec::new()) } else { Colorability::No }, 0);
    }
    if clique.len() > k {
        return (Colorability::No, 0);
    }
    let n = g.node_count();
    let mut s = Search { g, k, colors: vec![0; n], forbidden: vec![0; n * k], sat: vec![0; n], expansions: 0, budget };
    // a clique's colors can be fixed up to renaming
    for (i, &v) in clique.iter().enumerate() {
        s.assign(v, i + 1);
    }
    let out = match s.solve(clique.len()) {
        Outcome::Found => Colorability::Yes(s.colors.iter().map(|&c| c as Color).collect()),
        Outcome::Exhausted => Colorability::No,
        Outcome::OutOfBudget => Colorability::Unknown,
    };
    (out, s.expansions)
}

/// Three-valued `k`-colorability within `budget` search-node expansions.
pub fn is_k_colorable<G: Adjacency + ?Sized>(g: &G, k: usize, budget: u64) -> Colorability {
    decide(g, k, &greedy_clique(g), budget).0
}

/// Brackets `χ(g)` between a clique bound and DSATUR, then closes the gap by
/// deciding `k`-colorability for increasing `k` until the budget is spent.
pub fn chi_exact<G: Adjacency + ?Sized>(g: &G, budget: u64) -> ChiResult {
    let start = Instant::now();
    let clique = greedy_clique(g);
    let heuristic = dsatur(g);
    let mut upper = heuristic.iter().copied().max().unwrap_or(0) as usize;
    let mut witness = Some(heuristic);
    let mut lower = clique.len();
    let mut spent = 0u64;
    while lower < upper {
        let (answer, used) = decide(g, lower, &clique, budget - spent);
        spent += used;
        match answer {
            Colorability::No => lower += 1,
            Colorability::Yes(w) => {
                upper = lower;
                witness = Some(w);
            }
            Colorability::Unknown => break,
        }
    }
    if let Some(w) = &witness {
        debug_assert!(first_monochromatic_edge(g, w).is_none());
    }
    ChiResult {
        lower,
        upper,
        exact: lower == upper,
        witness,
        clique,
        expansions: spent,
        budget,
        elapsed_ms: start.elapsed().as_millis(),
    }
}

/// Writes `g` in DIMACS `col` format with 1-based vertices.
pub fn write_dimacs<G: Adjacency + ?Sized>(g: &G, out: &mut impl Write, comment: Option<&str>) -> io::Result<()> {
    if let Some(c) = comment {
        for line in c.lines() {
            writeln!(out, "c {line}")?;
        }
    }
    let edges = g.edges();
    writeln!(out, "p edge {} {}", g.node_count(), edges.len())?;
    for (u, v) in edges {
        writeln!(out, "e {} {}", u + 1, v + 1)?;
    }
    Ok(())
}

fn bad(msg: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.into())
}

/// Reads a DIMACS `col` graph. Repeated edges (in either orientation) are merged.
pub fn read_dimacs(input: impl BufRead) -> io::Result<SimpleGraph> {
    let mut n: Option<usize> = None;
    let mut edges = Vec::new();
    for line in input.lines() {
        let line = line?;
        let mut tok = line.split_whitespace();
        match tok.next() {
            None | Some("c") => {}
            Some("p") => {
                let format = tok.next().ok_or_else(|| bad("missing format"))?;
                if format != "edge" && format != "col" {
                    return Err(bad(format!("unknown format {format}")));
                }
                n = Some(tok.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad("bad vertex count"))?);
            }
            Some("e") => {
                let n = n.ok_or_else(|| bad("edge before header"))?;
                let mut end = || -> io::Result<usize> {
                    let v: usize = tok.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad(format!("bad edge line: {line}")))?;
                    if v == 0 || v > n {
                        return Err(bad(format!("vertex {v} out of range")));
                    }
                    Ok(v - 1)
                };
                let (u, v) = (end()?, end()?);
                edges.push((u.min(v), u.max(v)));
            }
            Some(other) => return Err(bad(format!("unknown line type {other}"))),
        }
    }
    let n = n.ok_or_else(|| bad("missing header"))?;
    edges.sort_unstable();
    edges.dedup();
    SimpleGraph::from_edges(n, &edges).map_err(|e| bad(e.to_string()))
}

/// Path of the sidecar that maps DIMACS indices to vertex encodings.
pub fn sidecar_path(col: &Path) -> PathBuf {
    let mut s = col.as_os_str().to_owned();
    s.push(".map.json");
    PathBuf::from(s)
}

/// Writes `g` to `path` as DIMACS plus a sidecar JSON mapping each 1-based
/// index to the vertex's canonical encoding (hex) and readable view.
pub fn export_dimacs(g: &NbhdGraph, path: &Path) -> io::Result<()> {
    let mut out = BufWriter::new(std::fs::File::create(path)?);
    let comment = format!("{g:?}");
    write_dimacs(g, &mut out, Some(&comment))?;
    out.flush()?;
    let map: Vec<_> = g
        .vertices()
        .iter()
        .enumerate()
        .map(|(i, v)| json!({ "index": i + 1, "encoding": hex::encode(v.encoding()), "view": v.to_string() }))
        .collect();
    let side = json!({
        "family": g.family(),
        "level": g.level(),
        "m": g.m(),
        "bound": g.bound(),
        "kind": g.kind(),
        "vertices": map,
    });
    std::fs::write(sidecar_path(path), serde_json::to_vec_pretty(&side)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle() {
        let t = SimpleGraph::complete(3);
        assert_eq!(is_k_colorable(&t, 2, 1000), Colorability::No);
        assert!(matches!(is_k_colorable(&t, 3, 1000), Colorability::Yes(_)));
    }

    #[test]
    fn complete_graphs() {
        for m in 1..=8 {
            let r = chi_exact(&SimpleGraph::complete(m), 10_000);
            assert!(r.exact);
            assert_eq!(r.upper, m);
        }
    }

    #[test]
    fn odd_cycle_needs_search() {
        let c = SimpleGraph::cycle(7);
        let r = chi_exact(&c, 10_000);
        assert_eq!((r.lower, r.upper, r.exact), (3, 3, true));
        let e = chi_exact(&SimpleGraph::cycle(8), 10_000);
        assert_eq!(e.upper, 2);
    }

    #[test]
    fn budget_yields_unknown() {
        // Grötzsch-like: Mycielski of C5 has χ = 4 and clique 2
        let edges = [
            (0, 1), (1, 2), (2, 3), (3, 4), (4, 0),
            (5, 1), (5, 4), (6, 0), (6, 2), (7, 1), (7, 3), (8, 2), (8, 4), (9, 3), (9, 0),
            (10, 5), (10, 6), (10, 7), (10, 8), (10, 9),
        ];
        let g = SimpleGraph::from_edges(11, &edges).unwrap();
        assert_eq!(is_k_colorable(&g, 3, 1), Colorability::Unknown);
        assert_eq!(is_k_colorable(&g, 3, 1_000_000), Colorability::No);
        let r = chi_exact(&g, 1_000_000);
        assert_eq!((r.lower, r.upper), (4, 4));
    }

    #[test]
    fn dimacs_round_trip() {
        let g = SimpleGraph::complete(3);
        let mut buf = Vec::new();
        write_dimacs(&g, &mut buf, None).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("p edge 3 3\n"));
        assert_eq!(text.lines().filter(|l| l.starts_with("e ")).count(), 3);
        let back = read_dimacs(&buf[..]).unwrap();
        assert_eq!(back.edges(), g.edges());
        assert!(read_dimacs("e 1 2\n".as_bytes()).is_err());
        assert!(read_dimacs("p edge 2 1\ne 1 3\n".as_bytes()).is_err());
    }
}
