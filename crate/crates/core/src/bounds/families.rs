//! Random color-class families for exercising the refuters: greedy maximal
//! independent sets of explicit hosts, stars and covers that force chosen
//! vertices to become sources, and defect-bounded greedy classes.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::Adjacency;
use crate::nbhd::{NbhdGraph, Pair};

/// Greedy maximal independent set containing `seed`, scanning `order`.
pub fn maximal_independent<G: Adjacency + ?Sized>(g: &G, seed: &[usize], order: &[usize]) -> Vec<usize> {
    let mut blocked = vec![false; g.node_count()];
    let mut out = Vec::new();
    for &v in seed.iter().chain(order) {
        if blocked[v] {
            continue;
        }
        out.push(v);
        blocked[v] = true;
        for &w in g.neighbors(v) {
            blocked[w] = true;
        }
    }
    out.sort_unstable();
    out
}

pub fn random_maximal_independent<G: Adjacency + ?Sized, R: Rng>(g: &G, rng: &mut R) -> Vec<usize> {
    let mut order: Vec<usize> = (0..g.node_count()).collect();
    order.shuffle(rng);
    maximal_independent(g, &[], &order)
}

/// Vertices of `top` centered at `x`; they are pairwise non-adjacent.
pub fn star(top: &NbhdGraph, x: usize) -> Vec<usize> {
    top.parts().iter().enumerate().filter(|(_, p)| p.center == x).map(|(i, _)| i).collect()
}

/// `c` maximal independent sets of an explicit graph, each grown from a
/// random star half of the time.
pub fn random_classes<R: Rng>(top: &NbhdGraph, c: usize, rng: &mut R) -> Vec<Vec<usize>> {
    let below = top.below().map_or(0, |b| b.node_count());
    (0..c)
        .map(|_| {
            let seed = if below > 0 && rng.gen_bool(0.5) { star(top, rng.gen_range(0..below)) } else { Vec::new() };
            let mut order: Vec<usize> = (0..top.node_count()).collect();
            order.shuffle(rng);
            maximal_independent(top, &seed, &order)
        })
        .collect()
}

/// Builds a class pair by pair while keeping its induced degree at most `limit`.
#[derive(Debug, Clone, Default)]
pub struct ClassBuilder {
    pairs: Vec<Pair>,
    seen: HashSet<Pair>,
    by_center: HashMap<usize, Vec<usize>>,
    deg: Vec<usize>,
    limit: usize,
}

impl ClassBuilder {
    pub fn new(limit: usize) -> Self {
        Self { limit, ..Self::default() }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Adds `p` unless it is already present or would push a degree past the limit.
    pub fn try_add(&mut self, p: Pair) -> bool {
        if self.seen.contains(&p) {
            return false;
        }
        let nbrs: Vec<usize> = p
            .distinct()
            .into_iter()
            .flat_map(|y| self.by_center.get(&y).into_iter().flatten().copied())
            .filter(|&q| self.pairs[q].contains(p.center))
            .collect();
        if nbrs.len() > self.limit || nbrs.iter().any(|&q| self.deg[q] >= self.limit) {
            return false;
        }
        for &q in &nbrs {
            self.deg[q] += 1;
        }
        self.by_center.entry(p.center).or_default().push(self.pairs.len());
        self.deg.push(nbrs.len());
        self.seen.insert(p.clone());
        self.pairs.push(p);
        true
    }

    /// Adds all of `ps` or none of them; pairs already present are skipped.
    pub fn try_add_all(&mut self, ps: &[Pair]) -> bool {
        let mut next = self.clone();
        for p in ps {
            if !next.seen.contains(p) && !next.try_add(p.clone()) {
                return false;
            }
        }
        *self = next;
        true
    }

    pub fn into_pairs(self) -> Vec<Pair> {
        self.pairs
    }
}

/// Pairs centered at `x` whose member sets split `Γ(x)` into chunks of at most
/// `bound`, making `x` a source.
pub fn cover_pairs<R: Rng>(g: &NbhdGraph, x: usize, bound: usize, rng: &mut R) -> Vec<Pair> {
    let mut nb = g.neighbors(x).to_vec();
    nb.shuffle(rng);
    if nb.is_empty() {
        return vec![Pair::new(x, Vec::new())];
    }
    nb.chunks(bound.max(1)).map(|c| Pair::new(x, c.to_vec())).collect()
}

/// Top-level pairs over `base` whose source chain contains the level-`level`
/// vertex `x`: covers at `x`, then covers at each covering vertex, up to the top.
pub fn deep_source<R: Rng>(base: &Arc<NbhdGraph>, level: u32, x: usize, bound: usize, rng: &mut R) -> Vec<Pair> {
    let g = base.level_graph(level).expect("level is at or below the base");
    let cover = cover_pairs(&g, x, bound, rng);
    if level == base.level() {
        return cover;
    }
    let up = base.level_graph(level + 1).expect("chain is complete");
    cover
        .iter()
        .flat_map(|p| {
            let u = up.find_pair(p).expect("chunks of a neighborhood are vertices");
            deep_source(base, level + 1, u, bound, rng)
        })
        .collect()
}

/// A uniformly random center with a random subset of its neighbors.
pub fn random_pair<R: Rng>(g: &NbhdGraph, bound: usize, rng: &mut R) -> Pair {
    let x = rng.gen_range(0..g.node_count());
    let mut nb = g.neighbors(x).to_vec();
    nb.shuffle(rng);
    let size = rng.gen_range(0..=bound.min(nb.len()));
    nb.truncate(size);
    Pair::new(x, nb)
}

/// `c` independent classes of the level above `base`: each gets up to
/// `sources` deep sources at random levels, then `fill` random pair attempts.
pub fn random_implicit_classes<R: Rng>(
    base: &Arc<NbhdGraph>,
    bound: usize,
    c: usize,
    sources: usize,
    fill: usize,
    rng: &mut R,
) -> Vec<Vec<Pair>> {
    (0..c)
        .map(|_| {
            let mut b = ClassBuilder::new(0);
            for _ in 0..sources {
                let level = rng.gen_range(0..=base.level());
                let g = base.level_graph(level).expect("chain is complete");
                let x = rng.gen_range(0..g.node_count());
                b.try_add_all(&deep_source(base, level, x, bound, rng));
            }
            for _ in 0..fill {
                b.try_add(random_pair(base, bound, rng));
            }
            b.into_pairs()
        })
        .collect()
}

/// Pairs centered at `x` in `K_m` such that every `d+1` other colors lie in a
/// common member set: the others are cut into blocks of `Δ/(d+1)` and every
/// union of `d+1` blocks is one member set.
pub fn block_cover<R: Rng>(k_m: &NbhdGraph, x: usize, delta: usize, d: usize, rng: &mut R) -> Vec<Pair> {
    let mut others = k_m.neighbors(x).to_vec();
    others.shuffle(rng);
    let blocks: Vec<&[usize]> = others.chunks((delta / (d + 1)).max(1)).collect();
    let pick = (d + 1).min(blocks.len());
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..pick).collect();
    loop {
        out.push(Pair::new(x, idx.iter().flat_map(|&i| blocks[i].iter().copied()).collect()));
        // next combination in lexicographic order
        let Some(i) = (0..pick).rev().find(|&i| idx[i] < blocks.len() - pick + i) else { break };
        idx[i] += 1;
        for j in i + 1..pick {
            idx[j] = idx[j - 1] + 1;
        }
    }
    out
}

/// `c` classes of `NH1(m, Δ)` over `k_m` with induced degree at most `d`:
/// half of them start from a block cover at a random color, then `fill`
/// random pairs are tried.
pub fn random_defective_classes<R: Rng>(
    k_m: &NbhdGraph,
    delta: usize,
    d: usize,
    c: usize,
    fill: usize,
    rng: &mut R,
) -> Vec<Vec<Pair>> {
    (0..c)
        .map(|_| {
            let mut b = ClassBuilder::new(d);
            if rng.gen_bool(0.5) {
                let x = rng.gen_range(0..k_m.node_count());
                b.try_add_all(&block_cover(k_m, x, delta, d, rng));
            }
            for _ in 0..fill {
                b.try_add(random_pair(k_m, delta, rng));
            }
            b.into_pairs()
        })
        .collect()
}
