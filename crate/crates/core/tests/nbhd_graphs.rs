use std::collections::{BTreeSet, HashSet};
use std::sync::Arc;

use colred::chromatic::chi_exact;
use colred::nbhd::{
    build_nh1, build_nsl, build_nt, build_ntilde, center, hom_f, hom_h, types, verify_homomorphism, BuildLimits,
    HomMap, NbhdGraph,
};
use colred::{Adjacency, Delivery, View};

fn lim() -> BuildLimits {
    BuildLimits::default()
}

/// Brute-force `NT_r` / `Ñ_r`: vertices as views, edges checked pairwise.
fn oracle_nt(r: u32, m: u32, d: usize, typed: bool) -> (BTreeSet<View>, usize) {
    let mut verts: Vec<View> = (1..=m).map(|c| View::leaf(Delivery::Set, c)).collect();
    let adj = |a: &View, b: &View| -> bool {
        match (a.inner(), b.inner()) {
            (None, None) => a != b,
            (Some(x), Some(y)) => a.child_views().any(|v| v == y) && b.child_views().any(|v| v == x),
            _ => unreachable!(),
        }
    };
    for _ in 0..r {
        let mut next = Vec::new();
        for x in &verts {
            let nb: Vec<&View> = verts.iter().filter(|y| adj(x, y)).collect();
            for mask in 0u64..(1 << nb.len()) {
                if mask.count_ones() as usize > d {
                    continue;
                }
                let a: Vec<View> = (0..nb.len()).filter(|i| mask >> i & 1 == 1).map(|i| nb[i].clone()).collect();
                if typed {
                    let want: BTreeSet<Option<View>> = types(x).into_iter().collect();
                    let have: BTreeSet<Option<View>> = a.iter().map(center).collect();
                    if want != have {
                        continue;
                    }
                }
                next.push(View::node(Delivery::Set, x.clone(), a).unwrap());
            }
        }
        verts = next;
    }
    let mut edges = 0;
    for (i, a) in verts.iter().enumerate() {
        for b in &verts[i + 1..] {
            if adj(a, b) {
                edges += 1;
            }
        }
    }
    (verts.into_iter().collect(), edges)
}

/// Set-semantics `r`-views along a colored path, computed directly.
fn path_views(colors: &[u32], r: u32) -> Vec<View> {
    let mut cur: Vec<View> = colors.iter().map(|&c| View::leaf(Delivery::Set, c)).collect();
    for _ in 0..r {
        cur = (0..colors.len())
            .map(|i| {
                let mut kids = Vec::new();
                if i > 0 {
                    kids.push(cur[i - 1].clone());
                }
                if i + 1 < colors.len() {
                    kids.push(cur[i + 1].clone());
                }
                View::node(Delivery::Set, cur[i].clone(), kids).unwrap()
            })
            .collect();
    }
    cur
}

/// `NSL_r(m, 2)` from all properly colored paths with up to `2r + 2` nodes.
fn oracle_nsl_paths(r: u32, m: u32) -> (BTreeSet<View>, BTreeSet<(View, View)>) {
    let mut verts = BTreeSet::new();
    let mut edges = BTreeSet::new();
    let mut stack: Vec<Vec<u32>> = (1..=m).map(|c| vec![c]).collect();
    while let Some(p) = stack.pop() {
        let views = path_views(&p, r);
        verts.extend(views.iter().cloned());
        for w in views.windows(2) {
            let (a, b) = (w[0].clone(), w[1].clone());
            edges.insert(if a < b { (a, b) } else { (b, a) });
        }
        if p.len() < 2 * r as usize + 2 {
            for c in 1..=m {
                if c != *p.last().unwrap() {
                    let mut q = p.clone();
                    q.push(c);
                    stack.push(q);
                }
            }
        }
    }
    (verts, edges)
}

fn vertex_set(g: &NbhdGraph) -> BTreeSet<View> {
    g.vertices().iter().cloned().collect()
}

fn edge_set(g: &NbhdGraph) -> BTreeSet<(View, View)> {
    g.edges()
        .into_iter()
        .map(|(u, v)| {
            let (a, b) = (g.vertex(u).clone(), g.vertex(v).clone());
            if a < b {
                (a, b)
            } else {
                (b, a)
            }
        })
        .collect()
}

#[test]
fn nt_and_ntilde_match_brute_force() {
    for (r, m, d, n_nt, n_nl) in [(1, 3, 2, 12, 9), (2, 3, 2, 60, 0), (1, 4, 2, 28, 0), (2, 4, 2, 352, 0), (1, 5, 4, 80, 0)] {
        let nt = build_nt(r, m, d, lim()).unwrap();
        let (ov, oe) = oracle_nt(r, m, d, false);
        assert_eq!(vertex_set(&nt), ov, "NT_{r}({m},{d})");
        assert_eq!(nt.edge_count(), oe, "NT_{r}({m},{d}) edges");
        assert_eq!(nt.node_count(), n_nt);
        let nl = build_ntilde(r, m, d, lim()).unwrap();
        let (lv, le) = oracle_nt(r, m, d, true);
        assert_eq!(vertex_set(&nl), lv, "Ñ_{r}({m},{d})");
        assert_eq!(nl.edge_count(), le);
        if n_nl > 0 {
            assert_eq!(nl.node_count(), n_nl);
        }
    }
}

#[test]
fn frozen_counts() {
    assert_eq!(build_nt(1, 7, 4, lim()).unwrap().node_count(), 399);
    assert_eq!(build_ntilde(1, 4, 4, lim()).unwrap().node_count(), 28);
    assert_eq!(build_nh1(7, 4, Delivery::Multiset, lim()).unwrap().node_count(), 1470);
    assert_eq!(build_nh1(5, 3, Delivery::Multiset, lim()).unwrap().node_count(), 175);
    assert_eq!(build_nsl(1, 4, 2, lim()).unwrap().node_count(), 28);
}

#[test]
fn ntilde_is_induced_subgraph_of_nt() {
    for (r, m, d) in [(1, 3, 2), (2, 3, 2), (2, 4, 2), (1, 5, 3)] {
        let nt = build_nt(r, m, d, lim()).unwrap();
        let nl = build_ntilde(r, m, d, lim()).unwrap();
        let ids: Vec<usize> = nl.vertices().iter().map(|v| nt.index_of(v).expect("Ñ ⊆ NT")).collect();
        for (u, v) in nl.edges() {
            assert!(nt.has_edge(ids[u], ids[v]));
        }
        for (a, &u) in ids.iter().enumerate() {
            for (b, &v) in ids.iter().enumerate() {
                assert_eq!(nt.has_edge(u, v), nl.has_edge(a, b));
            }
        }
    }
}

#[test]
fn nt1_coincides_with_nh1_set() {
    for (m, d) in [(3, 2), (5, 3), (6, 4)] {
        let nt = build_nt(1, m, d, lim()).unwrap();
        let nh = build_nh1(m, d, Delivery::Set, lim()).unwrap();
        assert_eq!(nt.vertices(), nh.vertices());
        assert_eq!(nt.edges(), nh.edges());
    }
}

#[test]
fn nsl_matches_path_enumeration() {
    for (r, m) in [(1, 3), (1, 4), (2, 3), (2, 4)] {
        let g = build_nsl(r, m, 2, lim()).unwrap();
        let (ov, oe) = oracle_nsl_paths(r, m);
        assert_eq!(vertex_set(&g), ov, "NSL_{r}({m},2) vertices");
        assert_eq!(edge_set(&g), oe, "NSL_{r}({m},2) edges");
    }
}

#[test]
fn nsl_grows_with_delta() {
    for (r, m) in [(1, 4), (2, 3)] {
        let small = build_nsl(r, m, 2, lim()).unwrap();
        let big = build_nsl(r, m, 3, lim()).unwrap();
        for v in small.vertices() {
            assert!(big.index_of(v).is_some(), "{v} missing for larger delta");
        }
        for (u, v) in small.edges() {
            let (a, b) = (big.index_of(small.vertex(u)).unwrap(), big.index_of(small.vertex(v)).unwrap());
            assert!(big.has_edge(a, b));
        }
    }
}

#[test]
fn structural_invariants() {
    let graphs = [
        build_nh1(4, 2, Delivery::Multiset, lim()).unwrap(),
        build_nt(2, 3, 2, lim()).unwrap(),
        build_ntilde(2, 4, 2, lim()).unwrap(),
        build_nsl(2, 3, 2, lim()).unwrap(),
    ];
    for g in &graphs {
        let distinct: HashSet<&View> = g.vertices().iter().collect();
        assert_eq!(distinct.len(), g.node_count());
        for (u, v) in g.edges() {
            assert!(g.has_edge(v, u));
            assert_ne!(g.part(u).unwrap().center, g.part(v).unwrap().center);
            assert!(g.part(u).unwrap().adjacent(g.part(v).unwrap()));
        }
    }
}

#[test]
fn h1_is_a_bijection_onto_nonempty_views() {
    let h = hom_h(1, 3, 2, lim()).unwrap();
    assert!(h.verified());
    let image: BTreeSet<View> = h.images.iter().cloned().collect();
    assert_eq!(image.len(), 9);
    let nonempty: BTreeSet<View> = h.codomain.vertices().iter().filter(|v| v.child_total() > 0).cloned().collect();
    assert_eq!(image, nonempty);
}

#[test]
fn h0_and_f0_are_identities() {
    for map in [hom_h(0, 4, 2, lim()).unwrap(), hom_f(0, 4, 2, lim()).unwrap()] {
        assert!(map.verified());
        assert_eq!(map.images, map.domain.vertices());
    }
}

fn chi_of(g: &NbhdGraph) -> Option<usize> {
    let r = chi_exact(g, 2_000_000);
    r.exact.then_some(r.upper)
}

fn check_monotone(map: &HomMap) {
    if let (Some(a), Some(b)) = (chi_of(&map.domain), chi_of(&map.codomain)) {
        assert!(a <= b, "{}: chi {a} > {b}", map.name);
    }
}

#[test]
fn homomorphisms_verify_and_chi_is_monotone() {
    for (r, m, d) in [(1, 3, 2), (1, 4, 2), (2, 3, 2)] {
        let h = hom_h(r, m, d, lim()).unwrap();
        assert!(h.verified());
        check_monotone(&h);
    }
    for (r, m, d) in [(1, 3, 1), (1, 4, 2)] {
        let f = hom_f(r, m, d, lim()).unwrap();
        assert!(f.verified());
        check_monotone(&f);
    }
}

#[test]
fn reverification_is_stable() {
    let mut f = hom_f(1, 4, 2, lim()).unwrap();
    let report = verify_homomorphism(&mut f);
    assert!(report.is_empty());
    assert_eq!(report.checked_edges, f.domain.edge_count());
    let d = Arc::clone(&f.domain);
    let mut broken = HomMap::new("shifted", d.clone(), f.codomain.clone(), {
        let mut imgs = f.images.clone();
        imgs.rotate_left(1);
        imgs
    });
    assert!(!verify_homomorphism(&mut broken).is_empty());
}
