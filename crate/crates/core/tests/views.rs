use colred::graph::random_colored_tree;
use colred::sim::{full_information_program, run_with};
use colred::view::{extract_all, extract_view, ViewInterner};
use colred::{Adjacency, ColoredGraph, Delivery, View};
use proptest::prelude::*;

/// A view spelled out as a plain tree with sorted, counted children.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Tree {
    Leaf(u32),
    Node(Box<Tree>, Vec<(Tree, u32)>),
}

fn counted(mut kids: Vec<Tree>, kind: Delivery) -> Vec<(Tree, u32)> {
    kids.sort();
    let mut out: Vec<(Tree, u32)> = Vec::new();
    for k in kids {
        match out.last_mut() {
            Some(last) if last.0 == k => {
                if kind == Delivery::Multiset {
                    last.1 += 1
                }
            }
            _ => out.push((k, 1)),
        }
    }
    out
}

fn naive(g: &ColoredGraph, v: usize, r: u32, kind: Delivery) -> Tree {
    if r == 0 {
        return Tree::Leaf(g.psi()[v]);
    }
    let kids = g.neighbors(v).iter().map(|&u| naive(g, u, r - 1, kind)).collect();
    Tree::Node(Box::new(naive(g, v, r - 1, kind)), counted(kids, kind))
}

fn tree_of(v: &View) -> Tree {
    match v.inner() {
        None => Tree::Leaf(v.base_color()),
        Some(inner) => {
            let mut kids: Vec<(Tree, u32)> = v.children().iter().map(|(c, k)| (tree_of(c), *k)).collect();
            kids.sort();
            Tree::Node(Box::new(tree_of(inner)), kids)
        }
    }
}

fn simulated(g: &ColoredGraph, r: u32, kind: Delivery) -> Vec<View> {
    let res = run_with(g, &full_information_program(r as usize), kind, false).unwrap();
    res.states.iter().map(|s| s.view(kind)).collect()
}

fn check_sample(g: &ColoredGraph, v: usize, r: u32) {
    for kind in [Delivery::Set, Delivery::Multiset] {
        let x = extract_view(g, v, r, kind);
        assert_eq!(simulated(g, r, kind)[v], x, "simulator vs extraction, {kind:?} r={r}");
        assert_eq!(tree_of(&x), naive(g, v, r, kind));
        assert_eq!(View::decode(&x.encode()).unwrap(), x);
        assert_eq!(View::from_json(kind, &x.to_json()).unwrap(), x);
    }
    let set = extract_view(g, v, r, Delivery::Set);
    let multi = extract_view(g, v, r, Delivery::Multiset);
    assert_eq!(multi.erase_multiplicities(), set);
}

#[test]
fn small_colors_expose_multiplicities() {
    let mut differ = 0;
    for seed in 0..40 {
        let g = random_colored_tree(30, 4, 2 + (seed % 3) as u32, seed).unwrap();
        for v in (0..g.n()).step_by(7) {
            for r in 0..=3 {
                check_sample(&g, v, r);
                let set = extract_view(&g, v, r, Delivery::Set);
                let multi = extract_view(&g, v, r, Delivery::Multiset);
                differ += usize::from(tree_of(&set) != tree_of(&multi));
            }
        }
    }
    assert!(differ > 0);
}

#[test]
fn truncation_recovers_shorter_views() {
    let g = random_colored_tree(40, 3, 3, 1).unwrap();
    for v in 0..g.n() {
        let x = extract_view(&g, v, 3, Delivery::Multiset);
        for k in 0..=3 {
            assert_eq!(x.truncate(k).unwrap(), extract_view(&g, v, k, Delivery::Multiset));
        }
        assert!(x.truncate(4).is_err());
    }
}

#[test]
fn interner_ids_match_view_equality() {
    for kind in [Delivery::Set, Delivery::Multiset] {
        let g = random_colored_tree(120, 3, 3, 9).unwrap();
        let views = extract_all(&g, g.psi(), 2, kind);
        let ids = ViewInterner::new(kind).ids(&g, g.psi(), 2);
        for a in 0..g.n() {
            for b in 0..g.n() {
                assert_eq!(ids[a] == ids[b], views[a] == views[b]);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn simulator_extraction_and_oracle_agree(
        seed in any::<u64>(),
        n in 1usize..40,
        delta in 2usize..5,
        m in 2u32..6,
        r in 0u32..=3,
        pick in any::<prop::sample::Index>(),
    ) {
        let g = random_colored_tree(n, delta, m, seed).unwrap();
        check_sample(&g, pick.index(n), r);
    }
}
