use std::io::BufReader;

use colred::chromatic::{chi_exact, export_dimacs, greedy_clique, is_k_colorable, read_dimacs, sidecar_path, Colorability};
use colred::graph::{first_monochromatic_edge, SimpleGraph};
use colred::nbhd::{build_nh1, BuildLimits, Pair};
use colred::{Adjacency, Delivery};

#[test]
fn nh1_5_3_is_not_2_colorable() {
    let g = build_nh1(5, 3, Delivery::Multiset, BuildLimits::default()).unwrap();
    assert!(matches!(is_k_colorable(&g, 2, 1_000_000), Colorability::No));
    match is_k_colorable(&g, 5, 1_000_000) {
        Colorability::Yes(c) => assert!(first_monochromatic_edge(&g, &c).is_none()),
        other => panic!("expected a 5-coloring, got {other:?}"),
    }
}

#[test]
fn nh1_7_4_export_and_clique() {
    let g = build_nh1(7, 4, Delivery::Multiset, BuildLimits::default()).unwrap();
    // (x, [5] \ {x}) for x in [5], with colors 0-based
    let clique: Vec<usize> = (0..5)
        .map(|x| g.find_pair(&Pair::new(x, (0..5).filter(|&y| y != x).collect())).unwrap())
        .collect();
    for (i, &a) in clique.iter().enumerate() {
        for &b in &clique[i + 1..] {
            assert!(g.has_edge(a, b));
        }
    }
    assert!(greedy_clique(&g).len() >= 5);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nh1.col");
    export_dimacs(&g, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let edge_lines = text.lines().filter(|l| l.starts_with("e ")).count();
    assert_eq!(edge_lines, g.edge_count());
    assert!(text.lines().any(|l| l == format!("p edge {} {}", g.node_count(), g.edge_count())));
    let back = read_dimacs(BufReader::new(std::fs::File::open(&path).unwrap())).unwrap();
    assert_eq!(back.edges(), g.edges());
    let side: serde_json::Value = serde_json::from_slice(&std::fs::read(sidecar_path(&path)).unwrap()).unwrap();
    assert_eq!(side["vertices"].as_array().map(Vec::len), Some(g.node_count()));
    assert_eq!(side["vertices"][0]["view"], g.vertex(0).to_string());
}

#[test]
fn nh1_7_4_chromatic_number_is_six() {
    let g = build_nh1(7, 4, Delivery::Multiset, BuildLimits::default()).unwrap();
    assert!(matches!(is_k_colorable(&g, 5, 50_000_000), Colorability::No));
    match is_k_colorable(&g, 6, 50_000_000) {
        Colorability::Yes(c) => {
            assert!(first_monochromatic_edge(&g, &c).is_none());
            assert!(c.iter().all(|&x| (1..=6).contains(&x)));
        }
        other => panic!("expected a 6-coloring, got {other:?}"),
    }
}

#[test]
fn chi_on_small_graphs() {
    let cases = [
        (SimpleGraph::complete(6), 6),
        (SimpleGraph::cycle(9), 3),
        (SimpleGraph::cycle(10), 2),
        (SimpleGraph::path(1), 1),
    ];
    for (g, want) in cases {
        let r = chi_exact(&g, 100_000);
        assert!(r.exact);
        assert_eq!(r.upper, want);
        assert!(first_monochromatic_edge(&g, r.witness.as_ref().unwrap()).is_none());
    }
}

#[test]
fn nh1_chi_brackets() {
    for (m, d) in [(3u32, 2usize), (4, 2), (4, 3)] {
        let g = build_nh1(m, d, Delivery::Multiset, BuildLimits::default()).unwrap();
        let r = chi_exact(&g, 2_000_000);
        assert!(r.lower <= r.upper);
        assert!(r.lower >= r.clique.len());
        // a clique of d+1 vertices (x, [d+1]\{x}) always exists
        assert!(r.upper > d);
    }
}
