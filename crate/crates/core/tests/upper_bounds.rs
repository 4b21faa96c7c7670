use colred::algos::{
    delta_plus_one_program, kw_step_program, kw_target, linial_full_program, linial_step_program, ReductionProgram,
};
use colred::graph::{random_colored_tree, validate_proper};
use colred::sim::{check_correspondence, full_information_program, run, EraseMultiplicity};
use colred::Delivery;
use proptest::prelude::*;

mod common;

use common::{oracle_kw, oracle_linial_palettes};

#[test]
fn linial_fixpoint_trace() {
    let p = linial_full_program(1_000_000, 4).unwrap();
    assert_eq!(p.palettes(), vec![1_000_000, 289, 121]);
    assert_eq!(p.linial_rounds(), 2);
    for (m, d) in [(1_000_000, 4), (10_000, 3), (500, 2), (1 << 30, 8), (100, 4)] {
        assert_eq!(linial_full_program(m, d).unwrap().palettes(), oracle_linial_palettes(m, d as u64), "m={m} Δ={d}");
    }
}

#[test]
fn kw_single_step() {
    assert_eq!(kw_step_program(10, 2).unwrap().final_palette(), 8);
    assert_eq!(kw_step_program(7, 5).unwrap().final_palette(), 6);
    for m in 4..60u64 {
        for d in 1..m as usize - 2 {
            assert_eq!(kw_target(m, d), oracle_kw(m, d as u64));
        }
    }
    assert!(kw_step_program(5, 4).is_err());
}

fn check_program(p: &ReductionProgram, m: u32, delta: usize, seeds: std::ops::Range<u64>, kind: Delivery) {
    for seed in seeds {
        let g = random_colored_tree(60, delta, m, seed).unwrap();
        let (phi, trace) = run(&g, p, kind).unwrap();
        assert_eq!(trace.round_count(), p.stages.len());
        assert!(validate_proper(&g, &phi).unwrap(), "{} seed {seed}", p.label);
        assert!(phi.colors.iter().all(|&c| (1..=phi.palette).contains(&c)));
    }
}

#[test]
fn delta_plus_one_is_proper() {
    for delta in 2..=6 {
        for m in [100u32, 10_000, 1_000_000] {
            let p = delta_plus_one_program(m as u64, delta).unwrap();
            assert_eq!(p.final_palette(), delta as u64 + 1);
            check_program(&p, m, delta, 0..5, Delivery::Set);
            check_program(&p, m, delta, 5..7, Delivery::Multiset);
        }
    }
}

#[test]
fn every_program_is_a_view_function() {
    let trees = |m: u32, delta: usize| -> Vec<_> { (0..20).map(|s| random_colored_tree(40, delta, m, s).unwrap()).collect() };
    for (m, delta) in [(1000u32, 3usize), (50, 4), (12, 2)] {
        let inst = trees(m, delta);
        let progs = [
            linial_step_program(m as u64, delta),
            linial_full_program(m as u64, delta),
            kw_step_program(m as u64, delta),
            delta_plus_one_program(m as u64, delta),
        ];
        for p in progs.into_iter().flatten() {
            let rep = check_correspondence(&p, p.stages.len(), m, delta, &inst, Delivery::Set).unwrap();
            assert!(rep.is_clean(), "{}: {:?}", p.label, rep);
        }
        for r in 0..=2 {
            let rep = check_correspondence(&full_information_program(r), r, m, delta, &inst, Delivery::Set).unwrap();
            assert!(rep.is_clean());
            assert_eq!(rep.determinism.len(), 0);
        }
    }
}

#[test]
fn multiset_run_of_erased_program_equals_set_run() {
    let p = delta_plus_one_program(40, 3).unwrap();
    for seed in 0..10 {
        let g = random_colored_tree(50, 3, 40, seed).unwrap();
        let (a, _) = run(&g, &p, Delivery::Set).unwrap();
        let (b, _) = run(&g, &EraseMultiplicity(p.clone()), Delivery::Multiset).unwrap();
        assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn delta1_proper_on_random_trees(seed in any::<u64>(), n in 1usize..80, delta in 2usize..7, m in 8u32..5000) {
        let p = delta_plus_one_program(m as u64, delta).unwrap();
        let g = random_colored_tree(n, delta, m, seed).unwrap();
        let (phi, _) = run(&g, &p, Delivery::Set).unwrap();
        prop_assert!(validate_proper(&g, &phi).unwrap());
        prop_assert!(phi.colors.iter().all(|&c| c as usize <= delta + 1));
    }

    #[test]
    fn palettes_strictly_shrink(m in 3u64..1_000_000, delta in 1usize..10) {
        let p = delta_plus_one_program(m.max(delta as u64 + 2), delta).unwrap();
        let pal = p.palettes();
        prop_assert!(pal.windows(2).all(|w| w[1] < w[0]));
        prop_assert_eq!(*pal.last().unwrap(), (delta as u64 + 1).min(pal[0]));
    }
}
