#![allow(clippy::needless_range_loop)]

mod common;

use circle_ekr::search::{
    agreement_graph, circles_per_point, classify_family, enumerate_cliques, enumerate_maximum_intersecting, max_clique,
    max_t_intersecting, pencil, FamilyLabel, Graph, SearchBudget,
};
use circle_ekr::Error;
use common::*;
use proptest::prelude::*;
use rand::{rngs::StdRng, Rng, SeedableRng};

fn random_graph(n: usize, density: f64, seed: u64) -> (Graph, Vec<Vec<bool>>) {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut adj = vec![vec![false; n]; n];
    let mut g = Graph::new(n);
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(density) {
                adj[a][b] = true;
                adj[b][a] = true;
                g.add_edge(a, b);
            }
        }
    }
    (g, adj)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn max_clique_matches_the_oracle(n in 1usize..40, density in 0.05f64..0.95, seed in any::<u64>()) {
        let (g, adj) = random_graph(n, density, seed);
        let r = max_clique(&g, None, None, &SearchBudget::default());
        prop_assert!(r.optimal);
        prop_assert!(g.is_clique(&r.clique));
        prop_assert_eq!(r.size(), oracle_max(&adj));
    }

    #[test]
    fn enumeration_matches_the_oracle(n in 1usize..30, density in 0.1f64..0.9, seed in any::<u64>()) {
        let (g, adj) = random_graph(n, density, seed);
        let expected = oracle_maximum_cliques(&adj);
        let size = expected[0].len();
        prop_assert_eq!(enumerate_cliques(&g, size, &SearchBudget::default()).unwrap(), expected);
        if size > 1 {
            let smaller = enumerate_cliques(&g, size - 1, &SearchBudget::default());
            prop_assert!(matches!(smaller, Err(Error::BadArguments(_))));
        }
    }
}

#[test]
fn rooted_search_agrees_with_unrooted_search() {
    for g in [mobius(4), laguerre_cone(4), minkowski(4)] {
        for t in [1, 2] {
            let graph = agreement_graph(&g, t);
            let free = max_clique(&graph, None, None, &SearchBudget::default());
            let w = max_t_intersecting(&g, t, &SearchBudget::default()).unwrap();
            assert!(free.optimal && w.optimal);
            assert_eq!(free.size(), w.size, "{:?} q=4 t={t}", g.kind());
        }
    }
}

#[test]
fn mobius_order_four_two_intersecting_oracle() {
    let g = mobius(4);
    let w = max_t_intersecting(&g, 2, &SearchBudget::default()).unwrap();
    assert_eq!(w.size, oracle_max(&meet_matrix(&g, 2)));
}

#[test]
fn larger_t_never_increases_the_maximum() {
    for g in [mobius(3), laguerre_cone(3), minkowski(3), plus(2)] {
        let sizes: Vec<usize> = (1..=3)
            .map(|t| max_t_intersecting(&g, t, &SearchBudget::default()).unwrap().size)
            .collect();
        assert!(sizes.windows(2).all(|w| w[0] >= w[1]), "{sizes:?}");
        // three points determine a circle
        assert_eq!(sizes[2], 1);
    }
}

#[test]
fn tiny_budget_is_reported() {
    let g = laguerre_cone(5);
    let w = max_t_intersecting(&g, 2, &SearchBudget::nodes(5)).unwrap();
    assert!(!w.optimal);
    let r = enumerate_maximum_intersecting(&g, circles_per_point(&g), &SearchBudget::nodes(5));
    assert_eq!(r, Err(Error::BudgetExceeded));
}

#[test]
fn witnesses_are_deterministic() {
    let g = laguerre_poly(5);
    let a = max_t_intersecting(&g, 2, &SearchBudget::default()).unwrap();
    let b = max_t_intersecting(&g, 2, &SearchBudget::default()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn pencils_and_nucleus_families_are_labelled() {
    let g = laguerre_cone(4);
    for p in [0, 7, 19] {
        assert_eq!(classify_family(&g, &pencil(&g, &[p])), FamilyLabel::Pencil(p));
    }
    let nuc = g.nucleus_map().unwrap();
    let fam: Vec<usize> = (0..g.num_circles()).filter(|&c| nuc[c] == nuc[0]).collect();
    assert_eq!(classify_family(&g, &fam), FamilyLabel::Nucleus(nuc[0]));
    assert_eq!(classify_family(&g, &fam[1..]), FamilyLabel::Other);
    assert_eq!(
        max_t_intersecting(&g, 0, &SearchBudget::default()),
        Err(Error::BadArguments("t must be positive".into()))
    );
}
