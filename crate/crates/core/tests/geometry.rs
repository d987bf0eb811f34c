mod common;

use circle_ekr::geometry::{build_isomorphism, from_quadratic_set, validate, GeometryKind};
use circle_ekr::quadset::{elliptic_quadric, is_arc, quadratic_form_rank_deficit, suzuki_tits};
use common::*;
use proptest::prelude::*;

#[test]
fn ovoids_meet_lines_in_at_most_two_points() {
    for q in [2, 3, 4, 5] {
        let qs = elliptic_quadric(&field(q)).unwrap();
        let census = qs.line_census();
        assert!(census[3..].iter().all(|&c| c == 0), "q={q} {census:?}");
        assert!(is_arc(qs.space(), qs.points()));
    }
}

#[test]
fn suzuki_tits_is_an_ovoid_but_not_a_quadric() {
    let f = field(8);
    let st = suzuki_tits(&f).unwrap();
    assert_eq!(st.points().len(), 65);
    assert!(st.line_census()[3..].iter().all(|&c| c == 0));
    assert_eq!(quadratic_form_rank_deficit(&st), 0);
    assert_eq!(quadratic_form_rank_deficit(&elliptic_quadric(&f).unwrap()), 1);
    let g = from_quadratic_set(&st).unwrap();
    assert_eq!((g.num_points(), g.num_circles()), (65, 8 * 65));
    assert!(!g.is_circle_transitive());
}

#[test]
fn cone_and_polynomial_models_are_isomorphic() {
    for q in [2, 3, 4, 5, 7] {
        let map = build_isomorphism(&laguerre_cone(q), &laguerre_poly(q)).unwrap();
        assert_eq!(map.len(), q * q + q, "q={q}");
    }
}

#[test]
fn isomorphism_refuses_mismatched_models() {
    assert!(build_isomorphism(&laguerre_poly(3), &laguerre_cone(3)).is_err());
    assert!(build_isomorphism(&laguerre_cone(3), &laguerre_poly(5)).is_err());
}

#[test]
fn hyperoval_cone_counts() {
    let g = laguerre_hyperoval(4);
    assert_eq!(g.kind(), GeometryKind::Laguerre);
    assert_eq!((g.num_points(), g.num_circles()), (20, 64));
    assert_eq!(g.parallel()[0].len(), 5);
    assert!(g.circles().iter().all(|c| c.len() == 5));
    assert!(validate(&g).all_ok());
}

#[test]
fn parallel_points_share_no_circle() {
    for g in [laguerre_cone(4), minkowski(4), minkowski_pgl(5)] {
        for classes in g.parallel() {
            for class in classes {
                for c in g.circles() {
                    assert!(class.iter().filter(|p| c.contains(p)).count() == 1);
                }
            }
        }
    }
}

#[test]
fn nucleus_extension_meets_in_zero_or_two() {
    for q in [2, 4, 8] {
        let g = plus(q);
        assert_eq!(g.kind(), GeometryKind::LaguerrePlus);
        assert_eq!(g.num_points(), q * q + 2 * q);
        for a in 0..g.num_circles() {
            for b in a + 1..g.num_circles() {
                assert!(matches!(g.meet(a, b), 0 | 2), "q={q} circles {a},{b}");
            }
        }
    }
}

#[test]
fn circle_count_through_three_points() {
    // three pairwise non-parallel points lie on exactly one circle
    let g = minkowski(3);
    let n = g.num_points();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                if g.are_parallel(a, b) || g.are_parallel(a, c) || g.are_parallel(b, c) {
                    continue;
                }
                let k = g
                    .circles()
                    .iter()
                    .filter(|x| [a, b, c].iter().all(|p| x.contains(p)))
                    .count();
                assert_eq!(k, 1);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn corrupting_a_circle_breaks_the_axioms(seed in 0usize..10_000, which in 0usize..3) {
        let g = match which {
            0 => mobius(3),
            1 => laguerre_cone(3),
            _ => minkowski(3),
        };
        let i = seed % g.num_circles();
        let mut c = g.circle(i).to_vec();
        let slot = (seed / 7) % c.len();
        let replacement = (0..g.num_points()).find(|p| !c.contains(p) && !g.circle(i).iter().any(|&x| x != c[slot] && g.are_parallel(x, *p)));
        prop_assume!(replacement.is_some());
        c[slot] = replacement.unwrap();
        c.sort_unstable();
        let bad = g.with_circle(i, c);
        prop_assert!(!validate(&bad).all_ok());
    }
}
