//! Shared builders and an independent clique oracle for the integration tests.

#![allow(dead_code)]

use circle_ekr::geometry::{
    from_quadratic_set, laguerre_plus, laguerre_polynomial_model, minkowski_pgl_model, CircleGeometry,
};
use circle_ekr::gf::Field;
use circle_ekr::quadset::{elliptic_quadric, hyperbolic_quadric, hyperoval_minus_point, oval_cone, quadric_cone};

pub fn field(q: usize) -> Field {
    Field::new(q).unwrap()
}

pub fn mobius(q: usize) -> CircleGeometry {
    from_quadratic_set(&elliptic_quadric(&field(q)).unwrap()).unwrap()
}

pub fn laguerre_cone(q: usize) -> CircleGeometry {
    from_quadratic_set(&quadric_cone(&field(q)).unwrap()).unwrap()
}

pub fn laguerre_poly(q: usize) -> CircleGeometry {
    laguerre_polynomial_model(&field(q))
}

pub fn laguerre_hyperoval(q: usize) -> CircleGeometry {
    let f = field(q);
    from_quadratic_set(&oval_cone(&f, &hyperoval_minus_point(&f).unwrap()).unwrap()).unwrap()
}

pub fn plus(q: usize) -> CircleGeometry {
    laguerre_plus(&laguerre_cone(q)).unwrap()
}

pub fn minkowski(q: usize) -> CircleGeometry {
    from_quadratic_set(&hyperbolic_quadric(&field(q)).unwrap()).unwrap()
}

pub fn minkowski_pgl(q: usize) -> CircleGeometry {
    minkowski_pgl_model(&field(q))
}

/// Pairs of circles sharing at least `t` points, from the raw point lists.
pub fn meet_matrix(g: &CircleGeometry, t: usize) -> Vec<Vec<bool>> {
    let n = g.num_circles();
    (0..n)
        .map(|a| {
            (0..n)
                .map(|b| a != b && g.circle(a).iter().filter(|p| g.circle(b).contains(p)).count() >= t)
                .collect()
        })
        .collect()
}

/// Every maximal clique, by Bron–Kerbosch without pivoting.
pub fn maximal_cliques(adj: &[Vec<bool>]) -> Vec<Vec<usize>> {
    fn go(adj: &[Vec<bool>], r: &mut Vec<usize>, p: Vec<usize>, x: Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if p.is_empty() && x.is_empty() {
            out.push(r.clone());
            return;
        }
        let mut p = p;
        let mut x = x;
        while let Some(v) = p.pop() {
            r.push(v);
            let np = p.iter().copied().filter(|&u| adj[v][u]).collect();
            let nx = x.iter().copied().filter(|&u| adj[v][u]).collect();
            go(adj, r, np, nx, out);
            r.pop();
            x.push(v);
        }
    }
    let mut out = Vec::new();
    go(adj, &mut Vec::new(), (0..adj.len()).collect(), Vec::new(), &mut out);
    for c in &mut out {
        c.sort_unstable();
    }
    out.sort();
    out
}

pub fn oracle_max(adj: &[Vec<bool>]) -> usize {
    maximal_cliques(adj).iter().map(Vec::len).max().unwrap_or(0)
}

/// All maximum cliques according to the oracle.
pub fn oracle_maximum_cliques(adj: &[Vec<bool>]) -> Vec<Vec<usize>> {
    let all = maximal_cliques(adj);
    let m = all.iter().map(Vec::len).max().unwrap_or(0);
    all.into_iter().filter(|c| c.len() == m).collect()
}
