//! Small exact linear-algebra helpers over the integers and rationals.

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{One, Zero};

pub type Rat = Ratio<i128>;

pub fn rat(n: i128) -> Rat {
    Rat::from_integer(n)
}

/// `a/b` or `a` for integers.
pub fn fmt_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Characteristic polynomial `det(xI − M)`, coefficients from the constant term up.
/// Faddeev–LeVerrier; every division is exact for integer matrices.
pub fn char_poly(m: &[Vec<i128>]) -> Vec<i128> {
    let n = m.len();
    let mut coeffs = vec![0i128; n + 1];
    coeffs[n] = 1;
    let mut mk = vec![vec![0i128; n]; n]; // M_0 = 0
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = mat_mul(m, &mk);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += coeffs[n - k + 1];
        }
        mk = next;
        let am = mat_mul(m, &mk);
        let tr: i128 = (0..n).map(|i| am[i][i]).sum();
        debug_assert_eq!(tr % k as i128, 0);
        coeffs[n - k] = -tr / k as i128;
    }
    coeffs
}

pub fn mat_mul(a: &[Vec<i128>], b: &[Vec<i128>]) -> Vec<Vec<i128>> {
    let n = a.len();
    let p = b.first().map_or(0, |r| r.len());
    let mut out = vec![vec![0i128; p]; n];
    for i in 0..n {
        for (k, &aik) in a[i].iter().enumerate() {
            if aik != 0 {
                for j in 0..p {
                    out[i][j] += aik * b[k][j];
                }
            }
        }
    }
    out
}

pub fn poly_eval(p: &[i128], x: i128) -> i128 {
    p.iter().rev().fold(0, |acc, &c| acc * x + c)
}

/// Integer roots of an integer polynomial with multiplicity, ascending.
/// Candidates are the divisors of the lowest nonzero coefficient with absolute
/// value at most `bound`. Returns `None` if the roots found do not account
/// for the full degree.
pub fn integer_roots(p: &[i128], bound: i128) -> Option<Vec<i128>> {
    let mut p: Vec<i128> = p.to_vec();
    while p.len() > 1 && *p.last().unwrap() == 0 {
        p.pop();
    }
    let degree = p.len() - 1;
    let mut roots = Vec::new();
    while p.len() > 1 && p[0] == 0 {
        roots.push(0);
        p.remove(0);
    }
    let c0 = p[0].abs();
    let mut candidates = Vec::new();
    for d in 1..=bound.min(c0) {
        if c0 % d == 0 {
            candidates.push(d);
            candidates.push(-d);
        }
    }
    for r in candidates {
        while p.len() > 1 && poly_eval(&p, r) == 0 {
            p = deflate(&p, r);
            roots.push(r);
        }
    }
    roots.sort_unstable();
    (roots.len() == degree).then_some(roots)
}

/// Divides by (x − r) given that r is a root.
fn deflate(p: &[i128], r: i128) -> Vec<i128> {
    let n = p.len() - 1;
    let mut q = vec![0i128; n];
    let mut carry = 0i128;
    for i in (0..n).rev() {
        carry = p[i + 1] + carry * r;
        q[i] = carry;
    }
    q
}

/// Reduced row echelon form in place; returns pivot columns.
pub fn rref(m: &mut [Vec<Rat>]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c];
                let pivot_row = m[r].clone();
                for (x, y) in m[i].iter_mut().zip(&pivot_row) {
                    *x -= f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Basis of the right null space of `m`.
pub fn null_space(m: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    let cols = m.first().map_or(0, |r| r.len());
    let mut a = m.to_vec();
    let pivots = rref(&mut a);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rat::zero(); cols];
            v[f] = Rat::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -a[r][f];
            }
            v
        })
        .collect()
}

pub fn transpose<T: Clone>(m: &[Vec<T>]) -> Vec<Vec<T>> {
    let cols = m.first().map_or(0, |r| r.len());
    (0..cols).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect()
}

/// Inverse of a square rational matrix, if nonsingular.
pub fn inverse(m: &[Vec<Rat>]) -> Option<Vec<Vec<Rat>>> {
    let n = m.len();
    let mut aug: Vec<Vec<Rat>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rat::one() } else { Rat::zero() }));
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Solves `m x = b` for square nonsingular `m`.
pub fn solve(m: &[Vec<Rat>], b: &[Rat]) -> Option<Vec<Rat>> {
    let inv = inverse(m)?;
    Some(
        inv.iter()
            .map(|row| row.iter().zip(b).map(|(x, y)| x * y).sum())
            .collect(),
    )
}

/// Rank over the rationals of an integer matrix, by fraction-free elimination.
pub fn bareiss_rank(mut m: Vec<Vec<BigInt>>) -> usize {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        for i in r + 1..rows {
            for j in c + 1..cols {
                let v = (&m[r][c] * &m[i][j] - &m[i][c] * &m[r][j]) / &prev;
                m[i][j] = v;
            }
            m[i][c] = BigInt::zero();
        }
        prev = m[r][c].clone();
        r += 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn char_poly_known() {
        // [[2,1],[1,2]] has eigenvalues 1 and 3
        let p = char_poly(&[vec![2, 1], vec![1, 2]]);
        assert_eq!(p, vec![3, -4, 1]);
        assert_eq!(integer_roots(&p, 10), Some(vec![1, 3]));
        // x^2 - 2 has no integer roots
        assert_eq!(integer_roots(&[-2, 0, 1], 10), None);
        assert_eq!(integer_roots(&[0, 0, 1], 10), Some(vec![0, 0]));
    }

    #[test]
    fn inverse_and_solve() {
        let m = vec![vec![rat(2), rat(1)], vec![rat(1), rat(1)]];
        let inv = inverse(&m).unwrap();
        assert_eq!(inv, vec![vec![rat(1), rat(-1)], vec![rat(-1), rat(2)]]);
        assert_eq!(solve(&m, &[rat(3), rat(2)]).unwrap(), vec![rat(1), rat(1)]);
        assert!(inverse(&[vec![rat(1), rat(2)], vec![rat(2), rat(4)]]).is_none());
        assert_eq!(fmt_rat(&Rat::new(6, 4)), "3/2");
        assert_eq!(fmt_rat(&rat(-5)), "-5");
    }

    #[test]
    fn null_space_basis() {
        let m = vec![vec![rat(1), rat(1), rat(0)], vec![rat(0), rat(0), rat(1)]];
        let ns = null_space(&m);
        assert_eq!(ns, vec![vec![rat(-1), rat(1), rat(0)]]);
    }

    proptest! {
        #[test]
        fn char_poly_of_diagonal_conjugate(d in prop::collection::vec(-6i128..6, 1..5)) {
            // upper triangular with the given diagonal
            let n = d.len();
            let m: Vec<Vec<i128>> = (0..n).map(|i| (0..n).map(|j| if i == j { d[i] } else if j > i { (i + 2 * j) as i128 % 3 } else { 0 }).collect()).collect();
            let roots = integer_roots(&char_poly(&m), 100).unwrap();
            let mut expect = d.clone();
            expect.sort_unstable();
            prop_assert_eq!(roots, expect);
        }

        #[test]
        fn bareiss_matches_rational_rank(entries in prop::collection::vec(-3i64..4, 12)) {
            let m: Vec<Vec<i64>> = entries.chunks(4).map(|c| c.to_vec()).collect();
            let big: Vec<Vec<BigInt>> = m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
            let mut q: Vec<Vec<Rat>> = m.iter().map(|r| r.iter().map(|&x| rat(x as i128)).collect()).collect();
            prop_assert_eq!(bareiss_rank(big), rref(&mut q).len());
        }
    }
}
