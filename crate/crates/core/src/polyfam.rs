//! Intersecting families of polynomials of bounded degree over GF(q), and
//! root counts of quadratic polynomials over the extended line GF(q) ∪ {∞}.
//!
//! A polynomial of degree at most k is stored by its index `Σ c_i q^i`, where
//! `c_i` is the element index of the coefficient of `X^i`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf::{Elem, Field, QuadChar};
use crate::search::{enumerate_cliques, max_clique, Graph, SearchBudget};

/// Largest `q^(k+2)` for which the full evaluation table is kept.
const TABLE_LIMIT: usize = 10_000_000;

#[derive(Clone, Debug)]
pub struct PolySpace {
    field: Field,
    k: usize,
    size: usize,
    /// `evals[f * q + x]`, when small enough to keep.
    evals: Option<Vec<Elem>>,
}

impl PolySpace {
    pub fn new(field: &Field, k: usize) -> Result<PolySpace> {
        let q = field.order();
        let size = q
            .checked_pow(k as u32 + 1)
            .filter(|&s| s <= u32::MAX as usize)
            .ok_or_else(|| Error::BadArguments(format!("q^(k+1) too large for q={q}, k={k}")))?;
        let mut s = PolySpace {
            field: field.clone(),
            k,
            size,
            evals: None,
        };
        if size.saturating_mul(q) <= TABLE_LIMIT {
            let table = (0..size)
                .flat_map(|f| {
                    let s = &s;
                    field.elements().map(move |x| s.eval_direct(f, x))
                })
                .collect();
            s.evals = Some(table);
        }
        Ok(s)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn degree_bound(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    /// Coefficients `c_0..c_k` of polynomial `f`.
    pub fn coefficients(&self, f: usize) -> Vec<Elem> {
        let q = self.field.order();
        let mut rest = f;
        (0..=self.k)
            .map(|_| {
                let c = Elem::from_index(rest % q);
                rest /= q;
                c
            })
            .collect()
    }

    pub fn index_of(&self, coeffs: &[Elem]) -> usize {
        let q = self.field.order();
        coeffs.iter().rev().fold(0, |acc, c| acc * q + c.index())
    }

    fn eval_direct(&self, f: usize, x: Elem) -> Elem {
        let fl = &self.field;
        self.coefficients(f)
            .iter()
            .rev()
            .fold(Elem::ZERO, |acc, &c| fl.add(fl.mul(acc, x), c))
    }

    #[inline]
    pub fn eval(&self, f: usize, x: Elem) -> Elem {
        match &self.evals {
            Some(t) => t[f * self.field.order() + x.index()],
            None => self.eval_direct(f, x),
        }
    }

    /// Number of `x` in GF(q) with `f(x) = g(x)`.
    pub fn agreement(&self, f: usize, g: usize) -> usize {
        self.field
            .elements()
            .filter(|&x| self.eval(f, x) == self.eval(g, x))
            .count()
    }

    /// Edges between distinct polynomials agreeing in at least `t` places.
    pub fn agreement_graph(&self, t: usize) -> Graph {
        Graph::from_fn(self.size, |a, b| self.agreement(a, b) >= t)
    }

    /// `F_{x,y} = {f : f(x) = y}`.
    pub fn star(&self, x: Elem, y: Elem) -> Vec<usize> {
        (0..self.size).filter(|&f| self.eval(f, x) == y).collect()
    }

    /// Polynomials vanishing at the first `t` field elements.
    fn vanishing(&self, t: usize) -> Vec<usize> {
        let pts: Vec<Elem> = self.field.elements().take(t).collect();
        (0..self.size)
            .filter(|&f| pts.iter().all(|&x| self.eval(f, x).is_zero()))
            .collect()
    }

    /// Polynomials of degree below `t`.
    fn low_degree(&self, t: usize) -> Vec<usize> {
        (0..self.field.order().pow(t as u32)).collect()
    }
}

/// Result of the two searches on the t-agreement graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PolyMax {
    pub q: usize,
    pub k: usize,
    pub t: usize,
    /// A largest t-intersecting family.
    pub family: Vec<usize>,
    /// A largest family in which no two members agree in t places.
    pub non_family: Vec<usize>,
    pub optimal: bool,
}

impl PolyMax {
    pub fn max_size(&self) -> usize {
        self.family.len()
    }

    pub fn non_size(&self) -> usize {
        self.non_family.len()
    }

    /// `(q^(k+1-t), q^t)`.
    pub fn expected(&self) -> (usize, usize) {
        (self.q.pow((self.k + 1 - self.t) as u32), self.q.pow(self.t as u32))
    }

    pub fn matches(&self) -> bool {
        self.optimal && (self.max_size(), self.non_size()) == self.expected()
    }
}

fn check_tk(space: &PolySpace, t: usize) -> Result<()> {
    if t == 0 || t > space.k || space.k >= space.field.order() {
        return Err(Error::BadArguments(format!(
            "need 1 <= t <= k < q, got t={t}, k={}, q={}",
            space.k,
            space.field.order()
        )));
    }
    Ok(())
}

/// Largest t-intersecting and largest non-t-intersecting families. The
/// graph is vertex-transitive under adding a fixed polynomial, so both
/// searches are rooted at the zero polynomial.
pub fn max_t_intersecting_polys(space: &PolySpace, t: usize, budget: &SearchBudget) -> Result<PolyMax> {
    check_tk(space, t)?;
    let g = space.agreement_graph(t);
    let a = max_clique(&g, Some(0), Some(&space.vanishing(t)), budget);
    let co = g.complement();
    let b = max_clique(&co, Some(0), Some(&space.low_degree(t)), budget);
    Ok(PolyMax {
        q: space.field.order(),
        k: space.k,
        t,
        optimal: a.optimal && b.optimal,
        family: a.clique,
        non_family: b.clique,
    })
}

/// A maximum intersecting family, with the point `(x, y)` when it is `F_{x,y}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PolyFamily {
    pub polys: Vec<usize>,
    pub star: Option<(usize, usize)>,
}

/// Every intersecting family of size `q^k`, each identified as some `F_{x,y}`
/// when it is one.
pub fn strong_ekr_polys(space: &PolySpace, budget: &SearchBudget) -> Result<Vec<PolyFamily>> {
    if space.k < 2 || space.k >= space.field.order() {
        return Err(Error::BadArguments("need 2 <= k < q".to_string()));
    }
    let q = space.field.order();
    let g = space.agreement_graph(1);
    let fams = enumerate_cliques(&g, q.pow(space.k as u32), budget)?;
    Ok(fams
        .into_iter()
        .map(|polys| {
            let f0 = polys[0];
            let star = space.field.elements().find_map(|x| {
                let y = space.eval(f0, x);
                (space.star(x, y) == polys).then_some((x.index(), y.index()))
            });
            PolyFamily { polys, star }
        })
        .collect())
}

/// A point of GF(q) ∪ {∞}; a quadratic polynomial takes its leading coefficient at ∞.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExtPoint {
    Finite(Elem),
    Infinity,
}

impl ExtPoint {
    /// All q+1 points, finite ones first.
    pub fn all(field: &Field) -> Vec<ExtPoint> {
        field
            .elements()
            .map(ExtPoint::Finite)
            .chain(std::iter::once(ExtPoint::Infinity))
            .collect()
    }
}

/// `h = a X² + b X + c` evaluated at a point of the extended line.
fn eval_quad(f: &Field, [c, b, a]: [Elem; 3], x: ExtPoint) -> Elem {
    match x {
        ExtPoint::Infinity => a,
        ExtPoint::Finite(x) => f.add(f.mul(f.add(f.mul(a, x), b), x), c),
    }
}

/// Distinct roots over GF(q) ∪ {∞}; ∞ is a root when the degree is below two.
fn ext_roots(f: &Field, h: [Elem; 3]) -> usize {
    ExtPoint::all(f)
        .into_iter()
        .filter(|&x| eval_quad(f, h, x).is_zero())
        .count()
}

fn quadratics(f: &Field) -> impl Iterator<Item = [Elem; 3]> + '_ {
    f.elements()
        .flat_map(move |a| f.elements().flat_map(move |b| f.elements().map(move |c| [c, b, a])))
}

fn require_odd(f: &Field) -> Result<()> {
    if f.is_even() {
        return Err(Error::BadArguments(format!("q = {} must be odd", f.order())));
    }
    Ok(())
}

/// `(m0, m1, m2)`: quadratics through `(x1, y1)` and `(x2, y2)` with 0, 1, 2
/// distinct roots over GF(q) ∪ {∞}.
pub fn mi_counts(f: &Field, x1: ExtPoint, y1: Elem, x2: ExtPoint, y2: Elem) -> Result<[usize; 3]> {
    require_odd(f)?;
    if x1 == x2 || y1.is_zero() || y2.is_zero() {
        return Err(Error::BadArguments("need x1 != x2 and nonzero y1, y2".to_string()));
    }
    let mut m = [0usize; 3];
    for h in quadratics(f) {
        if eval_quad(f, h, x1) == y1 && eval_quad(f, h, x2) == y2 {
            m[ext_roots(f, h)] += 1;
        }
    }
    Ok(m)
}

/// Quadratics with no root over GF(q) ∪ {∞} taking the value `y` at `x`.
pub fn rootless_count(f: &Field, x: ExtPoint, y: Elem) -> Result<usize> {
    require_odd(f)?;
    if y.is_zero() {
        return Err(Error::BadArguments("y must be nonzero".to_string()));
    }
    Ok(quadratics(f)
        .filter(|&h| eval_quad(f, h, x) == y && ext_roots(f, h) == 0)
        .count())
}

/// Smallest `c` such that `c - a` and `c - b` are a nonzero square and a
/// nonsquare in some order.
pub fn square_separator(f: &Field, a: Elem, b: Elem) -> Result<Elem> {
    require_odd(f)?;
    if a == b {
        return Err(Error::BadArguments("a and b must differ".to_string()));
    }
    let ok = |c: Elem| {
        let (u, v) = (f.quadratic_character(f.sub(c, a)), f.quadratic_character(f.sub(c, b)));
        u != QuadChar::Zero && v != QuadChar::Zero && u != v
    };
    let c = f
        .elements()
        .find(|&c| ok(c))
        .ok_or_else(|| Error::ConstructionInvalid("no separating element".to_string()))?;
    assert!(ok(c));
    Ok(c)
}

/// Class of `y1/y2`: nonzero square or nonsquare.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioClass {
    Square,
    NonSquare,
}

impl RatioClass {
    pub fn name(self) -> &'static str {
        match self {
            RatioClass::Square => "square",
            RatioClass::NonSquare => "nonsquare",
        }
    }

    /// Closed-form `(m0, m1, m2)`.
    pub fn expected(self, q: usize) -> [usize; 3] {
        match self {
            RatioClass::Square => [(q - 1) / 2, 2, (q - 3) / 2],
            RatioClass::NonSquare => [q.div_ceil(2), 0, (q - 1) / 2],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Table1Row {
    pub q: usize,
    pub class: RatioClass,
    pub m: [usize; 3],
    /// Every input in the class gave the same counts.
    pub uniform: bool,
    /// Inputs examined in the class.
    pub inputs: usize,
}

impl Table1Row {
    pub fn matches(&self) -> bool {
        self.uniform && self.m == self.class.expected(self.q)
    }
}

/// `mi_counts` over every valid `(x1, y1, x2, y2)`, grouped by the class of `y1/y2`.
pub fn table1(f: &Field) -> Result<Vec<Table1Row>> {
    require_odd(f)?;
    let q = f.order();
    let pts = ExtPoint::all(f);
    let mut rows: Vec<Table1Row> = [RatioClass::Square, RatioClass::NonSquare]
        .iter()
        .map(|&class| Table1Row {
            q,
            class,
            m: [0; 3],
            uniform: true,
            inputs: 0,
        })
        .collect();
    for &x1 in &pts {
        for &x2 in &pts {
            if x1 == x2 {
                continue;
            }
            for y1 in f.nonzero() {
                for y2 in f.nonzero() {
                    let m = mi_counts(f, x1, y1, x2, y2)?;
                    let r = f.div(y1, y2)?;
                    let row = &mut rows[if f.is_square(r) { 0 } else { 1 }];
                    if row.inputs == 0 {
                        row.m = m;
                    } else if row.m != m {
                        row.uniform = false;
                    }
                    row.inputs += 1;
                }
            }
        }
    }
    Ok(rows)
}

/// CSV with columns `q,class,m0,m1,m2`.
pub fn table1_csv(rows: &[Table1Row]) -> String {
    let mut s = String::from("q,class,m0,m1,m2\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            r.q,
            r.class.name(),
            r.m[0],
            r.m[1],
            r.m[2]
        ));
    }
    s
}

/// CSV with columns `q,k,t,max_size,bound,match`.
pub fn poly_csv(rows: &[PolyMax]) -> String {
    let mut s = String::from("q,k,t,max_size,bound,match\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.q,
            r.k,
            r.t,
            r.max_size(),
            r.expected().0,
            r.matches()
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn space(q: usize, k: usize) -> PolySpace {
        PolySpace::new(&Field::new(q).unwrap(), k).unwrap()
    }

    #[test]
    fn agreement_examples() {
        let s = space(3, 2);
        let f = Field::new(3).unwrap();
        let e = |i| f.element(i).unwrap();
        let x2 = s.index_of(&[e(0), e(0), e(1)]);
        let x = s.index_of(&[e(0), e(1), e(0)]);
        assert_eq!(s.agreement(x2, x), 2);
        assert_eq!(s.agreement(x2, x2), 3);
        assert_eq!(s.agreement(x, s.index_of(&[e(2), e(1), e(0)])), 0);
        assert_eq!(s.len(), 27);
    }

    #[test]
    fn small_maxima() {
        let s = space(3, 2);
        let r1 = max_t_intersecting_polys(&s, 1, &SearchBudget::default()).unwrap();
        assert_eq!((r1.max_size(), r1.non_size()), (9, 3));
        let r2 = max_t_intersecting_polys(&s, 2, &SearchBudget::default()).unwrap();
        assert_eq!((r2.max_size(), r2.non_size()), (3, 9));
        assert!(r1.matches() && r2.matches());
        assert!(max_t_intersecting_polys(&s, 3, &SearchBudget::default()).is_err());
    }

    #[test]
    fn strong_ekr_q3() {
        let fams = strong_ekr_polys(&space(3, 2), &SearchBudget::default()).unwrap();
        assert_eq!(fams.len(), 9);
        let mut labels: Vec<(usize, usize)> = fams.iter().map(|f| f.star.unwrap()).collect();
        labels.sort_unstable();
        let all: Vec<(usize, usize)> = (0..3).flat_map(|x| (0..3).map(move |y| (x, y))).collect();
        assert_eq!(labels, all);
    }

    #[test]
    fn table1_q5() {
        let f = Field::new(5).unwrap();
        let rows = table1(&f).unwrap();
        assert_eq!(rows[0].m, [2, 2, 1]);
        assert_eq!(rows[1].m, [3, 0, 2]);
        assert!(rows.iter().all(Table1Row::matches));
        assert_eq!(
            table1_csv(&rows),
            "q,class,m0,m1,m2\n5,square,2,2,1\n5,nonsquare,3,0,2\n"
        );
    }

    #[test]
    fn rootless() {
        for (q, n) in [(3, 3), (5, 10), (7, 21)] {
            let f = Field::new(q).unwrap();
            for x in ExtPoint::all(&f) {
                for y in f.nonzero() {
                    assert_eq!(rootless_count(&f, x, y).unwrap(), n);
                }
            }
        }
        let f4 = Field::new(4).unwrap();
        assert!(rootless_count(&f4, ExtPoint::Infinity, Elem::ONE).is_err());
    }

    #[test]
    fn separator() {
        let f5 = Field::new(5).unwrap();
        let e = |i| f5.element(i).unwrap();
        assert_eq!(square_separator(&f5, e(0), e(1)).unwrap(), e(2));
        assert!(square_separator(&f5, e(1), e(1)).is_err());
        let f7 = Field::new(7).unwrap();
        // brute force: 1 square, 2 square, 3 nonsquare; c=3 gives 3 and 2
        assert_eq!(square_separator(&f7, Elem::ZERO, Elem::ONE).unwrap().index(), 3);
        assert!(square_separator(&Field::new(4).unwrap(), Elem::ZERO, Elem::ONE).is_err());
    }

    #[test]
    fn stars_are_intersecting() {
        for (q, k) in [(3, 1), (3, 2), (4, 2), (5, 2), (4, 3)] {
            let s = space(q, k);
            let f = s.field().clone();
            for x in f.elements() {
                for y in f.elements() {
                    let st = s.star(x, y);
                    assert_eq!(st.len(), q.pow(k as u32));
                    assert!(st.iter().all(|&a| st.iter().all(|&b| s.agreement(a, b) >= 1)));
                }
            }
        }
    }

    proptest! {
        #[test]
        fn mi_identities(q in prop::sample::select(vec![3usize, 5, 7, 9]), i1 in 0usize..10, i2 in 0usize..10, a in 1usize..9, b in 1usize..9) {
            let f = Field::new(q).unwrap();
            let pts = ExtPoint::all(&f);
            let (x1, x2) = (pts[i1 % pts.len()], pts[i2 % pts.len()]);
            prop_assume!(x1 != x2);
            let (y1, y2) = (f.element(1 + a % (q - 1)).unwrap(), f.element(1 + b % (q - 1)).unwrap());
            let m = mi_counts(&f, x1, y1, x2, y2).unwrap();
            prop_assert_eq!(m[0] + m[1] + m[2], q);
            prop_assert_eq!(m[1] + 2 * m[2], q - 1);
        }

        #[test]
        fn separator_predicate(q in prop::sample::select(vec![3usize, 5, 7, 9, 11, 25]), a in 0usize..25, b in 0usize..25) {
            let f = Field::new(q).unwrap();
            let (a, b) = (f.element(a % q).unwrap(), f.element(b % q).unwrap());
            prop_assume!(a != b);
            let c = square_separator(&f, a, b).unwrap();
            let u = f.quadratic_character(f.sub(c, a));
            let v = f.quadratic_character(f.sub(c, b));
            prop_assert!(u != QuadChar::Zero && v != QuadChar::Zero && u != v);
        }
    }
}
