//! Quadratic sets of PG(3,q): elliptic quadrics, Suzuki–Tits ovoids, oval
//! cones and hyperbolic quadrics.
//!
//! Every constructor validates its output combinatorially; algebraic
//! descriptions are only used to generate candidate point sets.

use std::sync::Arc;

use serde::Serialize;

use crate::bits::BitSet;
use crate::error::{Error, Result};
use crate::gf::{Elem, Field};
use crate::pg::{Coords, Line, Space};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadKind {
    Elliptic,
    SuzukiTits,
    Cone,
    Hyperbolic,
}

/// How a plane meets a quadratic set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SectionKind {
    TangentPoint,
    Oval,
    LinePairOrLines,
    Other,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlaneSection {
    pub kind: SectionKind,
    pub points: Vec<usize>,
}

/// A point set of PG(3,q) together with its singular structure.
#[derive(Clone, Debug)]
pub struct QuadraticSet {
    kind: QuadKind,
    space: Arc<Space>,
    points: Vec<usize>,
    member: BitSet,
    singular: Vec<usize>,
    /// Cone base oval, in the plane X3 = 0.
    base: Option<Vec<usize>>,
    /// Even-order cones: the line through the vertex and the base nucleus.
    nucleus_line: Option<Line>,
    /// Hyperbolic quadrics: the two reguli.
    rulings: Option<[Vec<Line>; 2]>,
    conic_base: bool,
}

impl QuadraticSet {
    pub fn kind(&self) -> QuadKind {
        self.kind
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn field(&self) -> &Field {
        self.space.field()
    }

    pub fn order(&self) -> usize {
        self.space.order()
    }

    /// All points, sorted by index.
    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn contains(&self, p: usize) -> bool {
        self.member.contains(p)
    }

    pub fn member_set(&self) -> &BitSet {
        &self.member
    }

    pub fn singular_points(&self) -> &[usize] {
        &self.singular
    }

    pub fn vertex(&self) -> Option<usize> {
        (self.kind == QuadKind::Cone).then(|| self.singular[0])
    }

    pub fn base_oval(&self) -> Option<&[usize]> {
        self.base.as_deref()
    }

    pub fn nucleus_line(&self) -> Option<&Line> {
        self.nucleus_line.as_ref()
    }

    pub fn rulings(&self) -> Option<&[Vec<Line>; 2]> {
        self.rulings.as_ref()
    }

    /// True for the cone over the conic X0X2 = X1².
    pub fn is_quadric_cone(&self) -> bool {
        self.kind == QuadKind::Cone && self.conic_base
    }

    /// Non-singular points, sorted.
    pub fn nonsingular_points(&self) -> Vec<usize> {
        self.points
            .iter()
            .copied()
            .filter(|p| !self.singular.contains(p))
            .collect()
    }

    /// The nucleus of the oval section by `plane`: the point `plane ∩ ν` other
    /// than the vertex. Only for even-order cones and planes missing the vertex.
    pub fn plane_nucleus(&self, plane: usize) -> Option<usize> {
        let nu = self.nucleus_line.as_ref()?;
        if self.space.incident(self.singular[0], plane) {
            return None;
        }
        nu.points().iter().copied().find(|&p| self.space.incident(p, plane))
    }

    /// Section of the set by a plane, classified from its size and collinearity.
    pub fn plane_section(&self, plane: usize) -> PlaneSection {
        let points: Vec<usize> = self
            .points
            .iter()
            .copied()
            .filter(|&p| self.space.incident(p, plane))
            .collect();
        let q = self.order();
        let kind = if points.len() == 1 {
            SectionKind::TangentPoint
        } else if points.len() == q + 1 && is_arc(&self.space, &points) {
            SectionKind::Oval
        } else if contains_full_line(&self.space, &points) {
            SectionKind::LinePairOrLines
        } else {
            SectionKind::Other
        };
        PlaneSection { kind, points }
    }

    /// Planes whose section is an oval; for cones, planes through the vertex
    /// are excluded by construction since they meet the cone in lines.
    pub fn oval_planes(&self) -> Vec<(usize, Vec<usize>)> {
        (0..self.space.num_planes())
            .filter_map(|h| {
                let s = self.plane_section(h);
                (s.kind == SectionKind::Oval).then_some((h, s.points))
            })
            .collect()
    }

    /// `|l ∩ set|` for every line of the space; only sensible for small q.
    pub fn line_census(&self) -> Vec<usize> {
        let q = self.order();
        let mut census = vec![0; q + 2];
        for l in self.space.all_lines() {
            census[crate::pg::line_class(&l, &self.member)] += 1;
        }
        census
    }

    fn build(kind: QuadKind, space: Arc<Space>, mut points: Vec<usize>, singular: Vec<usize>) -> QuadraticSet {
        points.sort_unstable();
        points.dedup();
        let member = BitSet::from_indices(space.num_points(), points.iter().copied());
        QuadraticSet {
            kind,
            space,
            points,
            member,
            singular,
            base: None,
            nucleus_line: None,
            rulings: None,
            conic_base: false,
        }
    }
}

/// No three of the points are collinear.
pub fn is_arc(space: &Space, pts: &[usize]) -> bool {
    for (i, &a) in pts.iter().enumerate() {
        for (j, &b) in pts.iter().enumerate().skip(i + 1) {
            for &c in &pts[j + 1..] {
                if space.are_collinear(a, b, c) {
                    return false;
                }
            }
        }
    }
    true
}

fn contains_full_line(space: &Space, pts: &[usize]) -> bool {
    let set: std::collections::HashSet<usize> = pts.iter().copied().collect();
    for (i, &a) in pts.iter().enumerate() {
        for &b in &pts[i + 1..] {
            let l = space.line_through(a, b).unwrap();
            if l.points().iter().all(|p| set.contains(p)) {
                return true;
            }
        }
    }
    false
}

fn points_where(space: &Space, pred: impl Fn(&Coords) -> bool) -> Vec<usize> {
    (0..space.num_points()).filter(|&i| pred(space.point(i))).collect()
}

/// Smallest element of absolute trace one (even q).
fn smallest_trace_one(f: &Field) -> Elem {
    f.elements()
        .find(|&c| f.trace(c) == Elem::ONE)
        .expect("trace is onto the prime field")
}

/// Elliptic quadric `g(X0,X1) + X2X3 = 0` with `g` irreducible:
/// `X0² − nX1²` (n the smallest nonsquare) for odd q,
/// `X0² + X0X1 + cX1²` (c the smallest element of trace one) for even q.
pub fn elliptic_quadric(field: &Field) -> Result<QuadraticSet> {
    let space = Arc::new(Space::new(field.clone()));
    let f = field;
    let g: Box<dyn Fn(Elem, Elem) -> Elem> = if f.is_even() {
        let c = smallest_trace_one(f);
        Box::new(move |x0, x1| f.add(f.add(f.mul(x0, x0), f.mul(x0, x1)), f.mul(c, f.mul(x1, x1))))
    } else {
        let n = f.smallest_nonsquare().unwrap();
        Box::new(move |x0, x1| f.sub(f.mul(x0, x0), f.mul(n, f.mul(x1, x1))))
    };
    let pts = points_where(&space, |v| f.add(g(v[0], v[1]), f.mul(v[2], v[3])).is_zero());
    let qs = QuadraticSet::build(QuadKind::Elliptic, space, pts, vec![]);
    check_ovoid(&qs)?;
    Ok(qs)
}

fn check_ovoid(qs: &QuadraticSet) -> Result<()> {
    let q = qs.order();
    if qs.points.len() != q * q + 1 {
        return Err(Error::ConstructionInvalid(format!(
            "{} points instead of {}",
            qs.points.len(),
            q * q + 1
        )));
    }
    if !is_arc(&qs.space, &qs.points) {
        return Err(Error::ConstructionInvalid("three collinear points".to_string()));
    }
    Ok(())
}

/// Suzuki–Tits ovoid for q = 2^(2e+1), e ≥ 1, in the form
/// `{(xy + x^(σ+2) + y^σ, 1, x, y)} ∪ {(1,0,0,0)}` with σ = 2^(e+1).
pub fn suzuki_tits(field: &Field) -> Result<QuadraticSet> {
    let h = field.degree();
    if field.characteristic() != 2 || h < 3 || h.is_multiple_of(2) {
        return Err(Error::UnsupportedOrder(field.order()));
    }
    let sigma = 1u64 << ((h - 1) / 2 + 1);
    let f = field;
    let space = Arc::new(Space::new(field.clone()));
    let mut pts = vec![space
        .index_of(&[Elem::ONE, Elem::ZERO, Elem::ZERO, Elem::ZERO])
        .unwrap()];
    for x in f.elements() {
        for y in f.elements() {
            let x0 = f.add(f.add(f.mul(x, y), f.pow(x, sigma + 2)), f.pow(y, sigma));
            pts.push(space.index_of(&[x0, Elem::ONE, x, y]).unwrap());
        }
    }
    let qs = QuadraticSet::build(QuadKind::SuzukiTits, space, pts, vec![]);
    check_ovoid(&qs)?;
    if quadratic_form_rank_deficit(&qs) != 0 {
        return Err(Error::ConstructionInvalid("point set lies on a quadric".to_string()));
    }
    Ok(qs)
}

/// Dimension of the space of quadratic forms vanishing on every point of the set.
pub fn quadratic_form_rank_deficit(qs: &QuadraticSet) -> usize {
    let f = qs.field();
    let rows: Vec<Vec<Elem>> = qs
        .points
        .iter()
        .map(|&p| {
            let v = qs.space.point(p);
            let mut row = Vec::with_capacity(10);
            for i in 0..4 {
                for j in i..4 {
                    row.push(f.mul(v[i], v[j]));
                }
            }
            row
        })
        .collect();
    10 - rank_over(f, rows)
}

/// Rank of a matrix over GF(q) by Gaussian elimination.
pub(crate) fn rank_over(f: &Field, mut rows: Vec<Vec<Elem>>) -> usize {
    let cols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(pivot) = (rank..rows.len()).find(|&r| !rows[r][c].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = f.inv(rows[rank][c]).unwrap();
        let prow: Vec<Elem> = rows[rank].iter().map(|&x| f.mul(x, inv)).collect();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && !row[c].is_zero() {
                let m = row[c];
                for (x, &y) in row.iter_mut().zip(&prow) {
                    *x = f.sub(*x, f.mul(m, y));
                }
            }
        }
        rows[rank] = prow;
        rank += 1;
    }
    rank
}

/// The conic X0X2 = X1² in the plane X3 = 0, as coordinate vectors.
pub fn standard_conic(field: &Field) -> Vec<Coords> {
    let mut pts: Vec<Coords> = field
        .elements()
        .map(|s| [field.mul(s, s), s, Elem::ONE, Elem::ZERO])
        .collect();
    pts.push([Elem::ONE, Elem::ZERO, Elem::ZERO, Elem::ZERO]);
    pts
}

/// For even q: the conic plus its nucleus (0,1,0,0), minus the point (0,0,1,0).
/// The result is an oval whose nucleus is the removed point.
pub fn hyperoval_minus_point(field: &Field) -> Result<Vec<Coords>> {
    if !field.is_even() {
        return Err(Error::WrongParity(field.order()));
    }
    let removed = [Elem::ZERO, Elem::ZERO, Elem::ONE, Elem::ZERO];
    let mut pts: Vec<Coords> = standard_conic(field).into_iter().filter(|c| *c != removed).collect();
    pts.push([Elem::ZERO, Elem::ONE, Elem::ZERO, Elem::ZERO]);
    Ok(pts)
}

/// Quadric cone X0X2 = X1² with vertex (0,0,0,1).
pub fn quadric_cone(field: &Field) -> Result<QuadraticSet> {
    let mut qs = oval_cone(field, &standard_conic(field))?;
    qs.conic_base = true;
    Ok(qs)
}

/// The nucleus of an oval in a plane of even order: the unique point off the
/// oval lying on every tangent. Found by checking every point of the plane.
pub fn oval_nucleus(space: &Space, plane: usize, oval: &[usize]) -> Option<usize> {
    let on_oval = |p: usize| oval.contains(&p);
    space
        .plane_points(plane)
        .into_iter()
        .filter(|&x| !on_oval(x))
        .find(|&x| {
            oval.iter().all(|&p| {
                let l = space.line_through(x, p).unwrap();
                l.points().iter().filter(|&&y| on_oval(y)).count() == 1
            })
        })
}

/// Cone over an oval of the plane X3 = 0 with vertex R = (0,0,0,1).
pub fn oval_cone(field: &Field, base: &[Coords]) -> Result<QuadraticSet> {
    let q = field.order();
    let space = Arc::new(Space::new(field.clone()));
    let base_plane = space
        .index_of(&[Elem::ZERO, Elem::ZERO, Elem::ZERO, Elem::ONE])
        .unwrap();
    let mut base_idx = Vec::with_capacity(base.len());
    for c in base {
        let i = space
            .index_of(c)
            .ok_or_else(|| Error::NotAnOval("zero vector in base".to_string()))?;
        if !space.incident(i, base_plane) {
            return Err(Error::NotAnOval(format!("{} is not in the plane X3=0", space.label(i))));
        }
        base_idx.push(i);
    }
    base_idx.sort_unstable();
    base_idx.dedup();
    if base_idx.len() != q + 1 {
        return Err(Error::NotAnOval(format!(
            "{} distinct points instead of {}",
            base_idx.len(),
            q + 1
        )));
    }
    if !is_arc(&space, &base_idx) {
        return Err(Error::NotAnOval("three collinear points".to_string()));
    }
    let vertex = space
        .index_of(&[Elem::ZERO, Elem::ZERO, Elem::ZERO, Elem::ONE])
        .unwrap();
    let mut pts = vec![vertex];
    for &b in &base_idx {
        pts.extend(space.line_through(vertex, b).unwrap().points());
    }
    let nucleus_line = if field.is_even() {
        let n =
            oval_nucleus(&space, base_plane, &base_idx).ok_or_else(|| Error::NotAnOval("no nucleus".to_string()))?;
        Some(space.line_through(vertex, n).unwrap())
    } else {
        None
    };
    let mut qs = QuadraticSet::build(QuadKind::Cone, space, pts, vec![vertex]);
    qs.base = Some(base_idx);
    qs.nucleus_line = nucleus_line;
    if qs.points.len() != q * (q + 1) + 1 {
        return Err(Error::ConstructionInvalid(format!(
            "cone has {} points",
            qs.points.len()
        )));
    }
    Ok(qs)
}

/// Hyperbolic quadric X0X1 + X2X3 = 0 with its two reguli. Regulus 0 holds the
/// smallest line and the lines skew to it; regulus 1 the lines meeting it.
pub fn hyperbolic_quadric(field: &Field) -> Result<QuadraticSet> {
    let q = field.order();
    let f = field;
    let space = Arc::new(Space::new(field.clone()));
    let pts = points_where(&space, |v| f.add(f.mul(v[0], v[1]), f.mul(v[2], v[3])).is_zero());
    let mut qs = QuadraticSet::build(QuadKind::Hyperbolic, space, pts, vec![]);
    let mut lines = Vec::new();
    for (i, &a) in qs.points.iter().enumerate() {
        for &b in &qs.points[i + 1..] {
            let l = qs.space.line_through(a, b).unwrap();
            if l.key() == (a, b) && l.points().iter().all(|&p| qs.member.contains(p)) {
                lines.push(l);
            }
        }
    }
    lines.sort();
    if lines.len() != 2 * (q + 1) {
        return Err(Error::ConstructionInvalid(format!(
            "{} lines on the hyperbolic quadric",
            lines.len()
        )));
    }
    let l0 = lines[0].clone();
    let meets = |l: &Line| l.points().iter().any(|&p| l0.contains(p));
    let (b, a): (Vec<Line>, Vec<Line>) = lines.into_iter().partition(|l| *l != l0 && meets(l));
    if a.len() != q + 1 || b.len() != q + 1 {
        return Err(Error::ConstructionInvalid("reguli have wrong sizes".to_string()));
    }
    qs.rulings = Some([a, b]);
    Ok(qs)
}
