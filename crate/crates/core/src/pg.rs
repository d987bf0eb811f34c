//! Points, lines and planes of PG(3,q).
//!
//! Points and planes are both indexed by the normalized coordinate vectors
//! of PG(3,q) in lexicographic order of element indices; a plane with dual
//! coordinates `u` contains the point `x` iff `u·x = 0`. Lines are never
//! enumerated globally, only built on demand from two points.

use std::collections::HashMap;

use crate::bits::BitSet;
use crate::error::{Error, Result};
use crate::gf::{Elem, Field};

pub type Coords = [Elem; 4];

/// Projective 3-space over a field, with points and planes enumerated.
#[derive(Clone, Debug)]
pub struct Space {
    field: Field,
    coords: Vec<Coords>,
    index: HashMap<Coords, usize>,
}

/// A line, stored as the sorted indices of its q+1 points.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Line {
    points: Vec<usize>,
}

impl Line {
    pub fn points(&self) -> &[usize] {
        &self.points
    }

    /// The two smallest point indices; determines the line.
    pub fn key(&self) -> (usize, usize) {
        (self.points[0], self.points[1])
    }

    pub fn contains(&self, p: usize) -> bool {
        self.points.binary_search(&p).is_ok()
    }
}

/// Normalizes so that the first nonzero coordinate is one. `None` for the zero vector.
pub fn normalize(f: &Field, v: &Coords) -> Option<Coords> {
    let lead = v.iter().copied().find(|x| !x.is_zero())?;
    let inv = f.inv(lead).ok()?;
    Some(v.map(|x| f.mul(x, inv)))
}

pub fn dot(f: &Field, u: &Coords, v: &Coords) -> Elem {
    u.iter()
        .zip(v)
        .fold(Elem::ZERO, |acc, (&a, &b)| f.add(acc, f.mul(a, b)))
}

fn det3(f: &Field, m: [[Elem; 3]; 3]) -> Elem {
    let minor = |c0: usize, c1: usize| f.sub(f.mul(m[1][c0], m[2][c1]), f.mul(m[1][c1], m[2][c0]));
    let t0 = f.mul(m[0][0], minor(1, 2));
    let t1 = f.mul(m[0][1], minor(0, 2));
    let t2 = f.mul(m[0][2], minor(0, 1));
    f.add(f.sub(t0, t1), t2)
}

/// True when the three vectors span at most a 2-space (collinear points).
pub fn collinear(f: &Field, a: &Coords, b: &Coords, c: &Coords) -> bool {
    // every 3x3 minor of the 3x4 matrix vanishes
    const COLS: [[usize; 3]; 4] = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];
    COLS.iter().all(|cols| {
        let row = |v: &Coords| cols.map(|i| v[i]);
        det3(f, [row(a), row(b), row(c)]).is_zero()
    })
}

impl Space {
    /// Enumerates all q³+q²+q+1 points (equivalently planes) of PG(3,q).
    pub fn new(field: Field) -> Space {
        let q = field.order();
        let mut coords = Vec::with_capacity(q * q * q + q * q + q + 1);
        for lead in 0..4 {
            let free = 3 - lead;
            for n in 0..q.pow(free as u32) {
                let mut v = [Elem::ZERO; 4];
                v[lead] = Elem::ONE;
                let mut rest = n;
                for pos in (lead + 1..4).rev() {
                    v[pos] = field.element(rest % q).unwrap();
                    rest /= q;
                }
                coords.push(v);
            }
        }
        coords.sort();
        let index = coords.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        Space { field, coords, index }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn order(&self) -> usize {
        self.field.order()
    }

    pub fn num_points(&self) -> usize {
        self.coords.len()
    }

    pub fn num_planes(&self) -> usize {
        self.coords.len()
    }

    pub fn point(&self, i: usize) -> &Coords {
        &self.coords[i]
    }

    /// Dual coordinates of plane `i`.
    pub fn plane(&self, i: usize) -> &Coords {
        &self.coords[i]
    }

    /// Index of the point represented by `v` (any nonzero scalar multiple).
    pub fn index_of(&self, v: &Coords) -> Option<usize> {
        normalize(&self.field, v).and_then(|n| self.index.get(&n).copied())
    }

    pub fn incident(&self, point: usize, plane: usize) -> bool {
        dot(&self.field, &self.coords[point], &self.coords[plane]).is_zero()
    }

    pub fn plane_points(&self, plane: usize) -> Vec<usize> {
        (0..self.num_points()).filter(|&p| self.incident(p, plane)).collect()
    }

    pub fn planes_through_point(&self, point: usize) -> Vec<usize> {
        (0..self.num_planes()).filter(|&h| self.incident(point, h)).collect()
    }

    /// All q+1 points of the line spanned by two distinct points.
    pub fn line_through(&self, p: usize, q: usize) -> Result<Line> {
        if p == q {
            return Err(Error::IdenticalPoints);
        }
        let f = &self.field;
        let (a, b) = (self.coords[p], self.coords[q]);
        let mut points = vec![p];
        for t in f.elements() {
            // a·t + b covers every point except a itself
            let v: Coords = std::array::from_fn(|i| f.add(f.mul(a[i], t), b[i]));
            points.push(self.index_of(&v).expect("nonzero combination"));
        }
        points.sort_unstable();
        Ok(Line { points })
    }

    /// Every line of the space, each once, ordered by key.
    pub fn all_lines(&self) -> Vec<Line> {
        let n = self.num_points();
        let mut out = Vec::new();
        for p in 0..n {
            for q in p + 1..n {
                let l = self.line_through(p, q).unwrap();
                if l.key() == (p, q) {
                    out.push(l);
                }
            }
        }
        out
    }

    /// Planes containing every point of the line.
    pub fn planes_through_line(&self, l: &Line) -> Vec<usize> {
        let (a, b) = l.key();
        (0..self.num_planes())
            .filter(|&h| self.incident(a, h) && self.incident(b, h))
            .collect()
    }

    pub fn are_collinear(&self, a: usize, b: usize, c: usize) -> bool {
        collinear(&self.field, &self.coords[a], &self.coords[b], &self.coords[c])
    }

    /// Human-readable coordinates, e.g. `(1,0,x,x+1)`.
    pub fn label(&self, i: usize) -> String {
        let parts: Vec<String> = self.coords[i].iter().map(|&e| self.field.label(e)).collect();
        format!("({})", parts.join(","))
    }
}

/// Number of points of the line lying in `set`.
pub fn line_class(l: &Line, set: &BitSet) -> usize {
    l.points().iter().filter(|&&p| set.contains(p)).count()
}
